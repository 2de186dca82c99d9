#include "sblab/balance_system.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "sblab/errors.hpp"

namespace sblab {

std::vector<std::string> w_names(int m) {
  std::vector<std::string> names;
  names.reserve(m);
  for (int i = 1; i <= m; ++i) names.push_back("w" + std::to_string(i));
  return names;
}

int BalanceSystem::index_of(const std::string& field) const {
  auto it = std::find(field_names.begin(), field_names.end(), field);
  return it == field_names.end()
             ? -1
             : static_cast<int>(it - field_names.begin());
}

void BalanceSystem::validate() const {
  const std::size_t m = field_names.size();
  if (m < 1) throw DimensionMismatchError("system needs at least one field");
  if (spatial_dim < 1 || spatial_dim > 3)
    throw DimensionMismatchError("spatial_dim must be 1, 2 or 3");
  std::set<std::string> seen(field_names.begin(), field_names.end());
  if (seen.size() != m)
    throw DimensionMismatchError("duplicate field name in system '" + name +
                                 "'");
  if (densities.size() != m)
    throw DimensionMismatchError("expected one density per field");
  if (fluxes.size() != static_cast<std::size_t>(spatial_dim))
    throw DimensionMismatchError("expected one flux block per spatial axis");
  for (const auto& block : fluxes)
    if (block.size() != m)
      throw DimensionMismatchError("expected one flux entry per field");
  if (productions.size() != m)
    throw DimensionMismatchError("expected one production per field");
  if (domain_box.size() != m)
    throw DimensionMismatchError("expected one domain interval per field");
  for (const auto& iv : domain_box)
    if (!(iv.lo < iv.hi))
      throw DimensionMismatchError("empty domain interval in system '" + name +
                                   "'");

  auto check_vars = [&](const Expr& e, const char* where) {
    for (const auto& v : e.free_vars())
      if (!seen.count(v))
        throw DimensionMismatchError(std::string(where) +
                                     " uses unknown variable '" + v + "'");
  };
  for (const auto& e : densities) check_vars(e, "density");
  for (const auto& block : fluxes)
    for (const auto& e : block) check_vars(e, "flux");
  for (const auto& e : productions) check_vars(e, "production");
}

StatePoint make_state(const BalanceSystem& sys, std::span<const double> y) {
  if (y.size() != sys.field_names.size())
    throw DimensionMismatchError("state vector has wrong length");
  StatePoint p;
  for (std::size_t i = 0; i < y.size(); ++i)
    p.values[sys.field_names[i]] = y[i];
  return p;
}

std::vector<double> state_vector(const BalanceSystem& sys,
                                 const StatePoint& p) {
  if (p.values.size() != sys.field_names.size())
    throw DimensionMismatchError("state point does not match system fields");
  std::vector<double> y(sys.field_names.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    auto it = p.values.find(sys.field_names[i]);
    if (it == p.values.end())
      throw DimensionMismatchError("state point missing field '" +
                                   sys.field_names[i] + "'");
    y[i] = it->second;
  }
  return y;
}

std::size_t SystemEvaluator::d2_index(int i, int j, int k) const {
  if (j > k) std::swap(j, k);
  const std::size_t pairs_per_field =
      static_cast<std::size_t>(m_) * (m_ + 1) / 2;
  const std::size_t pair =
      static_cast<std::size_t>(j) * m_ - static_cast<std::size_t>(j) * (j - 1) / 2 +
      (k - j);
  return static_cast<std::size_t>(i) * pairs_per_field + pair;
}

SystemEvaluator::SystemEvaluator(BalanceSystem sys) : sys_(std::move(sys)) {
  sys_.validate();
  m_ = sys_.field_count();
  n_s_ = sys_.spatial_dim;
  const auto& vars = sys_.field_names;

  f0_ = compile_all(sys_.densities, vars);
  prod_ = compile_all(sys_.productions, vars);
  flux_.resize(n_s_);
  for (int A = 0; A < n_s_; ++A) flux_[A] = compile_all(sys_.fluxes[A], vars);

  std::vector<Expr> df0_exprs;
  df0_exprs.reserve(static_cast<std::size_t>(m_) * m_);
  for (int i = 0; i < m_; ++i)
    for (int j = 0; j < m_; ++j)
      df0_exprs.push_back(sys_.densities[i].diff(vars[j]).simplified());
  df0_ = compile_all(df0_exprs, vars);

  dflux_.resize(n_s_);
  for (int A = 0; A < n_s_; ++A) {
    std::vector<Expr> exprs;
    exprs.reserve(static_cast<std::size_t>(m_) * m_);
    for (int i = 0; i < m_; ++i)
      for (int j = 0; j < m_; ++j)
        exprs.push_back(sys_.fluxes[A][i].diff(vars[j]).simplified());
    dflux_[A] = compile_all(exprs, vars);
  }

  std::vector<Expr> d2_exprs;
  for (int i = 0; i < m_; ++i) {
    for (int j = 0; j < m_; ++j) {
      const Expr dj = df0_exprs[static_cast<std::size_t>(i) * m_ + j];
      for (int k = j; k < m_; ++k)
        d2_exprs.push_back(dj.diff(vars[k]).simplified());
    }
  }
  d2f0_ = compile_all(d2_exprs, vars);
}

Eigen::VectorXd SystemEvaluator::density(std::span<const double> y) const {
  Eigen::VectorXd out(m_);
  std::vector<double> scratch;
  for (int i = 0; i < m_; ++i) out[i] = f0_[i].eval(y, scratch);
  return out;
}

Eigen::VectorXd SystemEvaluator::flux(int A, std::span<const double> y) const {
  Eigen::VectorXd out(m_);
  std::vector<double> scratch;
  for (int i = 0; i < m_; ++i) out[i] = flux_[A][i].eval(y, scratch);
  return out;
}

Eigen::VectorXd SystemEvaluator::production(std::span<const double> y) const {
  Eigen::VectorXd out(m_);
  std::vector<double> scratch;
  for (int i = 0; i < m_; ++i) out[i] = prod_[i].eval(y, scratch);
  return out;
}

Eigen::MatrixXd SystemEvaluator::density_jacobian_matrix(
    std::span<const double> y) const {
  Eigen::MatrixXd W(m_, m_);
  std::vector<double> scratch;
  for (int i = 0; i < m_; ++i)
    for (int j = 0; j < m_; ++j)
      W(i, j) = df0_[static_cast<std::size_t>(i) * m_ + j].eval(y, scratch);
  return W;
}

Eigen::MatrixXd SystemEvaluator::flux_jacobian_matrix(
    int A, std::span<const double> y) const {
  Eigen::MatrixXd M(m_, m_);
  std::vector<double> scratch;
  for (int i = 0; i < m_; ++i)
    for (int j = 0; j < m_; ++j)
      M(i, j) = dflux_[A][static_cast<std::size_t>(i) * m_ + j].eval(y, scratch);
  return M;
}

Eigen::MatrixXd SystemEvaluator::density_hessian(
    int i, std::span<const double> y) const {
  Eigen::MatrixXd H(m_, m_);
  std::vector<double> scratch;
  for (int j = 0; j < m_; ++j)
    for (int k = j; k < m_; ++k) {
      const double v = d2f0_[d2_index(i, j, k)].eval(y, scratch);
      H(j, k) = v;
      H(k, j) = v;
    }
  return H;
}

JacobianSet density_jacobian(const SystemEvaluator& ev, const StatePoint& p,
                             double reg_tol) {
  const auto y = state_vector(ev.system(), p);
  JacobianSet out;
  out.W = ev.density_jacobian_matrix(y);
  out.Fy.reserve(ev.spatial_dim());
  for (int A = 0; A < ev.spatial_dim(); ++A)
    out.Fy.push_back(ev.flux_jacobian_matrix(A, y));

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(out.W);
  out.det_W = lu.determinant();
  out.regular = std::abs(out.det_W) > reg_tol * out.W.norm();
  if (out.regular) {
    out.Psi.reserve(ev.spatial_dim());
    for (int A = 0; A < ev.spatial_dim(); ++A)
      out.Psi.push_back(lu.solve(out.Fy[A] * out.W));
  }
  return out;
}

bool is_regular(const SystemEvaluator& ev, const StatePoint& p, double tol) {
  const auto y = state_vector(ev.system(), p);
  const Eigen::MatrixXd W = ev.density_jacobian_matrix(y);
  return std::abs(W.partialPivLu().determinant()) > tol * W.norm();
}

std::vector<double> to_w(const SystemEvaluator& ev, const StatePoint& p) {
  const auto y = state_vector(ev.system(), p);
  const Eigen::VectorXd w = ev.density(y);
  return std::vector<double>(w.data(), w.data() + w.size());
}

StatePoint from_w(const SystemEvaluator& ev, std::span<const double> w,
                  const StatePoint& guess) {
  const int m = ev.m();
  if (w.size() != static_cast<std::size_t>(m))
    throw DimensionMismatchError("w vector has wrong length");
  Eigen::VectorXd target = Eigen::Map<const Eigen::VectorXd>(w.data(), m);
  std::vector<double> y = state_vector(ev.system(), guess);
  const double tol = 1e-10 * (1.0 + target.norm());

  for (int iter = 0; iter < 50; ++iter) {
    const Eigen::VectorXd residual = ev.density(y) - target;
    if (residual.norm() <= tol) return make_state(ev.system(), y);
    const Eigen::MatrixXd W = ev.density_jacobian_matrix(y);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(W);
    if (std::abs(lu.determinant()) <= kDefaultRegularityTol * W.norm())
      throw SingularJacobianError(
          "density Jacobian singular during w inversion");
    const Eigen::VectorXd step = lu.solve(residual);
    for (int i = 0; i < m; ++i) y[i] -= step[i];
  }
  throw NonConvergenceError("w inversion did not converge in 50 iterations");
}

std::vector<Eigen::MatrixXd> flux_jacobian_w(const SystemEvaluator& ev,
                                             const StatePoint& p,
                                             double reg_tol) {
  const auto y = state_vector(ev.system(), p);
  const Eigen::MatrixXd W = ev.density_jacobian_matrix(y);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(W);
  if (std::abs(lu.determinant()) <= reg_tol * W.norm())
    throw SingularJacobianError("system is not regular at the given state");
  const Eigen::MatrixXd W_inv = lu.inverse();
  std::vector<Eigen::MatrixXd> L;
  L.reserve(ev.spatial_dim());
  for (int A = 0; A < ev.spatial_dim(); ++A)
    L.push_back(ev.flux_jacobian_matrix(A, y) * W_inv);
  return L;
}

}  // namespace sblab
