#include "sblab/defining_system.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sblab/errors.hpp"

namespace sblab {

namespace {

std::size_t packed_index(int m, int j, int k) {
  if (j > k) std::swap(j, k);
  return static_cast<std::size_t>(j) * m - static_cast<std::size_t>(j) * (j - 1) / 2 +
         (k - j);
}

std::vector<CompiledExpr> compile_gradient(const Expr& h,
                                           const std::vector<std::string>& vars) {
  std::vector<Expr> grads;
  grads.reserve(vars.size());
  for (const auto& v : vars) grads.push_back(h.diff(v).simplified());
  return compile_all(grads, vars);
}

std::vector<CompiledExpr> compile_hessian(const Expr& h,
                                          const std::vector<std::string>& vars) {
  const int m = static_cast<int>(vars.size());
  std::vector<Expr> hess;
  hess.reserve(static_cast<std::size_t>(m) * (m + 1) / 2);
  for (int j = 0; j < m; ++j) {
    const Expr dj = h.diff(vars[j]).simplified();
    for (int k = j; k < m; ++k) hess.push_back(dj.diff(vars[k]).simplified());
  }
  return compile_all(hess, vars);
}

Eigen::MatrixXd inverse_or_throw(const Eigen::MatrixXd& W, double reg_tol,
                                 const char* what) {
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(W);
  if (std::abs(lu.determinant()) <= reg_tol * W.norm())
    throw SingularJacobianError(what);
  return lu.inverse();
}

}  // namespace

DensityEvaluator DensityEvaluator::in_w(const SystemEvaluator& ev,
                                        const Expr& h0_w) {
  DensityEvaluator d;
  d.in_w_ = true;
  d.h0_ = h0_w;
  d.m_ = ev.m();
  const auto vars = w_names(ev.m());
  d.value_ = compile_all(std::vector<Expr>{h0_w}, vars);
  d.grad_ = compile_gradient(h0_w, vars);
  d.hess_ = compile_hessian(h0_w, vars);
  return d;
}

DensityEvaluator DensityEvaluator::in_y(const SystemEvaluator& ev,
                                        const Expr& h0_y) {
  DensityEvaluator d;
  d.in_w_ = false;
  d.h0_ = h0_y;
  d.m_ = ev.m();
  const auto& vars = ev.system().field_names;
  d.value_ = compile_all(std::vector<Expr>{h0_y}, vars);
  d.grad_ = compile_gradient(h0_y, vars);
  d.hess_ = compile_hessian(h0_y, vars);
  return d;
}

double DensityEvaluator::value(const SystemEvaluator& ev,
                               std::span<const double> y) const {
  std::vector<double> scratch;
  if (!in_w_) return value_[0].eval(y, scratch);
  const Eigen::VectorXd w = ev.density(y);
  return value_[0].eval(std::span<const double>(w.data(), w.size()), scratch);
}

Eigen::VectorXd DensityEvaluator::gradient_w(const SystemEvaluator& ev,
                                             std::span<const double> y) const {
  std::vector<double> scratch;
  Eigen::VectorXd g(m_);
  if (in_w_) {
    const Eigen::VectorXd w = ev.density(y);
    const std::span<const double> ws(w.data(), static_cast<std::size_t>(w.size()));
    for (int i = 0; i < m_; ++i) g[i] = grad_[i].eval(ws, scratch);
    return g;
  }
  for (int i = 0; i < m_; ++i) g[i] = grad_[i].eval(y, scratch);
  const Eigen::MatrixXd W = ev.density_jacobian_matrix(y);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(W.transpose());
  if (std::abs(lu.determinant()) <= kDefaultRegularityTol * W.norm())
    throw SingularJacobianError("system not regular: cannot pull back gradient");
  return lu.solve(g);
}

Eigen::MatrixXd DensityEvaluator::hessian_w(const SystemEvaluator& ev,
                                            std::span<const double> y) const {
  std::vector<double> scratch;
  Eigen::MatrixXd H(m_, m_);
  if (in_w_) {
    const Eigen::VectorXd w = ev.density(y);
    const std::span<const double> ws(w.data(), static_cast<std::size_t>(w.size()));
    for (int j = 0; j < m_; ++j)
      for (int k = j; k < m_; ++k) {
        const double v = hess_[packed_index(m_, j, k)].eval(ws, scratch);
        H(j, k) = v;
        H(k, j) = v;
      }
    return H;
  }
  for (int j = 0; j < m_; ++j)
    for (int k = j; k < m_; ++k) {
      const double v = hess_[packed_index(m_, j, k)].eval(y, scratch);
      H(j, k) = v;
      H(k, j) = v;
    }
  const Eigen::VectorXd lambda = gradient_w(ev, y);
  for (int i = 0; i < m_; ++i) H -= lambda[i] * ev.density_hessian(i, y);
  const Eigen::MatrixXd W = ev.density_jacobian_matrix(y);
  const Eigen::MatrixXd W_inv =
      inverse_or_throw(W, kDefaultRegularityTol,
                       "system not regular: cannot pull back Hessian");
  return W_inv.transpose() * H * W_inv;
}

double DensityEvaluator::value_at_w(std::span<const double> w) const {
  if (!in_w_)
    throw NumericError("density is parametrized by y, not by w");
  std::vector<double> scratch;
  return value_[0].eval(w, scratch);
}

Eigen::VectorXd DensityEvaluator::gradient_at_w(
    std::span<const double> w) const {
  if (!in_w_)
    throw NumericError("density is parametrized by y, not by w");
  std::vector<double> scratch;
  Eigen::VectorXd g(m_);
  for (int i = 0; i < m_; ++i) g[i] = grad_[i].eval(w, scratch);
  return g;
}

Eigen::MatrixXd DensityEvaluator::hessian_at_w(
    std::span<const double> w) const {
  if (!in_w_)
    throw NumericError("density is parametrized by y, not by w");
  std::vector<double> scratch;
  Eigen::MatrixXd H(m_, m_);
  for (int j = 0; j < m_; ++j)
    for (int k = j; k < m_; ++k) {
      const double v = hess_[packed_index(m_, j, k)].eval(w, scratch);
      H(j, k) = v;
      H(k, j) = v;
    }
  return H;
}

DefiningResidual defining_residual(const SystemEvaluator& ev,
                                   const DensityEvaluator& h0,
                                   const StatePoint& p) {
  const auto y = state_vector(ev.system(), p);
  const auto L = flux_jacobian_w(ev, p);
  const Eigen::MatrixXd H = h0.hessian_w(ev, y);
  DefiningResidual out;
  out.r.reserve(L.size());
  for (const auto& LA : L) {
    const Eigen::MatrixXd M = LA.transpose() * H;
    Eigen::MatrixXd r = M - M.transpose();
    out.max_abs = std::max(out.max_abs, r.cwiseAbs().maxCoeff());
    out.r.push_back(std::move(r));
  }
  return out;
}

DefiningResidual defining_residual(const SystemEvaluator& ev, const Expr& h0_w,
                                   const StatePoint& p) {
  return defining_residual(ev, DensityEvaluator::in_w(ev, h0_w), p);
}

bool ellipticity_check(const SystemEvaluator& ev, const StatePoint& p,
                       double tol) {
  const auto y = state_vector(ev.system(), p);
  const int m = ev.m();
  const int n = ev.spatial_dim();
  Eigen::MatrixXd stacked(n * m, m);
  for (int A = 0; A < n; ++A)
    stacked.middleRows(A * m, m) = ev.flux_jacobian_matrix(A, y);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(stacked);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv[0] == 0.0) return false;
  return sv[sv.size() - 1] > tol * sv[0];
}

namespace {

// Basis of Ker(M - mu*I), columns orthonormal; empty when trivial.
Eigen::MatrixXd eigenspace_basis(const Eigen::MatrixXd& M, double mu,
                                 double tol) {
  const int m = static_cast<int>(M.rows());
  Eigen::MatrixXd S = M - mu * Eigen::MatrixXd::Identity(m, m);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(S, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double cutoff = tol * std::max(1.0, M.norm());
  int dim = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv[i] <= cutoff) ++dim;
  if (sv.size() == 0) dim = m;  // zero-size guard, unreachable for m >= 1
  if (dim == 0) return Eigen::MatrixXd(m, 0);
  return svd.matrixV().rightCols(dim);
}

// Distinct real eigenvalues of M, ascending.
std::vector<double> distinct_real_eigenvalues(const Eigen::MatrixXd& M) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(M, /*computeEigenvectors=*/false);
  const auto& vals = es.eigenvalues();
  double radius = 0.0;
  for (int i = 0; i < vals.size(); ++i)
    radius = std::max(radius, std::abs(vals[i]));
  std::vector<double> real_vals;
  for (int i = 0; i < vals.size(); ++i)
    if (std::abs(vals[i].imag()) <= 1e-9 * radius)
      real_vals.push_back(vals[i].real());
  std::sort(real_vals.begin(), real_vals.end());
  std::vector<double> distinct;
  const double cluster = 1e-8 * std::max(1.0, radius);
  for (double v : real_vals)
    if (distinct.empty() || v - distinct.back() > cluster) distinct.push_back(v);
  return distinct;
}

// Orthonormal basis of span(U) intersect span(V).
Eigen::MatrixXd intersect_subspaces(const Eigen::MatrixXd& U,
                                    const Eigen::MatrixXd& V) {
  const int m = static_cast<int>(U.rows());
  if (U.cols() == 0 || V.cols() == 0) return Eigen::MatrixXd(m, 0);
  Eigen::MatrixXd C(m, U.cols() + V.cols());
  C << U, -V;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(C, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double cutoff = 1e-10 * std::max(1.0, sv.size() ? sv[0] : 0.0);
  std::vector<Eigen::VectorXd> vecs;
  for (int i = 0; i < svd.matrixV().cols(); ++i) {
    const double sigma = i < sv.size() ? sv[i] : 0.0;
    if (sigma > cutoff) continue;
    Eigen::VectorXd x = U * svd.matrixV().col(i).head(U.cols());
    if (x.norm() > 1e-10) vecs.push_back(x);
  }
  if (vecs.empty()) return Eigen::MatrixXd(m, 0);
  Eigen::MatrixXd X(m, static_cast<int>(vecs.size()));
  for (int i = 0; i < X.cols(); ++i) X.col(i) = vecs[static_cast<std::size_t>(i)];
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(X);
  Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(m, X.cols());
  // Drop directions with negligible contribution (rank-deficient X).
  Eigen::MatrixXd R = qr.matrixQR().topRows(X.cols()).triangularView<Eigen::Upper>();
  int rank = 0;
  for (int i = 0; i < X.cols(); ++i)
    if (std::abs(R(i, i)) > 1e-10 * std::max(1.0, std::abs(R(0, 0)))) ++rank;
  return Q.leftCols(std::max(rank, 1));
}

void sign_normalize(Eigen::VectorXd& v) {
  int arg = 0;
  double best = 0.0;
  for (int i = 0; i < v.size(); ++i)
    if (std::abs(v[i]) > best + 1e-14) {
      best = std::abs(v[i]);
      arg = i;
    }
  if (v[arg] < 0.0) v = -v;
}

}  // namespace

std::vector<CommonEigenvector> common_eigenvectors(const SystemEvaluator& ev,
                                                   const StatePoint& p,
                                                   double tol) {
  const auto L = flux_jacobian_w(ev, p);
  const int n = static_cast<int>(L.size());
  const int m = ev.m();
  std::vector<Eigen::MatrixXd> LT;
  LT.reserve(L.size());
  for (const auto& LA : L) LT.push_back(LA.transpose());

  struct Candidate {
    Eigen::MatrixXd basis;
  };
  std::vector<Candidate> candidates{{Eigen::MatrixXd::Identity(m, m)}};
  const double ker_tol = std::max(tol, 1e-12);
  for (int A = 0; A < n; ++A) {
    std::vector<Candidate> next;
    const auto mus = distinct_real_eigenvalues(LT[A]);
    for (const auto& cand : candidates) {
      for (double mu : mus) {
        const Eigen::MatrixXd eig = eigenspace_basis(LT[A], mu, ker_tol);
        Eigen::MatrixXd inter = intersect_subspaces(cand.basis, eig);
        if (inter.cols() > 0) next.push_back({std::move(inter)});
      }
    }
    candidates = std::move(next);
  }

  std::vector<CommonEigenvector> out;
  for (const auto& cand : candidates) {
    for (int c = 0; c < cand.basis.cols(); ++c) {
      Eigen::VectorXd zeta = cand.basis.col(c);
      zeta.normalize();
      sign_normalize(zeta);
      bool ok = true;
      std::vector<double> eigenvalues(n);
      for (int A = 0; A < n && ok; ++A) {
        const Eigen::VectorXd image = LT[A] * zeta;
        const double mu = zeta.dot(image);
        if ((image - mu * zeta).norm() > tol * std::max(1.0, LT[A].norm()))
          ok = false;
        eigenvalues[A] = mu;
      }
      if (!ok) continue;
      bool duplicate = false;
      for (const auto& have : out)
        if (std::abs(have.zeta.dot(zeta)) > 1.0 - 1e-8) duplicate = true;
      if (!duplicate) out.push_back({std::move(zeta), std::move(eigenvalues)});
    }
  }
  std::sort(out.begin(), out.end(),
            [](const CommonEigenvector& a, const CommonEigenvector& b) {
              if (a.eigenvalues != b.eigenvalues)
                return a.eigenvalues < b.eigenvalues;
              return std::lexicographical_compare(
                  a.zeta.data(), a.zeta.data() + a.zeta.size(), b.zeta.data(),
                  b.zeta.data() + b.zeta.size());
            });
  return out;
}

std::string to_string(Holonomy h) {
  switch (h) {
    case Holonomy::Holonomic: return "Holonomic";
    case Holonomy::NonHolonomic: return "NonHolonomic";
    case Holonomy::Inconclusive: return "Inconclusive";
  }
  return "Inconclusive";
}

std::string to_string(TwoFieldType t) {
  switch (t) {
    case TwoFieldType::Elliptic: return "Elliptic";
    case TwoFieldType::Hyperbolic: return "Hyperbolic";
    case TwoFieldType::Parabolic: return "Parabolic";
    case TwoFieldType::Mixed: return "Mixed";
  }
  return "Mixed";
}

ClassificationReport classify(const SystemEvaluator& ev, int sample_count,
                              std::uint64_t seed,
                              const ClassifyTolerances& tol, Exec exec) {
  const auto points = sample_box(ev.system().domain_box, sample_count, seed);
  const std::size_t n = points.size();

  struct PointData {
    bool regular = false;
    bool elliptic = false;
    double det_w = 0.0;
    double det_w_scale = 1.0;
    int witness = 0;  // 0 none, 1 found-but-fragile, 2 persistent
    std::vector<CommonEigenvector> evs;
    double detJ = 0.0;
    Eigen::Matrix2d J;
    TwoFieldType type = TwoFieldType::Parabolic;
  };
  std::vector<PointData> data(n);
  const bool two_field_mode = ev.m() == 2 && ev.spatial_dim() == 1;

  for_each_index(exec, n, [&](std::size_t i) {
    PointData& d = data[i];
    const StatePoint p = make_state(ev.system(), points[i]);
    const auto y = points[i];
    d.elliptic = ellipticity_check(ev, p, tol.rank);
    const Eigen::MatrixXd W = ev.density_jacobian_matrix(y);
    d.det_w = W.partialPivLu().determinant();
    d.det_w_scale = std::max(W.norm(), 1e-300);
    d.regular = std::abs(d.det_w) > tol.regularity * W.norm();
    if (d.regular) {
      d.evs = common_eigenvectors(ev, p, tol.eigen);
      if (!d.evs.empty()) {
        const auto tightened = common_eigenvectors(ev, p, tol.eigen / 10.0);
        d.witness = tightened.empty() ? 1 : 2;
      }
    }
    if (two_field_mode) {
      const TwoFieldReport tf = two_field_J(ev, p, tol.two_field_det);
      d.J = tf.J;
      d.detJ = tf.detJ;
      d.type = tf.type;
    }
  });

  ClassificationReport report;
  report.tolerances = tol;
  report.sampled_points = static_cast<int>(n);
  report.elliptic = n > 0;
  bool has_pos = false, has_neg = false;
  double min_rel_det = std::numeric_limits<double>::infinity();
  int fragile = 0, persistent = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const PointData& d = data[i];
    if (!d.elliptic) report.elliptic = false;
    if (!d.regular) ++report.singular_points;
    if (d.witness == 2) ++persistent;
    if (d.witness == 1) ++fragile;
    if (d.witness != 0 && report.common_eigenvectors.empty())
      report.common_eigenvectors = d.evs;
    if (d.det_w > 0) has_pos = true;
    if (d.det_w < 0) has_neg = true;
    min_rel_det = std::min(min_rel_det, std::abs(d.det_w) / d.det_w_scale);
  }
  report.det_w_sign_flip = has_pos && has_neg && min_rel_det > 1e-8;
  if (persistent > 0)
    report.holonomic_verdict = Holonomy::NonHolonomic;
  else if (fragile > 0 || n == 0)
    report.holonomic_verdict = Holonomy::Inconclusive;
  else
    report.holonomic_verdict = Holonomy::Holonomic;

  if (two_field_mode && n > 0) {
    int pos = 0, neg = 0, zero = 0;
    for (const auto& d : data) {
      if (d.type == TwoFieldType::Elliptic) ++pos;
      else if (d.type == TwoFieldType::Hyperbolic) ++neg;
      else ++zero;
    }
    TwoFieldReport tf;
    tf.J = data[0].J;
    tf.detJ = data[0].detJ;
    if (pos == static_cast<int>(n)) tf.type = TwoFieldType::Elliptic;
    else if (neg == static_cast<int>(n)) tf.type = TwoFieldType::Hyperbolic;
    else if (zero == static_cast<int>(n)) tf.type = TwoFieldType::Parabolic;
    else tf.type = TwoFieldType::Mixed;
    report.two_field = tf;
  }
  return report;
}

}  // namespace sblab
