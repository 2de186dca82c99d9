#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "sblab/errors.hpp"
#include "sblab/expr.hpp"
#include "sblab/model_io.hpp"
#include "sblab/model_zoo.hpp"
#include "sblab/sbl_engine.hpp"

using namespace sblab;

namespace {

std::vector<StatePoint> states(const SystemEvaluator& ev, int count,
                               std::uint64_t seed) {
  std::vector<StatePoint> out;
  for (const auto& y : sample_box(ev.system().domain_box, count, seed))
    out.push_back(make_state(ev.system(), y));
  return out;
}

CattaneoSpec frozen_spec() {
  CattaneoSpec spec;
  spec.tau = parse_expr("1");
  spec.Lambda = parse_expr("2*theta");
  spec.eps_eq = parse_expr("theta");
  spec.box = {{0.5, 2.0}, {-1.0, 1.0}, {-1.0, 1.0}, {-1.0, 1.0}};
  return spec;
}

CattaneoSblParams frozen_params() {
  CattaneoSblParams params;
  params.lambda0_hat = parse_expr("0 - theta");
  params.Khat = {Expr::constant(0.0), Expr::constant(0.0), Expr::constant(0.0)};
  params.alpha = 1.0;
  params.f0 = 0.5;
  return params;
}

double q_norm2(const StatePoint& p) {
  const double q1 = p.values.at("q1");
  const double q2 = p.values.at("q2");
  const double q3 = p.values.at("q3");
  return q1 * q1 + q2 * q2 + q3 * q3;
}

std::string repo_path(const std::string& rel) {
  const char* root = std::getenv("SBLAB_REPO_ROOT");
  REQUIRE(root != nullptr);
  return std::string(root) + "/" + rel;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("scalar law and its supplementary pairs") {
  SUBCASE("quadratic flux, quadratic density") {
    BalanceSystem law = scalar_law(parse_expr("u^2/2"), Expr::constant(0.0));
    SblCandidate cand = scalar_sbl(law, parse_expr("u^2/2"), 0.0);
    for (double u = -1.0; u <= 1.0; u += 0.125) {
      Bindings b{{"u", u}};
      CHECK(cand.K0.eval(b) == doctest::Approx(u * u / 2).epsilon(1e-12));
      CHECK(std::abs(cand.KA[0].eval(b) - u * u * u / 3) <= 1e-10);
      CHECK(cand.Q.eval(b) == 0.0);
    }
  }

  SUBCASE("linear flux passes any density through") {
    BalanceSystem law = scalar_law(Expr::variable("u"), Expr::constant(0.0));
    SblCandidate cand = scalar_sbl(law, parse_expr("u^4"), 0.0);
    for (double u = -1.0; u <= 1.0; u += 0.25) {
      Bindings b{{"u", u}};
      CHECK(std::abs(cand.KA[0].eval(b) - u * u * u * u) <= 1e-10);
    }
  }

  SUBCASE("linear density recovers the original flux") {
    BalanceSystem law =
        scalar_law(parse_expr("u^3/3 + u"), Expr::constant(0.0));
    SblCandidate cand = scalar_sbl(law, Expr::variable("u"), 0.0);
    for (double u = -1.0; u <= 1.0; u += 0.25) {
      Bindings b{{"u", u}};
      CHECK(std::abs(cand.KA[0].eval(b) - (u * u * u / 3 + u)) <= 1e-10);
    }
  }

  SUBCASE("production contracts against the density slope") {
    BalanceSystem law = scalar_law(parse_expr("u^2/2"), parse_expr("0 - u"));
    SblCandidate cand = scalar_sbl(law, parse_expr("u^2/2"), 0.0);
    for (double u = -1.0; u <= 1.0; u += 0.25) {
      Bindings b{{"u", u}};
      CHECK(cand.Q.eval(b) == doctest::Approx(-u * u).epsilon(1e-12));
    }
  }

  SUBCASE("multiplier identity holds across the box") {
    BalanceSystem law = scalar_law(parse_expr("u^2/2"), parse_expr("0 - u"));
    SystemEvaluator ev(law);
    SblCandidate cand = scalar_sbl(law, parse_expr("u^2/2"), 0.0);
    for (const auto& p : states(ev, 40, 3)) {
      Eigen::VectorXd l(1);
      l << p.values.at("u");
      LlResidual r = ll_residual(ev, cand, l, p);
      CHECK(r.r_flux <= 1e-10);
      CHECK(r.r_source <= 1e-12);
    }
  }

  SUBCASE("shape guards") {
    BalanceSystem law = scalar_law(parse_expr("u^2/2"), Expr::constant(0.0));
    CHECK_THROWS_AS(scalar_sbl(law, parse_expr("v^2"), 0.0),
                    DimensionMismatchError);
    CHECK_THROWS_AS(scalar_sbl(linear_two_field_case(4).sys,
                               parse_expr("y1^2"), 0.0),
                    DimensionMismatchError);
  }
}

TEST_CASE("heat relaxation system structure") {
  CattaneoSpec spec = frozen_spec();
  spec.Lambda = parse_expr("3*theta");
  BalanceSystem sys = cattaneo_system(spec, Expr::variable("theta"));
  SystemEvaluator ev(sys);

  SUBCASE("density jacobian is the identity in the plain chart") {
    for (const auto& p : states(ev, 10, 5)) {
      const std::vector<double> y = state_vector(sys, p);
      Eigen::MatrixXd W = ev.density_jacobian_matrix(y);
      CHECK((W - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() <=
            1e-12);
      CHECK(W.determinant() == doctest::Approx(1.0).epsilon(1e-12));
    }
  }

  SUBCASE("flux jacobians have the two-entry rank pattern") {
    const auto p = states(ev, 1, 9).front();
    const std::vector<double> y = state_vector(sys, p);
    for (int axis = 0; axis < 3; ++axis) {
      Eigen::MatrixXd Fy = ev.flux_jacobian_matrix(axis, y);
      Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(4, 4);
      expected(0, axis + 1) = 1.0;  // d(q_axis)/d(q_axis)
      expected(axis + 1, 0) = 3.0;  // d(Lambda)/d(theta)
      CHECK((Fy - expected).cwiseAbs().maxCoeff() <= 1e-12);
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(Fy);
      CHECK((svd.singularValues().array() > 1e-10).count() == 2);
    }
  }

  SUBCASE("equilibrium states have zero production") {
    Eigen::VectorXd pi =
        ev.production(std::vector<double>{1.3, 0.0, 0.0, 0.0});
    CHECK(pi.cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("constitutive guards") {
    CattaneoSpec bad = frozen_spec();
    bad.Lambda = parse_expr("0 - theta");
    CHECK_THROWS_AS(bad.validate(), NumericError);
    bad = frozen_spec();
    bad.tau = parse_expr("theta - 1");
    CHECK_THROWS_AS(bad.validate(), NumericError);
    bad = frozen_spec();
    bad.tau = parse_expr("q1");
    CHECK_THROWS_AS(bad.validate(), DimensionMismatchError);
    bad = frozen_spec();
    bad.box.pop_back();
    CHECK_THROWS_AS(bad.validate(), DimensionMismatchError);
  }
}

TEST_CASE("family member matches its closed form") {
  CattaneoSpec spec = frozen_spec();
  CattaneoSblParams params = frozen_params();

  Expr eps = cattaneo_internal_energy(spec, params);
  SblCandidate member = cattaneo_sbl(spec, params, 1.0);
  BalanceSystem sys = cattaneo_system(spec, eps);
  SystemEvaluator ev(sys);
  const auto pts = states(ev, 60, 11);

  SUBCASE("energy collapses to its equilibrium value") {
    for (const auto& p : pts)
      CHECK(eps.eval(p.values) ==
            doctest::Approx(p.values.at("theta")).epsilon(1e-12));
  }

  SUBCASE("component expressions") {
    for (const auto& p : pts) {
      const double th = p.values.at("theta");
      const double qq = q_norm2(p);
      CHECK(std::abs(member.K0.eval(p.values) - (-th * th / 2 - qq / 4)) <=
            1e-9);
      for (int a = 0; a < 3; ++a) {
        const double qa = p.values.at("q" + std::to_string(a + 1));
        CHECK(std::abs(member.KA[a].eval(p.values) - (-th * qa)) <= 1e-12);
      }
      CHECK(std::abs(member.Q.eval(p.values) - qq / 2) <= 1e-12);
    }
  }

  SUBCASE("multiplier identity") {
    for (const auto& p : pts) {
      Eigen::VectorXd l(4);
      l << -p.values.at("theta"), -p.values.at("q1") / 2,
          -p.values.at("q2") / 2, -p.values.at("q3") / 2;
      LlResidual r = ll_residual(ev, member, l, p);
      CHECK(r.r_flux <= 1e-9);
      CHECK(r.r_source <= 1e-9);
    }
  }
}

TEST_CASE("internal energy closed forms") {
  SUBCASE("quadratic potential bends the energy") {
    CattaneoSpec spec = frozen_spec();
    spec.tau = parse_expr("2");
    spec.Lambda = parse_expr("3*theta");
    CattaneoSblParams params;
    params.lambda0_hat = parse_expr("0 - theta^2/2");
    params.Khat = {Expr::constant(0.0), Expr::constant(0.0),
                   Expr::constant(0.0)};
    params.alpha = 0.7;
    Expr eps = cattaneo_internal_energy(spec, params);
    // Constant flux offsets never enter the energy.
    CattaneoSblParams shifted = params;
    shifted.kA = {0.3, -0.1, 0.2};
    shifted.mA = {1.0, 2.0, 3.0};
    shifted.f0 = 4.0;
    shifted.a0 = -0.5;
    Expr eps2 = cattaneo_internal_energy(spec, shifted);
    BalanceSystem sys = cattaneo_system(spec, eps);
    SystemEvaluator ev(sys);
    for (const auto& p : states(ev, 40, 13)) {
      const double th = p.values.at("theta");
      const double expected = th - q_norm2(p) / (3 * th);
      CHECK(std::abs(eps.eval(p.values) - expected) <= 1e-9);
      CHECK(std::abs(eps2.eval(p.values) - expected) <= 1e-9);
    }
  }

  SUBCASE("equilibrium reduction at q = 0") {
    CattaneoSpec spec = frozen_spec();
    spec.tau = parse_expr("1 + theta/4");
    spec.eps_eq = parse_expr("theta + theta^2/8");
    CattaneoSblParams params;
    params.lambda0_hat = parse_expr("0 - theta^3/3");
    params.Khat = {parse_expr("theta^2/8"), Expr::constant(0.0),
                   parse_expr("theta/2")};
    params.alpha = 1.0;
    Expr eps = cattaneo_internal_energy(spec, params);
    for (double th = 0.5; th <= 2.0; th += 0.25) {
      Bindings b{{"theta", th}, {"q1", 0.0}, {"q2", 0.0}, {"q3", 0.0}};
      CHECK(std::abs(eps.eval(b) - (th + th * th / 8)) <= 1e-12);
    }
  }

  SUBCASE("flat potential slope is rejected") {
    CattaneoSpec spec = frozen_spec();
    CattaneoSblParams params = frozen_params();
    params.alpha = 0.0;
    CHECK_THROWS_AS(cattaneo_internal_energy(spec, params),
                    DegenerateLambda0Error);
    CHECK_THROWS_AS(cattaneo_sbl(spec, params, 1.0), DegenerateLambda0Error);
    params.alpha = 1.0;
    params.lambda0_hat = Expr::constant(2.0);
    CHECK_THROWS_AS(cattaneo_internal_energy(spec, params),
                    DegenerateLambda0Error);
    params.lambda0_hat = parse_expr("(theta - 1)^2/2");
    CHECK_THROWS_AS(cattaneo_internal_energy(spec, params),
                    DegenerateLambda0Error);
  }
}

TEST_CASE("coefficient columns stay laws for any energy") {
  CattaneoSpec spec = frozen_spec();
  Expr eps = parse_expr("theta + theta^2/8 + theta*(q1^2 + q2^2 + q3^2)/10");
  BalanceSystem sys = cattaneo_system(spec, eps);
  SystemEvaluator ev(sys);
  const auto pts = states(ev, 20, 17);

  CattaneoSblParams zero;
  zero.lambda0_hat = Expr::constant(0.0);
  zero.Khat = {Expr::constant(0.0), Expr::constant(0.0), Expr::constant(0.0)};

  SUBCASE("density column") {
    CattaneoSblParams params = zero;
    params.a0 = 1.0;
    SblCandidate cand = cattaneo_sbl(spec, params, 1.0, eps);
    for (const auto& p : pts) {
      CHECK(std::abs(cand.K0.eval(p.values) - eps.eval(p.values)) <= 1e-12);
      for (int a = 0; a < 3; ++a)
        CHECK(std::abs(cand.KA[a].eval(p.values) -
                       p.values.at("q" + std::to_string(a + 1))) <= 1e-12);
      CHECK(cand.Q.eval(p.values) == 0.0);
      MainFieldSolve sol = solve_main_fields(ev, cand, p);
      CHECK(sol.feasible);
      Eigen::VectorXd e1 = Eigen::VectorXd::Unit(4, 0);
      CHECK((sol.fields.lambda - e1).cwiseAbs().maxCoeff() <= 1e-7);
    }
  }

  SUBCASE("flux column") {
    CattaneoSblParams params = zero;
    params.kA = {1.0, 0.0, 0.0};
    SblCandidate cand = cattaneo_sbl(spec, params, 1.0, eps);
    for (const auto& p : pts) {
      const double q1 = p.values.at("q1");
      CHECK(std::abs(cand.K0.eval(p.values) - q1) <= 1e-12);
      CHECK(std::abs(cand.KA[0].eval(p.values) -
                     2 * p.values.at("theta")) <= 1e-12);
      CHECK(cand.KA[1].eval(p.values) == 0.0);
      CHECK(cand.KA[2].eval(p.values) == 0.0);
      CHECK(std::abs(cand.Q.eval(p.values) + q1) <= 1e-12);
      MainFieldSolve sol = solve_main_fields(ev, cand, p);
      CHECK(sol.feasible);
      Eigen::VectorXd e2 = Eigen::VectorXd::Unit(4, 1);
      CHECK((sol.fields.lambda - e2).cwiseAbs().maxCoeff() <= 1e-7);
    }
  }
}

TEST_CASE("entropy verdicts") {
  CattaneoSpec spec = frozen_spec();

  SUBCASE("decreasing potential slope is entropy type") {
    CattaneoEntropyReport rep =
        cattaneo_entropy_check(spec, frozen_params(), 500);
    CHECK(rep.is_entropy_type);
    CHECK(rep.min_production >= -1e-12);
    CHECK(rep.max_khat_deriv <= 1e-12);
  }

  SUBCASE("increasing potential slope flips the production sign") {
    CattaneoSblParams params = frozen_params();
    params.lambda0_hat = Expr::variable("theta");
    CattaneoEntropyReport rep = cattaneo_entropy_check(spec, params, 500);
    CHECK_FALSE(rep.is_entropy_type);
    CHECK(rep.min_production < -0.5);
  }

  SUBCASE("theta-dependent flux offsets break sign constancy") {
    CattaneoSblParams params = frozen_params();
    params.Khat[0] = Expr::variable("theta");
    CattaneoEntropyReport rep = cattaneo_entropy_check(spec, params, 500);
    CHECK_FALSE(rep.is_entropy_type);
    CHECK(rep.max_khat_deriv == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("potential reconstruction from the energy coefficient") {
  auto unit_spec = [] {
    CattaneoSpec spec;
    spec.tau = parse_expr("1");
    spec.Lambda = Expr::variable("theta");
    spec.eps_eq = Expr::variable("theta");
    spec.box = {{0.5, 2.0}, {-1.0, 1.0}, {-1.0, 1.0}, {-1.0, 1.0}};
    return spec;
  };

  SUBCASE("zero coefficient gives a linear potential") {
    Expr lam0 = cattaneo_lambda0_from_energy(unit_spec(), Expr::constant(0.0),
                                             1.0);
    for (double th = 0.5; th <= 2.0; th += 0.125)
      CHECK(std::abs(lam0.eval({{"theta", th}}) - (th - 1.0)) <= 1e-7);
  }

  SUBCASE("constant coefficient gives a saturating exponential") {
    Expr lam0 = cattaneo_lambda0_from_energy(unit_spec(), Expr::constant(1.0),
                                             1.0);
    for (double th = 0.5; th <= 2.0; th += 0.125) {
      const double expected = (1.0 - std::exp(-2.0 * (th - 1.0))) / 2.0;
      CHECK(std::abs(lam0.eval({{"theta", th}}) - expected) <= 1e-7);
    }
  }

  SUBCASE("coefficient tuned to cancel the relaxation profile") {
    CattaneoSpec spec = unit_spec();
    spec.tau = parse_expr("1 + theta/4");
    spec.Lambda = parse_expr("2*theta");
    Expr lam0 =
        cattaneo_lambda0_from_energy(spec, Expr::constant(1.0 / 16.0), 1.0);
    for (double th = 0.5; th <= 2.0; th += 0.125)
      CHECK(std::abs(lam0.eval({{"theta", th}}) - 2.5 * (th - 1.0)) <= 1e-7);
  }

  SUBCASE("round trip through the energy") {
    CattaneoSpec spec = unit_spec();
    CattaneoSblParams params;
    params.lambda0_hat = parse_expr("0 - theta^2/2");
    params.Khat = {Expr::constant(0.0), Expr::constant(0.0),
                   Expr::constant(0.0)};
    params.alpha = 1.0;
    Expr eps = cattaneo_internal_energy(spec, params);
    Expr mu = parse_expr("0 - 1/(2*theta)");
    for (double th = 0.5; th <= 2.0; th += 0.25) {
      Bindings b{{"theta", th}, {"q1", 1.0}, {"q2", 0.0}, {"q3", 0.0}};
      Bindings b0{{"theta", th}, {"q1", 0.0}, {"q2", 0.0}, {"q3", 0.0}};
      CHECK(std::abs((eps.eval(b) - eps.eval(b0)) - mu.eval({{"theta", th}})) <=
            1e-12);
    }
    Expr recovered = cattaneo_lambda0_from_energy(spec, mu, 1.0);
    for (double th = 0.5; th <= 2.0; th += 0.125)
      CHECK(std::abs(recovered.eval({{"theta", th}}) - (th * th - 1.0) / 2.0) <=
            1e-7);
  }

  SUBCASE("base outside the range is rejected") {
    CHECK_THROWS_AS(
        cattaneo_lambda0_from_energy(unit_spec(), Expr::constant(0.0), 3.0),
        DimensionMismatchError);
  }
}

TEST_CASE("family basis decomposition") {
  CattaneoSpec spec;
  spec.tau = parse_expr("1 + theta/4");
  spec.Lambda = parse_expr("2*theta");
  spec.eps_eq = parse_expr("theta + theta^2/8");
  spec.box = {{0.5, 2.0}, {-1.0, 1.0}, {-1.0, 1.0}, {-1.0, 1.0}};

  CattaneoSblParams params;
  params.lambda0_hat = parse_expr("0 - theta - theta^2/10");
  params.Khat = {parse_expr("theta^2/8"), Expr::constant(0.0),
                 parse_expr("theta/2 - theta^3/30")};
  params.a0 = 0.3;
  params.kA = {0.5, -0.2, 0.1};
  params.alpha = 0.9;
  params.f0 = 0.7;
  params.mA = {0.05, -0.12, 0.3};

  Expr eps = cattaneo_internal_energy(spec, params);
  SblCandidate member = cattaneo_sbl(spec, params, 1.0, eps);
  CattaneoFamilyBasis basis = cattaneo_family_basis(spec, params, 1.0, eps);
  REQUIRE(basis.columns.size() == 9);
  CHECK(basis.names == std::vector<std::string>{"a0", "k1", "k2", "k3",
                                                "alpha", "f0", "m1", "m2",
                                                "m3"});
  const std::vector<double> coeffs = {params.a0,    params.kA[0], params.kA[1],
                                      params.kA[2], params.alpha, params.f0,
                                      params.mA[0], params.mA[1], params.mA[2]};

  BalanceSystem sys = cattaneo_system(spec, eps);
  SystemEvaluator ev(sys);
  const auto pts = states(ev, 40, 19);

  SUBCASE("member equals the weighted column sum") {
    for (const auto& p : pts) {
      for (int comp = 0; comp < 5; ++comp) {
        auto pick = [&](const std::array<Expr, 5>& col) {
          return col[comp].eval(p.values);
        };
        double sum = 0.0;
        for (int c = 0; c < 9; ++c) sum += coeffs[c] * pick(basis.columns[c]);
        const Expr& mine = comp == 0   ? member.K0
                           : comp == 4 ? member.Q
                                       : member.KA[comp - 1];
        CHECK(std::abs(mine.eval(p.values) - sum) <= 1e-9);
      }
    }
  }

  SUBCASE("least squares recovers the coefficients") {
    const int rows = static_cast<int>(pts.size()) * 5;
    Eigen::MatrixXd A(rows, 9);
    Eigen::VectorXd b(rows);
    int r = 0;
    for (const auto& p : pts) {
      for (int comp = 0; comp < 5; ++comp, ++r) {
        for (int c = 0; c < 9; ++c)
          A(r, c) = basis.columns[c][comp].eval(p.values);
        const Expr& mine = comp == 0   ? member.K0
                           : comp == 4 ? member.Q
                                       : member.KA[comp - 1];
        b(r) = mine.eval(p.values);
      }
    }
    Eigen::VectorXd sol = A.colPivHouseholderQr().solve(b);
    for (int c = 0; c < 9; ++c) CHECK(std::abs(sol(c) - coeffs[c]) <= 1e-6);
  }
}

TEST_CASE("two-field catalog") {
  SUBCASE("types and exact solutions") {
    for (int row = 1; row <= 5; ++row) {
      CAPTURE(row);
      LinearTwoFieldCase c = linear_two_field_case(row);
      SystemEvaluator ev(c.sys);
      ClassificationReport rep = classify(ev, 40, 23);
      REQUIRE(rep.two_field.has_value());
      CHECK(rep.two_field->type == c.expected_type);
      CHECK_FALSE(c.equation_form.empty());
      REQUIRE_FALSE(c.solutions_w.empty());
      for (const auto& h0 : c.solutions_w) {
        CAPTURE(h0.str());
        for (const auto& p : states(ev, 25, 29))
          CHECK(defining_residual(ev, h0, p).max_abs <= 1e-12);
      }
    }
  }

  SUBCASE("harmonic solution of the rotation case is indefinite") {
    LinearTwoFieldCase c = linear_two_field_case(3);
    SystemEvaluator ev(c.sys);
    DensityEvaluator h0 = DensityEvaluator::in_w(ev, c.solutions_w.front());
    Eigen::MatrixXd H = h0.hessian_at_w(std::vector<double>{0.3, -0.4});
    CHECK(matrix_definiteness(H) == Definiteness::Indefinite);
  }

  SUBCASE("row range") {
    CHECK_THROWS_AS(linear_two_field_case(0), DimensionMismatchError);
    CHECK_THROWS_AS(linear_two_field_case(6), DimensionMismatchError);
  }
}

TEST_CASE("vacuum field system") {
  BalanceSystem sys = maxwell_system();
  SystemEvaluator ev(sys);

  SUBCASE("curl structure and zero production") {
    const std::vector<double> y = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
    CHECK(ev.production(y).cwiseAbs().maxCoeff() == 0.0);
    // Axis-1 flux: dE2 carries B3, dE3 carries -B2, dB2 carries -E3, dB3 E2.
    Eigen::VectorXd f = ev.flux(0, y);
    CHECK(f(0) == 0.0);
    CHECK(f(1) == doctest::Approx(0.6));
    CHECK(f(2) == doctest::Approx(-0.5));
    CHECK(f(3) == 0.0);
    CHECK(f(4) == doctest::Approx(-0.3));
    CHECK(f(5) == doctest::Approx(0.2));
  }

  SUBCASE("field energy carries its own multipliers") {
    SblCandidate cand = maxwell_energy_candidate();
    for (const auto& p : states(ev, 30, 31)) {
      const std::vector<double> y = state_vector(sys, p);
      Eigen::VectorXd l = Eigen::Map<const Eigen::VectorXd>(y.data(), 6);
      LlResidual r = ll_residual(ev, cand, l, p);
      CHECK(r.r_flux <= 1e-12);
      CHECK(r.r_source <= 1e-12);
      MainFieldSolve sol = solve_main_fields(ev, cand, p);
      CHECK(sol.feasible);
      CHECK((sol.fields.lambda - l).cwiseAbs().maxCoeff() <= 1e-8);
    }
  }

  SUBCASE("divergence identities are not of multiplier form") {
    for (bool electric : {true, false}) {
      SblCandidate cand = maxwell_divergence_candidate(electric);
      for (const auto& p : states(ev, 5, 37)) {
        MainFieldSolve sol = solve_main_fields(ev, cand, p);
        CHECK_FALSE(sol.feasible);
        CHECK(sol.flux_residual > 0.5);
      }
    }
  }
}

TEST_CASE("repository model files") {
  SUBCASE("model files are render fixed points") {
    for (const char* rel :
         {"models/burgers.model", "models/wave2.model", "models/cattaneo.model",
          "models/maxwell.model"}) {
      CAPTURE(rel);
      const std::string text = slurp(repo_path(rel));
      CHECK(render_model_text(parse_model_text(text)) == text);
    }
  }

  SUBCASE("candidate files are render fixed points") {
    const struct {
      const char* model;
      const char* sbl;
    } pairs[] = {{"models/burgers.model", "models/burgers.sbl"},
                 {"models/wave2.model", "models/wave2_energy.sbl"},
                 {"models/cattaneo.model", "models/cattaneo_entropy.sbl"},
                 {"models/maxwell.model", "models/maxwell_energy.sbl"},
                 {"models/maxwell.model", "models/maxwell_divE.sbl"}};
    for (const auto& pr : pairs) {
      CAPTURE(pr.sbl);
      BalanceSystem sys = load_model_file(repo_path(pr.model));
      const std::string text = slurp(repo_path(pr.sbl));
      CHECK(render_sbl_text(parse_sbl_text(text, sys)) == text);
    }
  }

  SUBCASE("generated texts match the committed systems") {
    CHECK(render_model_text(maxwell_system()) ==
          slurp(repo_path("models/maxwell.model")));
    CHECK(render_model_text(cattaneo_system(frozen_spec(),
                                            Expr::variable("theta"))) ==
          slurp(repo_path("models/cattaneo.model")));
  }

  SUBCASE("scalar pair agrees with the generator") {
    BalanceSystem sys = load_model_file(repo_path("models/burgers.model"));
    CHECK(sys.name == "burgers");
    SystemEvaluator ev(sys);
    SblCandidate file = parse_sbl_text(
        slurp(repo_path("models/burgers.sbl")), sys);
    SblCandidate built = scalar_sbl(sys, parse_expr("u^2/2"), 0.0);
    for (const auto& p : states(ev, 20, 41)) {
      CHECK(std::abs(file.K0.eval(p.values) - built.K0.eval(p.values)) <=
            1e-12);
      CHECK(std::abs(file.KA[0].eval(p.values) - built.KA[0].eval(p.values)) <=
            1e-10);
      Eigen::VectorXd l(1);
      l << p.values.at("u");
      LlResidual r = ll_residual(ev, file, l, p);
      CHECK(r.r_flux <= 1e-12);
    }
  }

  SUBCASE("wave pair is an exact law") {
    BalanceSystem sys = load_model_file(repo_path("models/wave2.model"));
    SystemEvaluator ev(sys);
    ClassificationReport rep = classify(ev, 30, 43);
    REQUIRE(rep.two_field.has_value());
    CHECK(rep.two_field->type == TwoFieldType::Hyperbolic);
    SblCandidate file =
        parse_sbl_text(slurp(repo_path("models/wave2_energy.sbl")), sys);
    for (const auto& p : states(ev, 20, 47)) {
      Eigen::VectorXd l(2);
      l << 4 * p.values.at("y1"), 4 * p.values.at("y2");
      LlResidual r = ll_residual(ev, file, l, p);
      CHECK(r.r_flux <= 1e-12);
      CHECK(r.r_source <= 1e-12);
    }
  }

  SUBCASE("relaxation pair matches the derived member") {
    BalanceSystem sys = load_model_file(repo_path("models/cattaneo.model"));
    SystemEvaluator ev(sys);
    SblCandidate file = parse_sbl_text(
        slurp(repo_path("models/cattaneo_entropy.sbl")), sys);
    SblCandidate member = cattaneo_sbl(frozen_spec(), frozen_params(), 1.0);
    for (const auto& p : states(ev, 30, 53)) {
      CHECK(std::abs(file.K0.eval(p.values) - member.K0.eval(p.values)) <=
            1e-9);
      for (int a = 0; a < 3; ++a)
        CHECK(std::abs(file.KA[a].eval(p.values) -
                       member.KA[a].eval(p.values)) <= 1e-12);
      CHECK(std::abs(file.Q.eval(p.values) - member.Q.eval(p.values)) <=
            1e-12);
    }
  }

  SUBCASE("field energy pair matches the builders") {
    BalanceSystem sys = load_model_file(repo_path("models/maxwell.model"));
    SystemEvaluator ev(sys);
    SblCandidate energy =
        parse_sbl_text(slurp(repo_path("models/maxwell_energy.sbl")), sys);
    SblCandidate dive =
        parse_sbl_text(slurp(repo_path("models/maxwell_divE.sbl")), sys);
    SblCandidate energy_built = maxwell_energy_candidate();
    SblCandidate dive_built = maxwell_divergence_candidate(true);
    for (const auto& p : states(ev, 15, 59)) {
      CHECK(std::abs(energy.K0.eval(p.values) -
                     energy_built.K0.eval(p.values)) <= 1e-12);
      for (int a = 0; a < 3; ++a) {
        CHECK(std::abs(energy.KA[a].eval(p.values) -
                       energy_built.KA[a].eval(p.values)) <= 1e-12);
        CHECK(std::abs(dive.KA[a].eval(p.values) -
                       dive_built.KA[a].eval(p.values)) <= 1e-12);
      }
    }
  }
}
