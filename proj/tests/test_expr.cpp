#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "random_exprs.hpp"
#include "sblab/compiled_expr.hpp"
#include "sblab/expr.hpp"

using namespace sblab;
using sblab_test::central_fd;
using sblab_test::ExprGen;

TEST_CASE("grammar basics") {
  Expr e = parse_expr("q1^2 + q2^2 + q3^2");
  CHECK(e.node().kind == NodeKind::Sum);
  CHECK(e.node().kids.size() == 3);
  CHECK(e.eval({{"q1", 1.0}, {"q2", 2.0}, {"q3", 3.0}}) == 14.0);

  Expr p = parse_expr("tau * exp(-2*theta)");
  CHECK(p.node().kind == NodeKind::Product);
  CHECK(p.eval({{"tau", 3.0}, {"theta", 0.0}}) == 3.0);

  CHECK(parse_expr("u^3").eval({{"u", 2.0}}) == 8.0);
  CHECK(parse_expr("ln(x)").eval({{"x", 1.0}}) == 0.0);
  CHECK(parse_expr("2 + 3*x").eval({{"x", 1.0}}) == 5.0);
}

TEST_CASE("syntax errors carry byte offsets") {
  CHECK_THROWS_AS(parse_expr("sin("), SyntaxError);
  try {
    parse_expr("sin(");
  } catch (const SyntaxError& e) {
    CHECK(e.offset == 4);
  }
  CHECK_THROWS_AS(parse_expr("foo(1)"), UnknownFunctionError);
  CHECK_THROWS_AS(parse_expr("1 +"), SyntaxError);
  CHECK_THROWS_AS(parse_expr(""), SyntaxError);
  CHECK_THROWS_AS(parse_expr("x^y"), SyntaxError);  // exponent must be a rational literal
}

TEST_CASE("precedence and associativity") {
  CHECK(parse_expr("2+3*4").eval({}) == 14.0);
  CHECK(parse_expr("2*3^2").eval({}) == 18.0);
  CHECK(parse_expr("8/4/2").eval({}) == 1.0);
  CHECK(parse_expr("1-2-3").eval({}) == -4.0);
  CHECK(parse_expr("-x^2").eval({{"x", 3.0}}) == -9.0);
  CHECK(parse_expr("(1/8)^(-1/3)").eval({}) == 2.0);
  CHECK(parse_expr("x^(3/2)").eval({{"x", 4.0}}) == 8.0);
}

TEST_CASE("evaluation domain errors") {
  CHECK_THROWS_AS(parse_expr("1/x").eval({{"x", 0.0}}), DomainError);
  CHECK_THROWS_AS(parse_expr("ln(x)").eval({{"x", 0.0}}), DomainError);
  CHECK_THROWS_AS(parse_expr("ln(x)").eval({{"x", -1.0}}), DomainError);
  CHECK_THROWS_AS(parse_expr("sqrt(x)").eval({{"x", -0.5}}), DomainError);
  CHECK_THROWS_AS(parse_expr("x^(1/2)").eval({{"x", -2.0}}), DomainError);
  CHECK_THROWS_AS(parse_expr("x^(-2)").eval({{"x", 0.0}}), DomainError);
  CHECK_THROWS_AS(parse_expr("x").eval({{"y", 1.0}}), UnboundVariableError);
}

TEST_CASE("derivative closed forms") {
  Expr cube = parse_expr("u^3");
  CHECK(cube.diff("u").eval({{"u", 2.0}}) == 12.0);
  Expr decay = parse_expr("exp(-2*theta)");
  CHECK(decay.diff("theta").eval({{"theta", 0.0}}) == -2.0);
  Expr r = parse_expr("x^(3/2)");
  CHECK(r.diff("x").eval({{"x", 4.0}}) == doctest::Approx(3.0).epsilon(1e-14));
  Expr q = parse_expr("q1^2 + q2^2");
  double fd = central_fd(q, "q1", {{"q1", 0.7}, {"q2", -0.3}});
  CHECK(q.diff("q1").eval({{"q1", 0.7}, {"q2", -0.3}}) ==
        doctest::Approx(fd).epsilon(1e-6));
  // d/dv of an expression without v is zero.
  CHECK(q.diff("theta").simplified().node().kind == NodeKind::Constant);
  CHECK(q.diff("theta").eval({{"q1", 1.0}, {"q2", 1.0}}) == 0.0);
}

TEST_CASE("derivatives match finite differences on a random corpus") {
  ExprGen gen(20240117, {"x", "y", "z"});
  int checked = 0;
  for (int k = 0; k < 60; ++k) {
    Expr e = gen.gen(3);
    for (const auto& v : e.free_vars()) {
      Expr d = e.diff(v);
      for (int j = 0; j < 25; ++j) {
        Bindings b = gen.point();
        double fd, sym;
        try {
          fd = central_fd(e, v, b);
          sym = d.eval(b);
        } catch (const DomainError&) {
          continue;  // grazed a pole through FD probing
        }
        CHECK(std::abs(sym - fd) <= 1e-6 * (1.0 + std::abs(fd)));
        ++checked;
      }
    }
  }
  CHECK(checked > 1000);
}

TEST_CASE("mixed partials commute") {
  ExprGen gen(7, {"u", "v"});
  for (int k = 0; k < 40; ++k) {
    Expr e = gen.gen(3);
    Expr duv = e.diff("u").diff("v");
    Expr dvu = e.diff("v").diff("u");
    for (int j = 0; j < 10; ++j) {
      Bindings b = gen.point();
      double a, bb;
      try {
        a = duv.eval(b);
        bb = dvu.eval(b);
      } catch (const DomainError&) {
        continue;
      }
      CHECK(std::abs(a - bb) <= 1e-10 * (1.0 + std::abs(a)));
    }
  }
}

TEST_CASE("free variables") {
  CHECK(parse_expr("q1*theta").free_vars() == std::set<std::string>{"q1", "theta"});
  CHECK(parse_expr("3.5").free_vars().empty());
  ExprGen gen(99, {"a", "b", "c"});
  for (int k = 0; k < 50; ++k) {
    Expr e = gen.gen(3);
    auto fv = e.free_vars();
    for (const auto& v : fv) {
      auto dfv = e.diff(v).free_vars();
      for (const auto& w : dfv) CHECK(fv.count(w) == 1);
    }
  }
}

TEST_CASE("simplify identities and equivalence") {
  CHECK(parse_expr("0*x + 1*y").simplified().str() == "y");
  CHECK(parse_expr("x + 0").simplified().str() == "x");
  CHECK(parse_expr("2 + 3").simplified().str() == "5");
  CHECK(parse_expr("x^1").simplified().str() == "x");
  CHECK(parse_expr("x/1").simplified().str() == "x");

  ExprGen gen(1234, {"x", "y"});
  for (int k = 0; k < 60; ++k) {
    Expr e = gen.gen(3);
    Expr s = e.simplified();
    Expr s2 = s.simplified();
    CHECK(s2.str() == s.str());  // idempotent
    for (int j = 0; j < 12; ++j) {
      Bindings b = gen.point();
      double a, c;
      try {
        a = e.eval(b);
        c = s.eval(b);
      } catch (const DomainError&) {
        continue;
      }
      CHECK(std::abs(a - c) <= 1e-12 * (1.0 + std::abs(a)));
    }
  }
}

TEST_CASE("render -> parse round trip is exact") {
  ExprGen gen(555, {"x", "y", "z"});
  for (int k = 0; k < 80; ++k) {
    Expr e = (k % 2 == 0) ? gen.gen(3) : gen.gen(3).simplified();
    std::string s = e.str();
    Expr back = parse_expr(s);
    CHECK(back.str() == s);
    for (int j = 0; j < 6; ++j) {
      Bindings b = gen.point();
      double a, c;
      bool threw_a = false, threw_c = false;
      try {
        a = e.eval(b);
      } catch (const DomainError&) {
        threw_a = true;
      }
      try {
        c = back.eval(b);
      } catch (const DomainError&) {
        threw_c = true;
      }
      CHECK(threw_a == threw_c);
      if (!threw_a && !threw_c) CHECK(a == c);  // bit-identical
    }
  }
}

TEST_CASE("compiled evaluation is bit-identical to the tree walk") {
  ExprGen gen(31337, {"x", "y", "z"});
  const std::vector<std::string> order = {"x", "y", "z"};
  for (int k = 0; k < 60; ++k) {
    Expr e = gen.gen(3);
    CompiledExpr ce(e, order);
    for (int j = 0; j < 10; ++j) {
      Bindings b = gen.point();
      double vars[3] = {b["x"], b["y"], b["z"]};
      double a;
      bool threw = false;
      try {
        a = e.eval(b);
      } catch (const DomainError&) {
        threw = true;
      }
      if (threw) {
        CHECK_THROWS_AS(ce.eval({vars, 3}), DomainError);
      } else {
        CHECK(ce.eval({vars, 3}) == a);
      }
    }
  }
  // Substitution: replace a variable by an expression, check by evaluation.
  Expr f = parse_expr("x^2 + sin(x)");
  Expr g = f.substitute({{"x", parse_expr("2*t + 1")}});
  for (double t : {-1.0, 0.0, 0.5, 2.0}) {
    double x = 2.0 * t + 1.0;
    CHECK(g.eval({{"t", t}}) ==
          doctest::Approx(f.eval({{"x", x}})).epsilon(1e-15));
  }
}
