#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "colombeau/expr.hpp"

using namespace colombeau;

namespace {

// independent oracle: central finite differences with step 1e-5
double fd_derivative(const Expr& e, int var, double eps, std::vector<double> x, double h = 1e-5) {
    std::vector<double> xp = x, xm = x;
    xp[var] += h;
    xm[var] -= h;
    return (evaluate(e, eps, xp) - evaluate(e, eps, xm)) / (2.0 * h);
}

} // namespace

TEST_CASE("parse builds the expected tree shapes") {
    VarTable vars({"x", "y"});
    Expr e = parse("x*y + eps^-1", vars);
    REQUIRE(e.kind() == ExprKind::Add);
    CHECK(e.kids()[0].kind() == ExprKind::Mul);
    CHECK(e.kids()[1].kind() == ExprKind::Pow);
    CHECK(e.kids()[1].kids()[0].kind() == ExprKind::Epsilon);
}

TEST_CASE("unknown symbols are rejected with their name and position") {
    VarTable vars({"x"});
    try {
        parse("sin(q)", vars);
        FAIL("expected ParseError");
    } catch (const ParseError& err) {
        CHECK(std::string(err.what()).find("q") != std::string::npos);
        CHECK(err.position() == 4);
    }
}

TEST_CASE("syntax errors carry a position") {
    VarTable vars({"x"});
    CHECK_THROWS_AS(parse("x + ", vars), ParseError);
    CHECK_THROWS_AS(parse("(x", vars), ParseError);
    CHECK_THROWS_AS(parse("x 2", vars), ParseError);
    CHECK_THROWS_AS(parse("", vars), ParseError);
}

TEST_CASE("gaussian mollifier net parses and evaluates") {
    VarTable vars({"x", "y"});
    Expr e = parse("eps^-2 * exp(-(x^2+y^2)/eps^2)", vars);
    // (eps,x,y) = (0.1,0,0): 100 * e^0 = 100
    CHECK(evaluate(e, 0.1, std::vector<double>{0.0, 0.0}) == doctest::Approx(100.0).epsilon(1e-14));
    // (eps,x,y) = (0.5,0.5,0): 4 * e^{-1}
    CHECK(evaluate(e, 0.5, std::vector<double>{0.5, 0.0}) ==
          doctest::Approx(4.0 * std::exp(-1.0)).epsilon(1e-14));
}

TEST_CASE("evaluate basics") {
    VarTable vars({"x"});
    CHECK(evaluate(parse("3", vars), 0.7, std::vector<double>{9.0}) == 3.0);
    CHECK(evaluate(parse("eps^-1", vars), 0.25, std::vector<double>{0.0}) == 4.0);
    CHECK(evaluate(parse("pi", vars), 0.5, std::vector<double>{0.0}) ==
          doctest::Approx(M_PI).epsilon(1e-16));
}

TEST_CASE("domain errors are reported, not NaN") {
    VarTable vars({"x"});
    std::vector<double> zero{0.0};
    CHECK_THROWS_AS(evaluate(parse("log(x)", vars), 0.5, zero), EvalError);
    CHECK_THROWS_AS(evaluate(parse("1/x", vars), 0.5, zero), EvalError);
    CHECK_THROWS_AS(evaluate(parse("sqrt(x-1)", vars), 0.5, zero), EvalError);
    CHECK_THROWS_AS(evaluate(parse("x^-1", vars), 0.5, zero), EvalError);
    std::vector<double> neg{-2.0};
    CHECK_THROWS_AS(evaluate(parse("x^0.5", vars), 0.5, neg), EvalError);
    // overflow to inf is allowed (needed by the classifier)
    CHECK(std::isinf(evaluate(parse("exp(1/eps)", vars), 1.0 / 1024.0, zero)));
}

TEST_CASE("differentiate: product and chain rules") {
    VarTable vars({"x", "y"});
    Expr e1 = parse("x*y", vars);
    Expr d1 = differentiate(e1, "x", vars);
    CHECK(structurally_equal(d1, parse("y", vars)));

    Expr e2 = parse("sin(x^2)", vars);
    Expr d2 = differentiate(e2, "x", vars);
    // 2x cos(x^2); check by value at a few points
    for (double x : {0.3, 1.1, -2.0}) {
        std::vector<double> p{x, 0.0};
        CHECK(evaluate(d2, 1.0, p) == doctest::Approx(2 * x * std::cos(x * x)).epsilon(1e-12));
    }
}

TEST_CASE("symbolic derivative matches finite differences at random points") {
    VarTable vars({"x", "y"});
    std::vector<std::string> family = {
        "x*y + eps^-1",
        "sin(x^2) + cos(y)",
        "exp(-(x^2+y^2)/eps^2)",
        "x^3 - 2*x*y + y^2",
        "sqrt(1+x^2)*log(2+y^2)",
        "gauss(x/eps)",
        "sabs(x-y)",
        "x/(1+y^2)",
        "sin(x)*cos(y)*exp(x/2)",
    };
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> dist(-1.5, 1.5);
    for (const std::string& s : family) {
        Expr e = parse(s, vars);
        for (int v = 0; v < 2; ++v) {
            Expr d = differentiate(e, v);
            for (int trial = 0; trial < 20; ++trial) {
                std::vector<double> p{dist(rng), dist(rng)};
                double eps = 0.5 + 0.4 * dist(rng) / 1.5;
                double exact = evaluate(d, eps, p);
                double approx = fd_derivative(e, v, eps, p);
                double scale = std::max({1.0, std::fabs(exact), std::fabs(approx)});
                CHECK(std::fabs(exact - approx) / scale < 1e-6);
            }
        }
    }
}

TEST_CASE("mixed partials commute after evaluation") {
    VarTable vars({"x", "y"});
    std::mt19937_64 rng(777);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (const std::string& s :
         {"sin(x*y)", "exp(x)*cos(y) + x^2*y^3", "gauss(x)*gauss(y)", "x/(2+sin(y))"}) {
        Expr e = parse(s, vars);
        Expr dxy = differentiate(differentiate(e, 0), 1);
        Expr dyx = differentiate(differentiate(e, 1), 0);
        for (int trial = 0; trial < 10; ++trial) {
            std::vector<double> p{dist(rng), dist(rng)};
            double a = evaluate(dxy, 0.5, p);
            double b = evaluate(dyx, 0.5, p);
            CHECK(std::fabs(a - b) <= 1e-9 * std::max(1.0, std::fabs(a)));
        }
    }
}

TEST_CASE("differentiation is linear") {
    VarTable vars({"x"});
    Expr e1 = parse("sin(x)", vars);
    Expr e2 = parse("x^3", vars);
    double a = 2.5, b = -1.25;
    Expr combo = Expr::add(Expr::mul(Expr::constant(a), e1), Expr::mul(Expr::constant(b), e2));
    Expr dc = differentiate(combo, 0);
    Expr d1 = differentiate(e1, 0);
    Expr d2 = differentiate(e2, 0);
    for (double x : {-1.0, 0.2, 0.9}) {
        std::vector<double> p{x};
        CHECK(evaluate(dc, 1.0, p) ==
              doctest::Approx(a * evaluate(d1, 1.0, p) + b * evaluate(d2, 1.0, p)).epsilon(1e-14));
    }
}

TEST_CASE("print/parse round trip is structurally stable") {
    VarTable vars({"x", "y"});
    for (const std::string& s :
         {"x*y + eps^-1", "eps^-2 * exp(-(x^2+y^2)/eps^2)", "bump(2*x)", "gauss(x/eps)",
          "-x^2", "x^-2", "1.5e-3*x", "sabs(x)*sin(y)", "x/(y+2)", "cases(x, exp(x))"}) {
        Expr e = parse(s, vars);
        Expr e2 = parse(print(e), vars);
        CHECK(structurally_equal(e, e2));
        // and printing again is a fixed point
        CHECK(print(e) == print(e2));
    }
}

TEST_CASE("bump is compactly supported and smooth across the cut") {
    VarTable vars({"r"});
    Expr b = parse("bump(r)", vars);
    CHECK(evaluate(b, 1.0, std::vector<double>{0.0}) == doctest::Approx(std::exp(-1.0)));
    CHECK(evaluate(b, 1.0, std::vector<double>{1.0}) == 0.0);
    CHECK(evaluate(b, 1.0, std::vector<double>{-1.2}) == 0.0);
    // values and first derivative tend to 0 at the boundary
    Expr db = differentiate(b, 0);
    CHECK(std::fabs(evaluate(b, 1.0, std::vector<double>{0.999})) < 1e-200);
    CHECK(std::fabs(evaluate(db, 1.0, std::vector<double>{0.999})) < 1e-190);
    CHECK(evaluate(db, 1.0, std::vector<double>{1.0}) == 0.0);
    // derivative matches finite differences inside the support
    for (double r : {-0.7, -0.2, 0.4, 0.8}) {
        double exact = evaluate(db, 1.0, std::vector<double>{r});
        double approx = fd_derivative(b, 0, 1.0, {r});
        CHECK(std::fabs(exact - approx) < 1e-6 * std::max(1.0, std::fabs(exact)));
    }
}

TEST_CASE("constant folding and absorption keep trees small") {
    VarTable vars({"x"});
    CHECK(structurally_equal(Expr::mul(Expr::constant(0.0), parse("sin(x)", vars)),
                             Expr::constant(0.0)));
    CHECK(structurally_equal(Expr::mul(Expr::constant(1.0), parse("x", vars)), parse("x", vars)));
    CHECK(structurally_equal(Expr::add(parse("x", vars), Expr::constant(0.0)), parse("x", vars)));
    CHECK(structurally_equal(Expr::pow(parse("x", vars), Expr::constant(1.0)), parse("x", vars)));
    CHECK(parse("2+3*4", vars).is_constant(14.0));
}

TEST_CASE("substitute grafts expressions in place of variables") {
    VarTable vars({"x", "y"});
    Expr e = parse("x^2 + y", vars);
    Expr r = substitute(e, {{0, parse("y+1", vars)}});
    std::vector<double> p{0.0, 2.0}; // x unused after substitution
    CHECK(evaluate(r, 1.0, p) == doctest::Approx(9.0 + 2.0));
}

TEST_CASE("variable table rejects duplicates and reserved names") {
    CHECK_THROWS_AS(VarTable({"x", "x"}), std::invalid_argument);
    CHECK_THROWS_AS(VarTable({"eps"}), std::invalid_argument);
    CHECK_THROWS_AS(VarTable({"pi"}), std::invalid_argument);
}
