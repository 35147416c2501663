#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "colombeau/net.hpp"

using namespace colombeau;

namespace {

const EpsilonGrid kDefault{};                 // 2^-k, k = 1..20
const EpsilonGrid kOscillating{0.7, 1, 28};   // samples both sides of J

// oracle: tabulate log values directly and fit the tail slope by hand
double tail_slope_oracle(const std::function<double(double)>& f, const EpsilonGrid& g) {
    std::vector<double> eps = g.tail_half();
    std::vector<double> xs, ys;
    for (double e : eps) {
        double v = std::fabs(f(e));
        if (v > 0.0 && std::isfinite(v)) {
            xs.push_back(std::log(e));
            ys.push_back(std::log(v));
        }
    }
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= xs.size();
    my /= xs.size();
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    return sxy / sxx;
}

GPoint counterexample_point() {
    // x_eps = 0 on J, 1 off J (the zero of the localization counterexample)
    GPoint p;
    p.name = "xtilde";
    p.coords.push_back(ScalarNet::piecewise(EpsPredicate::even_reciprocal_floor(),
                                            ScalarNet::constant(0.0), ScalarNet::constant(1.0)));
    p.support = Box{{-0.5}, {1.5}};
    return p;
}

} // namespace

TEST_CASE("grid values are a strictly decreasing subset of (0,1]") {
    std::vector<double> v = kDefault.values();
    REQUIRE(v.size() == 20);
    CHECK(v.front() == 0.5);
    for (std::size_t i = 0; i + 1 < v.size(); ++i) CHECK(v[i + 1] < v[i]);
    for (double e : v) CHECK((e > 0.0 && e <= 1.0));
    CHECK(kDefault.tail_half().size() == 10);
}

TEST_CASE("power laws classify with slope within 0.05") {
    for (int a = -5; a <= 5; ++a) {
        ScalarNet n = ScalarNet::from_string("eps^" + std::to_string(a));
        AsymptoticVerdict v = classify_order(n, kDefault);
        CHECK(std::fabs(v.slope - a) < 0.05);
        if (a >= 5) {
            CHECK(v.cls == AsympClass::Negligible); // at the m_test cutoff
        } else {
            CHECK(v.cls == AsympClass::Moderate);
            CHECK(v.p == -a);
        }
    }
}

TEST_CASE("identically zero net is Negligible outright") {
    AsymptoticVerdict v = classify_order(ScalarNet{}, kDefault);
    CHECK(v.cls == AsympClass::Negligible);
    CHECK(v.note == "all-zero tail");
}

TEST_CASE("exp(-1/eps) is Negligible") {
    auto f = [](double e) { return std::exp(-1.0 / e); };
    // oracle: on the default grid the tail underflows to exact zero, which the
    // policy maps to "beats every slope"; on a shorter grid where values stay
    // finite the tail slope exceeds m_test
    EpsilonGrid short_grid{0.5, 1, 9};
    CHECK(tail_slope_oracle(f, short_grid) > 5.0);
    for (double e : kDefault.tail_half()) CHECK(f(e) == 0.0);

    CHECK(classify_order(ScalarNet::from_string("exp(-1/eps)"), kDefault).cls ==
          AsympClass::Negligible);
    CHECK(classify_order(ScalarNet::from_string("exp(-1/eps)"), short_grid).cls ==
          AsympClass::Negligible);
}

TEST_CASE("exp(1/eps) is NotModerate") {
    // overflows to inf on the tail; on a shorter all-finite grid the window
    // slopes diverge negatively
    EpsilonGrid short_grid{0.5, 1, 9};
    auto f = [](double e) { return std::exp(1.0 / e); };
    CHECK(tail_slope_oracle(f, short_grid) < -5.0);
    CHECK(classify_order(ScalarNet::from_string("exp(1/eps)"), kDefault).cls ==
          AsympClass::NotModerate);
    CHECK(classify_order(ScalarNet::from_string("exp(1/eps)"), short_grid).cls ==
          AsympClass::NotModerate);
}

TEST_CASE("classifier rejects grids that are too short") {
    EpsilonGrid tiny{0.5, 1, 4};
    CHECK_THROWS_AS(classify_order(ScalarNet::constant(1.0), tiny), std::invalid_argument);
}

TEST_CASE("classifier is scale-equivariant in the exponent") {
    for (int shift : {-2, 1, 3}) {
        ScalarNet base = ScalarNet::from_string("eps^2");
        ScalarNet shifted = gn_mul(ScalarNet::from_string("eps^" + std::to_string(shift)), base);
        double s0 = classify_order(base, kDefault).slope;
        double s1 = classify_order(shifted, kDefault).slope;
        CHECK(std::fabs(s1 - s0 - shift) < 0.05);
    }
}

TEST_CASE("ring operations behave on power laws") {
    ScalarNet a = ScalarNet::from_string("eps");
    ScalarNet b = ScalarNet::from_string("eps^2");
    AsymptoticVerdict v = classify_order(gn_mul(a, b), kDefault);
    CHECK(v.cls == AsympClass::Moderate);
    CHECK(std::fabs(v.slope - 3.0) < 0.05);

    ScalarNet inv = gn_invert(a, kDefault);
    AsymptoticVerdict vi = classify_order(inv, kDefault);
    CHECK(vi.cls == AsympClass::Moderate);
    CHECK(vi.p == 1);
    CHECK(inv(0.25) == 4.0);
}

TEST_CASE("moderate times negligible stays negligible") {
    ScalarNet mod = ScalarNet::from_string("eps^-3");
    ScalarNet neg = ScalarNet::from_string("exp(-1/eps)");
    CHECK(classify_order(gn_mul(mod, neg), kDefault).cls == AsympClass::Negligible);
}

TEST_CASE("invert rejects a net vanishing on the oscillation set") {
    ScalarNet a = ScalarNet::piecewise(EpsPredicate::even_reciprocal_floor(),
                                       ScalarNet::constant(0.0), ScalarNet::constant(1.0));
    CHECK_THROWS_AS(gn_invert(a, kOscillating), NotInvertibleError);
    // on the default dyadic grid every sample lies in J, so the net is zero
    // there as well
    CHECK_THROWS_AS(gn_invert(a, kDefault), NotInvertibleError);
}

TEST_CASE("even_reciprocal_floor matches the interval family bit-exactly") {
    EpsPredicate J = EpsPredicate::even_reciprocal_floor();
    CHECK(J.contains(0.5));          // (1/3, 1/2]
    CHECK(J.contains(0.4));
    CHECK_FALSE(J.contains(1.0 / 3.0));
    CHECK(J.contains(0.25));         // (1/5, 1/4]
    CHECK_FALSE(J.contains(0.3));    // in (1/4, 1/3], between intervals
    CHECK_FALSE(J.contains(0.7));    // above 1/2
    for (int n = 1; n <= 40; ++n) {
        double inside = 0.5 * (1.0 / (2 * n + 1) + 1.0 / (2 * n));
        double outside = 0.5 * (1.0 / (2 * n + 2) + 1.0 / (2 * n + 1));
        CHECK(J.contains(inside));
        CHECK_FALSE(J.contains(outside));
    }
}

TEST_CASE("near-standard: constant and convergent nets") {
    GPoint c = GPoint::constant({1.0, 2.0});
    NearStandardResult r = near_standard(c, kDefault);
    REQUIRE(r.near_standard);
    CHECK(r.limit[0] == 1.0);
    CHECK(r.limit[1] == 2.0);

    GPoint lin;
    lin.coords.push_back(ScalarNet::from_string("eps"));
    lin.support = Box{{-0.1}, {1.1}};
    NearStandardResult r2 = near_standard(lin, kDefault);
    REQUIRE(r2.near_standard);
    CHECK(std::fabs(r2.limit[0]) < 1e-6);
}

TEST_CASE("near-standard: the localization counterexample point is rejected") {
    GPoint x = counterexample_point();
    x.validate_containment(kOscillating);
    NearStandardResult r = near_standard(x, kOscillating);
    CHECK_FALSE(r.near_standard);
    CHECK_FALSE(r.reason.empty());
}

TEST_CASE("near-standard: 50 seeded constant/convergent nets recover their limits") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> cdist(-10.0, 10.0);
    std::uniform_real_distribution<double> adist(-1.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        double c = cdist(rng), a = adist(rng);
        int form = trial % 5;
        ScalarNet n;
        switch (form) {
            case 0: n = ScalarNet::constant(c); break;
            case 1:
                n = gn_add(ScalarNet::constant(c), gn_mul(ScalarNet::constant(a),
                                                          ScalarNet::from_string("eps")));
                break;
            case 2:
                n = gn_add(ScalarNet::constant(c), gn_mul(ScalarNet::constant(a),
                                                          ScalarNet::from_string("eps^2")));
                break;
            case 3:
                n = gn_add(ScalarNet::constant(c), gn_mul(ScalarNet::constant(a),
                                                          ScalarNet::from_string("exp(-1/eps)")));
                break;
            default:
                n = gn_add(ScalarNet::constant(c),
                           gn_mul(ScalarNet::constant(a), ScalarNet::from_string("eps/(1+eps)")));
                break;
        }
        GPoint p;
        p.coords.push_back(n);
        p.support = Box{{c - 2.0}, {c + 2.0}};
        NearStandardResult r = near_standard(p, kDefault);
        REQUIRE(r.near_standard);
        CHECK(std::fabs(r.limit[0] - c) < 1e-6);
    }
}

TEST_CASE("near-standard convergence is tail-monotone within tol") {
    GPoint p;
    p.coords.push_back(ScalarNet::from_string("2 + eps^2"));
    p.support = Box{{1.0}, {3.0}};
    NearStandardResult r = near_standard(p, kDefault);
    REQUIRE(r.near_standard);
    std::vector<double> tail = kDefault.tail_half();
    double prev = std::numeric_limits<double>::infinity();
    for (double e : tail) {
        double d = std::fabs(p.coords[0](e) - r.limit[0]);
        CHECK(d <= prev + 1e-6);
        prev = d;
    }
}

TEST_CASE("point equivalence") {
    GPoint x = GPoint::constant({0.0});
    GPoint y;
    y.coords.push_back(ScalarNet::from_string("exp(-1/eps)"));
    y.support = Box{{-0.5}, {0.5}};
    GPoint z;
    z.coords.push_back(ScalarNet::from_string("eps^3"));
    z.support = Box{{-0.5}, {0.5}};

    CHECK(points_equivalent(x, x, kDefault));
    CHECK(points_equivalent(x, y, kDefault));
    CHECK_FALSE(points_equivalent(x, z, kDefault)); // moderate decay only

    GPoint w = GPoint::constant({0.0, 0.0});
    CHECK_THROWS_AS(points_equivalent(x, w, kDefault), std::invalid_argument);
}

TEST_CASE("point equivalence is an equivalence relation on a finite family") {
    std::vector<GPoint> fam;
    fam.push_back(GPoint::constant({1.0}));
    GPoint b;
    b.coords.push_back(ScalarNet::from_string("1 + exp(-1/eps)"));
    b.support = Box{{0.0}, {2.0}};
    fam.push_back(b);
    GPoint c;
    c.coords.push_back(ScalarNet::from_string("1 + eps"));
    c.support = Box{{0.0}, {2.0}};
    fam.push_back(c);

    for (std::size_t i = 0; i < fam.size(); ++i) {
        CHECK(points_equivalent(fam[i], fam[i], kDefault)); // reflexive
        for (std::size_t j = 0; j < fam.size(); ++j)
            CHECK(points_equivalent(fam[i], fam[j], kDefault) ==
                  points_equivalent(fam[j], fam[i], kDefault)); // symmetric
    }
    // transitivity on this family: 0~1 and anything with 2 is consistent
    bool e01 = points_equivalent(fam[0], fam[1], kDefault);
    bool e12 = points_equivalent(fam[1], fam[2], kDefault);
    bool e02 = points_equivalent(fam[0], fam[2], kDefault);
    CHECK(e01);
    CHECK_FALSE(e12);
    CHECK_FALSE(e02);
}

TEST_CASE("containment validation") {
    GPoint p;
    p.coords.push_back(ScalarNet::from_string("1/eps"));
    p.support = Box{{-1.0}, {1.0}};
    CHECK_THROWS_AS(p.validate_containment(kDefault), std::invalid_argument);
}

TEST_CASE("negligibility check branches") {
    NegligibilityPolicy pure{};
    // classifier branch
    NegligibilityResult r1 =
        check_negligible(ScalarNet::from_string("exp(-1/eps)"), nullptr, kDefault, pure);
    CHECK(r1.pass);
    CHECK(r1.branch == "classifier");
    // failure
    NegligibilityResult r2 = check_negligible(ScalarNet::from_string("eps"), nullptr, kDefault, pure);
    CHECK_FALSE(r2.pass);
    // absolute floor
    NegligibilityPolicy floored{};
    floored.abs_floor = 1e-7;
    NegligibilityResult r3 =
        check_negligible(ScalarNet::constant(3e-8), nullptr, kDefault, floored);
    CHECK(r3.pass);
    CHECK(r3.branch == "abs-floor");
    // relative floor
    ScalarNet noise = ScalarNet::from_string("1e-16 * eps^-2");
    ScalarNet scale = ScalarNet::from_string("eps^-2");
    NegligibilityResult r4 = check_negligible(noise, &scale, kDefault, pure);
    CHECK(r4.pass);
    CHECK(r4.branch == "rel-floor");
}
