#include "colombeau/net.hpp"

#include <algorithm>
#include <cmath>

namespace colombeau {

void EpsilonGrid::validate() const {
    if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("grid base q must lie in (0,1)");
    if (k_min < 0 || k_max < k_min) throw std::invalid_argument("grid index range is empty");
}

std::vector<double> EpsilonGrid::values() const {
    validate();
    std::vector<double> v;
    v.reserve(size());
    for (int k = k_min; k <= k_max; ++k) v.push_back(std::pow(q, k));
    return v;
}

std::vector<double> EpsilonGrid::tail_half() const {
    std::vector<double> v = values();
    return {v.begin() + v.size() / 2, v.end()};
}

EpsPredicate EpsPredicate::even_reciprocal_floor() {
    return {"even_reciprocal_floor", [](double eps) {
                double t = 1.0 / eps;
                if (t < 2.0) return false;
                return std::fmod(std::floor(t), 2.0) == 0.0;
            }};
}

EpsPredicate EpsPredicate::interval_union(std::vector<Interval> intervals) {
    return {"interval_union", [intervals = std::move(intervals)](double eps) {
                for (const Interval& iv : intervals)
                    if (eps > iv.lo && eps <= iv.hi) return true;
                return false;
            }};
}

ScalarNet::ScalarNet() : fn_([](double) { return 0.0; }), label_("0") {}

ScalarNet ScalarNet::constant(double c) {
    ScalarNet n;
    n.fn_ = [c](double) { return c; };
    n.expr_ = Expr::constant(c);
    n.label_ = print(*n.expr_);
    return n;
}

ScalarNet ScalarNet::from_function(std::function<double(double)> f, std::string label) {
    ScalarNet n;
    n.fn_ = std::move(f);
    n.label_ = std::move(label);
    return n;
}

ScalarNet ScalarNet::from_expr(Expr e) {
    if (!referenced_vars(e).empty())
        throw std::invalid_argument("ScalarNet expression may reference only eps");
    ScalarNet n;
    n.fn_ = [e](double eps) { return evaluate(e, eps, {}); };
    n.label_ = print(e);
    n.expr_ = std::move(e);
    return n;
}

ScalarNet ScalarNet::from_string(const std::string& text) {
    return from_expr(parse(text, VarTable{}));
}

ScalarNet ScalarNet::piecewise(EpsPredicate pred, ScalarNet if_true, ScalarNet if_false) {
    ScalarNet n;
    n.label_ = "[" + if_true.label_ + " on " + pred.name + "; " + if_false.label_ + " off]";
    n.fn_ = [pred = std::move(pred), t = std::move(if_true), f = std::move(if_false)](double eps) {
        return pred.contains(eps) ? t(eps) : f(eps);
    };
    return n;
}

namespace {
ScalarNet combine(const ScalarNet& a, const ScalarNet& b, char op) {
    ScalarNet n = ScalarNet::from_function(
        [fa = a, fb = b, op](double eps) {
            double x = fa(eps), y = fb(eps);
            switch (op) {
                case '+': return x + y;
                case '-': return x - y;
                default: return x * y;
            }
        },
        "(" + a.label() + std::string(1, op) + b.label() + ")");
    if (a.expr() && b.expr()) {
        Expr e = op == '+'   ? Expr::add(*a.expr(), *b.expr())
                 : op == '-' ? Expr::sub(*a.expr(), *b.expr())
                             : Expr::mul(*a.expr(), *b.expr());
        return ScalarNet::from_expr(std::move(e));
    }
    return n;
}
} // namespace

ScalarNet gn_add(const ScalarNet& a, const ScalarNet& b) { return combine(a, b, '+'); }
ScalarNet gn_sub(const ScalarNet& a, const ScalarNet& b) { return combine(a, b, '-'); }
ScalarNet gn_mul(const ScalarNet& a, const ScalarNet& b) { return combine(a, b, '*'); }

ScalarNet gn_abs(const ScalarNet& a) {
    return ScalarNet::from_function([f = a](double eps) { return std::fabs(f(eps)); },
                                    "|" + a.label() + "|");
}

std::string to_string(AsympClass c) {
    switch (c) {
        case AsympClass::Negligible: return "Negligible";
        case AsympClass::Moderate: return "Moderate";
        case AsympClass::NotModerate: return "NotModerate";
    }
    return "?";
}

namespace {

struct FitResult {
    double slope = 0.0;
    double rms = 0.0;
};

FitResult fit_loglog(const std::vector<double>& eps, const std::vector<double>& logv) {
    const int n = static_cast<int>(eps.size());
    double mx = 0, my = 0;
    for (int i = 0; i < n; ++i) {
        mx += std::log(eps[i]);
        my += logv[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        double dx = std::log(eps[i]) - mx;
        sxx += dx * dx;
        sxy += dx * (logv[i] - my);
    }
    FitResult r;
    r.slope = sxy / sxx;
    double b = my - r.slope * mx;
    double ss = 0;
    for (int i = 0; i < n; ++i) {
        double d = logv[i] - (r.slope * std::log(eps[i]) + b);
        ss += d * d;
    }
    r.rms = std::sqrt(ss / n);
    return r;
}

// snap tolerance for deriving the integer exponent from the fitted slope
constexpr double kSlopeSnap = 0.01;

int exponent_from_slope(double s) { return static_cast<int>(std::ceil(-s - kSlopeSnap)); }

} // namespace

AsymptoticVerdict classify_order(const ScalarNet& n, const EpsilonGrid& grid, int m_test, int p_max) {
    if (m_test < 1) throw std::invalid_argument("m_test must be >= 1");
    std::vector<double> eps = grid.values();
    if (eps.size() < 6) throw std::invalid_argument("grid too short for an asymptotic fit (< 6 points)");

    AsymptoticVerdict v;
    v.grid = grid;
    v.m_test = m_test;
    v.p_max = p_max;

    std::vector<double> tail = grid.tail_half();
    std::vector<double> vals(tail.size());
    for (std::size_t i = 0; i < tail.size(); ++i) vals[i] = n(tail[i]);

    for (double x : vals) {
        if (!std::isfinite(x)) {
            v.cls = AsympClass::NotModerate;
            v.note = "non-finite sample on tail";
            return v;
        }
    }

    std::vector<double> fit_eps, fit_log;
    for (std::size_t i = 0; i < tail.size(); ++i) {
        if (vals[i] != 0.0) {
            fit_eps.push_back(tail[i]);
            fit_log.push_back(std::log(std::fabs(vals[i])));
        }
    }

    if (fit_eps.empty()) {
        v.cls = AsympClass::Negligible;
        v.note = "all-zero tail";
        v.slope = 2.0 * m_test;
        return v;
    }
    if (fit_eps.size() < 3) {
        // too few nonzero samples for a fit: certify only the clear-cut cases
        bool below = true;
        for (std::size_t i = 0; i < fit_eps.size(); ++i)
            if (std::fabs(std::exp(fit_log[i])) > std::pow(fit_eps[i], m_test)) below = false;
        v.cls = below ? AsympClass::Negligible : AsympClass::NotModerate;
        v.note = "sparse nonzero tail";
        return v;
    }

    FitResult fit = fit_loglog(fit_eps, fit_log);
    v.slope = fit.slope;
    v.fit_residual = fit.rms;

    // window divergence: slope drifting across tail halves signals
    // super-polynomial behaviour that a single fit can mask
    if (fit_eps.size() >= 6) {
        std::size_t half = fit_eps.size() / 2;
        FitResult f1 = fit_loglog({fit_eps.begin(), fit_eps.begin() + half},
                                  {fit_log.begin(), fit_log.begin() + half});
        FitResult f2 = fit_loglog({fit_eps.begin() + half, fit_eps.end()},
                                  {fit_log.begin() + half, fit_log.end()});
        if (f2.slope - f1.slope <= -2.0) {
            v.cls = AsympClass::NotModerate;
            v.note = "slope diverging across tail windows";
            return v;
        }
        if (f2.slope - f1.slope >= 2.0 && f2.slope >= m_test) {
            v.cls = AsympClass::Negligible;
            v.note = "accelerating decay across tail windows";
            return v;
        }
    }

    if (v.slope < -static_cast<double>(p_max)) {
        v.cls = AsympClass::NotModerate;
        return v;
    }
    if (v.slope >= static_cast<double>(m_test)) {
        v.cls = AsympClass::Negligible;
        return v;
    }
    v.cls = AsympClass::Moderate;
    v.p = exponent_from_slope(v.slope);
    return v;
}

ScalarNet gn_invert(const ScalarNet& a, const EpsilonGrid& grid, int m_test) {
    ScalarNet reciprocal = ScalarNet::from_function(
        [f = a](double eps) {
            double x = f(eps);
            if (x == 0.0) return std::numeric_limits<double>::infinity();
            return 1.0 / x;
        },
        "1/(" + a.label() + ")");
    AsymptoticVerdict verdict = classify_order(gn_abs(reciprocal), grid, m_test);
    if (verdict.cls == AsympClass::NotModerate)
        throw NotInvertibleError("generalized number is not strictly nonzero (" + verdict.note +
                                 ")");
    return reciprocal;
}

std::vector<double> GPoint::at(double eps) const {
    std::vector<double> x(coords.size());
    for (std::size_t i = 0; i < coords.size(); ++i) x[i] = coords[i](eps);
    return x;
}

GPoint GPoint::constant(std::vector<double> x, double pad, std::string name) {
    GPoint p;
    p.name = std::move(name);
    for (double c : x) {
        p.coords.push_back(ScalarNet::constant(c));
        p.support.lo.push_back(c - pad);
        p.support.hi.push_back(c + pad);
    }
    return p;
}

void GPoint::validate_containment(const EpsilonGrid& grid) const {
    for (double eps : grid.values()) {
        std::vector<double> x = at(eps);
        if (!support.contains(x))
            throw std::invalid_argument("generalized point '" + name +
                                        "' exits its containment box at eps=" + std::to_string(eps));
    }
}

NearStandardResult near_standard(const GPoint& x, const EpsilonGrid& grid, double tol) {
    std::vector<double> eps = grid.values();
    if (eps.size() < 6) throw std::invalid_argument("grid too short for near-standard detection");
    std::size_t start = eps.size() / 2;

    NearStandardResult out;
    out.near_standard = true;
    out.limit.resize(x.dim());

    for (int c = 0; c < x.dim(); ++c) {
        std::vector<double> s;
        for (std::size_t k = start; k < eps.size(); ++k) s.push_back(x.coords[c](eps[k]));
        const std::size_t T = s.size();
        double scale = 1.0;
        for (double v : s) scale = std::max(scale, std::fabs(v));

        std::vector<double> d(T - 1);
        for (std::size_t i = 0; i + 1 < T; ++i) d[i] = s[i + 1] - s[i];

        bool all_tiny = true;
        for (double dv : d)
            if (std::fabs(dv) > 1e-14 * scale) all_tiny = false;
        if (all_tiny) {
            out.limit[c] = s.back();
            continue;
        }

        bool monotone = true;
        for (std::size_t i = 1; i < d.size(); ++i)
            if (std::fabs(d[i]) > 1.2 * std::fabs(d[i - 1]) + 1e-14 * scale) monotone = false;
        if (!monotone) {
            out.near_standard = false;
            out.reason = "tail increments do not decrease (component " + std::to_string(c) + ")";
            return out;
        }

        // signed median increment ratio over the last steps
        std::vector<double> ratios;
        for (std::size_t i = std::max<std::size_t>(1, d.size() - 5); i < d.size(); ++i)
            if (std::fabs(d[i - 1]) > 1e-300) ratios.push_back(d[i] / d[i - 1]);
        double rho = 0.0;
        if (!ratios.empty()) {
            std::sort(ratios.begin(), ratios.end());
            rho = ratios[ratios.size() / 2];
        }
        if (std::fabs(rho) > 0.97) {
            out.near_standard = false;
            out.reason = "tail increments shrink too slowly (component " + std::to_string(c) + ")";
            return out;
        }
        double dlast = d.back();
        double remainder = std::fabs(dlast) * std::fabs(rho) / (1.0 - std::fabs(rho));
        if (std::fabs(dlast) > tol || remainder > tol) {
            out.near_standard = false;
            out.reason = "tail not settled within tol (component " + std::to_string(c) + ")";
            return out;
        }
        out.limit[c] = s.back() + dlast * rho / (1.0 - rho);
        out.max_remainder = std::max(out.max_remainder, std::max(remainder, std::fabs(dlast)));
    }
    return out;
}

bool points_equivalent(const GPoint& x, const GPoint& y, const EpsilonGrid& grid, int m_test) {
    if (x.dim() != y.dim())
        throw std::invalid_argument("points_equivalent: dimension mismatch");
    ScalarNet dist = ScalarNet::from_function(
        [a = x, b = y](double eps) {
            double ss = 0.0;
            for (int i = 0; i < a.dim(); ++i) {
                double d = a.coords[i](eps) - b.coords[i](eps);
                ss += d * d;
            }
            return std::sqrt(ss);
        },
        "dist(" + x.name + "," + y.name + ")");
    return classify_order(dist, grid, m_test).negligible();
}

NegligibilityResult check_negligible(const ScalarNet& abs_net, const ScalarNet* scale_net,
                                     const EpsilonGrid& grid, const NegligibilityPolicy& policy) {
    NegligibilityResult r;
    r.verdict = classify_order(abs_net, grid, policy.m_test, policy.p_max);
    for (double eps : grid.values()) {
        double a = std::fabs(abs_net(eps));
        r.max_abs = std::max(r.max_abs, a);
        if (scale_net) {
            double s = std::max(std::fabs((*scale_net)(eps)), 1e-300);
            r.max_rel = std::max(r.max_rel, a / s);
        }
    }
    if (r.verdict.negligible()) {
        r.pass = true;
        r.branch = "classifier";
    } else if (r.max_abs <= policy.abs_floor) {
        r.pass = true;
        r.branch = "abs-floor";
    } else if (scale_net && r.max_rel <= policy.rel_floor) {
        r.pass = true;
        r.branch = "rel-floor";
    }
    return r;
}

} // namespace colombeau
