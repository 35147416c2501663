#include "colombeau/flow.hpp"

#include <algorithm>
#include <cmath>

#include "colombeau/linalg.hpp"

namespace colombeau {

GVectorField GVectorField::from_strings(Domain domain, std::vector<std::string> vars,
                                        std::vector<std::string> comps) {
    if (static_cast<int>(comps.size()) != domain.dim())
        throw std::invalid_argument("vector field needs one component per coordinate");
    return {GFunc::from_strings(std::move(domain), std::move(vars), std::move(comps))};
}

GVectorField GVectorField::from_gfunc(GFunc g) {
    if (g.target_dim() != g.dim())
        throw std::invalid_argument("vector field components must match the domain dimension");
    return {std::move(g)};
}

GroupAction GroupAction::closed_form(Domain domain, std::vector<std::string> var_names,
                                     std::vector<std::string> exprs, Interval eta_range) {
    if (var_names.empty() || var_names.front() != "eta")
        throw std::invalid_argument("closed-form action variables must start with 'eta'");
    if (static_cast<int>(var_names.size()) != domain.dim() + 1)
        throw std::invalid_argument("closed-form action needs eta plus one variable per axis");
    VarTable vars(var_names);
    std::vector<Expr> comps;
    bool uses_eps = false;
    for (const std::string& s : exprs) {
        comps.push_back(parse(s, vars));
        uses_eps = uses_eps || references_eps(comps.back());
    }
    if (static_cast<int>(comps.size()) != domain.dim())
        throw std::invalid_argument("closed-form action needs one expression per axis");

    GroupAction a;
    a.domain_ = std::move(domain);
    a.eta_range_ = eta_range;
    a.provenance_ = "closed-form";
    a.eps_free_ = !uses_eps;
    a.eta_step_ = 1e-3;
    a.log_ = std::make_shared<FlowLog>();
    a.proc_ = [comps](double eps, double eta, std::span<const double> x) {
        std::vector<double> point(x.size() + 1);
        point[0] = eta;
        std::copy(x.begin(), x.end(), point.begin() + 1);
        ApplyResult r;
        r.point.resize(comps.size());
        for (std::size_t i = 0; i < comps.size(); ++i) r.point[i] = evaluate(comps[i], eps, point);
        return r;
    };
    return a;
}

GroupAction GroupAction::from_proc(
    Domain domain, std::function<ApplyResult(double, double, std::span<const double>)> proc,
    Interval eta_range, std::string provenance, bool eps_free, double eta_step) {
    GroupAction a;
    a.domain_ = std::move(domain);
    a.proc_ = std::move(proc);
    a.eta_range_ = eta_range;
    a.provenance_ = std::move(provenance);
    a.eps_free_ = eps_free;
    a.eta_step_ = eta_step;
    a.log_ = std::make_shared<FlowLog>();
    return a;
}

GroupAction::ApplyResult GroupAction::apply_ex(double eps, double eta,
                                               std::span<const double> x) const {
    if (eta < eta_range_.lo - 1e-12 || eta > eta_range_.hi + 1e-12)
        throw std::invalid_argument("eta outside the declared validity range");
    return proc_(eps, eta, x);
}

GroupAction integrate_flow(const GVectorField& xi, const FlowConfig& cfg, Interval eta_range) {
    if (cfg.steps_per_unit < 1) throw std::invalid_argument("steps_per_unit must be positive");
    if (!(eta_range.lo <= 0.0 && eta_range.hi >= 0.0))
        throw std::invalid_argument("eta range must contain 0");

    GroupAction a;
    a.domain_ = xi.domain();
    a.eta_range_ = eta_range;
    a.provenance_ = "integrated";
    a.eps_free_ = xi.components.eps_free();
    a.eta_step_ = 1.0 / cfg.steps_per_unit;
    a.log_ = std::make_shared<FlowLog>();

    std::shared_ptr<FlowLog> log = a.log_;
    GVectorField field = xi;
    Box escape = cfg.escape_box;
    int steps_per_unit = cfg.steps_per_unit;

    a.proc_ = [field, escape, steps_per_unit, log](double eps, double eta,
                                                   std::span<const double> x0) {
        const int dim = field.dim();
        GroupAction::ApplyResult res;
        res.point.assign(x0.begin(), x0.end());
        if (eta == 0.0) { // identity at eta = 0 holds exactly for integrated provenance
            ++log->trajectories;
            return res;
        }
        int steps = std::max(1, static_cast<int>(std::ceil(std::fabs(eta) * steps_per_unit)));
        double h = eta / steps;
        std::vector<double> k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
        std::vector<double>& s = res.point;
        auto eval_field = [&](const std::vector<double>& p, std::vector<double>& out, double at_eta) {
            try {
                field.eval(eps, p, out);
            } catch (const EvalError& err) {
                throw IntegratorError("integrator step failure at eps=" + std::to_string(eps) +
                                      ", eta=" + std::to_string(at_eta) + ": " + err.what());
            }
        };
        for (int step = 0; step < steps; ++step) {
            double eta_here = step * h;
            eval_field(s, k1, eta_here);
            for (int i = 0; i < dim; ++i) tmp[i] = s[i] + 0.5 * h * k1[i];
            eval_field(tmp, k2, eta_here);
            for (int i = 0; i < dim; ++i) tmp[i] = s[i] + 0.5 * h * k2[i];
            eval_field(tmp, k3, eta_here);
            for (int i = 0; i < dim; ++i) tmp[i] = s[i] + h * k3[i];
            eval_field(tmp, k4, eta_here);
            for (int i = 0; i < dim; ++i)
                s[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            for (int i = 0; i < dim; ++i)
                if (!std::isfinite(s[i]))
                    throw IntegratorError("integrator state became non-finite at eps=" +
                                          std::to_string(eps) + ", eta=" +
                                          std::to_string(eta_here + h));
            if (!res.escaped && escape.dim() == dim && !escape.contains(s)) {
                res.escaped = true;
                ++log->escape_count;
                if (log->escapes.size() < 64) {
                    EscapeEvent ev;
                    ev.eps = eps;
                    ev.eta = eta_here + h;
                    ev.start.assign(x0.begin(), x0.end());
                    ev.exit_point = s;
                    log->escapes.push_back(std::move(ev));
                }
            }
        }
        ++log->trajectories;
        log->steps += steps;
        return res;
    };
    return a;
}

namespace {

// max of two nets, pointwise in eps
ScalarNet net_max(const ScalarNet& a, const ScalarNet& b) {
    return ScalarNet::from_function(
        [a, b](double eps) { return std::max(a(eps), b(eps)); },
        "max(" + a.label() + "," + b.label() + ")");
}

SupPair sup_over_box_cached(const CompactBox& K, bool eps_free,
                            std::function<std::pair<double, double>(double, std::span<const double>)> fn) {
    if (!eps_free) return sup_over_box(K, std::move(fn));
    // the residual does not depend on eps: compute once and reuse
    auto cache = std::make_shared<std::optional<std::pair<double, double>>>();
    auto compute = [K, fn, cache](double eps) {
        if (!*cache) {
            double ba = 0.0, bs = 0.0;
            K.for_each_sample(eps, [&](std::span<const double> x) {
                auto [a, s] = fn(eps, x);
                ba = std::max(ba, std::fabs(a));
                bs = std::max(bs, std::fabs(s));
            });
            *cache = std::make_pair(ba, bs);
        }
        return **cache;
    };
    SupPair p;
    p.abs = ScalarNet::from_function([compute](double e) { return compute(e).first; }, "residual sup");
    p.scale = ScalarNet::from_function([compute](double e) { return compute(e).second; }, "scale");
    return p;
}

} // namespace

GroupActionReport verify_group_action(const GroupAction& Phi, const std::vector<CompactBox>& Ks,
                                      const std::vector<double>& eta_samples,
                                      const EpsilonGrid& grid, const NegligibilityPolicy& policy) {
    GroupActionReport rep;
    rep.pass = true;
    for (double e1 : eta_samples)
        for (double e2 : eta_samples) {
            if (rep.eta_pairs.size() >= 8) break;
            if (!Phi.eta_range().contains(e1 + e2)) continue;
            rep.eta_pairs.emplace_back(e1, e2);
        }

    const bool ef = Phi.eps_free();
    for (const CompactBox& K : Ks) {
        SupPair ident = sup_over_box_cached(K, ef, [&Phi](double eps, std::span<const double> x) {
            std::vector<double> y = Phi.apply(eps, 0.0, x);
            double res = 0.0, scale = 1.0;
            for (std::size_t i = 0; i < y.size(); ++i) {
                res = std::max(res, std::fabs(y[i] - x[i]));
                scale = std::max({scale, std::fabs(y[i]), std::fabs(x[i])});
            }
            return std::make_pair(res, scale);
        });
        NegligibilityResult r0 = check_negligible(ident.abs, &ident.scale, grid, policy);
        rep.pass = rep.pass && r0.pass;
        rep.identity_per_box.push_back(std::move(r0));

        auto pairs = rep.eta_pairs;
        SupPair addv = sup_over_box_cached(K, ef, [&Phi, pairs](double eps, std::span<const double> x) {
            double res = 0.0, scale = 1.0;
            for (auto [e1, e2] : pairs) {
                std::vector<double> lhs = Phi.apply(eps, e1 + e2, x);
                std::vector<double> mid = Phi.apply(eps, e2, x);
                std::vector<double> rhs = Phi.apply(eps, e1, mid);
                for (std::size_t i = 0; i < lhs.size(); ++i) {
                    res = std::max(res, std::fabs(lhs[i] - rhs[i]));
                    scale = std::max({scale, std::fabs(lhs[i]), std::fabs(rhs[i])});
                }
            }
            return std::make_pair(res, scale);
        });
        NegligibilityResult r2 = check_negligible(addv.abs, &addv.scale, grid, policy);
        rep.pass = rep.pass && r2.pass;
        rep.additivity_per_box.push_back(std::move(r2));
    }
    return rep;
}

GeneratorResidualReport generator_residual(const GroupAction& Phi, const GVectorField& xi,
                                           const std::vector<CompactBox>& Ks,
                                           const std::vector<double>& eta_samples,
                                           const EpsilonGrid& grid,
                                           const NegligibilityPolicy& policy) {
    const double h = Phi.eta_step();
    for (double eta : eta_samples)
        if (!Phi.eta_range().contains(eta - 2 * h) || !Phi.eta_range().contains(eta + 2 * h))
            throw std::invalid_argument("eta sample too close to the validity boundary");

    GeneratorResidualReport rep;
    rep.pass = true;
    const bool ef = Phi.eps_free() && xi.components.eps_free();
    const int dim = xi.dim();
    for (const CompactBox& K : Ks) {
        SupPair p = sup_over_box_cached(
            K, ef, [&Phi, &xi, eta_samples, h, dim](double eps, std::span<const double> x) {
                double res = 0.0, scale = 1.0;
                std::vector<double> f(dim);
                for (double eta : eta_samples) {
                    // 5-point stencil for d/d eta
                    std::vector<double> p2 = Phi.apply(eps, eta + 2 * h, x);
                    std::vector<double> p1 = Phi.apply(eps, eta + h, x);
                    std::vector<double> m1 = Phi.apply(eps, eta - h, x);
                    std::vector<double> m2 = Phi.apply(eps, eta - 2 * h, x);
                    std::vector<double> at = Phi.apply(eps, eta, x);
                    xi.eval(eps, at, f);
                    for (int i = 0; i < dim; ++i) {
                        double d = (-p2[i] + 8.0 * p1[i] - 8.0 * m1[i] + m2[i]) / (12.0 * h);
                        res = std::max(res, std::fabs(d - f[i]));
                        scale = std::max({scale, std::fabs(d), std::fabs(f[i])});
                    }
                }
                return std::make_pair(res, scale);
            });
        NegligibilityResult r = check_negligible(p.abs, &p.scale, grid, policy);
        rep.pass = rep.pass && r.pass;
        rep.per_box.push_back(std::move(r));
    }
    return rep;
}

// ---------------------------------------------------------------------------
// charts
// ---------------------------------------------------------------------------

void GChart::jacobian(double eps, std::span<const double> x, std::vector<double>& J,
                      double fd_step) const {
    const int m = forward.dim();
    J.resize(m * m);
    if (const auto* eb = forward.exprs()) {
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
                J[i * m + j] = evaluate(differentiate(eb->comps[i], j), eps, x);
        return;
    }
    std::vector<double> xp(x.begin(), x.end()), xm(x.begin(), x.end());
    std::vector<double> vp(m), vm(m);
    for (int j = 0; j < m; ++j) {
        xp[j] += fd_step;
        xm[j] -= fd_step;
        forward.eval(eps, xp, vp);
        forward.eval(eps, xm, vm);
        for (int i = 0; i < m; ++i) J[i * m + j] = (vp[i] - vm[i]) / (2.0 * fd_step);
        xp[j] = x[j];
        xm[j] = x[j];
    }
}

ChartCheck verify_chart(const GChart& chart, const EpsilonGrid& grid,
                        const NegligibilityPolicy& policy) {
    ChartCheck out;
    out.pass = true;
    out.c_bounded_forward = true;
    out.c_bounded_inverse = true;

    const bool ef = chart.forward.eps_free() && chart.inverse.eps_free();
    for (const CompactBox& K : chart.roundtrip_boxes) {
        SupPair p = sup_over_box_cached(
            K, ef, [&chart](double eps, std::span<const double> x) {
                std::vector<double> y = chart.forward(eps, x);
                std::vector<double> back = chart.inverse(eps, y);
                double res = 0.0, scale = 1.0;
                for (std::size_t i = 0; i < back.size(); ++i) {
                    res = std::max(res, std::fabs(back[i] - x[i]));
                    scale = std::max({scale, std::fabs(back[i]), std::fabs(x[i])});
                }
                return std::make_pair(res, scale);
            });
        NegligibilityResult r = check_negligible(p.abs, &p.scale, grid, policy);
        out.pass = out.pass && r.pass;
        out.inverse_roundtrip.push_back(std::move(r));
        if (!c_bounded_witness(chart.forward, K, grid)) out.c_bounded_forward = false;
    }
    for (const CompactBox& K : chart.target_roundtrip_boxes) {
        SupPair p = sup_over_box_cached(
            K, ef, [&chart](double eps, std::span<const double> x) {
                std::vector<double> y = chart.inverse(eps, x);
                std::vector<double> back = chart.forward(eps, y);
                double res = 0.0, scale = 1.0;
                for (std::size_t i = 0; i < back.size(); ++i) {
                    res = std::max(res, std::fabs(back[i] - x[i]));
                    scale = std::max({scale, std::fabs(back[i]), std::fabs(x[i])});
                }
                return std::make_pair(res, scale);
            });
        NegligibilityResult r = check_negligible(p.abs, &p.scale, grid, policy);
        out.pass = out.pass && r.pass;
        out.forward_roundtrip.push_back(std::move(r));
        if (!c_bounded_witness(chart.inverse, K, grid)) out.c_bounded_inverse = false;
    }
    out.pass = out.pass && out.c_bounded_forward && out.c_bounded_inverse;
    return out;
}

GVectorField pullback_field(const GChart& psi, const GVectorField& xi) {
    const int m = psi.forward.dim();
    if (xi.dim() != psi.inverse.dim())
        throw std::invalid_argument("pullback_field: field must live on the chart target");

    // symbolic Jacobian entries when the forward map is expression-backed
    auto jac_exprs = std::make_shared<std::vector<Expr>>();
    if (const auto* eb = psi.forward.exprs()) {
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) jac_exprs->push_back(differentiate(eb->comps[i], j));
    }

    GFunc fwd = psi.forward;
    GVectorField field = xi;
    bool ef = fwd.eps_free() && xi.components.eps_free();

    GFunc comps = GFunc::from_proc(
        psi.source, m,
        [fwd, field, jac_exprs, m](double eps, std::span<const double> x, std::span<double> out) {
            std::vector<double> J(m * m);
            if (!jac_exprs->empty()) {
                for (int k = 0; k < m * m; ++k) J[k] = evaluate((*jac_exprs)[k], eps, x);
            } else {
                const double h = 1e-6;
                std::vector<double> xp(x.begin(), x.end()), xm(x.begin(), x.end());
                std::vector<double> vp(m), vm(m);
                for (int j = 0; j < m; ++j) {
                    xp[j] += h;
                    xm[j] -= h;
                    fwd.eval(eps, xp, vp);
                    fwd.eval(eps, xm, vm);
                    for (int i = 0; i < m; ++i) J[i * m + j] = (vp[i] - vm[i]) / (2.0 * h);
                    xp[j] = x[j];
                    xm[j] = x[j];
                }
            }
            std::vector<double> y = fwd(eps, x);
            std::vector<double> b(m);
            field.eval(eps, y, b);
            if (!solve_linear(J, b, m)) {
                std::string loc;
                for (std::size_t i = 0; i < x.size(); ++i)
                    loc += (i ? "," : "") + std::to_string(x[i]);
                throw EvalError("pullback_field: singular Jacobian at eps=" + std::to_string(eps) +
                                ", x=[" + loc + "]");
            }
            for (int i = 0; i < m; ++i) out[i] = b[i];
        },
        ef, "pullback(" + xi.components.label() + ")");
    return GVectorField{std::move(comps)};
}

GroupAction pullback_action(const GChart& psi, const GroupAction& Phi) {
    GFunc fwd = psi.forward;
    GFunc inv = psi.inverse;
    GroupAction base = Phi;
    return GroupAction::from_proc(
        psi.source,
        [fwd, inv, base](double eps, double eta, std::span<const double> x) {
            std::vector<double> y = fwd(eps, x);
            GroupAction::ApplyResult r = base.apply_ex(eps, eta, y);
            GroupAction::ApplyResult out;
            out.escaped = r.escaped;
            out.point = inv(eps, r.point);
            return out;
        },
        Phi.eta_range(), "pullback", Phi.eps_free() && fwd.eps_free() && inv.eps_free(),
        Phi.eta_step());
}

PolarStraighteningResult straighten_polar(const ScalarNet& a,
                                          const std::vector<CompactBox>& r_theta_boxes,
                                          const EpsilonGrid& grid,
                                          const NegligibilityPolicy& policy) {
    gn_invert(a, grid, policy.m_test); // throws NotInvertibleError when a fails

    double max_a = 0.0;
    for (double eps : grid.values()) max_a = std::max(max_a, std::fabs(a(eps)));

    PolarStraighteningResult out;
    Domain source = Domain::box({0.0, 0.0}, {std::numeric_limits<double>::infinity(), 2.0 * M_PI});
    Domain target = Domain::all(2);

    GChart chart;
    chart.tag = "polar";
    chart.source = source;
    chart.target = target;
    if (a.expr()) {
        VarTable vars({"r", "theta"});
        Expr r = Expr::variable(0, "r");
        Expr th = Expr::variable(1, "theta");
        Expr angle = Expr::mul(*a.expr(), th);
        chart.forward =
            GFunc::from_exprs(source, vars, {Expr::mul(r, Expr::cos(angle)), Expr::mul(r, Expr::sin(angle))});
    } else {
        ScalarNet an = a;
        chart.forward = GFunc::from_proc(
            source, 2,
            [an](double eps, std::span<const double> x, std::span<double> outv) {
                double ang = an(eps) * x[1];
                outv[0] = x[0] * std::cos(ang);
                outv[1] = x[0] * std::sin(ang);
            },
            false, "polar forward");
    }
    ScalarNet an = a;
    chart.inverse = GFunc::from_proc(
        target, 2,
        [an](double eps, std::span<const double> x, std::span<double> outv) {
            double av = an(eps);
            if (av == 0.0) throw EvalError("polar chart: angle scale vanished");
            double r = std::hypot(x[0], x[1]);
            double ang = std::atan2(x[1], x[0]);
            if (ang < 0.0) ang += 2.0 * M_PI;
            outv[0] = r;
            outv[1] = ang / av;
        },
        false, "polar inverse");

    // keep round-trip boxes on one injectivity branch: a*theta must stay in (0, 2*pi)
    double theta_cap = 6.0 / std::max(max_a, 1e-12);
    for (const CompactBox& K : r_theta_boxes) {
        CompactBox clipped = K;
        clipped.box.hi[1] = std::min(clipped.box.hi[1], theta_cap);
        if (clipped.box.hi[1] > clipped.box.lo[1]) chart.roundtrip_boxes.push_back(clipped);
    }
    CompactBox quad;
    quad.box = Box{{0.3, 0.3}, {2.0, 2.0}};
    quad.resolution = {17, 17};
    quad.name = "first-quadrant";
    chart.target_roundtrip_boxes.push_back(quad);

    // xi = a (x d_y - y d_x), the scaled rotation generator on the target
    if (a.expr()) {
        VarTable vars({"x", "y"});
        Expr x = Expr::variable(0, "x");
        Expr y = Expr::variable(1, "y");
        out.field = GVectorField{GFunc::from_exprs(
            target, vars, {Expr::neg(Expr::mul(*a.expr(), y)), Expr::mul(*a.expr(), x)})};
    } else {
        out.field = GVectorField{GFunc::from_proc(
            target, 2,
            [an](double eps, std::span<const double> x, std::span<double> outv) {
                double av = an(eps);
                outv[0] = -av * x[1];
                outv[1] = av * x[0];
            },
            false, "a*(x d_y - y d_x)")};
    }

    out.pulled_back = pullback_field(chart, out.field);
    out.chart = chart;

    out.pass = true;
    for (const CompactBox& K : r_theta_boxes) {
        GVectorField pb = out.pulled_back;
        SupPair p = sup_over_box(K, [pb](double eps, std::span<const double> x) {
            std::vector<double> v(2);
            pb.eval(eps, x, v);
            double res = std::max(std::fabs(v[0]), std::fabs(v[1] - 1.0));
            double scale = std::max({1.0, std::fabs(v[0]), std::fabs(v[1])});
            return std::make_pair(res, scale);
        });
        NegligibilityResult r = check_negligible(p.abs, &p.scale, grid, policy);
        out.pass = out.pass && r.pass;
        out.residual_vs_dtheta.push_back(std::move(r));
    }
    return out;
}

CompletenessReport completeness_diagnostics(const GVectorField& xi,
                                            const std::vector<CompactBox>& Ks,
                                            const EpsilonGrid& grid) {
    if (Ks.empty()) throw std::invalid_argument("completeness_diagnostics: empty box list");
    ScalarNet sup0 = sup_seminorm(xi.components, Ks[0], 0, grid);
    ScalarNet sup1 = sup_seminorm(xi.components, Ks[0], 1, grid);
    for (std::size_t i = 1; i < Ks.size(); ++i) {
        sup0 = net_max(sup0, sup_seminorm(xi.components, Ks[i], 0, grid));
        sup1 = net_max(sup1, sup_seminorm(xi.components, Ks[i], 1, grid));
    }

    CompletenessReport rep;
    rep.field_sup = classify_order(sup0, grid);
    rep.globally_bounded = rep.field_sup.bounded();
    for (double eps : grid.values()) rep.bound_constant = std::max(rep.bound_constant, sup0(eps));

    ScalarNet ratio = ScalarNet::from_function(
        [sup1](double eps) { return sup1(eps) / std::max(1.0, std::fabs(std::log(eps))); },
        "sup|Dxi|/|log eps|");
    rep.dfield_log_ratio = classify_order(ratio, grid);
    rep.derivative_log_type = rep.dfield_log_ratio.bounded();
    for (double eps : grid.values()) rep.log_constant = std::max(rep.log_constant, ratio(eps));

    rep.sufficient_conditions = rep.globally_bounded && rep.derivative_log_type;
    return rep;
}

} // namespace colombeau
