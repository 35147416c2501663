#include "colombeau/gfunc.hpp"

#include <algorithm>
#include <cmath>

namespace colombeau {

GFunc GFunc::from_exprs(Domain domain, VarTable vars, std::vector<Expr> comps) {
    if (vars.size() != domain.dim())
        throw std::invalid_argument("variable table does not match domain dimension");
    GFunc g;
    g.domain_ = std::move(domain);
    g.target_dim_ = static_cast<int>(comps.size());
    g.backing_ = ExprBacking{std::move(vars), std::move(comps)};
    return g;
}

GFunc GFunc::from_strings(Domain domain, std::vector<std::string> var_names,
                          std::vector<std::string> exprs) {
    VarTable vars(std::move(var_names));
    std::vector<Expr> comps;
    comps.reserve(exprs.size());
    for (const std::string& s : exprs) comps.push_back(parse(s, vars));
    return from_exprs(std::move(domain), std::move(vars), std::move(comps));
}

GFunc GFunc::piecewise(Domain domain, EpsPredicate pred, GFunc if_true, GFunc if_false) {
    const ExprBacking* t = if_true.exprs();
    const ExprBacking* f = if_false.exprs();
    if (!t || !f)
        throw std::invalid_argument("piecewise GFunc requires expression-backed branches");
    if (if_true.target_dim() != if_false.target_dim())
        throw std::invalid_argument("piecewise GFunc branch target dimensions differ");
    GFunc g;
    g.domain_ = std::move(domain);
    g.target_dim_ = if_true.target_dim();
    g.backing_ = PiecewiseBacking{std::move(pred), *t, *f};
    return g;
}

GFunc GFunc::from_proc(Domain domain, int target_dim,
                       std::function<void(double, std::span<const double>, std::span<double>)> fn,
                       bool eps_free, std::string label) {
    GFunc g;
    g.domain_ = std::move(domain);
    g.target_dim_ = target_dim;
    g.backing_ = ProcBacking{std::move(fn), eps_free, std::move(label)};
    return g;
}

GFunc GFunc::identity(Domain domain) {
    int d = domain.dim();
    std::vector<std::string> names;
    for (int i = 0; i < d; ++i) names.push_back("x" + std::to_string(i + 1));
    VarTable vars(names);
    std::vector<Expr> comps;
    for (int i = 0; i < d; ++i) comps.push_back(Expr::variable(i, names[i]));
    return from_exprs(std::move(domain), std::move(vars), std::move(comps));
}

GFunc GFunc::constant(Domain domain, std::vector<double> values) {
    int d = domain.dim();
    std::vector<std::string> names;
    for (int i = 0; i < d; ++i) names.push_back("x" + std::to_string(i + 1));
    std::vector<Expr> comps;
    for (double v : values) comps.push_back(Expr::constant(v));
    return from_exprs(std::move(domain), VarTable(names), std::move(comps));
}

bool GFunc::symbolic() const { return !std::holds_alternative<ProcBacking>(backing_); }

bool GFunc::eps_free() const {
    if (const auto* e = std::get_if<ExprBacking>(&backing_)) {
        for (const Expr& c : e->comps)
            if (references_eps(c)) return false;
        return true;
    }
    if (const auto* p = std::get_if<ProcBacking>(&backing_)) return p->eps_free;
    return false;
}

const GFunc::ExprBacking* GFunc::exprs() const { return std::get_if<ExprBacking>(&backing_); }

std::string GFunc::label() const {
    if (const auto* e = std::get_if<ExprBacking>(&backing_)) {
        std::string s;
        for (std::size_t i = 0; i < e->comps.size(); ++i) {
            if (i) s += ", ";
            s += print(e->comps[i]);
        }
        return s;
    }
    if (const auto* p = std::get_if<PiecewiseBacking>(&backing_))
        return "piecewise(" + p->pred.name + ")";
    return std::get<ProcBacking>(backing_).label;
}

void GFunc::eval(double eps, std::span<const double> x, std::span<double> out) const {
    if (const auto* e = std::get_if<ExprBacking>(&backing_)) {
        for (int i = 0; i < target_dim_; ++i) out[i] = evaluate(e->comps[i], eps, x);
        return;
    }
    if (const auto* p = std::get_if<PiecewiseBacking>(&backing_)) {
        const ExprBacking& branch = p->pred.contains(eps) ? p->if_true : p->if_false;
        for (int i = 0; i < target_dim_; ++i) out[i] = evaluate(branch.comps[i], eps, x);
        return;
    }
    std::get<ProcBacking>(backing_).fn(eps, x, out);
}

std::vector<double> GFunc::operator()(double eps, std::span<const double> x) const {
    std::vector<double> out(target_dim_);
    eval(eps, x, out);
    return out;
}

double GFunc::eval_scalar(double eps, std::span<const double> x) const {
    double out;
    eval(eps, x, {&out, 1});
    return out;
}

GFunc GFunc::partial(int axis, double fd_step) const {
    if (axis < 0 || axis >= dim()) throw std::invalid_argument("partial: axis out of range");
    if (const auto* e = std::get_if<ExprBacking>(&backing_)) {
        std::vector<Expr> d;
        d.reserve(e->comps.size());
        for (const Expr& c : e->comps) d.push_back(differentiate(c, axis));
        return from_exprs(domain_, e->vars, std::move(d));
    }
    if (const auto* p = std::get_if<PiecewiseBacking>(&backing_)) {
        GFunc t = from_exprs(domain_, p->if_true.vars, p->if_true.comps).partial(axis);
        GFunc f = from_exprs(domain_, p->if_false.vars, p->if_false.comps).partial(axis);
        return piecewise(domain_, p->pred, std::move(t), std::move(f));
    }
    GFunc self = *this;
    double h = fd_step;
    return from_proc(
        domain_, target_dim_,
        [self, axis, h](double eps, std::span<const double> x, std::span<double> out) {
            std::vector<double> xp(x.begin(), x.end()), xm(x.begin(), x.end());
            xp[axis] += h;
            xm[axis] -= h;
            std::vector<double> vp(self.target_dim()), vm(self.target_dim());
            self.eval(eps, xp, vp);
            self.eval(eps, xm, vm);
            for (int i = 0; i < self.target_dim(); ++i) out[i] = (vp[i] - vm[i]) / (2.0 * h);
        },
        eps_free(), "d/dx" + std::to_string(axis + 1) + "(" + label() + ")");
}

GFunc GFunc::component(int i) const {
    if (i < 0 || i >= target_dim_) throw std::invalid_argument("component out of range");
    if (const auto* e = std::get_if<ExprBacking>(&backing_))
        return from_exprs(domain_, e->vars, {e->comps[i]});
    if (const auto* p = std::get_if<PiecewiseBacking>(&backing_)) {
        GFunc t = from_exprs(domain_, p->if_true.vars, {p->if_true.comps[i]});
        GFunc f = from_exprs(domain_, p->if_false.vars, {p->if_false.comps[i]});
        return piecewise(domain_, p->pred, std::move(t), std::move(f));
    }
    GFunc self = *this;
    return from_proc(
        domain_, 1,
        [self, i](double eps, std::span<const double> x, std::span<double> out) {
            std::vector<double> v(self.target_dim());
            self.eval(eps, x, v);
            out[0] = v[i];
        },
        eps_free(), label() + "[" + std::to_string(i) + "]");
}

GFunc g_sub(const GFunc& u, const GFunc& v) {
    if (u.dim() != v.dim() || u.target_dim() != v.target_dim())
        throw std::invalid_argument("g_sub: shape mismatch");
    const auto* eu = u.exprs();
    const auto* ev = v.exprs();
    if (eu && ev && eu->vars.names() == ev->vars.names()) {
        std::vector<Expr> comps;
        for (int i = 0; i < u.target_dim(); ++i)
            comps.push_back(Expr::sub(eu->comps[i], ev->comps[i]));
        return GFunc::from_exprs(u.domain(), eu->vars, std::move(comps));
    }
    return GFunc::from_proc(
        u.domain(), u.target_dim(),
        [u, v](double eps, std::span<const double> x, std::span<double> out) {
            std::vector<double> a(u.target_dim()), b(v.target_dim());
            u.eval(eps, x, a);
            v.eval(eps, x, b);
            for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
        },
        u.eps_free() && v.eps_free(), "(" + u.label() + ")-(" + v.label() + ")");
}

namespace {

void multi_indices_of_order(int dim, int order, std::vector<std::vector<int>>& out) {
    std::vector<int> idx(dim, 0);
    std::function<void(int, int)> rec = [&](int axis, int remaining) {
        if (axis == dim - 1) {
            idx[axis] = remaining;
            out.push_back(idx);
            return;
        }
        for (int k = 0; k <= remaining; ++k) {
            idx[axis] = k;
            rec(axis + 1, remaining - k);
        }
    };
    if (dim == 0) return;
    rec(0, order);
}

std::vector<Expr> symbolic_derivatives(const std::vector<Expr>& comps, int dim, int order) {
    std::vector<std::vector<int>> mis;
    multi_indices_of_order(dim, order, mis);
    std::vector<Expr> out;
    for (const auto& mi : mis) {
        for (const Expr& c : comps) {
            Expr d = c;
            for (int axis = 0; axis < dim; ++axis)
                for (int r = 0; r < mi[axis]; ++r) d = differentiate(d, axis);
            out.push_back(std::move(d));
        }
    }
    return out;
}

// nested central differences for one multi-index (procedure-backed functions)
double fd_partial(const GFunc& u, int comp, double eps, std::vector<double>& x,
                  const std::vector<int>& mi, int axis, double h) {
    while (axis < static_cast<int>(mi.size()) && mi[axis] == 0) ++axis;
    if (axis == static_cast<int>(mi.size())) {
        std::vector<double> v(u.target_dim());
        u.eval(eps, x, v);
        return v[comp];
    }
    std::vector<int> rest = mi;
    rest[axis] -= 1;
    x[axis] += h;
    double vp = fd_partial(u, comp, eps, x, rest, axis, h);
    x[axis] -= 2 * h;
    double vm = fd_partial(u, comp, eps, x, rest, axis, h);
    x[axis] += h;
    return (vp - vm) / (2.0 * h);
}

} // namespace

ScalarNet sup_seminorm(const GFunc& u, const CompactBox& K, int deriv_order,
                       const EpsilonGrid& grid) {
    (void)grid;
    if (deriv_order < 0) throw std::invalid_argument("sup_seminorm: negative derivative order");
    if (K.dim() != u.dim()) throw std::invalid_argument("sup_seminorm: box dimension mismatch");

    const int dim = u.dim();
    std::vector<std::vector<int>> mis;
    multi_indices_of_order(dim, deriv_order, mis);

    // symbolic backings (plain or piecewise) get their derivative functions
    // built once up front
    auto derivs = std::make_shared<std::vector<GFunc>>();
    if (u.symbolic()) {
        for (const auto& mi : mis) {
            GFunc d = u;
            for (int axis = 0; axis < dim; ++axis)
                for (int r = 0; r < mi[axis]; ++r) d = d.partial(axis);
            derivs->push_back(std::move(d));
        }
    }

    GFunc fn = u;
    CompactBox box = K;
    double h = std::max(1e-5, K.min_spacing() / 8.0);

    return ScalarNet::from_function(
        [fn, box, derivs, h, mis, deriv_order](double eps) {
            double best = 0.0;
            std::vector<double> v(fn.target_dim());
            box.for_each_sample(eps, [&](std::span<const double> x) {
                try {
                    if (fn.symbolic()) {
                        for (const GFunc& d : *derivs) {
                            d.eval(eps, x, v);
                            for (double val : v) best = std::max(best, std::fabs(val));
                        }
                    } else if (deriv_order == 0) {
                        fn.eval(eps, x, v);
                        for (double val : v) best = std::max(best, std::fabs(val));
                    } else {
                        std::vector<double> xs(x.begin(), x.end());
                        for (const auto& mi : mis)
                            for (int c = 0; c < fn.target_dim(); ++c)
                                best = std::max(best,
                                                std::fabs(fd_partial(fn, c, eps, xs, mi, 0, h)));
                    }
                } catch (const EvalError& err) {
                    std::string where = "(eps=" + std::to_string(eps) + ", x=[";
                    for (std::size_t i = 0; i < x.size(); ++i)
                        where += (i ? "," : "") + std::to_string(x[i]);
                    throw EvalError(std::string(err.what()) + " at " + where + "])");
                }
            });
            return best;
        },
        "sup|D^" + std::to_string(deriv_order) + " " + u.label() + "| on " + K.name);
}

SupPair sup_over_box(const CompactBox& K,
                     std::function<std::pair<double, double>(double, std::span<const double>)> fn) {
    // one evaluator shared by both nets; per-eps memo keeps the double sweep cheap
    auto memo = std::make_shared<std::vector<std::pair<double, std::pair<double, double>>>>();
    auto compute = [K, fn, memo](double eps) {
        for (const auto& entry : *memo)
            if (entry.first == eps) return entry.second;
        double best_abs = 0.0, best_scale = 0.0;
        K.for_each_sample(eps, [&](std::span<const double> x) {
            auto [a, s] = fn(eps, x);
            best_abs = std::max(best_abs, std::fabs(a));
            best_scale = std::max(best_scale, std::fabs(s));
        });
        if (memo->size() > 256) memo->clear();
        memo->push_back({eps, {best_abs, best_scale}});
        return std::make_pair(best_abs, best_scale);
    };
    SupPair p;
    p.abs = ScalarNet::from_function([compute](double eps) { return compute(eps).first; }, "residual sup");
    p.scale =
        ScalarNet::from_function([compute](double eps) { return compute(eps).second; }, "operand scale");
    return p;
}

BoxVerdicts is_negligible_on(const GFunc& u, const std::vector<CompactBox>& Ks,
                             const EpsilonGrid& grid, const NegligibilityPolicy& policy) {
    if (Ks.empty()) throw std::invalid_argument("is_negligible_on: empty box list");
    BoxVerdicts out;
    out.pass = true;
    for (const CompactBox& K : Ks) {
        ScalarNet s = sup_seminorm(u, K, 0, grid);
        NegligibilityResult r = check_negligible(s, nullptr, grid, policy);
        out.pass = out.pass && r.pass;
        out.per_box.push_back(std::move(r));
    }
    return out;
}

BoxVerdicts equals_in_G(const GFunc& u, const GFunc& v, const std::vector<CompactBox>& Ks,
                        const EpsilonGrid& grid, const NegligibilityPolicy& policy) {
    if (u.dim() != v.dim() || u.target_dim() != v.target_dim())
        throw std::invalid_argument("equals_in_G: shape mismatch");
    BoxVerdicts out;
    out.pass = true;
    for (const CompactBox& K : Ks) {
        SupPair p = sup_over_box(K, [u, v](double eps, std::span<const double> x) {
            std::vector<double> a(u.target_dim()), b(v.target_dim());
            u.eval(eps, x, a);
            v.eval(eps, x, b);
            double res = 0.0, scale = 1.0;
            for (std::size_t i = 0; i < a.size(); ++i) {
                res = std::max(res, std::fabs(a[i] - b[i]));
                scale = std::max({scale, std::fabs(a[i]), std::fabs(b[i])});
            }
            return std::make_pair(res, scale);
        });
        NegligibilityResult r = check_negligible(p.abs, &p.scale, grid, policy);
        out.pass = out.pass && r.pass;
        out.per_box.push_back(std::move(r));
    }
    return out;
}

std::optional<Box> c_bounded_witness(const GFunc& u, const CompactBox& K, const EpsilonGrid& grid) {
    std::vector<double> eps_values = grid.values();
    std::vector<double> radius(eps_values.size(), 0.0);
    Box unionbox;
    unionbox.lo.assign(u.target_dim(), std::numeric_limits<double>::infinity());
    unionbox.hi.assign(u.target_dim(), -std::numeric_limits<double>::infinity());
    bool finite = true;

    for (std::size_t k = 0; k < eps_values.size(); ++k) {
        double eps = eps_values[k];
        double r = 0.0;
        K.for_each_sample(eps, [&](std::span<const double> x) {
            std::vector<double> v(u.target_dim());
            u.eval(eps, x, v);
            for (int i = 0; i < u.target_dim(); ++i) {
                if (!std::isfinite(v[i])) {
                    finite = false;
                    continue;
                }
                unionbox.lo[i] = std::min(unionbox.lo[i], v[i]);
                unionbox.hi[i] = std::max(unionbox.hi[i], v[i]);
                r = std::max(r, std::fabs(v[i]));
            }
        });
        radius[k] = r;
    }
    if (!finite) return std::nullopt;

    // diverging images: radius weakly increasing along the tail and large
    // compared to the head
    std::size_t mid = radius.size() / 2;
    bool increasing = true;
    for (std::size_t k = mid; k + 1 < radius.size(); ++k)
        if (radius[k + 1] < radius[k] * (1.0 - 1e-9) - 1e-12) increasing = false;
    double head = std::max(radius[0], 1e-6);
    if (increasing && radius.back() > 8.0 * std::max(head, 1.0)) return std::nullopt;

    for (int i = 0; i < u.target_dim(); ++i) {
        double span = unionbox.hi[i] - unionbox.lo[i];
        double pad = std::max(0.05 * span, 1e-6);
        unionbox.lo[i] -= pad;
        unionbox.hi[i] += pad;
    }
    return unionbox;
}

GFunc compose(const GFunc& v, const GFunc& u, const std::vector<CompactBox>& Ks,
              const EpsilonGrid& grid) {
    if (u.target_dim() != v.dim())
        throw std::invalid_argument("compose: inner target dimension does not match outer domain");
    for (const CompactBox& K : Ks) {
        std::optional<Box> w = c_bounded_witness(u, K, grid);
        if (!w)
            throw CBoundednessError("compose: inner function has no c-bounded witness on box '" +
                                    K.name + "'");
        if (!v.domain().contains_box(*w))
            throw CBoundednessError("compose: witness box on '" + K.name +
                                    "' is not contained in the outer domain");
    }
    return GFunc::from_proc(
        u.domain(), v.target_dim(),
        [u, v](double eps, std::span<const double> x, std::span<double> out) {
            std::vector<double> mid(u.target_dim());
            u.eval(eps, x, mid);
            v.eval(eps, mid, out);
        },
        u.eps_free() && v.eps_free(), "(" + v.label() + ")∘(" + u.label() + ")");
}

std::vector<ScalarNet> value_at(const GFunc& u, const GPoint& x) {
    if (x.dim() != u.dim()) throw std::invalid_argument("value_at: dimension mismatch");
    if (!u.domain().contains_box(x.support))
        throw std::invalid_argument("value_at: containment box of '" + x.name +
                                    "' exits the domain");
    std::vector<ScalarNet> out;
    for (int i = 0; i < u.target_dim(); ++i) {
        out.push_back(ScalarNet::from_function(
            [u, x, i](double eps) {
                std::vector<double> p = x.at(eps);
                std::vector<double> v(u.target_dim());
                u.eval(eps, p, v);
                return v[i];
            },
            u.label() + "(" + x.name + ")[" + std::to_string(i) + "]"));
    }
    return out;
}

} // namespace colombeau
