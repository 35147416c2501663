#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "colombeau/expr.hpp"
#include "colombeau/geometry.hpp"
#include "colombeau/net.hpp"

namespace colombeau {

/// Generalized function on an open box: a net eps -> smooth map, backed by
/// expressions (possibly piecewise in eps) or by an arbitrary procedure such
/// as an integrated flow.
class GFunc {
public:
    struct ExprBacking {
        VarTable vars;
        std::vector<Expr> comps;
    };
    struct PiecewiseBacking {
        EpsPredicate pred;
        ExprBacking if_true, if_false;
    };
    struct ProcBacking {
        std::function<void(double eps, std::span<const double> x, std::span<double> out)> fn;
        bool eps_free = false;
        std::string label;
    };

    static GFunc from_exprs(Domain domain, VarTable vars, std::vector<Expr> comps);
    static GFunc from_strings(Domain domain, std::vector<std::string> var_names,
                              std::vector<std::string> exprs);
    static GFunc piecewise(Domain domain, EpsPredicate pred, GFunc if_true, GFunc if_false);
    static GFunc from_proc(Domain domain, int target_dim,
                           std::function<void(double, std::span<const double>, std::span<double>)> fn,
                           bool eps_free = false, std::string label = "");
    static GFunc identity(Domain domain);
    static GFunc constant(Domain domain, std::vector<double> values);

    int dim() const { return domain_.dim(); }
    int target_dim() const { return target_dim_; }
    const Domain& domain() const { return domain_; }
    bool symbolic() const;
    bool eps_free() const;
    const ExprBacking* exprs() const; // null unless plain expression-backed
    std::string label() const;

    void eval(double eps, std::span<const double> x, std::span<double> out) const;
    std::vector<double> operator()(double eps, std::span<const double> x) const;
    double eval_scalar(double eps, std::span<const double> x) const; // target_dim == 1

    /// Componentwise partial derivative. Exact for expression backings;
    /// central differences (given step) otherwise.
    GFunc partial(int axis, double fd_step = 1e-5) const;
    GFunc component(int i) const;

private:
    Domain domain_;
    int target_dim_ = 0;
    std::variant<ExprBacking, PiecewiseBacking, ProcBacking> backing_;
};

GFunc g_sub(const GFunc& u, const GFunc& v);

/// max over the sample set of K of the max-norm of all order-`deriv_order`
/// partial derivatives, as a net in eps.
ScalarNet sup_seminorm(const GFunc& u, const CompactBox& K, int deriv_order,
                       const EpsilonGrid& grid);

/// Paired nets produced by one sweep over a sample set: the quantity being
/// tested and the magnitude of the operands it was computed from (used by the
/// relative rounding floor).
struct SupPair {
    ScalarNet abs;
    ScalarNet scale;
};

/// Generic residual sweep: fn(eps, x) returns (residual, operand_scale); both
/// are maximized over the samples of K (lattice + eps patch).
SupPair sup_over_box(const CompactBox& K,
                     std::function<std::pair<double, double>(double, std::span<const double>)> fn);

struct BoxVerdicts {
    bool pass = false;
    std::vector<NegligibilityResult> per_box;
};

/// Order-0 negligibility on every box (sufficient by the 0th-derivative
/// characterization of the null ideal).
BoxVerdicts is_negligible_on(const GFunc& u, const std::vector<CompactBox>& Ks,
                             const EpsilonGrid& grid, const NegligibilityPolicy& policy = {});

/// u == v in the quotient, decided on the declared box list.
BoxVerdicts equals_in_G(const GFunc& u, const GFunc& v, const std::vector<CompactBox>& Ks,
                        const EpsilonGrid& grid, const NegligibilityPolicy& policy = {});

/// Smallest padded box containing u_eps(K samples) across the grid, or none
/// if the image boxes grow unboundedly along the grid tail.
std::optional<Box> c_bounded_witness(const GFunc& u, const CompactBox& K, const EpsilonGrid& grid);

/// v after u. Requires a c-bounded witness of u on each box of interest, each
/// witness lying inside the domain of v; otherwise throws CBoundednessError.
GFunc compose(const GFunc& v, const GFunc& u, const std::vector<CompactBox>& Ks,
              const EpsilonGrid& grid);

/// Net(s) eps -> u(eps, x(eps)). The point's containment box must sit inside
/// the domain.
std::vector<ScalarNet> value_at(const GFunc& u, const GPoint& x);

} // namespace colombeau
