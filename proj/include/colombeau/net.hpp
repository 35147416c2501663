#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "colombeau/errors.hpp"
#include "colombeau/expr.hpp"
#include "colombeau/geometry.hpp"

namespace colombeau {

/// Geometric sample grid eps_k = q^k, k_min <= k <= k_max, all in (0,1].
struct EpsilonGrid {
    double q = 0.5;
    int k_min = 1;
    int k_max = 20;

    std::vector<double> values() const;
    std::vector<double> tail_half() const; // second half (smaller eps)
    int size() const { return k_max - k_min + 1; }
    EpsilonGrid extended(int extra_k) const { return {q, k_min, k_max + extra_k}; }
    void validate() const;
};

/// Decidable per-eps predicate used by piecewise nets.
struct EpsPredicate {
    std::string name;
    std::function<bool(double)> contains;

    /// J = union over n>=1 of (1/(2n+1), 1/(2n)]: eps whose reciprocal has an
    /// even integer part. This is the oscillation set of the localization
    /// counterexample.
    static EpsPredicate even_reciprocal_floor();
    /// Finite union of half-open intervals (lo, hi].
    static EpsPredicate interval_union(std::vector<Interval> intervals);
};

/// Net eps -> real, total on (0,1]. Keeps an Expr backing when available so
/// downstream constructions (charts, rotations) can stay symbolic.
class ScalarNet {
public:
    ScalarNet(); // identically zero
    static ScalarNet constant(double c);
    static ScalarNet from_function(std::function<double(double)> f, std::string label = "");
    static ScalarNet from_expr(Expr e); // over eps only; must not reference variables
    static ScalarNet from_string(const std::string& text); // parsed with empty table
    static ScalarNet piecewise(EpsPredicate pred, ScalarNet if_true, ScalarNet if_false);

    double operator()(double eps) const { return fn_(eps); }
    const std::optional<Expr>& expr() const { return expr_; }
    const std::string& label() const { return label_; }

    friend ScalarNet gn_add(const ScalarNet& a, const ScalarNet& b);
    friend ScalarNet gn_sub(const ScalarNet& a, const ScalarNet& b);
    friend ScalarNet gn_mul(const ScalarNet& a, const ScalarNet& b);
    friend ScalarNet gn_abs(const ScalarNet& a);

private:
    std::function<double(double)> fn_;
    std::optional<Expr> expr_;
    std::string label_;
};

enum class AsympClass { Negligible, Moderate, NotModerate };

std::string to_string(AsympClass c);

/// Verdict of the log-log tail fit. `p` is the least integer (up to the slope
/// snap tolerance) with |n(eps)| = O(eps^{-p}); decaying nets get negative p.
struct AsymptoticVerdict {
    AsympClass cls = AsympClass::NotModerate;
    int p = 0;
    double slope = 0.0;
    double fit_residual = 0.0;
    EpsilonGrid grid;
    int m_test = 5;
    int p_max = 40;
    std::string note;

    bool negligible() const { return cls == AsympClass::Negligible; }
    /// Bounded as eps -> 0 in the fitted sense (O(1) or better).
    bool bounded() const {
        return cls == AsympClass::Negligible || (cls == AsympClass::Moderate && p <= 0);
    }
};

/// Least-squares slope of log|n| vs log eps over the tail half of the grid.
/// Zero samples count as "beats every slope" (all-zero tail is Negligible
/// outright); non-finite samples force NotModerate.
AsymptoticVerdict classify_order(const ScalarNet& n, const EpsilonGrid& grid, int m_test = 5,
                                 int p_max = 40);

/// Multiplicative inverse of a generalized number. Throws NotInvertibleError
/// unless `a` passes the strictly-nonzero test (1/|a| classified moderate on
/// the grid).
ScalarNet gn_invert(const ScalarNet& a, const EpsilonGrid& grid, int m_test = 5);

/// Compactly supported generalized point: one coordinate net per axis plus a
/// compact containment box.
struct GPoint {
    std::vector<ScalarNet> coords;
    Box support;
    std::string name;

    int dim() const { return static_cast<int>(coords.size()); }
    std::vector<double> at(double eps) const;
    static GPoint constant(std::vector<double> x, double pad = 0.5, std::string name = "");
    /// Throws if any grid sample exits the declared box.
    void validate_containment(const EpsilonGrid& grid) const;
};

struct NearStandardResult {
    bool near_standard = false;
    std::vector<double> limit;
    double max_remainder = 0.0; // estimated distance from last sample to limit
    std::string reason;         // populated when not near-standard
};

/// Cauchy-type tail test with geometric extrapolation of the limit. Accepts
/// when tail increments shrink consistently and the predicted remainder is
/// below tol; the oscillating counterexample net is rejected because its
/// increments do not decay.
NearStandardResult near_standard(const GPoint& x, const EpsilonGrid& grid, double tol = 1e-6);

/// True iff the Euclidean distance net classifies as Negligible.
bool points_equivalent(const GPoint& x, const GPoint& y, const EpsilonGrid& grid, int m_test = 5);

/// Verdict policy for negligibility-style residual checks. The absolute floor
/// covers integrator-limited objects (flow outputs cannot certify decay below
/// their own error); the relative floor covers rounding noise of large
/// representatives, measured against the operand scale net.
struct NegligibilityPolicy {
    int m_test = 5;
    int p_max = 40;
    double abs_floor = 0.0;
    double rel_floor = 1e-12;
};

struct NegligibilityResult {
    AsymptoticVerdict verdict;
    double max_abs = 0.0;
    double max_rel = 0.0;
    bool pass = false;
    std::string branch; // "classifier" | "abs-floor" | "rel-floor" | "" on fail
};

/// Pass iff classified Negligible, or the residual never exceeds the absolute
/// floor, or (when a scale net is supplied) never exceeds rel_floor relative
/// to the operand scale.
NegligibilityResult check_negligible(const ScalarNet& abs_net, const ScalarNet* scale_net,
                                     const EpsilonGrid& grid, const NegligibilityPolicy& policy);

} // namespace colombeau
