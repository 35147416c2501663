#pragma once

#include <memory>
#include <mutex>

#include "colombeau/chart.hpp"
#include "colombeau/gfunc.hpp"

namespace colombeau {

/// Generalized vector field: component GFuncs sharing one domain.
struct GVectorField {
    GFunc components; // target_dim == domain dim

    int dim() const { return components.dim(); }
    const Domain& domain() const { return components.domain(); }
    void eval(double eps, std::span<const double> x, std::span<double> out) const {
        components.eval(eps, x, out);
    }
    static GVectorField from_strings(Domain domain, std::vector<std::string> vars,
                                     std::vector<std::string> comps);
    static GVectorField from_gfunc(GFunc g);
};

struct FlowConfig {
    int steps_per_unit = 256; // classic RK4, fixed step
    Box escape_box;           // compact budget; exits are logged
    EpsilonGrid grid;
};

struct EscapeEvent {
    double eps = 0;
    double eta = 0;
    std::vector<double> start;
    std::vector<double> exit_point;
};

struct FlowLog {
    long long trajectories = 0;
    long long steps = 0;
    long long escape_count = 0;
    std::vector<EscapeEvent> escapes; // first few, for the report
};

/// Group action Phi(eta, .) per eps: either integrated from a field (identity
/// at eta = 0 holds exactly) or closed-form.
class GroupAction {
public:
    struct ApplyResult {
        std::vector<double> point;
        bool escaped = false;
    };

    ApplyResult apply_ex(double eps, double eta, std::span<const double> x) const;
    std::vector<double> apply(double eps, double eta, std::span<const double> x) const {
        return apply_ex(eps, eta, x).point;
    }

    const Domain& domain() const { return domain_; }
    Interval eta_range() const { return eta_range_; }
    bool eps_free() const { return eps_free_; }
    const std::string& provenance() const { return provenance_; }
    std::shared_ptr<const FlowLog> log() const { return log_; }
    /// step used for eta-derivatives of this action
    double eta_step() const { return eta_step_; }

    /// Closed-form action from expressions over (eta, x_1..x_m) and eps.
    static GroupAction closed_form(Domain domain, std::vector<std::string> var_names,
                                   std::vector<std::string> exprs, Interval eta_range);
    static GroupAction from_proc(
        Domain domain,
        std::function<ApplyResult(double eps, double eta, std::span<const double> x)> proc,
        Interval eta_range, std::string provenance, bool eps_free, double eta_step);

private:
    Domain domain_;
    std::function<ApplyResult(double, double, std::span<const double>)> proc_;
    Interval eta_range_{-1.0, 1.0};
    std::string provenance_;
    bool eps_free_ = false;
    double eta_step_ = 1e-3;
    std::shared_ptr<FlowLog> log_;
    friend GroupAction integrate_flow(const GVectorField&, const FlowConfig&, Interval);
};

/// Per-eps numerical flow of the field: d Phi/d eta = xi_eps(Phi), Phi(0,x)=x.
/// Trajectories that exit the escape box are logged (completeness failure
/// signal); integration continues while the field stays evaluable.
GroupAction integrate_flow(const GVectorField& xi, const FlowConfig& cfg, Interval eta_range);

struct GroupActionReport {
    std::vector<NegligibilityResult> identity_per_box;
    std::vector<NegligibilityResult> additivity_per_box;
    std::vector<std::pair<double, double>> eta_pairs;
    bool pass = false;
};

/// Check Phi(0,.) = id and Phi(eta1+eta2,.) = Phi(eta1, Phi(eta2,.)) as
/// negligible residuals over the boxes and sampled eta pairs.
GroupActionReport verify_group_action(const GroupAction& Phi, const std::vector<CompactBox>& Ks,
                                      const std::vector<double>& eta_samples,
                                      const EpsilonGrid& grid, const NegligibilityPolicy& policy);

struct GeneratorResidualReport {
    std::vector<NegligibilityResult> per_box;
    bool pass = false;
};

/// Residual d Phi/d eta - xi o Phi (eta derivative by a 5-point stencil).
GeneratorResidualReport generator_residual(const GroupAction& Phi, const GVectorField& xi,
                                           const std::vector<CompactBox>& Ks,
                                           const std::vector<double>& eta_samples,
                                           const EpsilonGrid& grid,
                                           const NegligibilityPolicy& policy);

/// psi* xi = (D psi)^{-1} (xi o psi), per eps; throws EvalError at a sample
/// where the Jacobian is singular.
GVectorField pullback_field(const GChart& psi, const GVectorField& xi);

/// psi* Phi(eta, x) = psi^{-1}(Phi(eta, psi(x))).
GroupAction pullback_action(const GChart& psi, const GroupAction& Phi);

struct PolarStraighteningResult {
    GChart chart;                  // psi_eps(r, th) = (r cos(a_eps th), r sin(a_eps th))
    GVectorField field;            // xi = a (x d_y - y d_x), the scaled rotation generator
    GVectorField pulled_back;      // psi* xi
    std::vector<NegligibilityResult> residual_vs_dtheta; // against the constant field (0,1)
    bool pass = false;
};

/// Straightening of the scaled rotation field along the generalized polar
/// chart; requires a strictly nonzero (throws NotInvertibleError otherwise).
/// Round-trip validation restricts declared theta-boxes to one injectivity
/// branch of the chart.
PolarStraighteningResult straighten_polar(const ScalarNet& a,
                                          const std::vector<CompactBox>& r_theta_boxes,
                                          const EpsilonGrid& grid,
                                          const NegligibilityPolicy& policy);

struct CompletenessReport {
    AsymptoticVerdict field_sup;   // sup ||xi_eps|| on the boxes
    bool globally_bounded = false; // O(1) proxy
    double bound_constant = 0.0;
    AsymptoticVerdict dfield_log_ratio; // sup ||D xi_eps|| / |log eps|
    bool derivative_log_type = false;
    double log_constant = 0.0;
    bool sufficient_conditions = false; // both branches of the completeness remark
};

/// Numerical check of the sufficient completeness conditions: global bound on
/// the field and log-type bound on its first derivatives.
CompletenessReport completeness_diagnostics(const GVectorField& xi,
                                            const std::vector<CompactBox>& Ks,
                                            const EpsilonGrid& grid);

} // namespace colombeau
