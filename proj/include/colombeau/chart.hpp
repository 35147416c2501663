#pragma once

#include <string>
#include <vector>

#include "colombeau/gfunc.hpp"

namespace colombeau {

/// Generalized chart: a per-eps diffeomorphism net with both directions
/// c-bounded on the declared boxes. Rank certification and pullbacks run
/// through these.
struct GChart {
    GFunc forward;  // source -> target
    GFunc inverse;  // target -> source
    Domain source, target;
    std::string tag; // triangular | linear | polar | closed-form
    std::vector<CompactBox> roundtrip_boxes;        // on the source
    std::vector<CompactBox> target_roundtrip_boxes; // on the target (may be empty)

    /// Jacobian of the forward map at (eps, x), row-major dim x dim. Symbolic
    /// when the forward map is expression-backed, central differences with the
    /// given step otherwise.
    void jacobian(double eps, std::span<const double> x, std::vector<double>& J,
                  double fd_step = 1e-6) const;
};

struct ChartCheck {
    std::vector<NegligibilityResult> forward_roundtrip; // psi o psi^-1 - id on target boxes
    std::vector<NegligibilityResult> inverse_roundtrip; // psi^-1 o psi - id on source boxes
    bool c_bounded_forward = false;
    bool c_bounded_inverse = false;
    bool pass = false;
};

/// Verify the chart invariants on its declared boxes.
ChartCheck verify_chart(const GChart& chart, const EpsilonGrid& grid,
                        const NegligibilityPolicy& policy = {});

} // namespace colombeau
