#pragma once

// Numerical checks of the evolution equations for C3, C2, |C2|^2 and the L1
// density along homogeneous Ricci-flow trajectories. Time derivatives come from
// centred finite differences with Richardson extrapolation; right-hand sides are
// assembled term by term from the frame calculus.

#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "flowlab/frame_calculus.hpp"
#include "flowlab/homogeneous_flow.hpp"

namespace flowlab::verify {

using frame::DiagonalMetric;
using frame::FrameQuantities;
using frame::Geometry;
using flow::FlowTrajectory;

/// A right-hand side together with the largest magnitude among its terms,
/// which is the scale residuals are measured against.
template <typename T>
struct Evaluated {
    T value{};
    double term_scale = 0.0;
};

Evaluated<Tensor<3>> rhs_c3_evolution(const FrameQuantities& q);
Evaluated<Tensor<2>> rhs_c2_evolution(const FrameQuantities& q);
Evaluated<double> rhs_c2_norm_evolution(const FrameQuantities& q);

/// 2 <C2, rhs_c2_evolution> + 4 <Ric, C2^2> - rhs_c2_norm_evolution, the algebra linking the C2
/// equation to the |C2|^2 equation. Returns {residual, scale}.
std::pair<double, double> c2_norm_consistency(const FrameQuantities& q);

/// The two candidate L1 integrands, already multiplied by sqrt(det g):
/// printed   (1/|C2|) [rhs_c2_norm_evolution - R |C2|^2]
/// corrected (1/(2|C2|)) rhs_c2_norm_evolution - R |C2|
Evaluated<double> l1_rate_printed(const FrameQuantities& q);
Evaluated<double> l1_rate_corrected(const FrameQuantities& q);

struct ResidualReport {
    double t = 0.0;
    std::vector<double> lhs;
    std::vector<double> rhs;
    double abs_residual = 0.0;
    double rel_residual = 0.0;
    double scale = 0.0;
};

inline constexpr double kResidualFloor = 1e-300;

ResidualReport make_report(double t, std::vector<double> lhs, std::vector<double> rhs, double term_scale);

using Quantity = std::function<std::vector<double>(const DiagonalMetric&)>;

struct FdOptions {
    double h = 0.0;               // 0 picks max(1e-6, 1e-5 * local time scale)
    double max_error = 0.0;       // 0 disables the acceptance test on the error estimate
};

struct FdResult {
    std::vector<double> value;
    double error_estimate = 0.0;
    double h = 0.0;
};

/// Local time scale min_i g_i / |dg_i/dt| (1 when the state is stationary).
double local_time_scale(Geometry geometry, const DiagonalMetric& metric);

/// Centred difference of q along the flow through `metric`, three Richardson
/// levels (h, h/2, h/4). If the error estimate exceeds max_error the step is
/// retried at 4h and h/4; NumericalError when none qualifies.
FdResult fd_state_derivative(Geometry geometry, const DiagonalMetric& metric, const Quantity& q, FdOptions opts = {});

/// As above at time t of a trajectory; requires t +- 2h inside the trajectory.
FdResult fd_time_derivative(const FlowTrajectory& trajectory, const Quantity& q, double t, FdOptions opts = {});

/// n equally spaced times strictly inside the trajectory.
std::vector<double> probe_times(const FlowTrajectory& trajectory, std::size_t n = 20);

struct L1RatePair {
    ResidualReport printed;
    ResidualReport corrected;
};

/// Throws HypothesisViolated when |C2| vanishes at t.
L1RatePair adjudicate_l1_rate(const FlowTrajectory& trajectory, double t, double density_slack = 1e-10);

enum class L1RateVerdict { Printed, Corrected, Neither, Both };
std::string_view to_string(L1RateVerdict v);

struct ProbeResult {
    double t = 0.0;
    ResidualReport c3;
    ResidualReport c2;
    ResidualReport c2_norm;
    std::optional<L1RatePair> l1_rate;  // absent when the density vanishes
    ResidualReport det_identity;      // d/dt det g = -2 R det g
    ResidualReport inv_sqrt_det_identity;  // d/dt (det g)^(-1/2) = R (det g)^(-1/2)
    double consistency_rel = 0.0;
    double second_div_identity_rel = 0.0;
};

ProbeResult probe(const FlowTrajectory& trajectory, double t, double tolerance = 1e-6);

struct TrajectoryVerification {
    Geometry geometry = Geometry::R3;
    std::vector<ProbeResult> probes;
    double max_c3 = 0.0;
    double max_c2 = 0.0;
    double max_c2_norm = 0.0;
    double max_l1_rate_printed = 0.0;
    double max_l1_rate_corrected = 0.0;
    double max_volume = 0.0;
    double max_consistency = 0.0;
    double max_second_div = 0.0;
    bool l1_applicable = false;  // false when |C2| vanishes on every probe
    L1RateVerdict verdict = L1RateVerdict::Neither;
};

TrajectoryVerification verify_trajectory(const FlowTrajectory& trajectory, std::size_t n_probes = 20,
                                         double tolerance = 1e-6);

/// Common verdict of the applicable trajectories, or Neither when they disagree.
L1RateVerdict combine(const std::vector<TrajectoryVerification>& runs);

}  // namespace flowlab::verify
