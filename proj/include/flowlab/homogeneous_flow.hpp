#pragma once

// Ricci flow on the homogeneous geometries as an ODE system for the diagonal
// frame metric (A, B, C), integrated with an embedded Dormand-Prince 5(4) pair.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "flowlab/frame_calculus.hpp"

namespace flowlab::flow {

using frame::DiagonalMetric;
using frame::Geometry;

using Vec3 = std::array<double, 3>;

struct FlowState {
    double t = 0.0;
    DiagonalMetric metric{1.0, 1.0, 1.0};
};

struct FlowParams {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double dt_init = 1e-4;
    double dt_min = 1e-14;
    double dt_max = 0.1;
    double t_end = 1.0;
    double min_component = 1e-8;  // blow-up floor
    double sample_stride = 1e-2;

    /// Throws DomainError when an invariant is violated.
    void validate() const;
};

enum class StopReason { ReachedTEnd, BlowupFloor, StepUnderflow };

std::string_view to_string(StopReason r);

struct FlowTrajectory {
    Geometry geometry = Geometry::R3;
    std::vector<FlowState> samples;
    StopReason stop_reason = StopReason::ReachedTEnd;
    std::optional<double> t_estimate;       // maximal existence time, when a floor is hit
    std::optional<double> t_estimate_width;  // bracket width of the bisection
    std::size_t accepted_steps = 0;
    std::size_t rejected_steps = 0;

    double t_first() const { return samples.front().t; }
    double t_last() const { return samples.back().t; }
};

/// Right-hand side of the ODE system, one hand-coded block per geometry.
Vec3 flow_rhs(Geometry geometry, const DiagonalMetric& metric);

/// Adaptive integration from t = 0. Samples are emitted at t = 0, every multiple
/// of sample_stride, and at the stopping time. StepUnderflow is reported through
/// stop_reason; use integrate_or_throw to turn it into a NumericalError.
FlowTrajectory integrate(Geometry geometry, const DiagonalMetric& initial, const FlowParams& params);
FlowTrajectory integrate_or_throw(Geometry geometry, const DiagonalMetric& initial, const FlowParams& params);

/// One Dormand-Prince step of size dt (either sign) without error control.
/// Returns nullopt when a stage leaves the positive cone.
std::optional<Vec3> dp5_step(Geometry geometry, const Vec3& y, double dt);

/// Fixed-step integration over [0, t_end] with n equal steps.
DiagonalMetric integrate_fixed(Geometry geometry, const DiagonalMetric& initial, double t_end, std::size_t steps);

/// Advances a state by dt (either sign) with fixed sub-steps no longer than max_substep.
/// Smooth in dt, so it serves as dense output and as a finite-difference stencil.
DiagonalMetric advance(Geometry geometry, const DiagonalMetric& metric, double dt, double max_substep = 1e-3);

/// Metric at time t, obtained by advancing from the last sample at or before t.
DiagonalMetric state_at(const FlowTrajectory& trajectory, double t);

/// Explicit Heisenberg solution; valid for t > -B0 C0 / A0.
DiagonalMetric heisenberg_closed_form(const DiagonalMetric& initial, double t);

struct ConservedQuantity {
    std::string name;
    double value = 0.0;
};

/// IsomR2: AB, C(A+B); IsomR11: AC, B(C-A); Heisenberg: AB, AC; others: none.
std::vector<ConservedQuantity> conserved_quantities(Geometry geometry, const DiagonalMetric& metric);

/// Largest relative drift of every conserved quantity along the trajectory.
double max_conserved_drift(const FlowTrajectory& trajectory);

struct Diagnostic {
    std::string name;
    double value = 0.0;
};

struct AsymptoteReport {
    Geometry geometry = Geometry::R3;
    double t_final = 0.0;
    std::vector<Diagnostic> diagnostics;
    std::vector<double> ratio_series;  // SU2: A/B per sample; SL2R: A/B; IsomR11: (A+C)/B

    std::optional<double> get(std::string_view name) const;
};

AsymptoteReport asymptote_probe(const FlowTrajectory& trajectory);

}  // namespace flowlab::flow
