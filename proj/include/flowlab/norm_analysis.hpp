#pragma once

// L1-norm densities of the Cotton-York tensor: the closed forms per geometry and
// the frame-calculus oracle, plus extremum detection and monotonicity verdicts.
//
// Densities are per unit reference volume of the coframe metric
// w1(x)w1 + w2(x)w2 + w3(x)w3, i.e. |C2|_g sqrt(ABC). Total norms on a compact
// set multiply by vol_factor (2 pi^2 for SU(2) as the unit three-sphere).

#include <array>
#include <optional>
#include <string_view>
#include <vector>

#include "flowlab/frame_calculus.hpp"
#include "flowlab/homogeneous_flow.hpp"

namespace flowlab::norm {

using frame::DiagonalMetric;
using frame::Geometry;
using flow::FlowTrajectory;

inline constexpr double kUnitThreeSphereVolume = 19.739208802178716;  // 2 pi^2

/// Closed-form diagonal Cotton-York components (C11, C22, C33). SU2 and SL2R
/// only on the B = C branch; R3 is zero. Throws UnsupportedBranch otherwise.
std::array<double, 3> cotton_york_closed(Geometry geometry, const DiagonalMetric& metric);

/// Closed-form L1 density as printed. SU2/SL2R require B = C.
double l1_density_closed(Geometry geometry, const DiagonalMetric& metric);

/// |C2|_g sqrt(det g) from the frame calculus.
double l1_density_oracle(const DiagonalMetric& metric, const frame::StructureTriple& triple);
double l1_density_oracle(Geometry geometry, const DiagonalMetric& metric);

/// True when the closed form is defined for this metric.
bool closed_form_supported(Geometry geometry, const DiagonalMetric& metric);

enum class DensitySource { Closed, Oracle };

struct NormSeries {
    std::vector<double> times;
    std::vector<double> density;
    double vol_factor = 1.0;
};

NormSeries norm_series(const FlowTrajectory& trajectory, DensitySource source, double vol_factor = 1.0);

/// Density at an arbitrary time, from the trajectory's dense output.
double density_at(const FlowTrajectory& trajectory, DensitySource source, double t);

enum class ExtremumKind { None, InteriorMax };
std::string_view to_string(ExtremumKind k);

struct ExtremumReport {
    ExtremumKind kind = ExtremumKind::None;
    std::optional<double> t0;
    std::optional<double> ratio_at_t0;  // A/B
    std::optional<double> density_at_t0;
    std::optional<double> bracket_width;
};

enum class Verdict { StrictlyDecreasing, HasInteriorMax, IdenticallyZero, Indeterminate };
std::string_view to_string(Verdict v);

struct VerdictOptions {
    double slack = 1e-12;       // relative to the peak density
    double zero_floor = 1e-10;  // absolute; below this the series counts as zero
    // Steps with both ends below resolution * peak have converged to zero within
    // roundoff and are ignored, so an exponential decay stays StrictlyDecreasing.
    double resolution = 1e-10;
};

/// Scans consecutive slopes for a single rise-then-fall and bisects the time
/// derivative of the density on dense output. Throws NumericalError on more than
/// one slope sign change.
ExtremumReport find_extremum(const NormSeries& series, const FlowTrajectory& trajectory,
                             DensitySource source = DensitySource::Oracle, VerdictOptions opts = {});

Verdict monotonicity_verdict(const NormSeries& series, VerdictOptions opts = {});

}  // namespace flowlab::norm
