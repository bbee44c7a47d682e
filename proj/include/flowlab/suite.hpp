#pragma once

// Reusable experiment pieces shared by the CLI and the tests: random metric
// generation, identity residuals, closed-form comparisons, the reference verdict sweep and
// the one-shot verification suite.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "flowlab/evolution_verifier.hpp"
#include "flowlab/frame_calculus.hpp"
#include "flowlab/homogeneous_flow.hpp"
#include "flowlab/norm_analysis.hpp"

namespace flowlab::suite {

using frame::DiagonalMetric;
using frame::Geometry;

inline constexpr std::uint64_t kDefaultSeed = 20260917;

/// Log-uniform metrics in [lo, hi]^3; C = B for SU2 and SL2R.
std::vector<DiagonalMetric> random_metrics(Geometry geometry, std::size_t n, std::uint64_t seed, double lo = 0.1,
                                           double hi = 10.0);

struct NamedValue {
    std::string name;
    double value = 0.0;
};

/// Relative residuals of the algebraic and differential identities of C2, C3, eps
/// and g at one metric. Each entry is measured against the largest term entering it.
std::vector<NamedValue> identity_residuals(const DiagonalMetric& metric, const frame::StructureTriple& triple);

struct ClosedFormComparison {
    double max_cy_rel = 0.0;       // closed vs oracle Cotton-York components
    double max_density_rel = 0.0;  // closed vs oracle density (not used for Heisenberg)
    double ratio_min = 0.0;        // oracle / closed density
    double ratio_max = 0.0;
    std::size_t samples = 0;
};

ClosedFormComparison compare_closed_forms(Geometry geometry, const std::vector<DiagonalMetric>& metrics);

/// Documented initial data and horizon used by `simulate` examples and `verify`.
struct InitialDatum {
    Geometry geometry = Geometry::R3;
    DiagonalMetric initial{1.0, 1.0, 1.0};
    double t_end = 1.0;
};

std::vector<InitialDatum> verification_data();

struct SweepItem {
    std::string row;  // row label in the verdict table
    Geometry geometry = Geometry::R3;
    DiagonalMetric initial{1.0, 1.0, 1.0};
    double t_end = 100.0;
    double sample_stride = 1e-2;
    norm::Verdict expected = norm::Verdict::Indeterminate;
};

std::vector<SweepItem> table1_items();

/// Expected monotonicity verdict for arbitrary initial data.
norm::Verdict table1_expectation(Geometry geometry, const DiagonalMetric& initial);

struct SweepOutcome {
    SweepItem item;
    norm::Verdict verdict = norm::Verdict::Indeterminate;
    flow::StopReason stop_reason = flow::StopReason::ReachedTEnd;
    double t_final = 0.0;
    std::optional<double> t0;
    std::optional<double> ratio_at_t0;
    double peak = 0.0;
    double terminal = 0.0;
    bool match = false;
    std::string error;  // non-empty when the item failed to run
};

SweepOutcome run_sweep_item(const SweepItem& item);

/// Runs items on up to `jobs` threads; results come back in input order.
std::vector<SweepOutcome> run_sweep(const std::vector<SweepItem>& items, unsigned jobs);

struct Check {
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

struct VerificationReport {
    std::vector<Check> checks;
    std::vector<verify::TrajectoryVerification> trajectories;
    verify::L1RateVerdict l1_verdict = verify::L1RateVerdict::Neither;
    double heisenberg_ratio_min = 0.0;
    double heisenberg_ratio_max = 0.0;
    std::size_t random_samples = 0;
    std::uint64_t seed = kDefaultSeed;

    bool all_pass() const;
    const Check* first_failure() const;
};

VerificationReport run_verification(std::uint64_t seed = kDefaultSeed, std::size_t samples = 100);

}  // namespace flowlab::suite
