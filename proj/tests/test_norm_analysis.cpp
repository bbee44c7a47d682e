#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "flowlab/errors.hpp"
#include "flowlab/norm_analysis.hpp"
#include "flowlab/suite.hpp"

using namespace flowlab;
using namespace flowlab::norm;

namespace {

const double kSqrt6 = std::sqrt(6.0);

FlowTrajectory run(Geometry g, DiagonalMetric m, double t_end, double stride = 1e-2)
{
    flow::FlowParams p;
    p.t_end = t_end;
    p.sample_stride = stride;
    return flow::integrate(g, m, p);
}

}  // namespace

TEST_CASE("closed-form densities by hand")
{
    CHECK(l1_density_closed(Geometry::SU2, {1, 2, 2}) == doctest::Approx(kSqrt6));
    CHECK(l1_density_closed(Geometry::SL2R, {1, 1, 1}) == doctest::Approx(8.0 * kSqrt6));
    CHECK(l1_density_closed(Geometry::SU2, {2, 2, 2}) == 0.0);
    CHECK(l1_density_closed(Geometry::R3, {1, 2, 3}) == 0.0);
    CHECK(l1_density_closed(Geometry::IsomR2, {2, 2, 5}) == 0.0);
    // A = C reduces to 8 sqrt2 (A + C) / B
    CHECK(l1_density_closed(Geometry::IsomR11, {1.5, 2, 1.5}) == doctest::Approx(8.0 * std::sqrt(2.0) * 3.0 / 2.0));
    CHECK_THROWS_AS(l1_density_closed(Geometry::SU2, {1, 2, 3}), UnsupportedBranch);
    CHECK_THROWS_AS(cotton_york_closed(Geometry::SL2R, {1, 2, 3}), UnsupportedBranch);
    CHECK_FALSE(closed_form_supported(Geometry::SU2, {1, 2, 3}));
    CHECK(closed_form_supported(Geometry::IsomR2, {1, 2, 3}));
}

TEST_CASE("oracle densities by hand")
{
    CHECK(l1_density_oracle(Geometry::SU2, {1, 2, 2}) == doctest::Approx(kSqrt6));
    CHECK(l1_density_oracle(Geometry::Heisenberg, {1, 1, 1}) == doctest::Approx(4.0 * kSqrt6));
    CHECK(l1_density_oracle(Geometry::R3, {1, 2, 3}) == 0.0);
}

TEST_CASE("closed forms agree with the oracle over random metrics")
{
    for (Geometry g : {Geometry::SU2, Geometry::IsomR2, Geometry::SL2R, Geometry::IsomR11, Geometry::Heisenberg}) {
        const auto cmp = suite::compare_closed_forms(g, suite::random_metrics(g, 300, 21));
        INFO(frame::to_string(g));
        CHECK(cmp.max_cy_rel <= 1e-10);
        if (g == Geometry::Heisenberg) {
            CHECK(cmp.ratio_min == doctest::Approx(2.0).epsilon(1e-12));
            CHECK(cmp.ratio_max - cmp.ratio_min <= 1e-10 * cmp.ratio_min);
        } else {
            CHECK(cmp.max_density_rel <= 1e-10);
        }
    }
}

TEST_CASE("densities are scale invariant")
{
    for (Geometry g : frame::kAllGeometries)
        for (const auto& m : suite::random_metrics(g, 50, 23))
            for (double s : {0.5, 2.0, 10.0}) {
                const double a = l1_density_oracle(g, m), b = l1_density_oracle(g, m.scaled(s));
                CHECK(std::abs(a - b) <= 1e-10 * (1.0 + a));
                if (closed_form_supported(g, m)) {
                    const double c = l1_density_closed(g, m), d = l1_density_closed(g, m.scaled(s));
                    CHECK(std::abs(c - d) <= 1e-10 * (1.0 + c));
                }
            }
}

TEST_CASE("Heisenberg density follows the power law")
{
    const auto tr = run(Geometry::Heisenberg, {1, 1, 1}, 10.0);
    const auto s = norm_series(tr, DensitySource::Oracle);
    const double k0 = s.density[0];
    for (std::size_t i = 0; i < s.times.size(); ++i) {
        const double k = s.density[i] / std::pow(12.0 * s.times[i] + 1.0, -4.0 / 3.0);
        CHECK(std::abs(k / k0 - 1.0) <= 1e-8);
    }
    CHECK(monotonicity_verdict(s) == Verdict::StrictlyDecreasing);
}

TEST_CASE("SU2 extremum")
{
    const auto tr = run(Geometry::SU2, {0.25, 1, 1}, 1.0, 1e-3);
    const auto s = norm_series(tr, DensitySource::Oracle);
    CHECK(monotonicity_verdict(s) == Verdict::HasInteriorMax);
    const auto ext = find_extremum(s, tr);
    REQUIRE(ext.kind == ExtremumKind::InteriorMax);
    CHECK(std::abs(*ext.ratio_at_t0 - 0.5) <= 1e-6);
    const double peak = *std::max_element(s.density.begin(), s.density.end());
    CHECK(s.density.back() < 1e-3 * peak);

    for (double a : {0.75, 1.5}) {
        const auto t2 = run(Geometry::SU2, {a, 1, 1}, 1.0, 1e-3);
        const auto s2 = norm_series(t2, DensitySource::Oracle);
        CHECK(monotonicity_verdict(s2) == Verdict::StrictlyDecreasing);
        CHECK(find_extremum(s2, t2).kind == ExtremumKind::None);
    }
    const auto round = run(Geometry::SU2, {1, 1, 1}, 1.0, 1e-3);
    const auto s3 = norm_series(round, DensitySource::Oracle);
    CHECK(monotonicity_verdict(s3) == Verdict::IdenticallyZero);
    CHECK(find_extremum(s3, round).kind == ExtremumKind::None);
}

TEST_CASE("closed and oracle series agree on the symmetric branch")
{
    const auto tr = run(Geometry::SU2, {0.4, 1, 1}, 1.0, 1e-3);
    const auto a = norm_series(tr, DensitySource::Closed);
    const auto b = norm_series(tr, DensitySource::Oracle);
    for (std::size_t i = 0; i < a.density.size(); ++i)
        CHECK(std::abs(a.density[i] - b.density[i]) <= 1e-9 * (1.0 + b.density[i]));
}

TEST_CASE("verdicts on synthetic series")
{
    NormSeries s;
    s.times = {0, 1, 2, 3};
    s.density = {4, 3, 2, 1};
    CHECK(monotonicity_verdict(s) == Verdict::StrictlyDecreasing);
    s.density = {1, 3, 2, 1};
    CHECK(monotonicity_verdict(s) == Verdict::HasInteriorMax);
    s.density = {0, 0, 0, 0};
    CHECK(monotonicity_verdict(s) == Verdict::IdenticallyZero);
    s.density = {3, 3, 2, 1};
    CHECK(monotonicity_verdict(s) == Verdict::Indeterminate);
    s.density = {1, 2, 1, 2};
    CHECK(monotonicity_verdict(s) == Verdict::Indeterminate);
    s.density = {1, 2, 3, 4};
    CHECK(monotonicity_verdict(s) == Verdict::Indeterminate);
    // converged tail is ignored
    s.times = {0, 1, 2, 3, 4};
    s.density = {1, 0.5, 1e-13, 2e-13, 1e-13};
    CHECK(monotonicity_verdict(s) == Verdict::StrictlyDecreasing);
}

TEST_CASE("two slope changes are rejected")
{
    const auto tr = run(Geometry::Heisenberg, {1, 1, 1}, 0.04, 1e-2);
    auto s = norm_series(tr, DensitySource::Oracle);
    REQUIRE(s.density.size() == 5);
    s.density = {1, 2, 1, 2, 1};
    CHECK_THROWS_AS(find_extremum(s, tr), NumericalError);
}

TEST_CASE("terminal densities decay")
{
    for (const auto& [g, m, t_end] : std::vector<std::tuple<Geometry, DiagonalMetric, double>>{
             {Geometry::IsomR2, {1, 2, 3}, 100.0},
             {Geometry::SL2R, {0.5, 1, 1}, 100.0},
             {Geometry::Heisenberg, {1, 2, 3}, 100.0},
             {Geometry::IsomR11, {1, 2, 3}, 100.0}}) {
        const auto s = norm_series(run(g, m, t_end, 0.1), DensitySource::Oracle);
        INFO(frame::to_string(g));
        CHECK(monotonicity_verdict(s) == Verdict::StrictlyDecreasing);
        CHECK(s.density.back() < 1e-3 * s.density.front());
    }
    const auto flat = norm_series(run(Geometry::IsomR2, {2, 2, 3}, 10.0, 0.1), DensitySource::Oracle);
    CHECK(monotonicity_verdict(flat) == Verdict::IdenticallyZero);
}
