#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "flowlab/errors.hpp"
#include "flowlab/evolution_verifier.hpp"
#include "flowlab/norm_analysis.hpp"
#include "flowlab/suite.hpp"

using namespace flowlab;
using namespace flowlab::verify;

namespace {

FlowTrajectory run(Geometry g, DiagonalMetric m, double t_end, double stride = 1e-2)
{
    flow::FlowParams p;
    p.t_end = t_end;
    p.sample_stride = stride;
    return flow::integrate(g, m, p);
}

FrameQuantities q_of(Geometry g, const DiagonalMetric& m) { return frame::analyze(m, frame::StructureTriple::of(g)); }

double d_dt(Geometry g, const DiagonalMetric& m, const Quantity& f)
{
    return fd_state_derivative(g, m, f).value.at(0);
}

}  // namespace

TEST_CASE("flat space: both sides vanish")
{
    const auto q = q_of(Geometry::R3, {1, 2, 3});
    CHECK(rhs_c3_evolution(q).value.max_abs() == 0.0);
    CHECK(rhs_c2_evolution(q).value.max_abs() == 0.0);
    CHECK(rhs_c2_norm_evolution(q).value == 0.0);
}

TEST_CASE("round sphere: both sides vanish")
{
    const auto q = q_of(Geometry::SU2, {2, 2, 2});
    CHECK(rhs_c3_evolution(q).value.max_abs() <= 1e-13);
    CHECK(rhs_c2_evolution(q).value.max_abs() <= 1e-13);
    CHECK(std::abs(rhs_c2_norm_evolution(q).value) <= 1e-13);
    const auto tr = run(Geometry::SU2, {1, 1, 1}, 0.2);
    CHECK_THROWS_AS(adjudicate_l1_rate(tr, 0.1), HypothesisViolated);
}

TEST_CASE("Heisenberg unit-state spot values")
{
    const Geometry g = Geometry::Heisenberg;
    const DiagonalMetric unit(1, 1, 1);
    const auto q = q_of(g, unit);

    const double c231 = d_dt(g, unit, [&](const DiagonalMetric& m) {
        return std::vector<double>{q_of(g, m).c3(1, 2, 0)};
    });
    CHECK(std::abs(c231 + 128.0) <= 1e-6 * 128.0);
    CHECK(std::abs(rhs_c3_evolution(q).value(1, 2, 0) + 128.0) <= 1e-10 * 128.0);

    const double c11 = d_dt(g, unit, [&](const DiagonalMetric& m) { return std::vector<double>{q_of(g, m).c2(0, 0)}; });
    CHECK(std::abs(c11 + 176.0) <= 1e-6 * 176.0);
    CHECK(std::abs(rhs_c2_evolution(q).value(0, 0) + 176.0) <= 1e-10 * 176.0);

    const double n2 = d_dt(g, unit, [&](const DiagonalMetric& m) {
        return std::vector<double>{frame::norm_sq(q_of(g, m).c2, m)};
    });
    CHECK(std::abs(n2 + 3456.0) <= 1e-6 * 3456.0);
    CHECK(std::abs(rhs_c2_norm_evolution(q).value + 3456.0) <= 1e-10 * 3456.0);

    const double dd = d_dt(g, unit, [&](const DiagonalMetric& m) {
        return std::vector<double>{norm::l1_density_oracle(g, m)};
    });
    CHECK(std::abs(dd + 64.0 * std::sqrt(6.0)) <= 1e-6 * 64.0 * std::sqrt(6.0));
    CHECK(l1_rate_corrected(q).value == doctest::Approx(-64.0 * std::sqrt(6.0)).epsilon(1e-12));

    const double ddet = d_dt(g, unit, [](const DiagonalMetric& m) { return std::vector<double>{m.det()}; });
    CHECK(ddet == doctest::Approx(4.0).epsilon(1e-8));
    const double dinv = d_dt(g, unit, [](const DiagonalMetric& m) { return std::vector<double>{1.0 / m.sqrt_det()}; });
    CHECK(dinv == doctest::Approx(-2.0).epsilon(1e-8));
}

TEST_CASE("FD derivative of A reproduces the flow rhs")
{
    const auto tr = run(Geometry::IsomR2, {1, 2, 3}, 2.0);
    for (double t : probe_times(tr, 5)) {
        const auto r = fd_time_derivative(tr, [](const DiagonalMetric& m) { return std::vector<double>{m.A()}; }, t);
        const double exact = flow::flow_rhs(Geometry::IsomR2, flow::state_at(tr, t))[0];
        CHECK(std::abs(r.value[0] - exact) <= 1e-8 * std::abs(exact));
    }
}

TEST_CASE("FD derivative requires room inside the trajectory")
{
    const auto tr = run(Geometry::IsomR2, {1, 2, 3}, 1.0);
    auto a = [](const DiagonalMetric& m) { return std::vector<double>{m.A()}; };
    CHECK_THROWS_AS(fd_time_derivative(tr, a, 0.0), NumericalError);
    CHECK_THROWS_AS(fd_time_derivative(tr, a, 1.0), NumericalError);
}

TEST_CASE("rhs_c2_evolution is symmetric with the trace forced by the flow")
{
    for (Geometry g : frame::kAllGeometries)
        for (const auto& m : suite::random_metrics(g, 50, 31)) {
            const auto r = rhs_c2_evolution(q_of(g, m));
            const double scale = std::max(r.term_scale, 1e-300);
            // g^ij C_ij = 0 for all t, so g^ij dC_ij/dt = -(dg^ij/dt) C_ij = -2 <Ric, C2>
            const auto q = q_of(g, m);
            double trace = 0.0, forced = 0.0;
            for (int i = 0; i < 3; ++i) {
                trace += r.value(i, i) / m[i];
                forced -= 2.0 * q.ric(i, i) * q.c2(i, i) / (m[i] * m[i]);
                for (int j = 0; j < 3; ++j) CHECK(std::abs(r.value(i, j) - r.value(j, i)) <= 1e-12 * scale);
            }
            CHECK(std::abs(trace - forced) <= 1e-12 * scale / std::min({m.A(), m.B(), m.C()}));
        }
}

TEST_CASE("norm algebra links the two evolution equations")
{
    for (Geometry g : frame::kAllGeometries)
        for (const auto& m : suite::random_metrics(g, 50, 37)) {
            const auto [res, scale] = c2_norm_consistency(q_of(g, m));
            CHECK(res <= 1e-10 * std::max(scale, 1e-300));
        }
}

TEST_CASE("trajectory verification and adjudication")
{
    std::vector<TrajectoryVerification> runs;
    for (const auto& d : suite::verification_data()) {
        const auto tr = flow::integrate(d.geometry, d.initial, [&] {
            flow::FlowParams p;
            p.t_end = d.t_end;
            return p;
        }());
        const auto v = verify_trajectory(tr);
        INFO(frame::to_string(d.geometry));
        CHECK(v.probes.size() == 20);
        CHECK(v.max_c3 <= 1e-6);
        CHECK(v.max_c2 <= 1e-6);
        CHECK(v.max_c2_norm <= 1e-6);
        CHECK(v.max_volume <= 1e-6);
        CHECK(v.max_consistency <= 1e-10);
        CHECK(v.max_second_div <= 1e-10);
        CHECK(v.l1_applicable);
        CHECK(v.verdict == L1RateVerdict::Corrected);
        CHECK(v.max_l1_rate_corrected <= 1e-6);
        CHECK(v.max_l1_rate_printed > 1e-3);
        runs.push_back(v);
    }
    CHECK(combine(runs) == L1RateVerdict::Corrected);
}

TEST_CASE("corrected integrand vanishes at the SU2 extremum")
{
    const auto tr = run(Geometry::SU2, {0.25, 1, 1}, 1.0, 1e-3);
    const auto s = norm::norm_series(tr, norm::DensitySource::Oracle);
    const auto ext = norm::find_extremum(s, tr);
    REQUIRE(ext.t0.has_value());
    // the integrand changes sign across t0
    const auto before = l1_rate_corrected(q_of(Geometry::SU2, flow::state_at(tr, *ext.t0 - 1e-6)));
    const auto after = l1_rate_corrected(q_of(Geometry::SU2, flow::state_at(tr, *ext.t0 + 1e-6)));
    CHECK(before.value > 0.0);
    CHECK(after.value < 0.0);
}

TEST_CASE("make_report")
{
    const auto r = make_report(0.5, {1.0, 2.0}, {1.0, 2.5}, 10.0);
    CHECK(r.abs_residual == doctest::Approx(0.5));
    CHECK(r.rel_residual == doctest::Approx(0.05));
    const auto z = make_report(0.0, {0.0}, {0.0}, 0.0);
    CHECK(z.rel_residual == 0.0);
}
