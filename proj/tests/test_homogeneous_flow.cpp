#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "flowlab/errors.hpp"
#include "flowlab/homogeneous_flow.hpp"
#include "flowlab/suite.hpp"

using namespace flowlab;
using namespace flowlab::flow;

namespace {

FlowParams params(double t_end, double stride = 1e-2)
{
    FlowParams p;
    p.t_end = t_end;
    p.sample_stride = stride;
    return p;
}

double conserved_value(const FlowTrajectory& tr, std::size_t sample, std::size_t k)
{
    return conserved_quantities(tr.geometry, tr.samples[sample].metric)[k].value;
}

}  // namespace

TEST_CASE("rhs by hand")
{
    const auto su2 = flow_rhs(Geometry::SU2, {1, 1, 1});
    for (double v : su2) CHECK(v == doctest::Approx(-4.0));
    const auto h = flow_rhs(Geometry::Heisenberg, {1, 1, 1});
    CHECK(h[0] == doctest::Approx(-4.0));
    CHECK(h[1] == doctest::Approx(4.0));
    CHECK(h[2] == doctest::Approx(4.0));
    const auto r3 = flow_rhs(Geometry::R3, {2, 3, 4});
    for (double v : r3) CHECK(v == 0.0);
}

TEST_CASE("rhs equals minus twice the frame Ricci")
{
    for (Geometry g : frame::kAllGeometries)
        for (const auto& m : suite::random_metrics(g, 100, 17)) {
            const auto rate = flow_rhs(g, m);
            const auto ric = frame::ricci(m, frame::structure_constants(frame::StructureTriple::of(g))).ric;
            for (std::size_t i = 0; i < 3; ++i)
                CHECK(std::abs(rate[i] + 2.0 * ric(i, i)) <= 1e-12 * (1.0 + std::abs(rate[i])));
        }
}

TEST_CASE("params validation")
{
    FlowParams p;
    CHECK_NOTHROW(p.validate());
    p.rel_tol = 0.0;
    CHECK_THROWS_AS(p.validate(), DomainError);
    p = FlowParams{};
    p.dt_init = 1.0;
    CHECK_THROWS_AS(p.validate(), DomainError);
    p = FlowParams{};
    p.t_end = -1.0;
    CHECK_THROWS_AS(p.validate(), DomainError);
}

TEST_CASE("round three-sphere shrinks linearly and blows up at 1/4")
{
    const auto tr = integrate(Geometry::SU2, {1, 1, 1}, params(1.0, 1e-3));
    CHECK(tr.stop_reason == StopReason::BlowupFloor);
    REQUIRE(tr.t_estimate.has_value());
    CHECK(std::abs(*tr.t_estimate - 0.25) <= 1e-6);
    for (const auto& s : tr.samples) {
        CHECK(std::abs(s.metric.A() - (1.0 - 4.0 * s.t)) <= 1e-8);
        CHECK(s.metric.A() > 0.0);
    }
}

TEST_CASE("Heisenberg matches the closed form")
{
    const DiagonalMetric init(1, 1, 1);
    const auto tr = integrate(Geometry::Heisenberg, init, params(10.0));
    CHECK(tr.stop_reason == StopReason::ReachedTEnd);
    double worst = 0.0;
    for (const auto& s : tr.samples) {
        const auto exact = heisenberg_closed_form(init, s.t);
        for (std::size_t i = 0; i < 3; ++i) worst = std::max(worst, std::abs(s.metric[i] / exact[i] - 1.0));
    }
    CHECK(worst <= 1e-8);
    CHECK(max_conserved_drift(tr) <= 1e-9);

    const auto t0 = heisenberg_closed_form(init, 0.0);
    CHECK(t0.A() == doctest::Approx(1.0));
    const auto t1 = heisenberg_closed_form(init, 1.0);
    CHECK(t1.A() == doctest::Approx(std::pow(13.0, -1.0 / 3.0)));
    CHECK(t1.B() == doctest::Approx(std::pow(13.0, 1.0 / 3.0)));
    CHECK(t1.C() == doctest::Approx(2.35133).epsilon(1e-5));
    CHECK(heisenberg_closed_form(init, -1.0 / 13.0).A() == doctest::Approx(std::cbrt(13.0)));
    CHECK_THROWS_AS(heisenberg_closed_form(init, -1.0 / 12.0), DomainError);
}

TEST_CASE("flat space is stationary")
{
    const auto tr = integrate(Geometry::R3, {2, 3, 4}, params(5.0, 0.5));
    for (const auto& s : tr.samples) {
        CHECK(s.metric.A() == 2.0);
        CHECK(s.metric.B() == 3.0);
        CHECK(s.metric.C() == 4.0);
    }
}

TEST_CASE("conserved quantities")
{
    auto get = [](Geometry g, DiagonalMetric m) { return conserved_quantities(g, m); };
    const auto r2 = get(Geometry::IsomR2, {1, 2, 3});
    REQUIRE(r2.size() == 2);
    CHECK(r2[0].value == doctest::Approx(2.0));
    CHECK(r2[1].value == doctest::Approx(9.0));
    const auto r11 = get(Geometry::IsomR11, {1, 2, 3});
    CHECK(r11[0].value == doctest::Approx(3.0));
    CHECK(r11[1].value == doctest::Approx(4.0));
    const auto h = get(Geometry::Heisenberg, {1, 1, 1});
    CHECK(h[0].value == doctest::Approx(1.0));
    CHECK(h[1].value == doctest::Approx(1.0));
    CHECK(get(Geometry::SU2, {1, 2, 2}).empty());

    for (Geometry g : {Geometry::IsomR2, Geometry::IsomR11, Geometry::Heisenberg}) {
        const auto tr = integrate(g, {1, 2, 3}, params(50.0, 0.1));
        INFO(frame::to_string(g));
        CHECK(tr.stop_reason == StopReason::ReachedTEnd);
        CHECK(max_conserved_drift(tr) <= 1e-9);
        // spot check against a direct evaluation at the last sample
        const double first = conserved_value(tr, 0, 0);
        const double last = conserved_value(tr, tr.samples.size() - 1, 0);
        CHECK(std::abs(last / first - 1.0) <= 1e-9);
    }
}

TEST_CASE("symmetric branches and sign trichotomy are preserved")
{
    for (Geometry g : {Geometry::SU2, Geometry::SL2R})
        for (double a : {0.25, 0.6, 1.5}) {
            const auto tr = integrate(g, {a, 1, 1}, params(g == Geometry::SU2 ? 1.0 : 20.0));
            const double sign0 = std::copysign(1.0, a - 1.0);
            for (const auto& s : tr.samples) {
                CHECK(std::abs(s.metric.B() - s.metric.C()) <= 1e-12 * s.metric.B());
                if (g == Geometry::SU2) CHECK(std::copysign(1.0, s.metric.A() / s.metric.B() - 1.0) == sign0);
                CHECK(s.metric.A() > 0.0);
            }
        }
}

TEST_CASE("fixed-step global error has fifth order")
{
    // The tableau's leading error constants are small, so h^6 and h^7 terms
    // dominate until the error drops to ~1e-12; measure the slope past that.
    const DiagonalMetric unit(1, 1, 1);
    const double t0 = 5.0, T = 4.0;
    const auto init = heisenberg_closed_form(unit, t0);
    const auto exact = heisenberg_closed_form(unit, t0 + T);
    auto err = [&](std::size_t n) {
        const auto m = integrate_fixed(Geometry::Heisenberg, init, T, n);
        double e = 0.0;
        for (std::size_t i = 0; i < 3; ++i) e = std::max(e, std::abs(m[i] / exact[i] - 1.0));
        return e;
    };
    const double e16 = err(16), e32 = err(32);
    CHECK(e32 > 1e-14);
    const double slope = std::log2(e16 / e32);
    INFO("slope = ", slope);
    CHECK(std::abs(slope - 5.0) <= 0.3);
    // coarser steps converge at least as fast
    for (std::size_t n : {2, 4, 8}) CHECK(std::log2(err(n) / err(2 * n)) >= 5.0);
}

TEST_CASE("volume identity along a trajectory")
{
    // d/dt det g = -2 R det g with a five-point difference on dense output
    const auto tr = integrate(Geometry::IsomR11, {1, 2, 3}, params(2.0));
    const auto sc = frame::structure_constants(frame::StructureTriple::of(Geometry::IsomR11));
    for (double t : {0.3, 0.9, 1.5}) {
        const double h = 1e-3;
        auto det = [&](double s) { return state_at(tr, s).det(); };
        const double d = (det(t - 2 * h) - 8 * det(t - h) + 8 * det(t + h) - det(t + 2 * h)) / (12 * h);
        const auto m = state_at(tr, t);
        const double rhs = -2.0 * frame::ricci(m, sc).scalar * m.det();
        CHECK(std::abs(d - rhs) <= 1e-6 * std::abs(rhs));
    }
}

TEST_CASE("dense output and domain errors")
{
    const auto tr = integrate(Geometry::IsomR2, {1, 2, 3}, params(1.0, 0.25));
    CHECK(tr.samples.size() == 5);
    CHECK(state_at(tr, 0.25).A() == doctest::Approx(tr.samples[1].metric.A()).epsilon(1e-12));
    CHECK_THROWS_AS(state_at(tr, 1.5), DomainError);
    CHECK_THROWS_AS(state_at(tr, -0.1), DomainError);
}

TEST_CASE("asymptotes")
{
    SUBCASE("SU2 ratio climbs toward one")
    {
        const auto rep = asymptote_probe(integrate(Geometry::SU2, {0.25, 1, 1}, params(1.0, 1e-3)));
        const auto& r = rep.ratio_series;
        REQUIRE(r.size() > 10);
        for (std::size_t i = 1; i < r.size(); ++i) CHECK(r[i] > r[i - 1]);
        CHECK(r.back() < 1.0);
        CHECK(rep.get("ratio_monotone_toward_one").value() == 1.0);
    }
    SUBCASE("IsomR2 limits")
    {
        const auto tr = integrate(Geometry::IsomR2, {1, 2, 3}, params(100.0, 0.1));
        const auto& m = tr.samples.back().metric;
        CHECK(std::abs(m.A() - std::sqrt(2.0)) <= 1e-2);
        CHECK(std::abs(m.B() - std::sqrt(2.0)) <= 1e-2);
        CHECK(std::abs(m.C() - 3.18198) <= 1e-2);
    }
    SUBCASE("IsomR11 limits")
    {
        const auto tr = integrate(Geometry::IsomR11, {1, 2, 3}, params(100.0, 0.1));
        const auto& m = tr.samples.back().metric;
        CHECK(std::abs(m.A() - std::sqrt(3.0)) <= 1e-2);
        CHECK(std::abs(m.C() - std::sqrt(3.0)) <= 1e-2);
        const auto rep = asymptote_probe(tr);
        CHECK(std::abs(rep.get("db_dt_minus_16").value()) <= 1e-3);
    }
    SUBCASE("SL2R growth rate")
    {
        const auto rep = asymptote_probe(integrate(Geometry::SL2R, {0.1, 1, 1}, params(100.0, 0.1)));
        CHECK(std::abs(rep.get("db_dt_minus_8").value()) <= 1e-3);
        CHECK(rep.get("a_infinity_estimate").value() > 0.0);
    }
}
