#include "flowlab/homogeneous_flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "flowlab/errors.hpp"

namespace flowlab::flow {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                 a65 = -5103.0 / 18656.0;
constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0, b5 = -2187.0 / 6784.0,
                 b6 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                 e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

// PI step-size control
constexpr double kSafety = 0.9;
constexpr double kBeta = 0.04;
constexpr double kAlpha = 0.2 - 0.75 * kBeta;
constexpr double kFacMin = 0.2;
constexpr double kFacMax = 10.0;

Vec3 rhs_raw(Geometry g, const Vec3& y)
{
    const double A = y[0], B = y[1], C = y[2];
    switch (g) {
    case Geometry::SU2:
        return {-8.0 + 4.0 * (B * B + C * C - A * A) / (B * C), -8.0 + 4.0 * (C * C + A * A - B * B) / (C * A),
                -8.0 + 4.0 * (B * B + A * A - C * C) / (B * A)};
    case Geometry::IsomR2:
        return {4.0 * (B * B - A * A) / (B * C), 4.0 * (A * A - B * B) / (A * C), 4.0 * (A - B) * (A - B) / (A * B)};
    case Geometry::SL2R:
        return {4.0 * ((B - C) * (B - C) - A * A) / (B * C), 4.0 * ((A + C) * (A + C) - B * B) / (A * C),
                4.0 * ((A + B) * (A + B) - C * C) / (A * B)};
    case Geometry::Heisenberg: return {-4.0 * A * A / (B * C), 4.0 * A / C, 4.0 * A / B};
    case Geometry::IsomR11:
        return {4.0 * (C * C - A * A) / (B * C), 4.0 * (A + C) * (A + C) / (A * C), 4.0 * (A * A - C * C) / (A * B)};
    case Geometry::R3: return {0.0, 0.0, 0.0};
    }
    return {0.0, 0.0, 0.0};
}

Vec3 axpy(const Vec3& y, double h, std::initializer_list<std::pair<double, const Vec3*>> terms)
{
    Vec3 out = y;
    for (std::size_t i = 0; i < 3; ++i) {
        double acc = 0.0;
        for (const auto& [w, k] : terms) acc += w * (*k)[i];
        out[i] += h * acc;
    }
    return out;
}

bool finite_positive(const Vec3& y)
{
    return std::all_of(y.begin(), y.end(), [](double v) { return std::isfinite(v) && v > 0.0; });
}

struct StepResult {
    Vec3 y;
    Vec3 err;
};

std::optional<StepResult> dp5(Geometry g, const Vec3& y, double h)
{
    const Vec3 k1 = rhs_raw(g, y);
    const Vec3 y2 = axpy(y, h, {{a21, &k1}});
    if (!finite_positive(y2)) return std::nullopt;
    const Vec3 k2 = rhs_raw(g, y2);
    const Vec3 y3 = axpy(y, h, {{a31, &k1}, {a32, &k2}});
    if (!finite_positive(y3)) return std::nullopt;
    const Vec3 k3 = rhs_raw(g, y3);
    const Vec3 y4 = axpy(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}});
    if (!finite_positive(y4)) return std::nullopt;
    const Vec3 k4 = rhs_raw(g, y4);
    const Vec3 y5 = axpy(y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}});
    if (!finite_positive(y5)) return std::nullopt;
    const Vec3 k5 = rhs_raw(g, y5);
    const Vec3 y6 = axpy(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}});
    if (!finite_positive(y6)) return std::nullopt;
    const Vec3 k6 = rhs_raw(g, y6);
    const Vec3 y7 = axpy(y, h, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
    for (double v : y7)
        if (!std::isfinite(v)) return std::nullopt;
    // y7 may sit at or below zero when the step crosses a blow-up; the caller decides.
    Vec3 err{};
    if (finite_positive(y7)) {
        const Vec3 k7 = rhs_raw(g, y7);
        err = axpy(Vec3{0.0, 0.0, 0.0}, h, {{e1, &k1}, {e3, &k3}, {e4, &k4}, {e5, &k5}, {e6, &k6}, {e7, &k7}});
    } else {
        err.fill(std::numeric_limits<double>::infinity());
    }
    return StepResult{y7, err};
}

double error_norm(const Vec3& y0, const StepResult& s, const FlowParams& p)
{
    double worst = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        const double scale = p.abs_tol + p.rel_tol * std::max(std::abs(y0[i]), std::abs(s.y[i]));
        worst = std::max(worst, std::abs(s.err[i]) / scale);
    }
    return worst;
}

double min_component(const Vec3& y) { return std::min({y[0], y[1], y[2]}); }

FlowState make_state(double t, const Vec3& y) { return {t, DiagonalMetric(y[0], y[1], y[2])}; }

}  // namespace

void FlowParams::validate() const
{
    const auto positive = [](double v, const char* what) {
        if (!std::isfinite(v) || v <= 0.0) throw DomainError(std::string(what) + " must be finite and positive");
    };
    positive(rel_tol, "rel_tol");
    positive(abs_tol, "abs_tol");
    positive(dt_init, "dt_init");
    positive(dt_min, "dt_min");
    positive(dt_max, "dt_max");
    positive(min_component, "min_component");
    positive(sample_stride, "sample_stride");
    if (!std::isfinite(t_end) || t_end < 0.0) throw DomainError("t_end must be finite and non-negative");
    if (rel_tol > 1e-2 || abs_tol > 1e-2) throw DomainError("rel_tol and abs_tol must lie in (0, 1e-2]");
    if (!(dt_min <= dt_init && dt_init <= dt_max)) throw DomainError("require dt_min <= dt_init <= dt_max");
}

std::string_view to_string(StopReason r)
{
    switch (r) {
    case StopReason::ReachedTEnd: return "reached_t_end";
    case StopReason::BlowupFloor: return "blowup_floor";
    case StopReason::StepUnderflow: return "step_underflow";
    }
    return "?";
}

Vec3 flow_rhs(Geometry geometry, const DiagonalMetric& metric) { return rhs_raw(geometry, metric.components()); }

std::optional<Vec3> dp5_step(Geometry geometry, const Vec3& y, double dt)
{
    auto s = dp5(geometry, y, dt);
    if (!s || !finite_positive(s->y)) return std::nullopt;
    return s->y;
}

FlowTrajectory integrate(Geometry geometry, const DiagonalMetric& initial, const FlowParams& params)
{
    params.validate();

    FlowTrajectory traj;
    traj.geometry = geometry;
    Vec3 y = initial.components();
    double t = 0.0;
    traj.samples.push_back(make_state(t, y));

    if (min_component(y) <= params.min_component) {
        traj.stop_reason = StopReason::BlowupFloor;
        traj.t_estimate = 0.0;
        traj.t_estimate_width = 0.0;
        return traj;
    }

    std::size_t sample_index = 1;
    double h = params.dt_init;
    double err_old = 1e-4;

    while (t < params.t_end) {
        const double next_sample = std::min(static_cast<double>(sample_index) * params.sample_stride, params.t_end);
        const double proposal = std::min(h, params.dt_max);
        double step = proposal;
        bool clipped = false;
        if (t + step >= next_sample) {
            step = next_sample - t;
            clipped = true;
        }
        if (step < params.dt_min && !clipped) {
            traj.stop_reason = StopReason::StepUnderflow;
            return traj;
        }

        const auto result = dp5(geometry, y, step);
        if (!result) {
            ++traj.rejected_steps;
            h = step * kFacMin;
            if (h < params.dt_min) {
                traj.stop_reason = StopReason::StepUnderflow;
                return traj;
            }
            continue;
        }

        if (min_component(result->y) <= params.min_component) {
            // Bracket the first time a component reaches the floor by bisecting the
            // size of a single step taken from the last accepted state.
            double lo = 0.0;
            double hi = step;
            for (int it = 0; it < 200 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * (t + step);
                 ++it) {
                const double mid = 0.5 * (lo + hi);
                const auto trial = dp5(geometry, y, mid);
                if (!trial || !finite_positive(trial->y) || min_component(trial->y) <= params.min_component)
                    hi = mid;
                else
                    lo = mid;
            }
            const auto landing = lo > 0.0 ? dp5(geometry, y, lo) : std::nullopt;
            if (lo > 0.0 && (!landing || error_norm(y, *landing, params) > 1.0)) {
                // the crossing step is too coarse to trust; shrink and retry
                ++traj.rejected_steps;
                h = std::max(0.5 * lo, params.dt_min);
                if (0.5 * lo < params.dt_min) {
                    traj.stop_reason = StopReason::StepUnderflow;
                    return traj;
                }
                continue;
            }
            if (landing) {
                ++traj.accepted_steps;
                traj.samples.push_back(make_state(t + lo, landing->y));
            }
            traj.stop_reason = StopReason::BlowupFloor;
            traj.t_estimate = t + 0.5 * (lo + hi);
            traj.t_estimate_width = hi - lo;
            return traj;
        }

        const double err = error_norm(y, *result, params);
        if (err <= 1.0) {
            ++traj.accepted_steps;
            t = clipped ? next_sample : t + step;
            y = result->y;
            if (clipped) {
                traj.samples.push_back(make_state(t, y));
                ++sample_index;
            }
            const double e = std::max(err, 1e-10);
            double fac = kSafety * std::pow(e, -kAlpha) * std::pow(err_old, kBeta);
            fac = std::clamp(fac, kFacMin, kFacMax);
            err_old = std::max(err, 1e-4);
            h = clipped ? std::max(proposal, step * fac) : step * fac;
        } else {
            ++traj.rejected_steps;
            const double fac = std::max(kFacMin, kSafety * std::pow(err, -kAlpha));
            h = step * fac;
            if (h < params.dt_min) {
                traj.stop_reason = StopReason::StepUnderflow;
                return traj;
            }
        }
    }
    traj.stop_reason = StopReason::ReachedTEnd;
    return traj;
}

FlowTrajectory integrate_or_throw(Geometry geometry, const DiagonalMetric& initial, const FlowParams& params)
{
    auto traj = integrate(geometry, initial, params);
    if (traj.stop_reason == StopReason::StepUnderflow)
        throw NumericalError("step size underflow at t = " + frame::format_double(traj.t_last()) + " for " +
                             std::string(frame::to_string(geometry)));
    return traj;
}

DiagonalMetric integrate_fixed(Geometry geometry, const DiagonalMetric& initial, double t_end, std::size_t steps)
{
    if (steps == 0) throw DomainError("integrate_fixed needs at least one step");
    const double h = t_end / static_cast<double>(steps);
    Vec3 y = initial.components();
    for (std::size_t n = 0; n < steps; ++n) {
        const auto next = dp5_step(geometry, y, h);
        if (!next) throw NumericalError("fixed-step integration left the positive cone");
        y = *next;
    }
    return {y[0], y[1], y[2]};
}

DiagonalMetric advance(Geometry geometry, const DiagonalMetric& metric, double dt, double max_substep)
{
    if (!(max_substep > 0.0)) throw DomainError("max_substep must be positive");
    if (dt == 0.0) return metric;
    const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(std::abs(dt) / max_substep)));
    return integrate_fixed(geometry, metric, dt, n);
}

DiagonalMetric state_at(const FlowTrajectory& trajectory, double t)
{
    const auto& s = trajectory.samples;
    if (s.empty()) throw DomainError("empty trajectory");
    if (t < s.front().t || t > s.back().t)
        throw DomainError("time " + frame::format_double(t) + " outside the trajectory span");
    auto it = std::upper_bound(s.begin(), s.end(), t, [](double v, const FlowState& st) { return v < st.t; });
    const FlowState& base = *std::prev(it);
    return advance(trajectory.geometry, base.metric, t - base.t);
}

DiagonalMetric heisenberg_closed_form(const DiagonalMetric& initial, double t)
{
    const double A0 = initial.A(), B0 = initial.B(), C0 = initial.C();
    const double s = 12.0 * t + B0 * C0 / A0;
    if (!std::isfinite(t) || s <= 0.0)
        throw DomainError("Heisenberg closed form requires 12 t + B0 C0 / A0 > 0, i.e. t > " +
                          frame::format_double(-B0 * C0 / (12.0 * A0)));
    const double third = 1.0 / 3.0;
    const double A = std::pow(A0, 2 * third) * std::cbrt(B0) * std::cbrt(C0) / std::cbrt(s);
    const double B = std::cbrt(A0) * std::pow(B0, 2 * third) / std::cbrt(C0) * std::cbrt(s);
    const double C = std::cbrt(A0) / std::cbrt(B0) * std::pow(C0, 2 * third) * std::cbrt(s);
    return {A, B, C};
}

std::vector<ConservedQuantity> conserved_quantities(Geometry geometry, const DiagonalMetric& m)
{
    const double A = m.A(), B = m.B(), C = m.C();
    switch (geometry) {
    case Geometry::IsomR2: return {{"AB", A * B}, {"C(A+B)", C * (A + B)}};
    case Geometry::IsomR11: return {{"AC", A * C}, {"B(C-A)", B * (C - A)}};
    case Geometry::Heisenberg: return {{"AB", A * B}, {"AC", A * C}};
    default: return {};
    }
}

double max_conserved_drift(const FlowTrajectory& trajectory)
{
    if (trajectory.samples.empty()) return 0.0;
    const auto q0 = conserved_quantities(trajectory.geometry, trajectory.samples.front().metric);
    double worst = 0.0;
    for (const auto& s : trajectory.samples) {
        const auto q = conserved_quantities(trajectory.geometry, s.metric);
        for (std::size_t i = 0; i < q.size(); ++i) {
            const double ref = std::abs(q0[i].value);
            // B(C-A) vanishes identically when A0 = C0; measure that drift against B C
            const double scale = ref > 0.0 ? ref : s.metric.B() * s.metric.C();
            worst = std::max(worst, std::abs(q[i].value - q0[i].value) / scale);
        }
    }
    return worst;
}

std::optional<double> AsymptoteReport::get(std::string_view name) const
{
    for (const auto& d : diagnostics)
        if (d.name == name) return d.value;
    return std::nullopt;
}

AsymptoteReport asymptote_probe(const FlowTrajectory& trajectory)
{
    if (trajectory.samples.empty()) throw DomainError("asymptote_probe needs a non-empty trajectory");
    AsymptoteReport rep;
    rep.geometry = trajectory.geometry;
    const auto& first = trajectory.samples.front().metric;
    const auto& last = trajectory.samples.back().metric;
    rep.t_final = trajectory.t_last();
    const double A0 = first.A(), B0 = first.B(), C0 = first.C();
    const Vec3 rate = flow_rhs(trajectory.geometry, last);

    auto push = [&](std::string name, double v) { rep.diagnostics.push_back({std::move(name), v}); };

    switch (trajectory.geometry) {
    case Geometry::SU2: {
        for (const auto& s : trajectory.samples) rep.ratio_series.push_back(s.metric.A() / s.metric.B());
        const double r0 = rep.ratio_series.front();
        bool monotone = true;
        for (std::size_t i = 1; i < rep.ratio_series.size(); ++i) {
            const double d = rep.ratio_series[i] - rep.ratio_series[i - 1];
            if ((r0 < 1.0 && d < 0.0) || (r0 > 1.0 && d > 0.0)) monotone = false;
        }
        push("ratio_final", rep.ratio_series.back());
        push("ratio_limit_error", std::abs(rep.ratio_series.back() - 1.0));
        push("ratio_monotone_toward_one", monotone ? 1.0 : 0.0);
        break;
    }
    case Geometry::IsomR2: {
        const double ab = std::sqrt(A0 * B0);
        const double c_inf = 0.5 * C0 * (std::sqrt(A0 / B0) + std::sqrt(B0 / A0));
        push("a_limit", ab);
        push("c_limit", c_inf);
        push("a_minus_limit", std::abs(last.A() - ab));
        push("b_minus_limit", std::abs(last.B() - ab));
        push("c_minus_limit", std::abs(last.C() - c_inf));
        break;
    }
    case Geometry::SL2R: {
        for (const auto& s : trajectory.samples) rep.ratio_series.push_back(s.metric.A() / s.metric.B());
        // drift of A over the last decade of time, [t_final / 10, t_final]
        const DiagonalMetric decade = state_at(trajectory, 0.1 * rep.t_final);
        push("a_infinity_estimate", last.A());
        push("a_infinity_uncertainty", std::abs(last.A() - decade.A()));
        push("db_dt_minus_8", rate[1] - 8.0);
        push("dc_dt_minus_8", rate[2] - 8.0);
        break;
    }
    case Geometry::IsomR11: {
        for (const auto& s : trajectory.samples)
            rep.ratio_series.push_back((s.metric.A() + s.metric.C()) / s.metric.B());
        const double ac = std::sqrt(A0 * C0);
        push("ac_limit", ac);
        push("a_minus_limit", std::abs(last.A() - ac));
        push("c_minus_limit", std::abs(last.C() - ac));
        push("db_dt_minus_16", rate[1] - 16.0);
        break;
    }
    case Geometry::Heisenberg: {
        double worst = 0.0;
        for (const auto& s : trajectory.samples) {
            const auto exact = heisenberg_closed_form(first, s.t);
            for (std::size_t i = 0; i < 3; ++i)
                worst = std::max(worst, std::abs(s.metric[i] - exact[i]) / exact[i]);
        }
        push("closed_form_max_rel_error", worst);
        break;
    }
    case Geometry::R3: {
        double worst = 0.0;
        for (const auto& s : trajectory.samples)
            for (std::size_t i = 0; i < 3; ++i) worst = std::max(worst, std::abs(s.metric[i] - first[i]));
        push("max_change", worst);
        break;
    }
    }
    return rep;
}

}  // namespace flowlab::flow
