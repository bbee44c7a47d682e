#include "flowlab/norm_analysis.hpp"

#include <algorithm>
#include <cmath>

#include "flowlab/errors.hpp"

namespace flowlab::norm {

namespace {

const double kSqrt6 = std::sqrt(6.0);

bool on_b_equals_c(const DiagonalMetric& m) { return std::abs(m.B() - m.C()) <= 1e-12 * std::max(m.B(), m.C()); }

void require_branch(Geometry g, const DiagonalMetric& m)
{
    if ((g == Geometry::SU2 || g == Geometry::SL2R) && !on_b_equals_c(m))
        throw UnsupportedBranch(std::string("closed form for ") + std::string(frame::to_string(g)) +
                                " exists only for B = C; use the oracle density");
}

}  // namespace

bool closed_form_supported(Geometry geometry, const DiagonalMetric& metric)
{
    return !((geometry == Geometry::SU2 || geometry == Geometry::SL2R) && !on_b_equals_c(metric));
}

std::array<double, 3> cotton_york_closed(Geometry geometry, const DiagonalMetric& m)
{
    require_branch(geometry, m);
    const double A = m.A(), B = m.B(), C = m.C();
    switch (geometry) {
    case Geometry::SU2: {
        const double x = A / B;
        const double side = 4.0 * std::sqrt(A) / B * (1.0 - x);
        return {8.0 * std::pow(A, 1.5) / (B * B) * (x - 1.0), side, side};
    }
    case Geometry::IsomR2: {
        const double p = std::pow(A * B * C, 1.5);
        return {4.0 * A / p * (2.0 * A * A * A - B * B * B - A * A * B),
                4.0 * B / p * (2.0 * B * B * B - A * A * A - A * B * B), -4.0 * C / p * (A + B) * (A - B) * (A - B)};
    }
    case Geometry::SL2R: {
        const double p = std::pow(A * B * B, 1.5);
        const double side = -4.0 * A * A * B * (A + B) / p;
        return {8.0 * A * A * A * (A + B) / p, side, side};
    }
    case Geometry::Heisenberg: {
        const double s = std::sqrt(A * B * C);
        return {8.0 * A * A / (B * C) * std::sqrt(A / (B * C)), -4.0 * A * A / (C * s), -4.0 * A * A / (B * s)};
    }
    case Geometry::IsomR11: {
        const double s = std::sqrt(A * B * C);
        return {4.0 * A * (A + C) / (B * s) * (2.0 * A / C + C / A - 1.0), 4.0 * (A + C) / s * (C / A - A / C),
                -4.0 * C * (A + C) / (B * s) * (2.0 * C / A + A / C - 1.0)};
    }
    case Geometry::R3: return {0.0, 0.0, 0.0};
    }
    return {0.0, 0.0, 0.0};
}

double l1_density_closed(Geometry geometry, const DiagonalMetric& m)
{
    require_branch(geometry, m);
    const double A = m.A(), B = m.B(), C = m.C();
    switch (geometry) {
    case Geometry::SU2: {
        const double x = A / B;
        return 4.0 * kSqrt6 * x * std::abs(x - 1.0);
    }
    case Geometry::IsomR2: {
        const double x = A / B;
        // the polynomial is (x-1)^2 times a positive factor; clamp roundoff below zero
        const double poly = 6.0 * x * x * x - 6.0 * x * x + 2.0 * x + 6.0 / (x * x * x) - 6.0 / (x * x) + 2.0 / x - 4.0;
        return std::sqrt(std::max(poly, 0.0)) * 4.0 * std::sqrt(A * B) / C;
    }
    case Geometry::SL2R: {
        const double x = A / B;
        return 4.0 * kSqrt6 * x * (1.0 + x);
    }
    case Geometry::Heisenberg: return 2.0 * kSqrt6 * A * A / (B * C);
    case Geometry::IsomR11: {
        const double ac = A / C, ca = C / A;
        return 4.0 * (A + C) / B * std::sqrt(6.0 * ac * (ac - 1.0) + 6.0 * ca * (ca - 1.0) + 8.0);
    }
    case Geometry::R3: return 0.0;
    }
    return 0.0;
}

double l1_density_oracle(const DiagonalMetric& metric, const frame::StructureTriple& triple)
{
    const auto c2 = frame::cotton_york(metric, frame::structure_constants(triple));
    return std::sqrt(frame::norm_sq(c2, metric)) * metric.sqrt_det();
}

double l1_density_oracle(Geometry geometry, const DiagonalMetric& metric)
{
    return l1_density_oracle(metric, frame::StructureTriple::of(geometry));
}

namespace {

double density_of(Geometry g, const DiagonalMetric& m, DensitySource source)
{
    return source == DensitySource::Closed ? l1_density_closed(g, m) : l1_density_oracle(g, m);
}

}  // namespace

NormSeries norm_series(const FlowTrajectory& trajectory, DensitySource source, double vol_factor)
{
    if (trajectory.samples.empty()) throw DomainError("norm_series needs a non-empty trajectory");
    if (!(vol_factor > 0.0) || !std::isfinite(vol_factor)) throw DomainError("vol_factor must be positive");
    NormSeries s;
    s.vol_factor = vol_factor;
    s.times.reserve(trajectory.samples.size());
    s.density.reserve(trajectory.samples.size());
    for (const auto& st : trajectory.samples) {
        s.times.push_back(st.t);
        s.density.push_back(vol_factor * density_of(trajectory.geometry, st.metric, source));
    }
    return s;
}

double density_at(const FlowTrajectory& trajectory, DensitySource source, double t)
{
    return density_of(trajectory.geometry, flow::state_at(trajectory, t), source);
}

std::string_view to_string(ExtremumKind k) { return k == ExtremumKind::InteriorMax ? "InteriorMax" : "None"; }

std::string_view to_string(Verdict v)
{
    switch (v) {
    case Verdict::StrictlyDecreasing: return "StrictlyDecreasing";
    case Verdict::HasInteriorMax: return "HasInteriorMax";
    case Verdict::IdenticallyZero: return "IdenticallyZero";
    case Verdict::Indeterminate: return "Indeterminate";
    }
    return "?";
}

namespace {

enum class Step { Up, Down, Level, Converged };

struct Shape {
    double peak = 0.0;
    std::vector<Step> steps;
};

Shape shape_of(const NormSeries& s, const VerdictOptions& opts)
{
    Shape sh;
    for (double d : s.density) sh.peak = std::max(sh.peak, d);
    const double tol = opts.slack * sh.peak;
    const double floor = opts.resolution * sh.peak;
    for (std::size_t i = 1; i < s.density.size(); ++i) {
        const double d = s.density[i] - s.density[i - 1];
        if (s.density[i] <= floor && s.density[i - 1] <= floor)
            sh.steps.push_back(Step::Converged);
        else
            sh.steps.push_back(d > tol ? Step::Up : (d < -tol ? Step::Down : Step::Level));
    }
    // only a trailing run may count as converged; anything later is a real step
    bool trailing = true;
    for (std::size_t i = sh.steps.size(); i-- > 0;) {
        if (sh.steps[i] != Step::Converged) trailing = false;
        else if (!trailing) sh.steps[i] = Step::Level;
    }
    while (!sh.steps.empty() && sh.steps.back() == Step::Converged) sh.steps.pop_back();
    return sh;
}

}  // namespace

Verdict monotonicity_verdict(const NormSeries& series, VerdictOptions opts)
{
    if (series.density.size() != series.times.size()) throw InvariantBreach("series length mismatch");
    const Shape sh = shape_of(series, opts);
    if (sh.peak <= opts.zero_floor) return Verdict::IdenticallyZero;
    if (sh.steps.empty()) return Verdict::Indeterminate;
    if (std::all_of(sh.steps.begin(), sh.steps.end(), [](Step s) { return s == Step::Down; }))
        return Verdict::StrictlyDecreasing;
    // rise then fall, each strict
    std::size_t k = 0;
    while (k < sh.steps.size() && sh.steps[k] == Step::Up) ++k;
    const std::size_t rises = k;
    while (k < sh.steps.size() && sh.steps[k] == Step::Down) ++k;
    if (rises > 0 && k == sh.steps.size() && rises < sh.steps.size()) return Verdict::HasInteriorMax;
    return Verdict::Indeterminate;
}

ExtremumReport find_extremum(const NormSeries& series, const FlowTrajectory& trajectory, DensitySource source,
                             VerdictOptions opts)
{
    ExtremumReport rep;
    const Shape sh = shape_of(series, opts);
    if (sh.peak <= opts.zero_floor || sh.steps.empty()) return rep;

    std::size_t switches = 0;
    std::size_t peak_index = 0;
    std::optional<Step> last;
    for (std::size_t i = 0; i < sh.steps.size(); ++i) {
        if (sh.steps[i] == Step::Level || sh.steps[i] == Step::Converged) continue;
        if (last && *last != sh.steps[i]) {
            ++switches;
            if (*last == Step::Up) peak_index = i;  // sample i is the top
        }
        last = sh.steps[i];
    }
    if (switches > 1)
        throw NumericalError("density slope changes sign " + std::to_string(switches) +
                             " times; expected at most one extremum");
    if (switches == 0 || peak_index == 0) return rep;

    const double t_first = trajectory.t_first(), t_last = trajectory.t_last();
    auto slope = [&](double t) {
        const double h = std::min({1e-6, 0.5 * (t - t_first), 0.5 * (t_last - t)});
        if (!(h > 0.0)) throw NumericalError("no room for a slope probe at the trajectory boundary");
        return (density_at(trajectory, source, t + h) - density_at(trajectory, source, t - h)) / (2.0 * h);
    };

    const auto& ts = series.times;
    std::size_t lo_i = peak_index - 1, hi_i = std::min(peak_index + 1, ts.size() - 1);
    double lo = ts[lo_i], hi = ts[hi_i];
    if (lo == t_first) lo = 0.5 * (ts[lo_i] + ts[lo_i + 1]);
    if (hi == t_last) hi = 0.5 * (ts[hi_i] + ts[hi_i - 1]);
    if (!(slope(lo) > 0.0 && slope(hi) < 0.0))
        throw NumericalError("density derivative does not bracket the extremum");
    while (hi - lo > 1e-10) {
        const double mid = 0.5 * (lo + hi);
        if (slope(mid) > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    const double t0 = 0.5 * (lo + hi);
    const auto m = flow::state_at(trajectory, t0);
    rep.kind = ExtremumKind::InteriorMax;
    rep.t0 = t0;
    rep.ratio_at_t0 = m.A() / m.B();
    rep.density_at_t0 = series.vol_factor * density_of(trajectory.geometry, m, source);
    rep.bracket_width = hi - lo;
    return rep;
}

}  // namespace flowlab::norm
