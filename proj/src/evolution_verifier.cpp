#include "flowlab/evolution_verifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "flowlab/errors.hpp"

namespace flowlab::verify {

using frame::inner;
using frame::norm_sq;
using frame::square;

namespace {

double g_of(const DiagonalMetric& g, std::size_t i, std::size_t j) { return i == j ? g[i] : 0.0; }

// g^{pq} A_pa B_qb summed over p = q (the metric is diagonal)
template <typename F>
double raise_sum(const DiagonalMetric& g, F f)
{
    double acc = 0.0;
    for (std::size_t p = 0; p < 3; ++p) acc += g.inverse(p) * f(p);
    return acc;
}

template <std::size_t R>
void add_term(Tensor<R>& total, double& scale, const Tensor<R>& term)
{
    total += term;
    scale = std::max(scale, term.max_abs());
}

double ric_norm_sq(const FrameQuantities& q) { return norm_sq(q.ric, q.metric); }

}  // namespace

Evaluated<Tensor<3>> rhs_c3_evolution(const FrameQuantities& q)
{
    const auto& g = q.metric;
    const auto& C = q.c3;
    const auto& Ric = q.ric;
    const auto& dRic = q.grad_ric;  // dRic(k,i,j) = nabla_k R_ij
    const double R = q.scalar;
    // scalar gradients vanish on homogeneous spaces; kept as explicit (zero) terms
    const auto dRicSq = frame::gradient_of_constant(ric_norm_sq(q));
    const auto dR = q.grad_scalar;

    Evaluated<Tensor<3>> out;
    using I = Tensor<3>::Index;
    auto term = [&](auto f) { return Tensor<3>::generate([&](const I& x) { return f(x[0], x[1], x[2]); }); };

    add_term(out.value, out.term_scale, frame::laplacian(C, q.conn, g));
    add_term(out.value, out.term_scale, term([&](std::size_t i, std::size_t j, std::size_t k) {
                 return raise_sum(g, [&](std::size_t p) { return Ric(p, j) * (C(k, p, i) + C(k, i, p)); });
             }));
    add_term(out.value, out.term_scale, term([&](std::size_t i, std::size_t j, std::size_t k) {
                 return 5.0 * raise_sum(g, [&](std::size_t p) { return Ric(k, p) * C(j, i, p); });
             }));
    add_term(out.value, out.term_scale, term([&](std::size_t i, std::size_t j, std::size_t k) {
                 return raise_sum(g, [&](std::size_t p) { return Ric(p, i) * (C(p, k, j) + C(j, k, p)); });
             }));
    add_term(out.value, out.term_scale, 2.0 * R * C);
    // 2 g^pq g^rs R_pr C_sjq g_ki - 2 g^pq g^rs R_pr C_siq g_kj
    add_term(out.value, out.term_scale, term([&](std::size_t i, std::size_t j, std::size_t k) {
                 double acc = 0.0;
                 for (std::size_t p = 0; p < 3; ++p)
                     for (std::size_t r = 0; r < 3; ++r)
                         acc += g.inverse(p) * g.inverse(r) * Ric(p, r) *
                                (C(r, j, p) * g_of(g, k, i) - C(r, i, p) * g_of(g, k, j));
                 return 2.0 * acc;
             }));
    add_term(out.value, out.term_scale, term([&](std::size_t i, std::size_t j, std::size_t k) {
                 return 0.5 * dRicSq(i) * g_of(g, k, j) - 0.5 * dRicSq(j) * g_of(g, k, i) +
                        0.5 * R * dR(j) * g_of(g, k, i) - 0.5 * R * dR(i) * g_of(g, k, j);
             }));
    add_term(out.value, out.term_scale, term([&](std::size_t i, std::size_t j, std::size_t k) {
                 return raise_sum(g, [&](std::size_t p) {
                     return 2.0 * Ric(p, i) * dRic(j, p, k) - 2.0 * Ric(p, j) * dRic(i, p, k);
                 });
             }));
    add_term(out.value, out.term_scale, term([&](std::size_t i, std::size_t j, std::size_t k) {
                 return Ric(k, j) * dR(i) - Ric(k, i) * dR(j);
             }));
    return out;
}

Evaluated<Tensor<2>> rhs_c2_evolution(const FrameQuantities& q)
{
    const auto& g = q.metric;
    const auto& C = q.c2;
    const auto& Ric = q.ric;
    const auto& dRic = q.grad_ric;
    const auto& eps = q.eps.up;
    const double R = q.scalar;
    const auto dRicSq = frame::gradient_of_constant(ric_norm_sq(q));
    const auto dR = q.grad_scalar;

    Evaluated<Tensor<2>> out;
    using I = Tensor<2>::Index;
    auto term = [&](auto f) { return Tensor<2>::generate([&](const I& x) { return f(x[0], x[1]); }); };

    add_term(out.value, out.term_scale, frame::laplacian(C, q.conn, g));
    add_term(out.value, out.term_scale, term([&](std::size_t i, std::size_t j) {
                 return -5.0 * raise_sum(g, [&](std::size_t p) { return Ric(i, p) * C(p, j); });
             }));
    add_term(out.value, out.term_scale, term([&](std::size_t i, std::size_t j) {
                 return -5.0 * raise_sum(g, [&](std::size_t p) { return C(i, p) * Ric(p, j); });
             }));
    const double c2_dot_ric = inner(C, Ric, g);
    add_term(out.value, out.term_scale, term([&](std::size_t i, std::size_t j) { return 2.0 * c2_dot_ric * g_of(g, i, j); }));
    add_term(out.value, out.term_scale, 4.0 * R * C);
    // g_ik collapses to k = i on a diagonal metric
    add_term(out.value, out.term_scale, term([&](std::size_t i, std::size_t j) {
                 double acc = 0.0;
                 for (std::size_t l = 0; l < 3; ++l)
                     for (std::size_t m = 0; m < 3; ++m)
                         acc += g[i] * eps(i, l, m) *
                                (0.5 * g_of(g, j, m) * dRicSq(l) + 0.5 * R * g_of(g, j, l) * dR(m) + Ric(j, m) * dR(l));
                 return acc;
             }));
    add_term(out.value, out.term_scale, term([&](std::size_t i, std::size_t j) {
                 double acc = 0.0;
                 for (std::size_t l = 0; l < 3; ++l)
                     for (std::size_t m = 0; m < 3; ++m)
                         for (std::size_t p = 0; p < 3; ++p)
                             acc += g.inverse(p) * eps(i, l, m) * Ric(p, l) * dRic(m, p, j);
                 return 2.0 * g[i] * acc;
             }));
    return out;
}

namespace {

struct C2NormTerms {
    double laplacian_norm = 0.0;  // Delta |C2|^2, zero: |C2|^2 is spatially constant
    double grad = 0.0;
    double ric_c2sq = 0.0;
    double scalar = 0.0;
    double div_d = 0.0;
    double div_c3 = 0.0;
    double grad_r = 0.0;
    double sum() const { return laplacian_norm + grad + ric_c2sq + scalar + div_d + div_c3 + grad_r; }
    double max_abs() const
    {
        return std::max({std::abs(laplacian_norm), std::abs(grad), std::abs(ric_c2sq), std::abs(scalar),
                         std::abs(div_d), std::abs(div_c3), std::abs(grad_r)});
    }
};

C2NormTerms c2_norm_terms(const FrameQuantities& q)
{
    const auto s = frame::invariant_scalars(q);
    C2NormTerms t;
    t.grad = -2.0 * s.grad_c2_norm_sq;
    t.ric_c2sq = -16.0 * s.ric_dot_c2_sq;
    t.scalar = 8.0 * s.scalar_curvature * s.c2_norm_sq;
    t.div_d = -4.0 * s.ric_dot_div_d;
    t.div_c3 = 4.0 * s.ric_sq_dot_div_c3;
    t.grad_r = -2.0 * s.grad_r_dot_div_div_c3;
    return t;
}

}  // namespace

Evaluated<double> rhs_c2_norm_evolution(const FrameQuantities& q)
{
    const auto t = c2_norm_terms(q);
    return {t.sum(), t.max_abs()};
}

std::pair<double, double> c2_norm_consistency(const FrameQuantities& q)
{
    const auto p23 = rhs_c2_evolution(q);
    const double a = 2.0 * inner(q.c2, p23.value, q.metric);
    const double b = 4.0 * inner(q.ric, square(q.c2, q.metric), q.metric);
    const auto c = rhs_c2_norm_evolution(q);
    const double scale = std::max({std::abs(a), std::abs(b), std::abs(c.value), c.term_scale});
    return {std::abs(a + b - c.value), scale};
}

Evaluated<double> l1_rate_printed(const FrameQuantities& q)
{
    auto t = c2_norm_terms(q);
    const double n2 = norm_sq(q.c2, q.metric);
    const double w = q.metric.sqrt_det() / std::sqrt(n2);
    // 7 R |C2|^2 in place of 8 R |C2|^2
    t.scalar = 7.0 * q.scalar * n2;
    return {w * t.sum(), w * t.max_abs()};
}

Evaluated<double> l1_rate_corrected(const FrameQuantities& q)
{
    const auto t = c2_norm_terms(q);
    const double n = std::sqrt(norm_sq(q.c2, q.metric));
    const double root = q.metric.sqrt_det();
    const double w = root / (2.0 * n);
    const double vol = q.scalar * n * root;
    return {w * t.sum() - vol, std::max(w * t.max_abs(), std::abs(vol))};
}

ResidualReport make_report(double t, std::vector<double> lhs, std::vector<double> rhs, double term_scale)
{
    if (lhs.size() != rhs.size()) throw InvariantBreach("residual sides differ in size");
    ResidualReport r;
    r.t = t;
    r.scale = term_scale;
    for (std::size_t n = 0; n < lhs.size(); ++n) {
        r.abs_residual = std::max(r.abs_residual, std::abs(lhs[n] - rhs[n]));
        r.scale = std::max({r.scale, std::abs(lhs[n]), std::abs(rhs[n])});
    }
    r.rel_residual = r.abs_residual / std::max(r.scale, kResidualFloor);
    r.lhs = std::move(lhs);
    r.rhs = std::move(rhs);
    return r;
}

double local_time_scale(Geometry geometry, const DiagonalMetric& metric)
{
    const auto rate = flow::flow_rhs(geometry, metric);
    double tau = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < 3; ++i)
        if (rate[i] != 0.0) tau = std::min(tau, metric[i] / std::abs(rate[i]));
    return std::isfinite(tau) ? tau : 1.0;
}

namespace {

FdResult richardson(Geometry geometry, const DiagonalMetric& metric, const Quantity& q, double h)
{
    auto central = [&](double step) {
        const auto plus = q(flow::advance(geometry, metric, step));
        const auto minus = q(flow::advance(geometry, metric, -step));
        std::vector<double> d(plus.size());
        for (std::size_t n = 0; n < d.size(); ++n) d[n] = (plus[n] - minus[n]) / (2.0 * step);
        return d;
    };
    const auto d0 = central(h);
    const auto d1 = central(0.5 * h);
    const auto d2 = central(0.25 * h);
    FdResult r;
    r.h = h;
    r.value.resize(d0.size());
    for (std::size_t n = 0; n < d0.size(); ++n) {
        const double r10 = (4.0 * d1[n] - d0[n]) / 3.0;
        const double r11 = (4.0 * d2[n] - d1[n]) / 3.0;
        r.value[n] = (16.0 * r11 - r10) / 15.0;
        r.error_estimate = std::max(r.error_estimate, std::abs(r.value[n] - r11));
    }
    return r;
}

double default_step(Geometry geometry, const DiagonalMetric& metric)
{
    return std::max(1e-6, 1e-5 * local_time_scale(geometry, metric));
}

}  // namespace

FdResult fd_state_derivative(Geometry geometry, const DiagonalMetric& metric, const Quantity& q, FdOptions opts)
{
    const double h = opts.h > 0.0 ? opts.h : default_step(geometry, metric);
    FdResult best = richardson(geometry, metric, q, h);
    if (opts.max_error <= 0.0 || best.error_estimate <= opts.max_error) return best;
    for (double factor : {4.0, 0.25}) {
        auto r = richardson(geometry, metric, q, h * factor);
        if (r.error_estimate <= opts.max_error) return r;
        if (r.error_estimate < best.error_estimate) best = std::move(r);
    }
    throw NumericalError("finite-difference error estimate " + frame::format_double(best.error_estimate) +
                         " exceeds the allowed " + frame::format_double(opts.max_error));
}

FdResult fd_time_derivative(const FlowTrajectory& trajectory, const Quantity& q, double t, FdOptions opts)
{
    const auto metric = flow::state_at(trajectory, t);
    const double h = opts.h > 0.0 ? opts.h : default_step(trajectory.geometry, metric);
    // the retry may use 4h
    const double reach = (opts.max_error > 0.0 ? 4.0 : 1.0) * h;
    if (t - 2.0 * reach < trajectory.t_first() || t + 2.0 * reach > trajectory.t_last())
        throw NumericalError("insufficient margin for a finite difference at t = " + frame::format_double(t));
    opts.h = h;
    return fd_state_derivative(trajectory.geometry, metric, q, opts);
}

std::vector<double> probe_times(const FlowTrajectory& trajectory, std::size_t n)
{
    std::vector<double> ts;
    const double a = trajectory.t_first(), b = trajectory.t_last();
    for (std::size_t k = 1; k <= n; ++k) ts.push_back(a + (b - a) * static_cast<double>(k) / static_cast<double>(n + 1));
    return ts;
}

namespace {

template <std::size_t R>
std::vector<double> flat(const Tensor<R>& t)
{
    return {t.data().begin(), t.data().end()};
}

double oracle_density(const FrameQuantities& q) { return std::sqrt(norm_sq(q.c2, q.metric)) * q.metric.sqrt_det(); }

}  // namespace

L1RatePair adjudicate_l1_rate(const FlowTrajectory& trajectory, double t, double density_slack)
{
    const auto triple = frame::StructureTriple::of(trajectory.geometry);
    const auto metric = flow::state_at(trajectory, t);
    const auto q = frame::analyze(metric, triple);
    if (oracle_density(q) <= density_slack)
        throw HypothesisViolated("the L1 density vanishes at t = " + frame::format_double(t));
    const auto printed = l1_rate_printed(q);
    const auto corrected = l1_rate_corrected(q);
    const double scale = std::max(printed.term_scale, corrected.term_scale);
    const auto fd = fd_time_derivative(
        trajectory, [&](const DiagonalMetric& m) { return std::vector<double>{oracle_density(frame::analyze(m, triple))}; },
        t, {0.0, 1e-7 * scale});
    return {make_report(t, fd.value, {printed.value}, printed.term_scale),
            make_report(t, fd.value, {corrected.value}, corrected.term_scale)};
}

std::string_view to_string(L1RateVerdict v)
{
    switch (v) {
    case L1RateVerdict::Printed: return "printed";
    case L1RateVerdict::Corrected: return "corrected";
    case L1RateVerdict::Neither: return "neither";
    case L1RateVerdict::Both: return "both";
    }
    return "?";
}

ProbeResult probe(const FlowTrajectory& trajectory, double t, double tolerance)
{
    const auto geometry = trajectory.geometry;
    const auto triple = frame::StructureTriple::of(geometry);
    const auto metric = flow::state_at(trajectory, t);
    const auto q = frame::analyze(metric, triple);
    const double fd_budget = 0.1 * tolerance;

    ProbeResult r;
    r.t = t;

    const auto p22 = rhs_c3_evolution(q);
    const auto p23 = rhs_c2_evolution(q);
    const auto c24 = rhs_c2_norm_evolution(q);

    auto derivative = [&](const Quantity& f, double scale) {
        return fd_time_derivative(trajectory, f, t, {0.0, fd_budget * std::max(scale, kResidualFloor)}).value;
    };
    auto scale_of = [](const auto& ev, double extra) { return std::max(ev.term_scale, extra); };

    r.c3 = make_report(t,
                           derivative([&](const DiagonalMetric& m) { return flat(frame::analyze(m, triple).c3); },
                                      scale_of(p22, p22.value.max_abs())),
                           flat(p22.value), p22.term_scale);
    r.c2 = make_report(t,
                           derivative([&](const DiagonalMetric& m) { return flat(frame::analyze(m, triple).c2); },
                                      scale_of(p23, p23.value.max_abs())),
                           flat(p23.value), p23.term_scale);
    r.c2_norm = make_report(t,
                          derivative(
                              [&](const DiagonalMetric& m) {
                                  const auto qq = frame::analyze(m, triple);
                                  return std::vector<double>{norm_sq(qq.c2, qq.metric)};
                              },
                              scale_of(c24, std::abs(c24.value))),
                          {c24.value}, c24.term_scale);

    const double det = metric.det();
    const double R = q.scalar;
    r.det_identity = make_report(
        t, derivative([](const DiagonalMetric& m) { return std::vector<double>{m.det()}; }, std::abs(2.0 * R * det)),
        {-2.0 * R * det}, 0.0);
    r.inv_sqrt_det_identity = make_report(
        t,
        derivative([](const DiagonalMetric& m) { return std::vector<double>{1.0 / m.sqrt_det()}; },
                   std::abs(R / std::sqrt(det))),
        {R / std::sqrt(det)}, 0.0);

    const auto [cres, cscale] = c2_norm_consistency(q);
    r.consistency_rel = cres / std::max(cscale, kResidualFloor);
    const auto s = frame::invariant_scalars(q);
    r.second_div_identity_rel = s.second_div_identity_residual / std::max(s.second_div_identity_scale, kResidualFloor);

    if (oracle_density(q) > 1e-10) r.l1_rate = adjudicate_l1_rate(trajectory, t);
    return r;
}

TrajectoryVerification verify_trajectory(const FlowTrajectory& trajectory, std::size_t n_probes, double tolerance)
{
    TrajectoryVerification v;
    v.geometry = trajectory.geometry;
    bool printed_ok = true, corrected_ok = true;
    for (double t : probe_times(trajectory, n_probes)) {
        auto p = probe(trajectory, t, tolerance);
        v.max_c3 = std::max(v.max_c3, p.c3.rel_residual);
        v.max_c2 = std::max(v.max_c2, p.c2.rel_residual);
        v.max_c2_norm = std::max(v.max_c2_norm, p.c2_norm.rel_residual);
        v.max_volume = std::max({v.max_volume, p.det_identity.rel_residual, p.inv_sqrt_det_identity.rel_residual});
        v.max_consistency = std::max(v.max_consistency, p.consistency_rel);
        v.max_second_div = std::max(v.max_second_div, p.second_div_identity_rel);
        if (p.l1_rate) {
            v.l1_applicable = true;
            v.max_l1_rate_printed = std::max(v.max_l1_rate_printed, p.l1_rate->printed.rel_residual);
            v.max_l1_rate_corrected = std::max(v.max_l1_rate_corrected, p.l1_rate->corrected.rel_residual);
            printed_ok = printed_ok && p.l1_rate->printed.rel_residual <= tolerance;
            corrected_ok = corrected_ok && p.l1_rate->corrected.rel_residual <= tolerance;
        }
        v.probes.push_back(std::move(p));
    }
    if (v.l1_applicable) {
        v.verdict = printed_ok && corrected_ok ? L1RateVerdict::Both
                    : printed_ok               ? L1RateVerdict::Printed
                    : corrected_ok             ? L1RateVerdict::Corrected
                                               : L1RateVerdict::Neither;
    }
    return v;
}

L1RateVerdict combine(const std::vector<TrajectoryVerification>& runs)
{
    std::optional<L1RateVerdict> common;
    for (const auto& r : runs) {
        if (!r.l1_applicable) continue;
        if (!common)
            common = r.verdict;
        else if (*common != r.verdict)
            return L1RateVerdict::Neither;
    }
    return common.value_or(L1RateVerdict::Neither);
}

}  // namespace flowlab::verify
