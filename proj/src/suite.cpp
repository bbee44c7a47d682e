#include "flowlab/suite.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <thread>

#include "flowlab/errors.hpp"

namespace flowlab::suite {

using frame::StructureTriple;

std::vector<DiagonalMetric> random_metrics(Geometry geometry, std::size_t n, std::uint64_t seed, double lo, double hi)
{
    if (!(lo > 0.0 && hi > lo)) throw DomainError("random_metrics needs 0 < lo < hi");
    // mix the geometry into the seed so each geometry gets its own stream
    std::mt19937_64 rng(seed * 6364136223846793005ULL + static_cast<std::uint64_t>(geometry) + 1);
    std::uniform_real_distribution<double> log_u(std::log(lo), std::log(hi));
    const bool b_equals_c = geometry == Geometry::SU2 || geometry == Geometry::SL2R;
    std::vector<DiagonalMetric> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double a = std::exp(log_u(rng));
        const double b = std::exp(log_u(rng));
        const double c = std::exp(log_u(rng));
        out.emplace_back(a, b, b_equals_c ? b : c);
    }
    return out;
}

namespace {

double rel(double residual, double scale) { return scale > 0.0 ? residual / scale : residual; }

}  // namespace

std::vector<NamedValue> identity_residuals(const DiagonalMetric& g, const StructureTriple& triple)
{
    const auto q = frame::analyze(g, triple);
    const auto& C2 = q.c2;
    const auto& C3 = q.c3;
    std::vector<NamedValue> out;

    double sym = 0.0;
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) sym = std::max(sym, std::abs(C2(i, j) - C2(j, i)));
    out.push_back({"c2_symmetry", rel(sym, C2.max_abs())});

    double trace = 0.0, trace_scale = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        trace += C2(i, i) * g.inverse(i);
        trace_scale = std::max(trace_scale, std::abs(C2(i, i) * g.inverse(i)));
    }
    out.push_back({"c2_trace", rel(std::abs(trace), trace_scale)});

    const auto dC2 = frame::covariant_derivative(C2, q.conn);
    const auto divC2 = frame::divergence(C2, q.conn, g);
    double div_scale = 0.0;
    for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t j = 0; j < 3; ++j) div_scale = std::max(div_scale, std::abs(g.inverse(a) * dC2(a, a, j)));
    out.push_back({"c2_divergence", rel(divC2.max_abs(), div_scale)});

    double anti = 0.0, cyc = 0.0;
    std::array<double, 3> traces{};
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            for (std::size_t k = 0; k < 3; ++k) {
                anti = std::max(anti, std::abs(C3(i, j, k) + C3(j, i, k)));
                cyc = std::max(cyc, std::abs(C3(i, j, k) + C3(j, k, i) + C3(k, i, j)));
            }
    double c3_trace_scale = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
        double t01 = 0.0, t02 = 0.0, t12 = 0.0;
        for (std::size_t a = 0; a < 3; ++a) {
            t01 += g.inverse(a) * C3(a, a, k);
            t02 += g.inverse(a) * C3(a, k, a);
            t12 += g.inverse(a) * C3(k, a, a);
            c3_trace_scale = std::max({c3_trace_scale, std::abs(g.inverse(a) * C3(a, a, k)),
                                       std::abs(g.inverse(a) * C3(a, k, a)), std::abs(g.inverse(a) * C3(k, a, a))});
        }
        traces = {std::max(traces[0], std::abs(t01)), std::max(traces[1], std::abs(t02)),
                  std::max(traces[2], std::abs(t12))};
    }
    out.push_back({"c3_antisymmetry", rel(anti, C3.max_abs())});
    out.push_back({"c3_cyclic", rel(cyc, C3.max_abs())});
    out.push_back({"c3_trace_12", rel(traces[0], c3_trace_scale)});
    out.push_back({"c3_trace_13", rel(traces[1], c3_trace_scale)});
    out.push_back({"c3_trace_23", rel(traces[2], c3_trace_scale)});

    const double n2 = std::sqrt(frame::norm_sq(C2, g));
    const double n3 = std::sqrt(frame::norm_sq(C3, g));
    out.push_back({"c3_norm_sqrt2_c2_norm", rel(std::abs(n3 - std::sqrt(2.0) * n2), std::sqrt(2.0) * n2)});

    const auto& eu = q.eps.up;
    const auto& ed = q.eps.down;
    auto delta = [](std::size_t a, std::size_t b) { return a == b ? 1.0 : 0.0; };
    double e1 = 0.0, e2 = 0.0, full = 0.0;
    // eps_ijk eps^{ilm} = d_j^l d_k^m - d_j^m d_k^l
    for (std::size_t j = 0; j < 3; ++j)
        for (std::size_t k = 0; k < 3; ++k)
            for (std::size_t l = 0; l < 3; ++l)
                for (std::size_t m = 0; m < 3; ++m) {
                    double v = 0.0;
                    for (std::size_t i = 0; i < 3; ++i) v += ed(i, j, k) * eu(i, l, m);
                    e1 = std::max(e1, std::abs(v - (delta(j, l) * delta(k, m) - delta(j, m) * delta(k, l))));
                }
    // eps_ijk eps^{ijl} = 2 d_k^l
    for (std::size_t k = 0; k < 3; ++k)
        for (std::size_t l = 0; l < 3; ++l) {
            double v = 0.0;
            for (std::size_t i = 0; i < 3; ++i)
                for (std::size_t j = 0; j < 3; ++j) v += ed(i, j, k) * eu(i, j, l);
            e2 = std::max(e2, std::abs(v - 2.0 * delta(k, l)));
        }
    for (std::size_t n = 0; n < Tensor<3>::size; ++n) full += ed[n] * eu[n];
    out.push_back({"eps_contract_one_index", e1});
    out.push_back({"eps_contract_two_indices", e2});
    out.push_back({"eps_contract_all", std::abs(full - 6.0) / 6.0});

    const double gamma_scale = q.conn.mixed.max_abs();
    const auto d_eps = frame::covariant_derivative(ed, q.conn);
    out.push_back({"grad_eps", rel(d_eps.max_abs(), gamma_scale * ed.max_abs())});
    const auto d_g = frame::covariant_derivative(g.as_tensor(), q.conn);
    out.push_back({"grad_metric", rel(d_g.max_abs(), gamma_scale * g.as_tensor().max_abs())});

    const auto s = frame::invariant_scalars(q);
    out.push_back({"second_divergence", rel(s.second_div_identity_residual, s.second_div_identity_scale)});
    return out;
}

ClosedFormComparison compare_closed_forms(Geometry geometry, const std::vector<DiagonalMetric>& metrics)
{
    ClosedFormComparison r;
    r.ratio_min = std::numeric_limits<double>::infinity();
    r.ratio_max = 0.0;
    const auto triple = StructureTriple::of(geometry);
    const auto sc = frame::structure_constants(triple);
    for (const auto& m : metrics) {
        const auto oracle = frame::cotton_york(m, sc);
        const auto closed = norm::cotton_york_closed(geometry, m);
        double diff = 0.0;
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j)
                diff = std::max(diff, std::abs(oracle(i, j) - (i == j ? closed[i] : 0.0)));
        r.max_cy_rel = std::max(r.max_cy_rel, rel(diff, oracle.max_abs()));

        const double d_oracle = norm::l1_density_oracle(m, triple);
        const double d_closed = norm::l1_density_closed(geometry, m);
        if (d_closed > 0.0) {
            const double ratio = d_oracle / d_closed;
            r.ratio_min = std::min(r.ratio_min, ratio);
            r.ratio_max = std::max(r.ratio_max, ratio);
        }
        r.max_density_rel = std::max(r.max_density_rel, rel(std::abs(d_oracle - d_closed), d_oracle));
        ++r.samples;
    }
    if (r.ratio_max == 0.0) r.ratio_min = 0.0;
    return r;
}

std::vector<InitialDatum> verification_data()
{
    return {{Geometry::SU2, {0.25, 1.0, 1.0}, 1.0},
            {Geometry::IsomR2, {1.0, 2.0, 3.0}, 1.0},
            {Geometry::SL2R, {0.5, 1.0, 1.0}, 1.0},
            {Geometry::Heisenberg, {1.0, 1.0, 1.0}, 1.0},
            {Geometry::IsomR11, {1.0, 2.0, 3.0}, 1.0}};
}

norm::Verdict table1_expectation(Geometry geometry, const DiagonalMetric& m)
{
    using norm::Verdict;
    switch (geometry) {
    case Geometry::SU2: {
        if (!norm::closed_form_supported(geometry, m)) return Verdict::Indeterminate;
        const double r = m.A() / m.B();
        if (std::abs(r - 1.0) <= 1e-12) return Verdict::IdenticallyZero;
        return r < 0.5 ? Verdict::HasInteriorMax : Verdict::StrictlyDecreasing;
    }
    case Geometry::IsomR2:
        return std::abs(m.A() - m.B()) <= 1e-12 * m.A() ? Verdict::IdenticallyZero : Verdict::StrictlyDecreasing;
    case Geometry::SL2R:
    case Geometry::Heisenberg:
    case Geometry::IsomR11: return Verdict::StrictlyDecreasing;
    case Geometry::R3: return Verdict::IdenticallyZero;
    }
    return Verdict::Indeterminate;
}

std::vector<SweepItem> table1_items()
{
    std::vector<SweepItem> items;
    auto add = [&](std::string row, Geometry g, DiagonalMetric m, double stride) {
        items.push_back({std::move(row), g, m, 100.0, stride, table1_expectation(g, m)});
    };
    const char* su2_max = "SU(2): unique local extremum if A0/B0 < 1/2";
    const char* su2_dec = "SU(2): decreasing to 0 if 1/2 <= A0/B0 < 1 or 1 < A0/B0";
    add(su2_max, Geometry::SU2, {0.25, 1.0, 1.0}, 1e-3);
    add(su2_dec, Geometry::SU2, {0.5, 1.0, 1.0}, 1e-3);
    add(su2_dec, Geometry::SU2, {0.6, 1.0, 1.0}, 1e-3);
    add(su2_dec, Geometry::SU2, {1.5, 1.0, 1.0}, 1e-3);
    add("SU(2): zero if A0 = B0", Geometry::SU2, {1.0, 1.0, 1.0}, 1e-3);
    add("Isom(R2): decreasing to 0 if A0 != B0", Geometry::IsomR2, {1.0, 2.0, 3.0}, 1e-2);
    add("Isom(R2): zero if A0 = B0", Geometry::IsomR2, {2.0, 2.0, 3.0}, 1e-2);
    add("SL(2,R): decreasing to 0", Geometry::SL2R, {0.5, 1.0, 1.0}, 1e-2);
    add("Heisenberg: decreasing to 0", Geometry::Heisenberg, {1.0, 1.0, 1.0}, 1e-2);
    add("Heisenberg: decreasing to 0", Geometry::Heisenberg, {1.0, 2.0, 3.0}, 1e-2);
    add("Isom(R1,1): decreasing to 0", Geometry::IsomR11, {1.0, 2.0, 3.0}, 1e-2);
    add("Isom(R1,1): decreasing to 0", Geometry::IsomR11, {1.0, 1.0, 1.0}, 1e-2);
    add("R3: zero", Geometry::R3, {2.0, 3.0, 4.0}, 1e-2);
    return items;
}

SweepOutcome run_sweep_item(const SweepItem& item)
{
    SweepOutcome out;
    out.item = item;
    try {
        flow::FlowParams p;
        p.t_end = item.t_end;
        p.sample_stride = item.sample_stride;
        const auto traj = flow::integrate_or_throw(item.geometry, item.initial, p);
        out.stop_reason = traj.stop_reason;
        out.t_final = traj.t_last();
        const auto series = norm::norm_series(traj, norm::DensitySource::Oracle);
        out.verdict = norm::monotonicity_verdict(series);
        out.peak = *std::max_element(series.density.begin(), series.density.end());
        out.terminal = series.density.back();
        if (out.verdict == norm::Verdict::HasInteriorMax) {
            const auto ext = norm::find_extremum(series, traj);
            out.t0 = ext.t0;
            out.ratio_at_t0 = ext.ratio_at_t0;
        }
        out.match = out.verdict == item.expected;
    } catch (const Error& e) {
        out.error = e.what();
        out.match = false;
    }
    return out;
}

std::vector<SweepOutcome> run_sweep(const std::vector<SweepItem>& items, unsigned jobs)
{
    std::vector<SweepOutcome> results(items.size());
    const unsigned workers = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(items.size())));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < items.size(); i = next++) results[i] = run_sweep_item(items[i]);
    };
    if (workers == 1) {
        work();
        return results;
    }
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
    return results;
}

bool VerificationReport::all_pass() const
{
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

const Check* VerificationReport::first_failure() const
{
    for (const auto& c : checks)
        if (!c.pass) return &c;
    return nullptr;
}

namespace {

void add_check(VerificationReport& r, std::string name, double value, double tol)
{
    r.checks.push_back({std::move(name), value, tol, std::isfinite(value) && value <= tol});
}

}  // namespace

VerificationReport run_verification(std::uint64_t seed, std::size_t samples)
{
    VerificationReport r;
    r.seed = seed;
    r.random_samples = samples;
    const std::string sep = ".";

    for (Geometry g : frame::kAllGeometries) {
        const std::string name(frame::to_string(g));
        const auto metrics = random_metrics(g, samples, seed);
        if (g != Geometry::R3) {
            const auto cmp = compare_closed_forms(g, metrics);
            add_check(r, "closed_form" + sep + name + sep + "cotton_york", cmp.max_cy_rel, 1e-10);
            if (g == Geometry::Heisenberg) {
                r.heisenberg_ratio_min = cmp.ratio_min;
                r.heisenberg_ratio_max = cmp.ratio_max;
                add_check(r, "closed_form.heisenberg.density_ratio_spread",
                          (cmp.ratio_max - cmp.ratio_min) / cmp.ratio_min, 1e-10);
            } else {
                add_check(r, "closed_form" + sep + name + sep + "density", cmp.max_density_rel, 1e-10);
            }
        }
        std::vector<double> worst;
        std::vector<std::string> names;
        for (const auto& m : metrics) {
            const auto res = identity_residuals(m, StructureTriple::of(g));
            if (names.empty()) {
                for (const auto& nv : res) names.push_back(nv.name);
                worst.assign(res.size(), 0.0);
            }
            for (std::size_t i = 0; i < res.size(); ++i) worst[i] = std::max(worst[i], res[i].value);
        }
        for (std::size_t i = 0; i < names.size(); ++i)
            add_check(r, "identity" + sep + name + sep + names[i], worst[i],
                      names[i] == "second_divergence" ? 1e-10 : 1e-12);
    }

    for (const auto& d : verification_data()) {
        flow::FlowParams p;
        p.t_end = d.t_end;
        const auto traj = flow::integrate_or_throw(d.geometry, d.initial, p);
        auto v = verify::verify_trajectory(traj);
        const std::string name(frame::to_string(d.geometry));
        add_check(r, "evolution" + sep + name + sep + "c3", v.max_c3, 1e-6);
        add_check(r, "evolution" + sep + name + sep + "c2", v.max_c2, 1e-6);
        add_check(r, "evolution" + sep + name + sep + "c2_norm_sq", v.max_c2_norm, 1e-6);
        add_check(r, "evolution" + sep + name + sep + "volume", v.max_volume, 1e-6);
        add_check(r, "evolution" + sep + name + sep + "c2_to_norm_algebra", v.max_consistency, 1e-10);
        add_check(r, "evolution" + sep + name + sep + "second_divergence", v.max_second_div, 1e-10);
        r.trajectories.push_back(std::move(v));
    }
    r.l1_verdict = verify::combine(r.trajectories);
    bool unique = r.l1_verdict == verify::L1RateVerdict::Printed ||
                  r.l1_verdict == verify::L1RateVerdict::Corrected;
    for (const auto& t : r.trajectories)
        if (t.l1_applicable && t.verdict != r.l1_verdict) unique = false;
    add_check(r, "l1_evolution.unique_verdict", unique ? 0.0 : 1.0, 0.0);

    // spot values at the unit Heisenberg state
    const DiagonalMetric unit(1.0, 1.0, 1.0);
    const auto heis = StructureTriple::of(Geometry::Heisenberg);
    auto spot = [&](const std::string& name, const verify::Quantity& q, double expected) {
        const auto fd = verify::fd_state_derivative(Geometry::Heisenberg, unit, q, {});
        add_check(r, "heisenberg_spot." + name, std::abs(fd.value[0] - expected) / std::abs(expected), 1e-6);
    };
    spot("d_c231", [&](const DiagonalMetric& m) { return std::vector<double>{frame::analyze(m, heis).c3(1, 2, 0)}; },
         -128.0);
    spot("d_c11", [&](const DiagonalMetric& m) { return std::vector<double>{frame::analyze(m, heis).c2(0, 0)}; },
         -176.0);
    spot("d_c2_norm_sq",
         [&](const DiagonalMetric& m) {
             const auto q = frame::analyze(m, heis);
             return std::vector<double>{frame::norm_sq(q.c2, m)};
         },
         -3456.0);
    spot("d_density", [&](const DiagonalMetric& m) { return std::vector<double>{norm::l1_density_oracle(m, heis)}; },
         -64.0 * std::sqrt(6.0));
    return r;
}

}  // namespace flowlab::suite
