#include "flowlab/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <unistd.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "flowlab/evolution_verifier.hpp"
#include "flowlab/homogeneous_flow.hpp"
#include "flowlab/norm_analysis.hpp"
#include "flowlab/rosenau_flow.hpp"
#include "flowlab/suite.hpp"

namespace flowlab::cli {

using json = nlohmann::ordered_json;
using frame::DiagonalMetric;
using frame::Geometry;
using frame::format_double;

namespace {

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

double parse_number(const std::string& key, const std::string& text)
{
    const std::string t = trim(text);
    double v = 0.0;
    const char* first = t.data();
    const char* last = t.data() + t.size();
    if (!t.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (t.empty() || ec != std::errc() || ptr != last)
        throw ConfigError("malformed number for " + key + ": '" + text + "'");
    if (!std::isfinite(v)) throw ConfigError(key + " must be finite");
    return v;
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& text)
{
    const std::string t = trim(text);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
        throw ConfigError("malformed non-negative integer for " + key + ": '" + text + "'");
    return v;
}

std::vector<double> parse_list(const std::string& key, const std::string& text)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_number(key, item));
    if (out.empty()) throw ConfigError(key + " needs at least one value");
    return out;
}

}  // namespace

const std::vector<std::string>& known_keys()
{
    static const std::vector<std::string> keys{"geometry", "A0",     "B0",      "C0",         "t_end",
                                               "rel_tol",  "abs_tol", "sample_stride", "t_grid", "slice_t",
                                               "output",   "vol_factor", "seed",   "samples",    "ratios",
                                               "jobs"};
    return keys;
}

KeyValues parse_key_values(std::string_view text)
{
    KeyValues kv;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string body = trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key=value, got '" + body + "'");
        const std::string key = trim(std::string_view(body).substr(0, eq));
        const std::string value = trim(std::string_view(body).substr(eq + 1));
        const auto& keys = known_keys();
        if (std::find(keys.begin(), keys.end(), key) == keys.end())
            throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        if (kv.count(key)) throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        kv[key] = value;
    }
    return kv;
}

ExperimentConfig make_config(const std::string& command, const KeyValues& file, const KeyValues& flags, bool force,
                             bool table1, std::ostream& warnings)
{
    KeyValues merged = file;
    for (const auto& [key, value] : flags) {
        const auto it = file.find(key);
        if (it != file.end() && trim(it->second) != trim(value)) {
            if (!force)
                throw ConfigError("conflicting values for " + key + ": config file has '" + it->second +
                                  "', flag has '" + value + "' (pass --force to let the flag win)");
            warnings << "warning: " << key << " from the command line ('" << value << "') overrides the config file ('"
                     << it->second << "')\n";
        }
        merged[key] = value;
    }

    ExperimentConfig c;
    c.command = command;
    c.table1 = table1;
    c.output_path = command;
    if (command == "simulate") c.t_end = 10.0;
    if (command == "sweep") c.t_end = 100.0;
    if (const char* env = std::getenv("FLOWLAB_JOBS"); env && *env)
        c.jobs = static_cast<unsigned>(parse_unsigned("FLOWLAB_JOBS", env));

    auto get = [&](const char* key) -> const std::string* {
        const auto it = merged.find(key);
        return it == merged.end() ? nullptr : &it->second;
    };
    if (auto v = get("geometry")) {
        try {
            c.geometry = frame::parse_geometry(trim(*v));
        } catch (const DomainError& e) {
            throw ConfigError(e.what());
        }
    }
    if (auto v = get("A0")) c.A0 = parse_number("A0", *v);
    if (auto v = get("B0")) c.B0 = parse_number("B0", *v);
    if (auto v = get("C0")) c.C0 = parse_number("C0", *v);
    if (auto v = get("t_end")) c.t_end = parse_number("t_end", *v);
    if (auto v = get("rel_tol")) c.rel_tol = parse_number("rel_tol", *v);
    if (auto v = get("abs_tol")) c.abs_tol = parse_number("abs_tol", *v);
    if (auto v = get("sample_stride")) c.sample_stride = parse_number("sample_stride", *v);
    if (auto v = get("t_grid")) c.t_grid = parse_list("t_grid", *v);
    if (auto v = get("slice_t")) c.slice_t = parse_number("slice_t", *v);
    if (auto v = get("output")) c.output_path = trim(*v);
    if (auto v = get("vol_factor")) c.vol_factor = parse_number("vol_factor", *v);
    if (auto v = get("seed")) c.seed = parse_unsigned("seed", *v);
    if (auto v = get("samples")) c.samples = parse_unsigned("samples", *v);
    if (auto v = get("ratios")) c.ratios = parse_list("ratios", *v);
    if (auto v = get("jobs")) c.jobs = static_cast<unsigned>(parse_unsigned("jobs", *v));

    // validation
    for (auto [name, value] : {std::pair{"A0", c.A0}, std::pair{"B0", c.B0}, std::pair{"C0", c.C0}})
        if (value && !(*value > 0.0)) throw ConfigError(std::string(name) + " must be positive");
    flow::FlowParams p;
    p.rel_tol = c.rel_tol;
    p.abs_tol = c.abs_tol;
    p.sample_stride = c.sample_stride;
    p.t_end = c.t_end;
    try {
        p.validate();
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    for (double t : c.t_grid)
        if (!(t < 0.0)) throw ConfigError("t_grid values must be negative");
    if (!(c.slice_t < 0.0)) throw ConfigError("slice_t must be negative");
    if (c.vol_factor && !(*c.vol_factor > 0.0)) throw ConfigError("vol_factor must be positive");
    if (c.samples == 0) throw ConfigError("samples must be at least 1");
    if (c.jobs == 0) throw ConfigError("jobs must be at least 1");
    for (double r : c.ratios)
        if (!(r > 0.0)) throw ConfigError("ratios must be positive");
    if (c.output_path.empty()) throw ConfigError("output must not be empty");

    const bool needs_metric = command == "simulate" || command == "oracle-check";
    if (needs_metric) {
        if (!c.geometry) throw ConfigError(command + " requires geometry");
        if (!c.A0 || !c.B0 || !c.C0) throw ConfigError(command + " requires A0, B0 and C0");
    }
    if (command == "sweep" && !c.table1) {
        if (!c.geometry) throw ConfigError("sweep requires geometry (or --table1)");
        if (c.ratios.empty()) throw ConfigError("sweep requires ratios (or --table1)");
    }
    return c;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content)
{
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw Error("cannot open " + tmp.string() + " for writing");
        f << content;
        f.flush();
        if (!f) {
            std::filesystem::remove(tmp);
            throw Error("failed writing " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

namespace {

std::string with_suffix(const std::string& prefix, const std::string& suffix) { return prefix + suffix; }

json nullable(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string csv_number(double v) { return format_double(v); }

double oracle_or_nan(const std::function<double()>& f)
{
    try {
        return f();
    } catch (const UnsupportedBranch&) {
        return std::nan("");
    }
}

// ---- simulate ----------------------------------------------------------

void check_trajectory(const flow::FlowTrajectory& traj)
{
    const auto triple = frame::StructureTriple::of(traj.geometry);
    const auto sc = frame::structure_constants(triple);
    double prev = -std::numeric_limits<double>::infinity();
    for (const auto& s : traj.samples) {
        if (!(s.t > prev)) throw InvariantBreach("sample times not strictly increasing at t = " + format_double(s.t));
        prev = s.t;
        const auto rate = flow::flow_rhs(traj.geometry, s.metric);
        const auto ric = frame::ricci(s.metric, sc).ric;
        for (std::size_t i = 0; i < 3; ++i) {
            const double expect = -2.0 * ric(i, i);
            const double scale = std::max({std::abs(expect), std::abs(rate[i]), 1e-300});
            if (std::abs(rate[i] - expect) > 1e-9 * scale + 1e-12)
                throw InvariantBreach("ODE right-hand side disagrees with -2 Ric at t = " + format_double(s.t));
        }
    }
}

int run_simulate(const ExperimentConfig& c, std::ostream& out)
{
    const DiagonalMetric initial(*c.A0, *c.B0, *c.C0);
    const Geometry g = *c.geometry;
    flow::FlowParams p;
    p.rel_tol = c.rel_tol;
    p.abs_tol = c.abs_tol;
    p.sample_stride = c.sample_stride;
    p.t_end = c.t_end;
    const auto traj = flow::integrate_or_throw(g, initial, p);
    check_trajectory(traj);

    const double vol = c.vol_factor.value_or(1.0);
    const auto series = norm::norm_series(traj, norm::DensitySource::Oracle, vol);
    const auto verdict = norm::monotonicity_verdict(series);
    const auto ext = norm::find_extremum(series, traj);

    std::ostringstream csv;
    csv << "t,A,B,C,R,density_closed,density_oracle\n";
    const auto sc = frame::structure_constants(frame::StructureTriple::of(g));
    for (std::size_t i = 0; i < traj.samples.size(); ++i) {
        const auto& s = traj.samples[i];
        const double R = frame::ricci(s.metric, sc).scalar;
        csv << csv_number(s.t) << ',' << csv_number(s.metric.A()) << ',' << csv_number(s.metric.B()) << ','
            << csv_number(s.metric.C()) << ',' << csv_number(R) << ',';
        if (norm::closed_form_supported(g, s.metric)) csv << csv_number(vol * norm::l1_density_closed(g, s.metric));
        csv << ',' << csv_number(series.density[i]) << '\n';
    }

    json j;
    j["schema"] = 1;
    j["command"] = "simulate";
    j["geometry"] = std::string(frame::to_string(g));
    j["initial"] = {{"A0", initial.A()}, {"B0", initial.B()}, {"C0", initial.C()}};
    j["params"] = {{"t_end", p.t_end},         {"rel_tol", p.rel_tol},   {"abs_tol", p.abs_tol},
                   {"sample_stride", p.sample_stride}, {"min_component", p.min_component}, {"vol_factor", vol}};
    j["stop_reason"] = std::string(flow::to_string(traj.stop_reason));
    j["T_estimate"] = nullable(traj.t_estimate);
    j["T_estimate_width"] = nullable(traj.t_estimate_width);
    j["t_final"] = traj.t_last();
    j["samples"] = traj.samples.size();
    j["accepted_steps"] = traj.accepted_steps;
    j["rejected_steps"] = traj.rejected_steps;
    j["extremum"] = {{"kind", std::string(norm::to_string(ext.kind))},
                     {"t0", nullable(ext.t0)},
                     {"ratio", nullable(ext.ratio_at_t0)},
                     {"density", nullable(ext.density_at_t0)}};
    j["verdict"] = std::string(norm::to_string(verdict));
    j["conserved_max_drift"] = flow::max_conserved_drift(traj);
    json conserved = json::array();
    const auto q0 = flow::conserved_quantities(g, traj.samples.front().metric);
    const auto q1 = flow::conserved_quantities(g, traj.samples.back().metric);
    for (std::size_t i = 0; i < q0.size(); ++i)
        conserved.push_back({{"name", q0[i].name}, {"initial", q0[i].value}, {"final", q1[i].value}});
    j["conserved"] = conserved;
    json diag = json::object();
    for (const auto& d : flow::asymptote_probe(traj).diagnostics) diag[d.name] = d.value;
    j["asymptotes"] = diag;
    const double peak = *std::max_element(series.density.begin(), series.density.end());
    j["density"] = {{"initial", series.density.front()}, {"peak", peak}, {"terminal", series.density.back()}};
    if (norm::closed_form_supported(g, initial)) {
        const double closed = norm::l1_density_closed(g, initial);
        j["density_oracle_over_closed"] = closed > 0.0 ? json(series.density.front() / (vol * closed)) : json(nullptr);
    }

    write_file_atomic(with_suffix(c.output_path, ".csv"), csv.str());
    write_file_atomic(with_suffix(c.output_path, ".json"), j.dump(2) + "\n");
    out << frame::to_string(g) << ": " << flow::to_string(traj.stop_reason) << " at t = " << format_double(traj.t_last())
        << ", verdict " << norm::to_string(verdict);
    if (traj.t_estimate) out << ", T = " << format_double(*traj.t_estimate);
    if (ext.ratio_at_t0) out << ", A/B at maximum = " << format_double(*ext.ratio_at_t0);
    out << '\n';
    return kOk;
}

// ---- rosenau -----------------------------------------------------------

int run_rosenau(const ExperimentConfig& c, std::ostream& out)
{
    std::ostringstream l1;
    l1 << "t,l1_quadrature,l1_closed,rel_diff\n";
    json rows = json::array();
    double worst = 0.0;
    for (double t : c.t_grid) {
        const auto q = rosenau::l1_norm(t);
        const double closed = rosenau::l1_closed_form(t);
        const double rd = std::abs(q.value - closed) / std::abs(closed);
        worst = std::max(worst, rd);
        l1 << csv_number(t) << ',' << csv_number(q.value) << ',' << csv_number(closed) << ',' << csv_number(rd) << '\n';
        rows.push_back({{"t", t},
                        {"l1_quadrature", q.value},
                        {"l1_closed", closed},
                        {"rel_diff", rd},
                        {"error_estimate", q.error_estimate},
                        {"y_max", q.y_max},
                        {"tail_bound", q.tail_bound}});
    }

    std::ostringstream slice;
    slice << "x,u,R,C23\n";
    const int n = 101;
    const double x_max = 6.0;
    for (int i = 0; i < n; ++i) {
        const double x = -x_max + 2.0 * x_max * i / (n - 1);
        slice << csv_number(x) << ',' << csv_number(rosenau::conformal_factor(x, c.slice_t)) << ','
              << csv_number(rosenau::scalar_curvature(x, c.slice_t)) << ','
              << csv_number(rosenau::cotton_york_23(x, c.slice_t)) << '\n';
    }

    json j;
    j["schema"] = 1;
    j["command"] = "rosenau";
    j["l1"] = rows;
    j["max_rel_diff"] = worst;
    j["slice_t"] = c.slice_t;
    j["pole_limit"] = rosenau::pole_limit(c.slice_t);

    write_file_atomic(c.output_path + "_l1.csv", l1.str());
    write_file_atomic(c.output_path + "_slice.csv", slice.str());
    write_file_atomic(c.output_path + ".json", j.dump(2) + "\n");
    out << "rosenau: " << c.t_grid.size() << " times, max relative difference quadrature vs closed form "
        << format_double(worst) << '\n';
    return kOk;
}

// ---- verify ------------------------------------------------------------

int run_verify(const ExperimentConfig& c, std::ostream& out, std::ostream& err)
{
    const auto rep = suite::run_verification(c.seed, c.samples);
    json j;
    j["schema"] = 1;
    j["command"] = "verify";
    j["seed"] = rep.seed;
    j["random_samples"] = rep.random_samples;
    j["thm21_verdict"] = std::string(verify::to_string(rep.l1_verdict));
    j["heisenberg_l1_ratio"] = {{"min", rep.heisenberg_ratio_min}, {"max", rep.heisenberg_ratio_max}};
    json geos = json::array();
    for (const auto& t : rep.trajectories)
        geos.push_back({{"geometry", std::string(frame::to_string(t.geometry))},
                        {"probes", t.probes.size()},
                        {"c3_max_rel_residual", t.max_c3},
                        {"c2_max_rel_residual", t.max_c2},
                        {"c2_norm_sq_max_rel_residual", t.max_c2_norm},
                        {"l1_printed_max_rel_residual", t.max_l1_rate_printed},
                        {"l1_corrected_max_rel_residual", t.max_l1_rate_corrected},
                        {"volume_max_rel_residual", t.max_volume},
                        {"verdict", std::string(verify::to_string(t.verdict))}});
    j["evolution"] = geos;
    double identity_worst = 0.0;
    json checks = json::array();
    for (const auto& ch : rep.checks) {
        if (ch.name.rfind("identity.", 0) == 0) identity_worst = std::max(identity_worst, ch.value);
        checks.push_back({{"name", ch.name}, {"value", ch.value}, {"tolerance", ch.tolerance}, {"pass", ch.pass}});
    }
    j["identity_residuals_max"] = identity_worst;
    j["checks"] = checks;
    j["pass"] = rep.all_pass();
    write_file_atomic(c.output_path + ".json", j.dump(2) + "\n");

    out << "verify: " << rep.checks.size() << " checks, L1 evolution verdict "
        << verify::to_string(rep.l1_verdict) << ", Heisenberg oracle/printed ratio "
        << format_double(rep.heisenberg_ratio_min) << '\n';
    if (const auto* f = rep.first_failure()) {
        err << "verify failed: " << f->name << " = " << format_double(f->value) << " (tolerance "
            << format_double(f->tolerance) << ")\n";
        return kVerifyFailure;
    }
    return kOk;
}

// ---- sweep -------------------------------------------------------------

int run_sweep(const ExperimentConfig& c, std::ostream& out)
{
    std::vector<suite::SweepItem> items;
    if (c.table1) {
        items = suite::table1_items();
    } else {
        for (double r : c.ratios) {
            suite::SweepItem it;
            it.geometry = *c.geometry;
            it.initial = DiagonalMetric(r, 1.0, 1.0);
            it.t_end = c.t_end;
            it.sample_stride = c.sample_stride;
            it.expected = suite::table1_expectation(it.geometry, it.initial);
            it.row = std::string(frame::to_string(it.geometry)) + " A0/B0 = " + format_double(r);
            items.push_back(std::move(it));
        }
    }
    const auto results = suite::run_sweep(items, c.jobs);

    std::ostringstream csv;
    csv << "row,geometry,A0,B0,C0,t_end,stop_reason,t_final,verdict,expected,match,t0,ratio_at_t0,peak,terminal\n";
    json rows = json::array();
    bool all_match = true, any_error = false;
    for (const auto& r : results) {
        const auto& m = r.item.initial;
        all_match = all_match && r.match;
        any_error = any_error || !r.error.empty();
        csv << '"' << r.item.row << "\"," << frame::to_string(r.item.geometry) << ',' << csv_number(m.A()) << ','
            << csv_number(m.B()) << ',' << csv_number(m.C()) << ',' << csv_number(r.item.t_end) << ','
            << flow::to_string(r.stop_reason) << ',' << csv_number(r.t_final) << ',' << norm::to_string(r.verdict)
            << ',' << norm::to_string(r.item.expected) << ',' << (r.match ? "true" : "false") << ','
            << (r.t0 ? csv_number(*r.t0) : "") << ',' << (r.ratio_at_t0 ? csv_number(*r.ratio_at_t0) : "") << ','
            << csv_number(r.peak) << ',' << csv_number(r.terminal) << '\n';
        rows.push_back({{"row", r.item.row},
                        {"geometry", std::string(frame::to_string(r.item.geometry))},
                        {"initial", {m.A(), m.B(), m.C()}},
                        {"verdict", std::string(norm::to_string(r.verdict))},
                        {"expected", std::string(norm::to_string(r.item.expected))},
                        {"match", r.match},
                        {"ratio_at_t0", nullable(r.ratio_at_t0)},
                        {"error", r.error.empty() ? json(nullptr) : json(r.error)}});
    }
    json j;
    j["schema"] = 1;
    j["command"] = "sweep";
    j["table1"] = c.table1;
    j["rows"] = rows;
    j["all_match"] = all_match;
    write_file_atomic(c.output_path + ".csv", csv.str());
    write_file_atomic(c.output_path + ".json", j.dump(2) + "\n");

    for (const auto& r : results) {
        const auto& m = r.item.initial;
        out << (r.match ? "ok   " : "FAIL ") << r.item.row << "  (" << format_double(m.A()) << ", "
            << format_double(m.B()) << ", " << format_double(m.C()) << ") -> " << norm::to_string(r.verdict);
        if (!r.match) out << ", expected " << norm::to_string(r.item.expected);
        if (!r.error.empty()) out << " [" << r.error << "]";
        out << '\n';
    }
    if (any_error) return kIntegrationError;
    return all_match ? kOk : kVerifyFailure;
}

// ---- oracle-check ------------------------------------------------------

int run_oracle_check(const ExperimentConfig& c, std::ostream& out)
{
    const DiagonalMetric m(*c.A0, *c.B0, *c.C0);
    const Geometry g = *c.geometry;
    const auto q = frame::analyze(m, frame::StructureTriple::of(g));
    const double d_oracle = norm::l1_density_oracle(g, m);
    const double d_closed = oracle_or_nan([&] { return norm::l1_density_closed(g, m); });

    json j;
    j["schema"] = 1;
    j["command"] = "oracle-check";
    j["geometry"] = std::string(frame::to_string(g));
    j["metric"] = {m.A(), m.B(), m.C()};
    json c2 = json::array();
    for (std::size_t i = 0; i < 3; ++i) c2.push_back({q.c2(i, 0), q.c2(i, 1), q.c2(i, 2)});
    j["cotton_york_oracle"] = c2;
    if (norm::closed_form_supported(g, m)) {
        const auto cl = norm::cotton_york_closed(g, m);
        j["cotton_york_closed_diagonal"] = {cl[0], cl[1], cl[2]};
    } else {
        j["cotton_york_closed_diagonal"] = nullptr;
    }
    j["ricci_diagonal"] = {q.ric(0, 0), q.ric(1, 1), q.ric(2, 2)};
    j["scalar_curvature"] = q.scalar;
    j["density_oracle"] = d_oracle;
    j["density_closed"] = std::isnan(d_closed) ? json(nullptr) : json(d_closed);
    j["density_ratio"] = (!std::isnan(d_closed) && d_closed > 0.0) ? json(d_oracle / d_closed) : json(nullptr);
    write_file_atomic(c.output_path + ".json", j.dump(2) + "\n");

    out << frame::to_string(g) << " (" << format_double(m.A()) << ", " << format_double(m.B()) << ", "
        << format_double(m.C()) << ")\n";
    frame::dump(out, "C2", q.c2);
    out << "density_oracle = " << format_double(d_oracle) << '\n';
    if (!std::isnan(d_closed)) out << "density_closed = " << format_double(d_closed) << '\n';
    return kOk;
}

void add_key_option(CLI::App* sub, KeyValues& flags, const std::string& names, const std::string& key,
                    const std::string& help)
{
    sub->add_option_function<std::string>(names, [&flags, key](const std::string& v) { flags[key] = v; }, help);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"flowlab: Cotton-York tensor under Ricci flow on homogeneous 3-geometries"};
    app.require_subcommand(1);

    KeyValues flags;
    std::string config_path;
    bool force = false;
    bool table1 = false;

    struct Sub {
        const char* name;
        const char* help;
    };
    const Sub subs[] = {{"simulate", "integrate one trajectory and write CSV + JSON summary"},
                        {"rosenau", "Rosenau x S1 L1 norm by quadrature and a curvature slice"},
                        {"verify", "run the full residual suite; exit 5 on the first failed check"},
                        {"sweep", "run many initial data; --table1 runs the reference verdict table"},
                        {"oracle-check", "compare the oracle Cotton-York tensor with the closed form"}};
    for (const auto& s : subs) {
        auto* sub = app.add_subcommand(s.name, s.help);
        sub->add_option("--config", config_path, "key=value config file");
        sub->add_flag("--force", force, "let flags override conflicting config-file values");
        add_key_option(sub, flags, "-o,--output", "output", "output path prefix");
        const std::string name = s.name;
        if (name == "simulate" || name == "oracle-check" || name == "sweep")
            add_key_option(sub, flags, "-g,--geometry", "geometry", "su2, isom_r2, sl2r, heisenberg, isom_r11, r3");
        if (name == "simulate" || name == "oracle-check") {
            add_key_option(sub, flags, "--A0", "A0", "initial A");
            add_key_option(sub, flags, "--B0", "B0", "initial B");
            add_key_option(sub, flags, "--C0", "C0", "initial C");
        }
        if (name == "simulate" || name == "sweep") {
            add_key_option(sub, flags, "--t-end,--t_end", "t_end", "final time");
            add_key_option(sub, flags, "--rel-tol,--rel_tol", "rel_tol", "relative tolerance");
            add_key_option(sub, flags, "--abs-tol,--abs_tol", "abs_tol", "absolute tolerance");
            add_key_option(sub, flags, "--sample-stride,--sample_stride", "sample_stride", "sampling interval");
        }
        if (name == "simulate") add_key_option(sub, flags, "--vol-factor,--vol_factor", "vol_factor", "volume factor");
        if (name == "rosenau") {
            add_key_option(sub, flags, "--t-grid,--t_grid", "t_grid", "comma-separated negative times");
            add_key_option(sub, flags, "--slice-t,--slice_t", "slice_t", "time of the x-slice");
        }
        if (name == "verify") {
            add_key_option(sub, flags, "--seed", "seed", "random seed");
            add_key_option(sub, flags, "--samples", "samples", "random metrics per geometry");
        }
        if (name == "sweep") {
            add_key_option(sub, flags, "--ratios", "ratios", "comma-separated A0/B0 values, B0 = C0 = 1");
            add_key_option(sub, flags, "-j,--jobs", "jobs", "worker threads (default FLOWLAB_JOBS or 1)");
            sub->add_flag("--table1", table1, "run the reference samples, one per table row");
        }
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) reversed.pop_back();  // program name
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    ExperimentConfig cfg;
    try {
        KeyValues file;
        if (!config_path.empty()) {
            std::ifstream f(config_path);
            if (!f) throw ConfigError("cannot read config file " + config_path);
            std::stringstream ss;
            ss << f.rdbuf();
            file = parse_key_values(ss.str());
        }
        cfg = make_config(command, file, flags, force, table1, err);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const DomainError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    }

    try {
        if (command == "simulate") return run_simulate(cfg, out);
        if (command == "rosenau") return run_rosenau(cfg, out);
        if (command == "verify") return run_verify(cfg, out, err);
        if (command == "sweep") return run_sweep(cfg, out);
        if (command == "oracle-check") return run_oracle_check(cfg, out);
    } catch (const DomainError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const InvariantBreach& e) {
        err << "invariant breach: " << e.what() << '\n';
        return kInvariantError;
    } catch (const Error& e) {
        err << "integration failure: " << e.what() << '\n';
        return kIntegrationError;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "i/o failure: " << e.what() << '\n';
        return kIntegrationError;
    }
    err << "unknown command " << command << '\n';
    return kConfigError;
}

}  // namespace flowlab::cli
