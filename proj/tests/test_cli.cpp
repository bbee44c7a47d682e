#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "flowlab/cli.hpp"

using namespace flowlab;
using namespace flowlab::cli;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code = 0;
    std::string out, err;
};

Result call(std::vector<std::string> args)
{
    args.insert(args.begin(), "flowlab");
    std::ostringstream out, err;
    const int code = run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name)
{
    const auto dir = fs::temp_directory_path() / "flowlab_cli_test";
    fs::create_directories(dir);
    return dir / name;
}

std::string slurp(const fs::path& p)
{
    std::ifstream f(p);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

}  // namespace

TEST_CASE("key=value parsing")
{
    const auto kv = parse_key_values("# comment\ngeometry = su2\n\nA0=0.25  # trailing\n");
    CHECK(kv.at("geometry") == "su2");
    CHECK(kv.at("A0") == "0.25");
    CHECK_THROWS_AS(parse_key_values("colour=blue\n"), ConfigError);
    CHECK_THROWS_AS(parse_key_values("A0=1\nA0=2\n"), ConfigError);
    CHECK_THROWS_AS(parse_key_values("A0\n"), ConfigError);
}

TEST_CASE("config assembly")
{
    std::ostringstream warn;
    const auto c = make_config("simulate", {}, {{"geometry", "su2"}, {"A0", "0.25"}, {"B0", "1"}, {"C0", "1"}}, false,
                               false, warn);
    CHECK(c.geometry == frame::Geometry::SU2);
    CHECK(*c.A0 == 0.25);
    CHECK(c.rel_tol == 1e-10);
    CHECK(c.t_end == 10.0);
    CHECK(c.seed == 20260917u);

    CHECK_THROWS_AS(make_config("simulate", {}, {{"geometry", "su2"}, {"A0", "-1"}, {"B0", "1"}, {"C0", "1"}}, false,
                                false, warn),
                    ConfigError);
    CHECK_THROWS_AS(make_config("simulate", {}, {{"geometry", "su2"}, {"A0", "1x"}, {"B0", "1"}, {"C0", "1"}}, false,
                                false, warn),
                    ConfigError);
    CHECK_THROWS_AS(make_config("simulate", {}, {{"geometry", "su2"}, {"A0", "1"}, {"B0", "1"}}, false, false, warn),
                    ConfigError);
    CHECK_THROWS_AS(make_config("rosenau", {}, {{"t_grid", "-1,0.5"}}, false, false, warn), ConfigError);

    const KeyValues file{{"geometry", "heisenberg"}, {"A0", "1"}, {"B0", "1"}, {"C0", "1"}};
    CHECK_THROWS_AS(make_config("simulate", file, {{"geometry", "su2"}}, false, false, warn), ConfigError);
    const auto forced = make_config("simulate", file, {{"geometry", "su2"}}, true, false, warn);
    CHECK(forced.geometry == frame::Geometry::SU2);
    CHECK(warn.str().find("warning") != std::string::npos);
}

TEST_CASE("exit codes for bad invocations")
{
    CHECK(call({}).code == kConfigError);
    CHECK(call({"frobnicate"}).code == kConfigError);
    CHECK(call({"simulate", "--geometry", "su2", "--A0", "-1", "--B0", "1", "--C0", "1"}).code == kConfigError);
    CHECK(call({"simulate", "--geometry", "torus", "--A0", "1", "--B0", "1", "--C0", "1"}).code == kConfigError);
    CHECK(call({"simulate", "--config", scratch("missing.cfg").string()}).code == kConfigError);

    const auto cfg = scratch("conflict.cfg");
    std::ofstream(cfg) << "geometry=heisenberg\nA0=1\nB0=1\nC0=1\n";
    const auto prefix = scratch("conflict").string();
    const auto r = call({"simulate", "--config", cfg.string(), "--geometry", "su2", "-o", prefix});
    CHECK(r.code == kConfigError);
    CHECK(r.err.find("conflicting") != std::string::npos);
    CHECK_FALSE(fs::exists(prefix + ".csv"));
}

TEST_CASE("simulate writes CSV and JSON")
{
    const auto prefix = scratch("su2_quarter").string();
    const auto r = call({"simulate", "--geometry", "su2", "--A0", "0.25", "--B0", "1", "--C0", "1", "--t-end", "1",
                         "--sample-stride", "1e-3", "-o", prefix});
    REQUIRE(r.code == kOk);
    const auto csv = slurp(prefix + ".csv");
    CHECK(csv.rfind("t,A,B,C,R,density_closed,density_oracle\n", 0) == 0);
    const auto j = read_json(prefix + ".json");
    CHECK(j["schema"] == 1);
    CHECK(j["verdict"] == "HasInteriorMax");
    CHECK(j["extremum"]["kind"] == "InteriorMax");
    CHECK(std::abs(j["extremum"]["ratio"].get<double>() - 0.5) <= 1e-6);
    CHECK(j["stop_reason"] == "blowup_floor");

    // a second run is byte identical
    const auto first = slurp(prefix + ".json");
    REQUIRE(call({"simulate", "--geometry", "su2", "--A0", "0.25", "--B0", "1", "--C0", "1", "--t-end", "1",
                  "--sample-stride", "1e-3", "-o", prefix})
                .code == kOk);
    CHECK(slurp(prefix + ".json") == first);
}

TEST_CASE("simulate round sphere and Heisenberg")
{
    const auto p1 = scratch("round").string();
    REQUIRE(call({"simulate", "-g", "su2", "--A0", "1", "--B0", "1", "--C0", "1", "-o", p1}).code == kOk);
    const auto j1 = read_json(p1 + ".json");
    CHECK(std::abs(j1["T_estimate"].get<double>() - 0.25) <= 1e-6);
    CHECK(j1["verdict"] == "IdenticallyZero");

    const auto p2 = scratch("heis").string();
    REQUIRE(call({"simulate", "-g", "heisenberg", "--A0", "1", "--B0", "1", "--C0", "1", "-o", p2}).code == kOk);
    const auto j2 = read_json(p2 + ".json");
    CHECK(j2["conserved_max_drift"].get<double>() <= 1e-9);
    CHECK(j2["T_estimate"].is_null());
    CHECK(j2["verdict"] == "StrictlyDecreasing");

    // density_closed is empty off the symmetric branch
    const auto p3 = scratch("su2_general").string();
    REQUIRE(call({"simulate", "-g", "su2", "--A0", "1", "--B0", "2", "--C0", "3", "--t-end", "0.1", "-o", p3}).code ==
            kOk);
    std::istringstream lines(slurp(p3 + ".csv"));
    std::string header, row;
    std::getline(lines, header);
    std::getline(lines, row);
    CHECK(row.find(",,") != std::string::npos);
}

TEST_CASE("rosenau outputs")
{
    const auto prefix = scratch("ros").string();
    REQUIRE(call({"rosenau", "-o", prefix}).code == kOk);
    std::istringstream l1(slurp(prefix + "_l1.csv"));
    std::string line;
    std::getline(l1, line);
    CHECK(line == "t,l1_quadrature,l1_closed,rel_diff");
    int rows = 0;
    while (std::getline(l1, line)) {
        ++rows;
        CHECK(std::stod(line.substr(line.rfind(',') + 1)) <= 1e-8);
    }
    CHECK(rows == 4);
    std::istringstream slice(slurp(prefix + "_slice.csv"));
    std::getline(slice, line);
    CHECK(line == "x,u,R,C23");
}

TEST_CASE("sweep over SU2 ratios")
{
    const auto prefix = scratch("sweep").string();
    const auto r = call({"sweep", "-g", "su2", "--ratios", "0.25,0.6,1.0,1.5", "--t-end", "1", "--sample-stride",
                         "1e-3", "--jobs", "2", "-o", prefix});
    CHECK(r.code == kOk);
    const auto j = read_json(prefix + ".json");
    REQUIRE(j["rows"].size() == 4);
    CHECK(j["rows"][0]["verdict"] == "HasInteriorMax");
    CHECK(j["rows"][1]["verdict"] == "StrictlyDecreasing");
    CHECK(j["rows"][2]["verdict"] == "IdenticallyZero");
    CHECK(j["rows"][3]["verdict"] == "StrictlyDecreasing");
}

TEST_CASE("oracle-check")
{
    const auto prefix = scratch("oracle").string();
    const auto r = call({"oracle-check", "-g", "heisenberg", "--A0", "1", "--B0", "1", "--C0", "1", "-o", prefix});
    REQUIRE(r.code == kOk);
    const auto j = read_json(prefix + ".json");
    CHECK(j["density_ratio"].get<double>() == doctest::Approx(2.0));
    CHECK(j["cotton_york_oracle"][0][0].get<double>() == doctest::Approx(8.0));
}

TEST_CASE("standalone binary")
{
    const std::string bin = FLOWLAB_CLI_PATH;
    const auto prefix = scratch("bin_round").string();
    const std::string cmd = "\"" + bin + "\" simulate -g su2 --A0 1 --B0 1 --C0 1 -o \"" + prefix + "\" > /dev/null";
    CHECK(std::system(cmd.c_str()) == 0);
    CHECK(fs::exists(prefix + ".json"));
    const std::string bad = "\"" + bin + "\" simulate -g su2 --A0 0 --B0 1 --C0 1 2> /dev/null";
    const int status = std::system(bad.c_str());
    CHECK(WEXITSTATUS(status) == kConfigError);
}
