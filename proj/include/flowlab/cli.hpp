#pragma once

// Command-line front end: config parsing, experiment execution and CSV/JSON
// emission. `run` is the whole program; tools/flowlab.cpp only forwards argv.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "flowlab/errors.hpp"
#include "flowlab/frame_calculus.hpp"

namespace flowlab::cli {

enum ExitCode : int {
    kOk = 0,
    kConfigError = 2,
    kIntegrationError = 3,
    kInvariantError = 4,
    kVerifyFailure = 5,
};

class ConfigError : public Error {
public:
    using Error::Error;
};

using KeyValues = std::map<std::string, std::string>;

/// key=value lines; '#' starts a comment; blank lines ignored. Unknown keys and
/// duplicates are rejected.
KeyValues parse_key_values(std::string_view text);

/// Every key accepted in a config file or as a flag.
const std::vector<std::string>& known_keys();

struct ExperimentConfig {
    std::string command;
    std::optional<frame::Geometry> geometry;
    std::optional<double> A0, B0, C0;
    double t_end = 10.0;
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double sample_stride = 1e-2;
    std::vector<double> t_grid{-2.0, -1.0, -0.5, -0.1};
    double slice_t = -1.0;
    std::string output_path;  // prefix; files are <prefix>.csv, <prefix>.json, ...
    std::optional<double> vol_factor;
    std::uint64_t seed = 20260917;
    std::size_t samples = 100;
    std::vector<double> ratios;
    unsigned jobs = 1;
    bool table1 = false;
};

/// Merges file values with flag values. A key given both ways with different
/// values is an error unless `force`, in which case the flag wins and a warning
/// goes to `warnings`. FLOWLAB_JOBS supplies the default for jobs.
ExperimentConfig make_config(const std::string& command, const KeyValues& file, const KeyValues& flags, bool force,
                             bool table1, std::ostream& warnings);

/// Writes to a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// Runs the program with argv-style arguments (args[0] is the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace flowlab::cli
