#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <string_view>

#include "wsnalloc/model.hpp"
#include "wsnalloc/simkit.hpp"

namespace wsnalloc {

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

/// Output paths that may be given in the config file instead of on the
/// command line.
struct OutputPaths {
    std::optional<std::string> results;
    std::optional<std::string> summary;
    std::optional<std::string> codebook;
    std::optional<std::string> allocation;
    std::optional<std::string> table;
};

struct CliConfig {
    SimulationConfig sim;
    OutputPaths outputs;
};

// Keys may carry a `_db` or `_dbm` suffix where a parameter admits it; the
// value is converted to linear units here and nowhere else. Errors are
// reported as Error(Parse) with "source:line:column" for syntax problems and
// "source: /json/pointer" for schema problems.
CliConfig parse_config(std::string_view text, const std::string& source = "<config>");
CliConfig load_config(const std::string& path);

/// Realization file: {"sensors": [{"h", "sigma_o2"}...], "channels": [{"g",
/// "sigma_c2"}...], optional "sigma_theta2" and "d0"}. Missing sigma_theta2
/// and d0 fall back to `defaults`.
NetworkRealization parse_realization(std::string_view text, const std::string& source,
                                     double default_sigma_theta2, double default_d0);
NetworkRealization load_realization(const std::string& path, double default_sigma_theta2,
                                    double default_d0);

std::string read_text_file(const std::string& path);

}  // namespace wsnalloc
