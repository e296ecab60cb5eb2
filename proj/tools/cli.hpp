#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "varseg/pipeline.hpp"

namespace varseg::cli {

enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kDataError = 2,
    kNotConverged = 3,
};

/// Every knob a command can read. JSON keys match the field names.
struct RunConfig {
    std::string input;
    std::string out = ".";
    int d = 1;
    double lambda_c = 0.5;
    double eta = 0.5;
    double omega_v = 0.9;
    std::string strategy = "backward";
    int exhaustive_cap = 12;
    std::optional<double> zero_tol;
    std::uint64_t seed = 1;
    int replicates = 20;
    int scenario = 1;
    bool difference = false;
    int downsample = 1;
    bool center = false;
    int jobs = 1;
    bool strict = false;

    bool operator==(const RunConfig&) const = default;
};

nlohmann::json config_to_json(const RunConfig& config);

/// Overlays the keys present in doc onto base. Unknown keys and wrongly typed
/// values throw InvalidArgument.
RunConfig apply_json(RunConfig base, const nlohmann::json& doc);

/// defaults < config file < flags. Both documents may be partial.
RunConfig resolve_config(const nlohmann::json& file_doc, const nlohmann::json& flag_doc);

/// Throws InvalidArgument on out-of-range values.
void check_config(const RunConfig& config);

ScheduleParams schedule_params(const RunConfig& config);
DetectOptions detect_options(const RunConfig& config);

int cmd_simulate(const RunConfig& config, std::ostream& err);
int cmd_detect(const RunConfig& config, std::ostream& err);
int cmd_evaluate(const RunConfig& config, std::ostream& err);
int cmd_plot(const RunConfig& config, std::ostream& err);

/// Full command line: parse, resolve the config, dispatch. Never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Reads VARSEG_LOG (error|warn|info|debug) and sets the global log level.
void configure_logging();

} // namespace varseg::cli
