#include "cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "varseg/evaluate.hpp"
#include "varseg/io.hpp"
#include "varseg/plot.hpp"
#include "varseg/simulate.hpp"

namespace fs = std::filesystem;

namespace varseg::cli {

nlohmann::json config_to_json(const RunConfig& c)
{
    return {{"input", c.input},
            {"out", c.out},
            {"d", c.d},
            {"lambda_c", c.lambda_c},
            {"eta", c.eta},
            {"omega_v", c.omega_v},
            {"strategy", c.strategy},
            {"exhaustive_cap", c.exhaustive_cap},
            {"zero_tol", c.zero_tol ? nlohmann::json(*c.zero_tol) : nlohmann::json(nullptr)},
            {"seed", c.seed},
            {"replicates", c.replicates},
            {"scenario", c.scenario},
            {"difference", c.difference},
            {"downsample", c.downsample},
            {"center", c.center},
            {"jobs", c.jobs},
            {"strict", c.strict}};
}

namespace {

using Setter = std::function<void(RunConfig&, const nlohmann::json&)>;

template <class T>
Setter field(T RunConfig::*member)
{
    return [member](RunConfig& c, const nlohmann::json& v) { c.*member = v.get<T>(); };
}

const std::map<std::string, Setter>& setters()
{
    static const std::map<std::string, Setter> table = {
        {"input", field(&RunConfig::input)},
        {"out", field(&RunConfig::out)},
        {"d", field(&RunConfig::d)},
        {"lambda_c", field(&RunConfig::lambda_c)},
        {"eta", field(&RunConfig::eta)},
        {"omega_v", field(&RunConfig::omega_v)},
        {"strategy", field(&RunConfig::strategy)},
        {"exhaustive_cap", field(&RunConfig::exhaustive_cap)},
        {"zero_tol",
         [](RunConfig& c, const nlohmann::json& v) {
             c.zero_tol = v.is_null() ? std::nullopt : std::optional<double>(v.get<double>());
         }},
        {"seed", field(&RunConfig::seed)},
        {"replicates", field(&RunConfig::replicates)},
        {"scenario", field(&RunConfig::scenario)},
        {"difference", field(&RunConfig::difference)},
        {"downsample", field(&RunConfig::downsample)},
        {"center", field(&RunConfig::center)},
        {"jobs", field(&RunConfig::jobs)},
        {"strict", field(&RunConfig::strict)},
    };
    return table;
}

bool type_matches(const std::string& key, const nlohmann::json& v)
{
    static const std::map<std::string, nlohmann::json::value_t> kinds = {
        {"input", nlohmann::json::value_t::string},   {"out", nlohmann::json::value_t::string},
        {"strategy", nlohmann::json::value_t::string}, {"difference", nlohmann::json::value_t::boolean},
        {"center", nlohmann::json::value_t::boolean},  {"strict", nlohmann::json::value_t::boolean},
    };
    if (auto it = kinds.find(key); it != kinds.end()) return v.type() == it->second;
    if (key == "lambda_c" || key == "eta" || key == "omega_v") return v.is_number();
    if (key == "zero_tol") return v.is_null() || v.is_number();
    if (key == "seed") return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
    return v.is_number_integer();
}

} // namespace

RunConfig apply_json(RunConfig base, const nlohmann::json& doc)
{
    if (doc.is_null()) return base;
    if (!doc.is_object()) throw InvalidArgument("config: expected a JSON object");
    for (const auto& [key, value] : doc.items()) {
        const auto it = setters().find(key);
        if (it == setters().end()) throw InvalidArgument("config: unknown key '" + key + "'");
        if (!type_matches(key, value)) throw InvalidArgument("config: wrong type for '" + key + "'");
        it->second(base, value);
    }
    return base;
}

RunConfig resolve_config(const nlohmann::json& file_doc, const nlohmann::json& flag_doc)
{
    return apply_json(apply_json(RunConfig{}, file_doc), flag_doc);
}

void check_config(const RunConfig& c)
{
    auto require = [](bool ok, const std::string& what) {
        if (!ok) throw InvalidArgument("config: " + what);
    };
    require(c.d >= 1, "d must be >= 1");
    require(c.lambda_c > 0.0, "lambda_c must be > 0");
    require(c.eta >= 0.0, "eta must be >= 0");
    require(c.omega_v > 0.0, "omega_v must be > 0");
    require(c.strategy == "backward" || c.strategy == "exhaustive", "strategy must be backward or exhaustive");
    require(c.exhaustive_cap >= 0 && c.exhaustive_cap <= 30, "exhaustive_cap must be in [0, 30]");
    require(!c.zero_tol || *c.zero_tol >= 0.0, "zero_tol must be >= 0");
    require(c.replicates >= 1, "replicates must be >= 1");
    require(c.scenario >= 1 && c.scenario <= 3, "scenario must be 1, 2 or 3");
    require(c.downsample >= 1, "downsample must be >= 1");
    require(c.jobs >= 1, "jobs must be >= 1");
    require(!c.out.empty(), "out must not be empty");
}

ScheduleParams schedule_params(const RunConfig& c)
{
    ScheduleParams p;
    p.lambda_constant = c.lambda_c;
    p.omega_v = c.omega_v;
    p.eta_constant = c.eta;
    return p;
}

DetectOptions detect_options(const RunConfig& c)
{
    DetectOptions o;
    o.screening.strategy = strategy_from_name(c.strategy);
    o.screening.exhaustive_cap = c.exhaustive_cap;
    o.zero_tol = c.zero_tol;
    return o;
}

namespace {

std::string dump(const nlohmann::json& doc)
{
    return doc.dump(2) + "\n";
}

void prepare_out(const RunConfig& c)
{
    fs::create_directories(c.out);
    write_text((fs::path(c.out) / "config.json").string(), dump(config_to_json(c)));
}

std::string out_path(const RunConfig& c, const char* name)
{
    return (fs::path(c.out) / name).string();
}

/// Runs body and maps exceptions to exit codes with a message naming the command.
int guarded(const char* command, std::ostream& err, const std::function<int()>& body)
{
    try {
        return body();
    } catch (const ParseError& e) {
        err << "varseg " << command << ": data error: " << e.what() << '\n';
    } catch (const ValidationError& e) {
        err << "varseg " << command << ": invalid model: " << e.what() << '\n';
    } catch (const InfeasibleSubset& e) {
        err << "varseg " << command << ": " << e.what() << '\n';
    } catch (const SolverError& e) {
        err << "varseg " << command << ": solver error: " << e.what() << '\n';
    } catch (const InvalidArgument& e) {
        err << "varseg " << command << ": " << e.what() << '\n';
    } catch (const std::exception& e) {
        err << "varseg " << command << ": " << e.what() << '\n';
    }
    return kDataError;
}

} // namespace

int cmd_simulate(const RunConfig& c, std::ostream& err)
{
    return guarded("simulate", err, [&] {
        const auto config = make_scenario(scenario_from_int(c.scenario), c.seed);
        const TimeSeries data = simulate(config);
        prepare_out(c);
        write_csv(out_path(c, "data.csv"), data);
        write_text(out_path(c, "model.json"), dump(model_to_json(config.model)));
        spdlog::info("simulate: wrote {} x {} series to {}", data.rows(), data.cols(), c.out);
        return int{kOk};
    });
}

int cmd_detect(const RunConfig& c, std::ostream& err)
{
    return guarded("detect", err, [&] {
        if (c.input.empty()) throw InvalidArgument("ingest: --input is required");
        IngestOptions ingest;
        ingest.difference = c.difference;
        ingest.downsample = c.downsample;
        ingest.center = c.center;
        TimeSeries data;
        try {
            data = ingest_csv(c.input, ingest);
        } catch (const ParseError& e) {
            throw ParseError(std::string("ingest: ") + e.what());
        } catch (const InvalidArgument& e) {
            throw InvalidArgument(std::string("ingest: ") + e.what());
        }

        const auto T = static_cast<int>(data.rows()), p = static_cast<int>(data.cols());
        if (T <= 3 * c.d) {
            throw InvalidArgument("detect: series of length " + std::to_string(T) + " is too short for d=" +
                                  std::to_string(c.d));
        }
        const TuningSchedule schedule = detection_schedule(T, p, c.d, schedule_params(c));
        const DetectionResult result = detect(data, c.d, schedule, detect_options(c));
        const PlotBundle bundle = make_plot_bundle(data, result);

        prepare_out(c);
        write_text(out_path(c, "detection.json"), dump(detection_to_json(result)));
        write_text(out_path(c, "plot_bundle.json"), dump(bundle_to_json(bundle)));
        write_text(out_path(c, "plot.svg"), render_svg(bundle));
        std::ostringstream markers;
        write_markers_csv(markers, bundle);
        write_text(out_path(c, "markers.csv"), markers.str());

        spdlog::info("detect: {} candidates, {} final breaks", result.stage1.m_hat(), result.final_breaks.size());
        if (c.strict && !result.stage1_estimate.converged) {
            err << "varseg detect: stage1: BCD did not converge in " << result.stage1_estimate.iterations
                << " sweeps\n";
            return int{kNotConverged};
        }
        return int{kOk};
    });
}

int cmd_evaluate(const RunConfig& c, std::ostream& err)
{
    return guarded("evaluate", err, [&] {
        ReplicateOptions opt;
        opt.schedule = schedule_params(c);
        opt.detect = detect_options(c);
        opt.jobs = c.jobs;
        const auto summary = run_replicates(scenario_from_int(c.scenario), c.replicates, c.seed, opt);

        prepare_out(c);
        std::ostringstream csv;
        write_summary_csv(csv, summary);
        write_text(out_path(c, "summary.csv"), csv.str());
        write_text(out_path(c, "summary.json"), dump(summary_to_json(summary)));

        int failed = 0, unconverged = 0;
        for (const auto& r : summary.records) {
            failed += r.failed;
            unconverged += !r.failed && !r.stage1_converged;
        }
        if (failed) err << "varseg evaluate: " << failed << " replicate(s) failed, see summary.json\n";
        if (c.strict && unconverged) {
            err << "varseg evaluate: stage1: " << unconverged << " replicate(s) did not converge\n";
            return int{kNotConverged};
        }
        return int{kOk};
    });
}

int cmd_plot(const RunConfig& c, std::ostream& err)
{
    return guarded("plot", err, [&] {
        if (c.input.empty()) throw InvalidArgument("plot: --input is required");
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(read_text(c.input));
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(std::string("plot: ") + e.what());
        }
        const PlotBundle bundle = bundle_from_json(doc);
        fs::create_directories(c.out);
        write_text(out_path(c, "plot.svg"), render_svg(bundle));
        return int{kOk};
    });
}

namespace {

struct Flags {
    std::string input, out, config, strategy;
    int d = 0, exhaustive_cap = 0, replicates = 0, scenario = 0, downsample = 0, jobs = 0;
    double lambda_c = 0, eta = 0, omega_v = 0, zero_tol = 0;
    std::uint64_t seed = 0;
    bool difference = false, center = false, strict = false;
    std::vector<std::pair<std::string, std::function<nlohmann::json()>>> bound;
    std::vector<std::pair<std::string, CLI::Option*>> options;
};

void add_flag_set(CLI::App* cmd, Flags& f, const std::vector<std::string>& names)
{
    auto has = [&](const char* n) { return std::find(names.begin(), names.end(), n) != names.end(); };
    auto bind = [&](const char* key, CLI::Option* opt, std::function<nlohmann::json()> get) {
        f.options.emplace_back(key, opt);
        f.bound.emplace_back(key, std::move(get));
    };
    cmd->add_option("--config", f.config, "JSON config file; flags override its values");
    if (has("input")) bind("input", cmd->add_option("--input", f.input, "input file"), [&f] { return f.input; });
    bind("out", cmd->add_option("--out", f.out, "output directory (default .)"), [&f] { return f.out; });
    if (has("d")) bind("d", cmd->add_option("--d", f.d, "VAR lag order (default 1)"), [&f] { return f.d; });
    if (has("schedule")) {
        bind("lambda_c", cmd->add_option("--lambda-c", f.lambda_c, "stage-1 constant C (default 0.5)"),
             [&f] { return f.lambda_c; });
        bind("eta", cmd->add_option("--eta", f.eta, "stage-2 penalty as a multiple of gamma_n (default 0.5)"),
             [&f] { return f.eta; });
        bind("omega_v", cmd->add_option("--omega-v", f.omega_v, "IC exponent v (default 0.9)"),
             [&f] { return f.omega_v; });
        bind("strategy",
             cmd->add_option("--strategy", f.strategy, "subset search")->check(CLI::IsMember({"backward", "exhaustive"})),
             [&f] { return f.strategy; });
        bind("exhaustive_cap", cmd->add_option("--exhaustive-cap", f.exhaustive_cap, "max candidates for exhaustive"),
             [&f] { return f.exhaustive_cap; });
        bind("zero_tol", cmd->add_option("--zero-tol", f.zero_tol, "candidate threshold on ||theta_i||_inf"),
             [&f] { return f.zero_tol; });
        bind("strict", cmd->add_flag("--strict", f.strict, "exit 3 when stage 1 does not converge"),
             [&f] { return f.strict; });
    }
    if (has("seed")) bind("seed", cmd->add_option("--seed", f.seed, "base seed (default 1)"), [&f] { return f.seed; });
    if (has("scenario")) {
        bind("scenario", cmd->add_option("--scenario", f.scenario, "preset 1, 2 or 3")->check(CLI::Range(1, 3)),
             [&f] { return f.scenario; });
    }
    if (has("replicates")) {
        bind("replicates", cmd->add_option("--replicates", f.replicates, "number of replicates (default 20)"),
             [&f] { return f.replicates; });
        bind("jobs", cmd->add_option("--jobs", f.jobs, "worker threads (default 1)"), [&f] { return f.jobs; });
    }
    if (has("ingest")) {
        bind("difference", cmd->add_flag("--difference", f.difference, "first differences"),
             [&f] { return f.difference; });
        bind("downsample", cmd->add_option("--downsample", f.downsample, "keep every k-th row"),
             [&f] { return f.downsample; });
        bind("center", cmd->add_flag("--center", f.center, "subtract column means"), [&f] { return f.center; });
    }
}

nlohmann::json given_flags(const Flags& f)
{
    nlohmann::json doc = nlohmann::json::object();
    for (std::size_t i = 0; i < f.options.size(); ++i) {
        if (f.options[i].second->count() > 0) doc[f.bound[i].first] = f.bound[i].second();
    }
    return doc;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Two-stage change-point detection for piecewise VAR time series"};
    app.name("varseg");
    app.require_subcommand(1);

    Flags flags;
    auto* sim = app.add_subcommand("simulate", "simulate a preset scenario: data.csv, model.json");
    add_flag_set(sim, flags, {"seed", "scenario"});
    auto* det = app.add_subcommand("detect", "detect breaks: detection.json, plot.svg, markers.csv");
    add_flag_set(det, flags, {"input", "d", "schedule", "ingest"});
    auto* eva = app.add_subcommand("evaluate", "replicate study: summary.csv, summary.json");
    add_flag_set(eva, flags, {"seed", "scenario", "replicates", "schedule"});
    auto* plt = app.add_subcommand("plot", "render plot_bundle.json to plot.svg");
    add_flag_set(plt, flags, {"input"});

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? int{kOk} : int{kUsage};
    }

    RunConfig config;
    try {
        nlohmann::json file_doc;
        if (!flags.config.empty()) {
            try {
                file_doc = nlohmann::json::parse(read_text(flags.config));
            } catch (const nlohmann::json::parse_error& e) {
                throw InvalidArgument("config: " + flags.config + ": " + e.what());
            } catch (const ParseError& e) {
                throw InvalidArgument(std::string("config: ") + e.what());
            }
        }
        config = resolve_config(file_doc, given_flags(flags));
        check_config(config);
    } catch (const InvalidArgument& e) {
        err << "varseg: " << e.what() << '\n';
        return kUsage;
    }

    if ((det->parsed() || plt->parsed()) && config.input.empty()) {
        err << "varseg: --input is required\n";
        return kUsage;
    }
    if (sim->parsed()) return cmd_simulate(config, err);
    if (det->parsed()) return cmd_detect(config, err);
    if (eva->parsed()) return cmd_evaluate(config, err);
    return cmd_plot(config, err);
}

void configure_logging()
{
    spdlog::set_level(spdlog::level::warn);
    if (const char* env = std::getenv("VARSEG_LOG")) {
        const std::string level = env;
        if (level == "error") spdlog::set_level(spdlog::level::err);
        else if (level == "warn") spdlog::set_level(spdlog::level::warn);
        else if (level == "info") spdlog::set_level(spdlog::level::info);
        else if (level == "debug") spdlog::set_level(spdlog::level::debug);
        else spdlog::warn("VARSEG_LOG='{}' not recognized; using warn", level);
    }
}

} // namespace varseg::cli
