// nmqkd: command-line front end for the delayed-reference CV-QKD simulator.
//
//   nmqkd rates     --spec exp.cfg --out results/
//   nmqkd simulate  --spec exp.cfg --out results/ [--seed N] [--reps N] [--threads N]
//   nmqkd threshold --spec exp.cfg --out results/
//   nmqkd sweep     --spec exp.cfg --out results/
//
// Exit codes: 0 success, 1 usage or configuration error, 2 runtime error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "nmqkd/config.hpp"
#include "nmqkd/errors.hpp"
#include "nmqkd/experiment.hpp"

namespace fs = std::filesystem;
using namespace nmqkd;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

struct Options {
    std::string spec_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> reps;
    std::optional<std::uint64_t> threads;
    bool quiet = false;
};

ExperimentSpec load_with_overrides(const Options& opt) {
    std::ifstream in(opt.spec_path);
    if (!in) throw ConfigError("", "cannot open spec file " + opt.spec_path);
    std::stringstream text;
    text << in.rdbuf();
    KeyValues kv = parse_key_values(text.str());
    if (opt.seed) kv["session.seed"] = std::to_string(*opt.seed);
    if (opt.reps) kv["run.repetitions"] = std::to_string(*opt.reps);
    if (opt.threads) kv["run.threads"] = std::to_string(*opt.threads);
    return build_spec(kv, fs::path(opt.spec_path).parent_path());
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

void log(const Options& opt, const std::string& msg) {
    if (!opt.quiet) std::cerr << msg << '\n';
}

int cmd_rates(const Options& opt, const ExperimentSpec& spec) {
    const fs::path path = fs::path(opt.out_dir) / "rates.csv";
    auto out = open_output(path);
    write_rates_csv(out, spec);
    log(opt, "wrote " + path.string());
    return 0;
}

int cmd_threshold(const Options& opt, const ExperimentSpec& spec) {
    const fs::path path = fs::path(opt.out_dir) / "threshold.csv";
    auto out = open_output(path);
    write_threshold_csv(out, spec);
    log(opt, "wrote " + path.string());
    return 0;
}

int cmd_simulate(const Options& opt, const ExperimentSpec& spec) {
    for (const auto& w : warnings(spec.session)) log(opt, "warning: " + w);
    const Provenance prov = provenance_of(spec);
    const fs::path sessions_dir = fs::path(opt.out_dir) / "sessions";
    if (spec.outputs.reports || spec.outputs.transcripts) fs::create_directories(sessions_dir);

    auto sink = [&](const SessionOutcome& outcome, const SessionTranscript& transcript) {
        char stem[32];
        std::snprintf(stem, sizeof stem, "session_%05zu", outcome.index);
        if (spec.outputs.reports) {
            auto out = open_output(sessions_dir / (std::string(stem) + ".report.json"));
            out << report_json(*outcome.report, outcome, prov);
        }
        if (spec.outputs.transcripts) {
            auto out = open_output(sessions_dir / (std::string(stem) + ".transcript.jsonl"));
            write_transcript(out, transcript, prov);
        }
    };
    const auto result = run_experiment(spec, sink);

    const fs::path path = fs::path(opt.out_dir) / "aggregate.json";
    auto out = open_output(path);
    out << aggregate_json(result, prov);

    const auto& a = result.aggregate;
    log(opt, "sessions: " + std::to_string(a.repetitions) + ", eve_present: " + std::to_string(a.eve_present) +
                 ", clean: " + std::to_string(a.clean) + ", inconclusive: " + std::to_string(a.inconclusive) +
                 ", errors: " + std::to_string(a.errors));
    log(opt, "wrote " + path.string());
    for (const auto& s : result.sessions)
        if (!s.error.empty()) std::cerr << "session " << s.index << " failed: " << s.error << '\n';
    return a.errors > 0 ? kExitRuntime : 0;
}

int cmd_sweep(const Options& opt, const ExperimentSpec& spec) {
    const auto points = run_sweep(spec);
    const fs::path path = fs::path(opt.out_dir) / "sweep.csv";
    auto out = open_output(path);
    write_sweep_csv(out, spec, points);
    log(opt, "wrote " + path.string() + " (" + std::to_string(points.size()) + " points)");
    bool failed = false;
    for (const auto& p : points) failed = failed || !p.error.empty() || (p.aggregate && p.aggregate->errors > 0);
    return failed ? kExitRuntime : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Delayed-reference CV-QKD over time-dependent lossy channels"};
    app.require_subcommand(1);
    Options opt;

    auto add_common = [&opt](CLI::App* cmd) {
        cmd->add_option("--spec", opt.spec_path, "Experiment file")->required()->check(CLI::ExistingFile);
        cmd->add_option("--out", opt.out_dir, "Output directory");
        cmd->add_option("--seed", opt.seed, "Override session.seed");
        cmd->add_option("--reps", opt.reps, "Override run.repetitions");
        cmd->add_option("--threads", opt.threads, "Override run.threads");
        cmd->add_flag("--quiet", opt.quiet, "Suppress progress messages");
    };
    auto* rates = app.add_subcommand("rates", "Emit gamma(t)/gamma_M, Gamma(t), eta(t) curves");
    auto* simulate = app.add_subcommand("simulate", "Run sessions and detection");
    auto* threshold = app.add_subcommand("threshold", "Tabulate t_E* and eta_th against epsilon");
    auto* sweep = app.add_subcommand("sweep", "Cartesian parameter sweep over sweep.<key> axes");
    for (auto* cmd : {rates, simulate, threshold, sweep}) add_common(cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    std::optional<ExperimentSpec> spec;
    try {
        spec = load_with_overrides(opt);
        fs::create_directories(opt.out_dir);
        if (*rates) return cmd_rates(opt, *spec);
        if (*simulate) return cmd_simulate(opt, *spec);
        if (*threshold) return cmd_threshold(opt, *spec);
        if (*sweep) return cmd_sweep(opt, *spec);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitConfig;
}
