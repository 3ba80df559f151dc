#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "nmqkd/config.hpp"
#include "nmqkd/detection.hpp"
#include "nmqkd/protocol.hpp"

// Orchestration behind the command-line subcommands.
namespace nmqkd {

inline constexpr const char* kArtifactVersion = "nmqkd 1.0.0";

struct Provenance {
    std::string spec_hash;
    std::uint64_t seed{0};
    std::string version{kArtifactVersion};
};

Provenance provenance_of(const ExperimentSpec& spec);

// Seed of repetition k under the master seed.
std::uint64_t repetition_seed(std::uint64_t master_seed, std::size_t k);

struct SessionOutcome {
    std::size_t index{0};
    std::uint64_t seed{0};
    std::optional<DetectionReport> report;
    std::string error;  // non-empty when the session failed
};

struct Aggregate {
    std::size_t repetitions{0};
    std::size_t errors{0};
    std::size_t clean{0};
    std::size_t eve_present{0};
    std::size_t inconclusive{0};
    std::size_t width_anomalies{0};
    double detection_rate{0.0};  // eve_present / completed sessions
    double mean_observed_shift{0.0};
    double mean_standard_error{0.0};
    ShiftEstimate expected_clean;
    std::optional<ShiftEstimate> expected_attacked;
    std::size_t localized{0};
    std::optional<double> localization_median;  // median of all candidate positions
    double t_e_star{0.0};
    double threshold_transmission{0.5};
};

struct ExperimentResult {
    std::vector<SessionOutcome> sessions;  // ordered by repetition index
    Aggregate aggregate;
};

// Called from worker threads once per finished session.
using SessionSink = std::function<void(const SessionOutcome&, const SessionTranscript&)>;

// Runs spec.repetitions sessions on spec.threads workers. Results do not
// depend on the number of threads.
ExperimentResult run_experiment(const ExperimentSpec& spec, const SessionSink& sink = {});

Aggregate aggregate(const ExperimentSpec& spec, const DetectionContext& context,
                    const std::vector<SessionOutcome>& sessions);

// (t, gamma/gamma_asymptotic, Gamma, eta) rows over [0, t_max].
struct RateRow {
    double t, normalized_rate, damping, transmissivity;
};
std::vector<RateRow> rate_curve(const ExperimentSpec& spec);

struct ThresholdRow {
    double epsilon, t_e_star, damping_at_t_e_star, eta_threshold;
};
std::vector<double> threshold_epsilons(const ExperimentSpec& spec);
std::vector<ThresholdRow> threshold_table(const ExperimentSpec& spec);

// Cartesian product of the spec's sweep axes. Each point rebuilds the spec
// with the axis values substituted and runs it without per-session output.
struct SweepPoint {
    std::vector<std::string> values;  // one per axis
    std::optional<Aggregate> aggregate;
    std::string error;
};
std::vector<SweepPoint> run_sweep(const ExperimentSpec& spec);

// Writers. Numbers are printed in shortest round-trip form.
void write_rates_csv(std::ostream& out, const ExperimentSpec& spec);
void write_threshold_csv(std::ostream& out, const ExperimentSpec& spec);
void write_sweep_csv(std::ostream& out, const ExperimentSpec& spec, const std::vector<SweepPoint>& points);
void write_transcript(std::ostream& out, const SessionTranscript& transcript, const Provenance& prov);
std::string report_json(const DetectionReport& report, const SessionOutcome& outcome, const Provenance& prov);
std::string aggregate_json(const ExperimentResult& result, const Provenance& prov);

std::string format_number(double v);

}  // namespace nmqkd
