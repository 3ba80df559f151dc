#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nmqkd/adversary.hpp"
#include "nmqkd/detection.hpp"
#include "nmqkd/protocol.hpp"

// Experiment files: flat "section.key = value" lines, '#' starts a comment.
// The accepted keys are listed in docs/config.md.
namespace nmqkd {

using KeyValues = std::map<std::string, std::string>;

struct RatesGrid {
    std::optional<double> t_max;  // default: the channel length
    std::size_t points{1001};
};

struct ThresholdSweep {
    std::optional<std::vector<double>> epsilons;  // default: evenly spaced, see threshold_epsilons()
    std::size_t points{11};
};

struct SweepAxis {
    std::string key;
    std::vector<std::string> values;
};

struct OutputOptions {
    bool transcripts{true};
    bool reports{true};
};

struct ExperimentSpec {
    SessionConfig session;
    std::optional<AttackConfig> attack;
    DetectionConfig detection;
    std::size_t repetitions{1};
    std::size_t threads{1};
    RatesGrid rates{};
    ThresholdSweep threshold{};
    std::vector<SweepAxis> sweep{};
    OutputOptions outputs{};
    KeyValues source{};            // validated key/values the spec was built from
    std::filesystem::path base_dir{};  // for relative file references
};

// Parses the key/value syntax only. Throws ConfigError on malformed lines
// or duplicate keys.
KeyValues parse_key_values(const std::string& text);

// Validates every key and fills defaults. Relative table paths resolve
// against base_dir. Throws ConfigError naming the offending key.
ExperimentSpec build_spec(const KeyValues& values, const std::filesystem::path& base_dir = {});

// Reads, parses and builds. Throws ConfigError.
ExperimentSpec load_spec(const std::filesystem::path& path);

// Reads a "time,rate" table (one pair per line, '#' comments allowed).
std::vector<RateSample> read_rate_table(const std::filesystem::path& path);

// Keys that accept a single number, i.e. the axes a sweep may vary.
const std::vector<std::string>& numeric_keys();

// FNV-1a 64 over the canonical key/value listing (plus any referenced rate
// table), as 16 hex digits. run.threads is left out.
std::string spec_hash(const ExperimentSpec& spec);

}  // namespace nmqkd
