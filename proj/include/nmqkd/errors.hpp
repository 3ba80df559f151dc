#pragma once

#include <stdexcept>
#include <string>

namespace nmqkd {

// Argument outside the mathematical domain of an operation (negative time,
// transmissivity outside [0,1], attack position beyond the line, ...).
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// Operation called in a state that forbids it, e.g. rescaling twice.
struct UsageError : std::logic_error {
    using std::logic_error::logic_error;
};

// Operation requested on a DecayModel variant that does not support it.
struct UnsupportedModel : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Too few samples to form a statistic.
struct InsufficientData : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Experiment file could not be parsed or failed validation. The key is the
// dotted configuration key at fault, empty for file-level problems.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& what)
        : std::runtime_error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

}  // namespace nmqkd
