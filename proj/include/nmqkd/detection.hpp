#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "nmqkd/decay.hpp"
#include "nmqkd/gaussian.hpp"
#include "nmqkd/protocol.hpp"

// Post-session check of the reference pulses.
//
// Without Eve the delayed references arrive weaker than the ordinary ones by
//   dx_NE = |alpha_0 (1 - e^{-(Gamma(tau + dt) - Gamma(tau))/2})| ~ |alpha_0 gamma(tau) dt|.
// With Eve at t_e the extra delay acts before her splitter instead, giving
//   dx_E  = |alpha_0 (1 - e^{-(Gamma(t_e + dt) - Gamma(t_e))/2})| ~ |alpha_0 gamma(t_e) dt|.
// The two differ whenever gamma(t_e) != gamma(tau), which a constant rate
// never allows.
namespace nmqkd {

struct DetectionConfig {
    double epsilon{0.0};             // precision dead-band, rescaled quadrature units
    double significance_sigmas{3.0};  // half-width of the acceptance band in standard errors
    std::optional<std::size_t> grid_resolution;  // default: default_resolution()
};

void validate(const DetectionConfig& config);

struct ShiftEstimate {
    double exact{0.0};
    double first_order{0.0};
};

ShiftEstimate expected_shift_clean(const DecayModel& model, double alpha0, double tau, double delta_t);
ShiftEstimate expected_shift_attacked(const DecayModel& model, double alpha0, double t_e, double delta_t);

// Sample statistics of the rescaled reference readings in one basis.
struct BasisComparison {
    QuadratureBasis basis{QuadratureBasis::X};
    double component{0.0};  // matching component of alpha_0
    std::size_t n_ordinary{0};
    std::size_t n_delayed{0};
    double mean_ordinary{0.0};
    double mean_delayed{0.0};
    double var_ordinary{0.0};
    double var_delayed{0.0};
};

struct ShiftStatistics {
    std::vector<BasisComparison> bases;
    // Shift of the ordinary population over the delayed one, in units of
    // |alpha_0| so that it compares directly with dx_NE and dx_E. With a
    // complex alpha_0 both bases contribute, weighted by inverse variance.
    double observed_shift{0.0};
    double standard_error{0.0};
    // The two populations should share one width; a mismatch beyond five
    // standard errors of the log variance ratio is flagged.
    bool width_anomaly{false};
};

// Splits the disclosed reference pulses by route. Only readings in a basis
// where alpha_0 has a nonzero component are used. Throws InsufficientData if
// any used population has fewer than two readings.
ShiftStatistics split_and_compare(const SessionTranscript& transcript);

enum class Verdict { Clean, EvePresent, Inconclusive };
enum class LimitingFactor { None, Statistics, Precision };

std::string_view to_string(Verdict v) noexcept;
std::string_view to_string(LimitingFactor f) noexcept;

struct DecisionInputs {
    double observed_shift{0.0};
    double standard_error{0.0};
    double expected_clean{0.0};  // exact dx_NE
    // Largest |dx_E(t) - dx_NE| over attack positions t in [0, tau]; zero
    // when no attack can change the shift.
    double max_discrepancy{0.0};
};

struct Decision {
    Verdict verdict{Verdict::Clean};
    double deviation{0.0};  // |observed - expected_clean|
    double band{0.0};       // max(sigmas * SE, epsilon)
    LimitingFactor limiting{LimitingFactor::None};
};

// EvePresent when the deviation exceeds the band. Inside the band the verdict
// is Clean, unless the band is so wide that no attack position could have
// left the band, which is Inconclusive. A deviation exactly on the band edge
// is Inconclusive.
Decision decide(const DecisionInputs& inputs, const DetectionConfig& config);

struct LocalizationCandidate {
    double t{0.0};
    double lower{0.0};
    double upper{0.0};
};

struct Localization {
    enum class Status { Candidates, EntireWindow, NoSolution, NotAttempted };
    Status status{Status::NotAttempted};
    std::vector<LocalizationCandidate> candidates;
};

std::string_view to_string(Localization::Status s) noexcept;

// Attack positions t in [0, tau] whose exact shift dx_E(t) equals the observed
// shift. Each candidate carries an interval of +-sigmas standard errors mapped
// through the local slope of dx_E. If no position matches exactly, the
// closest one is returned when it lies within the band, with the interval
// of positions inside the band. A constant rate gives EntireWindow.
Localization localize(const DecayModel& model, double observed_shift, double alpha0, double delta_t, double tau,
                      std::optional<std::size_t> grid_resolution = std::nullopt, double standard_error = 0.0,
                      double sigmas = 3.0);

// Largest |dx_E(t) - dx_NE| over a grid on [0, tau].
double max_shift_discrepancy(const DecayModel& model, double alpha0, double delta_t, double tau,
                             std::optional<std::size_t> grid_resolution = std::nullopt);

// t_E*: the earliest t such that |alpha_0 dt (gamma(s) - gamma(tau))| < epsilon
// for every grid node s in [t, tau]. An attack later than t_E* cannot be told
// apart at precision epsilon. Equals tau when epsilon is 0.
double min_detectable_attack_time(const DecayModel& model, double alpha0, double delta_t, double epsilon, double tau,
                                  std::optional<std::size_t> grid_resolution = std::nullopt);

// 1/2 e^{-Gamma(t_E*)}: the line is secure for any overall transmission at
// or above this bound.
double secure_transmission_bound(const DecayModel& model, double t_e_star);

// Per-configuration quantities shared by every session of an experiment.
struct DetectionContext {
    ShiftEstimate expected_clean;
    double max_discrepancy{0.0};
    double t_e_star{0.0};
    double threshold_transmission{0.5};
};

DetectionContext prepare_detection(const SessionConfig& session, const DetectionConfig& config);

struct DetectionReport {
    ShiftEstimate expected_shift_clean;
    ShiftStatistics statistics;
    Decision decision;
    Localization localization;
    double t_e_star{0.0};
    double threshold_transmission{0.5};
};

// split_and_compare + decide, localizing when Eve is reported.
DetectionReport analyze(const SessionTranscript& transcript, const DetectionContext& context,
                        const DetectionConfig& config);
DetectionReport analyze(const SessionTranscript& transcript, const DetectionConfig& config);

}  // namespace nmqkd
