#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nmqkd/adversary.hpp"
#include "nmqkd/decay.hpp"
#include "nmqkd/gaussian.hpp"

// One session of the coherent-state protocol with delayed reference pulses.
//
// Alice sends Gaussian-modulated key pulses over the ordinary line of length
// tau. Interleaved with them she sends reference pulses of fixed amplitude
// alpha_0, each routed with probability 1/2 through the ordinary line or
// through a line lengthened by delta_t at its input. Bob measures a random
// quadrature of every pulse and rescales by the ordinary line's loss,
// whatever the route. After the session Alice discloses the reference routes.
namespace nmqkd {

struct SessionConfig {
    DampingProfile profile;
    double delta_t;
    double modulation_variance{10.0 * kShotNoise};
    CoherentAmplitude reference_amplitude{20.0, 0.0};
    std::size_t n_key{10000};
    std::size_t n_ref{10000};
    std::uint64_t seed{1};
};

// Delay for the reference line when none is given: 0.05 / omega_c for the
// Lorentz-Drude law, 1% of tau otherwise.
double default_delay(const DampingProfile& profile);

// Throws DomainError on invalid fields.
void validate(const SessionConfig& config);

// Soft problems, e.g. a delay too long for the first-order shift formulas.
std::vector<std::string> warnings(const SessionConfig& config);

enum class PulseKind { Key, Reference };
enum class Route { Ordinary, Delayed };

std::string_view to_string(PulseKind k) noexcept;
std::string_view to_string(Route r) noexcept;

struct PulseRecord {
    std::size_t index{0};
    PulseKind kind{PulseKind::Key};
    Route route{Route::Ordinary};
    CoherentAmplitude sent;
    QuadratureBasis basis{QuadratureBasis::X};
    HomodyneOutcome outcome;  // rescaled
};

struct RouteDisclosure {
    std::size_t index;
    Route route;
};

struct SessionTranscript {
    SessionConfig config;
    std::optional<AttackConfig> attack;
    std::vector<PulseRecord> pulses;
    std::vector<RouteDisclosure> disclosure;  // reference pulses only, ascending index
};

// n_key amplitudes with independent N(0, V_A) quadratures. Amplitude k is
// drawn from its own stream, so the list does not depend on evaluation order.
std::vector<CoherentAmplitude> generate_key_amplitudes(const SessionConfig& config);

// n_ref fair, independent route choices, one stream per reference pulse.
std::vector<Route> route_reference_pulses(const SessionConfig& config);

// Positions of the reference pulses in the combined stream of
// n_key + n_ref pulses, a uniformly random subset in ascending order.
std::vector<std::size_t> reference_positions(const SessionConfig& config);

// Amplitude-squared transmission from Alice to Bob for a route, with or
// without an attack. With an attack at t_e the signal is damped up to
// t_e (t_e + delta_t on the delayed route), split, and the transmitted arm
// reaches Bob without further loss.
double effective_transmission(const DampingProfile& profile, double delta_t, Route route,
                              const std::optional<AttackConfig>& attack);

struct Propagated {
    CoherentAmplitude at_bob;
    CoherentAmplitude at_eve;  // zero without an attack
};

// Same path as effective_transmission, applied to an amplitude by composing
// the attenuation and beam-splitter maps.
Propagated propagate(const CoherentAmplitude& alpha, const DampingProfile& profile, double delta_t, Route route,
                     const std::optional<AttackConfig>& attack);

SessionTranscript run_session(const SessionConfig& config, const std::optional<AttackConfig>& attack);

}  // namespace nmqkd
