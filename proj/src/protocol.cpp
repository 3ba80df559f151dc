#include "nmqkd/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nmqkd/errors.hpp"

namespace nmqkd {

double default_delay(const DampingProfile& profile) {
    if (const auto* ld = profile.model.as<LorentzDrudeRate>()) return 0.05 / ld->omega_c;
    return 0.01 * profile.horizon;
}

void validate(const SessionConfig& config) {
    if (!(config.delta_t > 0.0) || !std::isfinite(config.delta_t))
        throw DomainError("reference delay delta_t must be positive");
    if (!(config.modulation_variance >= 0.0) || !std::isfinite(config.modulation_variance))
        throw DomainError("modulation variance must be non-negative");
    if (!std::isfinite(config.reference_amplitude.re) || !std::isfinite(config.reference_amplitude.im))
        throw DomainError("reference amplitude must be finite");
}

std::vector<std::string> warnings(const SessionConfig& config) {
    std::vector<std::string> out;
    if (const auto* ld = config.profile.model.as<LorentzDrudeRate>()) {
        const double limit = 0.1 / std::max(ld->omega_0, ld->omega_c);
        if (config.delta_t > limit)
            out.push_back("delta_t exceeds 0.1/max(omega_0, omega_c); first-order shift estimates lose accuracy");
    }
    if (config.reference_amplitude.norm2() == 0.0)
        out.push_back("reference amplitude is zero; reference pulses carry no shift");
    return out;
}

std::string_view to_string(PulseKind k) noexcept { return k == PulseKind::Key ? "key" : "reference"; }
std::string_view to_string(Route r) noexcept { return r == Route::Ordinary ? "ordinary" : "delayed"; }

std::vector<CoherentAmplitude> generate_key_amplitudes(const SessionConfig& config) {
    if (!(config.modulation_variance >= 0.0)) throw DomainError("modulation variance must be non-negative");
    const double sigma = std::sqrt(config.modulation_variance);
    std::vector<CoherentAmplitude> out(config.n_key);
    for (std::size_t k = 0; k < config.n_key; ++k) {
        RandomStream rng(config.seed, StreamPurpose::KeyAmplitude, k);
        const double x = rng.normal();
        const double p = rng.normal();
        out[k] = {sigma * x, sigma * p};
    }
    return out;
}

std::vector<Route> route_reference_pulses(const SessionConfig& config) {
    std::vector<Route> out(config.n_ref);
    for (std::size_t r = 0; r < config.n_ref; ++r) {
        RandomStream rng(config.seed, StreamPurpose::Route, r);
        out[r] = rng.bernoulli_half() ? Route::Delayed : Route::Ordinary;
    }
    return out;
}

std::vector<std::size_t> reference_positions(const SessionConfig& config) {
    const std::size_t total = config.n_key + config.n_ref;
    std::vector<std::size_t> slots(total);
    std::iota(slots.begin(), slots.end(), std::size_t{0});
    RandomStream rng(config.seed, StreamPurpose::Interleave, 0);
    for (std::size_t j = 0; j < config.n_ref; ++j) {
        const std::size_t pick = j + static_cast<std::size_t>(rng.below(total - j));
        std::swap(slots[j], slots[pick]);
    }
    slots.resize(config.n_ref);
    std::sort(slots.begin(), slots.end());
    return slots;
}

double effective_transmission(const DampingProfile& profile, double delta_t, Route route,
                              const std::optional<AttackConfig>& attack) {
    const double tau = profile.horizon;
    const double delay = route == Route::Delayed ? delta_t : 0.0;
    if (!attack) return transmissivity(profile.model, tau + delay);
    const double eta_e = resolved_transmissivity(*attack, profile.model, tau);
    return transmissivity(profile.model, attack->t_e + delay) * eta_e;
}

Propagated propagate(const CoherentAmplitude& alpha, const DampingProfile& profile, double delta_t, Route route,
                     const std::optional<AttackConfig>& attack) {
    const double tau = profile.horizon;
    const double delay = route == Route::Delayed ? delta_t : 0.0;
    if (!attack) return {attenuate(alpha, transmissivity(profile.model, tau + delay)), {}};
    const double eta_e = resolved_transmissivity(*attack, profile.model, tau);
    const auto at_splitter = attenuate(alpha, transmissivity(profile.model, attack->t_e + delay));
    const auto split = beam_splitter(at_splitter, eta_e);
    return {split.transmitted, split.reflected};
}

namespace {

// Bob's side of one pulse. It sees only the arriving amplitude and the pulse
// index; the route is never an input.
PulseRecord measure(std::size_t index, const CoherentAmplitude& arriving, double ordinary_transmission,
                    std::uint64_t seed) {
    RandomStream rng(seed, StreamPurpose::Measurement, index);
    PulseRecord rec;
    rec.index = index;
    rec.basis = rng.bernoulli_half() ? QuadratureBasis::P : QuadratureBasis::X;
    rec.outcome = rescale_outcome(homodyne_sample(arriving, rec.basis, rng), ordinary_transmission);
    return rec;
}

}  // namespace

SessionTranscript run_session(const SessionConfig& config, const std::optional<AttackConfig>& attack) {
    validate(config);
    const double tau = config.profile.horizon;
    if (attack) validate(*attack, tau);

    const auto keys = generate_key_amplitudes(config);
    const auto routes = route_reference_pulses(config);
    const auto ref_slots = reference_positions(config);

    const double t_ordinary = effective_transmission(config.profile, config.delta_t, Route::Ordinary, attack);
    const double t_delayed = effective_transmission(config.profile, config.delta_t, Route::Delayed, attack);
    const double bob_scale = transmissivity(config.profile.model, tau);

    SessionTranscript out{config, attack, {}, {}};
    const std::size_t total = config.n_key + config.n_ref;
    out.pulses.reserve(total);
    out.disclosure.reserve(config.n_ref);

    std::size_t next_key = 0;
    std::size_t next_ref = 0;
    for (std::size_t i = 0; i < total; ++i) {
        const bool is_ref = next_ref < ref_slots.size() && ref_slots[next_ref] == i;
        const PulseKind kind = is_ref ? PulseKind::Reference : PulseKind::Key;
        const Route route = is_ref ? routes[next_ref] : Route::Ordinary;
        const CoherentAmplitude sent = is_ref ? config.reference_amplitude : keys[next_key];
        const auto arriving = attenuate(sent, route == Route::Delayed ? t_delayed : t_ordinary);

        PulseRecord rec = measure(i, arriving, bob_scale, config.seed);
        rec.kind = kind;
        rec.route = route;
        rec.sent = sent;
        out.pulses.push_back(rec);
        if (is_ref) {
            out.disclosure.push_back({i, route});
            ++next_ref;
        } else {
            ++next_key;
        }
    }
    return out;
}

}  // namespace nmqkd
