#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

// Time-dependent loss laws of a lossy bosonic channel.
//
// With c = 1 the position along the line and the propagation time are the
// same coordinate, so every "time" below is also a length. A coherent
// amplitude entering the line is damped by exp(-Gamma(t)/2) after time t,
// where Gamma(t) = 2 * integral_0^t gamma(s) ds.
namespace nmqkd {

// Constant loss rate (uniform line).
struct MarkovianRate {
    double gamma_m{};
};

// Weak-coupling rate of a mode at frequency omega_0 coupled to a zero
// temperature Ohmic reservoir with a Lorentz-Drude cutoff at omega_c:
//   gamma(t) = gamma_m [1 - e^{-omega_c t} (cos omega_0 t + (omega_c/omega_0) sin omega_0 t)].
// The weak-coupling regime (gamma_m small against omega_0) is assumed, not enforced.
struct LorentzDrudeRate {
    double gamma_m{};
    double omega_0{};
    double omega_c{};
};

struct RateSample {
    double time{};
    double rate{};
};

// Rate given at sample times, linearly interpolated and held at the last
// value beyond the table.
class TabulatedRate {
public:
    explicit TabulatedRate(std::vector<RateSample> samples);

    const std::vector<RateSample>& samples() const noexcept { return samples_; }
    double rate(double t) const;
    // integral_0^t gamma(s) ds, exact for the piecewise-linear interpolant.
    double integral(double t) const;

private:
    std::size_t segment(double t) const;

    std::vector<RateSample> samples_;
    std::vector<double> prefix_;  // integral up to each sample time
};

class DecayModel {
public:
    using Variant = std::variant<MarkovianRate, LorentzDrudeRate, TabulatedRate>;

    // Constructors validate the parameters and throw DomainError.
    DecayModel(MarkovianRate m);
    DecayModel(LorentzDrudeRate m);
    DecayModel(TabulatedRate m);

    const Variant& variant() const noexcept { return model_; }
    template <class T>
    const T* as() const noexcept {
        return std::get_if<T>(&model_);
    }
    std::string name() const;

private:
    Variant model_;
};

// The channel together with its length tau.
struct DampingProfile {
    DecayModel model;
    double horizon;

    DampingProfile(DecayModel m, double tau);
};

// gamma(t). Throws DomainError for t < 0.
double rate(const DecayModel& model, double t);

// Gamma(t) = 2 integral_0^t gamma. Closed form for the built-in laws.
double accumulated_damping(const DecayModel& model, double t);

// Gamma(t + dt) - Gamma(t), computed without subtracting two large values.
// Exactly 2 gamma_m dt for the Markovian law.
double damping_increment(const DecayModel& model, double t, double dt);

// e^{-Gamma(t)}.
double transmissivity(const DecayModel& model, double t);

// Long-time rate: gamma_m, or the last tabulated rate.
double asymptotic_rate(const DecayModel& model);

// True when gamma(t) is the same at every t.
bool is_constant_rate(const DecayModel& model);

// tau_R = 1 / omega_c. Throws UnsupportedModel for other laws.
double reservoir_correlation_time(const DecayModel& model);

// Grid used for inversions over [lo, hi]: 10 000 nodes, raised to keep at
// least 50 nodes per oscillation period 2 pi / omega_0.
std::size_t default_resolution(const DecayModel& model, double lo, double hi);

struct RateInversion {
    bool entire_window{false};  // gamma is constant and equal to the target
    std::vector<double> roots;  // ascending
};

// All t in [lo, hi] with gamma(t) == target. Sign changes on a uniform grid
// of `resolution` nodes are refined by bisection to 1e-12 (hi - lo).
RateInversion invert_rate(const DecayModel& model, double target, double lo, double hi,
                          std::optional<std::size_t> resolution = std::nullopt);

}  // namespace nmqkd
