#pragma once

#include <optional>

#include "nmqkd/decay.hpp"

// Passive beam-splitter attack and the individual-attack security balance.
namespace nmqkd {

// Eve taps the line at t_e (a length, with c = 1) with a beam splitter of
// transmissivity eta_e, keeps the reflected arm and forwards the rest to Bob
// over a lossless link. An empty eta_e means "auto": tuned so that Bob's
// ordinary-route transmission equals that of the clean line.
struct AttackConfig {
    double t_e{0.0};
    std::optional<double> eta_e;
};

// Throws DomainError unless 0 <= t_e <= tau and any explicit eta_e is in [0, 1].
void validate(const AttackConfig& attack, double tau);

// eta_e actually used: the explicit value, or optimal_transmissivity().
double resolved_transmissivity(const AttackConfig& attack, const DecayModel& model, double tau);

// eta_e = e^{-(Gamma(tau) - Gamma(t_e))}: the attacked line then shows the
// clean end-to-end transmission e^{-Gamma(tau)}.
double optimal_transmissivity(const DecayModel& model, double t_e, double tau);

// Eve's end-to-end share of Alice's signal with the optimal splitter,
// e^{-Gamma(t_e)} - e^{-Gamma(tau)}.
double eve_effective_transmission(const DecayModel& model, double t_e, double tau);

// Shannon information (bits per quadrature) of a homodyne readout of a
// Gaussian modulation of variance v_a seen through transmission t_channel
// over shot noise n0: 1/2 log2(1 + t v_a / n0).
double mutual_information(double v_a, double t_channel, double n0);

struct SecurityAssessment {
    double i_ab{0.0};
    double i_ae{0.0};
    double margin{0.0};  // i_ab - i_ae
    bool secure{false};
    double eta_threshold{0.0};
};

// Bob against Eve for an optimal attack at t_e. Secure when Bob's
// transmission e^{-Gamma(tau)} is at least security_threshold(model, t_e),
// which is where I_AB >= I_AE.
SecurityAssessment assess_security(const DecayModel& model, double t_e, double tau, double v_a);

// eta_th = 1/2 e^{-Gamma(t_e_star)}.
double security_threshold(const DecayModel& model, double t_e_star);

}  // namespace nmqkd
