#include "nmqkd/adversary.hpp"

#include <cmath>
#include <numbers>

#include "nmqkd/errors.hpp"
#include "nmqkd/gaussian.hpp"

namespace nmqkd {

namespace {
void require_position(double t_e, double tau) {
    if (!(t_e >= 0.0)) throw DomainError("attack position t_e must be non-negative");
    if (t_e > tau) throw DomainError("attack position t_e lies beyond the channel length");
}
}  // namespace

void validate(const AttackConfig& attack, double tau) {
    require_position(attack.t_e, tau);
    if (attack.eta_e && !(*attack.eta_e >= 0.0 && *attack.eta_e <= 1.0))
        throw DomainError("attack transmissivity eta_e must lie in [0, 1]");
}

double resolved_transmissivity(const AttackConfig& attack, const DecayModel& model, double tau) {
    validate(attack, tau);
    return attack.eta_e ? *attack.eta_e : optimal_transmissivity(model, attack.t_e, tau);
}

double optimal_transmissivity(const DecayModel& model, double t_e, double tau) {
    require_position(t_e, tau);
    return std::exp(-damping_increment(model, t_e, tau - t_e));
}

double eve_effective_transmission(const DecayModel& model, double t_e, double tau) {
    const double eta_e = optimal_transmissivity(model, t_e, tau);
    return transmissivity(model, t_e) * (1.0 - eta_e);
}

double mutual_information(double v_a, double t_channel, double n0) {
    if (!(v_a >= 0.0)) throw DomainError("mutual_information: modulation variance must be non-negative");
    if (!(t_channel >= 0.0 && t_channel <= 1.0))
        throw DomainError("mutual_information: transmission must lie in [0, 1]");
    if (!(n0 > 0.0)) throw DomainError("mutual_information: noise must be positive");
    return 0.5 * std::log1p(t_channel * v_a / n0) / std::numbers::ln2;
}

double security_threshold(const DecayModel& model, double t_e_star) {
    return 0.5 * transmissivity(model, t_e_star);
}

SecurityAssessment assess_security(const DecayModel& model, double t_e, double tau, double v_a) {
    require_position(t_e, tau);
    const double to_bob = transmissivity(model, tau);
    const double to_eve = eve_effective_transmission(model, t_e, tau);

    SecurityAssessment out;
    out.i_ab = mutual_information(v_a, to_bob, kShotNoise);
    out.i_ae = mutual_information(v_a, to_eve, kShotNoise);
    out.margin = out.i_ab - out.i_ae;
    out.eta_threshold = security_threshold(model, t_e);
    out.secure = to_bob >= out.eta_threshold;
    return out;
}

}  // namespace nmqkd
