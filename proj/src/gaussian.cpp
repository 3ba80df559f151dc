#include "nmqkd/gaussian.hpp"

#include <cmath>

#include "nmqkd/errors.hpp"

namespace nmqkd {

namespace {
void require_unit_interval(double eta, const char* op) {
    if (!(eta >= 0.0 && eta <= 1.0)) throw DomainError(std::string(op) + ": transmissivity must lie in [0, 1]");
}
}  // namespace

std::string_view to_string(QuadratureBasis b) noexcept { return b == QuadratureBasis::X ? "X" : "P"; }

CoherentAmplitude attenuate(const CoherentAmplitude& alpha, double eta) {
    require_unit_interval(eta, "attenuate");
    const double s = std::sqrt(eta);
    return {s * alpha.re, s * alpha.im};
}

SplitAmplitudes beam_splitter(const CoherentAmplitude& alpha, double eta_e) {
    require_unit_interval(eta_e, "beam_splitter");
    const double t = std::sqrt(eta_e);
    const double r = std::sqrt(1.0 - eta_e);
    return {{t * alpha.re, t * alpha.im}, {r * alpha.re, r * alpha.im}};
}

QuadratureStats homodyne_distribution(const CoherentAmplitude& alpha, QuadratureBasis basis) {
    return {basis == QuadratureBasis::X ? alpha.re : alpha.im, kShotNoise};
}

HomodyneOutcome homodyne_sample(const CoherentAmplitude& alpha, QuadratureBasis basis, RandomStream& rng) {
    const auto stats = homodyne_distribution(alpha, basis);
    return {rng.normal(stats.mean, std::sqrt(stats.variance)), basis, false};
}

HomodyneOutcome rescale_outcome(const HomodyneOutcome& outcome, double eta_total) {
    if (outcome.rescaled) throw UsageError("rescale_outcome: outcome already rescaled");
    if (!(eta_total > 0.0 && eta_total <= 1.0))
        throw DomainError("rescale_outcome: total transmissivity must lie in (0, 1]");
    return {outcome.value / std::sqrt(eta_total), outcome.basis, true};
}

}  // namespace nmqkd
