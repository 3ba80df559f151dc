#pragma once

#include <string_view>
#include <utility>

#include "nmqkd/random.hpp"

// Coherent states under pure loss and their homodyne statistics.
//
// Quadrature convention: x = (a + a^dag)/2, p = (a - a^dag)/(2i). A coherent
// state |alpha> then has <x> = Re alpha, <p> = Im alpha and shot-noise
// variance N0 = 1/4 in either quadrature.
namespace nmqkd {

inline constexpr double kShotNoise = 0.25;

struct CoherentAmplitude {
    double re{0.0};
    double im{0.0};

    double norm2() const noexcept { return re * re + im * im; }
    friend bool operator==(const CoherentAmplitude&, const CoherentAmplitude&) = default;
};

enum class QuadratureBasis { X, P };

std::string_view to_string(QuadratureBasis b) noexcept;

struct HomodyneOutcome {
    double value{0.0};
    QuadratureBasis basis{QuadratureBasis::X};
    bool rescaled{false};
};

struct QuadratureStats {
    double mean;
    double variance;
};

// sqrt(eta) * alpha. eta must lie in [0, 1].
CoherentAmplitude attenuate(const CoherentAmplitude& alpha, double eta);

struct SplitAmplitudes {
    CoherentAmplitude transmitted;
    CoherentAmplitude reflected;
};

// Beam splitter with intensity transmissivity eta_e in [0, 1]; vacuum on the
// second input port.
SplitAmplitudes beam_splitter(const CoherentAmplitude& alpha, double eta_e);

// Mean is the matching component of alpha, variance is N0.
QuadratureStats homodyne_distribution(const CoherentAmplitude& alpha, QuadratureBasis basis);

HomodyneOutcome homodyne_sample(const CoherentAmplitude& alpha, QuadratureBasis basis, RandomStream& rng);

// Divides the reading by sqrt(eta_total) so its mean estimates the amplitude
// Alice sent. The noise is amplified too: the variance becomes N0/eta_total.
// Throws UsageError when the outcome is already rescaled and DomainError for
// eta_total outside (0, 1].
HomodyneOutcome rescale_outcome(const HomodyneOutcome& outcome, double eta_total);

}  // namespace nmqkd
