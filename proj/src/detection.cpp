#include "nmqkd/detection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nmqkd/errors.hpp"
#include "nmqkd/numeric.hpp"

namespace nmqkd {

namespace {

// |alpha_0| (1 - e^{-(Gamma(t + dt) - Gamma(t))/2})
double shift_at(const DecayModel& model, double alpha0, double t, double delta_t) {
    return std::abs(alpha0) * -std::expm1(-0.5 * damping_increment(model, t, delta_t));
}

void require_delay(double delta_t) {
    if (!(delta_t > 0.0)) throw DomainError("reference delay delta_t must be positive");
}

struct Moments {
    std::size_t n{0};
    double mean{0.0};
    double m2{0.0};

    void add(double x) {
        ++n;
        const double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }
    double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
};

}  // namespace

void validate(const DetectionConfig& config) {
    if (!(config.epsilon >= 0.0)) throw DomainError("detection epsilon must be non-negative");
    if (!(config.significance_sigmas > 0.0)) throw DomainError("significance_sigmas must be positive");
    if (config.grid_resolution && *config.grid_resolution < 2)
        throw DomainError("grid_resolution must be at least 2");
}

ShiftEstimate expected_shift_clean(const DecayModel& model, double alpha0, double tau, double delta_t) {
    require_delay(delta_t);
    return {shift_at(model, alpha0, tau, delta_t), std::abs(alpha0 * rate(model, tau) * delta_t)};
}

ShiftEstimate expected_shift_attacked(const DecayModel& model, double alpha0, double t_e, double delta_t) {
    require_delay(delta_t);
    return {shift_at(model, alpha0, t_e, delta_t), std::abs(alpha0 * rate(model, t_e) * delta_t)};
}

ShiftStatistics split_and_compare(const SessionTranscript& transcript) {
    const auto& alpha0 = transcript.config.reference_amplitude;
    ShiftStatistics out;

    double weight_sum = 0.0;
    double weighted_ratio = 0.0;
    double log_ratio_excess = 0.0;
    for (const QuadratureBasis basis : {QuadratureBasis::X, QuadratureBasis::P}) {
        const double component = basis == QuadratureBasis::X ? alpha0.re : alpha0.im;
        if (component == 0.0) continue;

        Moments ordinary;
        Moments delayed;
        for (const auto& d : transcript.disclosure) {
            const auto& pulse = transcript.pulses.at(d.index);
            if (pulse.outcome.basis != basis) continue;
            (d.route == Route::Ordinary ? ordinary : delayed).add(pulse.outcome.value);
        }
        if (ordinary.n < 2 || delayed.n < 2)
            throw InsufficientData("split_and_compare: fewer than two reference readings in " +
                                   std::string(to_string(basis)) + " on one route");

        BasisComparison cmp{basis,        component,          ordinary.n,          delayed.n,
                            ordinary.mean, delayed.mean,      ordinary.variance(), delayed.variance()};
        out.bases.push_back(cmp);

        const double var_diff = cmp.var_ordinary / static_cast<double>(cmp.n_ordinary) +
                                cmp.var_delayed / static_cast<double>(cmp.n_delayed);
        const double ratio = (cmp.mean_ordinary - cmp.mean_delayed) / component;
        const double ratio_var = var_diff / (component * component);
        const double w = ratio_var > 0.0 ? 1.0 / ratio_var : 0.0;
        weight_sum += w;
        weighted_ratio += w * ratio;

        if (cmp.var_ordinary > 0.0 && cmp.var_delayed > 0.0) {
            const double spread = std::sqrt(2.0 / static_cast<double>(cmp.n_ordinary - 1) +
                                            2.0 / static_cast<double>(cmp.n_delayed - 1));
            log_ratio_excess =
                std::max(log_ratio_excess, std::abs(std::log(cmp.var_ordinary / cmp.var_delayed)) / spread);
        }
    }
    if (out.bases.empty()) throw InsufficientData("split_and_compare: reference amplitude is zero");

    const double magnitude = std::sqrt(alpha0.norm2());
    if (weight_sum > 0.0) {
        out.observed_shift = magnitude * weighted_ratio / weight_sum;
        out.standard_error = magnitude / std::sqrt(weight_sum);
    } else {
        // Noise-free readings: every basis has the same exact ratio.
        const auto& b = out.bases.front();
        out.observed_shift = magnitude * (b.mean_ordinary - b.mean_delayed) / b.component;
        out.standard_error = 0.0;
    }
    out.width_anomaly = log_ratio_excess > 5.0;
    return out;
}

std::string_view to_string(Verdict v) noexcept {
    switch (v) {
        case Verdict::Clean: return "clean";
        case Verdict::EvePresent: return "eve_present";
        case Verdict::Inconclusive: return "inconclusive";
    }
    return "?";
}

std::string_view to_string(LimitingFactor f) noexcept {
    switch (f) {
        case LimitingFactor::None: return "none";
        case LimitingFactor::Statistics: return "statistics";
        case LimitingFactor::Precision: return "precision";
    }
    return "?";
}

std::string_view to_string(Localization::Status s) noexcept {
    switch (s) {
        case Localization::Status::Candidates: return "candidates";
        case Localization::Status::EntireWindow: return "entire_window";
        case Localization::Status::NoSolution: return "no_solution";
        case Localization::Status::NotAttempted: return "not_attempted";
    }
    return "?";
}

Decision decide(const DecisionInputs& inputs, const DetectionConfig& config) {
    validate(config);
    Decision d;
    const double statistical = config.significance_sigmas * inputs.standard_error;
    d.band = std::max(statistical, config.epsilon);
    d.deviation = std::abs(inputs.observed_shift - inputs.expected_clean);

    if (d.deviation > d.band) {
        d.verdict = Verdict::EvePresent;
    } else if (d.deviation == d.band) {
        d.verdict = Verdict::Inconclusive;
    } else if (inputs.max_discrepancy > 0.0 && d.band >= inputs.max_discrepancy) {
        d.verdict = Verdict::Inconclusive;
    } else {
        d.verdict = Verdict::Clean;
    }
    if (d.verdict == Verdict::Inconclusive)
        d.limiting = statistical >= config.epsilon ? LimitingFactor::Statistics : LimitingFactor::Precision;
    return d;
}

Localization localize(const DecayModel& model, double observed_shift, double alpha0, double delta_t, double tau,
                      std::optional<std::size_t> grid_resolution, double standard_error, double sigmas) {
    require_delay(delta_t);
    if (!(observed_shift >= 0.0)) throw DomainError("localize: observed shift must be non-negative");
    if (!(tau > 0.0)) throw DomainError("localize: channel length must be positive");

    Localization out;
    if (is_constant_rate(model)) {
        out.status = Localization::Status::EntireWindow;
        return out;
    }
    const std::size_t points = grid_resolution.value_or(default_resolution(model, 0.0, tau));
    const auto found = numeric::grid_roots(
        [&](double t) { return shift_at(model, alpha0, t, delta_t) - observed_shift; }, 0.0, tau, points);
    if (found.all_zero) {
        out.status = Localization::Status::EntireWindow;
        return out;
    }
    if (found.roots.empty()) {
        // Noise can push the observation just past the reachable range; accept
        // the closest position when it lies within the band.
        const double band = sigmas * standard_error;
        const auto grid = numeric::linspace(0.0, tau, points);
        std::size_t best = 0;
        double best_gap = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < grid.size(); ++k) {
            const double gap = std::abs(shift_at(model, alpha0, grid[k], delta_t) - observed_shift);
            if (gap < best_gap) {
                best_gap = gap;
                best = k;
            }
        }
        if (!(best_gap <= band)) {
            out.status = Localization::Status::NoSolution;
            return out;
        }
        std::size_t lo = best;
        std::size_t hi = best;
        auto inside = [&](std::size_t k) {
            return std::abs(shift_at(model, alpha0, grid[k], delta_t) - observed_shift) <= band;
        };
        while (lo > 0 && inside(lo - 1)) --lo;
        while (hi + 1 < grid.size() && inside(hi + 1)) ++hi;
        out.status = Localization::Status::Candidates;
        out.candidates.push_back({grid[best], grid[lo], grid[hi]});
        return out;
    }
    out.status = Localization::Status::Candidates;
    for (const double t : found.roots) {
        const double inc = damping_increment(model, t, delta_t);
        const double slope = std::abs(alpha0) * std::exp(-0.5 * inc) * (rate(model, t + delta_t) - rate(model, t));
        LocalizationCandidate c{t, 0.0, tau};
        if (slope != 0.0) {
            const double half = sigmas * standard_error / std::abs(slope);
            c.lower = std::max(0.0, t - half);
            c.upper = std::min(tau, t + half);
        }
        out.candidates.push_back(c);
    }
    return out;
}

double max_shift_discrepancy(const DecayModel& model, double alpha0, double delta_t, double tau,
                             std::optional<std::size_t> grid_resolution) {
    require_delay(delta_t);
    if (is_constant_rate(model)) return 0.0;
    const double clean = shift_at(model, alpha0, tau, delta_t);
    const std::size_t points = grid_resolution.value_or(default_resolution(model, 0.0, tau));
    double worst = 0.0;
    for (const double t : numeric::linspace(0.0, tau, points))
        worst = std::max(worst, std::abs(shift_at(model, alpha0, t, delta_t) - clean));
    return worst;
}

double min_detectable_attack_time(const DecayModel& model, double alpha0, double delta_t, double epsilon, double tau,
                                  std::optional<std::size_t> grid_resolution) {
    require_delay(delta_t);
    if (!(epsilon >= 0.0)) throw DomainError("epsilon must be non-negative");
    if (!(tau > 0.0)) throw DomainError("channel length must be positive");

    const double rate_end = rate(model, tau);
    const double scale = std::abs(alpha0) * delta_t;
    auto excess = [&](double s) { return scale * std::abs(rate(model, s) - rate_end) - epsilon; };

    const std::size_t points = grid_resolution.value_or(default_resolution(model, 0.0, tau));
    const auto grid = numeric::linspace(0.0, tau, points);
    // Walk back from tau to the last node where the discrepancy reaches epsilon.
    for (std::size_t k = points; k-- > 0;) {
        if (excess(grid[k]) >= 0.0) {
            if (k + 1 == points) return tau;
            // excess >= 0 at grid[k], < 0 at grid[k + 1]: refine the crossing.
            return numeric::bisect(excess, grid[k], grid[k + 1], 1e-12 * tau);
        }
    }
    return 0.0;
}

double secure_transmission_bound(const DecayModel& model, double t_e_star) {
    return security_threshold(model, t_e_star);
}

DetectionContext prepare_detection(const SessionConfig& session, const DetectionConfig& config) {
    validate(config);
    const auto& model = session.profile.model;
    const double tau = session.profile.horizon;
    const double alpha0 = std::sqrt(session.reference_amplitude.norm2());

    DetectionContext ctx;
    ctx.expected_clean = expected_shift_clean(model, alpha0, tau, session.delta_t);
    ctx.max_discrepancy = max_shift_discrepancy(model, alpha0, session.delta_t, tau, config.grid_resolution);
    ctx.t_e_star =
        min_detectable_attack_time(model, alpha0, session.delta_t, config.epsilon, tau, config.grid_resolution);
    ctx.threshold_transmission = secure_transmission_bound(model, ctx.t_e_star);
    return ctx;
}

DetectionReport analyze(const SessionTranscript& transcript, const DetectionContext& context,
                        const DetectionConfig& config) {
    const auto& session = transcript.config;
    DetectionReport report;
    report.expected_shift_clean = context.expected_clean;
    report.t_e_star = context.t_e_star;
    report.threshold_transmission = context.threshold_transmission;
    report.statistics = split_and_compare(transcript);
    report.decision = decide({report.statistics.observed_shift, report.statistics.standard_error,
                              context.expected_clean.exact, context.max_discrepancy},
                             config);
    if (report.decision.verdict == Verdict::EvePresent) {
        const double alpha0 = std::sqrt(session.reference_amplitude.norm2());
        report.localization = localize(session.profile.model, std::max(0.0, report.statistics.observed_shift), alpha0,
                                       session.delta_t, session.profile.horizon, config.grid_resolution,
                                       report.statistics.standard_error, config.significance_sigmas);
    }
    return report;
}

DetectionReport analyze(const SessionTranscript& transcript, const DetectionConfig& config) {
    return analyze(transcript, prepare_detection(transcript.config, config), config);
}

}  // namespace nmqkd
