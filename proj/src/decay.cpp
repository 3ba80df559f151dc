#include "nmqkd/decay.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nmqkd/errors.hpp"
#include "nmqkd/numeric.hpp"

namespace nmqkd {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

void require_time(double t, const char* op) {
    if (!(t >= 0.0)) throw DomainError(std::string(op) + ": time must be non-negative");
}

void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw DomainError(std::string(what) + " must be positive");
}

// Lorentz-Drude helpers. Write f(t) = e^{-ct}(cos wt + (c/w) sin wt), so that
// gamma = gamma_m (1 - f). f solves f'' + 2c f' + (c^2 + w^2) f = 0 with
// f(0) = 1, f'(0) = 0, which gives its Taylor coefficients by recurrence.
// Near t = 0 both 1 - f and t - integral f cancel catastrophically, so the
// series is used while (c + w) t is small.
constexpr double kSeriesReach = 0.5;
constexpr int kSeriesTerms = 40;

bool in_series_region(const LorentzDrudeRate& m, double t) {
    return t * (m.omega_c + m.omega_0) <= kSeriesReach;
}

// Returns {1 - f(t), t - integral_0^t f}.
std::pair<double, double> ld_series(const LorentzDrudeRate& m, double t) {
    const double c = m.omega_c;
    const double k = c * c + m.omega_0 * m.omega_0;
    double d_prev = 1.0;  // f^{(n-1)}(0)
    double d_cur = 0.0;   // f^{(n)}(0)
    double rate_sum = 0.0;
    double damp_sum = 0.0;
    double power = t;  // t^n / n!
    for (int n = 1; n <= kSeriesTerms; ++n) {
        if (n >= 2) {
            const double next = -2.0 * c * d_cur - k * d_prev;
            d_prev = d_cur;
            d_cur = next;
            power *= t / n;
            const double rate_term = d_cur * power;
            const double damp_term = d_cur * power * t / (n + 1);
            rate_sum -= rate_term;
            damp_sum -= damp_term;
            if (std::abs(rate_term) <= 1e-18 * std::abs(rate_sum) &&
                std::abs(damp_term) <= 1e-18 * std::abs(damp_sum))
                break;
        }
    }
    return {rate_sum, damp_sum};
}

// A(s) = e^{-cs}(2c cos ws + (c^2/w - w) sin ws); integral_0^t f = (2c - A(t)) / (c^2 + w^2).
double ld_antiderivative_tail(const LorentzDrudeRate& m, double s) {
    const double c = m.omega_c;
    const double w = m.omega_0;
    return std::exp(-c * s) * (2.0 * c * std::cos(w * s) + (c * c / w - w) * std::sin(w * s));
}

double ld_rate(const LorentzDrudeRate& m, double t) {
    if (in_series_region(m, t)) return m.gamma_m * ld_series(m, t).first;
    const double c = m.omega_c;
    const double w = m.omega_0;
    const double f = std::exp(-c * t) * (std::cos(w * t) + (c / w) * std::sin(w * t));
    return m.gamma_m * (1.0 - f);
}

double ld_damping(const LorentzDrudeRate& m, double t) {
    if (in_series_region(m, t)) return 2.0 * m.gamma_m * ld_series(m, t).second;
    const double k = m.omega_c * m.omega_c + m.omega_0 * m.omega_0;
    const double integral_f = (2.0 * m.omega_c - ld_antiderivative_tail(m, t)) / k;
    return 2.0 * m.gamma_m * (t - integral_f);
}

double ld_increment(const LorentzDrudeRate& m, double t, double dt) {
    if (in_series_region(m, t + dt)) {
        return 2.0 * m.gamma_m * (ld_series(m, t + dt).second - ld_series(m, t).second);
    }
    if (dt * (m.omega_c + m.omega_0) < 0.1) {
        // Short interval: the closed form would subtract two nearly equal
        // tails, while Gauss-Kronrod on a smooth integrand is exact here.
        const auto q = numeric::integrate([&](double s) { return ld_rate(m, s); }, t, t + dt);
        return 2.0 * q.value;
    }
    const double k = m.omega_c * m.omega_c + m.omega_0 * m.omega_0;
    const double integral_f = (ld_antiderivative_tail(m, t) - ld_antiderivative_tail(m, t + dt)) / k;
    return 2.0 * m.gamma_m * (dt - integral_f);
}

}  // namespace

// ---------------------------------------------------------------------------

TabulatedRate::TabulatedRate(std::vector<RateSample> samples) : samples_(std::move(samples)) {
    if (samples_.empty()) throw DomainError("tabulated rate: table is empty");
    if (samples_.front().time != 0.0) throw DomainError("tabulated rate: first time must be 0");
    for (std::size_t i = 0; i < samples_.size(); ++i) {
        if (!(samples_[i].rate >= 0.0) || !std::isfinite(samples_[i].rate))
            throw DomainError("tabulated rate: rates must be finite and non-negative");
        if (i > 0 && !(samples_[i].time > samples_[i - 1].time))
            throw DomainError("tabulated rate: times must be strictly increasing");
    }
    prefix_.resize(samples_.size(), 0.0);
    for (std::size_t i = 1; i < samples_.size(); ++i) {
        const double h = samples_[i].time - samples_[i - 1].time;
        prefix_[i] = prefix_[i - 1] + 0.5 * h * (samples_[i].rate + samples_[i - 1].rate);
    }
}

std::size_t TabulatedRate::segment(double t) const {
    auto it = std::upper_bound(samples_.begin(), samples_.end(), t,
                               [](double v, const RateSample& s) { return v < s.time; });
    return static_cast<std::size_t>(std::distance(samples_.begin(), it)) - 1;
}

double TabulatedRate::rate(double t) const {
    const std::size_t i = segment(t);
    if (i + 1 >= samples_.size()) return samples_.back().rate;
    const auto& a = samples_[i];
    const auto& b = samples_[i + 1];
    const double u = (t - a.time) / (b.time - a.time);
    return a.rate + u * (b.rate - a.rate);
}

double TabulatedRate::integral(double t) const {
    const std::size_t i = segment(t);
    const auto& a = samples_[i];
    const double h = t - a.time;
    if (i + 1 >= samples_.size()) return prefix_[i] + h * a.rate;
    return prefix_[i] + 0.5 * h * (a.rate + rate(t));
}

// ---------------------------------------------------------------------------

DecayModel::DecayModel(MarkovianRate m) : model_(m) { require_positive(m.gamma_m, "gamma_m"); }

DecayModel::DecayModel(LorentzDrudeRate m) : model_(m) {
    require_positive(m.gamma_m, "gamma_m");
    require_positive(m.omega_0, "omega_0");
    require_positive(m.omega_c, "omega_c");
}

DecayModel::DecayModel(TabulatedRate m) : model_(std::move(m)) {}

std::string DecayModel::name() const {
    return std::visit(overloaded{[](const MarkovianRate&) { return std::string("markovian"); },
                                 [](const LorentzDrudeRate&) { return std::string("lorentz_drude"); },
                                 [](const TabulatedRate&) { return std::string("tabulated"); }},
                      model_);
}

DampingProfile::DampingProfile(DecayModel m, double tau) : model(std::move(m)), horizon(tau) {
    require_positive(tau, "channel length tau");
}

double rate(const DecayModel& model, double t) {
    require_time(t, "rate");
    return std::visit(overloaded{[](const MarkovianRate& m) { return m.gamma_m; },
                                 [t](const LorentzDrudeRate& m) { return ld_rate(m, t); },
                                 [t](const TabulatedRate& m) { return m.rate(t); }},
                      model.variant());
}

double accumulated_damping(const DecayModel& model, double t) {
    require_time(t, "accumulated_damping");
    return std::visit(overloaded{[t](const MarkovianRate& m) { return 2.0 * m.gamma_m * t; },
                                 [t](const LorentzDrudeRate& m) { return ld_damping(m, t); },
                                 [t](const TabulatedRate& m) { return 2.0 * m.integral(t); }},
                      model.variant());
}

double damping_increment(const DecayModel& model, double t, double dt) {
    require_time(t, "damping_increment");
    if (!(dt >= 0.0)) throw DomainError("damping_increment: interval must be non-negative");
    return std::visit(
        overloaded{[dt](const MarkovianRate& m) { return 2.0 * m.gamma_m * dt; },
                   [t, dt](const LorentzDrudeRate& m) { return ld_increment(m, t, dt); },
                   [t, dt](const TabulatedRate& m) { return 2.0 * (m.integral(t + dt) - m.integral(t)); }},
        model.variant());
}

double transmissivity(const DecayModel& model, double t) {
    return std::exp(-accumulated_damping(model, t));
}

double asymptotic_rate(const DecayModel& model) {
    return std::visit(overloaded{[](const MarkovianRate& m) { return m.gamma_m; },
                                 [](const LorentzDrudeRate& m) { return m.gamma_m; },
                                 [](const TabulatedRate& m) { return m.samples().back().rate; }},
                      model.variant());
}

bool is_constant_rate(const DecayModel& model) {
    return std::visit(overloaded{[](const MarkovianRate&) { return true; },
                                 [](const LorentzDrudeRate&) { return false; },
                                 [](const TabulatedRate& m) {
                                     const auto& s = m.samples();
                                     return std::all_of(s.begin(), s.end(), [&](const RateSample& x) {
                                         return x.rate == s.front().rate;
                                     });
                                 }},
                      model.variant());
}

double reservoir_correlation_time(const DecayModel& model) {
    const auto* ld = model.as<LorentzDrudeRate>();
    if (ld == nullptr)
        throw UnsupportedModel("reservoir correlation time is defined for the Lorentz-Drude law only, got " +
                               model.name());
    return 1.0 / ld->omega_c;
}

std::size_t default_resolution(const DecayModel& model, double lo, double hi) {
    std::size_t points = 10000;
    if (const auto* ld = model.as<LorentzDrudeRate>()) {
        const double periods = (hi - lo) * ld->omega_0 / (2.0 * std::numbers::pi);
        points = std::max(points, static_cast<std::size_t>(std::ceil(50.0 * periods)) + 1);
    }
    return points;
}

RateInversion invert_rate(const DecayModel& model, double target, double lo, double hi,
                          std::optional<std::size_t> resolution) {
    require_time(lo, "invert_rate");
    if (!(hi > lo)) throw DomainError("invert_rate: window is empty");
    const std::size_t points = resolution.value_or(default_resolution(model, lo, hi));
    if (points < 2) throw DomainError("invert_rate: resolution must be at least 2");

    RateInversion out;
    if (is_constant_rate(model)) {
        out.entire_window = rate(model, lo) == target;
        return out;
    }
    const auto found = numeric::grid_roots([&](double t) { return rate(model, t) - target; }, lo, hi, points);
    out.entire_window = found.all_zero;
    out.roots = found.roots;
    return out;
}

}  // namespace nmqkd
