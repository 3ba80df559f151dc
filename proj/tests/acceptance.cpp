// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "nmqkd/adversary.hpp"
#include "nmqkd/config.hpp"
#include "nmqkd/decay.hpp"
#include "nmqkd/detection.hpp"
#include "nmqkd/experiment.hpp"
#include "nmqkd/numeric.hpp"
#include "nmqkd/protocol.hpp"

using namespace nmqkd;

namespace {

struct Outcome {
    bool ok{true};
    std::string detail;
};

double draw(std::mt19937_64& g, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(g); }

// Golden-section maximum of f on [a, b].
double golden_max(const std::function<double(double)>& f, double a, double b) {
    const double r = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - r * (b - a);
    double d = a + r * (b - a);
    for (int i = 0; i < 200 && b - a > 1e-15 * std::max(1.0, std::abs(b)); ++i) {
        if (f(c) > f(d)) {
            b = d;
        } else {
            a = c;
        }
        c = b - r * (b - a);
        d = a + r * (b - a);
    }
    return f(0.5 * (a + b));
}

Outcome rate_law() {
    std::mt19937_64 g(101);
    Outcome out;
    double worst_tail = 0.0;
    double worst_peak = 0.0;
    for (int i = 0; i < 200; ++i) {
        const double gm = draw(g, 0.05, 3.0);
        const double w0 = draw(g, 0.1, 10.0);
        const double wc = w0 * draw(g, 0.1, 10.0);
        const DecayModel m = LorentzDrudeRate{gm, w0, wc};
        if (rate(m, 0.0) != 0.0) return {false, "gamma(0) != 0"};
        const double t0 = 10.0 / wc;
        for (const double t : numeric::linspace(t0, t0 + 20.0 / std::min(w0, wc), 2001))
            worst_tail = std::max(worst_tail, std::abs(rate(m, t) / gm - 1.0));

        // Numeric scan around the first peak, then refine.
        const double period = 2.0 * std::numbers::pi / w0;
        const auto grid = numeric::linspace(0.0, period, 4001);
        std::size_t best = 1;
        for (std::size_t k = 1; k + 1 < grid.size(); ++k)
            if (rate(m, grid[k]) > rate(m, grid[best])) best = k;
        const double scanned = golden_max([&](double t) { return rate(m, t); }, grid[best - 1], grid[best + 1]);
        const double closed = gm * (1.0 + std::exp(-std::numbers::pi * wc / w0));
        worst_peak = std::max(worst_peak, std::abs(scanned - closed) / closed);
        const double at_peak = rate(m, std::numbers::pi / w0);
        worst_peak = std::max(worst_peak, std::abs(at_peak - closed) / closed);
    }
    out.ok = worst_tail < 0.01 && worst_peak < 1e-9;
    char buf[160];
    std::snprintf(buf, sizeof buf, "max tail deviation %.2e (< 1e-2), max peak rel. error %.2e (< 1e-9)", worst_tail,
                  worst_peak);
    out.detail = buf;
    return out;
}

Outcome closed_form_vs_quadrature() {
    std::mt19937_64 g(202);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const DecayModel m = LorentzDrudeRate{draw(g, 0.01, 2.0), draw(g, 0.1, 10.0), draw(g, 0.1, 10.0)};
        const double t = draw(g, 0.0, 20.0);
        const double closed = accumulated_damping(m, t);
        const double quad = numeric::integrate([&](double s) { return 2.0 * rate(m, s); }, 0.0, t).value;
        if (closed != 0.0 || quad != 0.0) worst = std::max(worst, std::abs(closed - quad) / std::abs(quad));
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "max rel. error %.2e over 1000 draws (< 1e-9)", worst);
    return {worst < 1e-9, buf};
}

Outcome markovian_null() {
    std::mt19937_64 g(303);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const DecayModel m = MarkovianRate{draw(g, 0.01, 3.0)};
        const double tau = draw(g, 0.1, 5.0);
        const double t_e = draw(g, 0.0, tau);
        const double dt = draw(g, 1e-4, 0.1);
        const double clean = expected_shift_clean(m, 20.0, tau, dt).exact;
        const double attacked = expected_shift_attacked(m, 20.0, t_e, dt).exact;
        worst = std::max(worst, std::abs(clean - attacked));
    }

    constexpr int sessions = 200;
    constexpr double p = 0.0027;  // two-sided 3 sigma
    const double allowed = std::floor(sessions * p + 3.0 * std::sqrt(sessions * p * (1.0 - p)));
    int eve = 0;
    const DetectionConfig cfg;
    for (int k = 0; k < sessions; ++k) {
        const double tau = draw(g, 0.5, 3.0);
        SessionConfig s{DampingProfile{MarkovianRate{draw(g, 0.1, 2.0)}, tau}, 0.01 * tau};
        s.n_key = 10;
        s.n_ref = 10000;
        s.seed = repetition_seed(303, static_cast<std::size_t>(k));
        const auto report = analyze(run_session(s, AttackConfig{draw(g, 0.0, tau), std::nullopt}), cfg);
        eve += report.decision.verdict == Verdict::EvePresent;
    }
    char buf[160];
    std::snprintf(buf, sizeof buf, "max |dx_E - dx_NE| %.2e (< 1e-12); EvePresent %d/%d (allowed <= %.0f)", worst, eve,
                  sessions, allowed);
    return {worst < 1e-12 && eve <= allowed, buf};
}

SessionConfig monotone_session(std::uint64_t seed) {
    const double omega_c = 3.0;
    SessionConfig s{DampingProfile{LorentzDrudeRate{1.0, 1.0, omega_c}, 1.5}, 0.05 / omega_c};
    s.reference_amplitude = {20.0, 0.0};
    s.n_ref = 10000;
    s.seed = seed;
    return s;
}

Outcome shift_monte_carlo() {
    std::mt19937_64 g(404);
    constexpr int sessions = 100;
    int clean_hits = 0;
    int attacked_hits = 0;
    for (int k = 0; k < sessions; ++k) {
        auto s = monotone_session(repetition_seed(404, static_cast<std::size_t>(k)));
        s.n_key = 10;
        const double alpha0 = 20.0;
        const auto clean = split_and_compare(run_session(s, std::nullopt));
        const double expected_clean = expected_shift_clean(s.profile.model, alpha0, 1.5, s.delta_t).exact;
        clean_hits += std::abs(clean.observed_shift - expected_clean) <= 3.0 * clean.standard_error;

        const double t_e = draw(g, 0.0, 1.5);
        s.seed = repetition_seed(405, static_cast<std::size_t>(k));
        const auto attacked = split_and_compare(run_session(s, AttackConfig{t_e, std::nullopt}));
        const double expected_attacked = expected_shift_attacked(s.profile.model, alpha0, t_e, s.delta_t).exact;
        attacked_hits += std::abs(attacked.observed_shift - expected_attacked) <= 3.0 * attacked.standard_error;
    }
    char buf[128];
    std::snprintf(buf, sizeof buf, "within 3 SE: clean %d/%d, attacked %d/%d (need >= 95 each)", clean_hits, sessions,
                  attacked_hits, sessions);
    return {clean_hits >= 95 && attacked_hits >= 95, buf};
}

Outcome ordinary_route() {
    std::mt19937_64 g(505);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const DecayModel m = i % 3 == 0 ? DecayModel{MarkovianRate{draw(g, 0.01, 3.0)}}
                                        : DecayModel{LorentzDrudeRate{draw(g, 0.01, 3.0), draw(g, 0.1, 10.0),
                                                                      draw(g, 0.1, 10.0)}};
        const double tau = draw(g, 0.1, 5.0);
        const DampingProfile p{m, tau};
        const AttackConfig attack{draw(g, 0.0, tau), std::nullopt};
        const double clean = effective_transmission(p, 0.01, Route::Ordinary, std::nullopt);
        const double attacked = effective_transmission(p, 0.01, Route::Ordinary, attack);
        const double composed = propagate({1.0, 0.0}, p, 0.01, Route::Ordinary, attack).at_bob.norm2();
        worst = std::max({worst, std::abs(attacked - clean), std::abs(composed - clean)});
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "max |T_attacked - T_clean| %.2e (< 1e-12)", worst);
    return {worst < 1e-12, buf};
}

Outcome threshold_identity() {
    std::mt19937_64 g(606);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const DecayModel m = i % 4 == 0 ? DecayModel{MarkovianRate{draw(g, 0.05, 2.0)}}
                                        : DecayModel{LorentzDrudeRate{draw(g, 0.05, 2.0), draw(g, 0.2, 5.0),
                                                                      draw(g, 0.2, 10.0)}};
        const double t_e = draw(g, 0.0, 4.0);
        // The channel length at which the overall transmission is 1/2 e^{-Gamma(t_E)}.
        const double target = accumulated_damping(m, t_e) + std::numbers::ln2;
        double hi = t_e + 1.0;
        while (accumulated_damping(m, hi) < target) hi *= 2.0;
        const double tau =
            numeric::bisect([&](double t) { return accumulated_damping(m, t) - target; }, t_e, hi, 1e-15);
        const auto s = assess_security(m, t_e, tau, draw(g, 0.1, 30.0));
        worst = std::max(worst, std::abs(s.i_ab - s.i_ae));
    }
    const DecayModel markov = MarkovianRate{0.8};
    const double t_star = min_detectable_attack_time(markov, 20.0, 0.01, 1e-6, 2.0);
    const double bound = secure_transmission_bound(markov, t_star);
    const bool exact_half = t_star == 0.0 && bound == 0.5 && security_threshold(markov, 0.0) == 0.5;
    char buf[128];
    std::snprintf(buf, sizeof buf, "max |I_AB - I_AE| %.2e (< 1e-10); markovian t_E*=%g, eta_th=%.17g", worst, t_star,
                  bound);
    return {worst < 1e-10 && exact_half, buf};
}

Outcome localization() {
    std::mt19937_64 g(707);
    const DecayModel mono = LorentzDrudeRate{1.0, 1.0, 3.0};
    const double tau = std::numbers::pi;
    const double dt = 0.05 / 3.0;
    const std::size_t resolution = default_resolution(mono, 0.0, tau);
    const double step = tau / static_cast<double>(resolution - 1);
    int round_trips = 0;
    for (int i = 0; i < 100; ++i) {
        const double t_e = draw(g, 0.0, tau - dt);
        const double shift = expected_shift_attacked(mono, 20.0, t_e, dt).exact;
        const auto loc = localize(mono, shift, 20.0, dt, tau);
        bool hit = loc.status == Localization::Status::Candidates && loc.candidates.size() == 1 &&
                   std::abs(loc.candidates[0].t - t_e) <= step;
        round_trips += hit;
    }

    const DecayModel osc = LorentzDrudeRate{1.0, 2.0, 1.0};
    const double osc_tau = 10.0;
    const double osc_dt = 0.05;
    const auto rate_roots = invert_rate(osc, 1.0, 0.0, osc_tau);
    const double target_shift = 20.0 * -std::expm1(-1.0 * osc_dt);
    const auto loc = localize(osc, target_shift, 20.0, osc_dt, osc_tau);
    const std::size_t candidates = loc.status == Localization::Status::Candidates ? loc.candidates.size() : 0;

    char buf[160];
    std::snprintf(buf, sizeof buf, "monotone round trips %d/100 within one step (%.2e); oscillatory: %zu rate roots, "
                  "%zu shift candidates (need >= 2)", round_trips, step, rate_roots.roots.size(), candidates);
    return {round_trips == 100 && rate_roots.roots.size() >= 2 && candidates >= 2, buf};
}

ExperimentSpec monotone_spec(std::size_t reps, std::uint64_t seed, bool attacked, std::size_t threads = 1) {
    std::string text =
        "channel.model = lorentz_drude\nchannel.tau = 1.5\nchannel.gamma_m = 1\nchannel.omega_0 = 1\n"
        "channel.omega_c = 3\nsession.delta_t = 0.016666666666666666\nsession.alpha0_re = 20\n"
        "session.n_ref = 10000\n";
    text += "run.repetitions = " + std::to_string(reps) + "\nsession.seed = " + std::to_string(seed) +
            "\nrun.threads = " + std::to_string(threads) + "\n";
    if (attacked) text += "attack.t_e = 0\n";
    return build_spec(parse_key_values(text));
}

Outcome detection_power() {
    const auto attacked = run_experiment(monotone_spec(1000, 808, true)).aggregate;
    const auto clean = run_experiment(monotone_spec(1000, 809, false)).aggregate;
    const double power = static_cast<double>(attacked.eve_present) / 1000.0;
    const double false_alarm = static_cast<double>(clean.eve_present) / 1000.0;
    char buf[160];
    std::snprintf(buf, sizeof buf, "EvePresent %.1f%% (>= 99%%), clean false alarms %.1f%% (<= 0.5%%), errors %zu",
                  100.0 * power, 100.0 * false_alarm, attacked.errors + clean.errors);
    return {power >= 0.99 && false_alarm <= 0.005 && attacked.errors == 0 && clean.errors == 0, buf};
}

Outcome rate_regimes() {
    struct Case {
        double ratio, omega_c;
    };
    std::string detail;
    bool ok = true;
    for (const Case c : {Case{0.5, 0.5}, Case{0.5, 3.0}, Case{5.0, 0.5}, Case{5.0, 3.0}}) {
        const double omega_0 = c.omega_c / c.ratio;
        const double t_max = std::max(12.0 / c.omega_c, 3.0 * std::numbers::pi / omega_0);
        std::ostringstream cfg;
        cfg << "channel.model = lorentz_drude\nchannel.tau = 1\nchannel.gamma_m = 1\nchannel.omega_0 = "
            << format_number(omega_0) << "\nchannel.omega_c = " << format_number(c.omega_c)
            << "\nrates.t_max = " << format_number(t_max) << "\nrates.points = 4001\n";
        std::ostringstream csv;
        write_rates_csv(csv, build_spec(parse_key_values(cfg.str())));

        std::vector<double> g;
        std::istringstream in(csv.str());
        std::string line;
        bool header = false;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#') continue;
            if (!header) {
                header = true;
                continue;
            }
            const auto a = line.find(',');
            const auto b = line.find(',', a + 1);
            g.push_back(std::stod(line.substr(a + 1, b - a - 1)));
        }
        double peak = 0.0;
        double highest = 0.0;
        for (std::size_t k = 1; k + 1 < g.size(); ++k) {
            highest = std::max(highest, g[k]);
            if (g[k] > g[k - 1] && g[k] >= g[k + 1]) peak = std::max(peak, g[k]);
        }
        highest = std::max({highest, g.front(), g.back()});
        const bool pass = c.ratio < 1.0 ? peak > 1.1 : highest <= 1.0 + 1e-6;
        ok = ok && pass;
        char buf[96];
        std::snprintf(buf, sizeof buf, "%s(%g,%g): max %.6f", detail.empty() ? "" : "; ", c.ratio, c.omega_c,
                      std::max(peak, highest));
        detail += buf;
    }
    return {ok, detail};
}

Outcome determinism() {
    auto spec = [](std::size_t threads) {
        auto s = monotone_spec(24, 1010, true, threads);
        s.attack->t_e = 0.4;
        return s;
    };
    const auto s1 = spec(1);
    const auto s8 = spec(8);
    const auto a = aggregate_json(run_experiment(s1), provenance_of(s1));
    const auto b = aggregate_json(run_experiment(s1), provenance_of(s1));
    const auto c = aggregate_json(run_experiment(s8), provenance_of(s8));
    const bool ok = a == b && a == c;
    return {ok, std::string("run twice: ") + (a == b ? "identical" : "DIFFER") +
                    "; threads 1 vs 8: " + (a == c ? "identical" : "DIFFER")};
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        double limit_seconds;
        Outcome (*run)();
    };
    const Criterion criteria[] = {
        {1, "Lorentz-Drude rate law", 1.0, rate_law},
        {2, "accumulated damping closed form vs quadrature", 5.0, closed_form_vs_quadrature},
        {3, "markovian undetectability", 60.0, markovian_null},
        {4, "reference shift Monte Carlo", 120.0, shift_monte_carlo},
        {5, "undetectable ordinary route", 1.0, ordinary_route},
        {6, "security threshold identity", 1.0, threshold_identity},
        {7, "localization", 10.0, localization},
        {8, "detection power", 600.0, detection_power},
        {9, "rate curve regimes", 1.0, rate_regimes},
        {10, "determinism", 60.0, determinism},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = elapsed < c.limit_seconds;
        const bool pass = out.ok && in_time;
        failures += !pass;
        std::printf("%s criterion %d (%s): %s [%.2fs, limit %gs%s]\n", pass ? "PASS" : "FAIL", c.id, c.name,
                    out.detail.c_str(), elapsed, c.limit_seconds, in_time ? "" : ", EXCEEDED");
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(std::size(criteria)) - failures, std::size(criteria));
    return failures == 0 ? 0 : 1;
}
