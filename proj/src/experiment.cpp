#include "nmqkd/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <thread>

#include <json.hpp>

#include "nmqkd/errors.hpp"
#include "nmqkd/numeric.hpp"

namespace nmqkd {

using Json = nlohmann::ordered_json;

namespace {

double alpha_magnitude(const SessionConfig& s) { return std::sqrt(s.reference_amplitude.norm2()); }

// Shift an attack with the configured splitter produces on the ordinary
// versus delayed population, as seen after Bob's ordinary-line rescaling.
ShiftEstimate attacked_expectation(const SessionConfig& s, const AttackConfig& attack) {
    const double alpha0 = alpha_magnitude(s);
    ShiftEstimate est = expected_shift_attacked(s.profile.model, alpha0, attack.t_e, s.delta_t);
    if (attack.eta_e) {
        const double t_ord = effective_transmission(s.profile, s.delta_t, Route::Ordinary, attack);
        const double t_del = effective_transmission(s.profile, s.delta_t, Route::Delayed, attack);
        const double t_clean = transmissivity(s.profile.model, s.profile.horizon);
        est.exact = alpha0 * (std::sqrt(t_ord) - std::sqrt(t_del)) / std::sqrt(t_clean);
    }
    return est;
}

void write_provenance_comment(std::ostream& out, const Provenance& prov) {
    out << "# spec_hash=" << prov.spec_hash << "\n# seed=" << prov.seed << "\n# version=" << prov.version << "\n";
}

Json provenance_json(const Provenance& prov) {
    return Json{{"spec_hash", prov.spec_hash}, {"seed", prov.seed}, {"version", prov.version}};
}

Json shift_json(const ShiftEstimate& s) { return Json{{"exact", s.exact}, {"first_order", s.first_order}}; }

}  // namespace

std::string format_number(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

Provenance provenance_of(const ExperimentSpec& spec) { return {spec_hash(spec), spec.session.seed, kArtifactVersion}; }

std::uint64_t repetition_seed(std::uint64_t master_seed, std::size_t k) {
    RandomStream rng(master_seed, StreamPurpose::Repetition, k);
    return rng();
}

ExperimentResult run_experiment(const ExperimentSpec& spec, const SessionSink& sink) {
    const DetectionContext context = prepare_detection(spec.session, spec.detection);
    ExperimentResult result;
    result.sessions.resize(spec.repetitions);

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < spec.repetitions; k = next++) {
            SessionOutcome& outcome = result.sessions[k];
            outcome.index = k;
            outcome.seed = repetition_seed(spec.session.seed, k);
            try {
                SessionConfig cfg = spec.session;
                cfg.seed = outcome.seed;
                const auto transcript = run_session(cfg, spec.attack);
                outcome.report = analyze(transcript, context, spec.detection);
                if (sink) sink(outcome, transcript);
            } catch (const std::exception& e) {
                outcome.error = e.what();
            }
        }
    };
    const std::size_t workers = std::clamp<std::size_t>(spec.threads, 1, spec.repetitions);
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
    }
    result.aggregate = aggregate(spec, context, result.sessions);
    return result;
}

Aggregate aggregate(const ExperimentSpec& spec, const DetectionContext& context,
                    const std::vector<SessionOutcome>& sessions) {
    Aggregate agg;
    agg.repetitions = sessions.size();
    agg.expected_clean = context.expected_clean;
    if (spec.attack) agg.expected_attacked = attacked_expectation(spec.session, *spec.attack);
    agg.t_e_star = context.t_e_star;
    agg.threshold_transmission = context.threshold_transmission;

    std::vector<double> positions;
    std::size_t completed = 0;
    for (const auto& s : sessions) {
        if (!s.report) {
            ++agg.errors;
            continue;
        }
        ++completed;
        const auto& r = *s.report;
        switch (r.decision.verdict) {
            case Verdict::Clean: ++agg.clean; break;
            case Verdict::EvePresent: ++agg.eve_present; break;
            case Verdict::Inconclusive: ++agg.inconclusive; break;
        }
        if (r.statistics.width_anomaly) ++agg.width_anomalies;
        agg.mean_observed_shift += r.statistics.observed_shift;
        agg.mean_standard_error += r.statistics.standard_error;
        if (r.localization.status == Localization::Status::Candidates) {
            ++agg.localized;
            for (const auto& c : r.localization.candidates) positions.push_back(c.t);
        }
    }
    if (completed > 0) {
        const auto n = static_cast<double>(completed);
        agg.detection_rate = static_cast<double>(agg.eve_present) / n;
        agg.mean_observed_shift /= n;
        agg.mean_standard_error /= n;
    }
    if (!positions.empty()) {
        std::sort(positions.begin(), positions.end());
        const std::size_t m = positions.size() / 2;
        agg.localization_median =
            positions.size() % 2 == 1 ? positions[m] : 0.5 * (positions[m - 1] + positions[m]);
    }
    return agg;
}

std::vector<RateRow> rate_curve(const ExperimentSpec& spec) {
    const auto& model = spec.session.profile.model;
    const double t_max = spec.rates.t_max.value_or(spec.session.profile.horizon);
    const double norm = asymptotic_rate(model);
    std::vector<RateRow> rows;
    rows.reserve(spec.rates.points);
    for (const double t : numeric::linspace(0.0, t_max, spec.rates.points)) {
        const double damping = accumulated_damping(model, t);
        rows.push_back({t, norm > 0.0 ? rate(model, t) / norm : 0.0, damping, std::exp(-damping)});
    }
    return rows;
}

std::vector<double> threshold_epsilons(const ExperimentSpec& spec) {
    if (spec.threshold.epsilons) return *spec.threshold.epsilons;
    const auto& s = spec.session;
    const auto& model = s.profile.model;
    const double tau = s.profile.horizon;
    const double rate_end = rate(model, tau);
    const std::size_t points = spec.detection.grid_resolution.value_or(default_resolution(model, 0.0, tau));
    double widest = 0.0;
    for (const double t : numeric::linspace(0.0, tau, points))
        widest = std::max(widest, std::abs(rate(model, t) - rate_end));
    double top = 1.1 * alpha_magnitude(s) * s.delta_t * widest;
    if (!(top > 0.0)) top = 1.0;
    return numeric::linspace(0.0, top, spec.threshold.points);
}

std::vector<ThresholdRow> threshold_table(const ExperimentSpec& spec) {
    const auto& s = spec.session;
    const auto& model = s.profile.model;
    std::vector<ThresholdRow> rows;
    for (const double eps : threshold_epsilons(spec)) {
        const double t_star = min_detectable_attack_time(model, alpha_magnitude(s), s.delta_t, eps,
                                                         s.profile.horizon, spec.detection.grid_resolution);
        rows.push_back({eps, t_star, accumulated_damping(model, t_star), secure_transmission_bound(model, t_star)});
    }
    return rows;
}

std::vector<SweepPoint> run_sweep(const ExperimentSpec& spec) {
    if (spec.sweep.empty()) throw ConfigError("sweep", "no sweep.<key> axes given");
    KeyValues base = spec.source;
    std::erase_if(base, [](const auto& kv) { return kv.first.rfind("sweep.", 0) == 0; });

    std::vector<SweepPoint> points;
    std::vector<std::size_t> odometer(spec.sweep.size(), 0);
    for (;;) {
        SweepPoint point;
        KeyValues kv = base;
        for (std::size_t a = 0; a < spec.sweep.size(); ++a) {
            const auto& value = spec.sweep[a].values[odometer[a]];
            point.values.push_back(value);
            kv[spec.sweep[a].key] = value;
        }
        try {
            const ExperimentSpec variant = build_spec(kv, spec.base_dir);
            point.aggregate = run_experiment(variant).aggregate;
        } catch (const std::exception& e) {
            point.error = e.what();
        }
        points.push_back(std::move(point));

        std::size_t a = spec.sweep.size();
        while (a > 0) {
            --a;
            if (++odometer[a] < spec.sweep[a].values.size()) break;
            odometer[a] = 0;
            if (a == 0) return points;
        }
    }
}

void write_rates_csv(std::ostream& out, const ExperimentSpec& spec) {
    write_provenance_comment(out, provenance_of(spec));
    out << "# model=" << spec.session.profile.model.name() << "\n";
    out << "t,gamma_normalized,Gamma,eta\n";
    for (const auto& r : rate_curve(spec))
        out << format_number(r.t) << ',' << format_number(r.normalized_rate) << ',' << format_number(r.damping)
            << ',' << format_number(r.transmissivity) << '\n';
}

void write_threshold_csv(std::ostream& out, const ExperimentSpec& spec) {
    write_provenance_comment(out, provenance_of(spec));
    const auto& model = spec.session.profile.model;
    const double tau = spec.session.profile.horizon;
    if (const auto* ld = model.as<LorentzDrudeRate>()) {
        const double ratio = (1.0 / ld->omega_c) / tau;
        out << "# tau_R/tau=" << format_number(ratio) << "\n";
        if (ratio < 0.1)
            out << "# note: tau_R << tau; losses before any attack position are negligible against the "
                   "overall losses, so the threshold cannot drop far below 1/2\n";
    } else {
        out << "# tau_R/tau=undefined (" << model.name() << " model has no reservoir correlation time)\n";
    }
    out << "epsilon,t_e_star,Gamma_t_e_star,eta_th\n";
    for (const auto& r : threshold_table(spec))
        out << format_number(r.epsilon) << ',' << format_number(r.t_e_star) << ','
            << format_number(r.damping_at_t_e_star) << ',' << format_number(r.eta_threshold) << '\n';
}

void write_sweep_csv(std::ostream& out, const ExperimentSpec& spec, const std::vector<SweepPoint>& points) {
    write_provenance_comment(out, provenance_of(spec));
    for (const auto& axis : spec.sweep) out << axis.key << ',';
    out << "repetitions,errors,clean,eve_present,inconclusive,detection_rate,mean_observed_shift,"
           "mean_standard_error,expected_shift_clean,expected_shift_attacked,t_e_star,eta_threshold,error\n";
    for (const auto& p : points) {
        for (const auto& v : p.values) out << v << ',';
        if (p.aggregate) {
            const auto& a = *p.aggregate;
            out << a.repetitions << ',' << a.errors << ',' << a.clean << ',' << a.eve_present << ','
                << a.inconclusive << ',' << format_number(a.detection_rate) << ','
                << format_number(a.mean_observed_shift) << ',' << format_number(a.mean_standard_error) << ','
                << format_number(a.expected_clean.exact) << ','
                << (a.expected_attacked ? format_number(a.expected_attacked->exact) : "") << ','
                << format_number(a.t_e_star) << ',' << format_number(a.threshold_transmission) << ",\n";
        } else {
            std::string msg = p.error;
            std::replace(msg.begin(), msg.end(), ',', ';');
            out << ",,,,,,,,,,,," << msg << '\n';
        }
    }
}

void write_transcript(std::ostream& out, const SessionTranscript& t, const Provenance& prov) {
    const auto& c = t.config;
    Json config{{"model", c.profile.model.name()},
                {"tau", c.profile.horizon},
                {"delta_t", c.delta_t},
                {"modulation_variance", c.modulation_variance},
                {"alpha0", {c.reference_amplitude.re, c.reference_amplitude.im}},
                {"n_key", c.n_key},
                {"n_ref", c.n_ref},
                {"seed", c.seed}};
    Json attack = nullptr;
    if (t.attack) {
        attack = Json{{"t_e", t.attack->t_e},
                      {"eta_e", t.attack->eta_e ? Json(*t.attack->eta_e) : Json("auto")},
                      {"eta_e_resolved", resolved_transmissivity(*t.attack, c.profile.model, c.profile.horizon)}};
    }
    out << Json{{"type", "header"}, {"provenance", provenance_json(prov)}, {"config", config}, {"attack", attack}}.dump()
        << '\n';
    for (const auto& p : t.pulses) {
        out << Json{{"type", "pulse"},
                    {"index", p.index},
                    {"kind", to_string(p.kind)},
                    {"route", to_string(p.route)},
                    {"sent", {p.sent.re, p.sent.im}},
                    {"basis", to_string(p.basis)},
                    {"value", p.outcome.value}}
                   .dump()
            << '\n';
    }
    Json routes = Json::array();
    for (const auto& d : t.disclosure) routes.push_back({d.index, to_string(d.route)});
    out << Json{{"type", "disclosure"}, {"routes", routes}}.dump() << '\n';
}

namespace {

Json report_body(const DetectionReport& r) {
    Json bases = Json::array();
    for (const auto& b : r.statistics.bases) {
        bases.push_back({{"basis", to_string(b.basis)},
                         {"component", b.component},
                         {"n_ordinary", b.n_ordinary},
                         {"n_delayed", b.n_delayed},
                         {"mean_ordinary", b.mean_ordinary},
                         {"mean_delayed", b.mean_delayed},
                         {"var_ordinary", b.var_ordinary},
                         {"var_delayed", b.var_delayed}});
    }
    Json candidates = Json::array();
    for (const auto& c : r.localization.candidates)
        candidates.push_back({{"t", c.t}, {"lower", c.lower}, {"upper", c.upper}});
    return Json{{"expected_shift_clean", shift_json(r.expected_shift_clean)},
                {"observed_shift", r.statistics.observed_shift},
                {"standard_error", r.statistics.standard_error},
                {"bases", bases},
                {"width_anomaly", r.statistics.width_anomaly},
                {"verdict", to_string(r.decision.verdict)},
                {"deviation", r.decision.deviation},
                {"band", r.decision.band},
                {"limiting_factor", to_string(r.decision.limiting)},
                {"localization", {{"status", to_string(r.localization.status)}, {"candidates", candidates}}},
                {"t_e_star", r.t_e_star},
                {"threshold_transmission", r.threshold_transmission}};
}

}  // namespace

std::string report_json(const DetectionReport& report, const SessionOutcome& outcome, const Provenance& prov) {
    Json doc{{"provenance", provenance_json(prov)}, {"index", outcome.index}, {"seed", outcome.seed}};
    doc.update(report_body(report));
    return doc.dump(2) + "\n";
}

std::string aggregate_json(const ExperimentResult& result, const Provenance& prov) {
    const auto& a = result.aggregate;
    Json sessions = Json::array();
    for (const auto& s : result.sessions) {
        Json row{{"index", s.index}, {"seed", s.seed}};
        if (s.report) {
            row["verdict"] = to_string(s.report->decision.verdict);
            row["observed_shift"] = s.report->statistics.observed_shift;
            row["standard_error"] = s.report->statistics.standard_error;
        } else {
            row["error"] = s.error;
        }
        sessions.push_back(row);
    }
    Json doc{{"provenance", provenance_json(prov)},
             {"repetitions", a.repetitions},
             {"errors", a.errors},
             {"verdicts", {{"clean", a.clean}, {"eve_present", a.eve_present}, {"inconclusive", a.inconclusive}}},
             {"detection_rate", a.detection_rate},
             {"width_anomalies", a.width_anomalies},
             {"mean_observed_shift", a.mean_observed_shift},
             {"mean_standard_error", a.mean_standard_error},
             {"expected_shift_clean", shift_json(a.expected_clean)},
             {"expected_shift_attacked", a.expected_attacked ? shift_json(*a.expected_attacked) : Json(nullptr)},
             {"localization", {{"sessions_localized", a.localized},
                               {"median", a.localization_median ? Json(*a.localization_median) : Json(nullptr)}}},
             {"t_e_star", a.t_e_star},
             {"threshold_transmission", a.threshold_transmission},
             {"sessions", sessions}};
    return doc.dump(2) + "\n";
}

}  // namespace nmqkd
