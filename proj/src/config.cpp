#include "nmqkd/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>

#include "nmqkd/errors.hpp"

namespace nmqkd {

namespace {

const std::vector<std::string> kNumericKeys = {
    "channel.tau",         "channel.gamma_m",        "channel.omega_0",
    "channel.omega_c",     "session.delta_t",        "session.modulation_variance",
    "session.alpha0_re",   "session.alpha0_im",      "session.n_key",
    "session.n_ref",       "session.seed",           "attack.t_e",
    "attack.eta_e",        "detection.epsilon",      "detection.significance_sigmas",
    "detection.grid_resolution", "run.repetitions",  "run.threads",
    "rates.t_max",         "rates.points",           "threshold.points",
};

const std::set<std::string> kOtherKeys = {
    "channel.model", "channel.table", "threshold.epsilons", "output.transcripts", "output.reports",
};

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) out.push_back(trim(item));
    return out;
}

double to_number(const std::string& key, const std::string& text) {
    double v = 0.0;
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v)) throw ConfigError(key, "expected a number, got '" + text + "'");
    return v;
}

std::uint64_t to_unsigned(const std::string& key, const std::string& text) {
    std::uint64_t v = 0;
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end) throw ConfigError(key, "expected a non-negative integer, got '" + text + "'");
    return v;
}

bool to_bool(const std::string& key, const std::string& text) {
    if (text == "true" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "no") return false;
    throw ConfigError(key, "expected true or false, got '" + text + "'");
}

// Tracks which keys were consumed so leftovers can be rejected.
class Reader {
public:
    explicit Reader(const KeyValues& kv) : kv_(kv) {}

    const std::string* find(const std::string& key) {
        auto it = kv_.find(key);
        if (it == kv_.end()) return nullptr;
        used_.insert(key);
        return &it->second;
    }
    std::optional<double> number(const std::string& key) {
        const auto* v = find(key);
        return v ? std::optional<double>(to_number(key, *v)) : std::nullopt;
    }
    double number_or(const std::string& key, double fallback) { return number(key).value_or(fallback); }
    std::optional<std::uint64_t> count(const std::string& key) {
        const auto* v = find(key);
        return v ? std::optional<std::uint64_t>(to_unsigned(key, *v)) : std::nullopt;
    }
    double required_number(const std::string& key) {
        auto v = number(key);
        if (!v) throw ConfigError(key, "required key is missing");
        return *v;
    }
    double positive(const std::string& key) {
        const double v = required_number(key);
        if (!(v > 0.0)) throw ConfigError(key, "must be positive");
        return v;
    }
    void reject_unused() const {
        for (const auto& [key, value] : kv_)
            if (!used_.count(key)) throw ConfigError(key, "key is not used by this configuration");
    }

private:
    const KeyValues& kv_;
    std::set<std::string> used_;
};

DecayModel build_model(Reader& in, const std::filesystem::path& base_dir) {
    const auto* model = in.find("channel.model");
    if (!model) throw ConfigError("channel.model", "required key is missing");
    if (*model == "markovian") return MarkovianRate{in.positive("channel.gamma_m")};
    if (*model == "lorentz_drude") {
        const double g = in.positive("channel.gamma_m");
        const double w0 = in.positive("channel.omega_0");
        const double wc = in.positive("channel.omega_c");
        return LorentzDrudeRate{g, w0, wc};
    }
    if (*model == "tabulated") {
        const auto* table = in.find("channel.table");
        if (!table) throw ConfigError("channel.table", "required for the tabulated model");
        std::filesystem::path p(*table);
        if (p.is_relative()) p = base_dir / p;
        try {
            return TabulatedRate(read_rate_table(p));
        } catch (const ConfigError& e) {
            throw ConfigError("channel.table", e.what());
        } catch (const DomainError& e) {
            throw ConfigError("channel.table", e.what());
        }
    }
    throw ConfigError("channel.model", "expected markovian, lorentz_drude or tabulated, got '" + *model + "'");
}

}  // namespace

const std::vector<std::string>& numeric_keys() { return kNumericKeys; }

KeyValues parse_key_values(const std::string& text) {
    KeyValues out;
    std::stringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string body = trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw ConfigError("", "line " + std::to_string(line_no) + ": expected 'key = value'");
        const std::string key = trim(std::string_view(body).substr(0, eq));
        const std::string value = trim(std::string_view(body).substr(eq + 1));
        if (key.empty()) throw ConfigError("", "line " + std::to_string(line_no) + ": empty key");
        if (value.empty()) throw ConfigError(key, "empty value");
        if (!out.emplace(key, value).second) throw ConfigError(key, "duplicate key");
    }
    return out;
}

std::vector<RateSample> read_rate_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open rate table " + path.string());
    std::vector<RateSample> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        if (trim(line).empty()) continue;
        const auto fields = split_list(line);
        const std::string where = path.filename().string() + " line " + std::to_string(line_no);
        if (fields.size() != 2) throw ConfigError("", where + ": expected 'time, rate'");
        out.push_back({to_number(where, fields[0]), to_number(where, fields[1])});
    }
    return out;
}

ExperimentSpec build_spec(const KeyValues& values, const std::filesystem::path& base_dir) {
    for (const auto& [key, value] : values) {
        const bool known = std::find(kNumericKeys.begin(), kNumericKeys.end(), key) != kNumericKeys.end() ||
                           kOtherKeys.count(key) || key.rfind("sweep.", 0) == 0;
        if (!known) throw ConfigError(key, "unknown key");
    }
    Reader in(values);

    DecayModel model = build_model(in, base_dir);
    const double tau = in.positive("channel.tau");
    DampingProfile profile(std::move(model), tau);

    const double delta_t = in.number_or("session.delta_t", default_delay(profile));
    if (!(delta_t > 0.0)) throw ConfigError("session.delta_t", "must be positive");
    SessionConfig session{profile, delta_t};
    session.modulation_variance = in.number_or("session.modulation_variance", session.modulation_variance);
    if (!(session.modulation_variance >= 0.0)) throw ConfigError("session.modulation_variance", "must be non-negative");
    session.reference_amplitude.re = in.number_or("session.alpha0_re", session.reference_amplitude.re);
    session.reference_amplitude.im = in.number_or("session.alpha0_im", session.reference_amplitude.im);
    session.n_key = in.count("session.n_key").value_or(session.n_key);
    session.n_ref = in.count("session.n_ref").value_or(session.n_ref);
    session.seed = in.count("session.seed").value_or(session.seed);

    std::optional<AttackConfig> attack;
    if (const auto t_e = in.number("attack.t_e")) {
        if (!(*t_e >= 0.0)) throw ConfigError("attack.t_e", "must be non-negative");
        if (*t_e > tau) throw ConfigError("attack.t_e", "must not exceed channel.tau");
        attack = AttackConfig{*t_e, std::nullopt};
        if (const auto* eta = in.find("attack.eta_e"); eta && *eta != "auto") {
            const double v = to_number("attack.eta_e", *eta);
            if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("attack.eta_e", "must lie in [0, 1] or be 'auto'");
            attack->eta_e = v;
        }
    } else if (values.count("attack.eta_e")) {
        throw ConfigError("attack.eta_e", "requires attack.t_e");
    }

    DetectionConfig detection;
    detection.epsilon = in.number_or("detection.epsilon", detection.epsilon);
    if (!(detection.epsilon >= 0.0)) throw ConfigError("detection.epsilon", "must be non-negative");
    detection.significance_sigmas = in.number_or("detection.significance_sigmas", detection.significance_sigmas);
    if (!(detection.significance_sigmas > 0.0)) throw ConfigError("detection.significance_sigmas", "must be positive");
    if (const auto res = in.count("detection.grid_resolution")) {
        if (*res < 2) throw ConfigError("detection.grid_resolution", "must be at least 2");
        detection.grid_resolution = *res;
    }

    ExperimentSpec spec{.session = session, .attack = attack, .detection = detection};
    spec.repetitions = in.count("run.repetitions").value_or(1);
    if (spec.repetitions < 1) throw ConfigError("run.repetitions", "must be at least 1");
    spec.threads = in.count("run.threads").value_or(1);
    if (spec.threads < 1) throw ConfigError("run.threads", "must be at least 1");

    spec.rates.t_max = in.number("rates.t_max");
    if (spec.rates.t_max && !(*spec.rates.t_max > 0.0)) throw ConfigError("rates.t_max", "must be positive");
    spec.rates.points = in.count("rates.points").value_or(spec.rates.points);
    if (spec.rates.points < 2) throw ConfigError("rates.points", "must be at least 2");

    if (const auto* eps = in.find("threshold.epsilons")) {
        std::vector<double> list;
        for (const auto& item : split_list(*eps)) {
            const double v = to_number("threshold.epsilons", item);
            if (!(v >= 0.0)) throw ConfigError("threshold.epsilons", "values must be non-negative");
            list.push_back(v);
        }
        spec.threshold.epsilons = std::move(list);
    }
    spec.threshold.points = in.count("threshold.points").value_or(spec.threshold.points);
    if (spec.threshold.points < 2) throw ConfigError("threshold.points", "must be at least 2");

    if (const auto* v = in.find("output.transcripts")) spec.outputs.transcripts = to_bool("output.transcripts", *v);
    if (const auto* v = in.find("output.reports")) spec.outputs.reports = to_bool("output.reports", *v);

    for (const auto& [key, value] : values) {
        if (key.rfind("sweep.", 0) != 0) continue;
        in.find(key);
        const std::string target = key.substr(6);
        if (std::find(kNumericKeys.begin(), kNumericKeys.end(), target) == kNumericKeys.end())
            throw ConfigError(key, "sweep axis must name a numeric key");
        SweepAxis axis{target, split_list(value)};
        for (const auto& item : axis.values) to_number(key, item);
        spec.sweep.push_back(std::move(axis));
    }

    in.reject_unused();
    try {
        validate(spec.session);
    } catch (const DomainError& e) {
        throw ConfigError("session", e.what());
    }
    spec.source = values;
    spec.base_dir = base_dir;
    return spec;
}

ExperimentSpec load_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open spec file " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return build_spec(parse_key_values(buffer.str()), path.parent_path());
}

std::string spec_hash(const ExperimentSpec& spec) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&h](std::string_view bytes) {
        for (const unsigned char c : bytes) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
    };
    for (const auto& [key, value] : spec.source) {
        if (key == "run.threads") continue;  // cannot change any result
        feed(key);
        feed("=");
        feed(value);
        feed("\n");
    }
    if (const auto* tab = spec.session.profile.model.as<TabulatedRate>()) {
        for (const auto& s : tab->samples()) {
            feed(std::string_view(reinterpret_cast<const char*>(&s.time), sizeof s.time));
            feed(std::string_view(reinterpret_cast<const char*>(&s.rate), sizeof s.rate));
        }
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i, h >>= 4) out[static_cast<std::size_t>(i)] = kHex[h & 0xF];
    return out;
}

}  // namespace nmqkd
