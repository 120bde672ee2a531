#include "codecast/sim/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace codecast::sim {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

[[noreturn]] void fail(const std::string& origin, size_t lineno, const std::string& msg) {
    throw std::runtime_error(origin + ":" + std::to_string(lineno) + ": " + msg);
}

double to_double(const std::string& origin, size_t lineno, const std::string& v) {
    try {
        size_t pos = 0;
        double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        fail(origin, lineno, "expected a number, got '" + v + "'");
    }
}

uint64_t to_u64(const std::string& origin, size_t lineno, const std::string& v) {
    try {
        size_t pos = 0;
        uint64_t u = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return u;
    } catch (const std::exception&) {
        fail(origin, lineno, "expected an integer, got '" + v + "'");
    }
}

std::map<size_t, double> parse_histogram(const std::string& origin, size_t lineno,
                                         const std::string& v) {
    // "300:0.5, 800:0.5"
    std::map<size_t, double> hist;
    std::istringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        size_t colon = item.find(':');
        if (colon == std::string::npos) fail(origin, lineno, "histogram entries are size:freq");
        hist[to_u64(origin, lineno, trim(item.substr(0, colon)))] =
            to_double(origin, lineno, trim(item.substr(colon + 1)));
    }
    if (hist.empty()) fail(origin, lineno, "empty histogram");
    return hist;
}

// Applies one `key = value` pair to the config; shared by the file parser
// and sweep-entry overrides.
void apply_key(ExperimentConfig& cfg, const std::string& key, const std::string& value,
               const std::string& origin, size_t lineno) {
    if (key == "scheme") {
        if (value == "coded")
            cfg.scheme = Scheme::kCoded;
        else if (value == "flooding")
            cfg.scheme = Scheme::kFlooding;
        else if (value == "bitcoin")
            cfg.scheme = Scheme::kBitcoin;
        else if (value == "shrec")
            cfg.scheme = Scheme::kShrec;
        else
            fail(origin, lineno, "unknown scheme '" + value + "'");
    } else if (key == "nodes")
        cfg.nodes = static_cast<uint32_t>(to_u64(origin, lineno, value));
    else if (key == "degree")
        cfg.degree = static_cast<uint32_t>(to_u64(origin, lineno, value));
    else if (key == "topology_file")
        cfg.topology_file = value;
    else if (key == "delay_median_ms")
        cfg.delay_median_ms = to_double(origin, lineno, value);
    else if (key == "delay_sigma")
        cfg.delay_sigma = to_double(origin, lineno, value);
    else if (key == "tx_rate")
        cfg.tx_rate = to_double(origin, lineno, value);
    else if (key == "duration")
        cfg.duration = to_double(origin, lineno, value);
    else if (key == "warmup_fraction")
        cfg.warmup_fraction = to_double(origin, lineno, value);
    else if (key == "tx_size")
        cfg.tx_size = static_cast<uint32_t>(to_u64(origin, lineno, value));
    else if (key == "seed")
        cfg.seed = to_u64(origin, lineno, value);
    else if (key == "k")
        cfg.k = static_cast<uint32_t>(to_u64(origin, lineno, value));
    else if (key == "soliton_c")
        cfg.soliton_c = to_double(origin, lineno, value);
    else if (key == "soliton_delta")
        cfg.soliton_delta = to_double(origin, lineno, value);
    else if (key == "max_degree")
        cfg.max_degree = static_cast<uint32_t>(to_u64(origin, lineno, value));
    else if (key == "id_bytes")
        cfg.id_bytes = static_cast<uint32_t>(to_u64(origin, lineno, value));
    else if (key == "peel_window")
        cfg.peel_window = static_cast<uint32_t>(to_u64(origin, lineno, value));
    else if (key == "timeout")
        cfg.timeout = to_double(origin, lineno, value);
    else if (key == "gamma")
        cfg.gamma = to_double(origin, lineno, value);
    else if (key == "alpha")
        cfg.alpha = to_double(origin, lineno, value);
    else if (key == "r_min")
        cfg.r_min = to_double(origin, lineno, value);
    else if (key == "r_max")
        cfg.r_max = to_double(origin, lineno, value);
    else if (key == "initial_rate")
        cfg.initial_rate = to_double(origin, lineno, value);
    else if (key == "jitter_max")
        cfg.jitter_max = to_double(origin, lineno, value);
    else if (key == "request_timeout")
        cfg.request_timeout = to_double(origin, lineno, value);
    else if (key == "adversary.mode") {
        if (value == "none")
            cfg.adversary = AdversaryMode::kNone;
        else if (value == "censor_distributed")
            cfg.adversary = AdversaryMode::kCensorDistributed;
        else if (value == "silent")
            cfg.adversary = AdversaryMode::kSilent;
        else if (value == "zero_delay")
            cfg.adversary = AdversaryMode::kZeroDelay;
        else
            fail(origin, lineno, "unknown adversary mode '" + value + "'");
    } else if (key == "adversary.fraction")
        cfg.adversary_fraction = to_double(origin, lineno, value);
    else if (key == "adversary.censored_fraction")
        cfg.censored_fraction = to_double(origin, lineno, value);
    else if (key == "adversary.count")
        cfg.attacker_count = static_cast<uint32_t>(to_u64(origin, lineno, value));
    else if (key == "size_histogram")
        cfg.size_histogram = parse_histogram(origin, lineno, value);
    else if (key == "label")
        cfg.label = value;
    else
        fail(origin, lineno, "unknown key '" + key + "'");
}

// "key=value key=value ..." with keys that must themselves be config keys.
std::map<std::string, std::string> parse_sweep_entry(const std::string& origin, size_t lineno,
                                                     const std::string& value) {
    std::map<std::string, std::string> entry;
    std::istringstream ss(value);
    std::string token;
    while (ss >> token) {
        size_t eq = token.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == token.size())
            fail(origin, lineno, "sweep entries are space-separated key=value overrides");
        std::string key = token.substr(0, eq);
        if (key.rfind("assert.", 0) == 0 || key.rfind("sweep.", 0) == 0)
            fail(origin, lineno, "'" + key + "' cannot be overridden inside a sweep entry");
        entry[key] = token.substr(eq + 1);
    }
    if (entry.empty()) fail(origin, lineno, "empty sweep entry");
    return entry;
}

void validate(const ExperimentConfig& cfg, const std::string& origin) {
    if (cfg.duration <= 0.0) throw std::runtime_error(origin + ": duration must be positive");
    if (cfg.warmup_fraction < 0.0 || cfg.warmup_fraction >= 1.0)
        throw std::runtime_error(origin + ": warmup_fraction must be in [0, 1)");
    if (cfg.tx_rate <= 0.0) throw std::runtime_error(origin + ": tx_rate must be positive");
    if (cfg.tx_size == 0) throw std::runtime_error(origin + ": tx_size must be positive");
    if (cfg.topology_file.empty() && (cfg.nodes < 2 || cfg.degree == 0))
        throw std::runtime_error(origin + ": need nodes >= 2 and degree >= 1");
    if (cfg.adversary_fraction < 0.0 || cfg.adversary_fraction >= 1.0)
        throw std::runtime_error(origin + ": adversary.fraction must be in [0, 1)");
    if (cfg.censored_fraction < 0.0 || cfg.censored_fraction > 1.0)
        throw std::runtime_error(origin + ": adversary.censored_fraction must be in [0, 1]");
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        lineno++;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos) fail(origin, lineno, "expected 'key = value'");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) fail(origin, lineno, "expected 'key = value'");

        if (key.rfind("assert.", 0) == 0)
            cfg.assertions[key.substr(7)] = to_double(origin, lineno, value);
        else if (key == "sweep.entry")
            cfg.sweep_entries.push_back(parse_sweep_entry(origin, lineno, value));
        else if (key.rfind("sweep.", 0) == 0)
            fail(origin, lineno, "unknown key '" + key + "' (sweeps use sweep.entry)");
        else
            apply_key(cfg, key, value, origin, lineno);
    }

    validate(cfg, origin);
    // Sweep overrides are applied to scratch copies now so a bad entry fails
    // at load time, before any run starts.
    for (size_t i = 0; i < cfg.sweep_entries.size(); i++) {
        ExperimentConfig scratch = cfg;
        std::string entry_origin = origin + " sweep entry " + std::to_string(i + 1);
        for (const auto& [k, v] : cfg.sweep_entries[i]) apply_key(scratch, k, v, entry_origin, 0);
        validate(scratch, entry_origin);
    }
    return cfg;
}

std::vector<ExperimentConfig> expand_sweep(const ExperimentConfig& cfg) {
    if (cfg.sweep_entries.empty()) return {cfg};
    std::vector<ExperimentConfig> out;
    for (size_t i = 0; i < cfg.sweep_entries.size(); i++) {
        ExperimentConfig e = cfg;
        e.sweep_entries.clear();
        std::string entry_origin = "sweep entry " + std::to_string(i + 1);
        for (const auto& [k, v] : cfg.sweep_entries[i]) apply_key(e, k, v, entry_origin, 0);
        validate(e, entry_origin);
        if (cfg.sweep_entries[i].find("label") == cfg.sweep_entries[i].end())
            e.label += "#" + std::to_string(i + 1);
        out.push_back(std::move(e));
    }
    return out;
}

std::string sweep_entry_name(const std::map<std::string, std::string>& entry) {
    std::string s;
    for (const auto& [k, v] : entry) s += (s.empty() ? "" : " ") + k + "=" + v;
    return s;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path);
}

std::string scheme_name(Scheme s) {
    switch (s) {
        case Scheme::kCoded: return "coded";
        case Scheme::kFlooding: return "flooding";
        case Scheme::kBitcoin: return "bitcoin";
        case Scheme::kShrec: return "shrec";
    }
    return "?";
}

std::string adversary_name(AdversaryMode m) {
    switch (m) {
        case AdversaryMode::kNone: return "none";
        case AdversaryMode::kCensorDistributed: return "censor_distributed";
        case AdversaryMode::kSilent: return "silent";
        case AdversaryMode::kZeroDelay: return "zero_delay";
    }
    return "?";
}

}  // namespace codecast::sim
