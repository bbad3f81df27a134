#include "rllf/config.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <stdexcept>

#include "rllf/text.hpp"

namespace rllf {

std::string to_string(Phase phase) { return phase == Phase::Train ? "train" : "test"; }

Phase parse_phase(const std::string& text) {
    const std::string t = text::lower(text);
    if (t == "train") return Phase::Train;
    if (t == "test") return Phase::Test;
    throw std::invalid_argument("unknown phase '" + text + "' (expected train or test)");
}

std::string to_string(DataPolicySource source) {
    return source == DataPolicySource::Mixture ? "mixture" : "empirical";
}

DataPolicySource parse_data_policy_source(const std::string& text) {
    const std::string t = text::lower(text::trim(text));
    if (t == "mixture") return DataPolicySource::Mixture;
    if (t == "empirical") return DataPolicySource::Empirical;
    throw std::invalid_argument("unknown data policy '" + text + "' (expected mixture or empirical)");
}

void ExperimentConfig::validate() const {
    if (domains.empty()) throw std::invalid_argument("config: no domains");
    if (strategies.empty()) throw std::invalid_argument("config: no strategies");
    if (budgets.empty()) throw std::invalid_argument("config: no budgets");
    for (double b : budgets)
        if (!(b > 0.0 && b <= 1.0)) throw std::invalid_argument("config: budgets must lie in (0,1]");
    if (seeds < 1) throw std::invalid_argument("config: seeds must be at least 1");
    if (!(train_epsilon >= 0.0 && train_epsilon <= 1.0)) throw std::invalid_argument("config: train_epsilon must lie in [0,1]");
    if (phase == Phase::Test && test_epsilons.empty()) throw std::invalid_argument("config: test phase needs test_epsilons");
    for (double e : test_epsilons)
        if (!(e >= 0.0 && e <= 1.0)) throw std::invalid_argument("config: test_epsilons must lie in [0,1]");
    if (episodes < 0) throw std::invalid_argument("config: episodes must be non-negative");
    if (mc_episodes < 2) throw std::invalid_argument("config: mc_episodes must be at least 2");
    if (workers < 1) throw std::invalid_argument("config: workers must be at least 1");
    learner.validate();
}

namespace {

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

struct KeyDef {
    ConfigKey key;
    Setter set;
    std::function<std::string(const ExperimentConfig&)> get;
};

std::string join(const std::vector<std::string>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? "," : "") + xs[i];
    return out;
}

std::string join(const std::vector<double>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? "," : "") + text::format_double(xs[i]);
    return out;
}

std::vector<double> parse_doubles(const std::string& v, const std::string& what) {
    std::vector<double> out;
    for (const auto& part : text::split(v, ',')) out.push_back(text::parse_double(part, what));
    return out;
}

int parse_int_at_least(const std::string& v, const std::string& what, long long lo) {
    const long long x = text::parse_int(v, what);
    if (x < lo || x > 1'000'000'000) throw std::invalid_argument(what + ": out of range");
    return static_cast<int>(x);
}

std::vector<std::string> parse_domains(const std::string& v) {
    if (text::lower(text::trim(v)) == "all") return domain_names();
    std::vector<std::string> out;
    for (const auto& part : text::split(v, ',')) out.push_back(canonical_domain_name(part));
    return out;
}

std::vector<std::string> parse_strategies(const std::string& v) {
    const std::string t = text::lower(text::trim(v));
    std::vector<std::string> out;
    if (t == "all") {
        for (auto s : all_strategies()) out.push_back(to_string(s));
    } else if (t == "heuristics") {
        for (auto s : all_strategies())
            if (!is_training_phase(s)) out.push_back(to_string(s));
    } else {
        for (const auto& part : text::split(v, ',')) out.push_back(to_string(parse_strategy(part)));
    }
    return out;
}

const std::vector<KeyDef>& key_table() {
    using C = ExperimentConfig;
    using S = const std::string&;
    auto d = [](double x) { return text::format_double(x); };
    static const std::vector<KeyDef> table = {
        {{"domains", "comma-separated domain names, or all"},
         [](C& c, S v) { c.domains = parse_domains(v); }, [](const C& c) { return join(c.domains); }},
        {{"strategies", "comma-separated strategy names, all, or heuristics"},
         [](C& c, S v) { c.strategies = parse_strategies(v); }, [](const C& c) { return join(c.strategies); }},
        {{"budgets", "comma-separated percentage-feedback levels in (0,1]"},
         [](C& c, S v) { c.budgets = parse_doubles(v, "budgets"); }, [](const C& c) { return join(c.budgets); }},
        {{"learner", "uds or truncated"},
         [](C& c, S v) { c.learner.learner = parse_learner_kind(v); },
         [](const C& c) { return to_string(c.learner.learner); }},
        {{"alpha", "learning rate of the offline Q-learner"},
         [](C& c, S v) { c.learner.alpha = text::parse_double(v, "alpha"); },
         [d](const C& c) { return d(c.learner.alpha); }},
        {{"gamma", "learner discount"},
         [](C& c, S v) { c.learner.gamma = text::parse_double(v, "gamma"); },
         [d](const C& c) { return d(c.learner.gamma); }},
        {{"sweeps", "maximum learner sweeps"},
         [](C& c, S v) { c.learner.sweeps = parse_int_at_least(v, "sweeps", 1); },
         [](const C& c) { return std::to_string(c.learner.sweeps); }},
        {{"tolerance", "learner early-stop threshold on the max update"},
         [](C& c, S v) { c.learner.tolerance = text::parse_double(v, "tolerance"); },
         [d](const C& c) { return d(c.learner.tolerance); }},
        {{"tie_tolerance", "relative Q gap below which greedy actions count as tied"},
         [](C& c, S v) { c.learner.tie_tolerance = text::parse_double(v, "tie_tolerance"); },
         [d](const C& c) { return d(c.learner.tie_tolerance); }},
        {{"impute_value", "reward assumed for unlabeled states"},
         [](C& c, S v) { c.learner.impute_value = text::parse_double(v, "impute_value"); },
         [d](const C& c) { return d(c.learner.impute_value); }},
        {{"update", "expected or sample"},
         [](C& c, S v) { c.learner.update = parse_update_mode(v); },
         [](const C& c) { return to_string(c.learner.update); }},
        {{"data_policy", "pi_D of the truncated learner: mixture or empirical"},
         [](C& c, S v) { c.data_policy = parse_data_policy_source(v); },
         [](const C& c) { return to_string(c.data_policy); }},
        {{"seeds", "replicates per grid cell"},
         [](C& c, S v) { c.seeds = parse_int_at_least(v, "seeds", 1); },
         [](const C& c) { return std::to_string(c.seeds); }},
        {{"train_epsilon", "expert weight of the training data policy"},
         [](C& c, S v) { c.train_epsilon = text::parse_double(v, "train_epsilon"); },
         [d](const C& c) { return d(c.train_epsilon); }},
        {{"test_epsilons", "expert weights of the test datasets"},
         [](C& c, S v) { c.test_epsilons = parse_doubles(v, "test_epsilons"); },
         [](const C& c) { return join(c.test_epsilons); }},
        {{"episodes", "episodes per dataset; 0 uses the domain default"},
         [](C& c, S v) { c.episodes = parse_int_at_least(v, "episodes", 0); },
         [](const C& c) { return std::to_string(c.episodes); }},
        {{"evaluator", "exact or monte_carlo"},
         [](C& c, S v) { c.evaluator = parse_eval_mode(v); }, [](const C& c) { return to_string(c.evaluator); }},
        {{"mc_episodes", "rollouts per Monte-Carlo evaluation"},
         [](C& c, S v) { c.mc_episodes = parse_int_at_least(v, "mc_episodes", 2); },
         [](const C& c) { return std::to_string(c.mc_episodes); }},
        {{"output_dir", "directory for CSV and SVG outputs"},
         [](C& c, S v) { c.output_dir = text::trim(v); }, [](const C& c) { return c.output_dir; }},
        {{"workers", "worker threads"},
         [](C& c, S v) { c.workers = parse_int_at_least(v, "workers", 1); },
         [](const C& c) { return std::to_string(c.workers); }},
        {{"phase", "train (score on the training data) or test (frozen sets on the test datasets)"},
         [](C& c, S v) { c.phase = parse_phase(v); }, [](const C& c) { return to_string(c.phase); }},
        {{"baseline", "compute the brute-force optimum for optimality gaps"},
         [](C& c, S v) { c.baseline = text::parse_bool(v, "baseline"); },
         [](const C& c) { return std::string(c.baseline ? "true" : "false"); }},
        {{"timing", "record wall-clock milliseconds (makes CSVs run-dependent)"},
         [](C& c, S v) { c.timing = text::parse_bool(v, "timing"); },
         [](const C& c) { return std::string(c.timing ? "true" : "false"); }},
        {{"verbose", "log progress to stderr"},
         [](C& c, S v) { c.verbose = text::parse_bool(v, "verbose"); },
         [](const C& c) { return std::string(c.verbose ? "true" : "false"); }},
        {{"decay", "guided alpha schedule: linear, convex or concave"},
         [](C& c, S v) { c.strategy.decay = parse_decay(v); },
         [](const C& c) { return to_string(c.strategy.decay); }},
        {{"decay_temperature", "exponent of the convex/concave schedules"},
         [](C& c, S v) { c.strategy.decay_temperature = text::parse_double(v, "decay_temperature"); },
         [d](const C& c) { return d(c.strategy.decay_temperature); }},
        {{"fixtime", "labeled fraction after which guided stops exploring"},
         [](C& c, S v) { c.strategy.fixtime = text::parse_double(v, "fixtime"); },
         [d](const C& c) { return d(c.strategy.fixtime); }},
        {{"initial_sample_ratio", "fraction of the guided budget drawn uniformly first"},
         [](C& c, S v) { c.strategy.initial_sample_ratio = text::parse_double(v, "initial_sample_ratio"); },
         [d](const C& c) { return d(c.strategy.initial_sample_ratio); }},
        {{"es_iterations", "ES generations k"},
         [](C& c, S v) { c.strategy.es_iterations = parse_int_at_least(v, "es_iterations", 1); },
         [](const C& c) { return std::to_string(c.strategy.es_iterations); }},
        {{"es_population", "ES population m"},
         [](C& c, S v) { c.strategy.es_population = parse_int_at_least(v, "es_population", 1); },
         [](const C& c) { return std::to_string(c.strategy.es_population); }},
        {{"es_sigma", "ES perturbation scale"},
         [](C& c, S v) { c.strategy.es_sigma = text::parse_double(v, "es_sigma"); },
         [d](const C& c) { return d(c.strategy.es_sigma); }},
        {{"enumeration_cap", "largest number of subsets brute force may enumerate"},
         [](C& c, S v) {
             const long long x = text::parse_int(v, "enumeration_cap");
             if (x < 1) throw std::invalid_argument("enumeration_cap: must be positive");
             c.strategy.enumeration_cap = static_cast<std::uint64_t>(x);
         },
         [](const C& c) { return std::to_string(c.strategy.enumeration_cap); }},
        {{"tree_depth", "Tree depth"},
         [](C& c, S v) { c.domain.tree_depth = parse_int_at_least(v, "tree_depth", 1); },
         [](const C& c) { return std::to_string(c.domain.tree_depth); }},
        {{"frozen_lake_size", "FrozenLake map size, 4 or 8"},
         [](C& c, S v) { c.domain.frozen_lake_size = parse_int_at_least(v, "frozen_lake_size", 4); },
         [](const C& c) { return std::to_string(c.domain.frozen_lake_size); }},
        {{"two_rooms_horizon", "TwoRooms episode length"},
         [](C& c, S v) { c.domain.two_rooms_horizon = parse_int_at_least(v, "two_rooms_horizon", 1); },
         [](const C& c) { return std::to_string(c.domain.two_rooms_horizon); }},
        {{"two_rooms_episodes", "TwoRooms default episodes per dataset"},
         [](C& c, S v) { c.domain.two_rooms_episodes = parse_int_at_least(v, "two_rooms_episodes", 1); },
         [](const C& c) { return std::to_string(c.domain.two_rooms_episodes); }},
        {{"graph_pattern", "rewarded row (0/1) for Graph columns 1..7"},
         [](C& c, S v) { c.domain.graph_pattern = text::trim(v); },
         [](const C& c) { return c.domain.graph_pattern; }},
    };
    return table;
}

const KeyDef& find_key(const std::string& key) {
    std::string k = text::lower(text::trim(key));
    for (char& ch : k)
        if (ch == '-') ch = '_';
    for (const auto& def : key_table())
        if (def.key.name == k) return def;
    throw std::invalid_argument("unknown config key '" + key + "'");
}

}  // namespace

const std::vector<ConfigKey>& config_keys() {
    static const std::vector<ConfigKey> keys = [] {
        std::vector<ConfigKey> out;
        for (const auto& def : key_table()) out.push_back(def.key);
        return out;
    }();
    return keys;
}

void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    find_key(key).set(cfg, text::trim(value));
}

void read_config(std::istream& in, ExperimentConfig& cfg, const std::string& source) {
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        const std::string body = text::trim(hash == std::string::npos ? line : line.substr(0, hash));
        if (body.empty()) continue;
        const auto eq = body.find('=');
        try {
            if (eq == std::string::npos) throw std::invalid_argument("expected key = value");
            apply_setting(cfg, text::trim(body.substr(0, eq)), text::trim(body.substr(eq + 1)));
        } catch (const std::exception& e) {
            throw std::invalid_argument(source + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
}

void load_config_file(const std::string& path, ExperimentConfig& cfg) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path);
    read_config(in, cfg, path);
}

void write_config(std::ostream& out, const ExperimentConfig& cfg) {
    for (const auto& def : key_table()) out << def.key.name << " = " << def.get(cfg) << '\n';
}

std::string default_output_dir() {
    const char* env = std::getenv("RLLF_OUTPUT_DIR");
    return env && *env ? std::string(env) : std::string("results");
}

}  // namespace rllf
