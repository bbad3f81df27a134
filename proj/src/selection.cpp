#include "rllf/selection.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "rllf/parallel.hpp"
#include "rllf/rng.hpp"

namespace rllf {

namespace {

const std::vector<std::pair<StrategyName, std::string>>& strategy_table() {
    static const std::vector<std::pair<StrategyName, std::string>> table = {
        {StrategyName::Uniform, "uniform"},
        {StrategyName::Visitation, "visitation"},
        {StrategyName::VisitationOnPolicy, "visitation_on_policy"},
        {StrategyName::Guided, "guided"},
        {StrategyName::GuidedOnPolicy, "guided_on_policy"},
        {StrategyName::BruteForce, "brute_force"},
        {StrategyName::SequentialGreedy, "sequential_greedy"},
        {StrategyName::Es, "es"},
    };
    return table;
}

std::string normalize_key(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return c == '-' ? '_' : std::tolower(c); });
    return s;
}

void check_budget(int budget, std::size_t pool) {
    if (budget < 0) throw std::invalid_argument("selection: negative budget");
    if (static_cast<std::size_t>(budget) > pool)
        throw std::invalid_argument("selection: budget " + std::to_string(budget) + " exceeds pool size " +
                                    std::to_string(pool));
}

// Weights over the pool, zero on labeled states and outside the pool.
std::vector<double> restrict_to_candidates(const std::vector<double>& weights, const OfflineDataset& data,
                                           const LabelSet& labeled) {
    std::vector<double> w(weights.size(), 0.0);
    for (StateId s : data.pool())
        if (!labeled.contains(s)) w[s] = weights[s];
    return w;
}

StateId draw_unlabeled(Rng& rng, const std::vector<double>& weights, const OfflineDataset& data,
                       const LabelSet& labeled) {
    const int pick = rng.categorical(weights);
    if (pick >= 0) return pick;
    // Uniform fallback over the unlabeled pool.
    std::vector<double> uniform(weights.size(), 0.0);
    for (StateId s : data.pool())
        if (!labeled.contains(s)) uniform[s] = 1.0;
    const int fallback = rng.categorical(uniform);
    if (fallback < 0) throw std::logic_error("selection: pool exhausted");
    return fallback;
}

StateId best_labeled_state(const QTable& q, const LabelSet& labeled) {
    StateId best = -1;
    double best_value = 0.0;
    for (StateId s : labeled.sorted()) {
        const double v = q.max_defined(s);
        if (best < 0 || v > best_value) {
            best = s;
            best_value = v;
        }
    }
    return best;
}

}  // namespace

std::vector<StateId> unrank_combination(std::uint64_t rank, int n, int k) {
    std::vector<StateId> out;
    int next = 0;
    for (int slot = 0; slot < k; ++slot) {
        for (int v = next;; ++v) {
            const std::uint64_t count = binomial(n - v - 1, k - slot - 1, ~0ULL);
            if (rank < count) {
                out.push_back(v);
                next = v + 1;
                break;
            }
            rank -= count;
        }
    }
    return out;
}

bool next_combination(std::vector<StateId>& idx, int n) {
    const int k = static_cast<int>(idx.size());
    int i = k - 1;
    while (i >= 0 && idx[i] == n - k + i) --i;
    if (i < 0) return false;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
    return true;
}

namespace {

double evaluate_set(const RllfHandle& handle, Evaluator& evaluator, const LabelSet& set) {
    return evaluator.evaluate(handle.policy(set));
}

}  // namespace

std::string to_string(StrategyName name) {
    for (const auto& [n, s] : strategy_table())
        if (n == name) return s;
    return "unknown";
}

std::string to_string(DecayKind kind) {
    switch (kind) {
        case DecayKind::Linear: return "linear";
        case DecayKind::Convex: return "convex";
        case DecayKind::Concave: return "concave";
    }
    return "linear";
}

StrategyName parse_strategy(const std::string& text) {
    const std::string key = normalize_key(text);
    for (const auto& [n, s] : strategy_table())
        if (s == key) return n;
    std::string valid;
    for (const auto& [n, s] : strategy_table()) valid += (valid.empty() ? "" : ", ") + s;
    throw std::invalid_argument("unknown strategy '" + text + "'; valid names: " + valid);
}

DecayKind parse_decay(const std::string& text) {
    const std::string key = normalize_key(text);
    if (key == "linear") return DecayKind::Linear;
    if (key == "convex") return DecayKind::Convex;
    if (key == "concave") return DecayKind::Concave;
    throw std::invalid_argument("unknown decay '" + text + "' (expected linear, convex or concave)");
}

std::vector<StrategyName> all_strategies() {
    std::vector<StrategyName> out;
    for (const auto& [n, s] : strategy_table()) out.push_back(n);
    return out;
}

bool is_training_phase(StrategyName name) {
    return name == StrategyName::BruteForce || name == StrategyName::SequentialGreedy || name == StrategyName::Es;
}

void StrategyConfig::validate(std::size_t pool_size) const {
    check_budget(budget, pool_size);
    if (!(fixtime >= 0.0 && fixtime <= 1.0)) throw std::invalid_argument("strategy: fixtime must lie in [0,1]");
    if (!(initial_sample_ratio >= 0.0 && initial_sample_ratio <= 1.0))
        throw std::invalid_argument("strategy: initial_sample_ratio must lie in [0,1]");
    if (!(decay_temperature >= 0.0)) throw std::invalid_argument("strategy: decay temperature must be non-negative");
    if (es_iterations < 1 || es_population < 1) throw std::invalid_argument("strategy: es sizes must be at least 1");
    if (!(es_sigma >= 0.0)) throw std::invalid_argument("strategy: es_sigma must be non-negative");
    if (workers < 1) throw std::invalid_argument("strategy: workers must be at least 1");
}

int budget_from_fraction(double fraction, std::size_t pool_size, bool* clamped) {
    if (!(fraction > 0.0 && fraction <= 1.0)) throw std::invalid_argument("budget fraction must lie in (0,1]");
    const long b = std::lround(fraction * static_cast<double>(pool_size));
    if (clamped) *clamped = b < 1;
    return static_cast<int>(std::max(1L, b));
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k, std::uint64_t saturate_at) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    unsigned __int128 acc = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        acc = acc * (n - k + i) / i;
        if (acc > saturate_at) return saturate_at;
    }
    return static_cast<std::uint64_t>(acc);
}

AlphaSchedule::AlphaSchedule(DecayKind kind, double temperature, double fixtime, int budget, std::size_t pool_size)
    : kind_(kind), temperature_(temperature), fixtime_(fixtime), budget_(budget), pool_(pool_size) {
    if (budget < 1) throw std::invalid_argument("alpha schedule: budget must be at least 1");
}

double AlphaSchedule::alpha(int labeled) const {
    if (pool_ > 0 && static_cast<double>(labeled) >= fixtime_ * static_cast<double>(pool_)) return 0.0;
    const double x = std::clamp(static_cast<double>(labeled) / budget_, 0.0, 1.0);
    switch (kind_) {
        case DecayKind::Linear: return 1.0 - x;
        case DecayKind::Convex: return std::pow(1.0 - x, temperature_);
        case DecayKind::Concave: return 1.0 - std::pow(x, temperature_);
    }
    return 0.0;
}

std::vector<StateId> EsGenome::decode(int budget, const std::vector<StateId>& pool) const {
    std::vector<StateId> order = pool;
    std::stable_sort(order.begin(), order.end(), [&](StateId a, StateId b) {
        if (theta[a] != theta[b]) return theta[a] > theta[b];
        return a < b;
    });
    order.resize(std::min<std::size_t>(order.size(), static_cast<std::size_t>(budget)));
    return order;
}

LabelSet select_uniform(const OfflineDataset& data, int budget, std::uint64_t seed) {
    std::vector<StateId> pool = data.pool();
    check_budget(budget, pool.size());
    Rng rng(seed);
    LabelSet set(data.num_states(), budget, "uniform");
    for (int b = 0; b < budget; ++b) {
        const std::size_t j = b + rng.below(pool.size() - b);
        std::swap(pool[b], pool[j]);
        set.add(pool[b]);
    }
    return set;
}

SelectionResult select_visitation(const OfflineDataset& data, int budget, std::uint64_t seed, bool on_policy,
                                  const RllfHandle* handle) {
    check_budget(budget, data.pool().size());
    if (on_policy && !handle) throw std::invalid_argument("visitation_on_policy: needs a learner handle");
    Rng rng(seed);
    SelectionResult out{LabelSet(data.num_states(), budget, on_policy ? "visitation_on_policy" : "visitation")};
    const std::vector<double> d_hat = data.empty() ? std::vector<double>(data.num_states(), 0.0)
                                                   : empirical_visitation(data);
    for (int b = 0; b < budget; ++b) {
        std::vector<double> weights = d_hat;
        if (on_policy && b > 0) {
            const TabularPolicy pi = handle->policy(out.set);
            ++out.rllf_calls;
            weights = state_visitation(handle->mdp(), pi);
        }
        out.set.add(draw_unlabeled(rng, restrict_to_candidates(weights, data, out.set), data, out.set));
    }
    return out;
}

SelectionResult select_guided(const OfflineDataset& data, const StrategyConfig& cfg, bool on_policy,
                              const RllfHandle& handle) {
    const auto& pool = data.pool();
    cfg.validate(pool.size());
    Rng rng(cfg.seed);
    SelectionResult out{LabelSet(data.num_states(), cfg.budget, on_policy ? "guided_on_policy" : "guided")};
    if (cfg.budget == 0) return out;

    const int initial = static_cast<int>(std::floor(cfg.initial_sample_ratio * cfg.budget));
    if (initial > 0) {
        std::vector<StateId> shuffled = pool;
        for (int b = 0; b < initial; ++b) {
            const std::size_t j = b + rng.below(shuffled.size() - b);
            std::swap(shuffled[b], shuffled[j]);
            out.set.add(shuffled[b]);
        }
    }

    const AlphaSchedule schedule(cfg.decay, cfg.decay_temperature, cfg.fixtime, cfg.budget, pool.size());
    const std::vector<double> d_hat = empirical_visitation(data);
    for (int b = initial; b < cfg.budget; ++b) {
        const double alpha = schedule.alpha(b);
        std::vector<double> weights;
        const bool need_policy = b > 0 && (on_policy || alpha < 1.0);
        std::optional<LearnResult> learned;
        if (need_policy) {
            learned = handle.learn(out.set);
            ++out.rllf_calls;
        }
        const std::vector<double>& explore =
            on_policy && learned ? state_visitation(handle.mdp(), learned->policy) : d_hat;
        if (b == 0 || alpha >= 1.0) {
            weights = explore;
        } else {
            const StateId best = best_labeled_state(learned->q, out.set);
            const std::vector<double> exploit = empirical_predecessor(data, best);
            weights.resize(explore.size());
            for (std::size_t s = 0; s < explore.size(); ++s)
                weights[s] = alpha * explore[s] + (1.0 - alpha) * exploit[s];
        }
        out.set.add(draw_unlabeled(rng, restrict_to_candidates(weights, data, out.set), data, out.set));
    }
    return out;
}

SelectionResult select_sequential_greedy(const OfflineDataset& data, const StrategyConfig& cfg,
                                         const RllfHandle& handle, Evaluator& evaluator,
                                         const std::vector<StateId>& initial) {
    cfg.validate(data.pool().size());
    SelectionResult out{LabelSet(data.num_states(), cfg.budget, "sequential_greedy", initial)};
    const std::uint64_t calls_before = evaluator.call_count();
    std::vector<double> values;
    while (static_cast<int>(out.set.size()) < cfg.budget) {
        std::vector<StateId> candidates;
        for (StateId s : data.pool())
            if (!out.set.contains(s)) candidates.push_back(s);
        if (candidates.empty()) throw std::logic_error("sequential_greedy: pool exhausted");

        const double base = evaluate_set(handle, evaluator, out.set);
        values.assign(candidates.size(), 0.0);
        parallel_chunks(candidates.size(), cfg.workers, [&](std::size_t begin, std::size_t end, std::size_t) {
            for (std::size_t i = begin; i < end; ++i) {
                LabelSet trial = out.set;
                trial.add(candidates[i]);
                values[i] = evaluate_set(handle, evaluator, trial);
            }
        });
        std::size_t best = 0;
        double best_delta = values[0] - base;
        for (std::size_t i = 1; i < candidates.size(); ++i) {
            const double delta = values[i] - base;
            if (delta > best_delta) {
                best = i;
                best_delta = delta;
            }
        }
        out.set.add(candidates[best]);
        out.value = values[best];
        out.trace.push_back(values[best]);
    }
    out.evaluator_calls = evaluator.call_count() - calls_before;
    return out;
}

SelectionResult select_brute_force(const OfflineDataset& data, const StrategyConfig& cfg, const RllfHandle& handle,
                                   Evaluator& evaluator) {
    cfg.validate(data.pool().size());
    std::vector<StateId> candidates;
    if (cfg.reduced) {
        for (StateId s : cfg.reduced_candidates)
            if (data.in_pool(s)) candidates.push_back(s);
        std::sort(candidates.begin(), candidates.end());
        candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    } else {
        candidates = data.pool();
    }
    const int n = static_cast<int>(candidates.size());
    const int k = std::min(cfg.budget, n);
    const std::uint64_t total = binomial(n, k, cfg.enumeration_cap + 1);
    if (total > cfg.enumeration_cap)
        throw std::invalid_argument("brute_force: C(" + std::to_string(n) + "," + std::to_string(k) +
                                    ") exceeds the enumeration cap; use the reduced variant or sequential_greedy");

    const std::uint64_t calls_before = evaluator.call_count();
    struct Best {
        double value = 0.0;
        std::uint64_t rank = ~0ULL;
    };
    const int workers = std::max(1, cfg.workers);
    std::vector<Best> best(workers);
    parallel_chunks(total, workers, [&](std::size_t begin, std::size_t end, std::size_t w) {
        std::vector<StateId> idx = unrank_combination(begin, n, k);
        for (std::size_t rank = begin; rank < end; ++rank) {
            LabelSet set(data.num_states(), cfg.budget, "brute_force");
            for (StateId i : idx) set.add(candidates[i]);
            const double v = evaluate_set(handle, evaluator, set);
            if (best[w].rank == ~0ULL || v > best[w].value) best[w] = {v, rank};
            next_combination(idx, n);
        }
    });
    Best winner;
    for (const auto& b : best)
        if (b.rank != ~0ULL && (winner.rank == ~0ULL || b.value > winner.value ||
                                (b.value == winner.value && b.rank < winner.rank)))
            winner = b;

    std::vector<StateId> chosen;
    for (StateId i : unrank_combination(winner.rank, n, k)) chosen.push_back(candidates[i]);
    SelectionResult out;
    if (k < cfg.budget) {
        // Fewer candidates than labels: keep them all and fill greedily.
        out = select_sequential_greedy(data, cfg, handle, evaluator, chosen);
    } else {
        out.set = LabelSet(data.num_states(), cfg.budget, "brute_force", chosen);
        out.value = winner.value;
    }
    out.set.set_strategy("brute_force");
    out.evaluator_calls = evaluator.call_count() - calls_before;
    return out;
}

SelectionResult select_es(const OfflineDataset& data, const StrategyConfig& cfg, const RllfHandle& handle,
                          Evaluator& evaluator) {
    const auto& pool = data.pool();
    cfg.validate(pool.size());
    Rng rng(cfg.seed);
    const int S = data.num_states();
    const int m = cfg.es_population;
    const std::uint64_t calls_before = evaluator.call_count();

    EsGenome mean{std::vector<double>(S, 0.0)};
    for (StateId s : pool) mean.theta[s] = std::log(static_cast<double>(data.counts().state_count[s]));

    struct Scored {
        EsGenome genome;
        double fitness;
        std::vector<StateId> decoded;
    };
    std::optional<Scored> best_ever;
    const int mu = std::max(1, m / 4);
    std::vector<double> weights(mu);
    for (int i = 0; i < mu; ++i) weights[i] = std::log(mu + 0.5) - std::log(i + 1.0);
    const double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
    for (double& w : weights) w /= wsum;

    SelectionResult out;
    for (int it = 0; it < cfg.es_iterations; ++it) {
        std::vector<Scored> gen(m);
        for (int i = 0; i < m; ++i) {
            gen[i].genome = mean;
            for (StateId s : pool) gen[i].genome.theta[s] += cfg.es_sigma * rng.normal();
            gen[i].decoded = gen[i].genome.decode(cfg.budget, pool);
        }
        parallel_chunks(m, cfg.workers, [&](std::size_t begin, std::size_t end, std::size_t) {
            for (std::size_t i = begin; i < end; ++i)
                gen[i].fitness = evaluate_set(handle, evaluator,
                                              LabelSet(S, cfg.budget, "es", gen[i].decoded));
        });
        // Elite ranking includes the best genome found so far.
        std::vector<const Scored*> ranked;
        if (best_ever) ranked.push_back(&*best_ever);
        for (const auto& g : gen) ranked.push_back(&g);
        std::stable_sort(ranked.begin(), ranked.end(),
                         [](const Scored* a, const Scored* b) { return a->fitness > b->fitness; });
        EsGenome next{std::vector<double>(S, 0.0)};
        for (int i = 0; i < mu && i < static_cast<int>(ranked.size()); ++i)
            for (StateId s : pool) next.theta[s] += weights[i] * ranked[i]->genome.theta[s];
        const Scored top = *ranked.front();
        best_ever = top;
        mean = std::move(next);
        out.trace.push_back(best_ever->fitness);
    }

    const LabelSet final_set(S, cfg.budget, "es", best_ever->decoded);
    out.value = evaluate_set(handle, evaluator, final_set);
    out.set = final_set;
    out.evaluator_calls = evaluator.call_count() - calls_before;
    return out;
}

SelectionResult select(const OfflineDataset& data, const StrategyConfig& cfg, const RllfHandle& handle,
                       Evaluator* evaluator) {
    if (is_training_phase(cfg.name) && !evaluator)
        throw std::invalid_argument(to_string(cfg.name) + " needs an evaluator");
    switch (cfg.name) {
        case StrategyName::Uniform: {
            SelectionResult out;
            out.set = select_uniform(data, cfg.budget, cfg.seed);
            return out;
        }
        case StrategyName::Visitation: return select_visitation(data, cfg.budget, cfg.seed, false);
        case StrategyName::VisitationOnPolicy: return select_visitation(data, cfg.budget, cfg.seed, true, &handle);
        case StrategyName::Guided: return select_guided(data, cfg, false, handle);
        case StrategyName::GuidedOnPolicy: return select_guided(data, cfg, true, handle);
        case StrategyName::BruteForce: return select_brute_force(data, cfg, handle, *evaluator);
        case StrategyName::SequentialGreedy: return select_sequential_greedy(data, cfg, handle, *evaluator);
        case StrategyName::Es: return select_es(data, cfg, handle, *evaluator);
    }
    throw std::logic_error("select: unhandled strategy");
}

}  // namespace rllf
