#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rllf/dataset.hpp"
#include "rllf/evaluator.hpp"
#include "rllf/learners.hpp"

namespace rllf {

enum class StrategyName {
    Uniform,
    Visitation,
    VisitationOnPolicy,
    Guided,
    GuidedOnPolicy,
    BruteForce,
    SequentialGreedy,
    Es,
};

enum class DecayKind { Linear, Convex, Concave };

std::string to_string(StrategyName name);
std::string to_string(DecayKind kind);
StrategyName parse_strategy(const std::string& text);
DecayKind parse_decay(const std::string& text);
std::vector<StrategyName> all_strategies();
bool is_training_phase(StrategyName name);

struct StrategyConfig {
    StrategyName name = StrategyName::Uniform;
    int budget = 0;
    DecayKind decay = DecayKind::Linear;
    double decay_temperature = 2.0;
    double fixtime = 0.7;
    double initial_sample_ratio = 0.0;
    int es_iterations = 10;
    int es_population = 20;
    double es_sigma = 1.0;
    std::uint64_t seed = 0;
    std::uint64_t enumeration_cap = 10'000'000;
    int workers = 1;
    // Reduced brute force: enumerate only these states (nonzero-reward states).
    bool reduced = false;
    std::vector<StateId> reduced_candidates;

    void validate(std::size_t pool_size) const;
};

// Number of labels for a fraction of the pool: rounded half away from zero,
// at least 1. Sets `clamped` when the rounding had to be raised to 1.
int budget_from_fraction(double fraction, std::size_t pool_size, bool* clamped = nullptr);

class AlphaSchedule {
public:
    AlphaSchedule(DecayKind kind, double temperature, double fixtime, int budget, std::size_t pool_size);
    // Weight of the exploration term when `labeled` states are already labeled.
    double alpha(int labeled) const;

private:
    DecayKind kind_;
    double temperature_;
    double fixtime_;
    int budget_;
    std::size_t pool_;
};

struct EsGenome {
    std::vector<double> theta;  // one score per state

    // The `budget` pool states with the largest scores, ties by lowest id.
    std::vector<StateId> decode(int budget, const std::vector<StateId>& pool) const;
};

struct SelectionResult {
    SelectionResult() = default;
    explicit SelectionResult(LabelSet s) : set(std::move(s)) {}

    LabelSet set;
    std::uint64_t evaluator_calls = 0;
    int rllf_calls = 0;
    // Brute force/greedy: value of the chosen set. ES: confirmed best fitness.
    std::optional<double> value;
    // Greedy: value after each step. ES: best-so-far fitness per iteration.
    std::vector<double> trace;
};

LabelSet select_uniform(const OfflineDataset& data, int budget, std::uint64_t seed);

// Off-policy draws without replacement weighted by the dataset visitation.
// On-policy redraws from the exact visitation of the current learned policy
// and needs `handle`.
SelectionResult select_visitation(const OfflineDataset& data, int budget, std::uint64_t seed, bool on_policy,
                                  const RllfHandle* handle = nullptr);

SelectionResult select_guided(const OfflineDataset& data, const StrategyConfig& cfg, bool on_policy,
                              const RllfHandle& handle);

SelectionResult select_brute_force(const OfflineDataset& data, const StrategyConfig& cfg, const RllfHandle& handle,
                                   Evaluator& evaluator);

// Greedy additions from `initial`; the pool excludes states already in it.
SelectionResult select_sequential_greedy(const OfflineDataset& data, const StrategyConfig& cfg,
                                         const RllfHandle& handle, Evaluator& evaluator,
                                         const std::vector<StateId>& initial = {});

SelectionResult select_es(const OfflineDataset& data, const StrategyConfig& cfg, const RllfHandle& handle,
                          Evaluator& evaluator);

// Dispatches on cfg.name. Training-phase strategies require an evaluator.
SelectionResult select(const OfflineDataset& data, const StrategyConfig& cfg, const RllfHandle& handle,
                       Evaluator* evaluator);

std::uint64_t binomial(std::uint64_t n, std::uint64_t k, std::uint64_t saturate_at);

// The rank-th k-subset of {0..n-1} in lexicographic order.
std::vector<StateId> unrank_combination(std::uint64_t rank, int n, int k);
// Advances idx to the next k-subset of {0..n-1}; false after the last one.
bool next_combination(std::vector<StateId>& idx, int n);

}  // namespace rllf
