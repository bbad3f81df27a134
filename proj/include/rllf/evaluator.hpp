#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rllf/dataset.hpp"
#include "rllf/learners.hpp"
#include "rllf/mdp.hpp"

namespace rllf {

enum class EvalMode { Exact, MonteCarlo };

std::string to_string(EvalMode mode);
EvalMode parse_eval_mode(const std::string& text);

// Returns J(pi) under the true rewards. Each evaluate() call is counted.
class Evaluator {
public:
    explicit Evaluator(const TabularMdp& mdp, EvalMode mode = EvalMode::Exact, int mc_episodes = 10000,
                       std::uint64_t seed = 0);
    Evaluator(const Evaluator&) = delete;
    Evaluator& operator=(const Evaluator&) = delete;

    double evaluate(const TabularPolicy& policy);
    std::uint64_t call_count() const { return calls_.load(); }
    EvalMode mode() const { return mode_; }

private:
    const TabularMdp& mdp_;
    EvalMode mode_;
    int mc_episodes_;
    std::uint64_t seed_;
    std::atomic<std::uint64_t> calls_{0};
};

// Mean return and its standard error from seeded rollouts.
std::pair<double, double> monte_carlo_return(const TabularMdp& mdp, const TabularPolicy& policy, int episodes,
                                             std::uint64_t seed);

struct MetricsReport {
    double mean_return = 0.0;
    double standard_error = 0.0;
    std::optional<double> optimality_gap;
    double percentage_feedback = 0.0;
    std::uint64_t evaluator_calls = 0;
    std::vector<double> per_dataset;
};

// optimal - achieved; nullopt when no optimal baseline exists.
std::optional<double> optimality_gap(const std::optional<double>& optimal_return, double achieved_return);

double percentage_feedback(int budget, std::size_t pool_size);

std::pair<double, double> mean_and_stderr(const std::vector<double>& xs);

// Selection on one dataset. Training-phase strategies receive the evaluator;
// heuristics must ignore it.
using StrategyFn = std::function<LabelSet(const OfflineDataset& data, Evaluator* evaluator)>;

// Training-phase: select on train_data, freeze the set and learn on each test
// dataset. Heuristic: select on each test dataset directly. The returned
// evaluator_calls are those spent during selection only. `test_data_policies`
// holds pi_D per test dataset for the truncated learner; empty means each
// dataset's empirical action frequencies.
MetricsReport test_suite_performance(const StrategyFn& strategy, bool training_phase, const OfflineDataset& train_data,
                                     const std::vector<OfflineDataset>& test_datasets, int budget,
                                     const TabularMdp& mdp, const LearnerConfig& cfg,
                                     const std::vector<TabularPolicy>& test_data_policies = {},
                                     EvalMode mode = EvalMode::Exact);

}  // namespace rllf
