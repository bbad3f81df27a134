#include "rllf/evaluator.hpp"

#include <cmath>
#include <stdexcept>

#include "rllf/rng.hpp"

namespace rllf {

std::string to_string(EvalMode mode) { return mode == EvalMode::Exact ? "exact" : "monte_carlo"; }

EvalMode parse_eval_mode(const std::string& text) {
    if (text == "exact") return EvalMode::Exact;
    if (text == "monte_carlo" || text == "mc") return EvalMode::MonteCarlo;
    throw std::invalid_argument("unknown evaluator mode '" + text + "' (expected exact or monte_carlo)");
}

Evaluator::Evaluator(const TabularMdp& mdp, EvalMode mode, int mc_episodes, std::uint64_t seed)
    : mdp_(mdp), mode_(mode), mc_episodes_(mc_episodes), seed_(seed) {
    if (mode == EvalMode::MonteCarlo && mc_episodes < 2)
        throw std::invalid_argument("evaluator: monte carlo mode needs at least 2 episodes");
}

double Evaluator::evaluate(const TabularPolicy& policy) {
    calls_.fetch_add(1);
    if (mode_ == EvalMode::Exact) return evaluate_policy_exact(mdp_, policy);
    return monte_carlo_return(mdp_, policy, mc_episodes_, seed_).first;
}

std::pair<double, double> monte_carlo_return(const TabularMdp& mdp, const TabularPolicy& policy, int episodes,
                                             std::uint64_t seed) {
    const auto& r = detail::ground_truth_reward(mdp);
    const int A = mdp.num_actions();
    std::vector<double> returns(episodes);
    for (int e = 0; e < episodes; ++e) {
        double g = 0.0, disc = 1.0;
        for (const auto& st : rollout(mdp, policy, splitmix64(seed ^ (0xa5a5a5a5ULL + e)))) {
            g += disc * r[static_cast<std::size_t>(st.state) * A + st.action];
            disc *= mdp.discount();
        }
        returns[e] = g;
    }
    return mean_and_stderr(returns);
}

std::optional<double> optimality_gap(const std::optional<double>& optimal_return, double achieved_return) {
    if (!optimal_return) return std::nullopt;
    return *optimal_return - achieved_return;
}

double percentage_feedback(int budget, std::size_t pool_size) {
    if (pool_size == 0) throw std::invalid_argument("percentage_feedback: empty pool");
    return static_cast<double>(budget) / static_cast<double>(pool_size);
}

std::pair<double, double> mean_and_stderr(const std::vector<double>& xs) {
    if (xs.empty()) return {0.0, 0.0};
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    if (xs.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    const double var = ss / static_cast<double>(xs.size() - 1);
    return {mean, std::sqrt(var / static_cast<double>(xs.size()))};
}

MetricsReport test_suite_performance(const StrategyFn& strategy, bool training_phase, const OfflineDataset& train_data,
                                     const std::vector<OfflineDataset>& test_datasets, int budget,
                                     const TabularMdp& mdp, const LearnerConfig& cfg,
                                     const std::vector<TabularPolicy>& test_data_policies, EvalMode mode) {
    if (test_datasets.empty()) throw std::invalid_argument("test_suite_performance: no test datasets");
    if (!test_data_policies.empty() && test_data_policies.size() != test_datasets.size())
        throw std::invalid_argument("test_suite_performance: one data policy per test dataset expected");
    MetricsReport report;
    report.percentage_feedback = percentage_feedback(budget, train_data.pool().size());

    auto measure = [&](const TabularPolicy& pi, std::size_t k) {
        if (mode == EvalMode::Exact) return evaluate_policy_exact(mdp, pi);
        return monte_carlo_return(mdp, pi, 10000, 0x7e57ULL + k).first;
    };

    std::optional<LabelSet> frozen;
    if (training_phase) {
        Evaluator ev(mdp, mode);
        frozen = strategy(train_data, &ev);
        report.evaluator_calls = ev.call_count();
    }
    for (std::size_t k = 0; k < test_datasets.size(); ++k) {
        const auto& test = test_datasets[k];
        const LabelSet set = training_phase ? *frozen : strategy(test, nullptr);
        const TabularPolicy* pi_d = test_data_policies.empty() ? nullptr : &test_data_policies[k];
        report.per_dataset.push_back(measure(run_rllf(test, set, mdp, cfg, pi_d), k));
    }
    std::tie(report.mean_return, report.standard_error) = mean_and_stderr(report.per_dataset);
    return report;
}

}  // namespace rllf
