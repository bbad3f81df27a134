#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rllf/dataset.hpp"
#include "rllf/mdp.hpp"

namespace rllf {

enum class LearnerKind { Uds, Truncated };
// Expected: one update per observed (s,a) toward the mean target over its
// recorded successors. Sample: one update per dataset sample, in order.
enum class UpdateMode { Expected, Sample };

std::string to_string(LearnerKind kind);
std::string to_string(UpdateMode mode);
LearnerKind parse_learner_kind(const std::string& text);
UpdateMode parse_update_mode(const std::string& text);

struct LearnerConfig {
    LearnerKind learner = LearnerKind::Uds;
    double alpha = 1.0;
    double gamma = 0.99;
    int sweeps = 100000;
    double impute_value = 0.0;
    UpdateMode update = UpdateMode::Expected;
    double tolerance = 1e-10;
    // Greedy choices treat Q values within tie_tolerance * max(1, |best|) of
    // the best as tied, so the lowest-index rule survives rounding and
    // convergence residue.
    double tie_tolerance = 1e-8;

    void validate() const;
};

class QTable {
public:
    QTable() = default;
    QTable(int num_states, int num_actions);

    int num_states() const { return S_; }
    int num_actions() const { return A_; }
    double q(StateId s, ActionId a) const { return q_[index(s, a)]; }
    bool defined(StateId s, ActionId a) const { return defined_[index(s, a)]; }
    void set(StateId s, ActionId a, double value);
    void mark_defined(StateId s, ActionId a) { defined_[index(s, a)] = true; }

    // Max over defined entries of row s; 0 when none are defined.
    double max_defined(StateId s) const;
    // Lowest defined action within tie_tolerance * max(1, |max|) of the max;
    // action 0 when none are defined.
    ActionId greedy_action(StateId s, double tie_tolerance = 0.0) const;
    bool any_defined(StateId s) const;

    void write_csv(std::ostream& out) const;

private:
    std::size_t index(StateId s, ActionId a) const { return static_cast<std::size_t>(s) * A_ + a; }
    int S_ = 0;
    int A_ = 0;
    std::vector<double> q_;
    std::vector<bool> defined_;
};

struct LearnResult {
    TabularPolicy policy;
    QTable q;
    int sweeps = 0;
    bool converged = false;
};

LearnResult learn_uds(const LabeledView& view, const LearnerConfig& cfg);
LearnResult learn_truncated(const LabeledView& view, const TabularPolicy& data_policy, const LearnerConfig& cfg);

// Labels the dataset and runs the configured learner. Without a data policy
// the truncated learner falls back to the empirical action frequencies.
LearnResult rllf_learn(const OfflineDataset& data, const LabelSet& set, const TabularMdp& mdp,
                       const LearnerConfig& cfg, const TabularPolicy* data_policy = nullptr);
TabularPolicy run_rllf(const OfflineDataset& data, const LabelSet& set, const TabularMdp& mdp, const LearnerConfig& cfg,
                   const TabularPolicy* data_policy = nullptr);

// RLLF(D, .) bound to one dataset: the black box the selection strategies use.
class RllfHandle {
public:
    RllfHandle(const OfflineDataset& data, const TabularMdp& mdp, LearnerConfig cfg,
               std::optional<TabularPolicy> data_policy = std::nullopt);

    LearnResult learn(const LabelSet& set) const;
    TabularPolicy policy(const LabelSet& set) const { return learn(set).policy; }

    const OfflineDataset& data() const { return *data_; }
    const TabularMdp& mdp() const { return *mdp_; }
    const LearnerConfig& config() const { return cfg_; }
    const TabularPolicy& data_policy() const { return data_policy_; }

private:
    const OfflineDataset* data_;
    const TabularMdp* mdp_;
    LearnerConfig cfg_;
    TabularPolicy data_policy_;
};

}  // namespace rllf
