#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rllf {

using StateId = int;
using ActionId = int;

class TabularMdp;

namespace detail {
// Ground-truth reward table, row-major |S|x|A|. Only the dataset labeling
// step, the evaluator and the planners may include this.
const std::vector<double>& ground_truth_reward(const TabularMdp& mdp);
}  // namespace detail

struct Successor {
    StateId next;
    double prob;
};

class TabularMdp {
public:
    struct Tables {
        int num_states = 0;
        int num_actions = 0;
        std::vector<double> transition;  // |S|*|A|*|S|
        std::vector<double> reward;      // |S|*|A|
        double discount = 1.0;
        std::vector<double> initial_dist;
        std::vector<bool> terminal;
        int horizon = 1;
    };

    // Validates the tables and renormalizes every distribution.
    explicit TabularMdp(Tables tables);

    int num_states() const { return S_; }
    int num_actions() const { return A_; }
    double discount() const { return discount_; }
    int horizon() const { return horizon_; }
    bool is_terminal(StateId s) const { return terminal_[s]; }
    const std::vector<bool>& terminal() const { return terminal_; }
    const std::vector<double>& initial_dist() const { return initial_; }

    double prob(StateId s, ActionId a, StateId next) const {
        return transition_[(static_cast<std::size_t>(s) * A_ + a) * S_ + next];
    }
    std::span<const Successor> successors(StateId s, ActionId a) const;
    bool is_deterministic() const;

    TabularMdp with_discount(double gamma) const;
    TabularMdp with_horizon(int horizon) const;

private:
    int S_;
    int A_;
    double discount_;
    int horizon_;
    std::vector<double> transition_;
    std::vector<double> reward_;
    std::vector<double> initial_;
    std::vector<bool> terminal_;
    std::vector<Successor> succ_;
    std::vector<std::size_t> succ_offset_;  // |S|*|A|+1

    void build_successors();
    friend const std::vector<double>& detail::ground_truth_reward(const TabularMdp&);
};

class TabularPolicy {
public:
    TabularPolicy() = default;
    // Row-major |S|x|A| probabilities; rows are validated and renormalized.
    TabularPolicy(int num_states, int num_actions, std::vector<double> probs);

    static TabularPolicy uniform(int num_states, int num_actions);
    static TabularPolicy deterministic(const std::vector<ActionId>& actions, int num_actions);

    int num_states() const { return S_; }
    int num_actions() const { return A_; }
    double prob(StateId s, ActionId a) const { return probs_[static_cast<std::size_t>(s) * A_ + a]; }
    std::span<const double> row(StateId s) const {
        return {probs_.data() + static_cast<std::size_t>(s) * A_, static_cast<std::size_t>(A_)};
    }
    const std::vector<double>& probs() const { return probs_; }

    // Most probable action, lowest index on ties.
    ActionId mode(StateId s) const;

    bool operator==(const TabularPolicy& other) const = default;

private:
    int S_ = 0;
    int A_ = 0;
    std::vector<double> probs_;
};

struct ValueTable {
    std::vector<double> values;
    std::vector<double> q_values;  // |S|*|A|, empty when not computed
};

struct PlanResult {
    ValueTable table;
    TabularPolicy policy;
    int iterations = 0;
    bool converged = false;
    double residual = 0.0;
};

struct Step {
    StateId state;
    ActionId action;
    StateId next_state;
};
using Episode = std::vector<Step>;

// Infinite-horizon discounted value iteration. Terminal states collect
// r(s,a) once and do not bootstrap. Greedy ties go to the lowest action.
PlanResult value_iteration(const TabularMdp& mdp, double tol = 1e-10, int max_iters = 100000);

// Same, with an explicit initial Q-table (|S|*|A|).
PlanResult value_iteration(const TabularMdp& mdp, const std::vector<double>& q_init, double tol,
                           int max_iters);

// J(pi) = E[sum_{t<T} gamma^t R_t] by T backward-induction steps.
double evaluate_policy_exact(const TabularMdp& mdp, const TabularPolicy& policy);

// One episode starting from eta; ends after a terminal state acts or after T steps.
Episode rollout(const TabularMdp& mdp, const TabularPolicy& policy, std::uint64_t seed);

// Normalized expected occupancy of S_t over t < T (terminal states count once).
std::vector<double> state_visitation(const TabularMdp& mdp, const TabularPolicy& policy);

}  // namespace rllf
