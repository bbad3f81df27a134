#include "rllf/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rllf/rng.hpp"

namespace rllf {

namespace detail {
const std::vector<double>& ground_truth_reward(const TabularMdp& mdp) { return mdp.reward_; }
}  // namespace detail

namespace {

constexpr double kInputTol = 1e-9;

// `what` is only called to build an error message.
template <typename What>
void normalize_or_throw(std::span<double> row, What what) {
    double sum = 0.0;
    for (double p : row) {
        if (!(p >= 0.0) || !std::isfinite(p)) throw std::invalid_argument(what() + ": negative or non-finite entry");
        sum += p;
    }
    if (std::abs(sum - 1.0) > kInputTol) throw std::invalid_argument(what() + ": does not sum to 1");
    for (double& p : row) p /= sum;
}

}  // namespace

TabularMdp::TabularMdp(Tables t)
    : S_(t.num_states),
      A_(t.num_actions),
      discount_(t.discount),
      horizon_(t.horizon),
      transition_(std::move(t.transition)),
      reward_(std::move(t.reward)),
      initial_(std::move(t.initial_dist)),
      terminal_(std::move(t.terminal)) {
    if (S_ <= 0 || A_ <= 0) throw std::invalid_argument("mdp: |S| and |A| must be positive");
    const auto S = static_cast<std::size_t>(S_);
    const auto A = static_cast<std::size_t>(A_);
    if (transition_.size() != S * A * S) throw std::invalid_argument("mdp: transition table has wrong size");
    if (reward_.size() != S * A) throw std::invalid_argument("mdp: reward table has wrong size");
    if (initial_.size() != S) throw std::invalid_argument("mdp: initial distribution has wrong size");
    if (terminal_.size() != S) throw std::invalid_argument("mdp: terminal flags have wrong size");
    if (!(discount_ >= 0.0 && discount_ <= 1.0)) throw std::invalid_argument("mdp: discount must lie in [0,1]");
    if (horizon_ < 1) throw std::invalid_argument("mdp: horizon must be positive");
    for (double r : reward_)
        if (!std::isfinite(r)) throw std::invalid_argument("mdp: non-finite reward");

    for (std::size_t sa = 0; sa < S * A; ++sa)
        normalize_or_throw({transition_.data() + sa * S, S},
                           [sa] { return "mdp: transition row " + std::to_string(sa); });
    normalize_or_throw(initial_, [] { return std::string("mdp: initial distribution"); });

    for (int s = 0; s < S_; ++s) {
        if (!terminal_[s]) continue;
        if (initial_[s] != 0.0) throw std::invalid_argument("mdp: terminal state with initial mass");
        for (int a = 0; a < A_; ++a)
            if (prob(s, a, s) != 1.0) throw std::invalid_argument("mdp: terminal state must self-loop");
    }
    build_successors();
}

void TabularMdp::build_successors() {
    succ_.clear();
    succ_offset_.assign(static_cast<std::size_t>(S_) * A_ + 1, 0);
    for (int s = 0; s < S_; ++s)
        for (int a = 0; a < A_; ++a) {
            const std::size_t sa = static_cast<std::size_t>(s) * A_ + a;
            succ_offset_[sa] = succ_.size();
            for (int n = 0; n < S_; ++n) {
                const double p = prob(s, a, n);
                if (p > 0.0) succ_.push_back({n, p});
            }
        }
    succ_offset_.back() = succ_.size();
}

std::span<const Successor> TabularMdp::successors(StateId s, ActionId a) const {
    const std::size_t sa = static_cast<std::size_t>(s) * A_ + a;
    return {succ_.data() + succ_offset_[sa], succ_offset_[sa + 1] - succ_offset_[sa]};
}

bool TabularMdp::is_deterministic() const {
    for (std::size_t sa = 0; sa + 1 < succ_offset_.size(); ++sa)
        if (succ_offset_[sa + 1] - succ_offset_[sa] != 1) return false;
    return true;
}

TabularMdp TabularMdp::with_discount(double gamma) const {
    TabularMdp copy = *this;
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("mdp: discount must lie in [0,1]");
    copy.discount_ = gamma;
    return copy;
}

TabularMdp TabularMdp::with_horizon(int horizon) const {
    TabularMdp copy = *this;
    if (horizon < 1) throw std::invalid_argument("mdp: horizon must be positive");
    copy.horizon_ = horizon;
    return copy;
}

TabularPolicy::TabularPolicy(int num_states, int num_actions, std::vector<double> probs)
    : S_(num_states), A_(num_actions), probs_(std::move(probs)) {
    if (S_ <= 0 || A_ <= 0) throw std::invalid_argument("policy: dimensions must be positive");
    if (probs_.size() != static_cast<std::size_t>(S_) * A_) throw std::invalid_argument("policy: wrong table size");
    for (int s = 0; s < S_; ++s)
        normalize_or_throw({probs_.data() + static_cast<std::size_t>(s) * A_, static_cast<std::size_t>(A_)},
                           [s] { return "policy: row " + std::to_string(s); });
}

TabularPolicy TabularPolicy::uniform(int num_states, int num_actions) {
    return TabularPolicy(num_states, num_actions,
                         std::vector<double>(static_cast<std::size_t>(num_states) * num_actions, 1.0 / num_actions));
}

TabularPolicy TabularPolicy::deterministic(const std::vector<ActionId>& actions, int num_actions) {
    std::vector<double> probs(actions.size() * num_actions, 0.0);
    for (std::size_t s = 0; s < actions.size(); ++s) {
        if (actions[s] < 0 || actions[s] >= num_actions) throw std::invalid_argument("policy: action out of range");
        probs[s * num_actions + actions[s]] = 1.0;
    }
    return TabularPolicy(static_cast<int>(actions.size()), num_actions, std::move(probs));
}

ActionId TabularPolicy::mode(StateId s) const {
    auto r = row(s);
    return static_cast<ActionId>(std::max_element(r.begin(), r.end()) - r.begin());
}

PlanResult value_iteration(const TabularMdp& mdp, double tol, int max_iters) {
    return value_iteration(mdp, std::vector<double>(static_cast<std::size_t>(mdp.num_states()) * mdp.num_actions(), 0.0),
                           tol, max_iters);
}

PlanResult value_iteration(const TabularMdp& mdp, const std::vector<double>& q_init, double tol, int max_iters) {
    if (!(tol > 0.0)) throw std::invalid_argument("value_iteration: tol must be positive");
    if (max_iters < 1) throw std::invalid_argument("value_iteration: max_iters must be positive");
    const int S = mdp.num_states();
    const int A = mdp.num_actions();
    if (q_init.size() != static_cast<std::size_t>(S) * A) throw std::invalid_argument("value_iteration: bad q_init");
    const auto& r = detail::ground_truth_reward(mdp);
    const double gamma = mdp.discount();

    std::vector<double> q = q_init;
    std::vector<double> v(S), next_v(S);
    for (int s = 0; s < S; ++s) v[s] = *std::max_element(q.begin() + s * A, q.begin() + (s + 1) * A);

    PlanResult out;
    for (int it = 1; it <= max_iters; ++it) {
        double residual = 0.0;
        for (int s = 0; s < S; ++s) {
            double best = -std::numeric_limits<double>::infinity();
            for (int a = 0; a < A; ++a) {
                double target = r[s * A + a];
                if (!mdp.is_terminal(s))
                    for (const auto& [n, p] : mdp.successors(s, a)) target += gamma * p * v[n];
                q[s * A + a] = target;
                best = std::max(best, target);
            }
            next_v[s] = best;
            residual = std::max(residual, std::abs(best - v[s]));
        }
        v.swap(next_v);
        out.iterations = it;
        out.residual = residual;
        if (!std::isfinite(residual)) break;
        if (residual <= tol) {
            out.converged = true;
            break;
        }
    }
    if (!out.converged && gamma >= 1.0) throw std::runtime_error("value_iteration: unbounded value");

    std::vector<ActionId> greedy(S, 0);
    for (int s = 0; s < S; ++s)
        for (int a = 1; a < A; ++a)
            if (q[s * A + a] > q[s * A + greedy[s]]) greedy[s] = a;
    out.table.values = std::move(v);
    out.table.q_values = std::move(q);
    out.policy = TabularPolicy::deterministic(greedy, A);
    return out;
}

double evaluate_policy_exact(const TabularMdp& mdp, const TabularPolicy& policy) {
    const int S = mdp.num_states();
    const int A = mdp.num_actions();
    if (policy.num_states() != S || policy.num_actions() != A)
        throw std::invalid_argument("evaluate_policy_exact: policy does not match mdp");
    const auto& r = detail::ground_truth_reward(mdp);
    const double gamma = mdp.discount();
    // Actions the policy takes, flattened once; the backup below visits them
    // in action order per state.
    struct Move {
        double pa;
        double reward;
        std::span<const Successor> next;  // empty for terminal states
    };
    std::vector<Move> moves;
    std::vector<std::size_t> first(S + 1, 0);
    moves.reserve(static_cast<std::size_t>(S) * A);
    for (int s = 0; s < S; ++s) {
        first[s] = moves.size();
        for (int a = 0; a < A; ++a) {
            const double pa = policy.prob(s, a);
            if (pa == 0.0) continue;
            moves.push_back({pa, r[s * A + a], mdp.is_terminal(s) ? std::span<const Successor>{} : mdp.successors(s, a)});
        }
    }
    first[S] = moves.size();
    std::vector<double> v(S, 0.0), next(S);
    for (int k = 0; k < mdp.horizon(); ++k) {
        for (int s = 0; s < S; ++s) {
            double acc = 0.0;
            for (std::size_t i = first[s]; i < first[s + 1]; ++i) {
                const Move& m = moves[i];
                double target = m.reward;
                for (const auto& [n, p] : m.next) target += gamma * p * v[n];
                acc += m.pa * target;
            }
            next[s] = acc;
        }
        v.swap(next);
    }
    double j = 0.0;
    for (int s = 0; s < S; ++s) j += mdp.initial_dist()[s] * v[s];
    return j;
}

Episode rollout(const TabularMdp& mdp, const TabularPolicy& policy, std::uint64_t seed) {
    Rng rng(seed);
    Episode ep;
    StateId s = rng.categorical(mdp.initial_dist());
    for (int t = 0; t < mdp.horizon(); ++t) {
        const ActionId a = rng.categorical(policy.row(s));
        StateId next = s;
        if (!mdp.is_terminal(s)) {
            auto succ = mdp.successors(s, a);
            if (succ.size() == 1) {
                next = succ[0].next;
            } else {
                const double u = rng.uniform();
                double acc = 0.0;
                next = succ.back().next;
                for (const auto& [n, p] : succ) {
                    acc += p;
                    if (u < acc) {
                        next = n;
                        break;
                    }
                }
            }
        }
        ep.push_back({s, a, next});
        if (mdp.is_terminal(s)) break;
        s = next;
    }
    return ep;
}

std::vector<double> state_visitation(const TabularMdp& mdp, const TabularPolicy& policy) {
    const int S = mdp.num_states();
    const int A = mdp.num_actions();
    std::vector<double> d = mdp.initial_dist(), next(S), occ(S, 0.0);
    for (int t = 0; t < mdp.horizon(); ++t) {
        std::fill(next.begin(), next.end(), 0.0);
        for (int s = 0; s < S; ++s) {
            if (d[s] == 0.0) continue;
            occ[s] += d[s];
            if (mdp.is_terminal(s)) continue;
            for (int a = 0; a < A; ++a) {
                const double pa = policy.prob(s, a);
                if (pa == 0.0) continue;
                for (const auto& [n, p] : mdp.successors(s, a)) next[n] += d[s] * pa * p;
            }
        }
        d.swap(next);
    }
    const double total = std::accumulate(occ.begin(), occ.end(), 0.0);
    for (double& x : occ) x /= total;
    return occ;
}

}  // namespace rllf
