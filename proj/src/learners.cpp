#include "rllf/learners.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace rllf {

std::string to_string(LearnerKind kind) { return kind == LearnerKind::Uds ? "uds" : "truncated"; }
std::string to_string(UpdateMode mode) { return mode == UpdateMode::Expected ? "expected" : "sample"; }

LearnerKind parse_learner_kind(const std::string& text) {
    std::string t = text;
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
    if (t == "uds") return LearnerKind::Uds;
    if (t == "truncated" || t == "adaptive") return LearnerKind::Truncated;
    throw std::invalid_argument("unknown learner '" + text + "' (expected uds or truncated)");
}

UpdateMode parse_update_mode(const std::string& text) {
    if (text == "expected") return UpdateMode::Expected;
    if (text == "sample") return UpdateMode::Sample;
    throw std::invalid_argument("unknown update mode '" + text + "' (expected expected or sample)");
}

void LearnerConfig::validate() const {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("learner: alpha must lie in (0,1]");
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("learner: gamma must lie in [0,1]");
    if (sweeps < 1) throw std::invalid_argument("learner: sweeps must be at least 1");
    if (!(tolerance > 0.0)) throw std::invalid_argument("learner: tolerance must be positive");
    if (!std::isfinite(impute_value)) throw std::invalid_argument("learner: impute value must be finite");
    if (!(tie_tolerance >= 0.0)) throw std::invalid_argument("learner: tie tolerance must be non-negative");
}

QTable::QTable(int num_states, int num_actions)
    : S_(num_states),
      A_(num_actions),
      q_(static_cast<std::size_t>(num_states) * num_actions, 0.0),
      defined_(static_cast<std::size_t>(num_states) * num_actions, false) {}

void QTable::set(StateId s, ActionId a, double value) {
    if (!defined_[index(s, a)] && value != 0.0) throw std::logic_error("qtable: undefined entries must stay 0");
    q_[index(s, a)] = value;
}

double QTable::max_defined(StateId s) const {
    double best = 0.0;
    bool any = false;
    for (int a = 0; a < A_; ++a)
        if (defined_[index(s, a)] && (!any || q_[index(s, a)] > best)) {
            best = q_[index(s, a)];
            any = true;
        }
    return best;
}

ActionId QTable::greedy_action(StateId s, double tie_tolerance) const {
    if (!any_defined(s)) return 0;
    const double best = max_defined(s);
    const double slack = tie_tolerance * std::max(1.0, std::abs(best));
    for (int a = 0; a < A_; ++a)
        if (defined_[index(s, a)] && q_[index(s, a)] >= best - slack) return a;
    return 0;
}

bool QTable::any_defined(StateId s) const {
    for (int a = 0; a < A_; ++a)
        if (defined_[index(s, a)]) return true;
    return false;
}

void QTable::write_csv(std::ostream& out) const {
    out << "s,a,q,defined\n";
    char buf[64];
    for (int s = 0; s < S_; ++s)
        for (int a = 0; a < A_; ++a) {
            std::snprintf(buf, sizeof buf, "%.17g", q(s, a));
            out << s << ',' << a << ',' << buf << ',' << (defined(s, a) ? 1 : 0) << '\n';
        }
}

namespace {

// Works on flat arrays and copies into a QTable at the end; the update order
// and arithmetic match a direct QTable implementation.
struct Runner {
    const LabeledView& view;
    const LearnerConfig& cfg;
    bool truncated;
    int S, A;
    std::vector<double> qv;
    std::vector<char> defined;
    std::vector<double> reward;  // known or imputed r(s,a)
    std::vector<char> boots;     // whether a transition into s bootstraps
    std::vector<char> terminal;
    std::vector<double> vmax;    // max over defined actions, 0 if none
    std::vector<std::pair<StateId, ActionId>> pairs;  // defined pairs in (s, a) order

    Runner(const LabeledView& v, const LearnerConfig& c, bool trunc)
        : view(v), cfg(c), truncated(trunc), S(v.data().num_states()), A(v.data().num_actions()) {
        const auto& counts = view.data().counts();
        const auto SA = static_cast<std::size_t>(S) * A;
        qv.assign(SA, 0.0);
        defined.assign(SA, 0);
        reward.resize(SA);
        boots.resize(S);
        terminal.resize(S);
        vmax.assign(S, 0.0);
        for (int s = 0; s < S; ++s) {
            const bool labeled = view.is_labeled(s);
            // Truncated: an unlabeled successor contributes nothing.
            boots[s] = !(truncated && !labeled);
            terminal[s] = view.terminal()[s];
            for (int a = 0; a < A; ++a) {
                const auto i = static_cast<std::size_t>(s) * A + a;
                reward[i] = view.reward(s, a).value_or(cfg.impute_value);
                if (truncated && !labeled) continue;
                defined[i] = counts.sa_count[i] > 0;
                if (defined[i]) pairs.emplace_back(s, a);
            }
        }
    }

    double bootstrap(StateId s, StateId next) const {
        if (terminal[s] || !boots[next]) return 0.0;
        return cfg.gamma * vmax[next];
    }

    double apply(StateId s, ActionId a, double target) {
        const auto row = static_cast<std::size_t>(s) * A;
        const double old = qv[row + a];
        const double updated = old + cfg.alpha * (target - old);
        qv[row + a] = updated;
        double best = 0.0;
        bool any = false;
        for (int b = 0; b < A; ++b)
            if (defined[row + b] && (!any || qv[row + b] > best)) {
                best = qv[row + b];
                any = true;
            }
        vmax[s] = best;
        return std::abs(updated - old);
    }

    std::pair<int, bool> run() {
        const auto& data = view.data();
        const auto& counts = data.counts();
        for (int sweep = 1; sweep <= cfg.sweeps; ++sweep) {
            double max_update = 0.0;
            if (cfg.update == UpdateMode::Expected) {
                for (const auto& [s, a] : pairs) {
                    const auto i = static_cast<std::size_t>(s) * A + a;
                    double future = 0.0;
                    for (const auto& e : counts.successors(s, a)) future += e.count * bootstrap(s, e.next);
                    max_update = std::max(max_update, apply(s, a, reward[i] + future / counts.sa_count[i]));
                }
            } else {
                for (const auto& x : data.samples()) {
                    const auto i = static_cast<std::size_t>(x.state) * A + x.action;
                    if (!defined[i]) continue;
                    const double target = reward[i] + bootstrap(x.state, x.next_state);
                    max_update = std::max(max_update, apply(x.state, x.action, target));
                }
            }
            if (max_update < cfg.tolerance) return {sweep, true};
        }
        return {cfg.sweeps, false};
    }

    QTable table() const {
        QTable q(S, A);
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < A; ++a) {
                const auto i = static_cast<std::size_t>(s) * A + a;
                if (!defined[i]) continue;
                q.mark_defined(s, a);
                q.set(s, a, qv[i]);
            }
        return q;
    }
};

void check_view(const LabeledView& view, const LearnerConfig& cfg) {
    cfg.validate();
    if (view.data().empty()) throw std::invalid_argument("learner: empty dataset");
}

}  // namespace

LearnResult learn_uds(const LabeledView& view, const LearnerConfig& cfg) {
    check_view(view, cfg);
    Runner runner(view, cfg, false);
    auto [sweeps, converged] = runner.run();
    QTable q = runner.table();
    std::vector<ActionId> greedy(q.num_states());
    for (int s = 0; s < q.num_states(); ++s) greedy[s] = q.greedy_action(s, cfg.tie_tolerance);
    return {TabularPolicy::deterministic(greedy, q.num_actions()), std::move(q), sweeps, converged};
}

LearnResult learn_truncated(const LabeledView& view, const TabularPolicy& data_policy, const LearnerConfig& cfg) {
    check_view(view, cfg);
    const int S = view.data().num_states(), A = view.data().num_actions();
    if (data_policy.num_states() != S || data_policy.num_actions() != A)
        throw std::invalid_argument("learn_truncated: data policy does not match dataset");
    Runner runner(view, cfg, true);
    auto [sweeps, converged] = runner.run();
    QTable q = runner.table();
    std::vector<double> probs(static_cast<std::size_t>(S) * A, 0.0);
    for (int s = 0; s < S; ++s) {
        if (view.is_labeled(s)) {
            probs[static_cast<std::size_t>(s) * A + q.greedy_action(s, cfg.tie_tolerance)] = 1.0;
        } else {
            auto row = data_policy.row(s);
            std::copy(row.begin(), row.end(), probs.begin() + static_cast<std::ptrdiff_t>(s) * A);
        }
    }
    return {TabularPolicy(S, A, std::move(probs)), std::move(q), sweeps, converged};
}

LearnResult rllf_learn(const OfflineDataset& data, const LabelSet& set, const TabularMdp& mdp,
                       const LearnerConfig& cfg, const TabularPolicy* data_policy) {
    const LabeledView view = label(data, set, mdp);
    if (cfg.learner == LearnerKind::Uds) return learn_uds(view, cfg);
    if (data_policy) return learn_truncated(view, *data_policy, cfg);
    return learn_truncated(view, empirical_data_policy(data), cfg);
}

TabularPolicy run_rllf(const OfflineDataset& data, const LabelSet& set, const TabularMdp& mdp, const LearnerConfig& cfg,
                   const TabularPolicy* data_policy) {
    return rllf_learn(data, set, mdp, cfg, data_policy).policy;
}

RllfHandle::RllfHandle(const OfflineDataset& data, const TabularMdp& mdp, LearnerConfig cfg,
                       std::optional<TabularPolicy> data_policy)
    : data_(&data), mdp_(&mdp), cfg_(cfg) {
    cfg_.validate();
    data_policy_ = data_policy ? std::move(*data_policy) : empirical_data_policy(data);
}

LearnResult RllfHandle::learn(const LabelSet& set) const { return rllf_learn(*data_, set, *mdp_, cfg_, &data_policy_); }

}  // namespace rllf
