#pragma once

// Small MDP builders and independent reference computations for the tests.
// The oracles below deliberately avoid the library's planners and counters.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "rllf/dataset.hpp"
#include "rllf/mdp.hpp"

namespace testing {

using rllf::ActionId;
using rllf::StateId;
using rllf::TabularMdp;

struct Builder {
    TabularMdp::Tables t;
    Builder(int S, int A, int horizon, double discount = 1.0) {
        t.num_states = S;
        t.num_actions = A;
        t.transition.assign(static_cast<std::size_t>(S) * A * S, 0.0);
        t.reward.assign(static_cast<std::size_t>(S) * A, 0.0);
        t.discount = discount;
        t.initial_dist.assign(S, 0.0);
        t.terminal.assign(S, false);
        t.horizon = horizon;
    }
    void p(int s, int a, int s2, double prob) { t.transition[(static_cast<std::size_t>(s) * t.num_actions + a) * t.num_states + s2] = prob; }
    void r(int s, int a, double v) { t.reward[static_cast<std::size_t>(s) * t.num_actions + a] = v; }
    void terminal(int s) {
        t.terminal[s] = true;
        for (int a = 0; a < t.num_actions; ++a) p(s, a, s, 1.0);
    }
    TabularMdp build() const { return TabularMdp(t); }
};

// Deterministic chain 0 -> 1 -> ... -> n-1 (terminal) under every action.
inline TabularMdp chain(int n, int horizon, double goal_reward = 1.0) {
    Builder b(n, 1, horizon);
    for (int s = 0; s + 1 < n; ++s) b.p(s, 0, s + 1, 1.0);
    b.terminal(n - 1);
    b.r(n - 1, 0, goal_reward);
    b.t.initial_dist[0] = 1.0;
    return b.build();
}

// Random sparse MDP: each (s,a) reaches at most two successors; the last state
// is terminal; rewards in [-1, 1].
inline TabularMdp random_mdp(std::uint64_t seed, int S, int A, int horizon) {
    std::mt19937_64 g(seed);
    std::uniform_int_distribution<int> pick(0, S - 1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Builder b(S, A, horizon);
    for (int s = 0; s + 1 < S; ++s)
        for (int a = 0; a < A; ++a) {
            const int x = pick(g), y = pick(g);
            const double w = u(g);
            if (x == y) {
                b.p(s, a, x, 1.0);
            } else {
                b.p(s, a, x, w);
                b.p(s, a, y, 1.0 - w);
            }
            b.r(s, a, std::round((2.0 * u(g) - 1.0) * 8.0) / 8.0);
        }
    b.terminal(S - 1);
    b.r(S - 1, 0, 1.0);
    b.t.initial_dist[0] = 1.0;
    return b.build();
}

// Greedy actions of value iteration on the empirical model built from raw
// sample counts, maximizing only over observed actions. Terminal states take
// their reward without bootstrapping. Ties go to the lowest action.
inline std::vector<ActionId> empirical_vi_policy(const rllf::OfflineDataset& data, const TabularMdp& mdp,
                                                 const std::vector<double>& reward, double gamma,
                                                 std::vector<double>* q_out = nullptr) {
    const int S = data.num_states(), A = data.num_actions();
    std::vector<double> n(static_cast<std::size_t>(S) * A, 0.0);
    std::vector<double> nn(static_cast<std::size_t>(S) * A * S, 0.0);
    for (const auto& x : data.samples()) {
        n[static_cast<std::size_t>(x.state) * A + x.action] += 1.0;
        nn[(static_cast<std::size_t>(x.state) * A + x.action) * S + x.next_state] += 1.0;
    }
    std::vector<double> v(S, 0.0), q(static_cast<std::size_t>(S) * A, 0.0);
    for (int it = 0; it < 200000; ++it) {
        double delta = 0.0;
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < A; ++a) {
                const std::size_t sa = static_cast<std::size_t>(s) * A + a;
                if (n[sa] == 0) continue;
                double future = 0.0;
                if (!mdp.is_terminal(s))
                    for (int s2 = 0; s2 < S; ++s2) future += nn[sa * S + s2] / n[sa] * v[s2];
                const double target = reward[sa] + gamma * future;
                delta = std::max(delta, std::abs(target - q[sa]));
                q[sa] = target;
            }
        for (int s = 0; s < S; ++s) {
            bool any = false;
            double best = 0.0;
            for (int a = 0; a < A; ++a) {
                const std::size_t sa = static_cast<std::size_t>(s) * A + a;
                if (n[sa] > 0 && (!any || q[sa] > best)) best = q[sa], any = true;
            }
            v[s] = best;
        }
        if (delta < 1e-13) break;
    }
    std::vector<ActionId> pi(S, 0);
    for (int s = 0; s < S; ++s) {
        int best = -1;
        for (int a = 0; a < A; ++a) {
            const std::size_t sa = static_cast<std::size_t>(s) * A + a;
            if (n[sa] > 0 && (best < 0 || q[sa] > q[static_cast<std::size_t>(s) * A + best])) best = a;
        }
        pi[s] = best < 0 ? 0 : best;
    }
    if (q_out) *q_out = q;
    return pi;
}

// Independent Monte-Carlo sampler: returns (mean, stderr) of the episode return.
inline std::pair<double, double> mc_return(const TabularMdp& mdp, const rllf::TabularPolicy& pi,
                                           const std::vector<double>& reward, int episodes, std::uint64_t seed) {
    std::mt19937_64 g(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int S = mdp.num_states(), A = mdp.num_actions();
    auto draw = [&](auto weight, int n) {
        double x = u(g), acc = 0.0;
        int last = 0;
        for (int i = 0; i < n; ++i) {
            const double w = weight(i);
            if (w <= 0) continue;
            last = i;
            acc += w;
            if (x < acc) return i;
        }
        return last;
    };
    double sum = 0.0, sq = 0.0;
    for (int e = 0; e < episodes; ++e) {
        int s = draw([&](int i) { return mdp.initial_dist()[i]; }, S);
        double ret = 0.0, disc = 1.0;
        for (int t = 0; t < mdp.horizon(); ++t) {
            const int a = draw([&](int i) { return pi.prob(s, i); }, A);
            ret += disc * reward[static_cast<std::size_t>(s) * A + a];
            disc *= mdp.discount();
            if (mdp.is_terminal(s)) break;
            s = draw([&](int i) { return mdp.prob(s, a, i); }, S);
        }
        sum += ret;
        sq += ret * ret;
    }
    const double mean = sum / episodes;
    const double var = std::max(0.0, sq / episodes - mean * mean) * episodes / (episodes - 1.0);
    return {mean, std::sqrt(var / episodes)};
}

// Two-sample Kolmogorov-Smirnov statistic.
inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == x) ++i;
        while (j < b.size() && b[j] == x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
    }
    return d;
}

// Critical value at significance 0.001.
inline double ks_critical(std::size_t n, std::size_t m) {
    return 1.949 * std::sqrt(static_cast<double>(n + m) / (static_cast<double>(n) * m));
}

// Pearson chi-square statistic of observed counts against expected counts.
inline double chi_square(const std::vector<double>& observed, const std::vector<double>& expected) {
    double x = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i)
        if (expected[i] > 0) x += (observed[i] - expected[i]) * (observed[i] - expected[i]) / expected[i];
    return x;
}

// Upper 0.001 quantile of chi-square with k degrees of freedom
// (Wilson-Hilferty approximation).
inline double chi_square_critical(int k) {
    const double z = 3.090;
    const double c = 2.0 / (9.0 * k);
    return k * std::pow(1.0 - c + z * std::sqrt(c), 3.0);
}

}  // namespace testing
