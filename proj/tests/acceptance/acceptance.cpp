// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.
//
// "stderr" below is the standard error of the difference between the two
// means being compared: sqrt(se_a^2 + se_b^2).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "../helpers.hpp"
#include "rllf/domains.hpp"
#include "rllf/experiment.hpp"
#include "rllf/rng.hpp"
#include "rllf/text.hpp"

using namespace rllf;
namespace fs = std::filesystem;

namespace {

const std::vector<double> kBudgets{0.1, 0.3, 0.5, 0.7, 0.9};

struct Outcome {
    bool pass = true;
    std::string detail;
};

std::string fmt(double x, int decimals = 4) { return text::format_fixed(x, decimals); }

double diff_stderr(double a, double b) { return std::sqrt(a * a + b * b); }

// x >= y for statistics that can be equal in exact arithmetic (one replicate
// off by one unit gives a difference equal to its stderr); rounding must not
// decide those.
bool at_least(double x, double y) { return x >= y - 1e-12 * std::max(1.0, std::abs(y)); }

double train_return(const DomainContext& ctx, const LabelSet& set) {
    return evaluate_policy_exact(ctx.spec.mdp, ctx.train_handle->policy(set));
}

fs::path scratch_dir(const std::string& tag) {
    const fs::path p = fs::temp_directory_path() / ("rllf_acceptance_" + tag);
    fs::remove_all(p);
    return p;
}

// Mean and stderr of a CSV column per (strategy, budget).
struct CellStats {
    double mean = 0.0;
    double se = 0.0;
};

CellStats stats_of(const std::vector<ResultRow>& rows, const std::string& domain, const std::string& strategy,
                   int budget, const std::function<double(const ResultRow&)>& value) {
    std::vector<double> xs;
    for (const auto& r : rows)
        if (r.domain == domain && r.strategy == strategy && r.budget == budget) xs.push_back(value(r));
    const auto [m, se] = mean_and_stderr(xs);
    return {m, se};
}

Outcome criterion1() {
    Outcome out;
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentConfig cfg;
    std::ostringstream detail;
    for (const char* name : {"Graph", "TwoRooms", "TwoRoomsTrap"}) {
        const auto ctx = prepare_domain(cfg, name);
        const auto pool = ctx->train.pool().size();
        int matched = 0;
        for (double f : kBudgets) {
            const int B = budget_from_fraction(f, pool);
            const auto brute = optimal_baseline(*ctx, cfg, B);
            if (!brute) {
                out.pass = false;
                detail << name << " B=" << B << " brute force infeasible; ";
                continue;
            }
            StrategyConfig sc = cfg.strategy;
            sc.name = StrategyName::SequentialGreedy;
            sc.budget = B;
            Evaluator ev(ctx->spec.mdp);
            const auto greedy = select_sequential_greedy(ctx->train, sc, *ctx->train_handle, ev);
            const double vb = train_return(*ctx, brute->set), vg = train_return(*ctx, greedy.set);
            if (std::abs(vb - vg) <= 1e-9) {
                ++matched;
            } else {
                out.pass = false;
                detail << name << " B=" << B << " brute=" << fmt(vb) << " greedy=" << fmt(vg) << "; ";
            }
        }
        detail << name << " " << matched << "/5 equal; ";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    detail << "runtime " << fmt(secs, 1) << "s";
    if (secs > 300.0) out.pass = false;
    out.detail = detail.str();
    return out;
}

Outcome criterion2() {
    Outcome out;
    ExperimentConfig cfg;
    int cells = 0;
    std::ostringstream detail;
    for (const auto& name : domain_names()) {
        const auto ctx = prepare_domain(cfg, name);
        const double optimum = optimal_return(ctx->spec);
        const int B = budget_from_fraction(1.0, ctx->train.pool().size());
        for (auto strategy : all_strategies()) {
            StrategyConfig sc = cfg.strategy;
            sc.name = strategy;
            sc.budget = B;
            sc.seed = cell_seed(name, to_string(strategy), 1.0, 0);
            Evaluator ev(ctx->spec.mdp);
            const auto res = select(ctx->train, sc, *ctx->train_handle, &ev);
            const double v = train_return(*ctx, res.set);
            ++cells;
            if (std::abs(v - optimum) > 1e-9) {
                out.pass = false;
                detail << name << "/" << to_string(strategy) << " " << fmt(v) << " vs " << fmt(optimum) << "; ";
            }
        }
        if (name == "Graph" && std::abs(optimum - 8.0) > 1e-9) out.pass = false;
        if (name == "CliffWalk" && std::abs(optimum + 13.0) > 1e-9) out.pass = false;
        if (name == "Graph" || name == "CliffWalk") detail << name << " optimum " << fmt(optimum, 6) << "; ";
    }
    detail << cells << " strategy/domain cells at 100% feedback";
    out.detail = detail.str();
    return out;
}

Outcome criterion3() {
    Outcome out;
    ExperimentConfig cfg;
    cfg.domains = {"Graph", "Tree"};
    cfg.strategies = {"guided", "visitation", "uniform"};
    cfg.budgets = kBudgets;
    cfg.seeds = 100;
    cfg.output_dir = scratch_dir("c3").string();
    const auto rows = run_experiment(cfg);
    std::ostringstream detail;
    int violations = 0;
    for (const auto& domain : cfg.domains) {
        const auto ctx = prepare_domain(cfg, domain);
        const auto pool = ctx->train.pool().size();
        for (const auto& strategy : cfg.strategies) {
            detail << domain << "/" << strategy << " gaps";
            CellStats prev{};
            for (std::size_t i = 0; i < kBudgets.size(); ++i) {
                const int B = budget_from_fraction(kBudgets[i], pool);
                const auto s = stats_of(rows, domain, strategy, B, [](const ResultRow& r) {
                    return r.optimality_gap.value_or(std::nan(""));
                });
                detail << " " << fmt(s.mean, 3);
                if (std::isnan(s.mean)) out.pass = false;
                if (i > 0 && !at_least(diff_stderr(s.se, prev.se), s.mean - prev.mean)) {
                    out.pass = false;
                    ++violations;
                    detail << "(!)";
                }
                prev = s;
            }
            detail << "; ";
        }
    }
    detail << violations << " violations beyond 1 stderr";
    fs::remove_all(cfg.output_dir);
    out.detail = detail.str();
    return out;
}

Outcome criterion4() {
    Outcome out;
    ExperimentConfig cfg;
    cfg.domains = {"TwoRooms"};
    cfg.strategies = {"uniform", "visitation"};
    cfg.budgets = kBudgets;
    cfg.seeds = 100;
    cfg.baseline = false;
    cfg.output_dir = scratch_dir("c4").string();
    const auto rows = run_experiment(cfg);
    const auto ctx = prepare_domain(cfg, "TwoRooms");
    std::ostringstream detail;
    for (double f : kBudgets) {
        const int B = budget_from_fraction(f, ctx->train.pool().size());
        auto ret = [](const ResultRow& r) { return r.ret; };
        const auto u = stats_of(rows, "TwoRooms", "uniform", B, ret);
        const auto v = stats_of(rows, "TwoRooms", "visitation", B, ret);
        const double sep = (u.mean - v.mean) / std::max(diff_stderr(u.se, v.se), 1e-300);
        detail << "f=" << fmt(f, 1) << " uniform " << fmt(u.mean, 3) << " visitation " << fmt(v.mean, 3);
        if (u.mean < v.mean) out.pass = false;
        if (f >= 0.3 - 1e-12) {
            detail << " (" << fmt(sep, 1) << " se)";
            if (!at_least(u.mean - v.mean, 2.0 * diff_stderr(u.se, v.se))) out.pass = false;
        }
        detail << "; ";
    }
    fs::remove_all(cfg.output_dir);
    out.detail = detail.str();
    return out;
}

Outcome criterion5() {
    Outcome out;
    ExperimentConfig cfg;
    std::ostringstream detail;
    for (const auto& name : domain_names()) {
        const auto ctx = prepare_domain(cfg, name);
        const int S = ctx->spec.mdp.num_states();
        LearnerConfig trunc = cfg.learner, uds = cfg.learner;
        trunc.learner = LearnerKind::Truncated;
        uds.learner = LearnerKind::Uds;
        const auto& pi_d = ctx->train_handle->data_policy();
        const auto none = rllf_learn(ctx->train, LabelSet(S, 0, "none"), ctx->spec.mdp, trunc, &pi_d);
        std::vector<StateId> all(S);
        std::iota(all.begin(), all.end(), 0);
        const LabelSet full(S, S, "all", all);
        const auto t_full = rllf_learn(ctx->train, full, ctx->spec.mdp, trunc, &pi_d);
        const auto u_full = rllf_learn(ctx->train, full, ctx->spec.mdp, uds, &pi_d);
        const bool fallback = none.policy == pi_d;
        const bool reduces = t_full.policy == u_full.policy;
        if (!fallback || !reduces) out.pass = false;
        detail << name << (fallback ? " B=0 ok" : " B=0 MISMATCH") << (reduces ? ", B=|S| ok; " : ", B=|S| MISMATCH; ");
    }
    out.detail = detail.str();
    return out;
}

Outcome criterion6() {
    Outcome out;
    ExperimentConfig cfg;
    const auto ctx = prepare_domain(cfg, "Graph");
    std::ostringstream detail;

    StrategyConfig sc = cfg.strategy;
    sc.budget = 2;
    Evaluator e1(ctx->spec.mdp);
    const auto brute = select_brute_force(ctx->train, sc, *ctx->train_handle, e1);
    detail << "brute force B=2: " << brute.evaluator_calls << " calls; ";
    if (brute.evaluator_calls != 120) out.pass = false;

    const auto pool = ctx->train.pool().size();
    sc.budget = 3;
    Evaluator e2(ctx->spec.mdp);
    const auto greedy = select_sequential_greedy(ctx->train, sc, *ctx->train_handle, e2);
    std::uint64_t marginal = 0;
    for (int b = 0; b < 3; ++b) marginal += pool - b;
    detail << "greedy pool=" << pool << " B=3: " << greedy.evaluator_calls << " calls (" << marginal
           << " marginal + 3 base re-evaluations); ";
    if (pool != 16 || marginal != 45 || greedy.evaluator_calls != marginal + 3) out.pass = false;

    sc.budget = budget_from_fraction(0.3, pool);
    sc.es_iterations = 10;
    sc.es_population = 20;
    sc.seed = 1;
    Evaluator e3(ctx->spec.mdp);
    const auto es = select_es(ctx->train, sc, *ctx->train_handle, e3);
    detail << "ES k=10 m=20: " << es.evaluator_calls << " calls (200 + 1 final)";
    if (es.evaluator_calls != 201) out.pass = false;
    out.detail = detail.str();
    return out;
}

Outcome criterion7() {
    ExperimentConfig cfg;
    std::ostringstream detail;
    int separated = 0, ordered = 0;
    for (const char* name : {"Graph", "Tree"}) {
        const auto ctx = prepare_domain(cfg, name);
        for (double f : {0.1, 0.3}) {
            CellStats stats[2];
            int idx = 0;
            for (int m : {20, 5}) {
                std::vector<double> best;
                for (int rep = 0; rep < 20; ++rep) {
                    StrategyConfig sc = cfg.strategy;
                    sc.budget = budget_from_fraction(f, ctx->train.pool().size());
                    sc.es_iterations = 10;
                    sc.es_population = m;
                    sc.seed = derive_seed(std::string(name), std::string("es"), std::to_string(m),
                                          text::format_double(f), std::to_string(rep));
                    Evaluator ev(ctx->spec.mdp);
                    best.push_back(select_es(ctx->train, sc, *ctx->train_handle, ev).value.value());
                }
                const auto [mean, se] = mean_and_stderr(best);
                stats[idx++] = {mean, se};
            }
            const double d = stats[0].mean - stats[1].mean;
            const double se = diff_stderr(stats[0].se, stats[1].se);
            if (d >= 0.0) ++ordered;
            if (at_least(d, se) && d > 0.0) ++separated;
            detail << name << " f=" << fmt(f, 1) << " m20 " << fmt(stats[0].mean, 3) << " m5 "
                   << fmt(stats[1].mean, 3) << " (diff " << fmt(d, 3) << ", se " << fmt(se, 3) << "); ";
        }
    }
    detail << ordered << "/4 ordered, " << separated << "/4 separated by 1 stderr";
    return {ordered == 4 && separated >= 3, detail.str()};
}

Outcome criterion8() {
    Outcome out;
    ExperimentConfig cfg;
    std::ostringstream detail;
    for (const char* name : {"Graph", "TwoRooms"}) {
        const auto ctx = prepare_domain(cfg, name);
        std::vector<TabularPolicy> pi_d;
        for (const auto& h : ctx->test_handles) pi_d.push_back(h->data_policy());
        double worst = 0.0;
        for (double f : kBudgets) {
            const int B = budget_from_fraction(f, ctx->train.pool().size());
            StrategyConfig sc = cfg.strategy;
            sc.budget = B;
            LabelSet frozen;
            StrategyFn fn = [&](const OfflineDataset& data, Evaluator* ev) {
                frozen = select_sequential_greedy(data, sc, ctx->handle_for(data), *ev).set;
                return frozen;
            };
            const auto report = test_suite_performance(fn, true, ctx->train, ctx->tests, B, ctx->spec.mdp,
                                                       cfg.learner, pi_d);
            const double train = train_return(*ctx, frozen);
            const double rel = std::abs(report.mean_return - train) / std::max(std::abs(train), 1e-12);
            worst = std::max(worst, rel);
            if (rel > 0.05) {
                out.pass = false;
                detail << name << " f=" << fmt(f, 1) << " train " << fmt(train) << " test " << fmt(report.mean_return)
                       << "; ";
            }
        }
        detail << name << " worst relative difference " << fmt(100.0 * worst, 2) << "%; ";
    }
    out.detail = detail.str();
    return out;
}

Outcome criterion9() {
    Outcome out;
    std::ostringstream detail;
    int matches = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto mdp = testing::random_mdp(seed, 6, 3, 12);
        const auto data = collect(mdp, {TabularPolicy::uniform(6, 3), 0.0}, 300, seed * 13);
        LearnerConfig cfg;
        cfg.gamma = 0.9;
        const LabelSet full(6, 6, "all", {0, 1, 2, 3, 4, 5});
        const auto pi = run_rllf(data, full, mdp, cfg);
        const auto oracle = testing::empirical_vi_policy(data, mdp, rllf::detail::ground_truth_reward(mdp), 0.9);
        bool same = true;
        for (int s = 0; s < 6; ++s) same = same && pi.prob(s, oracle[s]) == 1.0;
        if (same) ++matches;
    }
    detail << matches << "/5 random MDPs match the oracle policy; ";
    if (matches != 5) out.pass = false;

    // s0 -a0-> s1 -> s2 (terminal, r=1); s0 -a1-> s2; r(s0,.)=0.5; labels {s0, s2}.
    testing::Builder b(3, 2, 5);
    b.p(0, 0, 1, 1.0), b.p(0, 1, 2, 1.0), b.p(1, 0, 2, 1.0), b.p(1, 1, 2, 1.0);
    b.terminal(2);
    b.r(0, 0, 0.5), b.r(0, 1, 0.5), b.r(2, 0, 1.0), b.r(2, 1, 1.0);
    b.t.initial_dist[0] = 1.0;
    const auto mdp = b.build();
    const OfflineDataset data(3, 2, {{0, 0, 1}, {1, 0, 2}, {2, 0, 2}, {0, 1, 2}, {2, 0, 2}}, {0, 3}, {});
    LearnerConfig cfg;
    cfg.learner = LearnerKind::Truncated;
    cfg.gamma = 0.9;
    const auto res = rllf_learn(data, LabelSet(3, 2, "x", {0, 2}), mdp, cfg);
    const double e1 = std::abs(res.q.q(0, 0) - 0.5), e2 = std::abs(res.q.q(0, 1) - 1.4),
                 e3 = std::abs(res.q.q(2, 0) - 1.0);
    const double err = std::max({e1, e2, e3});
    detail << "three-state truncated fixed point max error " << err;
    if (err > 1e-8) out.pass = false;
    out.detail = detail.str();
    return out;
}

Outcome criterion10() {
    Outcome out;
    ExperimentConfig cfg;
    std::ostringstream detail;
    {
        const auto ctx = prepare_domain(cfg, "CliffWalk");
        const auto pool = ctx->train.pool().size();
        StrategyConfig sc = cfg.strategy;
        sc.budget = budget_from_fraction(0.1, pool);
        Evaluator ev(ctx->spec.mdp);
        const auto greedy = select_sequential_greedy(ctx->train, sc, *ctx->train_handle, ev);
        const auto report = pattern_report(ctx->spec, {greedy.set}, pool);
        const double penalty = report.entries.at(0).penalty;
        detail << "CliffWalk B=" << sc.budget << " greedy set {";
        for (std::size_t i = 0; i < greedy.set.states().size(); ++i)
            detail << (i ? "," : "") << ctx->spec.state_names[greedy.set.states()[i]];
        detail << "} value " << fmt(greedy.value.value(), 3) << " penalty fraction " << fmt(penalty, 3) << "; ";
        if (!(penalty > 0.0)) out.pass = false;
    }
    {
        const auto ctx = prepare_domain(cfg, "Graph");
        const auto best = optimal_baseline(*ctx, cfg, 1);
        const StateId goal = ctx->spec.states_tagged(StateTag::Goal).at(0);
        const bool has_goal = best && best->set.contains(goal);
        detail << "Graph B=1 optimal set " << (has_goal ? "contains" : "misses") << " the goal";
        if (!has_goal) out.pass = false;
    }
    out.detail = detail.str();
    return out;
}

}  // namespace

// Arguments, if any, are criterion numbers to run; the default is all of them.
int main(int argc, char** argv) {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"greedy equals brute force", criterion1},
        {"saturation at full feedback", criterion2},
        {"gap decreases with budget", criterion3},
        {"bottleneck effect on TwoRooms", criterion4},
        {"truncated learner fallback", criterion5},
        {"evaluator call accounting", criterion6},
        {"ES population scaling", criterion7},
        {"train to test generalization", criterion8},
        {"oracle equivalence", criterion9},
        {"label pattern sanity", criterion10},
    };
    std::vector<bool> selected(criteria.size(), argc <= 1);
    for (int i = 1; i < argc; ++i) {
        const int n = std::atoi(argv[i]);
        if (n < 1 || n > static_cast<int>(criteria.size())) {
            std::fprintf(stderr, "unknown criterion '%s'\n", argv[i]);
            return 2;
        }
        selected[n - 1] = true;
    }
    std::size_t failed = 0, ran = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        if (!selected[i]) continue;
        ++ran;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!o.pass) ++failed;
        std::printf("criterion %zu [%s] %s: %s (%.1fs)\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first,
                    o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    std::printf("%zu/%zu criteria passed\n", ran - failed, ran);
    return failed == 0 ? 0 : 1;
}
