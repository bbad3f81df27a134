#include <doctest.h>

#include <map>
#include <set>

#include "helpers.hpp"
#include "rllf/domains.hpp"
#include "rllf/selection.hpp"

using namespace rllf;

namespace {

struct GraphFixture {
    DomainSpec g = build_graph();
    OfflineDataset data = collect(g.mdp, {expert_policy(g), 0.5}, 200, 42, "Graph");
    RllfHandle handle{data, g.mdp, LearnerConfig{}};
};

double id_sum(const LabelSet& set) {
    double x = 0.0;
    for (StateId s : set.states()) x += s;
    return x;
}

}  // namespace

TEST_CASE("uniform selection is uniform over the pool") {
    const GraphFixture f;
    REQUIRE(f.data.pool().size() == 16);
    const int draws = 100000;
    std::vector<double> observed(16, 0.0), expected(16, draws / 16.0);
    for (int seed = 0; seed < draws; ++seed) observed[select_uniform(f.data, 1, seed).states()[0]] += 1.0;
    CHECK(testing::chi_square(observed, expected) < testing::chi_square_critical(15));
}

TEST_CASE("uniform selection draws distinct pool states") {
    const GraphFixture f;
    for (int seed = 0; seed < 200; ++seed) {
        const auto set = select_uniform(f.data, 9, seed);
        CHECK(set.size() == 9);
        for (StateId s : set.states()) CHECK(f.data.in_pool(s));
    }
    CHECK(select_uniform(f.data, 16, 3).sorted() == f.data.pool());
    CHECK_THROWS_AS(select_uniform(f.data, 17, 3), std::invalid_argument);
}

TEST_CASE("visitation selection is proportional to the visit counts") {
    const GraphFixture f;
    const int draws = 100000;
    std::vector<double> observed(16, 0.0), expected(16, 0.0);
    for (StateId s = 0; s < 16; ++s)
        expected[s] = draws * static_cast<double>(f.data.counts().state_count[s]) / f.data.size();
    for (int seed = 0; seed < draws; ++seed)
        observed[select_visitation(f.data, 1, seed, false).set.states()[0]] += 1.0;
    int dof = -1;
    for (double e : expected) dof += e > 0 ? 1 : 0;
    CHECK(testing::chi_square(observed, expected) < testing::chi_square_critical(dof));
}

TEST_CASE("on-policy strategies call the learner B-1 times") {
    const GraphFixture f;
    for (int B : {1, 4, 9}) {
        CAPTURE(B);
        const auto vis = select_visitation(f.data, B, 7, true, &f.handle);
        CHECK(vis.rllf_calls == B - 1);
        CHECK(vis.set.size() == static_cast<std::size_t>(B));
        StrategyConfig cfg;
        cfg.budget = B;
        cfg.seed = 7;
        const auto guided = select_guided(f.data, cfg, true, f.handle);
        CHECK(guided.rllf_calls == B - 1);
        CHECK(guided.set.size() == static_cast<std::size_t>(B));
    }
    CHECK_THROWS_AS(select_visitation(f.data, 2, 1, true, nullptr), std::invalid_argument);
}

TEST_CASE("guided with alpha fixed at 1 behaves like visitation sampling") {
    const GraphFixture f;
    StrategyConfig cfg;
    cfg.budget = 4;
    cfg.decay = DecayKind::Convex;
    cfg.decay_temperature = 0.0;
    cfg.fixtime = 1.0;
    std::vector<double> a, b;
    for (int i = 0; i < 3000; ++i) {
        cfg.seed = i;
        const auto guided = select_guided(f.data, cfg, false, f.handle);
        CHECK(guided.rllf_calls == 0);
        a.push_back(id_sum(guided.set));
        b.push_back(id_sum(select_visitation(f.data, 4, 100000 + i, false).set));
    }
    CHECK(testing::ks_statistic(a, b) < testing::ks_critical(a.size(), b.size()));
}

TEST_CASE("guided with a full initial sample behaves like uniform selection") {
    const GraphFixture f;
    StrategyConfig cfg;
    cfg.budget = 5;
    cfg.initial_sample_ratio = 1.0;
    std::vector<double> a, b;
    for (int i = 0; i < 3000; ++i) {
        cfg.seed = i;
        const auto guided = select_guided(f.data, cfg, false, f.handle);
        CHECK(guided.rllf_calls == 0);
        a.push_back(id_sum(guided.set));
        b.push_back(id_sum(select_uniform(f.data, 5, 500000 + i)));
    }
    CHECK(testing::ks_statistic(a, b) < testing::ks_critical(a.size(), b.size()));
}

TEST_CASE("guided with alpha fixed at 0 labels the predecessor of the best labeled state") {
    // Chain 0 -> 1 -> ... -> 5 with the reward at the end. With one label s,
    // either s is the goal (best) or every labeled value is 0 and s is best by
    // id; in both cases the next label must be s - 1.
    const auto mdp = testing::chain(6, 10);
    const auto data = collect(mdp, {TabularPolicy::uniform(6, 1), 0.0}, 20, 3);
    const RllfHandle handle(data, mdp, LearnerConfig{});
    StrategyConfig cfg;
    cfg.budget = 2;
    cfg.fixtime = 0.0;
    int checked = 0;
    for (int seed = 0; seed < 200; ++seed) {
        cfg.seed = seed;
        const auto out = select_guided(data, cfg, false, handle);
        const auto& order = out.set.states();
        if (order[0] == 0) continue;
        ++checked;
        CHECK(order[1] == order[0] - 1);
    }
    CHECK(checked > 100);
}

TEST_CASE("combination ranking") {
    const int n = 7, k = 3;
    std::vector<StateId> idx{0, 1, 2};
    std::uint64_t rank = 0;
    std::set<std::vector<StateId>> seen;
    do {
        CHECK(unrank_combination(rank, n, k) == idx);
        seen.insert(idx);
        ++rank;
    } while (next_combination(idx, n));
    CHECK(rank == 35);
    CHECK(seen.size() == 35);
    CHECK(binomial(16, 2, ~0ULL) == 120);
    CHECK(binomial(60, 30, 1000) == 1000);
    CHECK(binomial(5, 7, ~0ULL) == 0);
}

TEST_CASE("brute force finds the best set by exhaustive enumeration") {
    const GraphFixture f;
    StrategyConfig cfg;
    cfg.name = StrategyName::BruteForce;
    cfg.budget = 2;
    Evaluator ev(f.g.mdp);
    const auto out = select_brute_force(f.data, cfg, f.handle, ev);
    CHECK(out.evaluator_calls == 120);
    CHECK(ev.call_count() == 120);

    // Independent enumeration over bit masks; ties keep the lexicographically smallest set.
    double best = -1e300;
    std::vector<StateId> best_set;
    for (unsigned mask = 0; mask < (1u << 16); ++mask) {
        if (__builtin_popcount(mask) != 2) continue;
        std::vector<StateId> ids;
        for (int s = 0; s < 16; ++s)
            if (mask & (1u << s)) ids.push_back(s);
        const double v = evaluate_policy_exact(f.g.mdp, f.handle.policy(LabelSet(16, 2, "x", ids)));
        if (v > best || (v == best && ids < best_set)) best = v, best_set = ids;
    }
    CHECK(out.value.value() == best);
    CHECK(out.set.sorted() == best_set);
}

TEST_CASE("brute force edge cases") {
    const GraphFixture f;
    StrategyConfig cfg;
    cfg.budget = 16;
    Evaluator ev(f.g.mdp);
    const auto full = select_brute_force(f.data, cfg, f.handle, ev);
    CHECK(full.evaluator_calls == 1);
    CHECK(full.value.value() == doctest::Approx(8.0));

    cfg.budget = 8;
    cfg.enumeration_cap = 1000;
    CHECK_THROWS_WITH(select_brute_force(f.data, cfg, f.handle, ev), doctest::Contains("enumeration cap"));

    // Reduced: fewer candidates than labels, the rest is filled greedily.
    cfg.reduced = true;
    cfg.reduced_candidates = {7, 6};
    cfg.budget = 3;
    Evaluator ev2(f.g.mdp);
    const auto reduced = select_brute_force(f.data, cfg, f.handle, ev2);
    CHECK(reduced.set.size() == 3);
    CHECK(reduced.set.contains(7));
    CHECK(reduced.set.contains(6));
    CHECK(reduced.evaluator_calls == 1 + 1 + 14);

    const auto workers_out = [&] {
        StrategyConfig c;
        c.budget = 2;
        c.workers = 3;
        Evaluator e(f.g.mdp);
        return select_brute_force(f.data, c, f.handle, e);
    }();
    StrategyConfig serial;
    serial.budget = 2;
    Evaluator e1(f.g.mdp);
    CHECK(workers_out.set.sorted() == select_brute_force(f.data, serial, f.handle, e1).set.sorted());
}

TEST_CASE("sequential greedy") {
    const GraphFixture f;
    StrategyConfig cfg;
    cfg.budget = 3;
    Evaluator ev(f.g.mdp);
    const auto out = select_sequential_greedy(f.data, cfg, f.handle, ev);
    CHECK(out.evaluator_calls == 48);
    CHECK(out.trace.size() == 3);
    CHECK(out.value.value() == out.trace.back());

    cfg.budget = 1;
    Evaluator e1(f.g.mdp), e2(f.g.mdp);
    const auto greedy = select_sequential_greedy(f.data, cfg, f.handle, e1);
    const auto brute = select_brute_force(f.data, cfg, f.handle, e2);
    CHECK(greedy.set.states() == brute.set.states());
    CHECK(greedy.value == brute.value);
}

TEST_CASE("evolution strategy") {
    const GraphFixture f;
    StrategyConfig cfg;
    cfg.budget = 3;
    cfg.es_iterations = 4;
    cfg.es_population = 6;
    cfg.seed = 5;
    Evaluator ev(f.g.mdp);
    const auto out = select_es(f.data, cfg, f.handle, ev);
    CHECK(out.evaluator_calls == 4 * 6 + 1);
    REQUIRE(out.trace.size() == 4);
    for (std::size_t i = 1; i < out.trace.size(); ++i) CHECK(out.trace[i] >= out.trace[i - 1]);
    CHECK(out.value.value() == out.trace.back());
    CHECK(out.set.size() == 3);

    // One iteration of one unperturbed offspring decodes the initial genome.
    cfg.es_iterations = 1;
    cfg.es_population = 1;
    cfg.es_sigma = 0.0;
    Evaluator e2(f.g.mdp);
    const auto plain = select_es(f.data, cfg, f.handle, e2);
    std::vector<StateId> by_count = f.data.pool();
    std::stable_sort(by_count.begin(), by_count.end(), [&](StateId a, StateId b) {
        return f.data.counts().state_count[a] > f.data.counts().state_count[b];
    });
    by_count.resize(3);
    CHECK(plain.set.states() == by_count);
}

TEST_CASE("genome decoding") {
    const EsGenome g{{0.5, 2.0, 2.0, -1.0, 9.0}};
    CHECK(g.decode(3, {0, 1, 2, 3}) == std::vector<StateId>{1, 2, 0});
    CHECK(g.decode(10, {3, 4}) == std::vector<StateId>{4, 3});
}

TEST_CASE("alpha schedules") {
    for (auto kind : {DecayKind::Linear, DecayKind::Convex, DecayKind::Concave}) {
        const AlphaSchedule sched(kind, 2.0, 1.0, 8, 100);
        CHECK(sched.alpha(0) == 1.0);
        CHECK(sched.alpha(8) == 0.0);
        for (int b = 1; b <= 8; ++b) {
            CHECK(sched.alpha(b) <= sched.alpha(b - 1));
            CHECK(sched.alpha(b) >= 0.0);
        }
    }
    const AlphaSchedule lin(DecayKind::Linear, 2.0, 1.0, 8, 100), cvx(DecayKind::Convex, 2.0, 1.0, 8, 100),
        ccv(DecayKind::Concave, 2.0, 1.0, 8, 100);
    for (int b = 1; b < 8; ++b) {
        CHECK(cvx.alpha(b) < lin.alpha(b));
        CHECK(lin.alpha(b) < ccv.alpha(b));
    }
    CHECK(lin.alpha(4) == 0.5);
    // Past fixtime * pool labels the schedule is pinned to 0.
    const AlphaSchedule fixed(DecayKind::Linear, 2.0, 0.1, 8, 20);
    CHECK(fixed.alpha(1) > 0.0);
    CHECK(fixed.alpha(2) == 0.0);
    CHECK_THROWS_AS(AlphaSchedule(DecayKind::Linear, 2.0, 0.5, 0, 10), std::invalid_argument);
}

TEST_CASE("budget from fraction") {
    bool clamped = false;
    CHECK(budget_from_fraction(0.1, 16, &clamped) == 2);
    CHECK_FALSE(clamped);
    CHECK(budget_from_fraction(0.5, 15) == 8);
    CHECK(budget_from_fraction(1.0, 51) == 51);
    CHECK(budget_from_fraction(0.01, 16, &clamped) == 1);
    CHECK(clamped);
    CHECK_THROWS_AS(budget_from_fraction(0.0, 16), std::invalid_argument);
    CHECK_THROWS_AS(budget_from_fraction(1.2, 16), std::invalid_argument);
}

TEST_CASE("strategy names and dispatch") {
    for (auto name : all_strategies()) CHECK(parse_strategy(to_string(name)) == name);
    CHECK(all_strategies().size() == 8);
    CHECK(is_training_phase(StrategyName::Es));
    CHECK_FALSE(is_training_phase(StrategyName::Guided));
    CHECK_THROWS_WITH(parse_strategy("magic"), doctest::Contains("valid names"));
    const GraphFixture f;
    StrategyConfig cfg;
    cfg.name = StrategyName::SequentialGreedy;
    cfg.budget = 2;
    CHECK_THROWS_WITH(select(f.data, cfg, f.handle, nullptr), doctest::Contains("needs an evaluator"));
    cfg.name = StrategyName::Uniform;
    CHECK(select(f.data, cfg, f.handle, nullptr).set.size() == 2);
    cfg.fixtime = 2.0;
    CHECK_THROWS_AS(cfg.validate(16), std::invalid_argument);
}

TEST_CASE("selection is reproducible for a fixed seed") {
    const GraphFixture f;
    for (auto name : all_strategies()) {
        CAPTURE(to_string(name));
        StrategyConfig cfg;
        cfg.name = name;
        cfg.budget = 2;
        cfg.seed = 77;
        cfg.es_iterations = 2;
        cfg.es_population = 4;
        Evaluator e1(f.g.mdp), e2(f.g.mdp);
        CHECK(select(f.data, cfg, f.handle, &e1).set.states() == select(f.data, cfg, f.handle, &e2).set.states());
    }
}
