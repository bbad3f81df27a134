#include <doctest.h>

#include <cmath>
#include <set>

#include "rllf/dataset.hpp"
#include "rllf/domains.hpp"

using namespace rllf;

TEST_CASE("domain sizes") {
    CHECK(build_graph().mdp.num_states() == 16);
    CHECK(build_graph().mdp.num_actions() == 2);
    CHECK(build_tree(4).mdp.num_states() == 15);
    CHECK(build_tree(5).mdp.num_states() == 31);
    CHECK(build_two_rooms(false).mdp.num_states() == 51);
    CHECK(build_two_rooms(true).mdp.num_states() == 51);
    CHECK(build_frozen_lake(4).mdp.num_states() == 16);
    CHECK(build_frozen_lake(8).mdp.num_states() == 64);
    CHECK(build_cliff_walk().mdp.num_states() == 48);
    CHECK(build_cliff_walk().mdp.num_actions() == 4);
}

TEST_CASE("domain construction is deterministic") {
    for (const auto& name : domain_names()) {
        CAPTURE(name);
        const auto a = registry_lookup(name), b = registry_lookup(name);
        CHECK(detail::ground_truth_reward(a.mdp) == detail::ground_truth_reward(b.mdp));
        CHECK(a.tags == b.tags);
        CHECK(a.state_names == b.state_names);
        for (int s = 0; s < a.mdp.num_states(); ++s)
            for (int x = 0; x < a.mdp.num_actions(); ++x)
                for (int n = 0; n < a.mdp.num_states(); ++n) CHECK(a.mdp.prob(s, x, n) == b.mdp.prob(s, x, n));
        CHECK(expert_policy(a) == expert_policy(b));
    }
}

TEST_CASE("Graph layout and optimum") {
    const auto g = build_graph();
    CHECK(g.state_names[7] == "r0c7");
    CHECK(g.tags[7] == StateTag::Goal);
    CHECK(g.tags[15] == StateTag::Plain);
    CHECK(g.mdp.is_terminal(7));
    CHECK(g.mdp.is_terminal(15));
    CHECK(optimal_return(g) == doctest::Approx(8.0));
    CHECK_THROWS_AS(build_graph(DomainOptions{.graph_pattern = "10"}), std::invalid_argument);
}

TEST_CASE("Tree rewards and slip") {
    const auto t = build_tree(4);
    CHECK(t.mdp.horizon() == 4);
    CHECK(optimal_return(t) == doctest::Approx(17.758965).epsilon(1e-6));
    for (int s = 0; s < 7; ++s) {
        CHECK(t.mdp.prob(s, 0, 2 * s + 1) == doctest::Approx(0.85));
        CHECK(t.mdp.prob(s, 0, 2 * s + 2) == doctest::Approx(0.15));
    }
    CHECK_THROWS_AS(build_tree(1), std::invalid_argument);
}

TEST_CASE("TwoRooms door is tagged as a bottleneck") {
    const auto d = build_two_rooms(false);
    const auto door = d.states_tagged(StateTag::Bottleneck);
    REQUIRE(door.size() == 1);
    CHECK(d.layout->coords[door[0]] == std::pair<int, int>{2, 5});
    CHECK(optimal_return(d) == doctest::Approx(1.0));
    // The door is the only passage between the rooms.
    for (int s = 0; s < d.mdp.num_states(); ++s) {
        const int c = d.layout->coords[s].second;
        for (int a = 0; a < 4; ++a)
            for (const auto& x : d.mdp.successors(s, a)) {
                const int c2 = d.layout->coords[x.next].second;
                if ((c < 5 && c2 > 5) || (c > 5 && c2 < 5)) FAIL("room crossing that skips the door");
            }
    }
}

TEST_CASE("TwoRoomsTrap has six -100 terminal traps") {
    const auto d = build_two_rooms(true);
    const auto traps = d.states_tagged(StateTag::Trap);
    CHECK(traps.size() == 6);
    const auto& r = detail::ground_truth_reward(d.mdp);
    for (StateId s : traps) {
        CHECK(d.mdp.is_terminal(s));
        for (int a = 0; a < 4; ++a) CHECK(r[static_cast<std::size_t>(s) * 4 + a] == -100.0);
    }
    CHECK(optimal_return(d) == doctest::Approx(1.0));
}

TEST_CASE("FrozenLake slippery dynamics and optimum") {
    const auto d = build_frozen_lake(4);
    const int S = d.mdp.num_states();
    for (int s = 0; s < S; ++s) {
        if (d.mdp.is_terminal(s)) continue;
        for (int a = 0; a < 4; ++a) {
            double total = 0.0;
            for (const auto& x : d.mdp.successors(s, a)) {
                // Each of three directions carries 1/3; bumping into an edge merges them.
                const double thirds = x.prob * 3.0;
                CHECK(std::abs(thirds - std::round(thirds)) < 1e-12);
                total += x.prob;
            }
            CHECK(total == doctest::Approx(1.0));
        }
    }
    CHECK(std::abs(optimal_return(d) - 0.74) <= 0.01);
    CHECK(d.states_tagged(StateTag::Trap).size() == 4);
    CHECK_THROWS_AS(build_frozen_lake(5), std::invalid_argument);
}

TEST_CASE("CliffWalk layout and optimum") {
    const auto d = build_cliff_walk();
    const auto cliff = d.states_tagged(StateTag::Cliff);
    CHECK(cliff.size() == 10);
    const auto& r = detail::ground_truth_reward(d.mdp);
    const StateId start = d.states_tagged(StateTag::Start).at(0);
    for (StateId s : cliff) {
        CHECK(r[static_cast<std::size_t>(s) * 4] == -100.0);
        for (int a = 0; a < 4; ++a) CHECK(d.mdp.prob(s, a, start) == 1.0);
    }
    CHECK(optimal_return(d) == doctest::Approx(-13.0));
}

TEST_CASE("registry") {
    CHECK(canonical_domain_name("tworooms_trap") == "TwoRoomsTrap");
    CHECK(canonical_domain_name("frozen-lake") == "FrozenLake");
    CHECK(registry_lookup("graph").name == "Graph");
    CHECK_THROWS_WITH_AS(registry_lookup("Breakout"), doctest::Contains("large-scale domains out of scope"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(registry_lookup("Nope"), doctest::Contains("valid names: Graph, Tree"),
                         std::invalid_argument);
    CHECK(registry_lookup("Tree", DomainOptions{.tree_depth = 3}).mdp.num_states() == 7);
    CHECK(domain_names().size() == 6);
}

TEST_CASE("nonzero reward states") {
    const auto g = build_graph();
    const auto nz = nonzero_reward_states(g);
    const auto& r = detail::ground_truth_reward(g.mdp);
    std::set<StateId> expected;
    for (int s = 0; s < 16; ++s)
        if (r[2 * s] != 0.0 || r[2 * s + 1] != 0.0) expected.insert(s);
    CHECK(std::set<StateId>(nz.begin(), nz.end()) == expected);
    CHECK(build_cliff_walk().mdp.num_states() - 1 == static_cast<int>(nonzero_reward_states(build_cliff_walk()).size()));
}
