#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rllf/mdp.hpp"

namespace rllf {

enum class StateTag { Plain, Goal, Trap, Bottleneck, Cliff, Start };

std::string to_string(StateTag tag);

struct GridLayout {
    int rows = 0;
    int cols = 0;
    std::vector<std::pair<int, int>> coords;  // (row, col) per state
};

struct DomainSpec {
    std::string name;
    TabularMdp mdp;
    std::vector<StateTag> tags;
    std::optional<GridLayout> layout;
    std::vector<std::string> state_names;
    // Discount used for expert planning and as the learners' default.
    double planning_discount = 0.99;
    int default_episodes = 200;

    std::vector<StateId> states_tagged(StateTag tag) const;
};

struct DomainOptions {
    int tree_depth = 4;
    int frozen_lake_size = 4;
    int two_rooms_horizon = 15;
    int two_rooms_episodes = 1000;
    // Good row per column 1..7 for the Graph rewards.
    std::string graph_pattern = "1101110";
};

DomainSpec build_graph(const DomainOptions& opts = {});
DomainSpec build_tree(int depth);
DomainSpec build_two_rooms(bool trap_variant, const DomainOptions& opts = {});
DomainSpec build_frozen_lake(int size = 4);
DomainSpec build_cliff_walk();

// Case-insensitive lookup over the six tabular domains.
DomainSpec registry_lookup(const std::string& name, const DomainOptions& opts = {});
std::vector<std::string> domain_names();
std::string canonical_domain_name(const std::string& name);

// States whose reward row has a nonzero entry; the candidate pool of the
// reduced brute-force variant. Lives here so selection never reads rewards.
std::vector<StateId> nonzero_reward_states(const DomainSpec& domain);

// Optimal return of the domain under its planning discount, evaluated with
// the domain's own evaluation discount and horizon.
double optimal_return(const DomainSpec& domain);
TabularPolicy expert_policy(const DomainSpec& domain);

}  // namespace rllf
