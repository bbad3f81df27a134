#include "rllf/domains.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

namespace rllf {

std::string to_string(StateTag tag) {
    switch (tag) {
        case StateTag::Plain: return "plain";
        case StateTag::Goal: return "goal";
        case StateTag::Trap: return "trap";
        case StateTag::Bottleneck: return "bottleneck";
        case StateTag::Cliff: return "cliff";
        case StateTag::Start: return "start";
    }
    return "plain";
}

std::vector<StateId> DomainSpec::states_tagged(StateTag tag) const {
    std::vector<StateId> out;
    for (std::size_t s = 0; s < tags.size(); ++s)
        if (tags[s] == tag) out.push_back(static_cast<StateId>(s));
    return out;
}

namespace {

struct TableBuilder {
    TabularMdp::Tables t;

    TableBuilder(int S, int A, int horizon) {
        t.num_states = S;
        t.num_actions = A;
        t.transition.assign(static_cast<std::size_t>(S) * A * S, 0.0);
        t.reward.assign(static_cast<std::size_t>(S) * A, 0.0);
        t.initial_dist.assign(S, 0.0);
        t.terminal.assign(S, false);
        t.horizon = horizon;
        t.discount = 1.0;
    }
    void add(int s, int a, int next, double p) {
        t.transition[(static_cast<std::size_t>(s) * t.num_actions + a) * t.num_states + next] += p;
    }
    void reward(int s, int a, double r) { t.reward[static_cast<std::size_t>(s) * t.num_actions + a] = r; }
    void reward_all(int s, double r) {
        for (int a = 0; a < t.num_actions; ++a) reward(s, a, r);
    }
    void make_terminal(int s) {
        t.terminal[s] = true;
        for (int a = 0; a < t.num_actions; ++a) {
            for (int n = 0; n < t.num_states; ++n)
                t.transition[(static_cast<std::size_t>(s) * t.num_actions + a) * t.num_states + n] = 0.0;
            add(s, a, s, 1.0);
        }
    }
};

// Grid helper: `cells[r][c]` is -1 for walls, else the state id.
struct Grid {
    int rows, cols;
    std::vector<std::vector<int>> cells;
    std::vector<std::pair<int, int>> coords;

    Grid(int r, int c, const std::function<bool(int, int)>& is_wall) : rows(r), cols(c) {
        cells.assign(r, std::vector<int>(c, -1));
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j)
                if (!is_wall(i, j)) {
                    cells[i][j] = static_cast<int>(coords.size());
                    coords.emplace_back(i, j);
                }
    }
    int size() const { return static_cast<int>(coords.size()); }
    // Moves by (dr, dc); walls and edges leave the agent in place.
    int move(int s, int dr, int dc) const {
        auto [r, c] = coords[s];
        const int nr = r + dr, nc = c + dc;
        if (nr < 0 || nr >= rows || nc < 0 || nc >= cols || cells[nr][nc] < 0) return s;
        return cells[nr][nc];
    }
    GridLayout layout() const { return {rows, cols, coords}; }
    std::vector<std::string> names() const {
        std::vector<std::string> out;
        for (auto [r, c] : coords) out.push_back("(" + std::to_string(r) + "," + std::to_string(c) + ")");
        return out;
    }
};

// Up, right, down, left.
constexpr int kUrdl[4][2] = {{-1, 0}, {0, 1}, {1, 0}, {0, -1}};

}  // namespace

DomainSpec build_graph(const DomainOptions& opts) {
    constexpr int kCols = 8;
    const std::string& pattern = opts.graph_pattern;
    if (pattern.size() != kCols - 1 || pattern.find_first_not_of("01") != std::string::npos)
        throw std::invalid_argument("graph: pattern must be 7 characters of 0/1");
    auto id = [](int row, int col) { return row * kCols + col; };
    auto good_row = [&](int col) { return pattern[col - 1] - '0'; };

    TableBuilder b(2 * kCols, 2, kCols);
    std::vector<std::pair<int, int>> coords(2 * kCols);
    std::vector<std::string> names(2 * kCols);
    std::vector<StateTag> tags(2 * kCols, StateTag::Plain);
    for (int row = 0; row < 2; ++row) {
        for (int col = 0; col < kCols; ++col) {
            const int s = id(row, col);
            coords[s] = {row, col};
            names[s] = "r" + std::to_string(row) + "c" + std::to_string(col);
            if (col == kCols - 1) {
                b.make_terminal(s);
                if (row == good_row(col)) {
                    b.reward_all(s, 1.0);
                    tags[s] = StateTag::Goal;
                }
                continue;
            }
            // Action 0 keeps the row, action 1 crosses; both advance a column.
            for (int a = 0; a < 2; ++a) {
                const int next_row = a == 0 ? row : 1 - row;
                b.add(s, a, id(next_row, col + 1), 1.0);
                b.reward(s, a, next_row == good_row(col + 1) ? 1.0 : 0.0);
            }
        }
    }
    b.t.initial_dist[id(0, 0)] = 0.5;
    b.t.initial_dist[id(1, 0)] = 0.5;
    tags[id(0, 0)] = StateTag::Start;
    tags[id(1, 0)] = StateTag::Start;

    DomainSpec spec{"Graph", TabularMdp(std::move(b.t)), tags, GridLayout{2, kCols, coords}, names};
    return spec;
}

DomainSpec build_tree(int depth) {
    if (depth < 2) throw std::invalid_argument("tree: depth must be at least 2");
    if (depth > 12) throw std::invalid_argument("tree: depth above 12 is not supported");
    const int S = (1 << depth) - 1;
    const int first_leaf = (1 << (depth - 1)) - 1;
    constexpr double kIntended = 0.85;

    // Per-level reward scale; the last level scale is set so the optimal
    // expected return stays near 17.7 for the default depth.
    std::vector<double> scale(depth);
    for (int l = 0; l < depth; ++l) scale[l] = 2.0 * (l + 1);
    if (depth == 4) scale[3] = 8.75;

    // Preferred child per internal node follows a fixed alternating pattern so
    // that no constant action is optimal.
    auto preferred = [](int node) { return (node * 7 + 3) % 5 < 2 ? 0 : 1; };

    std::vector<int> level(S, 0), deviations(S, 0);
    for (int n = 1; n < S; ++n) {
        const int parent = (n - 1) / 2;
        const int side = (n == 2 * parent + 1) ? 0 : 1;
        level[n] = level[parent] + 1;
        deviations[n] = deviations[parent] + (side == preferred(parent) ? 0 : 1);
    }

    TableBuilder b(S, 2, depth);
    std::vector<StateTag> tags(S, StateTag::Plain);
    std::vector<std::string> names(S);
    int best_leaf = -1;
    for (int n = 0; n < S; ++n) {
        names[n] = "n" + std::to_string(n);
        const double r = scale[level[n]] * std::pow(0.5, deviations[n]);
        b.reward_all(n, r);
        if (n >= first_leaf) {
            b.make_terminal(n);
            if (deviations[n] == 0) best_leaf = n;
            continue;
        }
        for (int a = 0; a < 2; ++a) {
            b.add(n, a, 2 * n + 1 + a, kIntended);
            b.add(n, a, 2 * n + 2 - a, 1.0 - kIntended);
        }
    }
    b.t.initial_dist[0] = 1.0;
    tags[0] = StateTag::Start;
    tags[best_leaf] = StateTag::Goal;

    return DomainSpec{"Tree", TabularMdp(std::move(b.t)), tags, std::nullopt, names};
}

DomainSpec build_two_rooms(bool trap_variant, const DomainOptions& opts) {
    constexpr int kRows = 5, kCols = 11, kWallCol = 5, kDoorRow = 2;
    Grid g(kRows, kCols, [](int r, int c) { return c == kWallCol && r != kDoorRow; });
    const int S = g.size();
    TableBuilder b(S, 4, opts.two_rooms_horizon);
    const int start = g.cells[0][0];
    const int goal = g.cells[kRows - 1][kCols - 1];
    const int door = g.cells[kDoorRow][kWallCol];

    std::vector<StateTag> tags(S, StateTag::Plain);
    tags[start] = StateTag::Start;
    tags[goal] = StateTag::Goal;
    tags[door] = StateTag::Bottleneck;

    std::vector<int> traps;
    if (trap_variant) {
        const int cells[6][2] = {{1, 2}, {3, 3}, {4, 1}, {1, 7}, {3, 8}, {0, 9}};
        for (auto [r, c] : cells) traps.push_back(g.cells[r][c]);
    }

    for (int s = 0; s < S; ++s) {
        if (s == goal) {
            b.make_terminal(s);
            b.reward_all(s, 1.0);
        } else if (std::find(traps.begin(), traps.end(), s) != traps.end()) {
            b.make_terminal(s);
            b.reward_all(s, -100.0);
            tags[s] = StateTag::Trap;
        } else {
            for (int a = 0; a < 4; ++a) b.add(s, a, g.move(s, kUrdl[a][0], kUrdl[a][1]), 1.0);
        }
    }
    b.t.initial_dist[start] = 1.0;

    DomainSpec spec{trap_variant ? "TwoRoomsTrap" : "TwoRooms", TabularMdp(std::move(b.t)), tags, g.layout(),
                    g.names()};
    spec.default_episodes = opts.two_rooms_episodes;
    return spec;
}

DomainSpec build_frozen_lake(int size) {
    static const std::vector<std::string> k4 = {"SFFF", "FHFH", "FFFH", "HFFG"};
    static const std::vector<std::string> k8 = {"SFFFFFFF", "FFFFFFFF", "FFFHFFFF", "FFFFFHFF",
                                                "FFFHFFFF", "FHHFFFHF", "FHFFHFHF", "FFFHFFFG"};
    if (size != 4 && size != 8) throw std::invalid_argument("frozen lake: size must be 4 or 8");
    const auto& map = size == 4 ? k4 : k8;
    Grid g(size, size, [](int, int) { return false; });
    const int S = g.size();
    TableBuilder b(S, 4, 100);
    std::vector<StateTag> tags(S, StateTag::Plain);
    // Left, down, right, up, as in the benchmark.
    constexpr int kLdru[4][2] = {{0, -1}, {1, 0}, {0, 1}, {-1, 0}};
    for (int s = 0; s < S; ++s) {
        auto [r, c] = g.coords[s];
        const char cell = map[r][c];
        if (cell == 'H' || cell == 'G') {
            b.make_terminal(s);
            if (cell == 'G') {
                b.reward_all(s, 1.0);
                tags[s] = StateTag::Goal;
            } else {
                tags[s] = StateTag::Trap;
            }
            continue;
        }
        if (cell == 'S') {
            tags[s] = StateTag::Start;
            b.t.initial_dist[s] = 1.0;
        }
        for (int a = 0; a < 4; ++a)
            for (int k : {a + 3, a, a + 1}) {
                const int d = k % 4;
                b.add(s, a, g.move(s, kLdru[d][0], kLdru[d][1]), 1.0 / 3.0);
            }
    }
    DomainSpec spec{"FrozenLake", TabularMdp(std::move(b.t)), tags, g.layout(), g.names()};
    // The slippery dynamics need a larger sample for the empirical model to
    // recover the optimal policy under full labels.
    spec.default_episodes = 2000;
    return spec;
}

DomainSpec build_cliff_walk() {
    constexpr int kRows = 4, kCols = 12;
    Grid g(kRows, kCols, [](int, int) { return false; });
    const int S = g.size();
    TableBuilder b(S, 4, 100);
    std::vector<StateTag> tags(S, StateTag::Plain);
    const int start = g.cells[kRows - 1][0];
    const int goal = g.cells[kRows - 1][kCols - 1];
    tags[start] = StateTag::Start;
    tags[goal] = StateTag::Goal;
    for (int s = 0; s < S; ++s) {
        auto [r, c] = g.coords[s];
        if (s == goal) {
            b.make_terminal(s);
            continue;
        }
        if (r == kRows - 1 && c > 0 && c < kCols - 1) {
            tags[s] = StateTag::Cliff;
            b.reward_all(s, -100.0);
            for (int a = 0; a < 4; ++a) b.add(s, a, start, 1.0);
            continue;
        }
        b.reward_all(s, -1.0);
        for (int a = 0; a < 4; ++a) b.add(s, a, g.move(s, kUrdl[a][0], kUrdl[a][1]), 1.0);
    }
    b.t.initial_dist[start] = 1.0;
    return DomainSpec{"CliffWalk", TabularMdp(std::move(b.t)), tags, g.layout(), g.names()};
}

std::vector<std::string> domain_names() {
    return {"Graph", "Tree", "TwoRooms", "TwoRoomsTrap", "FrozenLake", "CliffWalk"};
}

std::string canonical_domain_name(const std::string& name) {
    auto lower = [](std::string s) {
        std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
        s.erase(std::remove_if(s.begin(), s.end(), [](char c) { return c == '-' || c == '_'; }), s.end());
        return s;
    };
    const std::string key = lower(name);
    for (const auto& n : domain_names())
        if (lower(n) == key) return n;
    for (const char* big : {"breakout", "freeway", "seaquest", "asterix", "spaceinvaders"})
        if (key == big) throw std::invalid_argument("domain '" + name + "': large-scale domains out of scope");
    std::string valid;
    for (const auto& n : domain_names()) valid += (valid.empty() ? "" : ", ") + n;
    throw std::invalid_argument("unknown domain '" + name + "'; valid names: " + valid);
}

DomainSpec registry_lookup(const std::string& name, const DomainOptions& opts) {
    static const std::map<std::string, std::function<DomainSpec(const DomainOptions&)>> builders = {
        {"Graph", [](const DomainOptions& o) { return build_graph(o); }},
        {"Tree", [](const DomainOptions& o) { return build_tree(o.tree_depth); }},
        {"TwoRooms", [](const DomainOptions& o) { return build_two_rooms(false, o); }},
        {"TwoRoomsTrap", [](const DomainOptions& o) { return build_two_rooms(true, o); }},
        {"FrozenLake", [](const DomainOptions& o) { return build_frozen_lake(o.frozen_lake_size); }},
        {"CliffWalk", [](const DomainOptions&) { return build_cliff_walk(); }},
    };
    return builders.at(canonical_domain_name(name))(opts);
}

std::vector<StateId> nonzero_reward_states(const DomainSpec& domain) {
    const auto& r = detail::ground_truth_reward(domain.mdp);
    const int A = domain.mdp.num_actions();
    std::vector<StateId> out;
    for (int s = 0; s < domain.mdp.num_states(); ++s)
        for (int a = 0; a < A; ++a)
            if (r[static_cast<std::size_t>(s) * A + a] != 0.0) {
                out.push_back(s);
                break;
            }
    return out;
}

TabularPolicy expert_policy(const DomainSpec& domain) {
    return value_iteration(domain.mdp.with_discount(domain.planning_discount)).policy;
}

double optimal_return(const DomainSpec& domain) { return evaluate_policy_exact(domain.mdp, expert_policy(domain)); }

}  // namespace rllf
