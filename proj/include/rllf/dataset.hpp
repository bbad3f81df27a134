#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rllf/mdp.hpp"

namespace rllf {

struct Sample {
    StateId state;
    ActionId action;
    StateId next_state;
    bool operator==(const Sample&) const = default;
};

// Per (s,a) successor counts, built once per dataset.
struct TransitionCounts {
    struct Entry {
        StateId next;
        int count;
    };
    int num_states = 0;
    int num_actions = 0;
    std::vector<int> sa_count;             // |S|*|A|
    std::vector<std::size_t> offset;       // |S|*|A|+1 into entries
    std::vector<Entry> entries;            // sorted by next state within each (s,a)
    std::vector<int> state_count;          // N(s) over S_t

    std::span<const Entry> successors(StateId s, ActionId a) const {
        const std::size_t sa = static_cast<std::size_t>(s) * num_actions + a;
        return {entries.data() + offset[sa], offset[sa + 1] - offset[sa]};
    }
};

class OfflineDataset {
public:
    struct Meta {
        std::string domain;
        double epsilon = 0.0;
        std::uint64_t seed = 0;
    };

    OfflineDataset(int num_states, int num_actions, std::vector<Sample> samples,
                   std::vector<std::size_t> episode_starts, Meta meta);

    int num_states() const { return S_; }
    int num_actions() const { return A_; }
    std::size_t size() const { return samples_.size(); }
    bool empty() const { return samples_.empty(); }
    const std::vector<Sample>& samples() const { return samples_; }
    const Sample& operator[](std::size_t i) const { return samples_[i]; }
    const std::vector<std::size_t>& episode_starts() const { return episode_starts_; }
    std::size_t num_episodes() const { return episode_starts_.size(); }
    const Meta& meta() const { return meta_; }
    const TransitionCounts& counts() const { return counts_; }

    // Distinct states present as S_t, ascending.
    const std::vector<StateId>& pool() const { return pool_; }
    bool in_pool(StateId s) const { return s >= 0 && s < S_ && counts_.state_count[s] > 0; }

    // Same samples with episodes reordered by `order`.
    OfflineDataset permuted_episodes(const std::vector<std::size_t>& order) const;

    bool operator==(const OfflineDataset& other) const;

private:
    int S_;
    int A_;
    std::vector<Sample> samples_;
    std::vector<std::size_t> episode_starts_;
    Meta meta_;
    TransitionCounts counts_;
    std::vector<StateId> pool_;
};

class LabelSet {
public:
    LabelSet() = default;
    LabelSet(int num_states, int budget, std::string strategy);
    LabelSet(int num_states, int budget, std::string strategy, const std::vector<StateId>& states);

    void add(StateId s);
    bool contains(StateId s) const { return s >= 0 && s < static_cast<int>(mask_.size()) && mask_[s]; }
    const std::vector<StateId>& states() const { return states_; }
    std::size_t size() const { return states_.size(); }
    int budget() const { return budget_; }
    int num_states() const { return static_cast<int>(mask_.size()); }
    const std::string& strategy() const { return strategy_; }
    void set_strategy(std::string name) { strategy_ = std::move(name); }
    const std::vector<bool>& mask() const { return mask_; }

    // Order-insensitive digest of the member ids, hex encoded.
    std::string digest() const;
    std::vector<StateId> sorted() const;

private:
    std::vector<StateId> states_;
    std::vector<bool> mask_;
    int budget_ = 0;
    std::string strategy_;
};

// Read-only overlay exposing rewards only for samples whose S_t is labeled.
class LabeledView {
public:
    const OfflineDataset& data() const { return *data_; }
    const LabelSet& labels() const { return *labels_; }
    const std::vector<bool>& terminal() const { return terminal_; }

    bool is_labeled(StateId s) const { return labels_->contains(s); }
    std::optional<double> reward(std::size_t sample_index) const;
    std::optional<double> reward(StateId s, ActionId a) const;
    double known_fraction() const;

private:
    friend LabeledView label(const OfflineDataset&, const LabelSet&, const TabularMdp&);
    LabeledView(const OfflineDataset& data, const LabelSet& labels, std::vector<bool> terminal,
                std::vector<double> known);

    const OfflineDataset* data_;
    const LabelSet* labels_;
    std::vector<bool> terminal_;
    std::vector<double> known_;  // r(s,a) for labeled s, 0 elsewhere
};

struct MixturePolicy {
    TabularPolicy expert;
    double epsilon = 0.5;

    // epsilon * expert + (1 - epsilon) * uniform.
    TabularPolicy as_policy() const;
};

OfflineDataset collect(const TabularMdp& mdp, const MixturePolicy& policy, int num_episodes, std::uint64_t seed,
                       const std::string& domain = "");

std::vector<double> empirical_visitation(const OfflineDataset& data);
std::vector<double> empirical_predecessor(const OfflineDataset& data, StateId target);
// Per-state action frequencies; uniform where a state never occurs.
TabularPolicy empirical_data_policy(const OfflineDataset& data);

// The dataset and label set must outlive the view.
LabeledView label(const OfflineDataset& data, const LabelSet& set, const TabularMdp& mdp);

void write_dataset(std::ostream& out, const OfflineDataset& data);
OfflineDataset read_dataset(std::istream& in);
void save_dataset(const std::string& path, const OfflineDataset& data);
OfflineDataset load_dataset(const std::string& path);

void write_label_set(std::ostream& out, const LabelSet& set);
LabelSet read_label_set(std::istream& in, int num_states);

}  // namespace rllf
