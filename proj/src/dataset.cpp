#include "rllf/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "rllf/rng.hpp"

namespace rllf {

namespace {

TransitionCounts build_counts(int S, int A, const std::vector<Sample>& samples) {
    TransitionCounts c;
    c.num_states = S;
    c.num_actions = A;
    const std::size_t SA = static_cast<std::size_t>(S) * A;
    c.sa_count.assign(SA, 0);
    c.state_count.assign(S, 0);
    std::vector<std::vector<int>> next_count(SA);
    for (const auto& x : samples) {
        const std::size_t sa = static_cast<std::size_t>(x.state) * A + x.action;
        ++c.sa_count[sa];
        ++c.state_count[x.state];
        if (next_count[sa].empty()) next_count[sa].assign(S, 0);
        ++next_count[sa][x.next_state];
    }
    c.offset.assign(SA + 1, 0);
    for (std::size_t sa = 0; sa < SA; ++sa) {
        c.offset[sa] = c.entries.size();
        for (int n = 0; n < static_cast<int>(next_count[sa].size()); ++n)
            if (next_count[sa][n] > 0) c.entries.push_back({n, next_count[sa][n]});
    }
    c.offset[SA] = c.entries.size();
    return c;
}

std::string format_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

}  // namespace

OfflineDataset::OfflineDataset(int num_states, int num_actions, std::vector<Sample> samples,
                               std::vector<std::size_t> episode_starts, Meta meta)
    : S_(num_states),
      A_(num_actions),
      samples_(std::move(samples)),
      episode_starts_(std::move(episode_starts)),
      meta_(std::move(meta)) {
    if (S_ <= 0 || A_ <= 0) throw std::invalid_argument("dataset: dimensions must be positive");
    for (const auto& x : samples_)
        if (x.state < 0 || x.state >= S_ || x.next_state < 0 || x.next_state >= S_ || x.action < 0 ||
            x.action >= A_)
            throw std::invalid_argument("dataset: sample out of range");
    if (samples_.empty() != episode_starts_.empty())
        throw std::invalid_argument("dataset: episode starts do not match samples");
    if (!samples_.empty() && episode_starts_.front() != 0)
        throw std::invalid_argument("dataset: first episode must start at sample 0");
    for (std::size_t e = 0; e < episode_starts_.size(); ++e) {
        const std::size_t begin = episode_starts_[e];
        const std::size_t end = e + 1 < episode_starts_.size() ? episode_starts_[e + 1] : samples_.size();
        if (end <= begin || end > samples_.size()) throw std::invalid_argument("dataset: empty or unordered episode");
        for (std::size_t i = begin; i + 1 < end; ++i)
            if (samples_[i].next_state != samples_[i + 1].state)
                throw std::invalid_argument("dataset: broken episode chain at sample " + std::to_string(i));
    }
    counts_ = build_counts(S_, A_, samples_);
    for (int s = 0; s < S_; ++s)
        if (counts_.state_count[s] > 0) pool_.push_back(s);
}

OfflineDataset OfflineDataset::permuted_episodes(const std::vector<std::size_t>& order) const {
    if (order.size() != episode_starts_.size()) throw std::invalid_argument("dataset: bad episode permutation");
    std::vector<Sample> samples;
    std::vector<std::size_t> starts;
    for (std::size_t e : order) {
        const std::size_t begin = episode_starts_.at(e);
        const std::size_t end = e + 1 < episode_starts_.size() ? episode_starts_[e + 1] : samples_.size();
        starts.push_back(samples.size());
        samples.insert(samples.end(), samples_.begin() + begin, samples_.begin() + end);
    }
    return OfflineDataset(S_, A_, std::move(samples), std::move(starts), meta_);
}

bool OfflineDataset::operator==(const OfflineDataset& o) const {
    return S_ == o.S_ && A_ == o.A_ && samples_ == o.samples_ && episode_starts_ == o.episode_starts_ &&
           meta_.domain == o.meta_.domain && meta_.seed == o.meta_.seed &&
           format_double(meta_.epsilon) == format_double(o.meta_.epsilon);
}

LabelSet::LabelSet(int num_states, int budget, std::string strategy)
    : mask_(num_states, false), budget_(budget), strategy_(std::move(strategy)) {
    if (num_states <= 0) throw std::invalid_argument("label set: |S| must be positive");
    if (budget < 0) throw std::invalid_argument("label set: negative budget");
}

LabelSet::LabelSet(int num_states, int budget, std::string strategy, const std::vector<StateId>& states)
    : LabelSet(num_states, budget, std::move(strategy)) {
    for (StateId s : states) add(s);
}

void LabelSet::add(StateId s) {
    if (s < 0 || s >= num_states()) throw std::out_of_range("label set: state id " + std::to_string(s) + " out of range");
    if (mask_[s]) throw std::invalid_argument("label set: duplicate state " + std::to_string(s));
    if (static_cast<int>(states_.size()) >= budget_) throw std::length_error("label set: budget exhausted");
    mask_[s] = true;
    states_.push_back(s);
}

std::vector<StateId> LabelSet::sorted() const {
    std::vector<StateId> out = states_;
    std::sort(out.begin(), out.end());
    return out;
}

std::string LabelSet::digest() const {
    std::string key;
    for (StateId s : sorted()) key += std::to_string(s) + ",";
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(stable_hash(key)));
    return buf;
}

LabeledView::LabeledView(const OfflineDataset& data, const LabelSet& labels, std::vector<bool> terminal,
                         std::vector<double> known)
    : data_(&data), labels_(&labels), terminal_(std::move(terminal)), known_(std::move(known)) {}

std::optional<double> LabeledView::reward(StateId s, ActionId a) const {
    if (!labels_->contains(s)) return std::nullopt;
    return known_[static_cast<std::size_t>(s) * data_->num_actions() + a];
}

std::optional<double> LabeledView::reward(std::size_t i) const {
    const Sample& x = data_->samples().at(i);
    return reward(x.state, x.action);
}

double LabeledView::known_fraction() const {
    if (data_->empty()) return 0.0;
    std::size_t known = 0;
    for (StateId s : labels_->states()) known += data_->counts().state_count[s];
    return static_cast<double>(known) / static_cast<double>(data_->size());
}

LabeledView label(const OfflineDataset& data, const LabelSet& set, const TabularMdp& mdp) {
    if (data.num_states() != mdp.num_states() || data.num_actions() != mdp.num_actions())
        throw std::invalid_argument("label: dataset does not match mdp");
    if (set.num_states() != mdp.num_states()) throw std::out_of_range("label: label set sized for another mdp");
    const auto& r = detail::ground_truth_reward(mdp);
    const int A = mdp.num_actions();
    std::vector<double> known(r.size(), 0.0);
    for (StateId s : set.states())
        for (int a = 0; a < A; ++a) known[static_cast<std::size_t>(s) * A + a] = r[static_cast<std::size_t>(s) * A + a];
    return LabeledView(data, set, mdp.terminal(), std::move(known));
}

TabularPolicy MixturePolicy::as_policy() const {
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("mixture: epsilon must lie in [0,1]");
    const int S = expert.num_states(), A = expert.num_actions();
    std::vector<double> probs(static_cast<std::size_t>(S) * A);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) probs[s * A + a] = epsilon * expert.prob(s, a) + (1.0 - epsilon) / A;
    return TabularPolicy(S, A, std::move(probs));
}

OfflineDataset collect(const TabularMdp& mdp, const MixturePolicy& policy, int num_episodes, std::uint64_t seed,
                       const std::string& domain) {
    if (num_episodes < 1) throw std::invalid_argument("collect: num_episodes must be at least 1");
    const TabularPolicy pi = policy.as_policy();
    std::vector<Sample> samples;
    std::vector<std::size_t> starts;
    for (int e = 0; e < num_episodes; ++e) {
        starts.push_back(samples.size());
        for (const auto& st : rollout(mdp, pi, splitmix64(seed + static_cast<std::uint64_t>(e))))
            samples.push_back({st.state, st.action, st.next_state});
    }
    return OfflineDataset(mdp.num_states(), mdp.num_actions(), std::move(samples), std::move(starts),
                          {domain, policy.epsilon, seed});
}

std::vector<double> empirical_visitation(const OfflineDataset& data) {
    if (data.empty()) throw std::invalid_argument("empirical_visitation: empty dataset");
    std::vector<double> d(data.num_states());
    const double n = static_cast<double>(data.size());
    for (int s = 0; s < data.num_states(); ++s) d[s] = data.counts().state_count[s] / n;
    return d;
}

std::vector<double> empirical_predecessor(const OfflineDataset& data, StateId target) {
    const int S = data.num_states();
    std::vector<double> d(S, 0.0);
    double total = 0.0;
    for (const auto& x : data.samples())
        if (x.next_state == target) {
            d[x.state] += 1.0;
            total += 1.0;
        }
    if (total == 0.0) return std::vector<double>(S, 1.0 / S);
    for (double& p : d) p /= total;
    return d;
}

TabularPolicy empirical_data_policy(const OfflineDataset& data) {
    const int S = data.num_states(), A = data.num_actions();
    const auto& c = data.counts();
    std::vector<double> probs(static_cast<std::size_t>(S) * A, 1.0 / A);
    for (int s = 0; s < S; ++s) {
        if (c.state_count[s] == 0) continue;
        for (int a = 0; a < A; ++a)
            probs[s * A + a] = static_cast<double>(c.sa_count[s * A + a]) / c.state_count[s];
    }
    return TabularPolicy(S, A, std::move(probs));
}

void write_dataset(std::ostream& out, const OfflineDataset& data) {
    out << "rllf-dataset 1\n";
    out << "domain " << (data.meta().domain.empty() ? "-" : data.meta().domain) << "\n";
    out << "states " << data.num_states() << "\n";
    out << "actions " << data.num_actions() << "\n";
    out << "epsilon " << format_double(data.meta().epsilon) << "\n";
    out << "seed " << data.meta().seed << "\n";
    out << "n " << data.size() << "\n";
    std::size_t next_episode = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (next_episode < data.episode_starts().size() && data.episode_starts()[next_episode] == i) {
            out << "episode\n";
            ++next_episode;
        }
        const auto& x = data[i];
        out << x.state << ' ' << x.action << ' ' << x.next_state << '\n';
    }
}

OfflineDataset read_dataset(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    auto fail = [&](const std::string& msg) -> std::runtime_error {
        return std::runtime_error("dataset line " + std::to_string(line_no) + ": " + msg);
    };
    auto next_line = [&]() -> bool {
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (!line.empty()) return true;
        }
        return false;
    };
    auto header = [&](const std::string& key) -> std::string {
        if (!next_line()) throw fail("missing header '" + key + "'");
        std::istringstream ss(line);
        std::string k, v;
        ss >> k >> v;
        if (k != key || v.empty()) throw fail("expected header '" + key + "'");
        return v;
    };
    if (!next_line() || line != "rllf-dataset 1") throw fail("not a dataset file");
    OfflineDataset::Meta meta;
    meta.domain = header("domain");
    if (meta.domain == "-") meta.domain.clear();
    const int S = std::stoi(header("states"));
    const int A = std::stoi(header("actions"));
    const std::string eps = header("epsilon");
    if (std::from_chars(eps.data(), eps.data() + eps.size(), meta.epsilon).ec != std::errc())
        throw fail("bad epsilon");
    meta.seed = std::stoull(header("seed"));
    const std::size_t n = std::stoull(header("n"));

    std::vector<Sample> samples;
    std::vector<std::size_t> starts;
    while (next_line()) {
        if (line == "episode") {
            starts.push_back(samples.size());
            continue;
        }
        std::istringstream ss(line);
        Sample x{};
        std::string extra;
        if (!(ss >> x.state >> x.action >> x.next_state) || (ss >> extra)) throw fail("expected 's a s'' triple");
        if (starts.empty()) throw fail("sample before first episode marker");
        samples.push_back(x);
    }
    if (samples.size() != n) throw fail("sample count does not match header n");
    try {
        return OfflineDataset(S, A, std::move(samples), std::move(starts), meta);
    } catch (const std::invalid_argument& e) {
        throw fail(e.what());
    }
}

void save_dataset(const std::string& path, const OfflineDataset& data) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    write_dataset(out, data);
}

OfflineDataset load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    return read_dataset(in);
}

void write_label_set(std::ostream& out, const LabelSet& set) {
    out << "# strategy " << (set.strategy().empty() ? "-" : set.strategy()) << "\n";
    out << "# budget " << set.budget() << "\n";
    for (StateId s : set.states()) out << s << "\n";
}

LabelSet read_label_set(std::istream& in, int num_states) {
    std::string line, strategy;
    std::vector<StateId> ids;
    int budget = -1;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream ss(line.substr(1));
            std::string key, value;
            ss >> key >> value;
            if (key == "strategy") strategy = value == "-" ? "" : value;
            if (key == "budget") budget = std::stoi(value);
            continue;
        }
        ids.push_back(std::stoi(line));
    }
    if (budget < 0) budget = static_cast<int>(ids.size());
    return LabelSet(num_states, budget, strategy, ids);
}

}  // namespace rllf
