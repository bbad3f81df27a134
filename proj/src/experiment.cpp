#include "rllf/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "rllf/evaluator.hpp"
#include "rllf/parallel.hpp"
#include "rllf/rng.hpp"
#include "rllf/text.hpp"

namespace rllf {

namespace fs = std::filesystem;

// ---- CSV ----

const std::vector<std::string>& csv_columns() {
    static const std::vector<std::string> cols = {
        "domain", "strategy", "learner", "percentage_feedback", "budget_B", "seed",
        "return", "stderr_if_aggregated", "optimality_gap", "evaluator_calls", "wall_ms", "label_set_digest"};
    return cols;
}

std::string csv_header() {
    std::string out;
    for (const auto& c : csv_columns()) out += (out.empty() ? "" : ",") + c;
    return out;
}

namespace {

std::string opt_field(const std::optional<double>& x) { return x ? text::format_double(*x) : "NA"; }

std::optional<double> parse_opt(const std::string& s, const std::string& what) {
    if (s == "NA" || s.empty()) return std::nullopt;
    return text::parse_double(s, what);
}

}  // namespace

std::string to_csv_line(const ResultRow& r) {
    std::ostringstream out;
    out << r.domain << ',' << r.strategy << ',' << r.learner << ',' << text::format_fixed(r.percentage_feedback, 6)
        << ',' << r.budget << ',' << r.seed << ',' << text::format_double(r.ret) << ',' << opt_field(r.standard_error)
        << ',' << opt_field(r.optimality_gap) << ',' << r.evaluator_calls << ',' << r.wall_ms << ',' << r.digest;
    return out.str();
}

std::vector<ResultRow> read_results_csv(std::istream& in, const std::string& source) {
    std::vector<ResultRow> rows;
    std::string line;
    int lineno = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (text::trim(line).empty()) continue;
        auto fail = [&](const std::string& msg) {
            throw std::invalid_argument(source + ":" + std::to_string(lineno) + ": " + msg);
        };
        if (!header_seen) {
            if (line != csv_header()) fail("unexpected header (expected " + csv_header() + ")");
            header_seen = true;
            continue;
        }
        const auto f = text::split(line, ',');
        if (f.size() != csv_columns().size())
            fail("expected " + std::to_string(csv_columns().size()) + " fields, got " + std::to_string(f.size()));
        try {
            ResultRow r;
            r.domain = f[0];
            r.strategy = f[1];
            r.learner = f[2];
            r.percentage_feedback = text::parse_double(f[3], "percentage_feedback");
            r.budget = static_cast<int>(text::parse_int(f[4], "budget_B"));
            r.seed = static_cast<int>(text::parse_int(f[5], "seed"));
            r.ret = text::parse_double(f[6], "return");
            r.standard_error = parse_opt(f[7], "stderr_if_aggregated");
            r.optimality_gap = parse_opt(f[8], "optimality_gap");
            const long long calls = text::parse_int(f[9], "evaluator_calls");
            if (calls < 0) throw std::invalid_argument("evaluator_calls: negative");
            r.evaluator_calls = static_cast<std::uint64_t>(calls);
            r.wall_ms = text::parse_int(f[10], "wall_ms");
            r.digest = f[11];
            if (r.domain.empty() || r.strategy.empty()) throw std::invalid_argument("empty domain or strategy");
            rows.push_back(std::move(r));
        } catch (const std::invalid_argument& e) {
            fail(e.what());
        }
    }
    return rows;
}

std::vector<ResultRow> load_results_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return read_results_csv(in, path);
}

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
    out << csv_header() << '\n';
    for (const auto& r : rows) out << to_csv_line(r) << '\n';
}

void sort_rows(std::vector<ResultRow>& rows) {
    std::sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
        return std::tie(a.domain, a.strategy, a.learner, a.budget, a.seed) <
               std::tie(b.domain, b.strategy, b.learner, b.budget, b.seed);
    });
}

// ---- grid ----

const RllfHandle& DomainContext::handle_for(const OfflineDataset& data) const {
    if (&data == &train) return *train_handle;
    for (std::size_t k = 0; k < tests.size(); ++k)
        if (&data == &tests[k]) return *test_handles[k];
    throw std::logic_error("handle_for: dataset does not belong to this context");
}

std::unique_ptr<DomainContext> prepare_domain(const ExperimentConfig& cfg, const std::string& domain) {
    DomainSpec spec = registry_lookup(domain, cfg.domain);
    const std::string name = spec.name;
    const int episodes = cfg.episodes > 0 ? cfg.episodes : spec.default_episodes;
    TabularPolicy expert = expert_policy(spec);
    OfflineDataset train = collect(spec.mdp, MixturePolicy{expert, cfg.train_epsilon}, episodes,
                                   derive_seed(name, std::string("train")), name);
    std::vector<OfflineDataset> tests;
    for (std::size_t k = 0; k < cfg.test_epsilons.size(); ++k)
        tests.push_back(collect(spec.mdp, MixturePolicy{expert, cfg.test_epsilons[k]}, episodes,
                                derive_seed(name, std::string("test"), std::to_string(k)), name));
    auto ctx = std::unique_ptr<DomainContext>(
        new DomainContext{std::move(spec), std::move(expert), std::move(train), std::move(tests), nullptr, {}});
    auto pi_d = [&](double epsilon) -> std::optional<TabularPolicy> {
        if (cfg.data_policy == DataPolicySource::Empirical) return std::nullopt;
        return MixturePolicy{ctx->expert, epsilon}.as_policy();
    };
    ctx->train_handle = std::make_unique<RllfHandle>(ctx->train, ctx->spec.mdp, cfg.learner, pi_d(cfg.train_epsilon));
    for (std::size_t k = 0; k < ctx->tests.size(); ++k)
        ctx->test_handles.push_back(
            std::make_unique<RllfHandle>(ctx->tests[k], ctx->spec.mdp, cfg.learner, pi_d(cfg.test_epsilons[k])));
    return ctx;
}

std::uint64_t cell_seed(const std::string& domain, const std::string& strategy, double budget, int replicate) {
    return derive_seed(domain, strategy, text::format_double(budget), std::to_string(replicate));
}

namespace {

// Configures brute force for `budget`; false when no variant fits the cap.
bool configure_brute(StrategyConfig& sc, const DomainContext& ctx, int budget) {
    const auto n = ctx.train.pool().size();
    sc.name = StrategyName::BruteForce;
    sc.budget = budget;
    sc.reduced = false;
    if (binomial(n, budget, sc.enumeration_cap + 1) <= sc.enumeration_cap) return true;
    std::vector<StateId> cands;
    for (StateId s : nonzero_reward_states(ctx.spec))
        if (ctx.train.in_pool(s)) cands.push_back(s);
    const auto k = std::min<std::size_t>(budget, cands.size());
    if (binomial(cands.size(), k, sc.enumeration_cap + 1) > sc.enumeration_cap) return false;
    sc.reduced = true;
    sc.reduced_candidates = std::move(cands);
    return true;
}

double measure(const ExperimentConfig& cfg, const TabularMdp& mdp, const TabularPolicy& pi, std::uint64_t seed) {
    if (cfg.evaluator == EvalMode::Exact) return evaluate_policy_exact(mdp, pi);
    return monte_carlo_return(mdp, pi, cfg.mc_episodes, seed).first;
}

std::uint64_t measure_seed(const std::string& domain) { return derive_seed(domain, std::string("measure")); }

// Return of a set under the configured phase: on the training data, or frozen
// and averaged over the test datasets.
double phase_return(const ExperimentConfig& cfg, const DomainContext& ctx, const LabelSet& set) {
    const auto seed = measure_seed(ctx.spec.name);
    if (cfg.phase == Phase::Train) return measure(cfg, ctx.spec.mdp, ctx.train_handle->policy(set), seed);
    std::vector<double> xs;
    for (const auto& h : ctx.test_handles) xs.push_back(measure(cfg, ctx.spec.mdp, h->policy(set), seed));
    return mean_and_stderr(xs).first;
}

struct Cell {
    const DomainContext* ctx;
    std::string strategy;
    double fraction;
    int budget;
    int replicate;
    std::optional<double> baseline;
};

ResultRow run_cell(const ExperimentConfig& cfg, const Cell& cell, int inner_workers) {
    const auto& ctx = *cell.ctx;
    const auto t0 = std::chrono::steady_clock::now();
    StrategyConfig sc = cfg.strategy;
    sc.name = parse_strategy(cell.strategy);
    sc.budget = cell.budget;
    sc.seed = cell_seed(ctx.spec.name, cell.strategy, cell.fraction, cell.replicate);
    sc.workers = inner_workers;
    if (sc.name == StrategyName::BruteForce && !configure_brute(sc, ctx, cell.budget))
        throw std::logic_error("brute force infeasible");
    const bool training = is_training_phase(sc.name);

    ResultRow row;
    row.domain = ctx.spec.name;
    row.strategy = cell.strategy;
    row.learner = to_string(cfg.learner.learner);
    row.percentage_feedback = percentage_feedback(cell.budget, ctx.train.pool().size());
    row.budget = cell.budget;
    row.seed = cell.replicate;

    if (cfg.phase == Phase::Train) {
        Evaluator ev(ctx.spec.mdp, cfg.evaluator, cfg.mc_episodes, sc.seed);
        const auto res = select(ctx.train, sc, *ctx.train_handle, training ? &ev : nullptr);
        row.ret = measure(cfg, ctx.spec.mdp, ctx.train_handle->policy(res.set), measure_seed(ctx.spec.name));
        row.evaluator_calls = ev.call_count();
        row.digest = res.set.digest();
    } else {
        std::vector<std::string> digests;
        std::mutex m;
        StrategyFn fn = [&](const OfflineDataset& data, Evaluator* ev) {
            auto set = select(data, sc, ctx.handle_for(data), ev).set;
            std::lock_guard lock(m);
            digests.push_back(set.digest());
            return set;
        };
        std::vector<TabularPolicy> pi_d;
        for (const auto& h : ctx.test_handles) pi_d.push_back(h->data_policy());
        const auto report = test_suite_performance(fn, training, ctx.train, ctx.tests, cell.budget, ctx.spec.mdp,
                                                   cfg.learner, pi_d, cfg.evaluator);
        row.ret = report.mean_return;
        row.standard_error = report.standard_error;
        row.evaluator_calls = report.evaluator_calls;
        if (digests.size() == 1) {
            row.digest = digests.front();
        } else {
            std::string joined;
            for (const auto& d : digests) joined += d;
            char buf[17];
            std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(stable_hash(joined)));
            row.digest = buf;
        }
    }
    if (cell.baseline) row.optimality_gap = *cell.baseline - row.ret;
    if (cfg.timing)
        row.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
    return row;
}

using RowKey = std::tuple<std::string, std::string, std::string, int, int>;

RowKey key_of(const ResultRow& r) { return {r.domain, r.strategy, r.learner, r.budget, r.seed}; }

}  // namespace

std::optional<SelectionResult> optimal_baseline(const DomainContext& ctx, const ExperimentConfig& cfg, int budget) {
    StrategyConfig sc = cfg.strategy;
    sc.workers = cfg.workers;
    if (!configure_brute(sc, ctx, budget)) return std::nullopt;
    Evaluator ev(ctx.spec.mdp, cfg.evaluator, cfg.mc_episodes, measure_seed(ctx.spec.name));
    return select_brute_force(ctx.train, sc, *ctx.train_handle, ev);
}

std::string results_path(const ExperimentConfig& cfg) {
    const std::string dir = cfg.output_dir.empty() ? default_output_dir() : cfg.output_dir;
    return (fs::path(dir) / "results.csv").string();
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const std::string path = results_path(cfg);
    fs::create_directories(fs::path(path).parent_path());

    std::vector<ResultRow> existing;
    if (fs::exists(path) && fs::file_size(path) > 0) existing = load_results_csv(path);
    std::set<RowKey> done;
    for (const auto& r : existing) done.insert(key_of(r));

    std::vector<std::unique_ptr<DomainContext>> contexts;
    std::vector<Cell> pending;
    std::set<RowKey> grid;
    const std::string learner = to_string(cfg.learner.learner);
    for (const auto& domain : cfg.domains) {
        contexts.push_back(prepare_domain(cfg, domain));
        const auto& ctx = *contexts.back();
        const auto pool = ctx.train.pool().size();
        std::map<int, std::optional<double>> baselines;
        for (double f : cfg.budgets) {
            bool clamped = false;
            const int B = budget_from_fraction(f, pool, &clamped);
            if (clamped)
                std::cerr << "warning: " << ctx.spec.name << " budget " << f << " rounds to 0 labels; using B = 1\n";
            for (const auto& strategy : cfg.strategies) {
                if (parse_strategy(strategy) == StrategyName::BruteForce) {
                    StrategyConfig probe = cfg.strategy;
                    if (!configure_brute(probe, ctx, B))
                        throw std::invalid_argument("brute_force on " + ctx.spec.name + " at budget " +
                                                    text::format_double(f) +
                                                    " exceeds the enumeration cap even in its reduced form");
                }
                for (int rep = 0; rep < cfg.seeds; ++rep) {
                    const RowKey key{ctx.spec.name, strategy, learner, B, rep};
                    grid.insert(key);
                    if (done.count(key)) continue;
                    if (cfg.baseline && !baselines.count(B)) {
                        auto base = optimal_baseline(ctx, cfg, B);
                        baselines[B] = base ? std::optional<double>(phase_return(cfg, ctx, base->set)) : std::nullopt;
                    }
                    pending.push_back({&ctx, strategy, f, B, rep, cfg.baseline ? baselines[B] : std::nullopt});
                }
            }
        }
    }

    {
        std::ofstream sink(path, std::ios::app);
        if (!sink) throw std::runtime_error("cannot write " + path);
        if (existing.empty() && (!fs::exists(path) || fs::file_size(path) == 0)) sink << csv_header() << '\n' << std::flush;
        std::mutex sink_mutex;
        std::atomic<std::size_t> next{0};
        const int outer = std::min<int>(cfg.workers, static_cast<int>(std::max<std::size_t>(pending.size(), 1)));
        const int inner = outer > 1 ? 1 : cfg.workers;
        parallel_chunks(static_cast<std::size_t>(outer), outer, [&](std::size_t, std::size_t, std::size_t) {
            for (std::size_t i = next++; i < pending.size(); i = next++) {
                const ResultRow row = run_cell(cfg, pending[i], inner);
                std::lock_guard lock(sink_mutex);
                sink << to_csv_line(row) << '\n' << std::flush;
                if (cfg.verbose)
                    std::cerr << "[" << (i + 1) << "/" << pending.size() << "] " << row.domain << ' ' << row.strategy
                              << " B=" << row.budget << " seed=" << row.seed << " return=" << row.ret << '\n';
            }
        });
    }

    std::vector<ResultRow> all = load_results_csv(path);
    // Later duplicates of a key (if any) lose to the first occurrence.
    std::set<RowKey> seen;
    std::vector<ResultRow> unique;
    for (auto& r : all)
        if (seen.insert(key_of(r)).second) unique.push_back(std::move(r));
    sort_rows(unique);
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        write_results_csv(out, unique);
        if (!out) throw std::runtime_error("cannot write " + tmp);
    }
    fs::rename(tmp, path);

    std::vector<ResultRow> result;
    for (const auto& r : unique)
        if (grid.count(key_of(r))) result.push_back(r);
    return result;
}

// ---- combination sweep ----

SweepResult sweep_combinations(const OfflineDataset& data, const RllfHandle& handle, int budget, std::uint64_t cap,
                               int workers, EvalMode mode) {
    const auto& pool = data.pool();
    const int n = static_cast<int>(pool.size());
    if (budget < 1 || budget > n) throw std::invalid_argument("sweep_combinations: budget must lie in [1, pool]");
    const std::uint64_t total = binomial(n, budget, cap + 1);
    if (total > cap)
        throw std::invalid_argument("sweep_combinations: C(" + std::to_string(n) + "," + std::to_string(budget) +
                                    ") exceeds the enumeration cap");
    Evaluator ev(handle.mdp(), mode);
    SweepResult out;
    out.budget = budget;
    out.returns.assign(total, 0.0);
    parallel_chunks(total, workers, [&](std::size_t begin, std::size_t end, std::size_t) {
        std::vector<StateId> idx = unrank_combination(begin, n, budget);
        for (std::size_t rank = begin; rank < end; ++rank) {
            LabelSet set(data.num_states(), budget, "sweep");
            for (StateId i : idx) set.add(pool[i]);
            out.returns[rank] = ev.evaluate(handle.policy(set));
            next_combination(idx, n);
        }
    });
    const auto best = std::max_element(out.returns.begin(), out.returns.end());
    out.best = *best;
    for (StateId i : unrank_combination(static_cast<std::uint64_t>(best - out.returns.begin()), n, budget))
        out.best_set.push_back(pool[i]);
    out.evaluator_calls = ev.call_count();
    return out;
}

std::vector<HistogramBin> histogram(const std::vector<double>& values, int bins) {
    if (bins < 1) throw std::invalid_argument("histogram: bins must be positive");
    if (values.empty()) return {};
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double lo = *lo_it, hi = *hi_it;
    if (lo == hi) return {{lo, hi, values.size()}};
    const double width = (hi - lo) / bins;
    std::vector<HistogramBin> out(bins);
    for (int b = 0; b < bins; ++b) out[b] = {lo + b * width, b + 1 == bins ? hi : lo + (b + 1) * width, 0};
    for (double v : values) {
        const int b = std::min(bins - 1, static_cast<int>((v - lo) / width));
        ++out[b].count;
    }
    return out;
}

// ---- pattern report ----

std::vector<StateId> optimal_trajectory_states(const DomainSpec& domain) {
    const auto d = state_visitation(domain.mdp, expert_policy(domain));
    std::vector<StateId> out;
    for (StateId s = 0; s < static_cast<StateId>(d.size()); ++s)
        if (d[s] > 0.0) out.push_back(s);
    return out;
}

PatternReport pattern_report(const DomainSpec& domain, const std::vector<LabelSet>& sets, std::size_t pool_size) {
    const auto& mdp = domain.mdp;
    const int S = mdp.num_states(), A = mdp.num_actions();
    PatternReport report;
    report.domain = domain.name;
    report.optimal_path = optimal_trajectory_states(domain);

    std::vector<bool> on(S, false), near(S, false);
    for (StateId s : report.optimal_path) on[s] = near[s] = true;
    for (StateId s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a)
            for (const auto& succ : mdp.successors(s, a)) {
                if (on[s]) near[succ.next] = true;
                if (on[succ.next]) near[s] = true;
            }

    constexpr int kTags = 6;
    for (const auto& set : sets) {
        if (report.strategy.empty()) report.strategy = set.strategy();
        PatternEntry e;
        e.budget = set.budget();
        e.percentage_feedback = pool_size ? static_cast<double>(set.budget()) / static_cast<double>(pool_size) : 0.0;
        e.order = set.states();
        e.tag_fraction.assign(kTags, 0.0);
        const double n = static_cast<double>(e.order.size());
        for (StateId s : e.order) {
            if (on[s]) e.on_path += 1.0;
            if (near[s]) e.near_path += 1.0;
            const StateTag tag = domain.tags[s];
            if (tag == StateTag::Trap || tag == StateTag::Cliff) e.penalty += 1.0;
            e.tag_fraction[static_cast<int>(tag)] += 1.0;
        }
        if (n > 0) {
            e.on_path /= n;
            e.near_path /= n;
            e.penalty /= n;
            for (double& f : e.tag_fraction) f /= n;
        }
        report.entries.push_back(std::move(e));
    }
    return report;
}

namespace {

const std::vector<StateTag>& tag_order() {
    static const std::vector<StateTag> tags = {StateTag::Plain,      StateTag::Goal,  StateTag::Trap,
                                               StateTag::Bottleneck, StateTag::Cliff, StateTag::Start};
    return tags;
}

std::string state_label(const DomainSpec& domain, StateId s) {
    if (s >= 0 && s < static_cast<StateId>(domain.state_names.size()) && !domain.state_names[s].empty())
        return domain.state_names[s];
    return std::to_string(s);
}

}  // namespace

void write_pattern_text(std::ostream& out, const PatternReport& report, const DomainSpec& domain) {
    out << "pattern report: " << report.domain << " (" << report.strategy << ")\n";
    out << "optimal path states:";
    for (StateId s : report.optimal_path) out << ' ' << state_label(domain, s);
    out << '\n';
    for (const auto& e : report.entries) {
        out << "budget " << e.budget << " (feedback " << text::format_fixed(e.percentage_feedback, 3)
            << "): on_path " << text::format_fixed(e.on_path, 3) << ", near_path "
            << text::format_fixed(e.near_path, 3) << ", penalty " << text::format_fixed(e.penalty, 3) << '\n';
        out << "  order:";
        for (std::size_t i = 0; i < e.order.size(); ++i)
            out << ' ' << (i + 1) << ':' << state_label(domain, e.order[i]) << '[' << to_string(domain.tags[e.order[i]])
                << ']';
        out << '\n';
    }
}

void write_pattern_csv(std::ostream& out, const PatternReport& report, const DomainSpec&) {
    out << "domain,strategy,percentage_feedback,budget_B,on_path,near_path,penalty";
    for (StateTag t : tag_order()) out << ',' << to_string(t);
    out << ",selection_order\n";
    for (const auto& e : report.entries) {
        out << report.domain << ',' << report.strategy << ',' << text::format_fixed(e.percentage_feedback, 6) << ','
            << e.budget << ',' << text::format_double(e.on_path) << ',' << text::format_double(e.near_path) << ','
            << text::format_double(e.penalty);
        for (StateTag t : tag_order()) out << ',' << text::format_double(e.tag_fraction[static_cast<int>(t)]);
        out << ',';
        for (std::size_t i = 0; i < e.order.size(); ++i) out << (i ? ";" : "") << e.order[i];
        out << '\n';
    }
}

}  // namespace rllf
