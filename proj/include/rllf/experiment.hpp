#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rllf/config.hpp"
#include "rllf/dataset.hpp"
#include "rllf/domains.hpp"
#include "rllf/learners.hpp"
#include "rllf/selection.hpp"

namespace rllf {

struct ResultRow {
    std::string domain;
    std::string strategy;
    std::string learner;
    double percentage_feedback = 0.0;
    int budget = 0;
    int seed = 0;  // replicate index; the cell's RNG seed is derived from it
    double ret = 0.0;
    std::optional<double> standard_error;
    std::optional<double> optimality_gap;
    std::uint64_t evaluator_calls = 0;
    long long wall_ms = 0;
    std::string digest;

    bool operator==(const ResultRow&) const = default;
};

const std::vector<std::string>& csv_columns();
std::string csv_header();
std::string to_csv_line(const ResultRow& row);
// Parses a results CSV. Errors name the offending line.
std::vector<ResultRow> read_results_csv(std::istream& in, const std::string& source = "csv");
std::vector<ResultRow> load_results_csv(const std::string& path);
void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows);
// Order used for the final file: domain, strategy, learner, budget, seed.
void sort_rows(std::vector<ResultRow>& rows);

// Everything a grid cell needs for one domain. Immutable once built. Each
// handle carries the pi_D of its own dataset.
struct DomainContext {
    DomainSpec spec;
    TabularPolicy expert;
    OfflineDataset train;
    std::vector<OfflineDataset> tests;
    std::unique_ptr<RllfHandle> train_handle;
    std::vector<std::unique_ptr<RllfHandle>> test_handles;

    const RllfHandle& handle_for(const OfflineDataset& data) const;
};

// Training data uses seed derive_seed(domain, "train"); test dataset k uses
// derive_seed(domain, "test", k).
std::unique_ptr<DomainContext> prepare_domain(const ExperimentConfig& cfg, const std::string& domain);

std::uint64_t cell_seed(const std::string& domain, const std::string& strategy, double budget, int replicate);

// Brute force over the pool when within the cap, else over the nonzero-reward
// states when that fits; nullopt when neither fits.
std::optional<SelectionResult> optimal_baseline(const DomainContext& ctx, const ExperimentConfig& cfg, int budget);

// Runs the grid, appending rows to <output_dir>/results.csv as cells finish
// and skipping rows already present. The file is rewritten sorted at the end.
// Returns the grid's rows in sorted order.
std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg);
std::string results_path(const ExperimentConfig& cfg);

struct HistogramBin {
    double low = 0.0;
    double high = 0.0;
    std::size_t count = 0;
};

struct SweepResult {
    int budget = 0;
    std::vector<double> returns;  // lexicographic subset order over the pool
    double best = 0.0;
    std::vector<StateId> best_set;
    std::uint64_t evaluator_calls = 0;
};

// Return of every B-subset of the pool. Throws when C(pool,B) exceeds `cap`.
SweepResult sweep_combinations(const OfflineDataset& data, const RllfHandle& handle, int budget, std::uint64_t cap,
                               int workers = 1, EvalMode mode = EvalMode::Exact);
std::vector<HistogramBin> histogram(const std::vector<double>& values, int bins);

struct PatternEntry {
    int budget = 0;
    double percentage_feedback = 0.0;
    std::vector<StateId> order;  // selection order
    double on_path = 0.0;
    double near_path = 0.0;
    double penalty = 0.0;
    std::vector<double> tag_fraction;  // indexed by StateTag
};

struct PatternReport {
    std::string domain;
    std::string strategy;
    std::vector<StateId> optimal_path;  // states the optimal policy can visit
    std::vector<PatternEntry> entries;
};

// Reachable support of the value-iteration policy from the initial states.
std::vector<StateId> optimal_trajectory_states(const DomainSpec& domain);

PatternReport pattern_report(const DomainSpec& domain, const std::vector<LabelSet>& sets, std::size_t pool_size);
void write_pattern_text(std::ostream& out, const PatternReport& report, const DomainSpec& domain);
void write_pattern_csv(std::ostream& out, const PatternReport& report, const DomainSpec& domain);

}  // namespace rllf
