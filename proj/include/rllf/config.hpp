#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rllf/domains.hpp"
#include "rllf/evaluator.hpp"
#include "rllf/learners.hpp"
#include "rllf/selection.hpp"

namespace rllf {

enum class Phase { Train, Test };
// pi_D given to the truncated learner: the known mixture policy that collected
// the dataset, or the dataset's empirical action frequencies.
enum class DataPolicySource { Mixture, Empirical };

std::string to_string(Phase phase);
Phase parse_phase(const std::string& text);
std::string to_string(DataPolicySource source);
DataPolicySource parse_data_policy_source(const std::string& text);

struct ExperimentConfig {
    std::vector<std::string> domains{"Graph"};
    std::vector<std::string> strategies{"uniform"};
    std::vector<double> budgets{0.1, 0.3, 0.5, 0.7, 0.9};
    LearnerConfig learner;
    DataPolicySource data_policy = DataPolicySource::Mixture;
    int seeds = 100;
    double train_epsilon = 0.5;
    std::vector<double> test_epsilons{0.55, 0.53, 0.51, 0.48, 0.45};
    int episodes = 0;  // 0: the domain's default
    EvalMode evaluator = EvalMode::Exact;
    int mc_episodes = 10000;
    std::string output_dir;
    int workers = 1;
    Phase phase = Phase::Train;
    bool baseline = true;
    bool timing = false;
    bool verbose = false;
    // Template for every cell; budget and seed are filled per cell.
    StrategyConfig strategy;
    DomainOptions domain;

    void validate() const;
};

struct ConfigKey {
    std::string name;
    std::string help;
};

// Every key accepted in a config file; the CLI exposes each as --<name>.
const std::vector<ConfigKey>& config_keys();

void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value);

// Flat "key = value" lines; '#' starts a comment. Errors carry the line number.
void read_config(std::istream& in, ExperimentConfig& cfg, const std::string& source = "config");
void load_config_file(const std::string& path, ExperimentConfig& cfg);
void write_config(std::ostream& out, const ExperimentConfig& cfg);

// RLLF_OUTPUT_DIR if set, otherwise "results".
std::string default_output_dir();

}  // namespace rllf
