// Command-line front end: run, sweep, oracle, pattern, plot, gen-data, list-domains.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <string>

#include "rllf/config.hpp"
#include "rllf/experiment.hpp"
#include "rllf/plot.hpp"
#include "rllf/text.hpp"

namespace fs = std::filesystem;
using namespace rllf;

namespace {

// Config-file path plus one --<key> flag per config key for a subcommand.
struct ConfigFlags {
    std::string config_path;
    std::map<std::string, std::string> values;

    void attach(CLI::App* app) {
        app->add_option("--config", config_path, "flat key = value config file; flags override it");
        for (const auto& key : config_keys()) app->add_option("--" + key.name, values[key.name], key.help);
    }

    ExperimentConfig build(CLI::App* app) const {
        ExperimentConfig cfg;
        if (!config_path.empty()) load_config_file(config_path, cfg);
        for (const auto& key : config_keys())
            if (app->count("--" + key.name) > 0) apply_setting(cfg, key.name, values.at(key.name));
        if (cfg.output_dir.empty()) cfg.output_dir = default_output_dir();
        cfg.validate();
        return cfg;
    }
};

std::string join_states(const std::vector<StateId>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? ";" : "") + std::to_string(xs[i]);
    return out;
}

std::ofstream open_out(const fs::path& path) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

int cmd_run(const ExperimentConfig& cfg) {
    fs::create_directories(cfg.output_dir);
    {
        auto out = open_out(fs::path(cfg.output_dir) / "config.txt");
        write_config(out, cfg);
    }
    const auto rows = run_experiment(cfg);
    std::cout << rows.size() << " rows in " << results_path(cfg) << '\n';
    return 0;
}

int cmd_sweep(const ExperimentConfig& cfg, const std::vector<int>& budgets, int bins) {
    for (const auto& domain : cfg.domains) {
        auto ctx = prepare_domain(cfg, domain);
        const auto pool = ctx->train.pool().size();
        std::vector<int> Bs = budgets;
        if (Bs.empty())
            for (double f : cfg.budgets) Bs.push_back(budget_from_fraction(f, pool));
        for (int B : Bs) {
            const auto res = sweep_combinations(ctx->train, *ctx->train_handle, B, cfg.strategy.enumeration_cap,
                                                cfg.workers, cfg.evaluator);
            const std::string stem = ctx->spec.name + "_B" + std::to_string(B);
            {
                auto out = open_out(fs::path(cfg.output_dir) / ("sweep_" + stem + ".csv"));
                out << "rank,states,return\n";
                const int n = static_cast<int>(pool);
                std::vector<StateId> idx = unrank_combination(0, n, B);
                for (std::size_t r = 0; r < res.returns.size(); ++r) {
                    std::vector<StateId> states;
                    for (StateId i : idx) states.push_back(ctx->train.pool()[i]);
                    out << r << ',' << join_states(states) << ',' << text::format_double(res.returns[r]) << '\n';
                    next_combination(idx, n);
                }
            }
            {
                auto out = open_out(fs::path(cfg.output_dir) / ("sweep_hist_" + stem + ".csv"));
                out << "bin_low,bin_high,count\n";
                for (const auto& b : histogram(res.returns, bins))
                    out << text::format_double(b.low) << ',' << text::format_double(b.high) << ',' << b.count << '\n';
            }
            std::cout << ctx->spec.name << " B=" << B << ": " << res.returns.size() << " subsets, best "
                      << text::format_double(res.best) << " with {" << join_states(res.best_set) << "}, "
                      << res.evaluator_calls << " evaluator calls\n";
        }
    }
    return 0;
}

int cmd_oracle(const ExperimentConfig& cfg) {
    auto out = open_out(fs::path(cfg.output_dir) / "oracle.csv");
    out << "domain,method,percentage_feedback,budget_B,value,evaluator_calls,label_set_digest,states\n";
    std::cout << std::left << std::setw(14) << "domain" << std::setw(8) << "B" << std::setw(18) << "brute_force"
              << std::setw(18) << "greedy" << "calls(brute/greedy)\n";
    for (const auto& domain : cfg.domains) {
        auto ctx = prepare_domain(cfg, domain);
        const auto pool = ctx->train.pool().size();
        for (double f : cfg.budgets) {
            const int B = budget_from_fraction(f, pool);
            const auto brute = optimal_baseline(*ctx, cfg, B);
            StrategyConfig sc = cfg.strategy;
            sc.name = StrategyName::SequentialGreedy;
            sc.budget = B;
            sc.workers = cfg.workers;
            Evaluator ev(ctx->spec.mdp, cfg.evaluator, cfg.mc_episodes);
            const auto greedy = select_sequential_greedy(ctx->train, sc, *ctx->train_handle, ev);
            auto emit = [&](const std::string& method, const SelectionResult& r) {
                out << ctx->spec.name << ',' << method << ',' << text::format_fixed(percentage_feedback(B, pool), 6)
                    << ',' << B << ',' << text::format_double(*r.value) << ',' << r.evaluator_calls << ','
                    << r.set.digest() << ',' << join_states(r.set.states()) << '\n';
            };
            if (brute) emit("brute_force", *brute);
            emit("sequential_greedy", greedy);
            std::cout << std::setw(14) << ctx->spec.name << std::setw(8) << B << std::setw(18)
                      << (brute ? text::format_fixed(*brute->value, 6) : std::string("NA")) << std::setw(18)
                      << text::format_fixed(*greedy.value, 6) << (brute ? std::to_string(brute->evaluator_calls) : "NA")
                      << '/' << greedy.evaluator_calls << '\n';
        }
    }
    return 0;
}

int cmd_pattern(const ExperimentConfig& cfg, const std::string& method) {
    for (const auto& domain : cfg.domains) {
        auto ctx = prepare_domain(cfg, domain);
        const auto pool = ctx->train.pool().size();
        std::vector<LabelSet> sets;
        for (double f : cfg.budgets) {
            const int B = budget_from_fraction(f, pool);
            std::optional<SelectionResult> res;
            if (method != "greedy") res = optimal_baseline(*ctx, cfg, B);
            if (!res && method == "brute_force")
                throw std::invalid_argument("brute force infeasible on " + ctx->spec.name + " at B=" + std::to_string(B));
            if (!res) {
                StrategyConfig sc = cfg.strategy;
                sc.name = StrategyName::SequentialGreedy;
                sc.budget = B;
                Evaluator ev(ctx->spec.mdp, cfg.evaluator, cfg.mc_episodes);
                res = select_sequential_greedy(ctx->train, sc, *ctx->train_handle, ev);
            }
            sets.push_back(res->set);
        }
        auto report = pattern_report(ctx->spec, sets, pool);
        if (method != "auto") report.strategy = method;
        {
            auto out = open_out(fs::path(cfg.output_dir) / ("pattern_" + ctx->spec.name + ".txt"));
            write_pattern_text(out, report, ctx->spec);
        }
        {
            auto out = open_out(fs::path(cfg.output_dir) / ("pattern_" + ctx->spec.name + ".csv"));
            write_pattern_csv(out, report, ctx->spec);
        }
        write_pattern_text(std::cout, report, ctx->spec);
    }
    return 0;
}

int cmd_plot(const std::string& input, const std::string& out_dir) {
    const auto rows = load_results_csv(input);
    for (const auto& path : write_plots(rows, out_dir)) std::cout << path << '\n';
    return 0;
}

int cmd_gen_data(const ExperimentConfig& cfg) {
    for (const auto& domain : cfg.domains) {
        auto ctx = prepare_domain(cfg, domain);
        const fs::path dir = fs::path(cfg.output_dir) / "data";
        fs::create_directories(dir);
        save_dataset((dir / (ctx->spec.name + "_train.txt")).string(), ctx->train);
        for (std::size_t k = 0; k < ctx->tests.size(); ++k)
            save_dataset((dir / (ctx->spec.name + "_test" + std::to_string(k) + ".txt")).string(), ctx->tests[k]);
        std::cout << ctx->spec.name << ": train " << ctx->train.size() << " samples, pool " << ctx->train.pool().size()
                  << ", " << ctx->tests.size() << " test datasets in " << dir.string() << '\n';
    }
    return 0;
}

int cmd_list_domains(const DomainOptions& opts) {
    std::cout << std::left << std::setw(14) << "domain" << std::setw(8) << "|S|" << std::setw(8) << "|A|" << std::setw(9)
              << "horizon" << std::setw(10) << "episodes" << "optimal_return\n";
    for (const auto& name : domain_names()) {
        const auto d = registry_lookup(name, opts);
        std::cout << std::setw(14) << d.name << std::setw(8) << d.mdp.num_states() << std::setw(8)
                  << d.mdp.num_actions() << std::setw(9) << d.mdp.horizon() << std::setw(10) << d.default_episodes
                  << text::format_fixed(optimal_return(d), 6) << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reward-label selection for offline RL on tabular domains"};
    app.require_subcommand(1);

    ConfigFlags run_flags, sweep_flags, oracle_flags, pattern_flags, gen_flags, list_flags;
    auto* run = app.add_subcommand("run", "run an experiment grid and write results.csv");
    run_flags.attach(run);

    auto* sweep = app.add_subcommand("sweep", "return of every B-subset of the pool, with a histogram");
    sweep_flags.attach(sweep);
    std::vector<int> sweep_budgets;
    int bins = 20;
    sweep->add_option("--B", sweep_budgets, "absolute budgets (default: from --budgets)");
    sweep->add_option("--bins", bins, "histogram bins")->check(CLI::PositiveNumber);

    auto* oracle = app.add_subcommand("oracle", "brute-force and sequential-greedy baselines");
    oracle_flags.attach(oracle);

    auto* pattern = app.add_subcommand("pattern", "pattern analysis of optimal label sets");
    pattern_flags.attach(pattern);
    std::string method = "auto";
    pattern->add_option("--method", method, "brute_force, greedy, or auto (brute force when it fits the cap)")
        ->check(CLI::IsMember({"auto", "brute_force", "greedy"}));

    auto* plot = app.add_subcommand("plot", "render SVG plots from a results CSV");
    std::string plot_input, plot_out;
    plot->add_option("--input", plot_input, "results CSV (default: <output dir>/results.csv)");
    plot->add_option("--out", plot_out, "directory for SVG files (default: <output dir>/plots)");

    auto* gen = app.add_subcommand("gen-data", "write the training and test datasets");
    gen_flags.attach(gen);

    auto* list = app.add_subcommand("list-domains", "list the available domains");
    list_flags.attach(list);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*run) return cmd_run(run_flags.build(run));
        if (*sweep) return cmd_sweep(sweep_flags.build(sweep), sweep_budgets, bins);
        if (*oracle) return cmd_oracle(oracle_flags.build(oracle));
        if (*pattern) return cmd_pattern(pattern_flags.build(pattern), method);
        if (*gen) return cmd_gen_data(gen_flags.build(gen));
        if (*list) return cmd_list_domains(list_flags.build(list).domain);
        if (*plot) {
            const std::string dir = default_output_dir();
            return cmd_plot(plot_input.empty() ? (fs::path(dir) / "results.csv").string() : plot_input,
                            plot_out.empty() ? (fs::path(dir) / "plots").string() : plot_out);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
