/*
 * platoonlab CLI: drives the learn / generate / run-suite / train-eval
 * stages individually or as one pipeline, plus a report aggregator.
 * Exit codes: 0 success, 1 usage or configuration error, 2 runtime error.
 */

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "platoonlab/pipeline.hpp"

namespace fs = std::filesystem;
using namespace platoonlab;

namespace {

struct CommonArgs {
    std::string config_path;
    std::uint64_t seed = 0;
    std::string out_dir = "out";
    int workers = 1;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool config_required = true) {
    auto* c = cmd->add_option("--config", args.config_path, "pipeline config file");
    if (config_required) c->required();
    cmd->add_option("--seed", args.seed, "master seed");
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--workers", args.workers, "worker threads for within-stage parallelism");
}

PipelineConfig load_cfg(const CommonArgs& args) {
    return PipelineConfig::load(args.config_path, args.seed, args.out_dir, args.workers);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"model-based testing and behavior-model learning for a platooning plant"};
    app.require_subcommand(1);

    CommonArgs args;

    auto* cmd_learn_ = app.add_subcommand("learn", "learn a Mealy hypothesis of the plant");
    add_common(cmd_learn_, args);

    auto* cmd_gen = app.add_subcommand("generate", "generate an abstract test suite");
    std::string strategy_name_arg = "random";
    int n_train = 100;
    std::string model_path;
    std::string suite_path;
    add_common(cmd_gen, args);
    cmd_gen->add_option("--strategy", strategy_name_arg,
                        "random | learning-based | transition-coverage | output-directed");
    cmd_gen->add_option("--n-train", n_train, "number of tests");
    cmd_gen->add_option("--model", model_path,
                        "hypothesis file (default <out>/hypothesis.txt when needed)");
    cmd_gen->add_option("--suite-file", suite_path, "output suite path");

    auto* cmd_run = app.add_subcommand("run-suite", "execute a suite and build its dataset");
    std::string run_suite_path;
    std::string run_tag;
    add_common(cmd_run, args);
    cmd_run->add_option("--suite", run_suite_path, "suite file")->required();
    cmd_run->add_option("--tag", run_tag, "artifact tag (default: suite file stem)");

    auto* cmd_te = app.add_subcommand("train-eval", "train networks and score crash prediction");
    std::string train_csv, val_csv;
    std::string te_strategy = "random";
    int te_n_train = 0;
    add_common(cmd_te, args);
    cmd_te->add_option("--train", train_csv, "training dataset CSV")->required();
    cmd_te->add_option("--val", val_csv, "validation dataset CSV")->required();
    cmd_te->add_option("--strategy", te_strategy, "strategy label for the results rows");
    cmd_te->add_option("--n-train", te_n_train, "n_train label (default: training set size)");

    auto* cmd_pipe = app.add_subcommand("pipeline", "run every stage end to end");
    add_common(cmd_pipe, args);

    auto* cmd_report = app.add_subcommand("report", "aggregate a results CSV");
    std::string results_path;
    cmd_report->add_option("--results", results_path, "results.csv path")->required();
    cmd_report->add_option("--out", args.out_dir, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (cmd_learn_->parsed()) {
            PipelineConfig cfg = load_cfg(args);
            LearnResult res = cmd_learn(cfg);
            std::cout << "hypothesis states: " << res.hypothesis.num_states()
                      << "  tests: " << res.log.total_tests
                      << "  collisions: " << res.log.collisions << "\n";
        } else if (cmd_gen->parsed()) {
            PipelineConfig cfg = load_cfg(args);
            Strategy strategy = strategy_from_name(strategy_name_arg);
            std::optional<MealyMachine> model;
            if (strategy == Strategy::TransitionCoverage ||
                strategy == Strategy::OutputDirected) {
                std::string path = model_path.empty()
                                       ? (cfg.out_dir / "hypothesis.txt").string()
                                       : model_path;
                model = load_mealy(path);
            }
            if (suite_path.empty())
                suite_path = (cfg.out_dir / "suites" /
                              ("suite_" + strategy_name_arg + "_" + std::to_string(n_train) +
                               ".txt"))
                                 .string();
            std::uint64_t seed = derive_seed(
                cfg.master_seed, "gen/" + strategy_name_arg + "/" + std::to_string(n_train));
            auto suite = cmd_generate(cfg, strategy, n_train, seed,
                                      model ? &*model : nullptr, suite_path);
            std::cout << "wrote " << suite.size() << " tests to " << suite_path << "\n";
        } else if (cmd_run->parsed()) {
            PipelineConfig cfg = load_cfg(args);
            auto suite = load_suite(cfg.alphabet.inputs, run_suite_path);
            if (run_tag.empty()) run_tag = fs::path(run_suite_path).stem().string();
            fs::path dataset = cfg.out_dir / "datasets" / (run_tag + ".csv");
            SuiteExecution ex = cmd_run_suite(cfg, suite, run_tag, dataset);
            std::cout << "executed " << suite.size() << " tests, kept " << ex.pairs.size()
                      << " pairs (" << ex.dropped << " dropped), " << ex.tests_with_target
                      << " contained " << cfg.target_label << "; dataset: " << dataset.string()
                      << "\n";
        } else if (cmd_te->parsed()) {
            PipelineConfig cfg = load_cfg(args);
            auto train_raw = load_pairs(train_csv);
            auto val_raw = load_pairs(val_csv);
            if (te_n_train == 0) te_n_train = static_cast<int>(train_raw.size());
            std::string results = results_csv_header();
            std::string cdf_text = cdf_csv_header();
            cmd_train_eval(cfg, train_raw, val_raw, strategy_from_name(te_strategy), te_n_train,
                           results, cdf_text);
            fs::create_directories(cfg.out_dir);
            std::ofstream(cfg.out_dir / "results.csv") << results;
            std::ofstream(cfg.out_dir / "cdf.csv") << cdf_text;
            std::cout << summarize_results_csv(results);
        } else if (cmd_pipe->parsed()) {
            PipelineConfig cfg = load_cfg(args);
            fs::path results = cmd_pipeline(cfg);
            std::cout << read_file((cfg.out_dir / "summary.csv").string());
            std::cout << "results: " << results.string() << "\n";
        } else if (cmd_report->parsed()) {
            std::string summary = summarize_results_csv(read_file(results_path));
            fs::create_directories(args.out_dir);
            std::ofstream(fs::path(args.out_dir) / "summary.csv") << summary;
            std::cout << summary;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
