/*
 * pipeline - file-level orchestration of the full experiment:
 * learn -> generate -> run-suite -> train-eval -> report.
 *
 * Every stage is restartable from its input files alone, and all artifacts
 * are plain text or CSV. Per-stage seeds are derived from the master seed
 * with derive_seed(master, stage-name); the stage names are listed next to
 * each stage function below.
 */

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "platoonlab/dataset.hpp"
#include "platoonlab/eval.hpp"
#include "platoonlab/learner.hpp"
#include "platoonlab/mapper.hpp"
#include "platoonlab/mealy.hpp"
#include "platoonlab/plant.hpp"
#include "platoonlab/rnn.hpp"
#include "platoonlab/testgen.hpp"

namespace platoonlab {

struct PipelineConfig {
    PlantConfig plant;
    AbstractAlphabet alphabet;

    std::uint64_t learn_budget = 5000;
    int eq_tests_per_round = 50;
    /// When set, the learn stage reads this Mealy machine file and learns it
    /// with an exact equivalence oracle instead of testing the plant. Meant
    /// for exercising the toolchain on known targets.
    std::string teacher_machine;

    std::vector<Strategy> strategies{Strategy::Random, Strategy::OutputDirected};
    std::vector<int> n_train_values{100, 500};
    int train_seeds = 5;
    int l_max = 10;
    int generation_batch = 1000;
    std::string target_label = "crash";

    int dataset_T = 64;
    TrainConfig train;
    int validation_size = 1000;

    std::uint64_t master_seed = 0;
    int workers = 1;
    std::filesystem::path out_dir = "out";

    /// Reads the pipeline key=value file; plant_config and alphabet_config
    /// entries are paths resolved relative to the file's directory. The
    /// master seed is mixed into the plant's curve seed so orientation
    /// scripts vary across seeds.
    static PipelineConfig load(const std::filesystem::path& path, std::uint64_t master_seed,
                               const std::filesystem::path& out_dir, int workers);
};

/// Budgeted learning against the plant harness (stage seed "learn").
/// Writes hypothesis.txt, hypothesis.dot and learn_log.csv to out_dir and
/// returns the result.
LearnResult cmd_learn(const PipelineConfig& cfg);

/// One generated suite plus its manifest (stage seed
/// "gen/<strategy>/<n_train>"; the validation suite uses "validation").
/// model may be null for random and learning-based.
std::vector<Word> cmd_generate(const PipelineConfig& cfg, Strategy strategy, int n_train,
                               std::uint64_t seed, const MealyMachine* model,
                               const std::filesystem::path& suite_path);

struct SuiteExecution {
    std::vector<ConcreteTrace> traces;  // one per test
    std::vector<RawSequencePair> pairs; // one per kept test
    std::vector<int> kept_test_ids;     // pair index -> test index
    int dropped = 0;                    // tests whose trace cannot fit dataset_T
    std::uint64_t tests_with_target = 0; // executed tests containing target_label
};

/// Executes a suite on fresh plant instances (parallel over tests, results
/// in suite order) and builds dataset pairs; tests that cannot fit the
/// configured sequence length even after truncation are counted and
/// dropped.
SuiteExecution execute_suite(const PipelineConfig& cfg, const std::vector<Word>& suite);

/// execute_suite plus artifacts: dataset CSV, per-test trace CSVs under
/// <out>/traces/<tag> and a run manifest.
SuiteExecution cmd_run_suite(const PipelineConfig& cfg, const std::vector<Word>& suite,
                             const std::string& tag, const std::filesystem::path& dataset_path);

struct TrainEvalOutcome {
    std::uint64_t seed = 0;
    Scores scores;
    std::vector<int> crash_time_errors; // true positives only
    RnnParams params;
    std::vector<double> loss_curve;
};

/// Fits normalization on the training pairs, trains one network and scores
/// crash prediction on the validation pairs.
TrainEvalOutcome train_and_eval(const PipelineConfig& cfg,
                                const std::vector<RawSequencePair>& train_raw,
                                const std::vector<RawSequencePair>& val_raw,
                                std::uint64_t seed);

/// Multi-seed train-eval (stage seeds "train/<strategy>/<n_train>/<k>").
/// Appends rows to the results/cdf CSV texts and writes weight and loss
/// files per seed.
std::vector<TrainEvalOutcome> cmd_train_eval(const PipelineConfig& cfg,
                                             const std::vector<RawSequencePair>& train_raw,
                                             const std::vector<RawSequencePair>& val_raw,
                                             Strategy strategy, int n_train,
                                             std::string& results_csv, std::string& cdf_csv);

/// All stages. Writes results.csv, cdf.csv and summary.csv in out_dir.
/// Returns the path of results.csv.
std::filesystem::path cmd_pipeline(const PipelineConfig& cfg);

/// Aggregates a results CSV into per-(strategy, n_train) means and standard
/// deviations (summary.csv schema).
std::string summarize_results_csv(const std::string& results_csv);

} // namespace platoonlab
