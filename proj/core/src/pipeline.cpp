#include "platoonlab/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace platoonlab {

namespace fs = std::filesystem;

namespace {

void ensure_parent(const fs::path& path) {
    if (!path.parent_path().empty()) fs::create_directories(path.parent_path());
}

void write_file(const fs::path& path, const std::string& text) {
    ensure_parent(path);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path.string());
    out << text;
}

std::string suite_tag(Strategy s, int n_train) {
    return strategy_name(s) + "_" + std::to_string(n_train);
}

} // namespace

PipelineConfig PipelineConfig::load(const fs::path& path, std::uint64_t master_seed,
                                    const fs::path& out_dir, int workers) {
    KvFile kv = KvFile::load(path);
    const fs::path base = path.parent_path();
    auto resolve = [&](const std::string& p) {
        fs::path f(p);
        return f.is_absolute() ? f : base / f;
    };

    PipelineConfig cfg;
    cfg.plant = PlantConfig::load(resolve(kv.get("plant_config")).string());
    cfg.alphabet = AbstractAlphabet::load(resolve(kv.get("alphabet_config")).string());
    cfg.learn_budget = static_cast<std::uint64_t>(kv.get_int_or("learn_budget", 5000));
    cfg.eq_tests_per_round = static_cast<int>(kv.get_int_or("eq_tests_per_round", 50));
    if (kv.has("teacher_machine"))
        cfg.teacher_machine = resolve(kv.get("teacher_machine")).string();

    if (kv.has("strategies")) {
        cfg.strategies.clear();
        for (const auto& name : split_list(kv.get("strategies")))
            cfg.strategies.push_back(strategy_from_name(name));
    }
    if (kv.has("n_train_values")) {
        cfg.n_train_values.clear();
        for (const auto& v : split_list(kv.get("n_train_values")))
            cfg.n_train_values.push_back(static_cast<int>(parse_int(v)));
    }
    cfg.train_seeds = static_cast<int>(kv.get_int_or("train_seeds", 5));
    cfg.l_max = static_cast<int>(kv.get_int_or("l_max", 10));
    cfg.generation_batch = static_cast<int>(kv.get_int_or("generation_batch", 1000));
    cfg.target_label = kv.get_or("target_label", "crash");

    cfg.dataset_T = static_cast<int>(kv.get_int_or("dataset_T", 64));
    cfg.train.learning_rate = kv.get_double_or("learning_rate", 1e-3);
    cfg.train.epochs = static_cast<int>(kv.get_int_or("epochs", 100));
    cfg.train.hidden = static_cast<int>(kv.get_int_or("hidden_size", 32));
    cfg.train.mode = rnn_mode_from_name(kv.get_or("mode", "lstm"));
    cfg.train.minibatch_cap = static_cast<int>(kv.get_int_or("minibatch_cap", 500));
    cfg.validation_size = static_cast<int>(kv.get_int_or("validation_size", 1000));

    cfg.master_seed = master_seed;
    cfg.workers = workers < 1 ? 1 : workers;
    cfg.out_dir = out_dir;
    // Vary the orientation scripts with the master seed while keeping them
    // a pure function of (seed, query).
    cfg.plant.curve.seed ^= derive_seed(master_seed, "curve");
    return cfg;
}

LearnResult cmd_learn(const PipelineConfig& cfg) {
    LearnResult result;
    if (!cfg.teacher_machine.empty()) {
        MealyMachine target = load_mealy(cfg.teacher_machine);
        MachineTeacher teacher(target, cfg.learn_budget);
        ExactOracle oracle(target);
        result = learn(teacher, oracle);
    } else {
        SulHarness harness(cfg.plant, cfg.alphabet);
        std::optional<Symbol> collision;
        if (std::find(cfg.alphabet.outputs.begin(), cfg.alphabet.outputs.end(),
                      cfg.target_label) != cfg.alphabet.outputs.end())
            collision = cfg.alphabet.output_index(cfg.target_label);
        LearnerBudget budget{cfg.learn_budget, cfg.eq_tests_per_round,
                             derive_seed(cfg.master_seed, "learn")};
        result = learn_from_harness(harness, budget, collision, cfg.l_max);
    }

    fs::create_directories(cfg.out_dir);
    save_mealy(result.hypothesis, (cfg.out_dir / "hypothesis.txt").string());
    write_file(cfg.out_dir / "hypothesis.dot", to_dot(result.hypothesis));
    write_file(cfg.out_dir / "learn_log.csv", learn_log_to_csv(result.log));
    return result;
}

std::vector<Word> cmd_generate(const PipelineConfig& cfg, Strategy strategy, int n_train,
                               std::uint64_t seed, const MealyMachine* model,
                               const fs::path& suite_path) {
    StrategyConfig sc;
    sc.strategy = strategy;
    sc.n_train = n_train;
    sc.l_max = cfg.l_max;
    sc.generation_batch = cfg.generation_batch;
    sc.target_label = cfg.target_label;
    sc.seed = seed;

    std::vector<Word> suite;
    switch (strategy) {
        case Strategy::Random:
            suite = gen_random(sc, cfg.alphabet.num_inputs());
            break;
        case Strategy::LearningBased: {
            SulHarness harness(cfg.plant, cfg.alphabet);
            suite = gen_learning_based(sc, harness, cfg.eq_tests_per_round);
            break;
        }
        case Strategy::TransitionCoverage:
        case Strategy::OutputDirected: {
            if (!model)
                throw std::invalid_argument("generate: strategy '" + strategy_name(strategy) +
                                            "' needs a learned model");
            suite = strategy == Strategy::TransitionCoverage
                        ? gen_transition_coverage(sc, *model)
                        : gen_output_directed(sc, *model);
            break;
        }
    }

    ensure_parent(suite_path);
    save_suite(suite, cfg.alphabet.inputs, suite_path.string());
    KvFile manifest;
    manifest.set("strategy", strategy_name(strategy));
    manifest.set("n_train", std::to_string(n_train));
    manifest.set("seed", std::to_string(seed));
    write_file(suite_path.string() + ".manifest", manifest.dump());
    return suite;
}

SuiteExecution execute_suite(const PipelineConfig& cfg, const std::vector<Word>& suite) {
    SuiteExecution ex;
    ex.traces.resize(suite.size());
    const Symbol target = cfg.alphabet.output_index(cfg.target_label);

    parallel_for(suite.size(), cfg.workers, [&](std::size_t k) {
        SulHarness harness(cfg.plant, cfg.alphabet, /*use_cache=*/false);
        harness.execute(suite[k], &ex.traces[k]);
    });

    for (std::size_t k = 0; k < suite.size(); ++k) {
        const auto& outs = ex.traces[k].abstract_outputs;
        if (std::find(outs.begin(), outs.end(), target) != outs.end()) ++ex.tests_with_target;
        try {
            ex.pairs.push_back(build_pair(ex.traces[k], cfg.dataset_T, cfg.plant));
            ex.kept_test_ids.push_back(static_cast<int>(k));
        } catch (const trace_too_long&) {
            ++ex.dropped;
        }
    }
    return ex;
}

SuiteExecution cmd_run_suite(const PipelineConfig& cfg, const std::vector<Word>& suite,
                             const std::string& tag, const fs::path& dataset_path) {
    SuiteExecution ex = execute_suite(cfg, suite);
    ensure_parent(dataset_path);
    save_pairs(ex.pairs, dataset_path.string());

    const fs::path trace_dir = cfg.out_dir / "traces" / tag;
    fs::create_directories(trace_dir);
    for (std::size_t k = 0; k < ex.traces.size(); ++k) {
        char name[32];
        std::snprintf(name, sizeof name, "test_%05zu.csv", k);
        write_file(trace_dir / name, trace_to_csv(ex.traces[k], cfg.alphabet));
    }

    KvFile manifest;
    manifest.set("tests", std::to_string(suite.size()));
    manifest.set("kept_pairs", std::to_string(ex.pairs.size()));
    manifest.set("dropped", std::to_string(ex.dropped));
    manifest.set("tests_with_" + cfg.target_label, std::to_string(ex.tests_with_target));
    write_file(dataset_path.string() + ".manifest", manifest.dump());
    return ex;
}

TrainEvalOutcome train_and_eval(const PipelineConfig& cfg,
                                const std::vector<RawSequencePair>& train_raw,
                                const std::vector<RawSequencePair>& val_raw,
                                std::uint64_t seed) {
    NormalizationStats stats = fit_normalize(train_raw);
    std::vector<RawSequencePair> train_set = train_raw;
    apply_normalize(train_set, stats);

    TrainConfig tc = cfg.train;
    tc.seed = seed;
    TrainResult trained = train(train_set, tc);

    TrainEvalOutcome outcome;
    outcome.seed = seed;
    outcome.params = std::move(trained.params);
    outcome.loss_curve = std::move(trained.loss_curve);

    std::vector<std::pair<bool, bool>> truth_pred(val_raw.size());
    std::vector<std::optional<int>> pred_times(val_raw.size());
    parallel_for(val_raw.size(), cfg.workers, [&](std::size_t k) {
        InputSeq x = val_raw[k].x;
        for (auto& v : x) {
            v[0] = (v[0] - stats.x_mean[0]) / stats.x_std[0];
            v[1] = (v[1] - stats.x_mean[1]) / stats.x_std[1];
        }
        CrashPrediction pred =
            predict_crash(outcome.params, x, stats, cfg.plant.truck_length_m);
        truth_pred[k] = {val_raw[k].label_crash, pred.positive};
        pred_times[k] = pred.time;
    });
    for (std::size_t k = 0; k < val_raw.size(); ++k) {
        if (truth_pred[k].first && truth_pred[k].second)
            outcome.crash_time_errors.push_back(
                std::abs(*val_raw[k].crash_time - *pred_times[k]));
    }
    outcome.scores = score(confusion(truth_pred));
    return outcome;
}

std::vector<TrainEvalOutcome> cmd_train_eval(const PipelineConfig& cfg,
                                             const std::vector<RawSequencePair>& train_raw,
                                             const std::vector<RawSequencePair>& val_raw,
                                             Strategy strategy, int n_train,
                                             std::string& results_csv, std::string& cdf_csv) {
    const std::string name = strategy_name(strategy);
    std::vector<TrainEvalOutcome> outcomes(static_cast<std::size_t>(cfg.train_seeds));
    // Whole training runs are independent; parallelize across seeds and
    // keep validation serial inside each run.
    PipelineConfig inner = cfg;
    inner.workers = 1;
    parallel_for(outcomes.size(), cfg.workers, [&](std::size_t k) {
        std::uint64_t seed = derive_seed(
            cfg.master_seed, "train/" + name + "/" + std::to_string(n_train) + "/" +
                                 std::to_string(k));
        outcomes[k] = train_and_eval(inner, train_raw, val_raw, seed);
    });

    write_file(cfg.out_dir / "stats" / (suite_tag(strategy, n_train) + ".txt"),
               stats_to_kv(fit_normalize(train_raw)).dump());

    std::vector<int> pooled_errors;
    const fs::path weights_dir = cfg.out_dir / "weights";
    const fs::path loss_dir = cfg.out_dir / "loss";
    for (std::size_t k = 0; k < outcomes.size(); ++k) {
        const auto& oc = outcomes[k];
        results_csv += results_csv_row(name, n_train, oc.seed, oc.scores);
        pooled_errors.insert(pooled_errors.end(), oc.crash_time_errors.begin(),
                             oc.crash_time_errors.end());
        std::string stem = suite_tag(strategy, n_train) + "_seed" + std::to_string(k);
        fs::create_directories(weights_dir);
        save_params(oc.params, (weights_dir / (stem + ".txt")).string());
        write_file(loss_dir / (stem + ".csv"), loss_curve_to_csv(oc.loss_curve));
    }
    cdf_csv += cdf_csv_rows(name, n_train, cdf(std::move(pooled_errors)));
    return outcomes;
}

std::filesystem::path cmd_pipeline(const PipelineConfig& cfg) {
    fs::create_directories(cfg.out_dir);

    // Stage 1: learn a hypothesis of the plant.
    LearnResult learned = cmd_learn(cfg);

    // Stage 2: training suites and datasets per (strategy, n_train).
    const fs::path suites_dir = cfg.out_dir / "suites";
    const fs::path data_dir = cfg.out_dir / "datasets";
    std::set<Word> training_tests;
    std::map<std::pair<Strategy, int>, std::vector<RawSequencePair>> train_sets;
    for (Strategy s : cfg.strategies) {
        for (int n : cfg.n_train_values) {
            std::uint64_t seed = derive_seed(
                cfg.master_seed, "gen/" + strategy_name(s) + "/" + std::to_string(n));
            std::vector<Word> suite =
                cmd_generate(cfg, s, n, seed, &learned.hypothesis,
                             suites_dir / ("suite_" + suite_tag(s, n) + ".txt"));
            for (const Word& w : suite) training_tests.insert(w);
            SuiteExecution ex = cmd_run_suite(cfg, suite, suite_tag(s, n),
                                              data_dir / ("train_" + suite_tag(s, n) + ".csv"));
            train_sets[{s, n}] = std::move(ex.pairs);
        }
    }

    // Stage 3: validation suite (output-directed, disjoint seed); tests that
    // exactly match a training test are removed.
    std::vector<Word> val_suite =
        cmd_generate(cfg, Strategy::OutputDirected, cfg.validation_size,
                     derive_seed(cfg.master_seed, "validation"), &learned.hypothesis,
                     cfg.out_dir / "validation" / "suite.txt");
    std::vector<Word> val_filtered;
    for (Word& w : val_suite)
        if (!training_tests.count(w)) val_filtered.push_back(std::move(w));
    SuiteExecution val_ex = cmd_run_suite(cfg, val_filtered, "validation",
                                          cfg.out_dir / "validation" / "dataset.csv");
    if (val_ex.pairs.empty())
        throw std::runtime_error(
            "validation set is empty after overlap removal; raise validation_size");
    save_suite(val_filtered, cfg.alphabet.inputs,
               (cfg.out_dir / "validation" / "suite_filtered.txt").string());

    // Stage 4: train and evaluate.
    std::string results_csv = results_csv_header();
    std::string cdf_csv_text = cdf_csv_header();
    for (Strategy s : cfg.strategies)
        for (int n : cfg.n_train_values)
            cmd_train_eval(cfg, train_sets[{s, n}], val_ex.pairs, s, n, results_csv,
                           cdf_csv_text);

    const fs::path results_path = cfg.out_dir / "results.csv";
    write_file(results_path, results_csv);
    write_file(cfg.out_dir / "cdf.csv", cdf_csv_text);
    write_file(cfg.out_dir / "summary.csv", summarize_results_csv(results_csv));
    return results_path;
}

std::string summarize_results_csv(const std::string& results_csv) {
    std::istringstream in(results_csv);
    std::string line;
    if (!std::getline(in, line) || line != "strategy,n_train,seed,ce,tpr,ppv,f1")
        throw std::invalid_argument("results csv: unexpected header");

    struct Cell {
        std::vector<double> ce, tpr, ppv, f1;
    };
    std::map<std::pair<std::string, int>, Cell> cells;
    std::vector<std::pair<std::string, int>> order;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::string item;
        std::istringstream ls(line);
        while (std::getline(ls, item, ',')) f.push_back(item);
        f.resize(7);
        std::pair<std::string, int> key{f[0], static_cast<int>(parse_int(f[1]))};
        if (!cells.count(key)) order.push_back(key);
        Cell& c = cells[key];
        c.ce.push_back(parse_double(f[3]));
        if (!f[4].empty()) c.tpr.push_back(parse_double(f[4]));
        if (!f[5].empty()) c.ppv.push_back(parse_double(f[5]));
        if (!f[6].empty()) c.f1.push_back(parse_double(f[6]));
    }

    auto mean_of = [](const std::vector<double>& v) {
        double s = 0;
        for (double e : v) s += e;
        return v.empty() ? 0.0 : s / static_cast<double>(v.size());
    };
    auto std_of = [&](const std::vector<double>& v) {
        if (v.empty()) return 0.0;
        double m = mean_of(v), s = 0;
        for (double e : v) s += (e - m) * (e - m);
        return std::sqrt(s / static_cast<double>(v.size()));
    };

    std::ostringstream out;
    out << "strategy,n_train,runs,ce_mean,ce_std,tpr_mean,tpr_std,ppv_mean,ppv_std,"
           "f1_mean,f1_std\n";
    for (const auto& key : order) {
        const Cell& c = cells.at(key);
        auto cell = [&](const std::vector<double>& v) {
            if (v.empty()) return std::string(",");
            return format_double(mean_of(v)) + "," + format_double(std_of(v));
        };
        out << key.first << "," << key.second << "," << c.ce.size() << "," << cell(c.ce) << ","
            << cell(c.tpr) << "," << cell(c.ppv) << "," << cell(c.f1) << "\n";
    }
    return out.str();
}

} // namespace platoonlab
