/*
 * eval - binary classification scores and crash-detection-time analysis.
 */

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace platoonlab {

struct ConfusionCounts {
    std::int64_t tp = 0, fp = 0, tn = 0, fn = 0;
    std::int64_t total() const { return tp + fp + tn + fn; }
};

/// Tally from per-sequence (ground truth, prediction) pairs.
ConfusionCounts confusion(const std::vector<std::pair<bool, bool>>& truth_pred);

struct Scores {
    double ce = 0;             // (FP+FN)/N * 100
    std::optional<double> tpr; // TP/(TP+FN), absent when TP+FN = 0
    std::optional<double> ppv; // TP/(TP+FP), absent when TP+FP = 0
    std::optional<double> f1;  // 2TP/(2TP+FP+FN), absent when that denominator is 0
};

/// Throws std::invalid_argument on an empty validation set.
Scores score(const ConfusionCounts& counts);

/// Cumulative distribution of crash-detection-time errors (true positives
/// only): sorted distinct error values with cumulative percentages, ending
/// at 100. Empty input gives an empty list.
std::vector<std::pair<int, double>> cdf(std::vector<int> errors);

/// One results row: strategy,n_train,seed,ce,tpr,ppv,f1 (absent scores stay
/// empty).
std::string results_csv_header();
std::string results_csv_row(const std::string& strategy, int n_train, std::uint64_t seed,
                            const Scores& scores);

std::string cdf_csv_header();
std::string cdf_csv_rows(const std::string& strategy, int n_train,
                         const std::vector<std::pair<int, double>>& cdf_points);

} // namespace platoonlab
