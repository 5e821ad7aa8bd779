/*
 * rnn - recurrent behavior model: plain-RNN and LSTM forward passes,
 * sum-of-squares sequence loss averaged over sequences, exact
 * backpropagation through time, Adam updates and the minibatch training
 * loop. All arithmetic is double precision and every run is a
 * deterministic function of (data, config, seed).
 */

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "platoonlab/dataset.hpp"

namespace platoonlab {

/// Raised by train() when the loss stops being finite.
class divergence_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class RnnMode { Plain, Lstm };

RnnMode rnn_mode_from_name(const std::string& name); // "rnn" | "lstm"
std::string rnn_mode_name(RnnMode mode);

/// Network parameters. Plain mode: w_x is d_h x d_x, w_h is d_h x d_h,
/// b_h has d_h entries. LSTM mode stacks the four gates (input, forget,
/// output, cell candidate) row-wise, so w_x is 4*d_h x d_x, w_h is
/// 4*d_h x d_h and b_h has 4*d_h entries. w_y is d_y x d_h, b_y has d_y.
/// All matrices are stored row-major.
struct RnnParams {
    RnnMode mode = RnnMode::Lstm;
    int d_x = 2;
    int d_h = 32;
    int d_y = 3;
    std::vector<double> w_x, w_h, b_h, w_y, b_y;

    int gate_rows() const { return mode == RnnMode::Lstm ? 4 * d_h : d_h; }
    void check_shapes() const;

    /// Weights uniform in [-init_range, init_range], biases zero, LSTM
    /// forget-gate bias 1.
    static RnnParams init(RnnMode mode, int d_x, int d_h, int d_y, std::uint64_t seed,
                          double init_range = 0.08);
};

/// Gradient (or moment) storage with the same shapes as RnnParams.
struct RnnTensors {
    std::vector<double> w_x, w_h, b_h, w_y, b_y;
    static RnnTensors zeros_like(const RnnParams& p);
};

using InputSeq = std::vector<std::array<double, 2>>;
using OutputSeq = std::vector<std::array<double, 3>>;

/// Output sequence for one input sequence (hidden and cell state start at
/// zero).
OutputSeq forward(const RnnParams& params, const InputSeq& x);

/// (1/N) * sum over sequences of the summed squared output error; the sum
/// over time steps is not averaged. Sequences in a batch must share one
/// length.
double mse_loss(const RnnParams& params, const std::vector<const RawSequencePair*>& batch);

/// Exact BPTT gradient of mse_loss for the batch; optionally returns the
/// loss from the same forward pass.
RnnTensors backward(const RnnParams& params, const std::vector<const RawSequencePair*>& batch,
                    double* loss_out = nullptr);

struct TrainConfig {
    double learning_rate = 1e-3;
    int epochs = 100;
    int minibatch_cap = 500; // minibatch size = clamp(N/100, 1, cap)
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    RnnMode mode = RnnMode::Lstm;
    int hidden = 32;
    double init_range = 0.08;
    std::uint64_t seed = 0;
};

int minibatch_size(int n_sequences, const TrainConfig& cfg);

struct AdamState {
    RnnTensors m, v;
    std::int64_t step = 0;
    static AdamState zeros_like(const RnnParams& p);
};

/// One Adam step; a zero gradient with zero moments leaves params unchanged.
void adam_update(RnnParams& params, const RnnTensors& grad, AdamState& state,
                 const TrainConfig& cfg);

struct TrainResult {
    RnnParams params;
    std::vector<double> loss_curve; // per-epoch mean training loss
};

/// Minibatch training: per epoch the sequence order is reshuffled, split
/// into minibatches (the last short one is kept) and stepped with Adam.
/// Throws divergence_error on a non-finite loss.
TrainResult train(const std::vector<RawSequencePair>& pairs, const TrainConfig& cfg);

struct CrashPrediction {
    bool positive = false;
    std::optional<int> time; // earliest step with predicted d < threshold
};

/// Runs the network on a normalized input sequence, maps the predicted
/// distance back to meters and reports the earliest threshold crossing.
CrashPrediction predict_crash(const RnnParams& params, const InputSeq& x_normalized,
                              const NormalizationStats& stats, double threshold_m);

/// Weight file: "rnn_weights <rnn|lstm> d_x d_h d_y" then one labeled block
/// per tensor ("tensor <name> <rows> <cols>" followed by row-major values).
std::string params_to_text(const RnnParams& params);
RnnParams params_from_text(const std::string& text);
void save_params(const RnnParams& params, const std::string& path);
RnnParams load_params(const std::string& path);

std::string loss_curve_to_csv(const std::vector<double>& curve);

} // namespace platoonlab
