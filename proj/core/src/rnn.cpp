#include "platoonlab/rnn.hpp"

#include <Eigen/Core>

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "platoonlab/util.hpp"

namespace platoonlab {

namespace {

using Mat = Eigen::MatrixXd;
using MapRM =
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using MapRMMut =
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using MapVec = Eigen::Map<const Eigen::VectorXd>;
using MapVecMut = Eigen::Map<Eigen::VectorXd>;

Mat sigmoid(const Mat& z) {
    return ((-z.array()).exp() + 1.0).inverse().matrix();
}

/// Per-step activations of a batched forward pass, kept for BPTT.
struct ForwardTrace {
    std::vector<Mat> x;      // d_x x B per step
    std::vector<Mat> h;      // d_h x B per step (h[0] = zero state)
    std::vector<Mat> c;      // LSTM cell state, c[0] = zero
    std::vector<Mat> gates;  // LSTM: 4*d_h x B post-activation (i,f,o,g)
    std::vector<Mat> u;      // LSTM: tanh(c_t)
    std::vector<Mat> y;      // d_y x B per step
};

ForwardTrace forward_batch(const RnnParams& p, const std::vector<const InputSeq*>& xs) {
    p.check_shapes();
    const int B = static_cast<int>(xs.size());
    const std::size_t T = xs.empty() ? 0 : xs[0]->size();
    for (const auto* x : xs)
        if (x->size() != T)
            throw std::invalid_argument("rnn: sequences in a batch must share one length");

    MapRM w_x(p.w_x.data(), p.gate_rows(), p.d_x);
    MapRM w_h(p.w_h.data(), p.gate_rows(), p.d_h);
    MapVec b_h(p.b_h.data(), p.gate_rows());
    MapRM w_y(p.w_y.data(), p.d_y, p.d_h);
    MapVec b_y(p.b_y.data(), p.d_y);

    ForwardTrace ft;
    ft.h.push_back(Mat::Zero(p.d_h, B));
    if (p.mode == RnnMode::Lstm) ft.c.push_back(Mat::Zero(p.d_h, B));

    for (std::size_t t = 0; t < T; ++t) {
        Mat x_t(p.d_x, B);
        for (int n = 0; n < B; ++n)
            for (int d = 0; d < p.d_x; ++d)
                x_t(d, n) = (*xs[static_cast<std::size_t>(n)])[t][static_cast<std::size_t>(d)];

        Mat z = w_x * x_t + w_h * ft.h.back();
        z.colwise() += b_h;

        Mat h_t;
        if (p.mode == RnnMode::Plain) {
            h_t = z.array().tanh().matrix();
        } else {
            const int dh = p.d_h;
            Mat gates(4 * dh, B);
            gates.topRows(3 * dh) = sigmoid(z.topRows(3 * dh));
            gates.bottomRows(dh) = z.bottomRows(dh).array().tanh().matrix();
            Mat c_t = gates.middleRows(dh, dh).cwiseProduct(ft.c.back()) +
                      gates.topRows(dh).cwiseProduct(gates.bottomRows(dh));
            Mat u_t = c_t.array().tanh().matrix();
            h_t = gates.middleRows(2 * dh, dh).cwiseProduct(u_t);
            ft.gates.push_back(std::move(gates));
            ft.c.push_back(std::move(c_t));
            ft.u.push_back(std::move(u_t));
        }
        Mat y_t = w_y * h_t;
        y_t.colwise() += b_y;
        ft.x.push_back(std::move(x_t));
        ft.h.push_back(std::move(h_t));
        ft.y.push_back(std::move(y_t));
    }
    return ft;
}

double batch_loss(const ForwardTrace& ft, const std::vector<const RawSequencePair*>& batch) {
    double sum = 0;
    for (std::size_t t = 0; t < ft.y.size(); ++t) {
        for (std::size_t n = 0; n < batch.size(); ++n) {
            for (std::size_t d = 0; d < 3; ++d) {
                double e = ft.y[t](static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(n)) -
                           batch[n]->targets[t][d];
                sum += e * e;
            }
        }
    }
    return sum / static_cast<double>(batch.size());
}

std::vector<const InputSeq*> batch_inputs(const std::vector<const RawSequencePair*>& batch) {
    std::vector<const InputSeq*> xs;
    xs.reserve(batch.size());
    for (const auto* p : batch) xs.push_back(&p->x);
    return xs;
}

} // namespace

RnnMode rnn_mode_from_name(const std::string& name) {
    if (name == "rnn") return RnnMode::Plain;
    if (name == "lstm") return RnnMode::Lstm;
    throw std::invalid_argument("unknown rnn mode: '" + name + "'");
}

std::string rnn_mode_name(RnnMode mode) {
    return mode == RnnMode::Plain ? "rnn" : "lstm";
}

void RnnParams::check_shapes() const {
    const std::size_t gr = static_cast<std::size_t>(gate_rows());
    if (d_x <= 0 || d_h <= 0 || d_y <= 0) throw std::invalid_argument("rnn: bad dimensions");
    if (w_x.size() != gr * static_cast<std::size_t>(d_x) ||
        w_h.size() != gr * static_cast<std::size_t>(d_h) || b_h.size() != gr ||
        w_y.size() != static_cast<std::size_t>(d_y) * static_cast<std::size_t>(d_h) ||
        b_y.size() != static_cast<std::size_t>(d_y))
        throw std::invalid_argument("rnn: tensor shapes inconsistent with dimensions");
    for (const auto* v : {&w_x, &w_h, &b_h, &w_y, &b_y})
        for (double e : *v)
            if (!std::isfinite(e)) throw std::invalid_argument("rnn: non-finite parameter");
}

RnnParams RnnParams::init(RnnMode mode, int d_x, int d_h, int d_y, std::uint64_t seed,
                          double init_range) {
    RnnParams p;
    p.mode = mode;
    p.d_x = d_x;
    p.d_h = d_h;
    p.d_y = d_y;
    const std::size_t gr = static_cast<std::size_t>(p.gate_rows());
    Rng rng(seed);
    auto fill = [&](std::vector<double>& v, std::size_t n) {
        v.resize(n);
        for (auto& e : v) e = rng.uniform_real(-init_range, init_range);
    };
    fill(p.w_x, gr * static_cast<std::size_t>(d_x));
    fill(p.w_h, gr * static_cast<std::size_t>(d_h));
    p.b_h.assign(gr, 0.0);
    if (mode == RnnMode::Lstm)
        for (int k = 0; k < d_h; ++k) p.b_h[static_cast<std::size_t>(d_h + k)] = 1.0;
    fill(p.w_y, static_cast<std::size_t>(d_y) * static_cast<std::size_t>(d_h));
    p.b_y.assign(static_cast<std::size_t>(d_y), 0.0);
    return p;
}

RnnTensors RnnTensors::zeros_like(const RnnParams& p) {
    RnnTensors t;
    t.w_x.assign(p.w_x.size(), 0.0);
    t.w_h.assign(p.w_h.size(), 0.0);
    t.b_h.assign(p.b_h.size(), 0.0);
    t.w_y.assign(p.w_y.size(), 0.0);
    t.b_y.assign(p.b_y.size(), 0.0);
    return t;
}

OutputSeq forward(const RnnParams& params, const InputSeq& x) {
    std::vector<const InputSeq*> xs{&x};
    ForwardTrace ft = forward_batch(params, xs);
    OutputSeq y(x.size());
    for (std::size_t t = 0; t < x.size(); ++t)
        for (std::size_t d = 0; d < 3; ++d) y[t][d] = ft.y[t](static_cast<Eigen::Index>(d), 0);
    return y;
}

double mse_loss(const RnnParams& params, const std::vector<const RawSequencePair*>& batch) {
    if (batch.empty()) throw std::invalid_argument("mse_loss: empty batch");
    ForwardTrace ft = forward_batch(params, batch_inputs(batch));
    return batch_loss(ft, batch);
}

RnnTensors backward(const RnnParams& p, const std::vector<const RawSequencePair*>& batch,
                    double* loss_out) {
    if (batch.empty()) throw std::invalid_argument("backward: empty batch");
    ForwardTrace ft = forward_batch(p, batch_inputs(batch));
    if (loss_out) *loss_out = batch_loss(ft, batch);

    const int B = static_cast<int>(batch.size());
    const int T = static_cast<int>(ft.y.size());
    const int dh = p.d_h;
    const double inv_n = 1.0 / static_cast<double>(B);

    MapRM w_h(p.w_h.data(), p.gate_rows(), dh);
    MapRM w_y(p.w_y.data(), p.d_y, dh);

    RnnTensors g = RnnTensors::zeros_like(p);
    MapRMMut g_wx(g.w_x.data(), p.gate_rows(), p.d_x);
    MapRMMut g_wh(g.w_h.data(), p.gate_rows(), dh);
    MapVecMut g_bh(g.b_h.data(), p.gate_rows());
    MapRMMut g_wy(g.w_y.data(), p.d_y, dh);
    MapVecMut g_by(g.b_y.data(), p.d_y);

    Mat dh_next = Mat::Zero(dh, B);
    Mat dc_next = Mat::Zero(dh, B);

    for (int t = T - 1; t >= 0; --t) {
        auto ts = static_cast<std::size_t>(t);
        Mat dy(p.d_y, B);
        for (int n = 0; n < B; ++n)
            for (int d = 0; d < p.d_y; ++d)
                dy(d, n) =
                    2.0 * inv_n *
                    (ft.y[ts](d, n) -
                     batch[static_cast<std::size_t>(n)]->targets[ts][static_cast<std::size_t>(d)]);

        const Mat& h_t = ft.h[ts + 1];
        g_wy += dy * h_t.transpose();
        g_by += dy.rowwise().sum();
        Mat dh_t = w_y.transpose() * dy + dh_next;

        Mat dz;
        if (p.mode == RnnMode::Plain) {
            dz = dh_t.cwiseProduct((1.0 - h_t.array().square()).matrix());
        } else {
            const Mat& gates = ft.gates[ts];
            auto i_t = gates.topRows(dh);
            auto f_t = gates.middleRows(dh, dh);
            auto o_t = gates.middleRows(2 * dh, dh);
            auto g_t = gates.bottomRows(dh);
            const Mat& u_t = ft.u[ts];
            const Mat& c_prev = ft.c[ts];

            Mat d_o = dh_t.cwiseProduct(u_t);
            Mat dc = dh_t.cwiseProduct(o_t).cwiseProduct(
                         (1.0 - u_t.array().square()).matrix()) +
                     dc_next;
            Mat d_i = dc.cwiseProduct(g_t);
            Mat d_f = dc.cwiseProduct(c_prev);
            Mat d_g = dc.cwiseProduct(i_t);

            dz.resize(4 * dh, B);
            dz.topRows(dh) = d_i.cwiseProduct(i_t.cwiseProduct((1.0 - i_t.array()).matrix()));
            dz.middleRows(dh, dh) =
                d_f.cwiseProduct(f_t.cwiseProduct((1.0 - f_t.array()).matrix()));
            dz.middleRows(2 * dh, dh) =
                d_o.cwiseProduct(o_t.cwiseProduct((1.0 - o_t.array()).matrix()));
            dz.bottomRows(dh) = d_g.cwiseProduct((1.0 - g_t.array().square()).matrix());

            dc_next = dc.cwiseProduct(f_t);
        }

        g_wx += dz * ft.x[ts].transpose();
        g_wh += dz * ft.h[ts].transpose();
        g_bh += dz.rowwise().sum();
        dh_next = w_h.transpose() * dz;
    }
    return g;
}

int minibatch_size(int n_sequences, const TrainConfig& cfg) {
    int m = n_sequences / 100;
    if (m < 1) m = 1;
    if (m > cfg.minibatch_cap) m = cfg.minibatch_cap;
    if (m > n_sequences) m = n_sequences;
    return m;
}

AdamState AdamState::zeros_like(const RnnParams& p) {
    return AdamState{RnnTensors::zeros_like(p), RnnTensors::zeros_like(p), 0};
}

void adam_update(RnnParams& params, const RnnTensors& grad, AdamState& state,
                 const TrainConfig& cfg) {
    ++state.step;
    const double b1 = cfg.adam_beta1, b2 = cfg.adam_beta2;
    const double corr1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
    const double corr2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
    auto update = [&](std::vector<double>& theta, const std::vector<double>& g,
                      std::vector<double>& m, std::vector<double>& v) {
        for (std::size_t k = 0; k < theta.size(); ++k) {
            m[k] = b1 * m[k] + (1.0 - b1) * g[k];
            v[k] = b2 * v[k] + (1.0 - b2) * g[k] * g[k];
            theta[k] -= cfg.learning_rate * (m[k] / corr1) /
                        (std::sqrt(v[k] / corr2) + cfg.adam_eps);
        }
    };
    update(params.w_x, grad.w_x, state.m.w_x, state.v.w_x);
    update(params.w_h, grad.w_h, state.m.w_h, state.v.w_h);
    update(params.b_h, grad.b_h, state.m.b_h, state.v.b_h);
    update(params.w_y, grad.w_y, state.m.w_y, state.v.w_y);
    update(params.b_y, grad.b_y, state.m.b_y, state.v.b_y);
}

TrainResult train(const std::vector<RawSequencePair>& pairs, const TrainConfig& cfg) {
    if (pairs.empty()) throw std::invalid_argument("train: empty training set");
    if (cfg.epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
    const int n = static_cast<int>(pairs.size());
    const int mb = minibatch_size(n, cfg);

    Rng rng(derive_seed(cfg.seed, "train/shuffle"));
    RnnParams params =
        RnnParams::init(cfg.mode, 2, cfg.hidden, 3, derive_seed(cfg.seed, "train/init"),
                        cfg.init_range);

    std::vector<std::size_t> order(pairs.size());
    std::iota(order.begin(), order.end(), 0);
    AdamState adam = AdamState::zeros_like(params);
    TrainResult result;
    result.loss_curve.reserve(static_cast<std::size_t>(cfg.epochs));

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t k = order.size(); k > 1; --k) {
            std::size_t j = rng.bounded(k);
            std::swap(order[k - 1], order[j]);
        }
        double epoch_sum = 0;
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(mb)) {
            std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(mb));
            std::vector<const RawSequencePair*> batch;
            batch.reserve(end - start);
            for (std::size_t k = start; k < end; ++k) batch.push_back(&pairs[order[k]]);
            double loss = 0;
            RnnTensors grad = backward(params, batch, &loss);
            if (!std::isfinite(loss))
                throw divergence_error("training loss became non-finite at epoch " +
                                       std::to_string(epoch));
            adam_update(params, grad, adam, cfg);
            for (const auto* t : {&params.w_x, &params.w_h, &params.b_h, &params.w_y, &params.b_y})
                for (double v : *t)
                    if (!std::isfinite(v))
                        throw divergence_error("parameters became non-finite at epoch " +
                                               std::to_string(epoch));
            epoch_sum += loss * static_cast<double>(batch.size());
        }
        result.loss_curve.push_back(epoch_sum / static_cast<double>(n));
    }
    result.params = std::move(params);
    return result;
}

CrashPrediction predict_crash(const RnnParams& params, const InputSeq& x_normalized,
                              const NormalizationStats& stats, double threshold_m) {
    OutputSeq y = forward(params, x_normalized);
    CrashPrediction pred;
    for (std::size_t t = 0; t < y.size(); ++t) {
        double d = y[t][2] * stats.t_std[2] + stats.t_mean[2];
        if (d < threshold_m) {
            pred.positive = true;
            pred.time = static_cast<int>(t);
            break;
        }
    }
    return pred;
}

std::string params_to_text(const RnnParams& p) {
    p.check_shapes();
    std::ostringstream out;
    out << "rnn_weights " << rnn_mode_name(p.mode) << " " << p.d_x << " " << p.d_h << " "
        << p.d_y << "\n";
    auto block = [&](const char* name, const std::vector<double>& v, int rows, int cols) {
        out << "tensor " << name << " " << rows << " " << cols << "\n";
        for (int r = 0; r < rows; ++r) {
            for (int c = 0; c < cols; ++c) {
                if (c) out << ' ';
                out << format_double(v[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) +
                                       static_cast<std::size_t>(c)]);
            }
            out << "\n";
        }
    };
    block("w_x", p.w_x, p.gate_rows(), p.d_x);
    block("w_h", p.w_h, p.gate_rows(), p.d_h);
    block("b_h", p.b_h, p.gate_rows(), 1);
    block("w_y", p.w_y, p.d_y, p.d_h);
    block("b_y", p.b_y, p.d_y, 1);
    return out.str();
}

RnnParams params_from_text(const std::string& text) {
    std::istringstream in(text);
    std::string tag, mode;
    RnnParams p;
    if (!(in >> tag >> mode >> p.d_x >> p.d_h >> p.d_y) || tag != "rnn_weights")
        throw std::invalid_argument("weights: malformed header");
    p.mode = rnn_mode_from_name(mode);
    auto read_block = [&](const char* name, std::vector<double>& v) {
        std::string kw, got;
        int rows = 0, cols = 0;
        if (!(in >> kw >> got >> rows >> cols) || kw != "tensor" || got != name)
            throw std::invalid_argument(std::string("weights: expected tensor ") + name);
        v.resize(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols));
        for (auto& e : v)
            if (!(in >> e)) throw std::invalid_argument("weights: truncated tensor block");
    };
    read_block("w_x", p.w_x);
    read_block("w_h", p.w_h);
    read_block("b_h", p.b_h);
    read_block("w_y", p.w_y);
    read_block("b_y", p.b_y);
    p.check_shapes();
    return p;
}

void save_params(const RnnParams& params, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write weights file: " + path);
    out << params_to_text(params);
}

RnnParams load_params(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open weights file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return params_from_text(buf.str());
}

std::string loss_curve_to_csv(const std::vector<double>& curve) {
    std::ostringstream out;
    out << "epoch,loss\n";
    for (std::size_t e = 0; e < curve.size(); ++e)
        out << e << "," << format_double(curve[e]) << "\n";
    return out.str();
}

} // namespace platoonlab
