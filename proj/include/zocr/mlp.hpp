#pragma once

// Two-hidden-layer feed-forward network with log-sigmoid units in every
// layer, a^i = logsig(W^i a^(i-1) + b^i) for i = 1..3, and a full-batch
// gradient-descent trainer with momentum and an adaptive learning rate.

#include <zocr/error.hpp>

#include <Eigen/Dense>

#include <array>
#include <bit>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace zocr {

/// Layer widths d-h1-h2-n and the initialization seed.
struct NetworkConfig {
    int input_dim = 69;
    std::array<int, 2> hidden{100, 100};
    int output_dim = 26;
    std::uint64_t seed = 1;

    std::array<int, 4> dims() const { return {input_dim, hidden[0], hidden[1], output_dim}; }

    void validate() const
    {
        if (input_dim < 1) throw Error("input dimension must be positive");
        if (hidden[0] < 1 || hidden[1] < 1) throw Error("hidden layer widths must be positive");
        if (output_dim < 2) throw Error("need at least 2 output classes");
    }
};

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Offsets of each layer's weights and bias inside a flat parameter vector
/// laid out as W1 (row-major), b1, W2, b2, W3, b3.
class ParamLayout {
public:
    ParamLayout() = default;

    explicit ParamLayout(std::array<int, 4> dims) : dims_(dims)
    {
        for (int d : dims)
            if (d < 1) throw Error("network dimensions must be positive");
        std::size_t off = 0;
        for (std::size_t i = 0; i < 3; ++i) {
            w_off_[i] = off;
            off += static_cast<std::size_t>(dims[i + 1]) * static_cast<std::size_t>(dims[i]);
            b_off_[i] = off;
            off += static_cast<std::size_t>(dims[i + 1]);
        }
        size_ = static_cast<Eigen::Index>(off);
    }

    const std::array<int, 4>& dims() const { return dims_; }
    Eigen::Index size() const { return size_; }

    /// Layer index 0..2.
    Eigen::Map<const RowMatrix> weight(const Eigen::VectorXd& flat, int layer) const
    {
        return {flat.data() + w_off_.at(static_cast<std::size_t>(layer)), rows(layer), cols(layer)};
    }
    Eigen::Map<RowMatrix> weight(Eigen::VectorXd& flat, int layer) const
    {
        return {flat.data() + w_off_.at(static_cast<std::size_t>(layer)), rows(layer), cols(layer)};
    }
    Eigen::Map<const Eigen::VectorXd> bias(const Eigen::VectorXd& flat, int layer) const
    {
        return {flat.data() + b_off_.at(static_cast<std::size_t>(layer)), rows(layer)};
    }
    Eigen::Map<Eigen::VectorXd> bias(Eigen::VectorXd& flat, int layer) const
    {
        return {flat.data() + b_off_.at(static_cast<std::size_t>(layer)), rows(layer)};
    }

    friend bool operator==(const ParamLayout& a, const ParamLayout& b) { return a.dims_ == b.dims_; }

private:
    int rows(int layer) const { return dims_.at(static_cast<std::size_t>(layer) + 1); }
    int cols(int layer) const { return dims_.at(static_cast<std::size_t>(layer)); }

    std::array<int, 4> dims_{};
    std::array<std::size_t, 3> w_off_{};
    std::array<std::size_t, 3> b_off_{};
    Eigen::Index size_ = 0;
};

/// Weights and biases of the d-h1-h2-n network, stored as one flat vector so
/// the optimizer can treat the network as a single point in parameter space.
class NetworkParams {
public:
    NetworkParams() = default;

    explicit NetworkParams(std::array<int, 4> dims)
        : layout_(dims), flat_(Eigen::VectorXd::Zero(layout_.size()))
    {
    }

    const ParamLayout& layout() const { return layout_; }
    const std::array<int, 4>& dims() const { return layout_.dims(); }
    int input_dim() const { return dims()[0]; }
    int output_dim() const { return dims()[3]; }
    Eigen::Index size() const { return flat_.size(); }

    Eigen::VectorXd& flat() { return flat_; }
    const Eigen::VectorXd& flat() const { return flat_; }

    Eigen::Map<RowMatrix> weight(int layer) { return layout_.weight(flat_, layer); }
    Eigen::Map<const RowMatrix> weight(int layer) const { return layout_.weight(flat_, layer); }
    Eigen::Map<Eigen::VectorXd> bias(int layer) { return layout_.bias(flat_, layer); }
    Eigen::Map<const Eigen::VectorXd> bias(int layer) const { return layout_.bias(flat_, layer); }

    bool all_finite() const { return flat_.allFinite(); }

    /// Bitwise equality of shape and every parameter.
    friend bool operator==(const NetworkParams& a, const NetworkParams& b)
    {
        if (!(a.layout_ == b.layout_) || a.flat_.size() != b.flat_.size()) return false;
        for (Eigen::Index i = 0; i < a.flat_.size(); ++i)
            if (std::bit_cast<std::uint64_t>(a.flat_[i]) != std::bit_cast<std::uint64_t>(b.flat_[i])) return false;
        return true;
    }

private:
    ParamLayout layout_;
    Eigen::VectorXd flat_;
};

/// FNV-1a over the raw bytes of the parameter vector.
inline std::uint64_t params_hash(const Eigen::VectorXd& flat)
{
    std::uint64_t h = 1469598103934665603ull;
    for (double v : flat) {
        auto bits = std::bit_cast<std::uint64_t>(v);
        for (int i = 0; i < 8; ++i) {
            h ^= (bits >> (8 * i)) & 0xffu;
            h *= 1099511628211ull;
        }
    }
    return h;
}

/// Weights uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)), biases zero.
inline NetworkParams init_params(const NetworkConfig& cfg)
{
    cfg.validate();
    NetworkParams p(cfg.dims());
    std::mt19937_64 rng(cfg.seed);
    for (int layer = 0; layer < 3; ++layer) {
        auto w = p.weight(layer);
        const double limit = 1.0 / std::sqrt(static_cast<double>(w.cols()));
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
            for (Eigen::Index c = 0; c < w.cols(); ++c) {
                const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53; // [0, 1)
                w(r, c) = limit * (2.0 * u - 1.0);
            }
        }
    }
    return p;
}

inline double logsig(double x)
{
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

/// Outputs of the three layers for one input.
struct Activations {
    std::array<Eigen::VectorXd, 3> layers;
    const Eigen::VectorXd& output() const { return layers[2]; }
};

namespace detail {
inline void check_input_dim(const NetworkParams& params, Eigen::Index got)
{
    if (got != params.input_dim())
        throw Error("input dimension mismatch: network expects " + std::to_string(params.input_dim()) +
                    " features, got " + std::to_string(got));
}
} // namespace detail

inline Activations forward(const NetworkParams& params, std::span<const double> input)
{
    detail::check_input_dim(params, static_cast<Eigen::Index>(input.size()));
    Activations act;
    Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(input.data(), static_cast<Eigen::Index>(input.size()));
    for (int layer = 0; layer < 3; ++layer) {
        Eigen::VectorXd z = params.weight(layer) * a + params.bias(layer);
        a = z.unaryExpr(&logsig);
        act.layers[static_cast<std::size_t>(layer)] = a;
    }
    return act;
}

/// Index of the largest output; ties go to the lowest index.
inline int argmax(const Eigen::VectorXd& v)
{
    int best = 0;
    for (Eigen::Index i = 1; i < v.size(); ++i)
        if (v[i] > v[best]) best = static_cast<int>(i);
    return best;
}

inline int classify(const NetworkParams& params, std::span<const double> input)
{
    return argmax(forward(params, input).output());
}

/// Training samples stored column-wise: inputs d x N, targets n x N.
struct Batch {
    Eigen::MatrixXd inputs;
    Eigen::MatrixXd targets;

    Eigen::Index size() const { return inputs.cols(); }
};

/// Target values used for the one-hot encoding.
struct TargetEncoding {
    double off = 0.0;
    double on = 1.0;
};

inline Batch make_batch(std::span<const std::vector<double>> rows, std::span<const int> labels, int classes,
                        TargetEncoding enc = {})
{
    if (rows.empty()) throw Error("empty training set");
    if (rows.size() != labels.size()) throw Error("sample and label counts differ");
    const auto d = static_cast<Eigen::Index>(rows.front().size());
    const auto n = static_cast<Eigen::Index>(rows.size());
    Batch b{Eigen::MatrixXd(d, n), Eigen::MatrixXd::Constant(classes, n, enc.off)};
    for (Eigen::Index j = 0; j < n; ++j) {
        const auto& row = rows[static_cast<std::size_t>(j)];
        if (static_cast<Eigen::Index>(row.size()) != d) throw Error("inconsistent feature dimensions");
        b.inputs.col(j) = Eigen::Map<const Eigen::VectorXd>(row.data(), d);
        const int label = labels[static_cast<std::size_t>(j)];
        if (label < 0 || label >= classes) throw Error("label " + std::to_string(label) + " out of range");
        b.targets(label, j) = enc.on;
    }
    return b;
}

/// Loss evaluation for one parameter point together with the state that the
/// matching gradient computation reuses.
struct MlpEvaluation {
    double mse = 0.0;
    std::array<Eigen::MatrixXd, 3> activations;
};

/// Mean squared error of the network over a batch, as a function of the flat
/// parameter vector.
class MlpObjective {
public:
    using Evaluation = MlpEvaluation;

    MlpObjective(std::array<int, 4> dims, const Batch& batch) : layout_(dims), batch_(batch)
    {
        if (batch.size() == 0) throw Error("empty training set");
        if (batch.inputs.rows() != dims[0])
            throw Error("input dimension mismatch: network expects " + std::to_string(dims[0]) +
                        " features, got " + std::to_string(batch.inputs.rows()));
        if (batch.targets.rows() != dims[3])
            throw Error("target width " + std::to_string(batch.targets.rows()) + " does not match " +
                        std::to_string(dims[3]) + " outputs");
        if (batch.targets.cols() != batch.inputs.cols()) throw Error("sample and target counts differ");
    }

    const std::array<int, 4>& dims() const { return layout_.dims(); }

    Evaluation evaluate(const Eigen::VectorXd& theta) const
    {
        check(theta);
        Evaluation ev;
        const Eigen::MatrixXd* prev = &batch_.inputs;
        for (int layer = 0; layer < 3; ++layer) {
            Eigen::MatrixXd z = layout_.weight(theta, layer) * *prev;
            z.colwise() += layout_.bias(theta, layer);
            auto& a = ev.activations[static_cast<std::size_t>(layer)];
            a = z.unaryExpr(&logsig);
            prev = &a;
        }
        const Eigen::MatrixXd& out = ev.activations[2];
        ev.mse = (out - batch_.targets).squaredNorm() / static_cast<double>(out.size());
        return ev;
    }

    static double loss(const Evaluation& ev) { return ev.mse; }

    /// Backpropagation; the logsig derivative is a * (1 - a) from the stored
    /// activations.
    Eigen::VectorXd gradient(const Eigen::VectorXd& theta, const Evaluation& ev) const
    {
        check(theta);
        Eigen::VectorXd g = Eigen::VectorXd::Zero(layout_.size());
        const auto& a = ev.activations;
        const double scale = 2.0 / static_cast<double>(a[2].size());
        Eigen::MatrixXd delta = (scale * (a[2] - batch_.targets)).cwiseProduct(
            a[2].cwiseProduct((1.0 - a[2].array()).matrix()));
        for (int layer = 2; layer >= 0; --layer) {
            const Eigen::MatrixXd& below = layer == 0 ? batch_.inputs : a[static_cast<std::size_t>(layer - 1)];
            layout_.weight(g, layer).noalias() = delta * below.transpose();
            layout_.bias(g, layer) = delta.rowwise().sum();
            if (layer == 0) break;
            Eigen::MatrixXd back = layout_.weight(theta, layer).transpose() * delta;
            delta = back.cwiseProduct(below.cwiseProduct((1.0 - below.array()).matrix()));
        }
        return g;
    }

private:
    void check(const Eigen::VectorXd& theta) const
    {
        if (theta.size() != layout_.size()) throw Error("parameter vector has the wrong length");
    }

    ParamLayout layout_;
    const Batch& batch_;
};

inline double batch_mse(const NetworkParams& params, const Batch& batch)
{
    return MlpObjective(params.dims(), batch).evaluate(params.flat()).mse;
}

/// Gradient of `batch_mse` with the same layout as the parameters.
inline NetworkParams gradients(const NetworkParams& params, const Batch& batch)
{
    MlpObjective obj(params.dims(), batch);
    NetworkParams g(params.dims());
    g.flat() = obj.gradient(params.flat(), obj.evaluate(params.flat()));
    return g;
}

// ---------------------------------------------------------------------------
// Training

/// A differentiable loss over a flat parameter vector. `evaluate` returns an
/// opaque evaluation that `gradient` may reuse at the same point.
template <typename P>
concept Objective = requires(const P& p, const Eigen::VectorXd& theta, const typename P::Evaluation& ev) {
    { p.evaluate(theta) } -> std::same_as<typename P::Evaluation>;
    { P::loss(ev) } -> std::convertible_to<double>;
    { p.gradient(theta, ev) } -> std::same_as<Eigen::VectorXd>;
};

struct TrainConfig {
    double goal_mse = 1e-6;
    std::size_t max_epochs = 1'000'000;
    double lr0 = 0.01;
    double momentum = 0.9;
    double lr_inc = 1.05;
    double lr_dec = 0.7;
    double max_perf_inc = 1.04;
    bool normalize_inputs = false;
    bool soft_targets = false;

    void validate() const
    {
        if (!(momentum >= 0.0 && momentum < 1.0)) throw Error("momentum must lie in [0, 1)");
        if (!(lr_dec > 0.0 && lr_dec < 1.0)) throw Error("lr_dec must lie in (0, 1)");
        if (!(lr_inc > 1.0)) throw Error("lr_inc must exceed 1");
        if (!(goal_mse > 0.0)) throw Error("goal_mse must be positive");
        if (!(lr0 > 0.0)) throw Error("lr0 must be positive");
        if (!(max_perf_inc >= 1.0)) throw Error("max_perf_inc must be at least 1");
    }

    TargetEncoding targets() const { return soft_targets ? TargetEncoding{0.05, 0.95} : TargetEncoding{}; }
};

struct EpochRecord {
    std::size_t epoch = 0; // 1-based
    double mse = 0.0;      // after the accept/reject decision
    double lr = 0.0;       // after the decision, i.e. the rate for the next epoch
    bool accepted = false;
};

template <typename Evaluation>
struct TrainState {
    std::size_t epoch = 0;
    double lr = 0.0;
    Eigen::VectorXd prev_delta;
    double initial_mse = std::numeric_limits<double>::quiet_NaN();
    std::vector<EpochRecord> history;

    // Evaluation and gradient at the current parameters. Valid only while the
    // parameters are changed exclusively through train_epoch.
    std::optional<Evaluation> current;
    std::optional<Eigen::VectorXd> gradient;

    double current_mse() const { return history.empty() ? initial_mse : history.back().mse; }

    std::vector<double> mse_history() const
    {
        std::vector<double> out;
        out.reserve(history.size());
        for (const auto& r : history) out.push_back(r.mse);
        return out;
    }
};

struct StepDecision {
    bool accepted = false;
    double lr = 0.0;
};

/// Variable-learning-rate rule: a candidate whose error grows by more than
/// `max_perf_inc` is discarded and the rate shrinks; an accepted candidate
/// that lowers the error grows the rate.
inline StepDecision decide_step(double current_mse, double candidate_mse, double lr, const TrainConfig& cfg)
{
    if (candidate_mse > cfg.max_perf_inc * current_mse) return {false, lr * cfg.lr_dec};
    return {true, candidate_mse < current_mse ? lr * cfg.lr_inc : lr};
}

template <Objective P>
TrainState<typename P::Evaluation> start_training(const P& objective, const Eigen::VectorXd& theta,
                                                  const TrainConfig& cfg)
{
    cfg.validate();
    TrainState<typename P::Evaluation> state;
    state.lr = cfg.lr0;
    state.prev_delta = Eigen::VectorXd::Zero(theta.size());
    state.current = objective.evaluate(theta);
    state.initial_mse = P::loss(*state.current);
    if (!std::isfinite(state.initial_mse)) throw Error("initial error is not finite");
    return state;
}

/// One epoch: step = mc * prev_step - (1 - mc) * lr * grad, evaluated at
/// theta + step and accepted or rejected by `decide_step`. Rejected steps
/// leave theta untouched and clear the momentum buffer.
template <Objective P>
const EpochRecord& train_epoch(const P& objective, Eigen::VectorXd& theta, TrainState<typename P::Evaluation>& state,
                               const TrainConfig& cfg)
{
    if (!state.current) state.current = objective.evaluate(theta);
    if (!state.gradient) state.gradient = objective.gradient(theta, *state.current);
    const double current_mse = P::loss(*state.current);

    Eigen::VectorXd step = cfg.momentum * state.prev_delta - (1.0 - cfg.momentum) * state.lr * *state.gradient;
    Eigen::VectorXd candidate = theta + step;
    auto cand_eval = objective.evaluate(candidate);
    const double cand_mse = P::loss(cand_eval);
    if (!std::isfinite(cand_mse))
        throw Error("training diverged at epoch " + std::to_string(state.epoch + 1) + " (non-finite MSE)");

    const StepDecision d = decide_step(current_mse, cand_mse, state.lr, cfg);
    state.lr = d.lr;
    ++state.epoch;
    if (d.accepted) {
        theta = std::move(candidate);
        state.prev_delta = std::move(step);
        state.current = std::move(cand_eval);
        state.gradient.reset();
        state.history.push_back({state.epoch, cand_mse, state.lr, true});
    } else {
        state.prev_delta.setZero();
        state.history.push_back({state.epoch, current_mse, state.lr, false});
    }
    return state.history.back();
}

enum class StopReason { GoalReached, MaxEpochs };

inline const char* to_string(StopReason r)
{
    return r == StopReason::GoalReached ? "goal reached" : "max epochs";
}

using MlpTrainState = TrainState<MlpEvaluation>;
using EpochObserver = std::function<void(const EpochRecord&)>;

struct TrainResult {
    NetworkParams params;
    MlpTrainState state;
    StopReason stop = StopReason::MaxEpochs;
};

/// Runs epochs until the error reaches `goal_mse` or `max_epochs` is hit.
template <Objective P>
StopReason run_training(const P& objective, Eigen::VectorXd& theta, TrainState<typename P::Evaluation>& state,
                        const TrainConfig& cfg, const EpochObserver& observer = {})
{
    if (state.current_mse() <= cfg.goal_mse) return StopReason::GoalReached;
    while (state.epoch < cfg.max_epochs) {
        const EpochRecord& rec = train_epoch(objective, theta, state, cfg);
        if (observer) observer(rec);
        if (rec.mse <= cfg.goal_mse) return StopReason::GoalReached;
    }
    return StopReason::MaxEpochs;
}

inline TrainResult train(const NetworkConfig& net, const TrainConfig& cfg, const Batch& batch,
                         const EpochObserver& observer = {})
{
    cfg.validate();
    TrainResult result{init_params(net), {}, StopReason::MaxEpochs};
    MlpObjective objective(net.dims(), batch);
    result.state = start_training(objective, result.params.flat(), cfg);
    result.stop = run_training(objective, result.params.flat(), result.state, cfg, observer);
    result.state.current.reset();
    result.state.gradient.reset();
    return result;
}

} // namespace zocr
