#pragma once

// Optimizers, stopping criterions and the mini-batch training loop with
// validation-based early stopping.

#include <chrono>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "criterion.hpp"
#include "data.hpp"
#include "module.hpp"

namespace nnkit {

class TrainError : public std::runtime_error {
public:
    explicit TrainError(const std::string &msg) : std::runtime_error(msg) {}
};

class TrainDiverged : public TrainError {
public:
    TrainDiverged(std::size_t epoch, const std::string &what)
        : TrainError("training diverged at epoch " + std::to_string(epoch) + ": " + what),
          epoch(epoch) {}
    std::size_t epoch;
};

enum class OptimizerKind { Gd, SgdMomentum, Adam };
enum class BatchScheme { TorchSplit, TfNextBatch };
// Early stopping compares the validation loss against the previous epoch
// (both reference loops) or against the best so far (max_fail semantics).
enum class StopPolicy { PrevEpoch, BestSoFar };
enum class TargetMode { Indices, OneHot, Regression };

struct TrainOptions {
    std::size_t nepochs = 1000;
    double learning_rate = 0.01;
    std::size_t batch_size = 32;
    std::size_t patience = 10;                // maxSteps
    double improvement_factor = 0.9999;
    double momentum = 0.0;
    double weight_decay_alpha = 0.0;
    double grad_inf_norm_floor = 1e-6;
    double goal = 0.0;                        // training-loss floor
    OptimizerKind optimizer = OptimizerKind::Gd;
    double adam_beta1 = 0.9, adam_beta2 = 0.999, adam_epsilon = 1e-8;
    BatchScheme scheme = BatchScheme::TorchSplit;
    StopPolicy stop_policy = StopPolicy::PrevEpoch;
    TargetMode target_mode = TargetMode::Indices;
    bool shuffle = true;                      // shuffle once before TorchSplit batching
    std::uint64_t seed = 0;

    void validate() const {
        if (nepochs < 1) throw TrainError("nepochs must be >= 1");
        if (batch_size < 1) throw TrainError("batch_size must be >= 1");
        if (patience < 1) throw TrainError("patience must be >= 1");
        if (!(improvement_factor > 0.0 && improvement_factor <= 1.0))
            throw TrainError("improvement_factor must be in (0,1]");
    }
};

enum class StopReason { MaxEpochs, ValidationPatience, GradientFloor, GoalReached };

inline const char *stop_reason_name(StopReason r) {
    switch (r) {
        case StopReason::MaxEpochs: return "max-epochs";
        case StopReason::ValidationPatience: return "validation-patience";
        case StopReason::GradientFloor: return "gradient-floor";
        case StopReason::GoalReached: return "goal-reached";
    }
    return "?";
}

struct TrainReport {
    std::vector<double> train_loss, val_loss, test_loss; // per epoch; val/test may be empty
    std::size_t epochs_run = 0;
    StopReason stop_reason = StopReason::MaxEpochs;
    double seconds = 0.0;
};

// Per-parameter accumulators: velocity (momentum) or first/second moments
// plus the step counter (adam).
struct OptimizerState {
    std::vector<Tensor> velocity;
    std::vector<Tensor> m1, m2;
    std::size_t step = 0;

    void ensure_shapes(const std::vector<Tensor *> &params, OptimizerKind kind) {
        auto init = [&](std::vector<Tensor> &acc) {
            if (acc.size() == params.size()) return;
            acc.clear();
            for (auto *p : params) acc.emplace_back(p->shape());
        };
        if (kind == OptimizerKind::SgdMomentum) init(velocity);
        if (kind == OptimizerKind::Adam) {
            init(m1);
            init(m2);
        }
    }
};

// v <- m*v - lr*g ; p <- p + v   (classical momentum; m = 0 is plain GD)
inline void sgd_momentum_step(const std::vector<Tensor *> &params,
                              const std::vector<Tensor *> &grads, OptimizerState &state,
                              double lr, double momentum) {
    state.ensure_shapes(params, OptimizerKind::SgdMomentum);
    for (std::size_t i = 0; i < params.size(); ++i) {
        params[i]->check_same_shape(*grads[i], "sgd_momentum_step");
        Tensor &v = state.velocity[i];
        for (std::size_t j = 0; j < v.numel(); ++j) {
            v[j] = momentum * v[j] - lr * (*grads[i])[j];
            (*params[i])[j] += v[j];
        }
    }
}

inline void adam_step(const std::vector<Tensor *> &params, const std::vector<Tensor *> &grads,
                      OptimizerState &state, double lr, double beta1 = 0.9, double beta2 = 0.999,
                      double epsilon = 1e-8) {
    state.ensure_shapes(params, OptimizerKind::Adam);
    ++state.step;
    const double c1 = 1.0 - std::pow(beta1, double(state.step));
    const double c2 = 1.0 - std::pow(beta2, double(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        params[i]->check_same_shape(*grads[i], "adam_step");
        Tensor &m = state.m1[i], &v = state.m2[i];
        for (std::size_t j = 0; j < m.numel(); ++j) {
            double g = (*grads[i])[j];
            m[j] = beta1 * m[j] + (1.0 - beta1) * g;
            v[j] = beta2 * v[j] + (1.0 - beta2) * g * g;
            double mhat = m[j] / c1, vhat = v[j] / c2;
            (*params[i])[j] -= lr * mhat / (std::sqrt(vhat) + epsilon);
        }
    }
}

// Counter increments when curr >= prev*factor, else resets; stop at patience.
// The caller updates prev to curr unconditionally afterwards.
inline std::pair<std::size_t, bool> early_stop_check(double prev_val, double curr_val,
                                                     std::size_t counter, double factor,
                                                     std::size_t patience) {
    if (patience < 1) throw TrainError("early_stop_check: patience must be >= 1");
    std::size_t next = curr_val >= prev_val * factor ? counter + 1 : 0;
    return {next, next >= patience};
}

// True (stop) when the infinity norm of the flat gradient vector < floor.
inline bool gradient_floor_check(Module &m, double floor) {
    std::vector<Tensor *> ps, gs;
    m.collect_parameters(ps, gs);
    double norm = 0.0;
    for (auto *g : gs) norm = std::max(norm, g->inf_norm());
    return norm < floor;
}

inline Tensor batch_target(const LabeledDataset &ds, std::size_t begin, std::size_t count,
                           TargetMode mode) {
    switch (mode) {
        case TargetMode::Indices: {
            Tensor t(Shape{count});
            for (std::size_t i = 0; i < count; ++i) t[i] = double(ds.label[begin + i]);
            return t;
        }
        case TargetMode::OneHot: {
            std::vector<std::size_t> sub(ds.label.begin() + static_cast<std::ptrdiff_t>(begin),
                                         ds.label.begin() +
                                             static_cast<std::ptrdiff_t>(begin + count));
            return one_hot(sub, ds.num_classes);
        }
        case TargetMode::Regression:
            if (ds.targets.numel() == 0) throw TrainError("dataset carries no regression targets");
            return take_rows(ds.targets, begin, count);
    }
    throw TrainError("bad target mode");
}

// Mean of per-batch criterion values; parameters untouched, gradients zeroed
// afterwards. Mean-of-means deviates from the global mean when the last
// batch is short; documented and accepted.
inline double evaluate(Module &m, Criterion &criterion, const LabeledDataset &ds,
                       std::size_t batch_size, TargetMode mode = TargetMode::Indices) {
    if (ds.size() == 0) throw TrainError("evaluate: empty dataset");
    double loss = 0.0;
    std::size_t nbatches = 0;
    for (std::size_t begin = 0; begin < ds.size(); begin += batch_size) {
        std::size_t count = std::min(batch_size, ds.size() - begin);
        Tensor input = take_rows(ds.data, begin, count);
        Tensor target = batch_target(ds, begin, count, mode);
        loss += criterion.forward(m.forward(input), target);
        ++nbatches;
    }
    m.zero_grad_parameters();
    return loss / double(nbatches);
}

namespace detail {

inline void optimizer_step(Module &m, const TrainOptions &opts, OptimizerState &state) {
    std::vector<Tensor *> ps, gs;
    m.collect_parameters(ps, gs);
    // weight decay contributes alpha*p to every gradient before the step
    std::vector<Tensor> decayed;
    std::vector<Tensor *> eff = gs;
    if (opts.weight_decay_alpha > 0.0) {
        decayed.reserve(gs.size());
        for (std::size_t i = 0; i < gs.size(); ++i) {
            decayed.push_back(*gs[i]);
            axpy_update(decayed.back(), opts.weight_decay_alpha, *ps[i]);
        }
        for (std::size_t i = 0; i < gs.size(); ++i) eff[i] = &decayed[i];
    }
    switch (opts.optimizer) {
        case OptimizerKind::Gd:
            for (std::size_t i = 0; i < ps.size(); ++i) axpy_update(*ps[i], -opts.learning_rate, *eff[i]);
            break;
        case OptimizerKind::SgdMomentum:
            sgd_momentum_step(ps, eff, state, opts.learning_rate, opts.momentum);
            break;
        case OptimizerKind::Adam:
            adam_step(ps, eff, state, opts.learning_rate, opts.adam_beta1, opts.adam_beta2,
                      opts.adam_epsilon);
            break;
    }
}

} // namespace detail

inline TrainReport train(Module &m, Criterion &criterion, const LabeledDataset &train_ds,
                         const LabeledDataset *val_ds, const LabeledDataset *test_ds,
                         const TrainOptions &opts) {
    opts.validate();
    if (train_ds.size() == 0) throw TrainError("train: empty dataset");
    auto t0 = std::chrono::steady_clock::now();

    Rng rng(opts.seed);
    OptimizerState state;
    TrainReport report;
    report.stop_reason = StopReason::MaxEpochs;

    // Torch-style loop: shuffle once, fixed split for the whole run.
    LabeledDataset fixed;
    if (opts.scheme == BatchScheme::TorchSplit)
        fixed = opts.shuffle ? shuffle(train_ds, rng) : train_ds;
    std::optional<BatchCursor> cursor;
    if (opts.scheme == BatchScheme::TfNextBatch) cursor.emplace(train_ds, rng);

    double prev_val = std::numeric_limits<double>::max(); // "just a very big value"
    double best_val = std::numeric_limits<double>::max();
    std::size_t patience_counter = 0;

    for (std::size_t epoch = 0; epoch < opts.nepochs; ++epoch) {
        double epoch_loss = 0.0;
        std::size_t nbatches = 0;
        double last_grad_norm = std::numeric_limits<double>::max();

        auto train_one = [&](const Tensor &input, const Tensor &target) {
            Tensor pred = m.forward(input);
            double batch_loss = criterion.forward(pred, target);
            if (!std::isfinite(batch_loss)) throw TrainDiverged(epoch + 1, "non-finite training loss");
            epoch_loss += batch_loss;
            m.zero_grad_parameters();
            Tensor grad = criterion.backward(pred, target);
            m.backward(input, grad);
            // sampled before the step; evaluate() zeroes grads later
            std::vector<Tensor *> ps, gs;
            m.collect_parameters(ps, gs);
            last_grad_norm = 0.0;
            for (auto *g : gs) last_grad_norm = std::max(last_grad_norm, g->inf_norm());
            detail::optimizer_step(m, opts, state);
            ++nbatches;
        };

        if (opts.scheme == BatchScheme::TorchSplit) {
            for (std::size_t begin = 0; begin < fixed.size(); begin += opts.batch_size) {
                std::size_t count = std::min(opts.batch_size, fixed.size() - begin);
                train_one(take_rows(fixed.data, begin, count),
                          batch_target(fixed, begin, count, opts.target_mode));
            }
        } else {
            std::size_t per_epoch = (train_ds.size() + opts.batch_size - 1) / opts.batch_size;
            for (std::size_t bi = 0; bi < per_epoch; ++bi) {
                auto [input, labels] = cursor->next_batch(opts.batch_size);
                LabeledDataset view{input, labels, train_ds.num_classes, Tensor()};
                // regression targets travel through the cursor only via labels;
                // the TF loop is used with class targets in every experiment
                train_one(input, batch_target(view, 0, labels.size(), opts.target_mode));
            }
        }

        report.train_loss.push_back(epoch_loss / double(nbatches));
        report.epochs_run = epoch + 1;

        if (test_ds)
            report.test_loss.push_back(
                evaluate(m, criterion, *test_ds, opts.batch_size, opts.target_mode));

        if (val_ds) {
            double curr = evaluate(m, criterion, *val_ds, opts.batch_size, opts.target_mode);
            if (!std::isfinite(curr)) throw TrainDiverged(epoch + 1, "non-finite validation loss");
            report.val_loss.push_back(curr);
            double ref = opts.stop_policy == StopPolicy::PrevEpoch ? prev_val : best_val;
            auto [next, stop] =
                early_stop_check(ref, curr, patience_counter, opts.improvement_factor, opts.patience);
            patience_counter = next;
            prev_val = curr;
            best_val = std::min(best_val, curr);
            if (stop) {
                report.stop_reason = StopReason::ValidationPatience;
                break;
            }
        }

        if (report.train_loss.back() <= opts.goal) {
            report.stop_reason = StopReason::GoalReached;
            break;
        }
        if (last_grad_norm < opts.grad_inf_norm_floor) {
            report.stop_reason = StopReason::GradientFloor;
            break;
        }
    }

    report.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

} // namespace nnkit
