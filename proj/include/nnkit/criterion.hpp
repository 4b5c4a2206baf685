#pragma once

// Loss functions: scalar forward, prediction-gradient backward.
// Mean reduction scales by the same factor in forward and backward, so the
// backward is the exact gradient of the forward.

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "tensor.hpp"

namespace nnkit {

class CriterionError : public std::runtime_error {
public:
    explicit CriterionError(const std::string &msg) : std::runtime_error(msg) {}
};

enum class Reduction { Mean, Sum };

class Criterion {
public:
    virtual ~Criterion() = default;
    virtual double forward(const Tensor &pred, const Tensor &target) = 0;
    virtual Tensor backward(const Tensor &pred, const Tensor &target) = 0;
    virtual std::string name() const = 0;
};

class MseCriterion : public Criterion {
public:
    explicit MseCriterion(Reduction reduction = Reduction::Mean) : reduction_(reduction) {}

    double forward(const Tensor &pred, const Tensor &target) override {
        pred.check_same_shape(target, "mse");
        double acc = 0.0;
        for (std::size_t i = 0; i < pred.numel(); ++i) {
            double d = pred[i] - target[i];
            acc += d * d;
        }
        if (reduction_ == Reduction::Mean) acc /= static_cast<double>(pred.numel());
        return acc;
    }

    Tensor backward(const Tensor &pred, const Tensor &target) override {
        pred.check_same_shape(target, "mse");
        double s = 2.0;
        if (reduction_ == Reduction::Mean) s /= static_cast<double>(pred.numel());
        Tensor g(pred.shape());
        for (std::size_t i = 0; i < pred.numel(); ++i) g[i] = s * (pred[i] - target[i]);
        return g;
    }

    std::string name() const override {
        return reduction_ == Reduction::Mean ? "mse-mean" : "mse-sum";
    }

private:
    Reduction reduction_;
};

// Targets are 0-based class indices, one per row; accepts a rank-1 tensor of
// indices or a one-hot rank-2 tensor (converted by argmax).
inline std::vector<std::size_t> target_classes(const Tensor &target, std::size_t batch,
                                               std::size_t num_classes) {
    std::vector<std::size_t> cls(batch);
    if (target.rank() == 2 && target.extent(1) == num_classes && target.extent(0) == batch) {
        cls = argmax(target, 1);
    } else if (target.rank() == 1 && target.extent(0) == batch) {
        for (std::size_t i = 0; i < batch; ++i) {
            double v = target[i];
            if (v < 0.0 || v >= static_cast<double>(num_classes) || v != std::floor(v))
                throw CriterionError("class index " + std::to_string(v) + " out of range [0," +
                                     std::to_string(num_classes) + ")");
            cls[i] = static_cast<std::size_t>(v);
        }
    } else {
        throw CriterionError("target shape " + shape_to_string(target.shape()) +
                             " incompatible with predictions batch " + std::to_string(batch));
    }
    return cls;
}

// mean over rows of logsumexp(z) - z_t, computed with max-subtraction
class SoftmaxCrossEntropyCriterion : public Criterion {
public:
    double forward(const Tensor &pred, const Tensor &target) override {
        if (pred.rank() != 2) throw CriterionError("cross-entropy: rank-2 logits expected");
        const std::size_t batch = pred.extent(0), classes = pred.extent(1);
        auto cls = target_classes(target, batch, classes);
        double acc = 0.0;
        for (std::size_t i = 0; i < batch; ++i) {
            double mx = pred(i, 0);
            for (std::size_t j = 1; j < classes; ++j) mx = std::max(mx, pred(i, j));
            double lse = 0.0;
            for (std::size_t j = 0; j < classes; ++j) lse += std::exp(pred(i, j) - mx);
            acc += mx + std::log(lse) - pred(i, cls[i]);
        }
        return acc / static_cast<double>(batch);
    }

    // (softmax(z) - onehot(t)) / B
    Tensor backward(const Tensor &pred, const Tensor &target) override {
        const std::size_t batch = pred.extent(0), classes = pred.extent(1);
        auto cls = target_classes(target, batch, classes);
        Tensor g(pred.shape());
        for (std::size_t i = 0; i < batch; ++i) {
            double mx = pred(i, 0);
            for (std::size_t j = 1; j < classes; ++j) mx = std::max(mx, pred(i, j));
            double denom = 0.0;
            for (std::size_t j = 0; j < classes; ++j) {
                g(i, j) = std::exp(pred(i, j) - mx);
                denom += g(i, j);
            }
            for (std::size_t j = 0; j < classes; ++j) g(i, j) /= denom;
            g(i, cls[i]) -= 1.0;
        }
        return scale(g, 1.0 / static_cast<double>(batch));
    }

    std::string name() const override { return "cross-entropy-from-logits"; }
};

// Negative log likelihood on probabilities (e.g. after an in-network
// softmax). Probabilities are clamped to >= 1e-12 before the log; the
// clamping constant is our choice, not a documented one.
class NllCriterion : public Criterion {
public:
    static constexpr double kProbFloor = 1e-12;

    double forward(const Tensor &pred, const Tensor &target) override {
        if (pred.rank() != 2) throw CriterionError("nll: rank-2 probabilities expected");
        const std::size_t batch = pred.extent(0), classes = pred.extent(1);
        auto cls = target_classes(target, batch, classes);
        double acc = 0.0;
        for (std::size_t i = 0; i < batch; ++i)
            acc -= std::log(std::max(pred(i, cls[i]), kProbFloor));
        return acc / static_cast<double>(batch);
    }

    Tensor backward(const Tensor &pred, const Tensor &target) override {
        const std::size_t batch = pred.extent(0), classes = pred.extent(1);
        auto cls = target_classes(target, batch, classes);
        Tensor g(pred.shape());
        for (std::size_t i = 0; i < batch; ++i) {
            double p = pred(i, cls[i]);
            if (p > kProbFloor) g(i, cls[i]) = -1.0 / (p * static_cast<double>(batch));
        }
        return g;
    }

    std::string name() const override { return "nll-from-probabilities"; }
};

} // namespace nnkit
