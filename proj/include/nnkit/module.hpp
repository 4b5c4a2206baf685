#pragma once

// Layer modules: forward/backward/zero_grad/update contract.
// Criteria produce batch-mean scaled gradients; layers never rescale.

#include <memory>
#include <string>
#include <vector>

#include "tensor.hpp"

namespace nnkit {

class ModuleError : public std::runtime_error {
public:
    explicit ModuleError(const std::string &msg) : std::runtime_error(msg) {}
};

class Module {
public:
    virtual ~Module() = default;

    virtual Tensor forward(const Tensor &input) = 0;

    // Must be preceded by forward with the same input shape. Parameterized
    // layers ADD their gradients into the accumulators.
    virtual Tensor backward(const Tensor &input, const Tensor &grad_output) = 0;

    virtual void zero_grad_parameters() {}

    // p <- p - lr * grad(p)
    virtual void update_parameters(double lr) {}

    // Append aliasing pointers; order is fixed per layer (weights then bias).
    virtual void collect_parameters(std::vector<Tensor *> &params, std::vector<Tensor *> &grads) {}

    virtual std::string name() const = 0;

    const Tensor &output() const { return output_; }
    const Tensor &grad_input() const { return grad_input_; }

protected:
    void require_forward_done(const Tensor &input) const {
        if (!forward_done_)
            throw ModuleError(name() + ": backward called before forward");
        if (input.shape() != last_input_shape_)
            throw ModuleError(name() + ": backward input shape " + shape_to_string(input.shape()) +
                              " differs from last forward " + shape_to_string(last_input_shape_));
    }

    void note_forward(const Tensor &input) {
        forward_done_ = true;
        last_input_shape_ = input.shape();
    }

    Tensor output_;
    Tensor grad_input_;

private:
    bool forward_done_ = false;
    Shape last_input_shape_;
};

// Flat 1-D aliasing view over every parameter (or gradient) of a network.
class FlatView {
public:
    explicit FlatView(std::vector<Tensor *> tensors) : tensors_(std::move(tensors)) {
        for (auto *t : tensors_) size_ += t->numel();
    }

    std::size_t size() const { return size_; }

    double &operator[](std::size_t i) {
        for (auto *t : tensors_) {
            if (i < t->numel()) return (*t)[i];
            i -= t->numel();
        }
        throw TensorError("FlatView: index out of range");
    }

    double get(std::size_t i) const { return const_cast<FlatView &>(*this)[i]; }

    std::vector<double> to_vector() const {
        std::vector<double> v;
        v.reserve(size_);
        for (auto *t : tensors_) v.insert(v.end(), t->data().begin(), t->data().end());
        return v;
    }

    double inf_norm() const {
        double m = 0.0;
        for (auto *t : tensors_) m = std::max(m, t->inf_norm());
        return m;
    }

    const std::vector<Tensor *> &tensors() const { return tensors_; }

private:
    std::vector<Tensor *> tensors_;
    std::size_t size_ = 0;
};

inline std::pair<FlatView, FlatView> get_parameters(Module &m) {
    std::vector<Tensor *> ps, gs;
    m.collect_parameters(ps, gs);
    return {FlatView(std::move(ps)), FlatView(std::move(gs))};
}

// y = x * W^T + b, W is [out x in], rows are samples.
class LinearLayer : public Module {
public:
    LinearLayer(std::size_t in_features, std::size_t out_features)
        : W(Shape{out_features, in_features}), b(Shape{out_features}),
          gradW(Shape{out_features, in_features}), gradb(Shape{out_features}) {}

    static LinearLayer with_uniform_init(std::size_t in, std::size_t out, double lo, double hi,
                                         Rng &rng) {
        LinearLayer l(in, out);
        l.W = rand_uniform(Shape{out, in}, lo, hi, rng);
        return l;
    }

    std::size_t in_features() const { return W.extent(1); }
    std::size_t out_features() const { return W.extent(0); }

    Tensor forward(const Tensor &input) override {
        if (input.rank() != 2 || input.extent(1) != in_features())
            throw ModuleError("Linear: input " + shape_to_string(input.shape()) +
                              " incompatible with weights " + shape_to_string(W.shape()));
        output_ = matmul(input, transpose(W));
        const std::size_t batch = output_.extent(0), out = out_features();
        for (std::size_t i = 0; i < batch; ++i)
            for (std::size_t j = 0; j < out; ++j) output_(i, j) += b[j];
        note_forward(input);
        return output_;
    }

    Tensor backward(const Tensor &input, const Tensor &grad_output) override {
        require_forward_done(input);
        grad_output.check_same_shape(output_, "Linear backward");
        // gradW += gout^T * input ; gradb += column-sum(gout)
        Tensor gw = matmul(transpose(grad_output), input);
        axpy_update(gradW, 1.0, gw);
        for (std::size_t i = 0; i < grad_output.extent(0); ++i)
            for (std::size_t j = 0; j < grad_output.extent(1); ++j) gradb[j] += grad_output(i, j);
        grad_input_ = matmul(grad_output, W);
        return grad_input_;
    }

    void zero_grad_parameters() override {
        gradW.fill(0.0);
        gradb.fill(0.0);
    }

    void update_parameters(double lr) override {
        axpy_update(W, -lr, gradW);
        axpy_update(b, -lr, gradb);
    }

    void collect_parameters(std::vector<Tensor *> &params, std::vector<Tensor *> &grads) override {
        params.push_back(&W);
        params.push_back(&b);
        grads.push_back(&gradW);
        grads.push_back(&gradb);
    }

    std::string name() const override { return "Linear"; }

    Tensor W, b, gradW, gradb;
};

enum class Activation { Tanh, Sigmoid, ReLU, Softmax, HardLim, Identity };

inline const char *activation_name(Activation a) {
    switch (a) {
        case Activation::Tanh: return "Tanh";
        case Activation::Sigmoid: return "Sigmoid";
        case Activation::ReLU: return "ReLU";
        case Activation::Softmax: return "Softmax";
        case Activation::HardLim: return "HardLim";
        case Activation::Identity: return "Identity";
    }
    return "?";
}

// Parameter-free, shape-preserving. Softmax is per row with max-subtraction.
// HardLim steps at 0 (closed on the right) and backpropagates zeros: it is
// used only in exact constructions, never trained.
class ActivationLayer : public Module {
public:
    explicit ActivationLayer(Activation kind) : kind_(kind) {}

    Activation kind() const { return kind_; }

    Tensor forward(const Tensor &input) override {
        switch (kind_) {
            case Activation::Tanh:
                output_ = input.map([](double x) { return std::tanh(x); });
                break;
            case Activation::Sigmoid:
                output_ = input.map([](double x) { return 1.0 / (1.0 + std::exp(-x)); });
                break;
            case Activation::ReLU:
                output_ = input.map([](double x) { return x > 0.0 ? x : 0.0; });
                break;
            case Activation::HardLim:
                output_ = input.map([](double x) { return x >= 0.0 ? 1.0 : 0.0; });
                break;
            case Activation::Identity:
                output_ = input;
                break;
            case Activation::Softmax: {
                if (input.rank() != 2) throw ModuleError("Softmax: expected rank-2 input");
                output_ = input;
                const std::size_t rows = input.extent(0), cols = input.extent(1);
                for (std::size_t i = 0; i < rows; ++i) {
                    double mx = input(i, 0);
                    for (std::size_t j = 1; j < cols; ++j) mx = std::max(mx, input(i, j));
                    double denom = 0.0;
                    for (std::size_t j = 0; j < cols; ++j) {
                        output_(i, j) = std::exp(input(i, j) - mx);
                        denom += output_(i, j);
                    }
                    for (std::size_t j = 0; j < cols; ++j) output_(i, j) /= denom;
                }
                break;
            }
        }
        note_forward(input);
        return output_;
    }

    Tensor backward(const Tensor &input, const Tensor &grad_output) override {
        require_forward_done(input);
        grad_output.check_same_shape(output_, "Activation backward");
        grad_input_ = Tensor(input.shape());
        switch (kind_) {
            case Activation::Tanh:
                for (std::size_t i = 0; i < input.numel(); ++i)
                    grad_input_[i] = grad_output[i] * (1.0 - output_[i] * output_[i]);
                break;
            case Activation::Sigmoid:
                for (std::size_t i = 0; i < input.numel(); ++i)
                    grad_input_[i] = grad_output[i] * output_[i] * (1.0 - output_[i]);
                break;
            case Activation::ReLU:
                for (std::size_t i = 0; i < input.numel(); ++i)
                    grad_input_[i] = input[i] > 0.0 ? grad_output[i] : 0.0;
                break;
            case Activation::HardLim:
                // zero a.e.; constructions are frozen, see class comment
                break;
            case Activation::Identity:
                grad_input_ = grad_output;
                break;
            case Activation::Softmax: {
                // g_in = y * (g_out - <g_out, y>) per row
                const std::size_t rows = input.extent(0), cols = input.extent(1);
                for (std::size_t i = 0; i < rows; ++i) {
                    double dotv = 0.0;
                    for (std::size_t j = 0; j < cols; ++j) dotv += grad_output(i, j) * output_(i, j);
                    for (std::size_t j = 0; j < cols; ++j)
                        grad_input_(i, j) = output_(i, j) * (grad_output(i, j) - dotv);
                }
                break;
            }
        }
        return grad_input_;
    }

    std::string name() const override { return activation_name(kind_); }

private:
    Activation kind_;
};

// Feed-forward container; backward chains children in exact reverse order.
class Sequential : public Module {
public:
    Sequential() = default;

    Sequential &add(std::unique_ptr<Module> m) {
        children_.push_back(std::move(m));
        return *this;
    }

    template <typename M, typename... Args>
    Sequential &emplace(Args &&...args) {
        children_.push_back(std::make_unique<M>(std::forward<Args>(args)...));
        return *this;
    }

    std::size_t size() const { return children_.size(); }
    Module &child(std::size_t i) { return *children_.at(i); }

    Tensor forward(const Tensor &input) override {
        inputs_.clear();
        inputs_.push_back(input);
        Tensor x = input;
        for (std::size_t i = 0; i < children_.size(); ++i) {
            try {
                x = children_[i]->forward(x);
            } catch (const std::exception &e) {
                throw ModuleError("layer " + std::to_string(i) + ": " + e.what());
            }
            inputs_.push_back(x);
        }
        output_ = x;
        note_forward(input);
        return output_;
    }

    Tensor backward(const Tensor &input, const Tensor &grad_output) override {
        require_forward_done(input);
        Tensor g = grad_output;
        for (std::size_t i = children_.size(); i-- > 0;)
            g = children_[i]->backward(inputs_[i], g);
        grad_input_ = g;
        return grad_input_;
    }

    void zero_grad_parameters() override {
        for (auto &c : children_) c->zero_grad_parameters();
    }

    void update_parameters(double lr) override {
        for (auto &c : children_) c->update_parameters(lr);
    }

    void collect_parameters(std::vector<Tensor *> &params, std::vector<Tensor *> &grads) override {
        for (auto &c : children_) c->collect_parameters(params, grads);
    }

    std::string name() const override { return "Sequential"; }

protected:
    std::vector<std::unique_ptr<Module>> children_;
    std::vector<Tensor> inputs_; // input of child i at index i
};

// Sequential with an L2 penalty (alpha/2)*||p||^2 and the matching
// p <- p - lr*(grad + alpha*p) update. alpha = 0 degenerates to the parent.
class WeightDecayWrapper : public Sequential {
public:
    double weight_decay_penalty(double alpha) {
        if (alpha < 0.0) throw ModuleError("weight decay: alpha must be >= 0");
        double penalty = 0.0;
        std::vector<Tensor *> ps, gs;
        collect_parameters(ps, gs);
        for (auto *p : ps) penalty += p->dot(*p) * alpha / 2.0;
        weight_decay_ = penalty;
        return weight_decay_;
    }

    void update_parameters_decayed(double lr, double alpha) {
        if (alpha < 0.0) throw ModuleError("weight decay: alpha must be >= 0");
        std::vector<Tensor *> ps, gs;
        collect_parameters(ps, gs);
        for (std::size_t i = 0; i < ps.size(); ++i) {
            Tensor step = *gs[i];
            axpy_update(step, alpha, *ps[i]);
            axpy_update(*ps[i], -lr, step);
        }
    }

    double last_weight_decay() const { return weight_decay_; }

    std::string name() const override { return "WeightDecayWrapper"; }

private:
    double weight_decay_ = 0.0;
};

// The one permitted broadcast: add a length-C row vector to every row.
inline Tensor bias_add_rows(const Tensor &x, const Tensor &bias) {
    if (x.rank() != 2 || bias.rank() != 1 || bias.extent(0) != x.extent(1))
        throw TensorError("bias_add_rows: incompatible shapes " + shape_to_string(x.shape()) +
                          " and " + shape_to_string(bias.shape()));
    Tensor out = x;
    for (std::size_t i = 0; i < x.extent(0); ++i)
        for (std::size_t j = 0; j < x.extent(1); ++j) out(i, j) += bias[j];
    return out;
}

} // namespace nnkit
