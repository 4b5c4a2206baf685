#pragma once

// Named experiment presets. Every hyperparameter of a replication lives
// here, so CLI flags and the reference configurations cannot drift apart.

#include <memory>
#include <string>

#include "conv.hpp"
#include "criterion.hpp"
#include "module.hpp"
#include "train.hpp"

namespace nnkit::presets {

// 2-in, H-hidden, 1-out MLP; weights uniform in [-1,1], biases zero.
inline std::unique_ptr<Sequential> xor_net(std::size_t hidden, Activation hidden_act,
                                           Activation out_act, Rng &rng) {
    auto net = std::make_unique<Sequential>();
    net->add(std::make_unique<LinearLayer>(
        LinearLayer::with_uniform_init(2, hidden, -1.0, 1.0, rng)));
    net->add(std::make_unique<ActivationLayer>(hidden_act));
    net->add(std::make_unique<LinearLayer>(
        LinearLayer::with_uniform_init(hidden, 1, -1.0, 1.0, rng)));
    net->add(std::make_unique<ActivationLayer>(out_act));
    return net;
}

struct XorPreset {
    std::size_t hidden;
    Activation hidden_act, out_act;
    Reduction loss_reduction;
    TrainOptions opts;
    XorEncoding encoding;
};

// 2 tanh hidden units, linear output, MSE, lr 0.05, 1000 epochs, full batch,
// +/-0.5 encoding
inline XorPreset torch_xor_preset(std::uint64_t seed = 0) {
    XorPreset p{2, Activation::Tanh, Activation::Identity, Reduction::Mean, {}, XorEncoding::Shifted};
    p.opts.nepochs = 1000;
    p.opts.learning_rate = 0.05;
    p.opts.batch_size = 4;
    p.opts.target_mode = TargetMode::Regression;
    p.opts.grad_inf_norm_floor = 0.0; // run the full budget
    p.opts.seed = seed;
    return p;
}

// 3 sigmoid hidden units, sigmoid output, sum-squared loss, lr 0.1,
// 5000 epochs, full batch, 0/1 encoding
inline XorPreset tf_xor_preset(std::uint64_t seed = 0) {
    XorPreset p{3, Activation::Sigmoid, Activation::Sigmoid, Reduction::Sum, {}, XorEncoding::ZeroOne};
    p.opts.nepochs = 5000;
    p.opts.learning_rate = 0.1;
    p.opts.batch_size = 4;
    p.opts.target_mode = TargetMode::Regression;
    p.opts.grad_inf_norm_floor = 0.0;
    p.opts.seed = seed;
    return p;
}

// 784 -> hidden (ReLU) -> 10 logits; weights and biases uniform(-0.1, 0.1).
// literal_softmax reproduces the published composition that feeds an
// in-network softmax into a cross-entropy that re-applies log-softmax.
inline std::unique_ptr<WeightDecayWrapper> mnist_mlp(std::size_t hidden, Rng &rng,
                                                     bool literal_softmax = false) {
    auto net = std::make_unique<WeightDecayWrapper>();
    auto l1 = std::make_unique<LinearLayer>(784, hidden);
    l1->W = rand_uniform(l1->W.shape(), -0.1, 0.1, rng);
    l1->b = rand_uniform(l1->b.shape(), -0.1, 0.1, rng);
    net->add(std::move(l1));
    net->add(std::make_unique<ActivationLayer>(Activation::ReLU));
    auto l2 = std::make_unique<LinearLayer>(hidden, 10);
    l2->W = rand_uniform(l2->W.shape(), -0.1, 0.1, rng);
    l2->b = rand_uniform(l2->b.shape(), -0.1, 0.1, rng);
    net->add(std::move(l2));
    if (literal_softmax) net->add(std::make_unique<ActivationLayer>(Activation::Softmax));
    return net;
}

// Torch-style reference options for the MNIST MLP run
inline TrainOptions mnist_mlp_options(std::uint64_t seed = 0) {
    TrainOptions o;
    o.nepochs = 250;
    o.batch_size = 64;
    o.learning_rate = 0.05;
    o.patience = 50;
    o.scheme = BatchScheme::TorchSplit;
    o.target_mode = TargetMode::Indices;
    o.seed = seed;
    return o;
}

enum class CnnArch { Figure, HalfRes, TfSame };

inline const char *cnn_arch_name(CnnArch a) {
    switch (a) {
        case CnnArch::Figure: return "figure";
        case CnnArch::HalfRes: return "half-res";
        case CnnArch::TfSame: return "tf-same";
    }
    return "?";
}

// All three nets emit 10 logits; pair with SoftmaxCrossEntropyCriterion.
inline std::unique_ptr<Sequential> mnist_cnn(CnnArch arch, Rng &rng) {
    auto net = std::make_unique<Sequential>();
    auto conv = [&](std::size_t ic, std::size_t oc, std::size_t k, PadSpec pad) {
        auto c = std::make_unique<Conv2D>(ic, oc, k, k, 1, 1, pad);
        c->init_truncated_normal(0.1, 0.1, rng);
        return c;
    };
    auto linear = [&](std::size_t in, std::size_t out) {
        auto l = std::make_unique<LinearLayer>(in, out);
        l->W = rand_truncated_normal(l->W.shape(), 0.1, rng);
        l->b.fill(0.1);
        return l;
    };

    switch (arch) {
        case CnnArch::Figure:
            // 28 -> 28 -> 14 -> 14 -> 7, flatten 7*7*16
            net->add(conv(1, 12, 5, PadSpec::Explicit(2, 2)));
            net->add(std::make_unique<ActivationLayer>(Activation::ReLU));
            net->add(std::make_unique<Pool2D>(PoolKind::Max, 2, 2, 2, 2));
            net->add(conv(12, 16, 3, PadSpec::Explicit(1, 1)));
            net->add(std::make_unique<ActivationLayer>(Activation::ReLU));
            net->add(std::make_unique<Pool2D>(PoolKind::Max, 2, 2, 2, 2));
            net->add(std::make_unique<FlattenLayer>(7 * 7 * 16));
            net->add(linear(7 * 7 * 16, 256));
            net->add(std::make_unique<ActivationLayer>(Activation::ReLU));
            net->add(linear(256, 10));
            break;
        case CnnArch::HalfRes:
            // input pooled to 14x14 first, then 14 -> 14 -> 7, flatten 7*7*16
            net->add(std::make_unique<Pool2D>(PoolKind::Max, 2, 2, 2, 2));
            net->add(conv(1, 12, 5, PadSpec::Explicit(2, 2)));
            net->add(std::make_unique<ActivationLayer>(Activation::ReLU));
            net->add(std::make_unique<Pool2D>(PoolKind::Max, 2, 2, 2, 2));
            net->add(conv(12, 16, 3, PadSpec::Explicit(1, 1)));
            net->add(std::make_unique<ActivationLayer>(Activation::ReLU));
            net->add(std::make_unique<FlattenLayer>(7 * 7 * 16));
            net->add(linear(7 * 7 * 16, 256));
            net->add(std::make_unique<ActivationLayer>(Activation::ReLU));
            net->add(linear(256, 10));
            break;
        case CnnArch::TfSame:
            // SAME padding, 3x3 stride-3 pooling: 28 -> 10 -> 4, flatten 256
            net->add(conv(1, 12, 5, PadSpec::Same()));
            net->add(std::make_unique<ActivationLayer>(Activation::ReLU));
            net->add(std::make_unique<Pool2D>(PoolKind::Max, 3, 3, 3, 3, PadSpec::Same()));
            net->add(conv(12, 16, 5, PadSpec::Same()));
            net->add(std::make_unique<ActivationLayer>(Activation::ReLU));
            net->add(std::make_unique<Pool2D>(PoolKind::Max, 3, 3, 3, 3, PadSpec::Same()));
            net->add(std::make_unique<FlattenLayer>(4 * 4 * 16));
            net->add(linear(4 * 4 * 16, 1024));
            net->add(std::make_unique<ActivationLayer>(Activation::ReLU));
            net->add(linear(1024, 10));
            break;
    }
    return net;
}

inline TrainOptions mnist_cnn_options(CnnArch arch, std::uint64_t seed = 0) {
    TrainOptions o;
    o.seed = seed;
    switch (arch) {
        case CnnArch::Figure:
        case CnnArch::HalfRes:
            // sgdm defaults: momentum 0.9, lr 0.01, L2 1e-4, batch 128, 30 epochs
            o.optimizer = OptimizerKind::SgdMomentum;
            o.momentum = 0.9;
            o.learning_rate = 0.01;
            o.weight_decay_alpha = 2e-4; // (alpha/2)||p||^2 with alpha=2e-4 is 1e-4*||p||^2
            o.batch_size = 128;
            o.nepochs = 30;
            o.patience = 6;
            break;
        case CnnArch::TfSame:
            o.optimizer = OptimizerKind::Adam;
            o.learning_rate = 1e-4;
            o.batch_size = 1000;
            o.nepochs = 100;
            o.patience = 6;
            o.scheme = BatchScheme::TfNextBatch;
            break;
    }
    return o;
}

// Output shape of every child for a [1 x c x h x w] probe (weights untouched).
inline std::vector<Shape> shape_trace(Sequential &net, std::size_t channels, std::size_t h,
                                      std::size_t w) {
    Tensor x(Shape{1, channels, h, w});
    std::vector<Shape> shapes;
    for (std::size_t i = 0; i < net.size(); ++i) {
        x = net.child(i).forward(x);
        shapes.push_back(x.shape());
    }
    return shapes;
}

// Benchmark MLP shapes from the timing table: 784 -> 1000 -> 10 and the
// 4-layer 784 -> 300 -> 300 -> 300 -> 10
inline std::unique_ptr<Sequential> bench_mlp(const std::vector<std::size_t> &hidden, Rng &rng) {
    auto net = std::make_unique<Sequential>();
    std::size_t in = 784;
    for (auto h : hidden) {
        auto l = std::make_unique<LinearLayer>(in, h);
        l->W = rand_uniform(l->W.shape(), -0.1, 0.1, rng);
        net->add(std::move(l));
        net->add(std::make_unique<ActivationLayer>(Activation::ReLU));
        in = h;
    }
    auto out = std::make_unique<LinearLayer>(in, 10);
    out->W = rand_uniform(out->W.shape(), -0.1, 0.1, rng);
    net->add(std::move(out));
    return net;
}

} // namespace nnkit::presets
