#pragma once

// 2-D convolution (cross-correlation, no kernel flip), pooling, dropout and
// flatten. Layout is [batch x channels x height x width].
//
// Padding regimes:
//   explicit (ph,pw): output extent = floor((in + 2p - k)/s) + 1
//   SAME: output extent = ceil(in/s); extra padding goes bottom/right
// Max-pool ignores padding cells; average-pool divides by the count of real
// cells under the window.

#include <limits>
#include <optional>

#include "module.hpp"
#include "tensor.hpp"

namespace nnkit {

struct PadSpec {
    bool same = false;
    std::size_t ph = 0, pw = 0;

    static PadSpec Same() { return {true, 0, 0}; }
    static PadSpec Explicit(std::size_t ph, std::size_t pw) { return {false, ph, pw}; }
};

struct ConvGeom {
    std::size_t out_h, out_w;
    // padding applied before (top/left) the window origin
    std::size_t pad_top, pad_left;
};

inline ConvGeom conv_output_shape(std::size_t in_h, std::size_t in_w, std::size_t kh,
                                  std::size_t kw, std::size_t sh, std::size_t sw,
                                  const PadSpec &pad) {
    ConvGeom g{};
    if (pad.same) {
        g.out_h = (in_h + sh - 1) / sh;
        g.out_w = (in_w + sw - 1) / sw;
        std::size_t need_h = (g.out_h - 1) * sh + kh;
        std::size_t need_w = (g.out_w - 1) * sw + kw;
        std::size_t total_h = need_h > in_h ? need_h - in_h : 0;
        std::size_t total_w = need_w > in_w ? need_w - in_w : 0;
        g.pad_top = total_h / 2; // remainder lands bottom/right
        g.pad_left = total_w / 2;
    } else {
        std::size_t eff_h = in_h + 2 * pad.ph, eff_w = in_w + 2 * pad.pw;
        if (eff_h < kh || eff_w < kw)
            throw ModuleError("conv_output_shape: window " + std::to_string(kh) + "x" +
                              std::to_string(kw) + " exceeds padded input " + std::to_string(eff_h) +
                              "x" + std::to_string(eff_w));
        g.out_h = (eff_h - kh) / sh + 1;
        g.out_w = (eff_w - kw) / sw + 1;
        g.pad_top = pad.ph;
        g.pad_left = pad.pw;
    }
    if (g.out_h == 0 || g.out_w == 0) throw ModuleError("conv_output_shape: non-positive output");
    return g;
}

// W is [out_ch x in_ch x kh x kw]. Forward lowers to a patch-matrix
// multiplication; the accumulation order over (c, kh, kw) matches the naive
// quadruple loop, so both routes agree bit-for-bit.
class Conv2D : public Module {
public:
    Conv2D(std::size_t in_ch, std::size_t out_ch, std::size_t kh, std::size_t kw, std::size_t sh,
           std::size_t sw, PadSpec pad)
        : in_ch_(in_ch), out_ch_(out_ch), kh_(kh), kw_(kw), sh_(sh), sw_(sw), pad_(pad),
          W(Shape{out_ch, in_ch, kh, kw}), b(Shape{out_ch}),
          gradW(Shape{out_ch, in_ch, kh, kw}), gradb(Shape{out_ch}) {}

    // TF-style default init: truncated normal weights, constant biases
    void init_truncated_normal(double sigma, double bias_value, Rng &rng) {
        W = rand_truncated_normal(W.shape(), sigma, rng);
        b.fill(bias_value);
    }

    Tensor forward(const Tensor &input) override {
        check_input(input);
        const std::size_t batch = input.extent(0), in_h = input.extent(2), in_w = input.extent(3);
        geom_ = conv_output_shape(in_h, in_w, kh_, kw_, sh_, sw_, pad_);
        const std::size_t oh = geom_.out_h, ow = geom_.out_w;
        const std::size_t patch = in_ch_ * kh_ * kw_;

        patches_ = Tensor(Shape{batch * oh * ow, patch});
        fill_patches(input, patches_);

        // weight matrix [patch x out_ch], aligned with patch column order
        Tensor wm(Shape{patch, out_ch_});
        for (std::size_t o = 0; o < out_ch_; ++o)
            for (std::size_t p = 0; p < patch; ++p) wm(p, o) = W[o * patch + p];

        Tensor prod = matmul(patches_, wm); // [batch*oh*ow x out_ch]
        output_ = Tensor(Shape{batch, out_ch_, oh, ow});
        for (std::size_t n = 0; n < batch; ++n)
            for (std::size_t o = 0; o < out_ch_; ++o)
                for (std::size_t y = 0; y < oh; ++y)
                    for (std::size_t x = 0; x < ow; ++x)
                        output_[((n * out_ch_ + o) * oh + y) * ow + x] =
                            prod((n * oh + y) * ow + x, o) + b[o];
        note_forward(input);
        return output_;
    }

    Tensor backward(const Tensor &input, const Tensor &grad_output) override {
        require_forward_done(input);
        grad_output.check_same_shape(output_, "Conv2D backward");
        const std::size_t batch = input.extent(0), in_h = input.extent(2), in_w = input.extent(3);
        const std::size_t oh = geom_.out_h, ow = geom_.out_w;
        const std::size_t patch = in_ch_ * kh_ * kw_;

        // flatten grad_output as [batch*oh*ow x out_ch]
        Tensor go(Shape{batch * oh * ow, out_ch_});
        for (std::size_t n = 0; n < batch; ++n)
            for (std::size_t o = 0; o < out_ch_; ++o)
                for (std::size_t y = 0; y < oh; ++y)
                    for (std::size_t x = 0; x < ow; ++x)
                        go((n * oh + y) * ow + x, o) =
                            grad_output[((n * out_ch_ + o) * oh + y) * ow + x];

        // gradW += go^T * patches, gradb += sums
        Tensor gw = matmul(transpose(go), patches_); // [out_ch x patch]
        axpy_update(gradW, 1.0, gw.reshape(gradW.shape()));
        for (std::size_t r = 0; r < go.extent(0); ++r)
            for (std::size_t o = 0; o < out_ch_; ++o) gradb[o] += go(r, o);

        // grad_input via col2im of go * wm^T
        Tensor wm(Shape{out_ch_, patch});
        for (std::size_t o = 0; o < out_ch_; ++o)
            for (std::size_t p = 0; p < patch; ++p) wm(o, p) = W[o * patch + p];
        Tensor gpatches = matmul(go, wm); // [batch*oh*ow x patch]

        grad_input_ = Tensor(input.shape());
        for (std::size_t n = 0; n < batch; ++n)
            for (std::size_t y = 0; y < oh; ++y)
                for (std::size_t x = 0; x < ow; ++x) {
                    const std::size_t row = (n * oh + y) * ow + x;
                    std::size_t p = 0;
                    for (std::size_t c = 0; c < in_ch_; ++c)
                        for (std::size_t dy = 0; dy < kh_; ++dy)
                            for (std::size_t dx = 0; dx < kw_; ++dx, ++p) {
                                std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(y * sh_ + dy) -
                                                    static_cast<std::ptrdiff_t>(geom_.pad_top);
                                std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(x * sw_ + dx) -
                                                    static_cast<std::ptrdiff_t>(geom_.pad_left);
                                if (iy < 0 || ix < 0 || iy >= static_cast<std::ptrdiff_t>(in_h) ||
                                    ix >= static_cast<std::ptrdiff_t>(in_w))
                                    continue;
                                grad_input_[((n * in_ch_ + c) * in_h + static_cast<std::size_t>(iy)) *
                                                in_w +
                                            static_cast<std::size_t>(ix)] += gpatches(row, p);
                            }
                }
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

    std::string name() const override { return "Conv2D"; }

    std::size_t in_channels() const { return in_ch_; }
    std::size_t out_channels() const { return out_ch_; }
    std::size_t kernel_h() const { return kh_; }
    std::size_t kernel_w() const { return kw_; }
    std::size_t stride_h() const { return sh_; }
    std::size_t stride_w() const { return sw_; }
    const PadSpec &pad() const { return pad_; }

    Tensor W, b, gradW, gradb;

private:
    void check_input(const Tensor &input) const {
        if (input.rank() != 4 || input.extent(1) != in_ch_)
            throw ModuleError("Conv2D: input " + shape_to_string(input.shape()) + " expected [Bx" +
                              std::to_string(in_ch_) + "xHxW]");
    }

    void fill_patches(const Tensor &input, Tensor &patches) const {
        const std::size_t batch = input.extent(0), in_h = input.extent(2), in_w = input.extent(3);
        const std::size_t oh = geom_.out_h, ow = geom_.out_w;
        for (std::size_t n = 0; n < batch; ++n)
            for (std::size_t y = 0; y < oh; ++y)
                for (std::size_t x = 0; x < ow; ++x) {
                    const std::size_t row = (n * oh + y) * ow + x;
                    std::size_t p = 0;
                    for (std::size_t c = 0; c < in_ch_; ++c)
                        for (std::size_t dy = 0; dy < kh_; ++dy)
                            for (std::size_t dx = 0; dx < kw_; ++dx, ++p) {
                                std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(y * sh_ + dy) -
                                                    static_cast<std::ptrdiff_t>(geom_.pad_top);
                                std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(x * sw_ + dx) -
                                                    static_cast<std::ptrdiff_t>(geom_.pad_left);
                                double v = 0.0;
                                if (iy >= 0 && ix >= 0 && iy < static_cast<std::ptrdiff_t>(in_h) &&
                                    ix < static_cast<std::ptrdiff_t>(in_w))
                                    v = input[((n * in_ch_ + c) * in_h +
                                               static_cast<std::size_t>(iy)) *
                                                  in_w +
                                              static_cast<std::size_t>(ix)];
                                patches(row, p) = v;
                            }
                }
    }

    std::size_t in_ch_, out_ch_, kh_, kw_, sh_, sw_;
    PadSpec pad_;
    ConvGeom geom_{};
    Tensor patches_;
};

enum class PoolKind { Max, Average };

class Pool2D : public Module {
public:
    Pool2D(PoolKind kind, std::size_t kh, std::size_t kw, std::size_t sh, std::size_t sw,
           PadSpec pad = PadSpec::Explicit(0, 0))
        : kind_(kind), kh_(kh), kw_(kw), sh_(sh), sw_(sw), pad_(pad) {}

    Tensor forward(const Tensor &input) override {
        if (input.rank() != 4) throw ModuleError("Pool2D: expected [BxCxHxW] input");
        const std::size_t batch = input.extent(0), ch = input.extent(1);
        const std::size_t in_h = input.extent(2), in_w = input.extent(3);
        geom_ = conv_output_shape(in_h, in_w, kh_, kw_, sh_, sw_, pad_);
        const std::size_t oh = geom_.out_h, ow = geom_.out_w;

        output_ = Tensor(Shape{batch, ch, oh, ow});
        if (kind_ == PoolKind::Max) argmax_.assign(output_.numel(), 0);

        for (std::size_t n = 0; n < batch; ++n)
            for (std::size_t c = 0; c < ch; ++c)
                for (std::size_t y = 0; y < oh; ++y)
                    for (std::size_t x = 0; x < ow; ++x) {
                        double best = -std::numeric_limits<double>::infinity();
                        std::size_t best_off = 0;
                        double acc = 0.0;
                        std::size_t count = 0;
                        for (std::size_t dy = 0; dy < kh_; ++dy)
                            for (std::size_t dx = 0; dx < kw_; ++dx) {
                                std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(y * sh_ + dy) -
                                                    static_cast<std::ptrdiff_t>(geom_.pad_top);
                                std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(x * sw_ + dx) -
                                                    static_cast<std::ptrdiff_t>(geom_.pad_left);
                                if (iy < 0 || ix < 0 || iy >= static_cast<std::ptrdiff_t>(in_h) ||
                                    ix >= static_cast<std::ptrdiff_t>(in_w))
                                    continue; // padding cells are ignored
                                std::size_t off =
                                    ((n * ch + c) * in_h + static_cast<std::size_t>(iy)) * in_w +
                                    static_cast<std::size_t>(ix);
                                double v = input[off];
                                if (v > best) { // first-scan-order tie-break
                                    best = v;
                                    best_off = off;
                                }
                                acc += v;
                                ++count;
                            }
                        std::size_t out_off = ((n * ch + c) * oh + y) * ow + x;
                        if (kind_ == PoolKind::Max) {
                            output_[out_off] = best;
                            argmax_[out_off] = best_off;
                        } else {
                            output_[out_off] = acc / static_cast<double>(count);
                        }
                    }
        note_forward(input);
        return output_;
    }

    Tensor backward(const Tensor &input, const Tensor &grad_output) override {
        require_forward_done(input);
        grad_output.check_same_shape(output_, "Pool2D backward");
        grad_input_ = Tensor(input.shape());
        const std::size_t batch = input.extent(0), ch = input.extent(1);
        const std::size_t in_h = input.extent(2), in_w = input.extent(3);
        const std::size_t oh = geom_.out_h, ow = geom_.out_w;

        if (kind_ == PoolKind::Max) {
            for (std::size_t i = 0; i < grad_output.numel(); ++i)
                grad_input_[argmax_[i]] += grad_output[i];
        } else {
            for (std::size_t n = 0; n < batch; ++n)
                for (std::size_t c = 0; c < ch; ++c)
                    for (std::size_t y = 0; y < oh; ++y)
                        for (std::size_t x = 0; x < ow; ++x) {
                            // recompute the real-cell count of this window
                            std::vector<std::size_t> offs;
                            for (std::size_t dy = 0; dy < kh_; ++dy)
                                for (std::size_t dx = 0; dx < kw_; ++dx) {
                                    std::ptrdiff_t iy =
                                        static_cast<std::ptrdiff_t>(y * sh_ + dy) -
                                        static_cast<std::ptrdiff_t>(geom_.pad_top);
                                    std::ptrdiff_t ix =
                                        static_cast<std::ptrdiff_t>(x * sw_ + dx) -
                                        static_cast<std::ptrdiff_t>(geom_.pad_left);
                                    if (iy < 0 || ix < 0 ||
                                        iy >= static_cast<std::ptrdiff_t>(in_h) ||
                                        ix >= static_cast<std::ptrdiff_t>(in_w))
                                        continue;
                                    offs.push_back(((n * ch + c) * in_h +
                                                    static_cast<std::size_t>(iy)) *
                                                       in_w +
                                                   static_cast<std::size_t>(ix));
                                }
                            double g = grad_output[((n * ch + c) * oh + y) * ow + x] /
                                       static_cast<double>(offs.size());
                            for (auto off : offs) grad_input_[off] += g;
                        }
        }
        return grad_input_;
    }

    std::string name() const override {
        return kind_ == PoolKind::Max ? "MaxPool2D" : "AvgPool2D";
    }

private:
    PoolKind kind_;
    std::size_t kh_, kw_, sh_, sw_;
    PadSpec pad_;
    ConvGeom geom_{};
    std::vector<std::size_t> argmax_;
};

// Inverted dropout: train mode zeroes units with probability `rate` and
// scales survivors by 1/(1-rate); eval mode is the identity.
class DropoutLayer : public Module {
public:
    DropoutLayer(double rate, Rng *rng) : rate_(rate), rng_(rng) {
        if (rate < 0.0 || rate >= 1.0)
            throw ModuleError("Dropout: rate must be in [0,1), got " + std::to_string(rate));
    }

    void set_training(bool training) { training_ = training; }
    bool training() const { return training_; }

    Tensor forward(const Tensor &input) override {
        if (!training_ || rate_ == 0.0) {
            output_ = input;
            mask_.assign(input.numel(), 1.0);
        } else {
            const double keep_scale = 1.0 / (1.0 - rate_);
            mask_.resize(input.numel());
            output_ = input;
            for (std::size_t i = 0; i < input.numel(); ++i) {
                mask_[i] = rng_->next_double() < rate_ ? 0.0 : keep_scale;
                output_[i] *= mask_[i];
            }
        }
        note_forward(input);
        return output_;
    }

    Tensor backward(const Tensor &input, const Tensor &grad_output) override {
        require_forward_done(input);
        grad_input_ = grad_output;
        for (std::size_t i = 0; i < grad_input_.numel(); ++i) grad_input_[i] *= mask_[i];
        return grad_input_;
    }

    std::string name() const override { return "Dropout"; }

private:
    double rate_;
    Rng *rng_;
    bool training_ = true;
    std::vector<double> mask_;
};

// [B x C x H x W] -> [B x C*H*W]; the buffer is already row-major so this is
// a pure reshape.
class FlattenLayer : public Module {
public:
    explicit FlattenLayer(std::size_t target_length) : target_(target_length) {}

    Tensor forward(const Tensor &input) override {
        const std::size_t batch = input.extent(0);
        const std::size_t per = input.numel() / batch;
        if (per != target_)
            throw ModuleError("Flatten: input " + shape_to_string(input.shape()) + " has " +
                              std::to_string(per) + " features per sample, expected " +
                              std::to_string(target_));
        output_ = input.reshape(Shape{batch, target_});
        note_forward(input);
        return output_;
    }

    Tensor backward(const Tensor &input, const Tensor &grad_output) override {
        require_forward_done(input);
        grad_input_ = grad_output.reshape(input.shape());
        return grad_input_;
    }

    std::string name() const override { return "Flatten"; }

private:
    std::size_t target_;
};

} // namespace nnkit
