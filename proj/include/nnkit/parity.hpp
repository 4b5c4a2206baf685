#pragma once

// Exact-weight constructions of n-ary parity networks.
//
// Deep net: parity is folded one bit at a time, XOR(state, bit), using
// 3 neurons per fold (two one-sided ANDs plus an OR), so 3(n-1) neurons in
// 2(n-1) layers. Shallow net: one hidden unit per odd-parity pattern plus
// an OR output, 2^(n-1)+1 neurons in 2 layers. All activations are the
// Heaviside step (hardlim); the nets are exact on boolean inputs and frozen
// (hardlim has zero gradient).

#include <optional>
#include <vector>

#include "module.hpp"
#include "tensor.hpp"

namespace nnkit {

struct ParityBlock {
    LinearLayer pair;     // 2 units over (state, bit)
    LinearLayer combine;  // 1 unit, OR of the pair
    ParityBlock() : pair(2, 2), combine(2, 1) {}
};

// Plain Sequential cannot route later input bits into deeper layers, so the
// deep net is its own composite: block k consumes (parity of bits 0..k,
// bit k+1).
class DeepParityNet {
public:
    explicit DeepParityNet(std::size_t n) : n_(n), hardlim_(Activation::HardLim) {
        if (n < 2) throw ModuleError("DeepParityNet: n must be >= 2");
        blocks_.resize(n - 1);
        for (auto &blk : blocks_) {
            // pair units: z AND NOT x, NOT z AND x
            blk.pair.W = Tensor(Shape{2, 2}, {1, -1, -1, 1});
            blk.pair.b = Tensor(Shape{2}, {-0.5, -0.5});
            // combine unit: OR
            blk.combine.W = Tensor(Shape{1, 2}, {1, 1});
            blk.combine.b = Tensor(Shape{1}, {-0.5});
        }
    }

    std::size_t arity() const { return n_; }
    std::size_t neuron_count() const { return 3 * (n_ - 1); }
    std::size_t layer_count() const { return 2 * (n_ - 1); }

    // input: [batch x n] booleans; output: [batch x 1] in {0,1}
    Tensor forward(const Tensor &input) {
        if (input.rank() != 2 || input.extent(1) != n_)
            throw ModuleError("DeepParityNet: input " + shape_to_string(input.shape()) +
                              " expected [Bx" + std::to_string(n_) + "]");
        const std::size_t batch = input.extent(0);
        // state starts as bit 0
        Tensor state(Shape{batch, 1});
        for (std::size_t i = 0; i < batch; ++i) state(i, 0) = input(i, 0);
        for (std::size_t k = 0; k < blocks_.size(); ++k) {
            Tensor pair_in(Shape{batch, 2});
            for (std::size_t i = 0; i < batch; ++i) {
                pair_in(i, 0) = state(i, 0);
                pair_in(i, 1) = input(i, k + 1);
            }
            Tensor h = hardlim_.forward(blocks_[k].pair.forward(pair_in));
            state = hardlim_.forward(blocks_[k].combine.forward(h));
        }
        return state;
    }

    // parity of the first k+1 bits, i.e. the combine output after block k
    Tensor forward_prefix(const Tensor &input, std::size_t upto_block) {
        if (upto_block >= blocks_.size()) throw ModuleError("DeepParityNet: block out of range");
        const std::size_t batch = input.extent(0);
        Tensor state(Shape{batch, 1});
        for (std::size_t i = 0; i < batch; ++i) state(i, 0) = input(i, 0);
        for (std::size_t k = 0; k <= upto_block; ++k) {
            Tensor pair_in(Shape{batch, 2});
            for (std::size_t i = 0; i < batch; ++i) {
                pair_in(i, 0) = state(i, 0);
                pair_in(i, 1) = input(i, k + 1);
            }
            Tensor h = hardlim_.forward(blocks_[k].pair.forward(pair_in));
            state = hardlim_.forward(blocks_[k].combine.forward(h));
        }
        return state;
    }

    std::vector<ParityBlock> &blocks() { return blocks_; }
    const std::vector<ParityBlock> &blocks() const { return blocks_; }

private:
    std::size_t n_;
    std::vector<ParityBlock> blocks_;
    ActivationLayer hardlim_;
};

class ShallowParityNet {
public:
    explicit ShallowParityNet(std::size_t n)
        : n_(n), hidden_(n, std::size_t{1} << (n - 1)), out_(std::size_t{1} << (n - 1), 1),
          hardlim_(Activation::HardLim) {
        if (n < 2) throw ModuleError("ShallowParityNet: n must be >= 2");
        const std::size_t H = std::size_t{1} << (n - 1);
        // one hidden unit per odd-parity pattern p: weights +1 where p_i = 1
        // else -1, bias 0.5 - |p|; fires iff the boolean input equals p
        std::size_t row = 0;
        for (std::size_t v = 0; v < (std::size_t{1} << n); ++v) {
            std::size_t ones = 0;
            for (std::size_t bit = 0; bit < n; ++bit) ones += (v >> bit) & 1u;
            if (ones % 2 == 0) continue;
            for (std::size_t bit = 0; bit < n; ++bit)
                hidden_.W(row, bit) = ((v >> bit) & 1u) ? 1.0 : -1.0;
            hidden_.b[row] = 0.5 - double(ones);
            ++row;
        }
        // output unit: OR of all hidden units
        for (std::size_t j = 0; j < H; ++j) out_.W(0, j) = 1.0;
        out_.b[0] = -0.5;
    }

    std::size_t arity() const { return n_; }
    std::size_t hidden_count() const { return std::size_t{1} << (n_ - 1); }
    std::size_t neuron_count() const { return hidden_count() + 1; }
    std::size_t layer_count() const { return 2; }

    Tensor forward(const Tensor &input) {
        Tensor h = hardlim_.forward(hidden_.forward(input));
        return hardlim_.forward(out_.forward(h));
    }

    Tensor hidden_activations(const Tensor &input) {
        return hardlim_.forward(hidden_.forward(input));
    }

    LinearLayer &hidden() { return hidden_; }
    LinearLayer &out() { return out_; }

private:
    std::size_t n_;
    LinearLayer hidden_, out_;
    ActivationLayer hardlim_;
};

struct TruthTableResult {
    double accuracy = 0.0;
    std::optional<std::vector<std::size_t>> first_failure; // input bits
};

// Evaluates all 2^n boolean inputs against the parity oracle.
template <typename Net>
TruthTableResult verify_truth_table(Net &net, std::size_t n) {
    const std::size_t total = std::size_t{1} << n;
    TruthTableResult res;
    std::size_t correct = 0;
    for (std::size_t v = 0; v < total; ++v) {
        Tensor input(Shape{1, n});
        std::size_t ones = 0;
        for (std::size_t bit = 0; bit < n; ++bit) {
            std::size_t b = (v >> bit) & 1u;
            input(0, bit) = double(b);
            ones += b;
        }
        double expected = ones % 2 ? 1.0 : 0.0;
        double got = net.forward(input)[0];
        if (got == expected) {
            ++correct;
        } else if (!res.first_failure) {
            std::vector<std::size_t> bits(n);
            for (std::size_t bit = 0; bit < n; ++bit) bits[bit] = (v >> bit) & 1u;
            res.first_failure = bits;
        }
    }
    res.accuracy = double(correct) / double(total);
    return res;
}

} // namespace nnkit
