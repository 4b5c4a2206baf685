#include <catch2/catch_amalgamated.hpp>

#include <nnkit/conv.hpp>

#include "helpers.hpp"

using namespace nnkit;

namespace {

// Independent oracle: naive quadruple-loop cross-correlation. Accumulation
// order over (c, dy, dx) is the reference the production path must match
// bit-for-bit.
Tensor naive_conv(const Tensor &input, const Tensor &W, const Tensor &b, std::size_t sh,
                  std::size_t sw, const PadSpec &pad) {
    const std::size_t batch = input.extent(0), in_ch = input.extent(1);
    const std::size_t in_h = input.extent(2), in_w = input.extent(3);
    const std::size_t out_ch = W.extent(0), kh = W.extent(2), kw = W.extent(3);
    ConvGeom g = conv_output_shape(in_h, in_w, kh, kw, sh, sw, pad);
    Tensor out({batch, out_ch, g.out_h, g.out_w});
    for (std::size_t n = 0; n < batch; ++n)
        for (std::size_t o = 0; o < out_ch; ++o)
            for (std::size_t y = 0; y < g.out_h; ++y)
                for (std::size_t x = 0; x < g.out_w; ++x) {
                    double acc = 0.0;
                    for (std::size_t c = 0; c < in_ch; ++c)
                        for (std::size_t dy = 0; dy < kh; ++dy)
                            for (std::size_t dx = 0; dx < kw; ++dx) {
                                std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(y * sh + dy) -
                                                    static_cast<std::ptrdiff_t>(g.pad_top);
                                std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(x * sw + dx) -
                                                    static_cast<std::ptrdiff_t>(g.pad_left);
                                if (iy < 0 || ix < 0 || iy >= static_cast<std::ptrdiff_t>(in_h) ||
                                    ix >= static_cast<std::ptrdiff_t>(in_w))
                                    continue;
                                acc += input[((n * in_ch + c) * in_h +
                                              static_cast<std::size_t>(iy)) *
                                                 in_w +
                                             static_cast<std::size_t>(ix)] *
                                       W[((o * in_ch + c) * kh + dy) * kw + dx];
                            }
                    out[((n * out_ch + o) * g.out_h + y) * g.out_w + x] = acc + b[o];
                }
    return out;
}

} // namespace

TEST_CASE("conv output geometry") {
    SECTION("28x28, 5x5 valid stride 1 -> 24") {
        auto g = conv_output_shape(28, 28, 5, 5, 1, 1, PadSpec::Explicit(0, 0));
        CHECK(g.out_h == 24);
        CHECK(g.out_w == 24);
    }
    SECTION("28x28, 5x5 SAME stride 1 -> 28, pad 2") {
        auto g = conv_output_shape(28, 28, 5, 5, 1, 1, PadSpec::Same());
        CHECK(g.out_h == 28);
        CHECK(g.out_w == 28);
        CHECK(g.pad_top == 2);
        CHECK(g.pad_left == 2);
    }
    SECTION("28x28, 3x3 stride 3 SAME -> 10") {
        auto g = conv_output_shape(28, 28, 3, 3, 3, 3, PadSpec::Same());
        CHECK(g.out_h == 10);
    }
    SECTION("10x10, 3x3 stride 3 SAME -> 4") {
        auto g = conv_output_shape(10, 10, 3, 3, 3, 3, PadSpec::Same());
        CHECK(g.out_h == 4);
    }
    SECTION("28x28, 2x2 stride 2 valid -> 14") {
        auto g = conv_output_shape(28, 28, 2, 2, 2, 2, PadSpec::Explicit(0, 0));
        CHECK(g.out_h == 14);
    }
    SECTION("14x14, 2x2 stride 2 valid -> 7") {
        auto g = conv_output_shape(14, 14, 2, 2, 2, 2, PadSpec::Explicit(0, 0));
        CHECK(g.out_h == 7);
    }
    SECTION("SAME with uneven total padding puts the extra row bottom/right") {
        // in 6, k 2, s 2 -> out 3, need (3-1)*2+2 = 6, no padding at all
        auto g0 = conv_output_shape(6, 6, 2, 2, 2, 2, PadSpec::Same());
        CHECK(g0.pad_top == 0);
        // in 5, k 2, s 2 -> out 3, need 6, total pad 1, top gets 0
        auto g1 = conv_output_shape(5, 5, 2, 2, 2, 2, PadSpec::Same());
        CHECK(g1.out_h == 3);
        CHECK(g1.pad_top == 0);
    }
    SECTION("window larger than the padded input throws") {
        CHECK_THROWS_AS(conv_output_shape(2, 2, 5, 5, 1, 1, PadSpec::Explicit(0, 0)), ModuleError);
    }
}

TEST_CASE("conv forward values") {
    SECTION("all-ones kernel with SAME padding counts the real cells") {
        Conv2D conv(1, 1, 3, 3, 1, 1, PadSpec::Same());
        conv.W.fill(1.0);
        Tensor input({1, 1, 5, 5});
        input.fill(1.0);
        Tensor out = conv.forward(input);
        REQUIRE(out.shape() == Shape{1, 1, 5, 5});
        CHECK(out[2 * 5 + 2] == 9.0); // interior
        CHECK(out[0 * 5 + 2] == 6.0); // edge
        CHECK(out[0 * 5 + 0] == 4.0); // corner
    }

    SECTION("impulse response is the kernel mirrored (cross-correlation, no flip)") {
        Conv2D conv(1, 1, 3, 3, 1, 1, PadSpec::Same());
        Rng rng(5);
        conv.W = rand_uniform(conv.W.shape(), -1.0, 1.0, rng);
        Tensor input({1, 1, 7, 7});
        input[3 * 7 + 3] = 1.0; // centered impulse
        Tensor out = conv.forward(input);
        // out(y,x) = W(3-y+1, 3-x+1) around the impulse
        for (std::size_t dy = 0; dy < 3; ++dy)
            for (std::size_t dx = 0; dx < 3; ++dx)
                CHECK(out[(4 - dy) * 7 + (4 - dx)] == conv.W[dy * 3 + dx]);
    }

    SECTION("bias shifts every output cell") {
        Conv2D conv(1, 2, 2, 2, 1, 1, PadSpec::Explicit(0, 0));
        conv.b[0] = 0.25;
        conv.b[1] = -1.0;
        Tensor out = conv.forward(Tensor({1, 1, 3, 3}));
        for (std::size_t i = 0; i < 4; ++i) {
            CHECK(out[i] == 0.25);
            CHECK(out[4 + i] == -1.0);
        }
    }

    SECTION("production path equals the naive oracle bit-for-bit") {
        Rng rng(9);
        struct Case {
            std::size_t in_ch, out_ch, k, s, h;
            PadSpec pad;
        };
        for (auto cs : {Case{1, 4, 5, 1, 12, PadSpec::Explicit(0, 0)},
                        Case{3, 2, 3, 1, 9, PadSpec::Same()},
                        Case{2, 3, 3, 3, 10, PadSpec::Same()},
                        Case{2, 2, 2, 2, 8, PadSpec::Explicit(1, 1)}}) {
            Conv2D conv(cs.in_ch, cs.out_ch, cs.k, cs.k, cs.s, cs.s, cs.pad);
            conv.W = rand_uniform(conv.W.shape(), -1.0, 1.0, rng);
            conv.b = rand_uniform(conv.b.shape(), -0.5, 0.5, rng);
            Tensor input = rand_uniform({2, cs.in_ch, cs.h, cs.h}, -1.0, 1.0, rng);
            Tensor got = conv.forward(input);
            Tensor want = naive_conv(input, conv.W, conv.b, cs.s, cs.s, cs.pad);
            REQUIRE(got.shape() == want.shape());
            for (std::size_t i = 0; i < got.numel(); ++i) REQUIRE(got[i] == want[i]);
        }
    }

    SECTION("wrong channel count throws") {
        Conv2D conv(3, 1, 3, 3, 1, 1, PadSpec::Same());
        CHECK_THROWS_AS(conv.forward(Tensor({1, 2, 5, 5})), ModuleError);
    }
}

TEST_CASE("conv gradients") {
    Rng rng(15);
    SECTION("finite differences, valid padding") {
        Conv2D conv(2, 3, 3, 3, 1, 1, PadSpec::Explicit(0, 0));
        conv.W = rand_uniform(conv.W.shape(), -0.5, 0.5, rng);
        conv.b = rand_uniform(conv.b.shape(), -0.5, 0.5, rng);
        Tensor input = rand_uniform({2, 2, 5, 5}, -1.0, 1.0, rng);
        auto res = testutil::grad_check_module(conv, input);
        CHECK(res.max_rel_err < 1e-5);
    }
    SECTION("finite differences, SAME padding and stride 2") {
        Conv2D conv(1, 2, 3, 3, 2, 2, PadSpec::Same());
        conv.W = rand_uniform(conv.W.shape(), -0.5, 0.5, rng);
        conv.b = rand_uniform(conv.b.shape(), -0.5, 0.5, rng);
        Tensor input = rand_uniform({2, 1, 6, 6}, -1.0, 1.0, rng);
        auto res = testutil::grad_check_module(conv, input);
        CHECK(res.max_rel_err < 1e-5);
    }
    SECTION("gradients accumulate across backward calls") {
        Conv2D conv(1, 1, 2, 2, 1, 1, PadSpec::Explicit(0, 0));
        conv.W.fill(0.5);
        Tensor input({1, 1, 3, 3});
        input.fill(1.0);
        conv.zero_grad_parameters();
        Tensor out = conv.forward(input);
        Tensor g(out.shape());
        g.fill(1.0);
        conv.backward(input, g);
        double once = conv.gradW[0];
        conv.backward(input, g);
        CHECK(conv.gradW[0] == Catch::Approx(2.0 * once));
    }
}

TEST_CASE("pooling") {
    SECTION("2x2 max pool picks the window maximum") {
        Pool2D pool(PoolKind::Max, 2, 2, 2, 2);
        Tensor input({1, 1, 4, 4}, {1, 2, 5, 6,   //
                                    3, 4, 7, 8,   //
                                    9, 10, 13, 14, //
                                    11, 12, 15, 16});
        Tensor out = pool.forward(input);
        REQUIRE(out.shape() == Shape{1, 1, 2, 2});
        CHECK(out[0] == 4.0);
        CHECK(out[1] == 8.0);
        CHECK(out[2] == 12.0);
        CHECK(out[3] == 16.0);
    }

    SECTION("max pool backward routes the gradient to the argmax only") {
        Pool2D pool(PoolKind::Max, 2, 2, 2, 2);
        Tensor input({1, 1, 2, 2}, {1, 9, 2, 3});
        pool.forward(input);
        Tensor g({1, 1, 1, 1}, {5.0});
        Tensor gin = pool.backward(input, g);
        CHECK(gin[0] == 0.0);
        CHECK(gin[1] == 5.0);
        CHECK(gin[2] == 0.0);
        CHECK(gin[3] == 0.0);
    }

    SECTION("average pool of a constant block is the constant") {
        Pool2D pool(PoolKind::Average, 2, 2, 2, 2);
        Tensor input({1, 1, 4, 4}, 3.25);
        Tensor out = pool.forward(input);
        for (auto v : out.data()) CHECK(v == 3.25);
    }

    SECTION("SAME average pool divides edge windows by the real-cell count") {
        // 3x3 input, 2x2 window stride 2 SAME -> out 2x2; bottom/right windows
        // cover fewer real cells and must divide by that smaller count.
        Pool2D pool(PoolKind::Average, 2, 2, 2, 2, PadSpec::Same());
        Tensor input({1, 1, 3, 3}, {1, 2, 3, 4, 5, 6, 7, 8, 9});
        Tensor out = pool.forward(input);
        CHECK(out[0] == 3.0);  // (1+2+4+5)/4
        CHECK(out[1] == 4.5);  // (3+6)/2
        CHECK(out[2] == 7.5);  // (7+8)/2
        CHECK(out[3] == 9.0);  // 9/1
    }

    SECTION("SAME max pool ignores padding cells even for negative inputs") {
        Pool2D pool(PoolKind::Max, 2, 2, 2, 2, PadSpec::Same());
        Tensor input({1, 1, 3, 3}, -5.0);
        Tensor out = pool.forward(input);
        for (auto v : out.data()) CHECK(v == -5.0); // zero padding must not win
    }

    SECTION("28 -> 14 -> 7 pooling chain used by the mnist nets") {
        Pool2D pool(PoolKind::Max, 2, 2, 2, 2);
        Tensor a = pool.forward(Tensor({1, 3, 28, 28}));
        REQUIRE(a.shape() == Shape{1, 3, 14, 14});
        Tensor b = pool.forward(a);
        REQUIRE(b.shape() == Shape{1, 3, 7, 7});
    }

    SECTION("finite differences, average pool") {
        Rng rng(19);
        Pool2D pool(PoolKind::Average, 2, 2, 2, 2, PadSpec::Same());
        Tensor input = rand_uniform({2, 2, 5, 5}, -1.0, 1.0, rng);
        auto res = testutil::grad_check_module(pool, input);
        CHECK(res.max_rel_err < 1e-5);
    }

    SECTION("finite differences, max pool with distinct entries") {
        Pool2D pool(PoolKind::Max, 2, 2, 2, 2);
        Tensor input({1, 1, 4, 4});
        for (std::size_t i = 0; i < 16; ++i) input[i] = static_cast<double>(i) * 0.37 - 2.0;
        auto res = testutil::grad_check_module(pool, input);
        CHECK(res.max_rel_err < 1e-5);
    }
}

TEST_CASE("dropout") {
    SECTION("eval mode is the identity") {
        Rng rng(1);
        DropoutLayer d(0.5, &rng);
        d.set_training(false);
        Tensor x({2, 3}, {1, 2, 3, 4, 5, 6});
        Tensor out = d.forward(x);
        for (std::size_t i = 0; i < 6; ++i) CHECK(out[i] == x[i]);
    }

    SECTION("rate 0 in train mode is the identity") {
        Rng rng(1);
        DropoutLayer d(0.0, &rng);
        Tensor x({1, 4}, {1, 2, 3, 4});
        Tensor out = d.forward(x);
        for (std::size_t i = 0; i < 4; ++i) CHECK(out[i] == x[i]);
    }

    SECTION("survivors are scaled by 1/(1-rate) and the mean is preserved") {
        Rng rng(77);
        DropoutLayer d(0.5, &rng);
        const std::size_t n = 20000;
        Tensor x({1, n}, 1.0);
        Tensor out = d.forward(x);
        std::size_t kept = 0;
        double sum = 0.0;
        for (auto v : out.data()) {
            CHECK((v == 0.0 || v == 2.0));
            if (v != 0.0) ++kept;
            sum += v;
        }
        CHECK(std::abs(static_cast<double>(kept) / n - 0.5) < 0.01);
        CHECK(std::abs(sum / n - 1.0) < 0.02);
    }

    SECTION("backward applies the same mask as forward") {
        Rng rng(5);
        DropoutLayer d(0.4, &rng);
        Tensor x({1, 100}, 1.0);
        Tensor out = d.forward(x);
        Tensor g({1, 100}, 1.0);
        Tensor gin = d.backward(x, g);
        for (std::size_t i = 0; i < 100; ++i) CHECK(gin[i] == out[i]);
    }

    SECTION("rate outside [0,1) throws") {
        Rng rng(0);
        CHECK_THROWS_AS(DropoutLayer(1.0, &rng), ModuleError);
        CHECK_THROWS_AS(DropoutLayer(-0.1, &rng), ModuleError);
    }
}

TEST_CASE("flatten") {
    SECTION("7x7x16 feature map flattens to 784 per sample") {
        FlattenLayer f(784);
        Tensor input({2, 16, 7, 7});
        for (std::size_t i = 0; i < input.numel(); ++i) input[i] = static_cast<double>(i);
        Tensor out = f.forward(input);
        REQUIRE(out.shape() == Shape{2, 784});
        for (std::size_t i = 0; i < input.numel(); ++i) CHECK(out[i] == input[i]);
    }

    SECTION("wrong feature count names both sizes") {
        FlattenLayer f(256);
        CHECK_THROWS_WITH(f.forward(Tensor({1, 16, 7, 7})),
                          Catch::Matchers::ContainsSubstring("784") &&
                              Catch::Matchers::ContainsSubstring("256"));
    }

    SECTION("backward restores the 4-d shape") {
        FlattenLayer f(8);
        Tensor input({3, 2, 2, 2});
        f.forward(input);
        Tensor g({3, 8}, 1.0);
        Tensor gin = f.backward(input, g);
        CHECK(gin.shape() == input.shape());
    }
}
