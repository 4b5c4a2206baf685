#include <catch2/catch_amalgamated.hpp>

#include <nnkit/tensor.hpp>

#include "helpers.hpp"

using namespace nnkit;

TEST_CASE("matmul basics") {
    SECTION("identity leaves the operand unchanged") {
        Rng rng(1);
        Tensor a = rand_uniform({3, 4}, -2.0, 2.0, rng);
        Tensor out = matmul(Tensor::eye(3, 3), a);
        for (std::size_t i = 0; i < a.numel(); ++i) CHECK(out[i] == a[i]);
    }

    SECTION("ones(4,3) x eye(3,5): every row is [1,1,1,0,0]") {
        Tensor out = matmul(Tensor::ones({4, 3}), Tensor::eye(3, 5));
        REQUIRE(out.shape() == Shape{4, 5});
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = 0; j < 5; ++j) CHECK(out(i, j) == (j < 3 ? 1.0 : 0.0));
    }

    SECTION("parity pair weights on (1,0)") {
        Tensor w({2, 2}, {1, -1, -1, 1});
        Tensor x({2, 1}, {1, 0});
        Tensor out = matmul(w, x);
        CHECK(out[0] == 1.0);
        CHECK(out[1] == -1.0);
    }

    SECTION("shape mismatch names both shapes") {
        Tensor a({2, 3}), b({4, 2});
        CHECK_THROWS_WITH(matmul(a, b), Catch::Matchers::ContainsSubstring("(2x3)") &&
                                            Catch::Matchers::ContainsSubstring("(4x2)"));
    }
}

TEST_CASE("matmul properties") {
    Rng rng(42);
    SECTION("associativity on random 3-chains") {
        for (int trial = 0; trial < 20; ++trial) {
            std::size_t m = 1 + rng.next_u64() % 5, k = 1 + rng.next_u64() % 5;
            std::size_t l = 1 + rng.next_u64() % 5, n = 1 + rng.next_u64() % 5;
            Tensor a = rand_uniform({m, k}, -1.0, 1.0, rng);
            Tensor b = rand_uniform({k, l}, -1.0, 1.0, rng);
            Tensor c = rand_uniform({l, n}, -1.0, 1.0, rng);
            Tensor left = matmul(matmul(a, b), c);
            Tensor right = matmul(a, matmul(b, c));
            for (std::size_t i = 0; i < left.numel(); ++i)
                CHECK(testutil::rel_err(left[i], right[i]) < 1e-9);
        }
    }

    SECTION("(AB)^T == B^T A^T") {
        for (int trial = 0; trial < 20; ++trial) {
            std::size_t m = 1 + rng.next_u64() % 6, k = 1 + rng.next_u64() % 6,
                        n = 1 + rng.next_u64() % 6;
            Tensor a = rand_uniform({m, k}, -1.0, 1.0, rng);
            Tensor b = rand_uniform({k, n}, -1.0, 1.0, rng);
            Tensor lhs = transpose(matmul(a, b));
            Tensor rhs = matmul(transpose(b), transpose(a));
            for (std::size_t i = 0; i < lhs.numel(); ++i)
                CHECK(std::abs(lhs[i] - rhs[i]) < 1e-12);
        }
    }
}

TEST_CASE("rand_uniform") {
    SECTION("range and determinism") {
        Rng rng(3);
        Tensor t = rand_uniform({2, 3}, -1.0, 1.0, rng);
        for (auto v : t.data()) {
            CHECK(v >= -1.0);
            CHECK(v < 1.0);
        }
        Tensor big = rand_uniform({300}, -0.1, 0.1, rng);
        for (auto v : big.data()) {
            CHECK(v >= -0.1);
            CHECK(v < 0.1);
        }
    }

    SECTION("same seed gives a bit-identical stream") {
        Rng a(99), b(99);
        Tensor ta = rand_uniform({50}, 0.0, 1.0, a);
        Tensor tb = rand_uniform({50}, 0.0, 1.0, b);
        for (std::size_t i = 0; i < 50; ++i) CHECK(ta[i] == tb[i]);
    }

    SECTION("lo >= hi is an error") {
        Rng rng(0);
        CHECK_THROWS_AS(rand_uniform({2}, 1.0, 1.0, rng), TensorError);
    }
}

TEST_CASE("elementwise operations") {
    SECTION("fill") {
        Tensor t({2, 2});
        t.fill(1.0);
        for (auto v : t.data()) CHECK(v == 1.0);
    }

    SECTION("shifting the XOR inputs by -0.5") {
        Tensor x({4, 2}, {0, 0, 0, 1, 1, 0, 1, 1});
        Tensor shifted = add_scalar(x, -0.5);
        for (auto v : shifted.data()) CHECK((v == -0.5 || v == 0.5));
    }

    SECTION("multiplying by zeros annihilates") {
        Rng rng(5);
        Tensor a = rand_uniform({3, 3}, -9.0, 9.0, rng);
        Tensor out = mul(a, Tensor::zeros({3, 3}));
        for (auto v : out.data()) CHECK(v == 0.0);
    }

    SECTION("binary shape mismatch throws") {
        CHECK_THROWS_AS(add(Tensor({2, 2}), Tensor({2, 3})), TensorError);
    }
}

TEST_CASE("reduce") {
    SECTION("sum over dim 0") {
        Tensor a({2, 2}, {1, 2, 3, 4});
        Tensor s = reduce(a, 0, ReduceKind::Sum);
        REQUIRE(s.shape() == Shape{2});
        CHECK(s[0] == 4.0);
        CHECK(s[1] == 6.0);
    }

    SECTION("mean of a constant tensor is the constant") {
        Tensor a({3, 4}, 2.5);
        Tensor m = reduce(a, 1, ReduceKind::Mean);
        for (auto v : m.data()) CHECK(v == 2.5);
    }

    SECTION("sum of squared errors equals the quadratic cost") {
        Tensor pred({4, 1}, {0.5, 0.5, 0.5, 0.5});
        Tensor target({4, 1}, {0, 1, 1, 0});
        Tensor sq = sub(target, pred).map([](double d) { return d * d; });
        Tensor cost = reduce(sq, 0, ReduceKind::Sum);
        CHECK(cost[0] == 1.0);
    }

    SECTION("dim out of range") {
        CHECK_THROWS_AS(reduce(Tensor({2, 2}), 2, ReduceKind::Sum), TensorError);
    }
}

TEST_CASE("argmax") {
    SECTION("one-hot row") {
        Tensor a({1, 5}, {0, 0, 0, 1, 0});
        CHECK(argmax(a, 1)[0] == 3);
    }
    SECTION("plain maximum") {
        Tensor a({1, 3}, {0.1, 0.7, 0.2});
        CHECK(argmax(a, 1)[0] == 1);
    }
    SECTION("ties break to the lowest index") {
        Tensor a({1, 3}, {5, 5, 1});
        CHECK(argmax(a, 1)[0] == 0);
    }
    SECTION("empty axis") {
        CHECK_THROWS_AS(argmax(Tensor({2, 0}), 1), TensorError);
    }
}

TEST_CASE("axpy_update") {
    SECTION("one gradient-descent step") {
        Tensor w({1}, {1.0});
        Tensor g({1}, {0.5});
        axpy_update(w, -0.1, g);
        CHECK(w[0] == Catch::Approx(0.95));
    }
    SECTION("zero scale leaves w unchanged") {
        Tensor w({3}, {1, 2, 3});
        axpy_update(w, 0.0, Tensor({3}, {9, 9, 9}));
        CHECK(w[0] == 1.0);
        CHECK(w[2] == 3.0);
    }
    SECTION("vector case") {
        Tensor w({2}, {1, 2});
        axpy_update(w, -0.05, Tensor({2}, {2, 4}));
        CHECK(w[0] == Catch::Approx(0.9));
        CHECK(w[1] == Catch::Approx(1.8));
    }
    SECTION("shape mismatch") {
        Tensor w({2});
        CHECK_THROWS_AS(axpy_update(w, 1.0, Tensor({3})), TensorError);
    }
}

TEST_CASE("split and concat") {
    SECTION("45000 rows in chunks of 64") {
        Tensor a({45000, 1});
        auto chunks = split(a, 0, 64);
        REQUIRE(chunks.size() == 704);
        for (std::size_t i = 0; i < 703; ++i) CHECK(chunks[i].extent(0) == 64);
        CHECK(chunks.back().extent(0) == 8);
    }

    SECTION("chunk covering the whole tensor") {
        Rng rng(11);
        Tensor a = rand_uniform({4, 3}, -1.0, 1.0, rng);
        auto chunks = split(a, 0, 4);
        REQUIRE(chunks.size() == 1);
        for (std::size_t i = 0; i < a.numel(); ++i) CHECK(chunks[0][i] == a[i]);
    }

    SECTION("60000 rows in chunks of 1000") {
        CHECK(split(Tensor({60000}), 0, 1000).size() == 60);
    }

    SECTION("size < 1 throws") {
        CHECK_THROWS_AS(split(Tensor({4}), 0, 0), TensorError);
    }

    SECTION("concat(split(a)) == a bit-exactly, any dim") {
        Rng rng(13);
        for (int trial = 0; trial < 10; ++trial) {
            std::size_t r = 2 + rng.next_u64() % 7, c = 2 + rng.next_u64() % 7;
            Tensor a = rand_uniform({r, c}, -5.0, 5.0, rng);
            for (std::size_t dim = 0; dim < 2; ++dim) {
                std::size_t size = 1 + rng.next_u64() % a.extent(dim);
                Tensor back = concat(split(a, dim, size), dim);
                REQUIRE(back.shape() == a.shape());
                for (std::size_t i = 0; i < a.numel(); ++i) REQUIRE(back[i] == a[i]);
            }
        }
    }
}

TEST_CASE("reshape preserves the buffer") {
    Tensor a({2, 3}, {1, 2, 3, 4, 5, 6});
    Tensor b = a.reshape({3, 2});
    for (std::size_t i = 0; i < 6; ++i) CHECK(b[i] == a[i]);
    CHECK_THROWS_AS(a.reshape({4, 2}), TensorError);
}
