#pragma once

// Dense n-dimensional double tensor, row-major, value semantics.
// This is the universal value type: data, parameters and gradients are
// all Tensors. No strided views, no broadcasting (bias_add is the one
// named exception, defined in module code).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace nnkit {

using Shape = std::vector<std::size_t>;

inline std::string shape_to_string(const Shape &s) {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) os << 'x';
        os << s[i];
    }
    os << ')';
    return os.str();
}

class TensorError : public std::runtime_error {
public:
    explicit TensorError(const std::string &msg) : std::runtime_error(msg) {}
};

inline std::size_t shape_numel(const Shape &s) {
    std::size_t n = 1;
    for (auto e : s) n *= e;
    return n;
}

class Tensor {
public:
    Tensor() = default;

    explicit Tensor(Shape shape, double init = 0.0)
        : shape_(std::move(shape)), data_(shape_numel(shape_), init) {}

    Tensor(Shape shape, std::vector<double> data)
        : shape_(std::move(shape)), data_(std::move(data)) {
        if (shape_numel(shape_) != data_.size())
            throw TensorError("tensor: shape " + shape_to_string(shape_) +
                              " does not match buffer of length " + std::to_string(data_.size()));
    }

    static Tensor scalar(double v) { return Tensor(Shape{}, {v}); }

    static Tensor zeros(Shape shape) { return Tensor(std::move(shape), 0.0); }
    static Tensor ones(Shape shape) { return Tensor(std::move(shape), 1.0); }

    static Tensor eye(std::size_t rows, std::size_t cols) {
        Tensor t(Shape{rows, cols});
        for (std::size_t i = 0; i < std::min(rows, cols); ++i) t.data_[i * cols + i] = 1.0;
        return t;
    }

    const Shape &shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t numel() const { return data_.size(); }
    std::size_t extent(std::size_t dim) const { return shape_.at(dim); }

    std::vector<double> &data() { return data_; }
    const std::vector<double> &data() const { return data_; }

    double &operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    // rank-2 accessors; most of the library works on [batch x features]
    double &operator()(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * shape_[1] + j]; }

    double &at(const std::vector<std::size_t> &idx) { return data_[offset(idx)]; }
    double at(const std::vector<std::size_t> &idx) const { return data_[offset(idx)]; }

    std::size_t offset(const std::vector<std::size_t> &idx) const {
        if (idx.size() != shape_.size())
            throw TensorError("tensor: index rank " + std::to_string(idx.size()) +
                              " vs tensor rank " + std::to_string(shape_.size()));
        std::size_t off = 0;
        for (std::size_t d = 0; d < idx.size(); ++d) {
            if (idx[d] >= shape_[d])
                throw TensorError("tensor: index out of range in dim " + std::to_string(d));
            off = off * shape_[d] + idx[d];
        }
        return off;
    }

    bool same_shape(const Tensor &other) const { return shape_ == other.shape_; }

    // Reshape never reorders the buffer.
    Tensor reshape(Shape new_shape) const {
        if (shape_numel(new_shape) != data_.size())
            throw TensorError("reshape: " + shape_to_string(shape_) + " -> " +
                              shape_to_string(new_shape) + " changes element count");
        return Tensor(std::move(new_shape), data_);
    }

    void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

    Tensor map(const std::function<double(double)> &f) const {
        Tensor out(shape_);
        for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] = f(data_[i]);
        return out;
    }

    double sum() const { return std::accumulate(data_.begin(), data_.end(), 0.0); }

    double dot(const Tensor &other) const {
        check_same_shape(other, "dot");
        double acc = 0.0;
        for (std::size_t i = 0; i < data_.size(); ++i) acc += data_[i] * other.data_[i];
        return acc;
    }

    double inf_norm() const {
        double m = 0.0;
        for (double v : data_) m = std::max(m, std::abs(v));
        return m;
    }

    void check_same_shape(const Tensor &other, const char *op) const {
        if (!same_shape(other))
            throw TensorError(std::string(op) + ": shape mismatch " + shape_to_string(shape_) +
                              " vs " + shape_to_string(other.shape_));
    }

private:
    Shape shape_;
    std::vector<double> data_;
};

// Deterministic generator: MT19937-64 (bit-exact per the C++ standard),
// doubles drawn from the top 53 bits so streams reproduce across platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // uniform in [0,1)
    double next_double() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // Box-Muller, resampled until within clip*sigma of the mean.
    double truncated_normal(double sigma, double clip = 2.0) {
        for (;;) {
            double u1 = next_double(), u2 = next_double();
            if (u1 <= 0.0) continue;
            double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
            if (std::abs(z) < clip) return sigma * z;
        }
    }

    std::vector<std::size_t> permutation(std::size_t n) {
        std::vector<std::size_t> p(n);
        std::iota(p.begin(), p.end(), std::size_t{0});
        // Fisher-Yates with our own index draw, for stream stability
        for (std::size_t i = n; i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(next_u64() % i);
            std::swap(p[i - 1], p[j]);
        }
        return p;
    }

private:
    std::mt19937_64 engine_;
};

inline Tensor rand_uniform(Shape shape, double lo, double hi, Rng &rng) {
    if (!(lo < hi))
        throw TensorError("rand_uniform: lo (" + std::to_string(lo) + ") must be < hi (" +
                          std::to_string(hi) + ")");
    Tensor t(std::move(shape));
    for (auto &v : t.data()) v = rng.uniform(lo, hi);
    return t;
}

inline Tensor rand_truncated_normal(Shape shape, double sigma, Rng &rng, double clip = 2.0) {
    Tensor t(std::move(shape));
    for (auto &v : t.data()) v = rng.truncated_normal(sigma, clip);
    return t;
}

inline Tensor matmul(const Tensor &a, const Tensor &b) {
    if (a.rank() != 2 || b.rank() != 2)
        throw TensorError("matmul: expected rank-2 operands, got " + shape_to_string(a.shape()) +
                          " and " + shape_to_string(b.shape()));
    if (a.extent(1) != b.extent(0))
        throw TensorError("matmul: inner extents differ, " + shape_to_string(a.shape()) + " x " +
                          shape_to_string(b.shape()));
    const std::size_t m = a.extent(0), k = a.extent(1), n = b.extent(1);
    Tensor out(Shape{m, n});
    const double *pa = a.data().data();
    const double *pb = b.data().data();
    double *po = out.data().data();
    // i-k-j order keeps the inner loop contiguous in both b and out
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t kk = 0; kk < k; ++kk) {
            const double aik = pa[i * k + kk];
            const double *brow = pb + kk * n;
            double *orow = po + i * n;
            for (std::size_t j = 0; j < n; ++j) orow[j] += aik * brow[j];
        }
    }
    return out;
}

inline Tensor transpose(const Tensor &a) {
    if (a.rank() != 2) throw TensorError("transpose: expected rank-2, got " + shape_to_string(a.shape()));
    const std::size_t m = a.extent(0), n = a.extent(1);
    Tensor out(Shape{n, m});
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) out(j, i) = a(i, j);
    return out;
}

inline Tensor add(const Tensor &a, const Tensor &b) {
    a.check_same_shape(b, "add");
    Tensor out = a;
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] += b[i];
    return out;
}

inline Tensor sub(const Tensor &a, const Tensor &b) {
    a.check_same_shape(b, "sub");
    Tensor out = a;
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] -= b[i];
    return out;
}

inline Tensor mul(const Tensor &a, const Tensor &b) {
    a.check_same_shape(b, "mul");
    Tensor out = a;
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] *= b[i];
    return out;
}

inline Tensor add_scalar(const Tensor &a, double s) {
    Tensor out = a;
    for (auto &v : out.data()) v += s;
    return out;
}

inline Tensor scale(const Tensor &a, double s) {
    Tensor out = a;
    for (auto &v : out.data()) v *= s;
    return out;
}

// w <- w + s*g, in place
inline void axpy_update(Tensor &w, double s, const Tensor &g) {
    w.check_same_shape(g, "axpy_update");
    for (std::size_t i = 0; i < w.numel(); ++i) w[i] += s * g[i];
}

enum class ReduceKind { Sum, Mean };

inline Tensor reduce(const Tensor &a, std::size_t dim, ReduceKind kind) {
    if (dim >= a.rank())
        throw TensorError("reduce: dim " + std::to_string(dim) + " out of range for rank " +
                          std::to_string(a.rank()));
    Shape out_shape;
    for (std::size_t d = 0; d < a.rank(); ++d)
        if (d != dim) out_shape.push_back(a.extent(d));
    Tensor out(out_shape);

    // outer = product of extents before dim, inner = product after
    std::size_t outer = 1, inner = 1;
    for (std::size_t d = 0; d < dim; ++d) outer *= a.extent(d);
    for (std::size_t d = dim + 1; d < a.rank(); ++d) inner *= a.extent(d);
    const std::size_t ext = a.extent(dim);

    for (std::size_t o = 0; o < outer; ++o)
        for (std::size_t e = 0; e < ext; ++e)
            for (std::size_t in = 0; in < inner; ++in)
                out[o * inner + in] += a[(o * ext + e) * inner + in];

    if (kind == ReduceKind::Mean)
        for (auto &v : out.data()) v /= static_cast<double>(ext);
    return out;
}

// First-maximum index per row (dim=1) or per column (dim=0); ties break low.
inline std::vector<std::size_t> argmax(const Tensor &a, std::size_t dim = 1) {
    if (a.rank() != 2) throw TensorError("argmax: expected rank-2, got " + shape_to_string(a.shape()));
    if (dim > 1) throw TensorError("argmax: dim out of range");
    const std::size_t rows = a.extent(0), cols = a.extent(1);
    if (a.extent(dim) == 0) throw TensorError("argmax: empty axis");
    std::vector<std::size_t> out;
    if (dim == 1) {
        out.resize(rows);
        for (std::size_t i = 0; i < rows; ++i) {
            std::size_t best = 0;
            for (std::size_t j = 1; j < cols; ++j)
                if (a(i, j) > a(i, best)) best = j;
            out[i] = best;
        }
    } else {
        out.resize(cols);
        for (std::size_t j = 0; j < cols; ++j) {
            std::size_t best = 0;
            for (std::size_t i = 1; i < rows; ++i)
                if (a(i, j) > a(best, j)) best = i;
            out[j] = best;
        }
    }
    return out;
}

// Consecutive chunks of extent <= size along dim; last chunk may be smaller.
inline std::vector<Tensor> split(const Tensor &a, std::size_t dim, std::size_t size) {
    if (size < 1) throw TensorError("split: size must be >= 1");
    if (dim >= a.rank()) throw TensorError("split: dim out of range");
    std::size_t outer = 1, inner = 1;
    for (std::size_t d = 0; d < dim; ++d) outer *= a.extent(d);
    for (std::size_t d = dim + 1; d < a.rank(); ++d) inner *= a.extent(d);
    const std::size_t ext = a.extent(dim);

    std::vector<Tensor> chunks;
    for (std::size_t start = 0; start < ext; start += size) {
        const std::size_t len = std::min(size, ext - start);
        Shape cs = a.shape();
        cs[dim] = len;
        Tensor c(cs);
        for (std::size_t o = 0; o < outer; ++o)
            for (std::size_t e = 0; e < len; ++e)
                for (std::size_t in = 0; in < inner; ++in)
                    c[(o * len + e) * inner + in] = a[(o * ext + (start + e)) * inner + in];
        chunks.push_back(std::move(c));
    }
    return chunks;
}

inline Tensor concat(const std::vector<Tensor> &parts, std::size_t dim) {
    if (parts.empty()) throw TensorError("concat: no parts");
    Shape out_shape = parts[0].shape();
    std::size_t total = 0;
    for (const auto &p : parts) {
        if (p.rank() != out_shape.size()) throw TensorError("concat: rank mismatch");
        for (std::size_t d = 0; d < p.rank(); ++d)
            if (d != dim && p.extent(d) != out_shape[d])
                throw TensorError("concat: extent mismatch in dim " + std::to_string(d));
        total += p.extent(dim);
    }
    out_shape[dim] = total;
    Tensor out(out_shape);

    std::size_t outer = 1, inner = 1;
    for (std::size_t d = 0; d < dim; ++d) outer *= out_shape[d];
    for (std::size_t d = dim + 1; d < out_shape.size(); ++d) inner *= out_shape[d];

    std::size_t pos = 0;
    for (const auto &p : parts) {
        const std::size_t len = p.extent(dim);
        for (std::size_t o = 0; o < outer; ++o)
            for (std::size_t e = 0; e < len; ++e)
                for (std::size_t in = 0; in < inner; ++in)
                    out[(o * total + (pos + e)) * inner + in] = p[(o * len + e) * inner + in];
        pos += len;
    }
    return out;
}

// Copy of rows [begin, begin+count) of a rank>=1 tensor (dim 0 slice).
inline Tensor take_rows(const Tensor &a, std::size_t begin, std::size_t count) {
    if (begin + count > a.extent(0)) throw TensorError("take_rows: range out of bounds");
    std::size_t inner = a.numel() / a.extent(0);
    Shape s = a.shape();
    s[0] = count;
    Tensor out(s);
    std::copy(a.data().begin() + static_cast<std::ptrdiff_t>(begin * inner),
              a.data().begin() + static_cast<std::ptrdiff_t>((begin + count) * inner),
              out.data().begin());
    return out;
}

} // namespace nnkit
