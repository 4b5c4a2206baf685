#pragma once

// MNIST IDX ingestion, dataset views (split/shuffle/batch) and the synthetic
// XOR / n-ary parity generators.
//
// IDX layout (bit-exact): 32-bit big-endian magic (0x00000803 for rank-3
// unsigned-byte image files, 0x00000801 for rank-1 label files), one 32-bit
// big-endian extent per dimension, then the unsigned-byte payload.

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "tensor.hpp"

namespace nnkit {

class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string &msg) : std::runtime_error(msg) {}
};

constexpr std::uint32_t kIdxImageMagic = 0x00000803; // 2051
constexpr std::uint32_t kIdxLabelMagic = 0x00000801; // 2049

inline std::uint32_t read_be32(const std::vector<std::uint8_t> &bytes, std::size_t off) {
    if (off + 4 > bytes.size()) throw DataError("idx: truncated header");
    return (std::uint32_t(bytes[off]) << 24) | (std::uint32_t(bytes[off + 1]) << 16) |
           (std::uint32_t(bytes[off + 2]) << 8) | std::uint32_t(bytes[off + 3]);
}

inline void write_be32(std::vector<std::uint8_t> &bytes, std::uint32_t v) {
    bytes.push_back(std::uint8_t(v >> 24));
    bytes.push_back(std::uint8_t(v >> 16));
    bytes.push_back(std::uint8_t(v >> 8));
    bytes.push_back(std::uint8_t(v));
}

// Raw byte values as doubles in [0,255], shape [N x rows x cols].
inline Tensor parse_idx_images(const std::vector<std::uint8_t> &bytes) {
    std::uint32_t magic = read_be32(bytes, 0);
    if (magic != kIdxImageMagic)
        throw DataError("idx: bad image magic " + std::to_string(magic) + ", expected 2051");
    std::size_t n = read_be32(bytes, 4), rows = read_be32(bytes, 8), cols = read_be32(bytes, 12);
    std::size_t expected = 16 + n * rows * cols;
    if (bytes.size() != expected)
        throw DataError("idx: payload size " + std::to_string(bytes.size()) + " bytes, expected " +
                        std::to_string(expected));
    Tensor t(Shape{n, rows, cols});
    for (std::size_t i = 0; i < n * rows * cols; ++i) t[i] = double(bytes[16 + i]);
    return t;
}

inline std::vector<std::size_t> parse_idx_labels(const std::vector<std::uint8_t> &bytes,
                                                 std::size_t num_classes = 10) {
    std::uint32_t magic = read_be32(bytes, 0);
    if (magic != kIdxLabelMagic)
        throw DataError("idx: bad label magic " + std::to_string(magic) + ", expected 2049");
    std::size_t n = read_be32(bytes, 4);
    std::size_t expected = 8 + n;
    if (bytes.size() != expected)
        throw DataError("idx: payload size " + std::to_string(bytes.size()) + " bytes, expected " +
                        std::to_string(expected));
    std::vector<std::size_t> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::uint8_t v = bytes[8 + i];
        if (v >= num_classes)
            throw DataError("idx: label " + std::to_string(v) + " out of range [0," +
                            std::to_string(num_classes) + ") at index " + std::to_string(i));
        labels[i] = v;
    }
    return labels;
}

inline std::vector<std::uint8_t> serialize_idx_images(const Tensor &images) {
    if (images.rank() != 3) throw DataError("idx: rank-3 [NxHxW] tensor expected");
    std::vector<std::uint8_t> bytes;
    write_be32(bytes, kIdxImageMagic);
    write_be32(bytes, std::uint32_t(images.extent(0)));
    write_be32(bytes, std::uint32_t(images.extent(1)));
    write_be32(bytes, std::uint32_t(images.extent(2)));
    for (std::size_t i = 0; i < images.numel(); ++i)
        bytes.push_back(std::uint8_t(images[i]));
    return bytes;
}

inline std::vector<std::uint8_t> serialize_idx_labels(const std::vector<std::size_t> &labels) {
    std::vector<std::uint8_t> bytes;
    write_be32(bytes, kIdxLabelMagic);
    write_be32(bytes, std::uint32_t(labels.size()));
    for (auto l : labels) bytes.push_back(std::uint8_t(l));
    return bytes;
}

inline std::vector<std::uint8_t> read_file_bytes(const std::string &path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open " + path);
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(f),
                                     std::istreambuf_iterator<char>());
}

inline void write_file_bytes(const std::string &path, const std::vector<std::uint8_t> &bytes) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot write " + path);
    f.write(reinterpret_cast<const char *>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

inline Tensor normalize_images(const Tensor &raw) {
    return raw.map([](double v) { return v / 255.0; });
}

inline Tensor flatten_images(const Tensor &images) {
    if (images.rank() < 2) throw DataError("flatten_images: rank >= 2 expected");
    std::size_t n = images.extent(0);
    return images.reshape(Shape{n, images.numel() / n});
}

inline Tensor one_hot(const std::vector<std::size_t> &labels, std::size_t num_classes) {
    Tensor t(Shape{labels.size(), num_classes});
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] >= num_classes) throw DataError("one_hot: label out of range");
        t(i, labels[i]) = 1.0;
    }
    return t;
}

struct LabeledDataset {
    Tensor data;                     // [N x ...]
    std::vector<std::size_t> label;  // class indices
    std::size_t num_classes = 2;
    Tensor targets;                  // optional regression targets [N x D]

    std::size_t size() const { return label.size(); }

    Tensor label_tensor() const {
        Tensor t(Shape{label.size()});
        for (std::size_t i = 0; i < label.size(); ++i) t[i] = double(label[i]);
        return t;
    }

    Tensor one_hot_labels() const { return one_hot(label, num_classes); }

    void check() const {
        if (data.extent(0) != label.size())
            throw DataError("dataset: " + std::to_string(data.extent(0)) + " samples vs " +
                            std::to_string(label.size()) + " labels");
    }
};

inline LabeledDataset shuffle(const LabeledDataset &ds, Rng &rng) {
    ds.check();
    auto perm = rng.permutation(ds.size());
    std::size_t inner = ds.data.numel() / std::max<std::size_t>(ds.size(), 1);
    LabeledDataset out{Tensor(ds.data.shape()), std::vector<std::size_t>(ds.size()),
                       ds.num_classes, Tensor()};
    bool has_targets = ds.targets.numel() > 0;
    std::size_t tin = has_targets ? ds.targets.numel() / ds.size() : 0;
    if (has_targets) out.targets = Tensor(ds.targets.shape());
    for (std::size_t i = 0; i < ds.size(); ++i) {
        std::copy(ds.data.data().begin() + static_cast<std::ptrdiff_t>(perm[i] * inner),
                  ds.data.data().begin() + static_cast<std::ptrdiff_t>((perm[i] + 1) * inner),
                  out.data.data().begin() + static_cast<std::ptrdiff_t>(i * inner));
        out.label[i] = ds.label[perm[i]];
        if (has_targets)
            std::copy(ds.targets.data().begin() + static_cast<std::ptrdiff_t>(perm[i] * tin),
                      ds.targets.data().begin() + static_cast<std::ptrdiff_t>((perm[i] + 1) * tin),
                      out.targets.data().begin() + static_cast<std::ptrdiff_t>(i * tin));
    }
    return out;
}

// front gets floor(p*N) items in order; p outside (0,1] falls back to 0.9
inline std::pair<LabeledDataset, LabeledDataset> split_data(const LabeledDataset &ds, double p) {
    ds.check();
    if (!(p > 0.0 && p <= 1.0)) p = 0.9;
    std::size_t front_n = static_cast<std::size_t>(std::floor(p * double(ds.size())));
    std::size_t back_n = ds.size() - front_n;

    auto slice = [&](std::size_t begin, std::size_t count) {
        LabeledDataset out;
        out.num_classes = ds.num_classes;
        out.data = take_rows(ds.data, begin, count);
        out.label.assign(ds.label.begin() + static_cast<std::ptrdiff_t>(begin),
                         ds.label.begin() + static_cast<std::ptrdiff_t>(begin + count));
        if (ds.targets.numel() > 0) out.targets = take_rows(ds.targets, begin, count);
        return out;
    };
    return {slice(0, front_n), slice(front_n, back_n)};
}

enum class XorEncoding { ZeroOne, Shifted };

// The 4-point XOR problem. Shifted encoding moves {0,1} to {-0.5,0.5} on
// both inputs and targets.
inline LabeledDataset make_xor_dataset(XorEncoding enc) {
    LabeledDataset ds;
    ds.num_classes = 2;
    ds.data = Tensor(Shape{4, 2}, {0, 0, 0, 1, 1, 0, 1, 1});
    ds.label = {0, 1, 1, 0};
    ds.targets = Tensor(Shape{4, 1}, {0, 1, 1, 0});
    if (enc == XorEncoding::Shifted) {
        ds.data = add_scalar(ds.data, -0.5);
        ds.targets = add_scalar(ds.targets, -0.5);
    }
    return ds;
}

inline std::size_t parity_of_bits(const std::vector<std::size_t> &bits) {
    std::size_t s = 0;
    for (auto b : bits) s += b;
    return s % 2; // 1 iff the bit-sum is odd
}

struct ParityMode {
    bool exhaustive = true;
    std::size_t random_count = 0;
    Rng *rng = nullptr;

    static ParityMode Exhaustive() { return {}; }
    static ParityMode Random(std::size_t m, Rng &rng) { return {false, m, &rng}; }
};

inline LabeledDataset make_parity_dataset(std::size_t n, ParityMode mode = ParityMode::Exhaustive()) {
    if (n < 1) throw DataError("parity: n must be >= 1");
    LabeledDataset ds;
    ds.num_classes = 2;
    if (mode.exhaustive) {
        if (n > 24) throw DataError("parity: exhaustive mode limited to n <= 24");
        std::size_t total = std::size_t{1} << n;
        ds.data = Tensor(Shape{total, n});
        ds.label.resize(total);
        for (std::size_t v = 0; v < total; ++v) {
            std::size_t ones = 0;
            for (std::size_t bit = 0; bit < n; ++bit) {
                std::size_t b = (v >> bit) & 1u;
                ds.data(v, bit) = double(b);
                ones += b;
            }
            ds.label[v] = ones % 2;
        }
    } else {
        ds.data = Tensor(Shape{mode.random_count, n});
        ds.label.resize(mode.random_count);
        for (std::size_t i = 0; i < mode.random_count; ++i) {
            std::size_t ones = 0;
            for (std::size_t bit = 0; bit < n; ++bit) {
                std::size_t b = mode.rng->next_u64() & 1u;
                ds.data(i, bit) = double(b);
                ones += b;
            }
            ds.label[i] = ones % 2;
        }
    }
    return ds;
}

// TF-style epoch cursor: slides over a shuffled copy, reshuffles when the
// epoch is exhausted; every sample is seen exactly once per epoch.
class BatchCursor {
public:
    BatchCursor(const LabeledDataset &ds, Rng &rng) : source_(&ds), rng_(&rng) {
        reshuffle();
    }

    std::pair<Tensor, std::vector<std::size_t>> next_batch(std::size_t size) {
        if (size < 1) throw DataError("next_batch: size must be >= 1");
        if (cursor_ >= shuffled_.size()) reshuffle();
        std::size_t count = std::min(size, shuffled_.size() - cursor_);
        Tensor batch = take_rows(shuffled_.data, cursor_, count);
        std::vector<std::size_t> labels(shuffled_.label.begin() +
                                            static_cast<std::ptrdiff_t>(cursor_),
                                        shuffled_.label.begin() +
                                            static_cast<std::ptrdiff_t>(cursor_ + count));
        cursor_ += count;
        return {std::move(batch), std::move(labels)};
    }

    std::size_t position() const { return cursor_; }

private:
    void reshuffle() {
        shuffled_ = shuffle(*source_, *rng_);
        cursor_ = 0;
    }

    const LabeledDataset *source_;
    Rng *rng_;
    LabeledDataset shuffled_;
    std::size_t cursor_ = 0;
};

struct MnistFiles {
    std::string train_images, train_labels, test_images, test_labels;

    static MnistFiles in_dir(const std::string &dir) {
        return {dir + "/train-images-idx3-ubyte", dir + "/train-labels-idx1-ubyte",
                dir + "/t10k-images-idx3-ubyte", dir + "/t10k-labels-idx1-ubyte"};
    }
};

// Loads a split (images normalized to [0,1], flattened to [N x 784]).
inline LabeledDataset load_mnist_split(const std::string &image_path,
                                       const std::string &label_path) {
    LabeledDataset ds;
    ds.num_classes = 10;
    ds.data = flatten_images(normalize_images(parse_idx_images(read_file_bytes(image_path))));
    ds.label = parse_idx_labels(read_file_bytes(label_path));
    ds.check();
    return ds;
}

} // namespace nnkit
