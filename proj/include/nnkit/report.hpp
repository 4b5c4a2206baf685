#pragma once

// Accuracy, confusion matrices, separation-surface sampling and CSV/SVG
// emission. SVG output is dependency-free and diffable; CSV follows
// RFC-4180 with a header row. Doubles are printed with %.17g so reruns are
// byte-identical.

#include <cstdio>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "tensor.hpp"
#include "train.hpp"

namespace nnkit {

inline std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Scalar predictions compared by |pred - target| < 0.5; vector predictions
// by argmax match.
inline double accuracy(const Tensor &pred, const Tensor &target) {
    if (pred.rank() == 2 && pred.extent(1) > 1) {
        auto p = argmax(pred, 1);
        std::vector<std::size_t> t;
        if (target.rank() == 2 && target.extent(1) == pred.extent(1)) {
            t = argmax(target, 1);
        } else {
            t.resize(target.numel());
            for (std::size_t i = 0; i < target.numel(); ++i)
                t[i] = static_cast<std::size_t>(target[i]);
        }
        std::size_t correct = 0;
        for (std::size_t i = 0; i < p.size(); ++i)
            if (p[i] == t[i]) ++correct;
        return double(correct) / double(p.size());
    }
    if (pred.numel() != target.numel())
        throw TensorError("accuracy: prediction/target length mismatch");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < pred.numel(); ++i)
        if (std::abs(pred[i] - target[i]) < 0.5) ++correct;
    return double(correct) / double(pred.numel());
}

// counts(i,j) = samples predicted class i whose true class is j
struct ConfusionMatrix {
    Tensor counts; // [C x C]

    std::size_t total() const { return static_cast<std::size_t>(counts.sum()); }

    double accuracy() const {
        double trace = 0.0;
        for (std::size_t i = 0; i < counts.extent(0); ++i) trace += counts(i, i);
        return trace / counts.sum();
    }
};

inline ConfusionMatrix confusion_matrix(const std::vector<std::size_t> &pred,
                                        const std::vector<std::size_t> &truth,
                                        std::size_t num_classes) {
    if (pred.size() != truth.size())
        throw TensorError("confusion_matrix: prediction/target length mismatch");
    ConfusionMatrix cm{Tensor(Shape{num_classes, num_classes})};
    for (std::size_t i = 0; i < pred.size(); ++i) cm.counts(pred[i], truth[i]) += 1.0;
    return cm;
}

struct Region2D {
    double x_lo, x_hi, y_lo, y_hi;
};

struct SurfaceSample {
    Region2D region;
    double band_lo = 0.0, band_hi = 0.0;
    std::vector<std::pair<double, double>> points; // inputs whose output fell in the band
};

// Draws n uniform 2-D points in the region, evaluates the model in batches
// and keeps the ones whose output lies inside (band_lo, band_hi).
inline SurfaceSample sample_separation_surface(const std::function<Tensor(const Tensor &)> &model,
                                               const Region2D &region, std::size_t n_points,
                                               double band_lo, double band_hi, Rng &rng,
                                               std::size_t eval_batch = 10000) {
    SurfaceSample out{region, band_lo, band_hi, {}};
    std::size_t remaining = n_points;
    while (remaining > 0) {
        std::size_t count = std::min(eval_batch, remaining);
        Tensor batch(Shape{count, 2});
        for (std::size_t i = 0; i < count; ++i) {
            batch(i, 0) = rng.uniform(region.x_lo, region.x_hi);
            batch(i, 1) = rng.uniform(region.y_lo, region.y_hi);
        }
        Tensor y = model(batch);
        for (std::size_t i = 0; i < count; ++i) {
            double v = y[i];
            if (v > band_lo && v < band_hi) out.points.emplace_back(batch(i, 0), batch(i, 1));
        }
        remaining -= count;
    }
    return out;
}

inline void export_loss_trend_csv(const TrainReport &report, const std::string &path) {
    std::ofstream f(path);
    if (!f) throw TensorError("cannot write " + path);
    f << "epoch,train,val,test\n";
    for (std::size_t e = 0; e < report.epochs_run; ++e) {
        f << (e + 1) << ',' << fmt_double(report.train_loss[e]) << ',';
        if (e < report.val_loss.size()) f << fmt_double(report.val_loss[e]);
        f << ',';
        if (e < report.test_loss.size()) f << fmt_double(report.test_loss[e]);
        f << '\n';
    }
}

inline void export_confusion_csv(const ConfusionMatrix &cm, const std::string &path) {
    std::ofstream f(path);
    if (!f) throw TensorError("cannot write " + path);
    const std::size_t c = cm.counts.extent(0);
    f << "predicted";
    for (std::size_t j = 0; j < c; ++j) f << ",true_" << j;
    f << '\n';
    for (std::size_t i = 0; i < c; ++i) {
        f << i;
        for (std::size_t j = 0; j < c; ++j)
            f << ',' << static_cast<long long>(cm.counts(i, j));
        f << '\n';
    }
}

namespace svg {

struct Series {
    std::string label;
    std::vector<std::pair<double, double>> points;
    std::string color = "black";
    bool scatter = false; // polyline otherwise
};

// Minimal SVG 1.1 plot: axes, legend, optional log-scale y.
inline void render(const std::vector<Series> &series, const std::string &path,
                   const std::string &title = "", bool log_y = false) {
    const double W = 640, H = 480, ML = 60, MR = 20, MT = 40, MB = 50;
    double x_lo = 1e300, x_hi = -1e300, y_lo = 1e300, y_hi = -1e300;
    for (const auto &s : series)
        for (auto [x, y] : s.points) {
            double yy = log_y ? std::log10(std::max(y, 1e-300)) : y;
            x_lo = std::min(x_lo, x);
            x_hi = std::max(x_hi, x);
            y_lo = std::min(y_lo, yy);
            y_hi = std::max(y_hi, yy);
        }
    if (x_lo > x_hi) {
        x_lo = 0;
        x_hi = 1;
        y_lo = 0;
        y_hi = 1;
    }
    if (x_hi == x_lo) x_hi = x_lo + 1;
    if (y_hi == y_lo) y_hi = y_lo + 1;

    auto px = [&](double x) { return ML + (x - x_lo) / (x_hi - x_lo) * (W - ML - MR); };
    auto py = [&](double y) {
        double yy = log_y ? std::log10(std::max(y, 1e-300)) : y;
        return H - MB - (yy - y_lo) / (y_hi - y_lo) * (H - MT - MB);
    };

    std::ofstream f(path);
    if (!f) throw TensorError("cannot write " + path);
    f << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << W
      << "\" height=\"" << H << "\">\n";
    f << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    // axes
    f << "<line x1=\"" << ML << "\" y1=\"" << H - MB << "\" x2=\"" << W - MR << "\" y2=\""
      << H - MB << "\" stroke=\"black\"/>\n";
    f << "<line x1=\"" << ML << "\" y1=\"" << MT << "\" x2=\"" << ML << "\" y2=\"" << H - MB
      << "\" stroke=\"black\"/>\n";
    if (!title.empty())
        f << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
          << title << "</text>\n";
    // axis extremes
    f << "<text x=\"" << ML << "\" y=\"" << H - MB + 16 << "\" font-size=\"10\">"
      << fmt_double(x_lo) << "</text>\n";
    f << "<text x=\"" << W - MR << "\" y=\"" << H - MB + 16
      << "\" text-anchor=\"end\" font-size=\"10\">" << fmt_double(x_hi) << "</text>\n";

    std::size_t li = 0;
    for (const auto &s : series) {
        if (s.scatter) {
            f << "<g fill=\"" << s.color << "\">\n";
            for (auto [x, y] : s.points)
                f << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"1\"/>\n";
            f << "</g>\n";
        } else {
            f << "<polyline fill=\"none\" stroke=\"" << s.color << "\" points=\"";
            for (auto [x, y] : s.points) f << px(x) << ',' << py(y) << ' ';
            f << "\"/>\n";
        }
        // legend entry
        f << "<rect x=\"" << W - MR - 150 << "\" y=\"" << MT + 4 + 18 * double(li)
          << "\" width=\"12\" height=\"12\" fill=\"" << s.color << "\"/>\n";
        f << "<text x=\"" << W - MR - 132 << "\" y=\"" << MT + 14 + 18 * double(li)
          << "\" font-size=\"12\">" << s.label << "</text>\n";
        ++li;
    }
    f << "</svg>\n";
}

} // namespace svg

inline void export_loss_trend_svg(const TrainReport &report, const std::string &path,
                                  bool log_y = false) {
    std::vector<svg::Series> series;
    auto to_series = [](const std::vector<double> &loss, const std::string &label,
                        const std::string &color) {
        svg::Series s{label, {}, color, false};
        for (std::size_t e = 0; e < loss.size(); ++e) s.points.emplace_back(double(e + 1), loss[e]);
        return s;
    };
    series.push_back(to_series(report.train_loss, "train", "steelblue"));
    if (!report.val_loss.empty()) series.push_back(to_series(report.val_loss, "validation", "crimson"));
    if (!report.test_loss.empty()) series.push_back(to_series(report.test_loss, "test", "seagreen"));
    svg::render(series, path, "Loss", log_y);
}

inline void export_surface_svg(const SurfaceSample &sample,
                               const std::vector<std::pair<double, double>> &class0,
                               const std::vector<std::pair<double, double>> &class1,
                               const std::string &path) {
    std::vector<svg::Series> series;
    series.push_back({"separation surface", sample.points, "black", true});
    series.push_back({"class 0", class0, "gray", true});
    series.push_back({"class 1", class1, "dimgray", true});
    svg::render(series, path, "Separation surface");
}

// First-layer kernels rendered as a grid of grayscale cells, per-filter
// normalized to [0,255].
inline void export_filter_grid_svg(const Tensor &W, const std::string &path,
                                   std::size_t columns = 6) {
    if (W.rank() != 4) throw TensorError("filter grid: [OxIxKhxKw] weights expected");
    const std::size_t out_ch = W.extent(0), kh = W.extent(2), kw = W.extent(3);
    const double cell = 8.0, gap = 6.0;
    const std::size_t rows = (out_ch + columns - 1) / columns;
    const double tile_w = double(kw) * cell, tile_h = double(kh) * cell;
    const double width = double(columns) * (tile_w + gap) + gap;
    const double height = double(rows) * (tile_h + gap) + gap;

    std::ofstream f(path);
    if (!f) throw TensorError("cannot write " + path);
    f << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << width
      << "\" height=\"" << height << "\">\n";
    const std::size_t per = W.numel() / out_ch;
    for (std::size_t o = 0; o < out_ch; ++o) {
        double lo = 1e300, hi = -1e300;
        for (std::size_t i = 0; i < per; ++i) {
            lo = std::min(lo, W[o * per + i]);
            hi = std::max(hi, W[o * per + i]);
        }
        double span = hi > lo ? hi - lo : 1.0;
        double ox = gap + double(o % columns) * (tile_w + gap);
        double oy = gap + double(o / columns) * (tile_h + gap);
        // first input channel only
        for (std::size_t y = 0; y < kh; ++y)
            for (std::size_t x = 0; x < kw; ++x) {
                double v = W[((o * W.extent(1)) * kh + y) * kw + x];
                int g = int((v - lo) / span * 255.0 + 0.5);
                f << "<rect x=\"" << ox + double(x) * cell << "\" y=\"" << oy + double(y) * cell
                  << "\" width=\"" << cell << "\" height=\"" << cell << "\" fill=\"rgb(" << g
                  << ',' << g << ',' << g << ")\"/>\n";
            }
    }
    f << "</svg>\n";
}

} // namespace nnkit
