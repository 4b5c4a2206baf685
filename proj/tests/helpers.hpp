#pragma once

// Shared test utilities: central finite-difference gradient checking and
// small random-tensor generators. The finite-difference path is the
// independent oracle; it never calls any backward code.

#include <cmath>
#include <functional>
#include <vector>

#include <nnkit/nnkit.hpp>

namespace testutil {

using nnkit::Tensor;

inline double rel_err(double got, double want) {
    double denom = std::max({std::abs(got), std::abs(want), 1e-8});
    return std::abs(got - want) / denom;
}

// d f / d x[i] by central differences
inline double central_diff(const std::function<double()> &f, double &x, double h = 1e-6) {
    double saved = x;
    x = saved + h;
    double fp = f();
    x = saved - h;
    double fm = f();
    x = saved;
    return (fp - fm) / (2.0 * h);
}

struct GradCheckResult {
    double max_rel_err = 0.0;
    std::size_t checked = 0;
};

// Checks module input gradients and parameter gradients against central
// differences of scalar(sum of weighted outputs).
inline GradCheckResult grad_check_module(nnkit::Module &m, Tensor input, double h = 1e-6) {
    nnkit::Rng rng(7);
    Tensor out = m.forward(input);
    Tensor weights = nnkit::rand_uniform(out.shape(), -1.0, 1.0, rng);

    auto loss = [&]() {
        Tensor y = m.forward(input);
        return y.dot(weights);
    };

    m.zero_grad_parameters();
    m.forward(input);
    Tensor grad_in = m.backward(input, weights);

    GradCheckResult res;
    for (std::size_t i = 0; i < input.numel(); ++i) {
        double fd = central_diff(loss, input[i], h);
        res.max_rel_err = std::max(res.max_rel_err, rel_err(grad_in[i], fd));
        ++res.checked;
    }

    std::vector<Tensor *> ps, gs;
    m.collect_parameters(ps, gs);
    for (std::size_t t = 0; t < ps.size(); ++t) {
        for (std::size_t i = 0; i < ps[t]->numel(); ++i) {
            double fd = central_diff(loss, (*ps[t])[i], h);
            res.max_rel_err = std::max(res.max_rel_err, rel_err((*gs[t])[i], fd));
            ++res.checked;
        }
    }
    return res;
}

inline GradCheckResult grad_check_criterion(nnkit::Criterion &c, Tensor pred, const Tensor &target,
                                            double h = 1e-6) {
    Tensor grad = c.backward(pred, target);
    auto loss = [&]() { return c.forward(pred, target); };
    GradCheckResult res;
    for (std::size_t i = 0; i < pred.numel(); ++i) {
        double fd = central_diff(loss, pred[i], h);
        res.max_rel_err = std::max(res.max_rel_err, rel_err(grad[i], fd));
        ++res.checked;
    }
    return res;
}

} // namespace testutil
