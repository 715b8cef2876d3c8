#pragma once

#include "eegaug/tensor.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace eegaug {

struct AdamHyper {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Per-parameter first/second moment accumulators plus step count.
struct AdamState {
    AdamHyper hyper;
    long step = 0;
    std::vector<Tensor> m;
    std::vector<Tensor> v;

    static AdamState make(const std::vector<Tensor>& params, AdamHyper hyper) {
        AdamState s;
        s.hyper = hyper;
        for (const Tensor& p : params) {
            s.m.emplace_back(p.shape());
            s.v.emplace_back(p.shape());
        }
        return s;
    }
};

/// One bias-corrected Adam update applied in place.
inline void adam_step(std::vector<Tensor>& params, const std::vector<Tensor>& grads,
                      AdamState& state) {
    if (params.size() != grads.size() || params.size() != state.m.size())
        throw std::invalid_argument("adam_step: parameter/gradient count mismatch");
    state.step += 1;
    const double b1 = state.hyper.beta1, b2 = state.hyper.beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
    for (size_t i = 0; i < params.size(); ++i) {
        if (!params[i].same_shape(grads[i]))
            throw std::invalid_argument("adam_step: shape mismatch at parameter " +
                                        std::to_string(i));
        auto& m = state.m[i].array();
        auto& v = state.v[i].array();
        const auto& g = grads[i].array();
        m = b1 * m + (1.0 - b1) * g;
        v = b2 * v + (1.0 - b2) * g.square();
        params[i].array() -=
            state.hyper.lr * (m / c1) / ((v / c2).sqrt() + state.hyper.epsilon);
    }
}

}  // namespace eegaug
