#pragma once

#include "eegaug/tape.hpp"

#include <cstdio>
#include <string>
#include <variant>
#include <vector>

namespace eegaug {

// Layer descriptors. A network is an ordered list of these plus the
// parameter tensors they own, instantiated lazily on first forward.
struct DenseLayer { int n_out = 0; };
struct Conv2dLayer { int out_ch = 0, kh = 0, kw = 0, sh = 1, sw = 1, ph = 0, pw = 0; };
struct ConvT2dLayer { int out_ch = 0, kh = 0, kw = 0, sh = 1, sw = 1, ph = 0, pw = 0; };
struct ActLayer { Activation kind = Activation::Relu; double alpha = 0.2; };
struct MaxPoolLayer { int kh = 1, kw = 1; };
struct ReshapeLayer { std::vector<int> shape; };  // per-sample shape, batch prepended
struct FlattenLayer {};

using LayerSpec = std::variant<DenseLayer, Conv2dLayer, ConvT2dLayer, ActLayer,
                               MaxPoolLayer, ReshapeLayer, FlattenLayer>;

/// Feed-forward network: layer list + named parameter registry.
class Net {
public:
    explicit Net(std::vector<LayerSpec> layers, std::string prefix = "net")
        : layers_(std::move(layers)), prefix_(std::move(prefix)) {}

    /// Allocate parameters for the given per-sample input shape.
    void init(const std::vector<int>& input_shape, std::mt19937_64& rng) {
        params_.clear();
        names_.clear();
        std::vector<int> s = input_shape;  // without batch axis
        int li = 0;
        for (const LayerSpec& layer : layers_) {
            if (const auto* d = std::get_if<DenseLayer>(&layer)) {
                const int n_in = flat_size(s);
                add_param("dense" + std::to_string(li) + ".w",
                          glorot_uniform({d->n_out, n_in}, n_in, d->n_out, rng));
                add_param("dense" + std::to_string(li) + ".b", Tensor({d->n_out}));
                s = {d->n_out};
            } else if (const auto* c = std::get_if<Conv2dLayer>(&layer)) {
                const int fan_in = s[0] * c->kh * c->kw, fan_out = c->out_ch * c->kh * c->kw;
                add_param("conv" + std::to_string(li) + ".w",
                          glorot_uniform({c->out_ch, s[0], c->kh, c->kw}, fan_in, fan_out, rng));
                add_param("conv" + std::to_string(li) + ".b", Tensor({c->out_ch}));
                s = {c->out_ch, detail::conv_out(s[1], c->ph, c->kh, c->sh),
                     detail::conv_out(s[2], c->pw, c->kw, c->sw)};
            } else if (const auto* ct = std::get_if<ConvT2dLayer>(&layer)) {
                const int fan_in = s[0] * ct->kh * ct->kw,
                          fan_out = ct->out_ch * ct->kh * ct->kw;
                add_param("convt" + std::to_string(li) + ".w",
                          glorot_uniform({s[0], ct->out_ch, ct->kh, ct->kw}, fan_in, fan_out, rng));
                add_param("convt" + std::to_string(li) + ".b", Tensor({ct->out_ch}));
                s = {ct->out_ch, (s[1] - 1) * ct->sh + ct->kh - 2 * ct->ph,
                     (s[2] - 1) * ct->sw + ct->kw - 2 * ct->pw};
            } else if (const auto* p = std::get_if<MaxPoolLayer>(&layer)) {
                s = {s[0], s[1] / p->kh, s[2] / p->kw};
            } else if (const auto* r = std::get_if<ReshapeLayer>(&layer)) {
                s = r->shape;
            } else if (std::holds_alternative<FlattenLayer>(layer)) {
                s = {flat_size(s)};
            }
            ++li;
        }
        output_shape_ = s;
    }

    /// Run the layer stack on the tape; params are added as grad-tracked
    /// inputs and their node ids reported for gradient collection.
    int forward(Tape& tape, int x_id, std::vector<int>* param_ids = nullptr,
                bool track_grads = true) const {
        std::vector<int> ids;
        ids.reserve(params_.size());
        for (const Tensor& p : params_) ids.push_back(tape.input(p, track_grads));
        if (param_ids) *param_ids = ids;

        size_t pi = 0;
        int cur = x_id;
        const int batch = tape.value(x_id).shape()[0];
        for (const LayerSpec& layer : layers_) {
            if (std::holds_alternative<DenseLayer>(layer)) {
                if (tape.value(cur).rank() != 2) {
                    std::vector<int> flat = {batch,
                                             static_cast<int>(tape.value(cur).size() / batch)};
                    cur = reshape(tape, cur, flat);
                }
                cur = dense(tape, cur, ids[pi], ids[pi + 1]);
                pi += 2;
            } else if (const auto* c = std::get_if<Conv2dLayer>(&layer)) {
                cur = conv2d(tape, cur, ids[pi], ids[pi + 1], c->sh, c->sw, c->ph, c->pw);
                pi += 2;
            } else if (const auto* ct = std::get_if<ConvT2dLayer>(&layer)) {
                cur = conv2d_transpose(tape, cur, ids[pi], ids[pi + 1], ct->sh, ct->sw,
                                       ct->ph, ct->pw);
                pi += 2;
            } else if (const auto* a = std::get_if<ActLayer>(&layer)) {
                cur = activation(tape, cur, a->kind, a->alpha);
            } else if (const auto* p = std::get_if<MaxPoolLayer>(&layer)) {
                cur = maxpool2d(tape, cur, p->kh, p->kw);
            } else if (const auto* r = std::get_if<ReshapeLayer>(&layer)) {
                std::vector<int> full = {batch};
                full.insert(full.end(), r->shape.begin(), r->shape.end());
                cur = reshape(tape, cur, full);
            } else if (std::holds_alternative<FlattenLayer>(layer)) {
                cur = reshape(tape, cur,
                              {batch, static_cast<int>(tape.value(cur).size() / batch)});
            }
        }
        return cur;
    }

    std::vector<Tensor>& params() { return params_; }
    const std::vector<Tensor>& params() const { return params_; }
    const std::vector<std::string>& param_names() const { return names_; }
    const std::vector<int>& output_shape() const { return output_shape_; }

private:
    static int flat_size(const std::vector<int>& s) {
        int n = 1;
        for (int e : s) n *= e;
        return n;
    }
    void add_param(const std::string& name, Tensor t) {
        names_.push_back(prefix_ + "." + name);
        params_.push_back(std::move(t));
    }

    std::vector<LayerSpec> layers_;
    std::string prefix_;
    std::vector<Tensor> params_;
    std::vector<std::string> names_;
    std::vector<int> output_shape_;
};

/// Named-parameter checkpoint IO: magic "CKPT", little-endian.
void save_checkpoint(const std::string& path, const std::vector<std::string>& names,
                     const std::vector<Tensor>& params);
std::vector<std::pair<std::string, Tensor>> load_checkpoint(const std::string& path);

}  // namespace eegaug
