#pragma once

#include "eegaug/tensor.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

namespace eegaug {

/// Reverse-mode differentiation record. Ops append nodes in topological
/// order (they may only reference earlier ids), so backward() is a single
/// reverse sweep that visits each node exactly once.
class Tape {
public:
    int input(Tensor value, bool requires_grad = false) {
        nodes_.push_back(Node{std::move(value), Tensor{}, {}, requires_grad});
        return static_cast<int>(nodes_.size()) - 1;
    }

    int append(Tensor value, std::vector<int> parents,
               std::function<void(Tape&, int)> backward) {
        bool rg = false;
        for (int p : parents) rg = rg || nodes_[p].requires_grad;
        nodes_.push_back(Node{std::move(value), Tensor{}, std::move(parents), rg});
        auto& n = nodes_.back();
        if (n.requires_grad) n.backward = std::move(backward);
        return static_cast<int>(nodes_.size()) - 1;
    }

    const Tensor& value(int id) const { return nodes_.at(id).value; }

    Tensor& grad(int id) {
        Node& n = nodes_.at(id);
        if (n.grad.size() == 0) n.grad = Tensor(n.value.shape());
        return n.grad;
    }

    bool requires_grad(int id) const { return nodes_.at(id).requires_grad; }

    /// Backpropagate from a scalar loss node through the whole record.
    void backward(int loss_id) {
        if (value(loss_id).size() != 1)
            throw std::invalid_argument("backward: loss must be scalar, got shape " +
                                        value(loss_id).shape_str());
        grad(loss_id).array().setConstant(1.0);
        for (int id = loss_id; id >= 0; --id) {
            Node& n = nodes_[id];
            if (n.requires_grad && n.backward && n.grad.size() != 0) n.backward(*this, id);
        }
    }

    size_t node_count() const { return nodes_.size(); }

private:
    struct Node {
        Tensor value;
        Tensor grad;
        std::vector<int> parents;
        bool requires_grad = false;
        std::function<void(Tape&, int)> backward;
    };
    std::vector<Node> nodes_;
};

namespace detail {

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

inline int conv_out(int in, int pad, int k, int stride) {
    return (in + 2 * pad - k) / stride + 1;
}

// Gather padded input patches into a (C*kh*kw) x (OH*OW) matrix.
inline Eigen::MatrixXd im2col(const Tensor& x, int n, int C, int H, int W, int kh,
                              int kw, int sh, int sw, int ph, int pw, int OH, int OW) {
    Eigen::MatrixXd col = Eigen::MatrixXd::Zero(C * kh * kw, OH * OW);
    for (int c = 0; c < C; ++c)
        for (int i = 0; i < kh; ++i)
            for (int j = 0; j < kw; ++j) {
                const int row = (c * kh + i) * kw + j;
                for (int oh = 0; oh < OH; ++oh) {
                    const int h = oh * sh - ph + i;
                    if (h < 0 || h >= H) continue;
                    for (int ow = 0; ow < OW; ++ow) {
                        const int w = ow * sw - pw + j;
                        if (w < 0 || w >= W) continue;
                        col(row, oh * OW + ow) = x.at4(n, c, h, w, C, H, W);
                    }
                }
            }
    return col;
}

// Adjoint of im2col: scatter-add patch columns back onto the image grid.
inline void col2im_add(const Eigen::MatrixXd& col, Tensor& x, int n, int C, int H,
                       int W, int kh, int kw, int sh, int sw, int ph, int pw, int OH,
                       int OW) {
    for (int c = 0; c < C; ++c)
        for (int i = 0; i < kh; ++i)
            for (int j = 0; j < kw; ++j) {
                const int row = (c * kh + i) * kw + j;
                for (int oh = 0; oh < OH; ++oh) {
                    const int h = oh * sh - ph + i;
                    if (h < 0 || h >= H) continue;
                    for (int ow = 0; ow < OW; ++ow) {
                        const int w = ow * sw - pw + j;
                        if (w < 0 || w >= W) continue;
                        x.at4(n, c, h, w, C, H, W) += col(row, oh * OW + ow);
                    }
                }
            }
}

using MatMap = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                        Eigen::RowMajor>>;
using CMatMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                               Eigen::RowMajor>>;

}  // namespace detail

/// Cross-correlation of x [N,C,H,W] with kernels w [OC,C,kh,kw] plus one
/// bias per output channel, strided and zero-padded.
inline int conv2d(Tape& tape, int x_id, int w_id, int b_id, int sh, int sw, int ph,
                  int pw) {
    const Tensor& x = tape.value(x_id);
    const Tensor& w = tape.value(w_id);
    const Tensor& b = tape.value(b_id);
    detail::require(x.rank() == 4, "conv2d: input rank must be 4, got " + x.shape_str());
    detail::require(w.rank() == 4, "conv2d: kernel rank must be 4, got " + w.shape_str());
    const int N = x.shape()[0], C = x.shape()[1], H = x.shape()[2], W = x.shape()[3];
    const int OC = w.shape()[0], kh = w.shape()[2], kw = w.shape()[3];
    detail::require(w.shape()[1] == C, "conv2d: in_ch mismatch, input " + x.shape_str() +
                                           " vs kernel " + w.shape_str());
    detail::require(b.rank() == 1 && b.shape()[0] == OC,
                    "conv2d: bias must be [out_ch]");
    detail::require(H + 2 * ph >= kh && W + 2 * pw >= kw,
                    "conv2d: kernel does not fit padded input");
    const int OH = detail::conv_out(H, ph, kh, sh), OW = detail::conv_out(W, pw, kw, sw);

    Tensor out({N, OC, OH, OW});
    detail::CMatMap wmat(w.array().data(), OC, C * kh * kw);
    for (int n = 0; n < N; ++n) {
        Eigen::MatrixXd col = detail::im2col(x, n, C, H, W, kh, kw, sh, sw, ph, pw, OH, OW);
        Eigen::MatrixXd y = wmat * col;
        for (int oc = 0; oc < OC; ++oc)
            for (int p = 0; p < OH * OW; ++p)
                out.at4(n, oc, p / OW, p % OW, OC, OH, OW) = y(oc, p) + b[oc];
    }

    return tape.append(std::move(out), {x_id, w_id, b_id},
        [=](Tape& t, int self) {
            const Tensor& g = t.grad(self);
            const Tensor& xv = t.value(x_id);
            const Tensor& wv = t.value(w_id);
            detail::CMatMap wm(wv.array().data(), OC, C * kh * kw);
            Tensor& gx = t.grad(x_id);
            Tensor& gw = t.grad(w_id);
            Tensor& gb = t.grad(b_id);
            detail::MatMap gwm(gw.array().data(), OC, C * kh * kw);
            for (int n = 0; n < N; ++n) {
                detail::CMatMap gy(g.array().data() + static_cast<long>(n) * OC * OH * OW,
                                   OC, OH * OW);
                if (t.requires_grad(w_id)) {
                    Eigen::MatrixXd col =
                        detail::im2col(xv, n, C, H, W, kh, kw, sh, sw, ph, pw, OH, OW);
                    gwm += gy * col.transpose();
                }
                if (t.requires_grad(x_id)) {
                    Eigen::MatrixXd gcol = wm.transpose() * gy;
                    detail::col2im_add(gcol, gx, n, C, H, W, kh, kw, sh, sw, ph, pw, OH, OW);
                }
                if (t.requires_grad(b_id))
                    for (int oc = 0; oc < OC; ++oc) gb[oc] += gy.row(oc).sum();
            }
        });
}

/// Adjoint of conv2d with the same (w, stride, padding): maps [N,OC,Hin,Win]
/// to [N,C,H,W] with H = (Hin-1)*sh + kh - 2ph, plus one bias per output
/// channel. Kernel layout matches conv2d: [OC, C, kh, kw] where OC is this
/// op's *input* channel count.
inline int conv2d_transpose(Tape& tape, int x_id, int w_id, int b_id, int sh, int sw,
                            int ph, int pw) {
    const Tensor& x = tape.value(x_id);
    const Tensor& w = tape.value(w_id);
    const Tensor& b = tape.value(b_id);
    detail::require(x.rank() == 4 && w.rank() == 4, "conv2d_transpose: rank-4 required");
    const int N = x.shape()[0], OC = x.shape()[1], Hin = x.shape()[2], Win = x.shape()[3];
    detail::require(w.shape()[0] == OC, "conv2d_transpose: channel mismatch, input " +
                                            x.shape_str() + " vs kernel " + w.shape_str());
    const int C = w.shape()[1], kh = w.shape()[2], kw = w.shape()[3];
    const int H = (Hin - 1) * sh + kh - 2 * ph, W = (Win - 1) * sw + kw - 2 * pw;
    detail::require(H > 0 && W > 0, "conv2d_transpose: output size non-positive");
    detail::require(b.rank() == 1 && b.shape()[0] == C,
                    "conv2d_transpose: bias must be [out_ch]");

    Tensor out({N, C, H, W});
    detail::CMatMap wmat(w.array().data(), OC, C * kh * kw);
    for (int n = 0; n < N; ++n) {
        detail::CMatMap xm(x.array().data() + static_cast<long>(n) * OC * Hin * Win, OC,
                           Hin * Win);
        Eigen::MatrixXd col = wmat.transpose() * xm;
        detail::col2im_add(col, out, n, C, H, W, kh, kw, sh, sw, ph, pw, Hin, Win);
    }
    for (int n = 0; n < N; ++n)
        for (int c = 0; c < C; ++c)
            for (int p = 0; p < H * W; ++p) out.at4(n, c, p / W, p % W, C, H, W) += b[c];

    return tape.append(std::move(out), {x_id, w_id, b_id},
        [=](Tape& t, int self) {
            const Tensor& g = t.grad(self);
            const Tensor& xv = t.value(x_id);
            const Tensor& wv = t.value(w_id);
            detail::CMatMap wm(wv.array().data(), OC, C * kh * kw);
            Tensor& gx = t.grad(x_id);
            Tensor& gw = t.grad(w_id);
            Tensor& gb = t.grad(b_id);
            detail::MatMap gwm(gw.array().data(), OC, C * kh * kw);
            for (int n = 0; n < N; ++n) {
                // The forward is col2im(w^T x); its adjoint is the conv2d forward.
                Eigen::MatrixXd gcol =
                    detail::im2col(g, n, C, H, W, kh, kw, sh, sw, ph, pw, Hin, Win);
                if (t.requires_grad(x_id)) {
                    detail::MatMap gxm(gx.array().data() + static_cast<long>(n) * OC * Hin * Win,
                                       OC, Hin * Win);
                    gxm += wm * gcol;
                }
                if (t.requires_grad(w_id)) {
                    detail::CMatMap xm(xv.array().data() + static_cast<long>(n) * OC * Hin * Win,
                                       OC, Hin * Win);
                    gwm += xm * gcol.transpose();
                }
                if (t.requires_grad(b_id))
                    for (int c = 0; c < C; ++c)
                        for (int p = 0; p < H * W; ++p)
                            gb[c] += g.at4(n, c, p / W, p % W, C, H, W);
            }
        });
}

/// Affine map: x [N, n_in] with w [n_out, n_in], b [n_out].
inline int dense(Tape& tape, int x_id, int w_id, int b_id) {
    const Tensor& x = tape.value(x_id);
    const Tensor& w = tape.value(w_id);
    const Tensor& b = tape.value(b_id);
    detail::require(x.rank() == 2 && w.rank() == 2, "dense: rank-2 required");
    const int N = x.shape()[0], n_in = x.shape()[1], n_out = w.shape()[0];
    detail::require(w.shape()[1] == n_in, "dense: n_in mismatch, input " + x.shape_str() +
                                              " vs weight " + w.shape_str());
    detail::require(b.rank() == 1 && b.shape()[0] == n_out, "dense: bias must be [n_out]");

    Tensor out({N, n_out});
    detail::CMatMap xm(x.array().data(), N, n_in);
    detail::CMatMap wm(w.array().data(), n_out, n_in);
    detail::MatMap om(out.array().data(), N, n_out);
    om = xm * wm.transpose();
    for (int n = 0; n < N; ++n)
        for (int j = 0; j < n_out; ++j) om(n, j) += b[j];

    return tape.append(std::move(out), {x_id, w_id, b_id},
        [=](Tape& t, int self) {
            detail::CMatMap g(t.grad(self).array().data(), N, n_out);
            detail::CMatMap xv(t.value(x_id).array().data(), N, n_in);
            detail::CMatMap wv(t.value(w_id).array().data(), n_out, n_in);
            if (t.requires_grad(x_id)) {
                detail::MatMap gx(t.grad(x_id).array().data(), N, n_in);
                gx += g * wv;
            }
            if (t.requires_grad(w_id)) {
                detail::MatMap gw(t.grad(w_id).array().data(), n_out, n_in);
                gw += g.transpose() * xv;
            }
            if (t.requires_grad(b_id)) {
                Tensor& gb = t.grad(b_id);
                for (int j = 0; j < n_out; ++j) gb[j] += g.col(j).sum();
            }
        });
}

enum class Activation { Relu, LeakyRelu, Sigmoid, Tanh };

inline int activation(Tape& tape, int x_id, Activation kind, double alpha = 0.2) {
    const Tensor& x = tape.value(x_id);
    Tensor out(x.shape());
    switch (kind) {
        case Activation::Relu:
            out.array() = x.array().max(0.0);
            break;
        case Activation::LeakyRelu:
            out.array() = (x.array() > 0.0).select(x.array(), alpha * x.array());
            break;
        case Activation::Sigmoid:
            out.array() = 0.5 * (1.0 + (0.5 * x.array()).tanh());
            break;
        case Activation::Tanh:
            out.array() = x.array().tanh();
            break;
    }
    return tape.append(std::move(out), {x_id},
        [=](Tape& t, int self) {
            if (!t.requires_grad(x_id)) return;
            const auto& g = t.grad(self).array();
            const auto& xv = t.value(x_id).array();
            const auto& yv = t.value(self).array();
            auto& gx = t.grad(x_id).array();
            switch (kind) {
                case Activation::Relu:
                    gx += (xv > 0.0).select(g, 0.0);
                    break;
                case Activation::LeakyRelu:
                    gx += (xv > 0.0).select(g, alpha * g);
                    break;
                case Activation::Sigmoid:
                    gx += g * yv * (1.0 - yv);
                    break;
                case Activation::Tanh:
                    gx += g * (1.0 - yv.square());
                    break;
            }
        });
}

/// Non-overlapping max pooling (stride = kernel); ties go to the first
/// cell in row-major order.
inline int maxpool2d(Tape& tape, int x_id, int kh, int kw) {
    const Tensor& x = tape.value(x_id);
    detail::require(x.rank() == 4, "maxpool2d: rank-4 required");
    const int N = x.shape()[0], C = x.shape()[1], H = x.shape()[2], W = x.shape()[3];
    detail::require(H % kh == 0 && W % kw == 0,
                    "maxpool2d: extents must divide kernel, got " + x.shape_str());
    const int OH = H / kh, OW = W / kw;
    Tensor out({N, C, OH, OW});
    auto argmax = std::make_shared<std::vector<long>>(static_cast<size_t>(out.size()));
    long o = 0;
    for (int n = 0; n < N; ++n)
        for (int c = 0; c < C; ++c)
            for (int oh = 0; oh < OH; ++oh)
                for (int ow = 0; ow < OW; ++ow, ++o) {
                    double best = -std::numeric_limits<double>::infinity();
                    long best_idx = 0;
                    for (int i = 0; i < kh; ++i)
                        for (int j = 0; j < kw; ++j) {
                            const long idx =
                                ((static_cast<long>(n) * C + c) * H + oh * kh + i) * W +
                                ow * kw + j;
                            if (x[idx] > best) {
                                best = x[idx];
                                best_idx = idx;
                            }
                        }
                    out[o] = best;
                    (*argmax)[o] = best_idx;
                }
    return tape.append(std::move(out), {x_id},
        [=](Tape& t, int self) {
            if (!t.requires_grad(x_id)) return;
            const Tensor& g = t.grad(self);
            Tensor& gx = t.grad(x_id);
            for (long i = 0; i < g.size(); ++i) gx[(*argmax)[i]] += g[i];
        });
}

inline int reshape(Tape& tape, int x_id, std::vector<int> shape) {
    Tensor out = tape.value(x_id).reshaped(std::move(shape));
    return tape.append(std::move(out), {x_id},
        [=](Tape& t, int self) {
            if (!t.requires_grad(x_id)) return;
            t.grad(x_id).array() += t.grad(self).array();
        });
}

/// Concatenate along axis 1 of two rank-2 tensors with equal batch size.
inline int concat_cols(Tape& tape, int a_id, int b_id) {
    const Tensor& a = tape.value(a_id);
    const Tensor& b = tape.value(b_id);
    detail::require(a.rank() == 2 && b.rank() == 2 && a.shape()[0] == b.shape()[0],
                    "concat_cols: rank-2 with equal batch required");
    const int N = a.shape()[0], na = a.shape()[1], nb = b.shape()[1];
    Tensor out({N, na + nb});
    for (int n = 0; n < N; ++n) {
        for (int j = 0; j < na; ++j) out[n * (na + nb) + j] = a[n * na + j];
        for (int j = 0; j < nb; ++j) out[n * (na + nb) + na + j] = b[n * nb + j];
    }
    return tape.append(std::move(out), {a_id, b_id},
        [=](Tape& t, int self) {
            const Tensor& g = t.grad(self);
            if (t.requires_grad(a_id)) {
                Tensor& ga = t.grad(a_id);
                for (int n = 0; n < N; ++n)
                    for (int j = 0; j < na; ++j) ga[n * na + j] += g[n * (na + nb) + j];
            }
            if (t.requires_grad(b_id)) {
                Tensor& gb = t.grad(b_id);
                for (int n = 0; n < N; ++n)
                    for (int j = 0; j < nb; ++j)
                        gb[n * nb + j] += g[n * (na + nb) + na + j];
            }
        });
}

/// Concatenate two rank-4 tensors along the channel axis.
inline int concat_channels(Tape& tape, int a_id, int b_id) {
    const Tensor& a = tape.value(a_id);
    const Tensor& b = tape.value(b_id);
    detail::require(a.rank() == 4 && b.rank() == 4 && a.shape()[0] == b.shape()[0] &&
                        a.shape()[2] == b.shape()[2] && a.shape()[3] == b.shape()[3],
                    "concat_channels: incompatible shapes " + a.shape_str() + " and " +
                        b.shape_str());
    const int N = a.shape()[0], Ca = a.shape()[1], Cb = b.shape()[1];
    const long hw = static_cast<long>(a.shape()[2]) * a.shape()[3];
    Tensor out({N, Ca + Cb, a.shape()[2], a.shape()[3]});
    for (int n = 0; n < N; ++n) {
        const long dst = static_cast<long>(n) * (Ca + Cb) * hw;
        for (long i = 0; i < Ca * hw; ++i) out[dst + i] = a[n * Ca * hw + i];
        for (long i = 0; i < Cb * hw; ++i) out[dst + Ca * hw + i] = b[n * Cb * hw + i];
    }
    return tape.append(std::move(out), {a_id, b_id},
        [=](Tape& t, int self) {
            const Tensor& g = t.grad(self);
            for (int n = 0; n < N; ++n) {
                const long src = static_cast<long>(n) * (Ca + Cb) * hw;
                if (t.requires_grad(a_id)) {
                    Tensor& ga = t.grad(a_id);
                    for (long i = 0; i < Ca * hw; ++i) ga[n * Ca * hw + i] += g[src + i];
                }
                if (t.requires_grad(b_id)) {
                    Tensor& gb = t.grad(b_id);
                    for (long i = 0; i < Cb * hw; ++i) gb[n * Cb * hw + i] += g[src + Ca * hw + i];
                }
            }
        });
}

inline int sum(Tape& tape, int x_id) {
    Tensor out = Tensor::scalar(tape.value(x_id).array().sum());
    return tape.append(std::move(out), {x_id},
        [=](Tape& t, int self) {
            if (!t.requires_grad(x_id)) return;
            t.grad(x_id).array() += t.grad(self)[0];
        });
}

inline int scale(Tape& tape, int x_id, double k) {
    Tensor out(tape.value(x_id).shape(), k * tape.value(x_id).array());
    return tape.append(std::move(out), {x_id},
        [=](Tape& t, int self) {
            if (!t.requires_grad(x_id)) return;
            t.grad(x_id).array() += k * t.grad(self).array();
        });
}

inline int add(Tape& tape, int a_id, int b_id) {
    detail::require(tape.value(a_id).same_shape(tape.value(b_id)), "add: shape mismatch");
    Tensor out(tape.value(a_id).shape(),
               tape.value(a_id).array() + tape.value(b_id).array());
    return tape.append(std::move(out), {a_id, b_id},
        [=](Tape& t, int self) {
            if (t.requires_grad(a_id)) t.grad(a_id).array() += t.grad(self).array();
            if (t.requires_grad(b_id)) t.grad(b_id).array() += t.grad(self).array();
        });
}

/// Mean binary cross-entropy on logits, log-sum-exp stabilized:
/// mean over batch of max(l,0) - l*t + log(1 + exp(-|l|)).
inline int bce_logits(Tape& tape, int logits_id, const Tensor& targets) {
    const Tensor& l = tape.value(logits_id);
    detail::require(l.size() == targets.size(), "bce_logits: size mismatch");
    for (long i = 0; i < targets.size(); ++i)
        detail::require(targets[i] == 0.0 || targets[i] == 1.0,
                        "bce_logits: targets must be binary");
    const long N = l.size();
    double acc = 0.0;
    for (long i = 0; i < N; ++i) {
        const double x = l[i], t = targets[i];
        acc += std::max(x, 0.0) - x * t + std::log1p(std::exp(-std::abs(x)));
    }
    Tensor out = Tensor::scalar(acc / static_cast<double>(N));
    Tensor tcopy = targets;
    return tape.append(std::move(out), {logits_id},
        [=](Tape& t, int self) {
            if (!t.requires_grad(logits_id)) return;
            const double g = t.grad(self)[0];
            const Tensor& lv = t.value(logits_id);
            Tensor& gl = t.grad(logits_id);
            for (long i = 0; i < N; ++i) {
                const double sig = 1.0 / (1.0 + std::exp(-lv[i]));
                gl[i] += g * (sig - tcopy[i]) / static_cast<double>(N);
            }
        });
}

/// Mean negative log softmax probability of the true class, stabilized.
inline int softmax_cross_entropy(Tape& tape, int logits_id,
                                 const std::vector<int>& labels) {
    const Tensor& l = tape.value(logits_id);
    detail::require(l.rank() == 2, "softmax_cross_entropy: rank-2 logits required");
    const int N = l.shape()[0], K = l.shape()[1];
    detail::require(static_cast<int>(labels.size()) == N,
                    "softmax_cross_entropy: label count mismatch");
    for (int y : labels)
        detail::require(y >= 0 && y < K, "softmax_cross_entropy: label out of range");

    auto probs = std::make_shared<Tensor>(l.shape());
    double acc = 0.0;
    for (int n = 0; n < N; ++n) {
        double mx = l[n * K];
        for (int k = 1; k < K; ++k) mx = std::max(mx, l[n * K + k]);
        double z = 0.0;
        for (int k = 0; k < K; ++k) z += std::exp(l[n * K + k] - mx);
        const double logz = mx + std::log(z);
        for (int k = 0; k < K; ++k) (*probs)[n * K + k] = std::exp(l[n * K + k] - logz);
        acc -= l[n * K + labels[n]] - logz;
    }
    Tensor out = Tensor::scalar(acc / N);
    auto labs = std::make_shared<std::vector<int>>(labels);
    return tape.append(std::move(out), {logits_id},
        [=](Tape& t, int self) {
            if (!t.requires_grad(logits_id)) return;
            const double g = t.grad(self)[0];
            Tensor& gl = t.grad(logits_id);
            for (int n = 0; n < N; ++n)
                for (int k = 0; k < K; ++k)
                    gl[n * K + k] += g * ((*probs)[n * K + k] -
                                          (k == (*labs)[n] ? 1.0 : 0.0)) / N;
        });
}

}  // namespace eegaug
