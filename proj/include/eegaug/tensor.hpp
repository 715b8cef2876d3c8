#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace eegaug {

/// Dense row-major N-d array of doubles. Shape is dynamic; storage is a
/// flat Eigen array so elementwise work and GEMM views stay vectorized.
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
        data_.setZero(checked_size(shape_));
    }

    Tensor(std::vector<int> shape, Eigen::ArrayXd data)
        : shape_(std::move(shape)), data_(std::move(data)) {
        if (data_.size() != checked_size(shape_))
            throw std::invalid_argument("Tensor: data size does not match shape");
    }

    static Tensor scalar(double v) {
        Tensor t({1});
        t.data_[0] = v;
        return t;
    }

    static Tensor from_values(std::vector<int> shape, std::initializer_list<double> vals) {
        Tensor t(std::move(shape));
        if (static_cast<long>(vals.size()) != t.size())
            throw std::invalid_argument("Tensor: wrong number of values");
        long i = 0;
        for (double v : vals) t.data_[i++] = v;
        return t;
    }

    const std::vector<int>& shape() const { return shape_; }
    int rank() const { return static_cast<int>(shape_.size()); }
    long size() const { return data_.size(); }

    Eigen::ArrayXd& array() { return data_; }
    const Eigen::ArrayXd& array() const { return data_; }

    double& operator[](long i) { return data_[i]; }
    double operator[](long i) const { return data_[i]; }

    // 4-d accessor, row-major [n][c][h][w].
    double& at4(int n, int c, int h, int w, int C, int H, int W) {
        return data_[((static_cast<long>(n) * C + c) * H + h) * W + w];
    }
    double at4(int n, int c, int h, int w, int C, int H, int W) const {
        return data_[((static_cast<long>(n) * C + c) * H + h) * W + w];
    }

    bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

    bool all_finite() const { return data_.isFinite().all(); }

    Tensor reshaped(std::vector<int> shape) const {
        return Tensor(std::move(shape), data_);
    }

    std::string shape_str() const {
        std::string s = "[";
        for (size_t i = 0; i < shape_.size(); ++i)
            s += (i ? "," : "") + std::to_string(shape_[i]);
        return s + "]";
    }

private:
    static long checked_size(const std::vector<int>& shape) {
        long n = 1;
        for (int e : shape) {
            if (e <= 0) throw std::invalid_argument("Tensor: non-positive extent");
            n *= e;
        }
        return n;
    }

    std::vector<int> shape_;
    Eigen::ArrayXd data_;
};

/// Scaled-uniform init in ±sqrt(6/(fan_in+fan_out)).
inline Tensor glorot_uniform(std::vector<int> shape, int fan_in, int fan_out,
                             std::mt19937_64& rng) {
    Tensor t(std::move(shape));
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (long i = 0; i < t.size(); ++i) t[i] = dist(rng);
    return t;
}

}  // namespace eegaug
