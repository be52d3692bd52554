#pragma once

#include <cstddef>
#include <vector>

#include "fdiff/tensor.hpp"

namespace fdiff {

inline constexpr std::size_t kDefaultKernelSize = 33;

// Mirror index into [0, n) without repeating the edge sample (... 2 1 | 0 1 2 ... n-1 | n-2 ...).
// Offsets larger than the image keep bouncing between the two borders.
std::ptrdiff_t reflect_index(std::ptrdiff_t i, std::ptrdiff_t n);

/// Normalized 1-D Gaussian sampled at integer offsets -ksize/2 .. ksize/2.
struct GaussianKernel {
    double sigma = 0.0;
    std::size_t ksize = 0;
    std::vector<double> weights;

    static GaussianKernel make(double sigma, std::size_t ksize = kDefaultKernelSize);
    double center_weight() const { return weights[ksize / 2]; }
};

// Separable blur: per channel, horizontal pass then vertical pass, reflect padding.
PixelTensor gaussian_blur(const PixelTensor& x, const GaussianKernel& kernel);
PixelTensor gaussian_blur(const PixelTensor& x, double sigma, std::size_t ksize = kDefaultKernelSize);

/// Dense 2-D convolution kernel with odd side lengths, row-major weights.
class Kernel2D {
public:
    Kernel2D(std::size_t rows, std::size_t cols, std::vector<double> weights);

    static Kernel2D identity();
    // (1/k) I: constant-velocity motion from the upper left to the lower right.
    static Kernel2D diagonal(std::size_t k);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    const std::vector<double>& weights() const noexcept { return weights_; }
    double operator()(std::size_t r, std::size_t c) const { return weights_[r * cols_ + c]; }

    double total() const;
    bool is_normalized(double tol = 1e-9) const;

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> weights_;
};

// True convolution (kernel flipped) with reflect padding, applied per channel.
PixelTensor convolve(const PixelTensor& x, const Kernel2D& kernel);

}  // namespace fdiff
