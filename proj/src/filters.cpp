#include "fdiff/filters.hpp"

#include <cmath>
#include <numeric>

#include "fdiff/errors.hpp"

namespace fdiff {

std::ptrdiff_t reflect_index(std::ptrdiff_t i, std::ptrdiff_t n) {
    if (n == 1) return 0;
    const std::ptrdiff_t period = 2 * (n - 1);
    i %= period;
    if (i < 0) i += period;
    return i < n ? i : period - i;
}

GaussianKernel GaussianKernel::make(double sigma, std::size_t ksize) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw ArgumentError("gaussian kernel: sigma must be positive, got " + std::to_string(sigma));
    }
    if (ksize < 3 || ksize % 2 == 0) {
        throw ArgumentError("gaussian kernel: ksize must be odd and >= 3, got " + std::to_string(ksize));
    }
    GaussianKernel k{sigma, ksize, std::vector<double>(ksize)};
    const auto half = static_cast<std::ptrdiff_t>(ksize / 2);
    for (std::ptrdiff_t i = -half; i <= half; ++i) {
        const double d = static_cast<double>(i);
        k.weights[static_cast<std::size_t>(i + half)] = std::exp(-d * d / (2.0 * sigma * sigma));
    }
    const double total = std::accumulate(k.weights.begin(), k.weights.end(), 0.0);
    for (auto& w : k.weights) w /= total;
    return k;
}

namespace {

// One 1-D pass along rows (horizontal) or columns (vertical) of every channel.
PixelTensor blur_pass(const PixelTensor& x, const std::vector<double>& w, bool horizontal) {
    const auto h = static_cast<std::ptrdiff_t>(x.height());
    const auto wd = static_cast<std::ptrdiff_t>(x.width());
    const auto half = static_cast<std::ptrdiff_t>(w.size() / 2);
    PixelTensor out(x.shape());
    for (std::size_t c = 0; c < x.channels(); ++c) {
        for (std::ptrdiff_t y = 0; y < h; ++y) {
            for (std::ptrdiff_t xx = 0; xx < wd; ++xx) {
                double acc = 0.0;
                for (std::ptrdiff_t k = -half; k <= half; ++k) {
                    const double weight = w[static_cast<std::size_t>(k + half)];
                    const double v = horizontal
                                         ? x.at(c, static_cast<std::size_t>(y), static_cast<std::size_t>(reflect_index(xx + k, wd)))
                                         : x.at(c, static_cast<std::size_t>(reflect_index(y + k, h)), static_cast<std::size_t>(xx));
                    acc += weight * v;
                }
                out.at(c, static_cast<std::size_t>(y), static_cast<std::size_t>(xx)) = acc;
            }
        }
    }
    return out;
}

}  // namespace

PixelTensor gaussian_blur(const PixelTensor& x, const GaussianKernel& kernel) {
    if (x.empty()) throw ShapeError("gaussian_blur: empty input");
    return blur_pass(blur_pass(x, kernel.weights, true), kernel.weights, false);
}

PixelTensor gaussian_blur(const PixelTensor& x, double sigma, std::size_t ksize) {
    return gaussian_blur(x, GaussianKernel::make(sigma, ksize));
}

Kernel2D::Kernel2D(std::size_t rows, std::size_t cols, std::vector<double> weights)
    : rows_(rows), cols_(cols), weights_(std::move(weights)) {
    if (rows_ == 0 || cols_ == 0 || rows_ % 2 == 0 || cols_ % 2 == 0) {
        throw ArgumentError("kernel side lengths must be odd, got " + std::to_string(rows_) + "x" +
                            std::to_string(cols_));
    }
    if (weights_.size() != rows_ * cols_) throw ArgumentError("kernel weight count does not match its size");
}

Kernel2D Kernel2D::identity() { return Kernel2D(1, 1, {1.0}); }

Kernel2D Kernel2D::diagonal(std::size_t k) {
    if (k == 0 || k % 2 == 0) throw ArgumentError("diagonal kernel size must be odd, got " + std::to_string(k));
    std::vector<double> w(k * k, 0.0);
    for (std::size_t i = 0; i < k; ++i) w[i * k + i] = 1.0 / static_cast<double>(k);
    return Kernel2D(k, k, std::move(w));
}

double Kernel2D::total() const { return std::accumulate(weights_.begin(), weights_.end(), 0.0); }

bool Kernel2D::is_normalized(double tol) const {
    for (double v : weights_)
        if (!(v >= 0.0)) return false;
    return std::abs(total() - 1.0) <= tol;
}

PixelTensor convolve(const PixelTensor& x, const Kernel2D& kernel) {
    if (x.empty()) throw ShapeError("convolve: empty input");
    const auto h = static_cast<std::ptrdiff_t>(x.height());
    const auto w = static_cast<std::ptrdiff_t>(x.width());
    const auto hr = static_cast<std::ptrdiff_t>(kernel.rows() / 2);
    const auto hc = static_cast<std::ptrdiff_t>(kernel.cols() / 2);
    PixelTensor out(x.shape());
    for (std::size_t c = 0; c < x.channels(); ++c) {
        for (std::ptrdiff_t y = 0; y < h; ++y) {
            for (std::ptrdiff_t xx = 0; xx < w; ++xx) {
                double acc = 0.0;
                for (std::ptrdiff_t i = -hr; i <= hr; ++i) {
                    const auto sy = static_cast<std::size_t>(reflect_index(y - i, h));
                    for (std::ptrdiff_t j = -hc; j <= hc; ++j) {
                        const double k = kernel(static_cast<std::size_t>(i + hr), static_cast<std::size_t>(j + hc));
                        if (k == 0.0) continue;
                        acc += k * x.at(c, sy, static_cast<std::size_t>(reflect_index(xx - j, w)));
                    }
                }
                out.at(c, static_cast<std::size_t>(y), static_cast<std::size_t>(xx)) = acc;
            }
        }
    }
    return out;
}

}  // namespace fdiff
