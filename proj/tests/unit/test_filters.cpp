#include <doctest.h>

#include <cmath>

#include "../support.hpp"
#include "fdiff/errors.hpp"
#include "fdiff/filters.hpp"

using namespace fdiff;

namespace {

// Mirror by repeated folding; deliberately a different route from reflect_index's modulo.
long fold(long i, long n) {
    if (n == 1) return 0;
    while (i < 0 || i >= n) {
        if (i < 0) i = -i;
        if (i >= n) i = 2 * (n - 1) - i;
    }
    return i;
}

// Direct 2-D convolution with the outer-product kernel w(i) w(j), unnormalized weights
// normalized here from the Gaussian formula.
PixelTensor naive_blur(const PixelTensor& x, double sigma, long ksize) {
    const long half = ksize / 2;
    std::vector<double> w(static_cast<std::size_t>(ksize));
    double total = 0.0;
    for (long i = -half; i <= half; ++i) total += w[static_cast<std::size_t>(i + half)] = std::exp(-(i * i) / (2 * sigma * sigma));
    for (auto& v : w) v /= total;

    const long h = static_cast<long>(x.height()), wd = static_cast<long>(x.width());
    PixelTensor out(x.shape());
    for (std::size_t c = 0; c < x.channels(); ++c)
        for (long y = 0; y < h; ++y)
            for (long xx = 0; xx < wd; ++xx) {
                double acc = 0.0;
                for (long i = -half; i <= half; ++i)
                    for (long j = -half; j <= half; ++j)
                        acc += w[static_cast<std::size_t>(i + half)] * w[static_cast<std::size_t>(j + half)] *
                               x.at(c, static_cast<std::size_t>(fold(y + i, h)), static_cast<std::size_t>(fold(xx + j, wd)));
                out.at(c, static_cast<std::size_t>(y), static_cast<std::size_t>(xx)) = acc;
            }
    return out;
}

}  // namespace

TEST_CASE("reflect_index mirrors without repeating the edge") {
    CHECK(reflect_index(-1, 5) == 1);
    CHECK(reflect_index(-2, 5) == 2);
    CHECK(reflect_index(5, 5) == 3);
    CHECK(reflect_index(6, 5) == 2);
    CHECK(reflect_index(-9, 5) == 1);
    CHECK(reflect_index(0, 1) == 0);
    CHECK(reflect_index(17, 1) == 0);
    for (long i = -40; i < 40; ++i) CHECK(reflect_index(i, 7) == fold(i, 7));
}

TEST_CASE("gaussian kernel is normalized and symmetric") {
    const auto k = GaussianKernel::make(1.7);
    CHECK(k.ksize == kDefaultKernelSize);
    CHECK(kDefaultKernelSize == 33);
    double total = 0.0;
    for (double w : k.weights) total += w;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
    for (std::size_t i = 0; i < k.ksize; ++i) CHECK(k.weights[i] == k.weights[k.ksize - 1 - i]);
}

TEST_CASE("gaussian_blur argument errors") {
    PixelTensor x(Shape{1, 4, 4});
    CHECK_THROWS_AS(gaussian_blur(x, 1.0, 4), ArgumentError);
    CHECK_THROWS_AS(gaussian_blur(x, 1.0, 1), ArgumentError);
    CHECK_THROWS_AS(gaussian_blur(x, 0.0, 5), ArgumentError);
    CHECK_THROWS_AS(gaussian_blur(x, -2.0, 5), ArgumentError);
}

TEST_CASE("gaussian_blur preserves constants") {
    PixelTensor c(Shape{3, 10, 12}, 0.7);
    for (double sigma : {0.3, 1.0, 2.5, 12.0}) {
        const auto b = gaussian_blur(c, sigma);
        for (double v : b.data()) REQUIRE(v == doctest::Approx(0.7).epsilon(1e-14));
    }
}

TEST_CASE("impulse response at the center of a 33x33 image is the squared center weight") {
    PixelTensor impulse(Shape{1, 33, 33});
    impulse.at(0, 16, 16) = 1.0;
    double total = 0.0;
    for (int i = -16; i <= 16; ++i) total += std::exp(-0.5 * i * i);
    const double k0 = 1.0 / total;  // exp(0) / total
    const auto b = gaussian_blur(impulse, 1.0, 33);
    CHECK(b.at(0, 16, 16) == doctest::Approx(k0 * k0).epsilon(1e-14));
    CHECK(b.at(0, 16, 16) == doctest::Approx(naive_blur(impulse, 1.0, 33).at(0, 16, 16)).epsilon(1e-14));
}

TEST_CASE("separable blur matches the naive 2-D oracle") {
    Rng rng(11);
    for (auto [sigma, ksize] : {std::pair<double, long>{1.0, 33}, {2.0, 33}, {0.8, 5}, {3.0, 9}}) {
        for (auto shape : {Shape{1, 16, 16}, Shape{3, 7, 16}, Shape{1, 1, 5}}) {
            const auto x = testing::random_tensor(shape, rng);
            CHECK(max_abs_diff(gaussian_blur(x, sigma, static_cast<std::size_t>(ksize)), naive_blur(x, sigma, ksize)) <= 1e-12);
        }
    }
}

TEST_CASE("diagonal motion kernel and convolution") {
    const auto k = Kernel2D::diagonal(29);
    CHECK(k.rows() == 29);
    CHECK(k.is_normalized());
    CHECK(k(3, 3) == doctest::Approx(1.0 / 29.0));
    CHECK(k(3, 4) == 0.0);
    CHECK_THROWS_AS(Kernel2D::diagonal(4), ArgumentError);
    CHECK_THROWS_AS(Kernel2D(2, 3, std::vector<double>(6, 1.0 / 6)), ArgumentError);

    Rng rng(5);
    const auto x = testing::random_tensor(Shape{2, 6, 9}, rng);
    CHECK(convolve(x, Kernel2D::identity()) == x);

    // A kernel with a single off-center tap is a shift; convolution flips it.
    std::vector<double> w(9, 0.0);
    w[0 * 3 + 2] = 1.0;  // row -1, col +1 in kernel coordinates
    const auto shifted = convolve(x, Kernel2D(3, 3, w));
    CHECK(shifted.at(0, 2, 4) == x.at(0, 3, 3));  // out(y, x) = in(y + 1, x - 1)
}
