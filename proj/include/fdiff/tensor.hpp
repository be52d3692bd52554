#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace fdiff {

struct Shape {
    std::size_t channels = 0;
    std::size_t height = 0;
    std::size_t width = 0;

    std::size_t size() const noexcept { return channels * height * width; }
    std::size_t plane() const noexcept { return height * width; }
    bool operator==(const Shape&) const = default;
    std::string str() const;
};

/// C x H x W image or noise array, row-major, channel planes contiguous.
///
/// Model space is nominally [-1, 1]; noise tensors are unbounded. Values are
/// stored in double precision so that long chains of linear operators stay
/// well inside the 1e-6 tolerances the sampler invariants are checked at.
class PixelTensor {
public:
    PixelTensor() = default;
    explicit PixelTensor(Shape shape, double fill = 0.0);
    PixelTensor(Shape shape, std::vector<double> data);

    static PixelTensor zeros_like(const PixelTensor& other) { return PixelTensor(other.shape()); }

    const Shape& shape() const noexcept { return shape_; }
    std::size_t channels() const noexcept { return shape_.channels; }
    std::size_t height() const noexcept { return shape_.height; }
    std::size_t width() const noexcept { return shape_.width; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    std::span<const double> data() const noexcept { return data_; }
    std::span<double> data() noexcept { return data_; }

    double& at(std::size_t c, std::size_t y, std::size_t x) {
        return data_[(c * shape_.height + y) * shape_.width + x];
    }
    double at(std::size_t c, std::size_t y, std::size_t x) const {
        return data_[(c * shape_.height + y) * shape_.width + x];
    }

    std::span<const double> channel(std::size_t c) const {
        return std::span<const double>(data_).subspan(c * shape_.plane(), shape_.plane());
    }
    std::span<double> channel(std::size_t c) {
        return std::span<double>(data_).subspan(c * shape_.plane(), shape_.plane());
    }

    bool all_finite() const noexcept;

    PixelTensor& operator+=(const PixelTensor& other);
    PixelTensor& operator-=(const PixelTensor& other);
    PixelTensor& operator*=(double scale);
    // this += scale * other
    PixelTensor& axpy(double scale, const PixelTensor& other);

    bool operator==(const PixelTensor&) const = default;

private:
    Shape shape_;
    std::vector<double> data_;
};

PixelTensor operator+(PixelTensor a, const PixelTensor& b);
PixelTensor operator-(PixelTensor a, const PixelTensor& b);
PixelTensor operator*(double scale, PixelTensor a);
PixelTensor operator*(PixelTensor a, double scale);

// alpha * a + beta * b
PixelTensor linear_combination(double alpha, const PixelTensor& a, double beta, const PixelTensor& b);

PixelTensor sum(std::span<const PixelTensor> parts);

double max_abs(const PixelTensor& x);
double max_abs_diff(const PixelTensor& a, const PixelTensor& b);
double dot(const PixelTensor& a, const PixelTensor& b);
double mean(const PixelTensor& x);

void require_same_shape(const PixelTensor& a, const PixelTensor& b, const char* what);

}  // namespace fdiff
