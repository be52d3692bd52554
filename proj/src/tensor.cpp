#include "fdiff/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fdiff/errors.hpp"

namespace fdiff {

ValidationError::ValidationError(std::vector<std::string> problems)
    : std::runtime_error([&] {
          std::string msg = "invalid configuration";
          for (const auto& p : problems) msg += "\n  - " + p;
          return msg;
      }()),
      problems_(std::move(problems)) {}

std::string Shape::str() const {
    return std::to_string(channels) + "x" + std::to_string(height) + "x" + std::to_string(width);
}

PixelTensor::PixelTensor(Shape shape, double fill) : shape_(shape), data_(shape.size(), fill) {}

PixelTensor::PixelTensor(Shape shape, std::vector<double> data) : shape_(shape), data_(std::move(data)) {
    if (data_.size() != shape_.size()) {
        throw ShapeError("tensor data length " + std::to_string(data_.size()) + " does not match shape " +
                         shape_.str());
    }
}

bool PixelTensor::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void require_same_shape(const PixelTensor& a, const PixelTensor& b, const char* what) {
    if (a.shape() != b.shape()) {
        throw ShapeError(std::string(what) + ": shape " + a.shape().str() + " vs " + b.shape().str());
    }
}

PixelTensor& PixelTensor::operator+=(const PixelTensor& other) {
    require_same_shape(*this, other, "add");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

PixelTensor& PixelTensor::operator-=(const PixelTensor& other) {
    require_same_shape(*this, other, "subtract");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
    return *this;
}

PixelTensor& PixelTensor::operator*=(double scale) {
    for (auto& v : data_) v *= scale;
    return *this;
}

PixelTensor& PixelTensor::axpy(double scale, const PixelTensor& other) {
    require_same_shape(*this, other, "axpy");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += scale * other.data_[i];
    return *this;
}

PixelTensor operator+(PixelTensor a, const PixelTensor& b) { return a += b; }
PixelTensor operator-(PixelTensor a, const PixelTensor& b) { return a -= b; }
PixelTensor operator*(double scale, PixelTensor a) { return a *= scale; }
PixelTensor operator*(PixelTensor a, double scale) { return a *= scale; }

PixelTensor linear_combination(double alpha, const PixelTensor& a, double beta, const PixelTensor& b) {
    require_same_shape(a, b, "linear_combination");
    PixelTensor out(a.shape());
    auto o = out.data();
    auto x = a.data();
    auto y = b.data();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] = alpha * x[i] + beta * y[i];
    return out;
}

PixelTensor sum(std::span<const PixelTensor> parts) {
    if (parts.empty()) throw ArgumentError("sum of an empty tensor list");
    PixelTensor out = parts.front();
    for (std::size_t i = 1; i < parts.size(); ++i) out += parts[i];
    return out;
}

double max_abs(const PixelTensor& x) {
    double m = 0.0;
    for (double v : x.data()) m = std::max(m, std::abs(v));
    return m;
}

double max_abs_diff(const PixelTensor& a, const PixelTensor& b) {
    require_same_shape(a, b, "max_abs_diff");
    double m = 0.0;
    auto x = a.data();
    auto y = b.data();
    for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i] - y[i]));
    return m;
}

double dot(const PixelTensor& a, const PixelTensor& b) {
    require_same_shape(a, b, "dot");
    return std::inner_product(a.data().begin(), a.data().end(), b.data().begin(), 0.0);
}

double mean(const PixelTensor& x) {
    if (x.empty()) return 0.0;
    return std::accumulate(x.data().begin(), x.data().end(), 0.0) / static_cast<double>(x.size());
}

}  // namespace fdiff
