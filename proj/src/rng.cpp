#include "fdiff/rng.hpp"

#include <cmath>
#include <numbers>

namespace fdiff {

double Rng::uniform() {
    // (k + 0.5) / 2^53 never hits 0 or 1, so log() below stays finite.
    const std::uint64_t k = engine_() >> 11;
    return (static_cast<double>(k) + 0.5) * 0x1.0p-53;
}

double Rng::normal() {
    if (spare_) {
        const double v = *spare_;
        spare_.reset();
        return v;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    return r * std::cos(theta);
}

PixelTensor Rng::normal_tensor(const Shape& shape) {
    PixelTensor out(shape);
    for (auto& v : out.data()) v = normal();
    return out;
}

}  // namespace fdiff
