#pragma once

#include <cstdint>
#include <optional>
#include <random>

#include "fdiff/tensor.hpp"

namespace fdiff {

/// Seedable generator with a platform-independent normal stream.
///
/// std::normal_distribution is implementation-defined, so Gaussian draws are
/// produced here with the Box-Muller transform over std::mt19937_64, whose
/// output sequence is fixed by the standard. Uniforms take the top 53 bits of
/// one engine word. Normals are generated in pairs; the second of each pair
/// is returned by the next call. Tensors are filled in row-major order.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Uniform in (0, 1).
    double uniform();
    double normal();
    PixelTensor normal_tensor(const Shape& shape);

private:
    std::mt19937_64 engine_;
    std::optional<double> spare_;
};

}  // namespace fdiff
