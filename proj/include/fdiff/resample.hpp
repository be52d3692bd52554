#pragma once

#include <cstddef>

#include "fdiff/tensor.hpp"

namespace fdiff {

// Bilinear resize with half-pixel centers (align_corners = false), no
// antialiasing. Returns an exact copy when the size is unchanged.
PixelTensor resample(const PixelTensor& x, std::size_t out_h, std::size_t out_w);

}  // namespace fdiff
