#pragma once

#include <cstdint>
#include <filesystem>

#include "fdiff/tensor.hpp"

namespace fdiff {

// 8-bit grayscale or RGB PNG -> model space via v / 127.5 - 1. Alpha is dropped.
PixelTensor load_image(const std::filesystem::path& path);

// Clamp to [-1, 1], map to round((v + 1) * 127.5) and write an 8-bit PNG.
// Tensors must have 1 or 3 channels.
void save_image(const PixelTensor& x, const std::filesystem::path& path);

std::uint8_t to_byte(double model_value);
double from_byte(std::uint8_t byte);

}  // namespace fdiff
