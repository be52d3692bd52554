#include "fdiff/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

#include "fdiff/errors.hpp"

namespace fdiff {

std::uint8_t to_byte(double model_value) {
    const double v = std::clamp(model_value, -1.0, 1.0);
    return static_cast<std::uint8_t>(std::lround((v + 1.0) * 127.5));
}

double from_byte(std::uint8_t byte) { return static_cast<double>(byte) / 127.5 - 1.0; }

namespace {

struct PngImage {
    png_image image{};
    PngImage() {
        std::memset(&image, 0, sizeof(image));
        image.version = PNG_IMAGE_VERSION;
    }
    ~PngImage() { png_image_free(&image); }
    PngImage(const PngImage&) = delete;
    PngImage& operator=(const PngImage&) = delete;
};

}  // namespace

PixelTensor load_image(const std::filesystem::path& path) {
    PngImage png;
    if (!png_image_begin_read_from_file(&png.image, path.c_str())) {
        throw DecodeError("cannot read PNG '" + path.string() + "': " + png.image.message);
    }
    if (png.image.format & PNG_FORMAT_FLAG_LINEAR) {
        throw DecodeError("unsupported bit depth in '" + path.string() + "': only 8-bit PNG is accepted");
    }
    const bool color = png.image.format & PNG_FORMAT_FLAG_COLOR;
    const bool alpha = png.image.format & PNG_FORMAT_FLAG_ALPHA;
    // Read with alpha kept (when present) so it can be dropped rather than composited.
    png.image.format = color ? (alpha ? PNG_FORMAT_RGBA : PNG_FORMAT_RGB) : (alpha ? PNG_FORMAT_GA : PNG_FORMAT_GRAY);

    std::vector<png_byte> buffer(PNG_IMAGE_SIZE(png.image));
    if (!png_image_finish_read(&png.image, nullptr, buffer.data(), 0, nullptr)) {
        throw DecodeError("cannot decode PNG '" + path.string() + "': " + png.image.message);
    }

    const std::size_t stride = PNG_IMAGE_PIXEL_CHANNELS(png.image.format);
    const std::size_t channels = color ? 3 : 1;
    Shape shape{channels, png.image.height, png.image.width};
    PixelTensor out(shape);
    for (std::size_t y = 0; y < shape.height; ++y) {
        for (std::size_t x = 0; x < shape.width; ++x) {
            const png_byte* px = &buffer[(y * shape.width + x) * stride];
            for (std::size_t c = 0; c < channels; ++c) out.at(c, y, x) = from_byte(px[c]);
        }
    }
    return out;
}

void save_image(const PixelTensor& x, const std::filesystem::path& path) {
    if (x.channels() != 1 && x.channels() != 3) {
        throw ShapeError("save_image needs 1 or 3 channels, got " + x.shape().str());
    }
    if (!x.all_finite()) throw ArgumentError("save_image: tensor has non-finite values");

    PngImage png;
    png.image.width = static_cast<png_uint_32>(x.width());
    png.image.height = static_cast<png_uint_32>(x.height());
    png.image.format = x.channels() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;

    const std::size_t c_count = x.channels();
    std::vector<png_byte> buffer(x.size());
    for (std::size_t y = 0; y < x.height(); ++y)
        for (std::size_t xx = 0; xx < x.width(); ++xx)
            for (std::size_t c = 0; c < c_count; ++c)
                buffer[(y * x.width() + xx) * c_count + c] = to_byte(x.at(c, y, xx));

    if (!png_image_write_to_file(&png.image, path.c_str(), 0, buffer.data(), 0, nullptr)) {
        throw IoError("cannot write PNG '" + path.string() + "': " + png.image.message);
    }
}

}  // namespace fdiff
