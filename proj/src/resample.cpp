#include "fdiff/resample.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "fdiff/errors.hpp"

namespace fdiff {

namespace {

struct Tap {
    std::size_t lo;
    std::size_t hi;
    double frac;
};

std::vector<Tap> taps(std::size_t in, std::size_t out) {
    std::vector<Tap> result(out);
    const double scale = static_cast<double>(in) / static_cast<double>(out);
    for (std::size_t i = 0; i < out; ++i) {
        double src = (static_cast<double>(i) + 0.5) * scale - 0.5;
        src = std::max(src, 0.0);
        auto lo = static_cast<std::size_t>(std::floor(src));
        lo = std::min(lo, in - 1);
        const std::size_t hi = std::min(lo + 1, in - 1);
        result[i] = {lo, hi, src - static_cast<double>(lo)};
    }
    return result;
}

}  // namespace

PixelTensor resample(const PixelTensor& x, std::size_t out_h, std::size_t out_w) {
    if (out_h == 0 || out_w == 0) throw ArgumentError("resample: target size must be at least 1x1");
    if (x.empty()) throw ShapeError("resample: empty input");
    if (out_h == x.height() && out_w == x.width()) return x;

    const auto ty = taps(x.height(), out_h);
    const auto tx = taps(x.width(), out_w);
    PixelTensor out(Shape{x.channels(), out_h, out_w});
    for (std::size_t c = 0; c < x.channels(); ++c) {
        for (std::size_t i = 0; i < out_h; ++i) {
            const auto& [y0, y1, fy] = ty[i];
            for (std::size_t j = 0; j < out_w; ++j) {
                const auto& [x0, x1, fx] = tx[j];
                // a + f * (b - a) keeps constant regions bit-exact.
                const double top = x.at(c, y0, x0) + fx * (x.at(c, y0, x1) - x.at(c, y0, x0));
                const double bottom = x.at(c, y1, x0) + fx * (x.at(c, y1, x1) - x.at(c, y1, x0));
                out.at(c, i, j) = top + fy * (bottom - top);
            }
        }
    }
    return out;
}

}  // namespace fdiff
