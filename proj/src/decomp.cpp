#include "fdiff/decomp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "fdiff/errors.hpp"
#include "fdiff/rng.hpp"

namespace fdiff {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

PixelTensor channel_mean(const PixelTensor& x) {
    PixelTensor out(x.shape());
    const auto r = x.channel(0);
    const auto g = x.channel(1);
    const auto b = x.channel(2);
    for (std::size_t i = 0; i < r.size(); ++i) {
        const double m = (r[i] + g[i] + b[i]) / 3.0;
        out.channel(0)[i] = m;
        out.channel(1)[i] = m;
        out.channel(2)[i] = m;
    }
    return out;
}

PixelTensor masked(const PixelTensor& x, const SpatialMask& m) {
    PixelTensor out(x.shape());
    for (std::size_t c = 0; c < x.channels(); ++c)
        for (std::size_t y = 0; y < x.height(); ++y)
            for (std::size_t xx = 0; xx < x.width(); ++xx)
                if (m(y, xx)) out.at(c, y, xx) = x.at(c, y, xx);
    return out;
}

nlohmann::json kernel_json(const GaussianKernel& k) { return {{"sigma", k.sigma}, {"ksize", k.ksize}}; }

}  // namespace

SpatialMask::SpatialMask(std::size_t height, std::size_t width, std::vector<std::uint8_t> bits)
    : height_(height), width_(width), bits_(std::move(bits)) {
    if (height_ == 0 || width_ == 0) throw ArgumentError("mask must be at least 1x1");
    if (bits_.size() != height_ * width_) throw ArgumentError("mask bit count does not match its size");
    for (std::size_t i = 0; i < bits_.size(); ++i) {
        if (bits_[i] > 1) {
            throw ArgumentError("mask is not binary at pixel " + std::to_string(i) + " (row " +
                                std::to_string(i / width_) + ", col " + std::to_string(i % width_) + ")");
        }
    }
}

SpatialMask SpatialMask::columns(std::size_t height, std::size_t width, std::size_t begin, std::size_t end) {
    std::vector<std::uint8_t> bits(height * width, 0);
    for (std::size_t y = 0; y < height; ++y)
        for (std::size_t x = begin; x < std::min(end, width); ++x) bits[y * width + x] = 1;
    return SpatialMask(height, width, std::move(bits));
}

SpatialMask SpatialMask::ones(std::size_t height, std::size_t width) {
    return SpatialMask(height, width, std::vector<std::uint8_t>(height * width, 1));
}

PixelTensor ComponentOp::operator()(const PixelTensor& x) const {
    check_input(x.shape());
    return std::visit(
        overloaded{
            [&](const op::Lowpass& k) {
                PixelTensor y = x;
                for (const auto& g : k.cascade) y = gaussian_blur(y, g);
                return y;
            },
            [&](const op::Bandpass& k) {
                PixelTensor inner = gaussian_blur(x, k.inner);
                PixelTensor outer = gaussian_blur(inner, k.outer);
                return inner -= outer;
            },
            [&](const op::HighpassResidual& k) { return x - gaussian_blur(x, k.kernel); },
            [&](const op::Gray&) { return channel_mean(x); },
            [&](const op::ColorResidual&) { return x - channel_mean(x); },
            [&](const op::Blurred& k) { return convolve(x, k.kernel); },
            [&](const op::ResidualOf& k) { return x - convolve(x, k.kernel); },
            [&](const op::Mask& k) { return masked(x, k.mask); },
            [&](const op::Scale& k) { return k.weight * x; },
        },
        kind_);
}

void ComponentOp::check_input(const Shape& shape) const {
    if (shape.size() == 0) throw ShapeError("component " + name() + ": empty input");
    if (std::holds_alternative<op::Gray>(kind_) || std::holds_alternative<op::ColorResidual>(kind_)) {
        if (shape.channels != 3) {
            throw ShapeError("component " + name() + " needs 3 channels, got " + shape.str());
        }
    }
    if (const auto* m = std::get_if<op::Mask>(&kind_)) {
        if (m->mask.height() != shape.height || m->mask.width() != shape.width) {
            throw ShapeError("mask is " + std::to_string(m->mask.height()) + "x" + std::to_string(m->mask.width()) +
                             " but input is " + shape.str());
        }
    }
}

bool ComponentOp::is_projection() const {
    return std::visit(overloaded{
                          [](const op::Gray&) { return true; },
                          [](const op::ColorResidual&) { return true; },
                          [](const op::Mask&) { return true; },
                          [](const op::Scale& s) { return s.weight == 0.0 || s.weight == 1.0; },
                          [](const auto&) { return false; },
                      },
                      kind_);
}

std::string ComponentOp::name() const {
    return std::visit(overloaded{
                          [](const op::Lowpass&) { return std::string("lowpass"); },
                          [](const op::Bandpass&) { return std::string("bandpass"); },
                          [](const op::HighpassResidual&) { return std::string("highpass_residual"); },
                          [](const op::Gray&) { return std::string("gray"); },
                          [](const op::ColorResidual&) { return std::string("color_residual"); },
                          [](const op::Blurred&) { return std::string("blurred"); },
                          [](const op::ResidualOf&) { return std::string("residual_of"); },
                          [](const op::Mask&) { return std::string("mask"); },
                          [](const op::Scale&) { return std::string("scale"); },
                      },
                      kind_);
}

nlohmann::json ComponentOp::describe() const {
    nlohmann::json j{{"op", name()}};
    std::visit(overloaded{
                   [&](const op::Lowpass& k) {
                       j["cascade"] = nlohmann::json::array();
                       for (const auto& g : k.cascade) j["cascade"].push_back(kernel_json(g));
                   },
                   [&](const op::Bandpass& k) {
                       j["inner"] = kernel_json(k.inner);
                       j["outer"] = kernel_json(k.outer);
                   },
                   [&](const op::HighpassResidual& k) { j["kernel"] = kernel_json(k.kernel); },
                   [&](const op::Blurred& k) { j["kernel_size"] = {k.kernel.rows(), k.kernel.cols()}; },
                   [&](const op::ResidualOf& k) { j["kernel_size"] = {k.kernel.rows(), k.kernel.cols()}; },
                   [&](const op::Mask& k) {
                       j["coverage"] = std::count(k.mask.bits().begin(), k.mask.bits().end(), 1);
                   },
                   [&](const op::Scale& k) { j["weight"] = k.weight; },
                   [](const auto&) {},
               },
               kind_);
    return j;
}

Decomposition::Decomposition(std::string kind, std::vector<ComponentOp> components, std::vector<std::string> labels,
                             Shape probe)
    : kind_(std::move(kind)), components_(std::move(components)), labels_(std::move(labels)) {
    if (components_.empty()) throw ArgumentError("decomposition needs at least one component");
    if (labels_.size() != components_.size()) {
        throw ArgumentError("decomposition has " + std::to_string(components_.size()) + " components but " +
                            std::to_string(labels_.size()) + " labels");
    }
    if (std::set<std::string>(labels_.begin(), labels_.end()).size() != labels_.size()) {
        throw ArgumentError("decomposition labels must be unique");
    }
    check_input(probe);

    Rng rng(0x5eed'c0de);
    for (int trial = 0; trial < 3; ++trial) {
        PixelTensor x(probe);
        for (auto& v : x.data()) v = 2.0 * rng.uniform() - 1.0;
        const double err = max_abs_diff(recompose(apply(x)), x);
        if (!(err <= 1e-5)) {
            throw ArgumentError(kind_ + " decomposition does not sum to the identity (error " + std::to_string(err) +
                                ")");
        }
    }
}

std::optional<std::size_t> Decomposition::index_of(const std::string& label) const {
    const auto it = std::find(labels_.begin(), labels_.end(), label);
    if (it == labels_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - labels_.begin());
}

void Decomposition::check_input(const Shape& shape) const {
    for (const auto& c : components_) c.check_input(shape);
}

std::vector<PixelTensor> Decomposition::apply(const PixelTensor& x) const {
    check_input(x.shape());
    std::vector<PixelTensor> parts;
    parts.reserve(components_.size());
    for (const auto& c : components_) parts.push_back(c(x));
    return parts;
}

nlohmann::json Decomposition::describe() const {
    nlohmann::json j{{"kind", kind_}, {"components", nlohmann::json::array()}};
    for (std::size_t i = 0; i < components_.size(); ++i) {
        auto c = components_[i].describe();
        c["label"] = labels_[i];
        j["components"].push_back(std::move(c));
    }
    return j;
}

PixelTensor recompose(std::span<const PixelTensor> parts) { return sum(parts); }

namespace {
// Shape used for the construction-time completeness check of shape-agnostic decompositions.
constexpr Shape kProbe{3, 19, 23};
}  // namespace

Decomposition make_hybrid(double sigma, std::size_t ksize) {
    const auto g = GaussianKernel::make(sigma, ksize);
    return Decomposition("hybrid", {ComponentOp(op::HighpassResidual{g}), ComponentOp(op::Lowpass{{g}})},
                         {"high", "low"}, kProbe);
}

Decomposition make_triple(double sigma1, double sigma2, std::size_t ksize) {
    const auto g1 = GaussianKernel::make(sigma1, ksize);
    const auto g2 = GaussianKernel::make(sigma2, ksize);
    return Decomposition("triple",
                         {ComponentOp(op::HighpassResidual{g1}), ComponentOp(op::Bandpass{g1, g2}),
                          ComponentOp(op::Lowpass{{g1, g2}})},
                         {"high", "med", "low"}, kProbe);
}

Decomposition make_gray_color() {
    return Decomposition("gray_color", {ComponentOp(op::Gray{}), ComponentOp(op::ColorResidual{})},
                         {"gray", "color"}, kProbe);
}

Decomposition make_motion(const Kernel2D& kernel) {
    if (!kernel.is_normalized()) {
        throw ArgumentError("motion kernel must be non-negative and sum to 1 (sum is " +
                            std::to_string(kernel.total()) + ")");
    }
    return Decomposition("motion", {ComponentOp(op::Blurred{kernel}), ComponentOp(op::ResidualOf{kernel})},
                         {"motion", "residual"}, kProbe);
}

Decomposition make_spatial(const std::vector<SpatialMask>& masks) {
    if (masks.empty()) throw ArgumentError("spatial decomposition needs at least one mask");
    const std::size_t h = masks.front().height();
    const std::size_t w = masks.front().width();
    for (std::size_t i = 1; i < masks.size(); ++i) {
        if (masks[i].height() != h || masks[i].width() != w) {
            throw ArgumentError("mask " + std::to_string(i) + " has a different size from mask 0");
        }
    }
    for (std::size_t p = 0; p < h * w; ++p) {
        int cover = 0;
        for (const auto& m : masks) cover += m.bits()[p];
        if (cover != 1) {
            throw ArgumentError(std::string(cover == 0 ? "hole" : "overlap") + " in mask set at pixel " +
                                std::to_string(p) + " (row " + std::to_string(p / w) + ", col " +
                                std::to_string(p % w) + ")");
        }
    }
    std::vector<ComponentOp> ops;
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < masks.size(); ++i) {
        ops.emplace_back(op::Mask{masks[i]});
        labels.push_back("region" + std::to_string(i));
    }
    return Decomposition("spatial", std::move(ops), std::move(labels), Shape{3, h, w});
}

Decomposition make_scaling(std::vector<double> weights) {
    if (weights.empty()) throw ArgumentError("scaling decomposition needs at least one weight");
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (!std::isfinite(total) || total == 0.0) {
        throw ArgumentError("scaling weights must have a finite, nonzero sum");
    }
    if (total != 1.0)
        for (auto& a : weights) a /= total;
    std::vector<ComponentOp> ops;
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        ops.emplace_back(op::Scale{weights[i]});
        labels.push_back("term" + std::to_string(i));
    }
    return Decomposition("scaling", std::move(ops), std::move(labels), kProbe);
}

Decomposition make_identity() { return make_scaling({1.0}); }

}  // namespace fdiff
