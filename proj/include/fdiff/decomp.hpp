#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "fdiff/filters.hpp"
#include "fdiff/tensor.hpp"

namespace fdiff {

/// Binary H x W map, broadcast over channels when applied.
class SpatialMask {
public:
    SpatialMask(std::size_t height, std::size_t width, std::vector<std::uint8_t> bits);

    // Columns [begin, end) set, everything else clear.
    static SpatialMask columns(std::size_t height, std::size_t width, std::size_t begin, std::size_t end);
    static SpatialMask ones(std::size_t height, std::size_t width);

    std::size_t height() const noexcept { return height_; }
    std::size_t width() const noexcept { return width_; }
    bool operator()(std::size_t y, std::size_t x) const { return bits_[y * width_ + x] != 0; }
    const std::vector<std::uint8_t>& bits() const noexcept { return bits_; }

private:
    std::size_t height_;
    std::size_t width_;
    std::vector<std::uint8_t> bits_;
};

namespace op {

// G_{sigma_n}( ... G_{sigma_1}(x)), applied first to last.
struct Lowpass {
    std::vector<GaussianKernel> cascade;
};
// G_inner(x) - G_outer(G_inner(x))
struct Bandpass {
    GaussianKernel inner;
    GaussianKernel outer;
};
// x - G(x)
struct HighpassResidual {
    GaussianKernel kernel;
};
struct Gray {};
struct ColorResidual {};
struct Blurred {
    Kernel2D kernel;
};
struct ResidualOf {
    Kernel2D kernel;
};
struct Mask {
    SpatialMask mask;
};
struct Scale {
    double weight;
};

}  // namespace op

using ComponentKind = std::variant<op::Lowpass, op::Bandpass, op::HighpassResidual, op::Gray, op::ColorResidual,
                                   op::Blurred, op::ResidualOf, op::Mask, op::Scale>;

/// One linear component operator f_i.
class ComponentOp {
public:
    explicit ComponentOp(ComponentKind kind) : kind_(std::move(kind)) {}

    PixelTensor operator()(const PixelTensor& x) const;

    // Throws ShapeError if x cannot be fed to this operator.
    void check_input(const Shape& shape) const;
    // f(f(x)) == f(x) holds exactly (gray, color residual, mask, unit scale).
    bool is_projection() const;

    std::string name() const;
    nlohmann::json describe() const;
    const ComponentKind& kind() const noexcept { return kind_; }

private:
    ComponentKind kind_;
};

/// Ordered components f_1..f_N with sum_i f_i(x) == x.
///
/// The constructor checks completeness on three random tensors of the probe
/// shape and throws ArgumentError when the components do not recompose the
/// input to 1e-5.
class Decomposition {
public:
    Decomposition(std::string kind, std::vector<ComponentOp> components, std::vector<std::string> labels,
                  Shape probe);

    const std::string& kind() const noexcept { return kind_; }
    std::size_t size() const noexcept { return components_.size(); }
    const ComponentOp& component(std::size_t i) const { return components_.at(i); }
    const std::vector<ComponentOp>& components() const noexcept { return components_; }
    const std::vector<std::string>& labels() const noexcept { return labels_; }
    std::optional<std::size_t> index_of(const std::string& label) const;

    void check_input(const Shape& shape) const;
    std::vector<PixelTensor> apply(const PixelTensor& x) const;

    nlohmann::json describe() const;

private:
    std::string kind_;
    std::vector<ComponentOp> components_;
    std::vector<std::string> labels_;
};

PixelTensor recompose(std::span<const PixelTensor> parts);

// ["high", "low"]: x - G_sigma(x), G_sigma(x).
Decomposition make_hybrid(double sigma, std::size_t ksize = kDefaultKernelSize);
// ["high", "med", "low"]: Laplacian-pyramid style subbands without decimation.
Decomposition make_triple(double sigma1, double sigma2, std::size_t ksize = kDefaultKernelSize);
// ["gray", "color"] over 3-channel images.
Decomposition make_gray_color();
// ["motion", "residual"]: K * x, x - K * x.
Decomposition make_motion(const Kernel2D& kernel);
// One component per mask; masks must tile the image with no overlap and no hole.
Decomposition make_spatial(const std::vector<SpatialMask>& masks);
// Component i is a_i x. Weights are rescaled to sum to 1; they may be negative.
Decomposition make_scaling(std::vector<double> weights);
Decomposition make_identity();

}  // namespace fdiff
