#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fdiff/sampler.hpp"
#include "fdiff/schedule.hpp"
#include "fdiff/tensor.hpp"

namespace fdiff {

struct MixtureComponent {
    double weight;
    PixelTensor mean;
    double variance;  // isotropic s^2
};

/// Gaussian mixture data distribution sum_k w_k N(mu_k, s_k^2 I).
class MixtureCondition {
public:
    explicit MixtureCondition(std::vector<MixtureComponent> components);
    static MixtureCondition gaussian(PixelTensor mean, double variance);

    const std::vector<MixtureComponent>& components() const noexcept { return components_; }
    const Shape& shape() const { return components_.front().mean.shape(); }
    PixelTensor mean() const;

private:
    std::vector<MixtureComponent> components_;
};

// E[x_0 | x_t] under the forward process x_t = sqrt(a) x_0 + sqrt(1 - a) eps.
PixelTensor posterior_x0(const MixtureCondition& m, const PixelTensor& x_t, double alpha_bar);

// MMSE noise estimate (x_t - sqrt(a) E[x_0 | x_t]) / sqrt(1 - a); zeros when a == 1.
PixelTensor predict_noise(const MixtureCondition& m, const PixelTensor& x_t, double alpha_bar);
PixelTensor predict_noise(const MixtureCondition& m, const PixelTensor& x_t, std::size_t t, const Schedule& s);

std::vector<PixelTensor> sample_data(const MixtureCondition& m, std::size_t n, std::uint64_t seed);

/// Closed-form predictor over named mixtures.
///
/// Condition::payload selects the mixture. Guidance other than 1 needs an
/// unconditional mixture: eps = eps_u + g (eps_c - eps_u).
class OraclePredictor : public NoisePredictor {
public:
    OraclePredictor(Schedule schedule, std::map<std::string, MixtureCondition> mixtures,
                    std::optional<std::string> unconditional = std::nullopt);

    std::vector<PixelTensor> predict(const PixelTensor& x_t, std::size_t t,
                                     std::span<const Condition> conditions) override;

    const std::map<std::string, MixtureCondition>& mixtures() const noexcept { return mixtures_; }

private:
    const MixtureCondition& find(const std::string& id) const;

    Schedule schedule_;
    std::map<std::string, MixtureCondition> mixtures_;
    std::optional<std::string> unconditional_;
};

// {"conditions": {"A": [{"w": 1.0, "mean": <png path | number | flat array>, "var": 1.0}, ...], ...}}
// PNG means are resampled to `shape`; relative paths resolve against base_dir.
std::map<std::string, MixtureCondition> load_mixtures(const nlohmann::json& spec, const Shape& shape,
                                                      const std::filesystem::path& base_dir = {});

}  // namespace fdiff
