#include "fdiff/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fdiff/errors.hpp"
#include "fdiff/image_io.hpp"
#include "fdiff/resample.hpp"
#include "fdiff/rng.hpp"

namespace fdiff {

MixtureCondition::MixtureCondition(std::vector<MixtureComponent> components) : components_(std::move(components)) {
    if (components_.empty()) throw ArgumentError("mixture needs at least one component");
    double total = 0.0;
    for (const auto& c : components_) {
        if (!(c.weight >= 0.0)) throw ArgumentError("mixture weights must be non-negative");
        if (!(c.variance > 0.0) || !std::isfinite(c.variance)) throw ArgumentError("mixture variance must be positive");
        if (c.mean.shape() != components_.front().mean.shape()) {
            throw ShapeError("mixture means must share one shape");
        }
        if (c.mean.empty()) throw ShapeError("mixture mean is empty");
        total += c.weight;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw ArgumentError("mixture weights sum to " + std::to_string(total) + ", expected 1");
    }
}

MixtureCondition MixtureCondition::gaussian(PixelTensor mean, double variance) {
    return MixtureCondition({MixtureComponent{1.0, std::move(mean), variance}});
}

PixelTensor MixtureCondition::mean() const {
    PixelTensor out(shape());
    for (const auto& c : components_) out.axpy(c.weight, c.mean);
    return out;
}

PixelTensor posterior_x0(const MixtureCondition& m, const PixelTensor& x_t, double alpha_bar) {
    if (!(alpha_bar > 0.0 && alpha_bar <= 1.0)) throw ScheduleError("alpha_bar must be in (0, 1]");
    require_same_shape(x_t, m.components().front().mean, "posterior_x0");

    const double sqrt_a = std::sqrt(alpha_bar);
    const double dims = static_cast<double>(x_t.size());
    const auto& comps = m.components();

    // log responsibilities; the shared 2*pi factor cancels.
    std::vector<double> log_r(comps.size(), -std::numeric_limits<double>::infinity());
    for (std::size_t k = 0; k < comps.size(); ++k) {
        if (comps[k].weight == 0.0) continue;
        const double v = alpha_bar * comps[k].variance + (1.0 - alpha_bar);
        double sq = 0.0;
        const auto mu = comps[k].mean.data();
        const auto x = x_t.data();
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double d = x[i] - sqrt_a * mu[i];
            sq += d * d;
        }
        log_r[k] = std::log(comps[k].weight) - 0.5 * dims * std::log(v) - 0.5 * sq / v;
    }
    const double top = *std::max_element(log_r.begin(), log_r.end());
    double norm = 0.0;
    for (auto& l : log_r) {
        l = std::exp(l - top);
        norm += l;
    }

    PixelTensor out(x_t.shape());
    for (std::size_t k = 0; k < comps.size(); ++k) {
        const double r = log_r[k] / norm;
        if (r == 0.0) continue;
        const double s2 = comps[k].variance;
        const double v = alpha_bar * s2 + (1.0 - alpha_bar);
        const double c_mu = (1.0 - alpha_bar) / v;
        const double c_x = sqrt_a * s2 / v;
        const auto mu = comps[k].mean.data();
        const auto x = x_t.data();
        auto o = out.data();
        for (std::size_t i = 0; i < o.size(); ++i) o[i] += r * (c_mu * mu[i] + c_x * x[i]);
    }
    return out;
}

PixelTensor predict_noise(const MixtureCondition& m, const PixelTensor& x_t, double alpha_bar) {
    if (alpha_bar >= 1.0) return PixelTensor(x_t.shape());
    PixelTensor x0 = posterior_x0(m, x_t, alpha_bar);
    PixelTensor eps = linear_combination(1.0, x_t, -std::sqrt(alpha_bar), x0);
    return eps *= 1.0 / std::sqrt(1.0 - alpha_bar);
}

PixelTensor predict_noise(const MixtureCondition& m, const PixelTensor& x_t, std::size_t t, const Schedule& s) {
    return predict_noise(m, x_t, s.alpha_bar(t));
}

std::vector<PixelTensor> sample_data(const MixtureCondition& m, std::size_t n, std::uint64_t seed) {
    if (n == 0) throw ArgumentError("sample_data needs n >= 1");
    Rng rng(seed);
    const auto& comps = m.components();
    std::vector<PixelTensor> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        // Component choice by inverse CDF; zero-weight components are never picked.
        const double u = rng.uniform();
        std::size_t k = 0;
        double acc = 0.0;
        for (; k < comps.size(); ++k) {
            acc += comps[k].weight;
            if (u < acc && comps[k].weight > 0.0) break;
        }
        if (k == comps.size()) {
            k = comps.size() - 1;
            while (comps[k].weight == 0.0) --k;
        }
        PixelTensor draw = rng.normal_tensor(m.shape());
        draw *= std::sqrt(comps[k].variance);
        draw += comps[k].mean;
        out.push_back(std::move(draw));
    }
    return out;
}

OraclePredictor::OraclePredictor(Schedule schedule, std::map<std::string, MixtureCondition> mixtures,
                                 std::optional<std::string> unconditional)
    : schedule_(std::move(schedule)), mixtures_(std::move(mixtures)), unconditional_(std::move(unconditional)) {
    if (unconditional_ && !mixtures_.count(*unconditional_)) {
        throw ArgumentError("unconditional mixture '" + *unconditional_ + "' is not defined");
    }
}

const MixtureCondition& OraclePredictor::find(const std::string& id) const {
    const auto it = mixtures_.find(id);
    if (it == mixtures_.end()) throw ArgumentError("unknown mixture '" + id + "'");
    return it->second;
}

std::vector<PixelTensor> OraclePredictor::predict(const PixelTensor& x_t, std::size_t t,
                                                  std::span<const Condition> conditions) {
    const double a = schedule_.alpha_bar(t);
    std::optional<PixelTensor> uncond;
    std::vector<PixelTensor> out;
    out.reserve(conditions.size());
    for (const auto& c : conditions) {
        PixelTensor eps = predict_noise(find(c.payload), x_t, a);
        if (c.guidance != 1.0) {
            if (!unconditional_) {
                throw ArgumentError("guidance " + std::to_string(c.guidance) + " on '" + c.id +
                                    "' needs an unconditional mixture");
            }
            if (!uncond) uncond = predict_noise(find(*unconditional_), x_t, a);
            eps = linear_combination(1.0 - c.guidance, *uncond, c.guidance, eps);
        }
        out.push_back(std::move(eps));
    }
    return out;
}

namespace {

PixelTensor mean_from_json(const nlohmann::json& j, const Shape& shape, const std::filesystem::path& base_dir) {
    if (j.is_number()) return PixelTensor(shape, j.get<double>());
    if (j.is_array()) {
        auto values = j.get<std::vector<double>>();
        if (values.size() != shape.size()) {
            throw ArgumentError("inline mean has " + std::to_string(values.size()) + " values, expected " +
                                std::to_string(shape.size()));
        }
        return PixelTensor(shape, std::move(values));
    }
    if (j.is_string()) {
        std::filesystem::path p = j.get<std::string>();
        if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
        PixelTensor img = resample(load_image(p), shape.height, shape.width);
        if (img.channels() == shape.channels) return img;
        PixelTensor out(shape);
        for (std::size_t c = 0; c < shape.channels; ++c) {
            for (std::size_t y = 0; y < shape.height; ++y)
                for (std::size_t x = 0; x < shape.width; ++x)
                    out.at(c, y, x) = img.channels() == 1 ? img.at(0, y, x)
                                                          : (img.at(0, y, x) + img.at(1, y, x) + img.at(2, y, x)) / 3.0;
        }
        return out;
    }
    throw ArgumentError("mixture mean must be a PNG path, a number, or an array");
}

}  // namespace

std::map<std::string, MixtureCondition> load_mixtures(const nlohmann::json& spec, const Shape& shape,
                                                      const std::filesystem::path& base_dir) {
    if (!spec.is_object() || !spec.contains("conditions") || !spec["conditions"].is_object()) {
        throw ArgumentError("mixture spec needs a \"conditions\" object");
    }
    std::map<std::string, MixtureCondition> out;
    for (const auto& [id, comps] : spec["conditions"].items()) {
        if (!comps.is_array() || comps.empty()) throw ArgumentError("mixture '" + id + "' needs a component list");
        std::vector<MixtureComponent> parts;
        for (const auto& c : comps) {
            parts.push_back({c.value("w", 1.0), mean_from_json(c.at("mean"), shape, base_dir), c.value("var", 1.0)});
        }
        out.emplace(id, MixtureCondition(std::move(parts)));
    }
    return out;
}

}  // namespace fdiff
