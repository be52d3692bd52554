#include "fdiff/sampler.hpp"

#include <chrono>
#include <cmath>

#include "fdiff/rng.hpp"
#include "fdiff/update.hpp"

namespace fdiff {

std::string to_string(UpdateKind kind) { return kind == UpdateKind::ddim ? "ddim" : "ddpm"; }

UpdateKind parse_update_kind(const std::string& name) {
    if (name == "ddim") return UpdateKind::ddim;
    if (name == "ddpm") return UpdateKind::ddpm;
    throw ArgumentError("unknown sampler kind '" + name + "' (expected ddim or ddpm)");
}

void SamplerConfig::validate(const Schedule& schedule) const {
    if (steps < 1) throw ArgumentError("steps must be at least 1");
    if (steps > schedule.T()) {
        throw ArgumentError("steps (" + std::to_string(steps) + ") exceeds schedule length " +
                            std::to_string(schedule.T()));
    }
    if (channels != 1 && channels != 3) throw ArgumentError("channels must be 1 or 3");
    if (height == 0 || width == 0) throw ArgumentError("resolution must be at least 1x1");
}

PixelTensor composite_noise(const Decomposition& d, std::span<const PixelTensor> eps) {
    if (eps.size() != d.size()) {
        throw ArgumentError("composite_noise: " + std::to_string(eps.size()) + " noise estimates for " +
                            std::to_string(d.size()) + " components");
    }
    PixelTensor out = d.component(0)(eps[0]);
    for (std::size_t i = 1; i < eps.size(); ++i) out += d.component(i)(eps[i]);
    return out;
}

PixelTensor project_component(const PixelTensor& x_t, const PixelTensor& x_ref, const Decomposition& d,
                              std::size_t fixed, std::size_t t, const Schedule& s, const PixelTensor& eps) {
    if (fixed >= d.size()) {
        throw ArgumentError("fixed component index " + std::to_string(fixed) + " out of range for " +
                            std::to_string(d.size()) + " components");
    }
    require_same_shape(x_t, x_ref, "project_component");
    const double a = s.alpha_bar(t);
    PixelTensor noised = x_ref;
    if (a < 1.0) {
        require_same_shape(x_t, eps, "project_component");
        noised = linear_combination(std::sqrt(a), x_ref, std::sqrt(1.0 - a), eps);
    }
    PixelTensor out = d.component(fixed)(noised);
    for (std::size_t i = 0; i < d.size(); ++i)
        if (i != fixed) out += d.component(i)(x_t);
    return out;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Projection {
    const PixelTensor* reference;
    std::size_t fixed;
};

// Shared reverse loop. `combine` turns the per-condition estimates into the
// single estimate fed to the update.
template <class Combine>
PixelTensor reverse_loop(NoisePredictor& predictor, std::span<const Condition> conds, const SamplerConfig& cfg,
                         const Schedule& s, const Decomposition* d, const Projection* projection, Combine combine,
                         const StepObserver& observer) {
    cfg.validate(s);
    const Shape shape = cfg.shape();
    if (d) d->check_input(shape);
    const auto timesteps = s.timesteps(cfg.steps);

    Rng rng(cfg.seed);
    PixelTensor x = rng.normal_tensor(shape);

    for (std::size_t k = 0; k + 1 < timesteps.size(); ++k) {
        const std::size_t t = timesteps[k];
        const std::size_t t_prev = timesteps[k + 1];
        const auto step_start = Clock::now();

        std::vector<PixelTensor> eps;
        try {
            eps = predictor.predict(x, t, conds);
            if (eps.size() != conds.size()) {
                throw ProtocolError("expected " + std::to_string(conds.size()) + " noise estimates, got " +
                                    std::to_string(eps.size()));
            }
            for (const auto& e : eps) {
                if (e.shape() != shape) throw ShapeError("noise estimate has shape " + e.shape().str());
                if (!e.all_finite()) throw ProtocolError("noise estimate has non-finite values");
            }
        } catch (const std::exception& e) {
            throw PredictorFailure(k, t, e.what(), std::current_exception());
        }
        const double predict_seconds = seconds_since(step_start);

        const PixelTensor eps_hat = combine(eps);
        if (cfg.kind == UpdateKind::ddim) {
            x = ddim_step(x, eps_hat, s, t, t_prev);
        } else if (t_prev > 0) {
            x = ddpm_step(x, eps_hat, s, t, t_prev, rng.normal_tensor(shape));
        } else {
            x = ddpm_mean(x, eps_hat, s, t, t_prev);
        }

        if (projection) {
            const PixelTensor noise = t_prev > 0 ? rng.normal_tensor(shape) : PixelTensor(shape);
            x = project_component(x, *projection->reference, *d, projection->fixed, t_prev, s, noise);
        }

        if (observer) observer({k, t, t_prev, predict_seconds, seconds_since(step_start)});
    }
    return x;
}

void check_condition_count(const Decomposition& d, std::span<const Condition> conds) {
    if (conds.size() != d.size()) {
        throw ArgumentError(std::to_string(conds.size()) + " conditions for a decomposition with " +
                            std::to_string(d.size()) + " components");
    }
}

}  // namespace

PixelTensor sample_factorized(NoisePredictor& predictor, const Decomposition& d, std::span<const Condition> conds,
                              const SamplerConfig& cfg, const Schedule& s, const StepObserver& observer) {
    check_condition_count(d, conds);
    return reverse_loop(
        predictor, conds, cfg, s, &d, nullptr,
        [&](const std::vector<PixelTensor>& eps) { return composite_noise(d, eps); }, observer);
}

PixelTensor sample_single(NoisePredictor& predictor, const Condition& cond, const SamplerConfig& cfg,
                          const Schedule& s, const StepObserver& observer) {
    return reverse_loop(
        predictor, std::span<const Condition>(&cond, 1), cfg, s, nullptr, nullptr,
        [](const std::vector<PixelTensor>& eps) { return eps.front(); }, observer);
}

PixelTensor sample_inverse(NoisePredictor& predictor, const Decomposition& d, std::span<const Condition> conds,
                           const PixelTensor& x_ref, std::size_t fixed, const SamplerConfig& cfg, const Schedule& s,
                           const StepObserver& observer) {
    check_condition_count(d, conds);
    if (fixed >= d.size()) {
        throw ArgumentError("fixed component index " + std::to_string(fixed) + " out of range for " +
                            std::to_string(d.size()) + " components");
    }
    if (x_ref.shape() != cfg.shape()) {
        throw ShapeError("reference image is " + x_ref.shape().str() + " but the run is " + cfg.shape().str());
    }
    const Projection projection{&x_ref, fixed};
    return reverse_loop(
        predictor, conds, cfg, s, &d, &projection,
        [&](const std::vector<PixelTensor>& eps) { return composite_noise(d, eps); }, observer);
}

}  // namespace fdiff
