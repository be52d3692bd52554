#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fdiff/decomp.hpp"
#include "fdiff/errors.hpp"
#include "fdiff/schedule.hpp"
#include "fdiff/tensor.hpp"

namespace fdiff {

/// Conditioning attached to one decomposition component.
struct Condition {
    std::string id;
    // Prompt text for a remote model, mixture id for the analytic oracle.
    std::string payload;
    // Classifier-free guidance scale, applied by the predictor.
    double guidance = 1.0;
};

enum class UpdateKind { ddim, ddpm };

std::string to_string(UpdateKind kind);
UpdateKind parse_update_kind(const std::string& name);

struct SamplerConfig {
    std::size_t steps = 100;
    UpdateKind kind = UpdateKind::ddim;
    std::uint64_t seed = 0;
    std::size_t channels = 3;
    std::size_t height = 64;
    std::size_t width = 64;

    Shape shape() const { return {channels, height, width}; }
    // Throws ArgumentError / ScheduleError.
    void validate(const Schedule& schedule) const;
};

/// eps_theta(x_t, y, t) for a batch of conditions, answered in request order.
class NoisePredictor {
public:
    virtual ~NoisePredictor() = default;
    virtual std::vector<PixelTensor> predict(const PixelTensor& x_t, std::size_t t,
                                             std::span<const Condition> conditions) = 0;
};

// A predictor call failed during sampling; carries where it happened and the original error.
struct PredictorFailure : BackendError {
    PredictorFailure(std::size_t step, std::size_t t, const std::string& what, std::exception_ptr cause)
        : BackendError("predictor failed at step " + std::to_string(step) + " (t = " + std::to_string(t) +
                       "): " + what),
          step(step), t(t), cause(std::move(cause)) {}
    std::size_t step;
    std::size_t t;
    std::exception_ptr cause;
};

struct StepRecord {
    std::size_t step;  // 0-based position in the run
    std::size_t t;
    std::size_t t_prev;
    double predict_seconds;
    double step_seconds;
};

using StepObserver = std::function<void(const StepRecord&)>;

// eps~ = sum_i f_i(eps_i)
PixelTensor composite_noise(const Decomposition& d, std::span<const PixelTensor> eps);

/// Factorized reverse process.
///
/// RNG stream (seeded from cfg.seed): x_T first, then for each step with
/// t_prev > 0 the DDPM z draw (kind == ddpm only). Each step issues one batched
/// predictor call with all conditions.
PixelTensor sample_factorized(NoisePredictor& predictor, const Decomposition& d, std::span<const Condition> conds,
                              const SamplerConfig& cfg, const Schedule& s, const StepObserver& observer = {});

// Ordinary single-condition sampling with the same RNG stream.
PixelTensor sample_single(NoisePredictor& predictor, const Condition& cond, const SamplerConfig& cfg,
                          const Schedule& s, const StepObserver& observer = {});

// f_fixed(sqrt(a_t) x_ref + sqrt(1 - a_t) eps) + sum_{i != fixed} f_i(x_t)
PixelTensor project_component(const PixelTensor& x_t, const PixelTensor& x_ref, const Decomposition& d,
                              std::size_t fixed, std::size_t t, const Schedule& s, const PixelTensor& eps);

/// Factorized sampling with component `fixed` pinned to x_ref.
///
/// x is projected after every update. The RNG stream is the one used by
/// sample_factorized with a fresh projection draw appended to each step whose
/// t_prev > 0; the last projection (t = 0) uses zero noise.
PixelTensor sample_inverse(NoisePredictor& predictor, const Decomposition& d, std::span<const Condition> conds,
                           const PixelTensor& x_ref, std::size_t fixed, const SamplerConfig& cfg, const Schedule& s,
                           const StepObserver& observer = {});

}  // namespace fdiff
