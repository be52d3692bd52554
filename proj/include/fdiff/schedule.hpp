#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace fdiff {

/// Cumulative signal-retention schedule alpha_bar_t for t = 0..T.
///
/// alpha_bar_0 = 1 is the clean image; alpha_bar_1..alpha_bar_T come from the
/// model's training schedule and decrease strictly. A served model publishes
/// its T values as `alphas_cumprod[0..T-1]`, which map to t = 1..T here.
class Schedule {
public:
    // alphas_cumprod[k] is alpha_bar at t = k + 1. Throws ScheduleError naming
    // the first offending index when the values are not in (0, 1] or not
    // strictly decreasing.
    explicit Schedule(std::vector<double> alphas_cumprod);

    // beta linearly spaced in [beta_start, beta_end], alpha_bar_t = prod(1 - beta).
    static Schedule linear(std::size_t steps = 1000, double beta_start = 1e-4, double beta_end = 0.02);

    std::size_t T() const noexcept { return alpha_bar_.size() - 1; }
    double alpha_bar(std::size_t t) const;
    const std::vector<double>& alpha_bars() const noexcept { return alpha_bar_; }

    // DDPM ancestral noise scale for a jump t -> t_prev (posterior std). Zero when t_prev == 0.
    double sigma_z(std::size_t t, std::size_t t_prev) const;
    // sigma_z for every unit step t -> t-1, indexed by t (entry 0 unused and zero).
    std::vector<double> sigmas_z() const;

    // Uniform-stride timesteps for a run of `steps` updates:
    // descending [t_steps, ..., t_1, 0] with t_k = round(k * T / steps).
    std::vector<std::size_t> timesteps(std::size_t steps) const;

    // BLAKE2b-128 of the little-endian alpha_bar values, hex encoded.
    std::string hash() const;

private:
    std::vector<double> alpha_bar_;
};

}  // namespace fdiff
