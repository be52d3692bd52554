#include "fdiff/update.hpp"

#include <cmath>

#include "fdiff/errors.hpp"

namespace fdiff {

namespace {

void check_jump(const Schedule& s, std::size_t t, std::size_t t_prev) {
    if (t == 0) throw ScheduleError("update needs t >= 1");
    if (t_prev >= t) throw ScheduleError("update needs t_prev < t");
    if (!(s.alpha_bar(t) > 0.0)) throw ScheduleError("alpha_bar is zero at t = " + std::to_string(t));
}

}  // namespace

UpdateCoefficients ddim_coefficients(const Schedule& s, std::size_t t, std::size_t t_prev) {
    check_jump(s, t, t_prev);
    const double a_t = s.alpha_bar(t);
    const double a_prev = s.alpha_bar(t_prev);
    const double omega = std::sqrt(a_prev / a_t);
    return {omega, std::sqrt(1.0 - a_prev) - std::sqrt(1.0 - a_t) * omega};
}

UpdateCoefficients ddpm_coefficients(const Schedule& s, std::size_t t, std::size_t t_prev) {
    check_jump(s, t, t_prev);
    const double a_t = s.alpha_bar(t);
    const double alpha = a_t / s.alpha_bar(t_prev);
    const double beta = 1.0 - alpha;
    const double inv_sqrt_alpha = 1.0 / std::sqrt(alpha);
    return {inv_sqrt_alpha, -inv_sqrt_alpha * beta / std::sqrt(1.0 - a_t)};
}

PixelTensor ddim_step(const PixelTensor& x_t, const PixelTensor& eps, const Schedule& s, std::size_t t,
                      std::size_t t_prev) {
    const auto [omega, gamma] = ddim_coefficients(s, t, t_prev);
    return linear_combination(omega, x_t, gamma, eps);
}

PixelTensor ddim_update(const PixelTensor& x_t, const PixelTensor& eps, std::size_t t, const Schedule& s) {
    return ddim_step(x_t, eps, s, t, t - 1);
}

PixelTensor ddpm_mean(const PixelTensor& x_t, const PixelTensor& eps, const Schedule& s, std::size_t t,
                      std::size_t t_prev) {
    const auto [omega, gamma] = ddpm_coefficients(s, t, t_prev);
    return linear_combination(omega, x_t, gamma, eps);
}

PixelTensor ddpm_step(const PixelTensor& x_t, const PixelTensor& eps, const Schedule& s, std::size_t t,
                      std::size_t t_prev, const PixelTensor& z) {
    PixelTensor out = ddpm_mean(x_t, eps, s, t, t_prev);
    return out.axpy(s.sigma_z(t, t_prev), z);
}

PixelTensor ddpm_update(const PixelTensor& x_t, const PixelTensor& eps, std::size_t t, const Schedule& s,
                        const PixelTensor& z) {
    return ddpm_step(x_t, eps, s, t, t - 1, z);
}

}  // namespace fdiff
