#pragma once

#include <cstddef>

#include "fdiff/schedule.hpp"
#include "fdiff/tensor.hpp"

namespace fdiff {

// x_prev = omega * x_t + gamma * eps
struct UpdateCoefficients {
    double omega;
    double gamma;
};

// Deterministic DDIM (sigma = 0) coefficients for the jump t -> t_prev:
// omega = sqrt(a_prev / a_t), gamma = sqrt(1 - a_prev) - sqrt(1 - a_t) * omega.
UpdateCoefficients ddim_coefficients(const Schedule& s, std::size_t t, std::size_t t_prev);

// Deterministic part of the ancestral DDPM step t -> t_prev:
// omega = 1 / sqrt(alpha), gamma = -beta / (sqrt(alpha) * sqrt(1 - a_t)), alpha = a_t / a_prev.
UpdateCoefficients ddpm_coefficients(const Schedule& s, std::size_t t, std::size_t t_prev);

PixelTensor ddim_step(const PixelTensor& x_t, const PixelTensor& eps, const Schedule& s, std::size_t t,
                      std::size_t t_prev);
PixelTensor ddim_update(const PixelTensor& x_t, const PixelTensor& eps, std::size_t t, const Schedule& s);

// The mean of the ancestral step, before the sigma_z * z term.
PixelTensor ddpm_mean(const PixelTensor& x_t, const PixelTensor& eps, const Schedule& s, std::size_t t,
                      std::size_t t_prev);
PixelTensor ddpm_step(const PixelTensor& x_t, const PixelTensor& eps, const Schedule& s, std::size_t t,
                      std::size_t t_prev, const PixelTensor& z);
PixelTensor ddpm_update(const PixelTensor& x_t, const PixelTensor& eps, std::size_t t, const Schedule& s,
                        const PixelTensor& z);

}  // namespace fdiff
