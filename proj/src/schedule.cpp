#include "fdiff/schedule.hpp"

#include <sodium.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "fdiff/errors.hpp"

namespace fdiff {

Schedule::Schedule(std::vector<double> alphas_cumprod) {
    if (alphas_cumprod.empty()) throw ScheduleError("schedule needs at least one timestep");
    alpha_bar_.reserve(alphas_cumprod.size() + 1);
    alpha_bar_.push_back(1.0);
    double prev = 1.0;
    for (std::size_t k = 0; k < alphas_cumprod.size(); ++k) {
        const double a = alphas_cumprod[k];
        if (!(a > 0.0 && a <= 1.0)) {
            throw ScheduleError("alphas_cumprod[" + std::to_string(k) + "] = " + std::to_string(a) +
                                " is outside (0, 1]");
        }
        if (k > 0 && !(a < prev)) {
            throw ScheduleError("alphas_cumprod is not strictly decreasing at index " + std::to_string(k));
        }
        if (k == 0 && a == 1.0) {
            throw ScheduleError("alphas_cumprod[0] must be below 1 (t = 0 is the clean image)");
        }
        alpha_bar_.push_back(a);
        prev = a;
    }
}

Schedule Schedule::linear(std::size_t steps, double beta_start, double beta_end) {
    if (steps == 0) throw ScheduleError("schedule needs at least one timestep");
    if (!(beta_start > 0.0 && beta_end < 1.0 && beta_start <= beta_end)) {
        throw ScheduleError("linear schedule needs 0 < beta_start <= beta_end < 1");
    }
    std::vector<double> cumprod(steps);
    double a = 1.0;
    for (std::size_t i = 0; i < steps; ++i) {
        const double frac = steps == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(steps - 1);
        const double beta = beta_start + frac * (beta_end - beta_start);
        a *= 1.0 - beta;
        cumprod[i] = a;
    }
    return Schedule(std::move(cumprod));
}

double Schedule::alpha_bar(std::size_t t) const {
    if (t >= alpha_bar_.size()) {
        throw ScheduleError("timestep " + std::to_string(t) + " outside schedule of length " + std::to_string(T()));
    }
    return alpha_bar_[t];
}

double Schedule::sigma_z(std::size_t t, std::size_t t_prev) const {
    if (t_prev >= t) throw ScheduleError("sigma_z needs t_prev < t");
    const double a_t = alpha_bar(t);
    const double a_prev = alpha_bar(t_prev);
    const double beta = 1.0 - a_t / a_prev;
    const double var = beta * (1.0 - a_prev) / (1.0 - a_t);
    return std::sqrt(std::max(var, 0.0));
}

std::vector<double> Schedule::sigmas_z() const {
    std::vector<double> out(alpha_bar_.size(), 0.0);
    for (std::size_t t = 1; t < alpha_bar_.size(); ++t) out[t] = sigma_z(t, t - 1);
    return out;
}

std::vector<std::size_t> Schedule::timesteps(std::size_t steps) const {
    if (steps == 0 || steps > T()) {
        throw ScheduleError("step count " + std::to_string(steps) + " must be in [1, " + std::to_string(T()) + "]");
    }
    std::vector<std::size_t> out;
    out.reserve(steps + 1);
    for (std::size_t k = steps; k > 0; --k) {
        out.push_back(static_cast<std::size_t>(
            std::llround(static_cast<double>(k) * static_cast<double>(T()) / static_cast<double>(steps))));
    }
    out.push_back(0);
    return out;
}

std::string Schedule::hash() const {
    if (sodium_init() < 0) throw std::runtime_error("libsodium failed to initialize");
    std::vector<unsigned char> bytes(alpha_bar_.size() * sizeof(double));
    for (std::size_t i = 0; i < alpha_bar_.size(); ++i) {
        auto bits = std::bit_cast<std::uint64_t>(alpha_bar_[i]);
        for (std::size_t b = 0; b < 8; ++b) bytes[i * 8 + b] = static_cast<unsigned char>(bits >> (8 * b));
    }
    unsigned char digest[16];
    crypto_generichash(digest, sizeof digest, bytes.data(), bytes.size(), nullptr, 0);
    char hex[2 * sizeof digest + 1];
    sodium_bin2hex(hex, sizeof hex, digest, sizeof digest);
    return hex;
}

}  // namespace fdiff
