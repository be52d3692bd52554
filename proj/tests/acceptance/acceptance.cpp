// Acceptance suite: one PASS/FAIL line per criterion.
//
//   fdiff_acceptance        run all criteria
//   fdiff_acceptance N      run criterion N only
//
// Exit status is nonzero when any criterion that ran failed.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "fdiff/decomp.hpp"
#include "fdiff/eval.hpp"
#include "fdiff/filters.hpp"
#include "fdiff/oracle.hpp"
#include "fdiff/rng.hpp"
#include "fdiff/sampler.hpp"
#include "fdiff/schedule.hpp"
#include "fdiff/update.hpp"

using namespace fdiff;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

PixelTensor uniform_tensor(const Shape& shape, Rng& rng) {
    PixelTensor x(shape);
    for (auto& v : x.data()) v = 2.0 * rng.uniform() - 1.0;
    return x;
}

std::vector<Decomposition> six_kinds(const Shape& shape) {
    const std::size_t third = shape.width / 3;
    std::vector<Decomposition> out;
    out.push_back(make_hybrid(2.0));
    out.push_back(make_triple(1.0, 2.0));
    out.push_back(make_gray_color());
    out.push_back(make_motion(Kernel2D::diagonal(29)));
    out.push_back(make_spatial({SpatialMask::columns(shape.height, shape.width, 0, third),
                                SpatialMask::columns(shape.height, shape.width, third, 2 * third),
                                SpatialMask::columns(shape.height, shape.width, 2 * third, shape.width)}));
    out.push_back(make_scaling({-6.0, 7.0}));
    return out;
}

// Predictor answering from Gaussian-mixture conditions.
OraclePredictor mixture_predictor(const Schedule& s, const Shape& shape) {
    Rng rng(4242);
    std::map<std::string, MixtureCondition> mixes;
    for (const char* id : {"A", "B", "C"}) {
        mixes.emplace(id, MixtureCondition({{0.5, uniform_tensor(shape, rng), 0.3}, {0.5, uniform_tensor(shape, rng), 0.6}}));
    }
    return OraclePredictor(s, std::move(mixes));
}

std::vector<Condition> distinct_conditions(const Decomposition& d) {
    static const char* ids[] = {"A", "B", "C"};
    std::vector<Condition> out;
    for (std::size_t i = 0; i < d.size(); ++i) out.push_back({d.labels()[i], ids[i % 3]});
    return out;
}

// 1
Outcome completeness() {
    const Shape shape{3, 32, 33};
    Rng rng(1);
    double worst = 0.0;
    std::size_t count = 0;
    for (const auto& d : six_kinds(shape)) {
        for (int k = 0; k < 100; ++k) {
            const auto x = uniform_tensor(shape, rng);
            worst = std::max(worst, max_abs_diff(recompose(d.apply(x)), x));
            ++count;
        }
    }
    return {worst <= 1e-5, "max |sum f_i(x) - x| = " + fmt(worst) + " over " + std::to_string(count) + " tensors"};
}

// 2
Outcome linearity() {
    const Shape shape{3, 24, 27};
    Rng rng(2);
    double worst = 0.0;
    std::size_t ops = 0;
    for (const auto& d : six_kinds(shape)) {
        for (const auto& f : d.components()) {
            ++ops;
            for (int k = 0; k < 50; ++k) {
                const auto x = uniform_tensor(shape, rng), y = uniform_tensor(shape, rng);
                const double a = 4.0 * rng.uniform() - 2.0, b = 4.0 * rng.uniform() - 2.0;
                worst = std::max(worst, max_abs_diff(f(linear_combination(a, x, b, y)),
                                                     linear_combination(a, f(x), b, f(y))));
            }
        }
    }
    return {worst <= 1e-5, "max linearity error " + fmt(worst) + " over " + std::to_string(ops) + " operators x 50 triples"};
}

// 3
Outcome component_update() {
    const Shape shape{3, 24, 24};
    const auto s = Schedule::linear();
    Rng rng(3);
    std::ostringstream per_kind;
    double worst = 0.0, worst_composite = 0.0;
    for (const auto& d : six_kinds(shape)) {
        double kind_worst = 0.0;
        for (int k = 0; k < 10; ++k) {
            const std::size_t t = 1 + static_cast<std::size_t>(rng.uniform() * static_cast<double>(s.T()));
            const auto x = rng.normal_tensor(shape);
            std::vector<PixelTensor> eps;
            for (std::size_t i = 0; i < d.size(); ++i) eps.push_back(rng.normal_tensor(shape));
            const auto e = composite_noise(d, eps);
            const auto next = ddim_update(x, e, t, s);
            const auto [omega, gamma] = ddim_coefficients(s, t, t - 1);
            for (std::size_t i = 0; i < d.size(); ++i) {
                const auto& f = d.component(i);
                const auto fx = f(x);
                const auto fn = f(next);
                kind_worst = std::max(kind_worst, max_abs_diff(fn, linear_combination(omega, fx, gamma, f(eps[i]))));
                worst_composite = std::max(worst_composite, max_abs_diff(fn, linear_combination(omega, fx, gamma, f(e))));
            }
        }
        per_kind << ' ' << d.kind() << '=' << fmt(kind_worst);
        worst = std::max(worst, kind_worst);
    }
    return {worst <= 1e-5, "max |f_i(x') - (w f_i(x) + g f_i(eps_i))| by kind:" + per_kind.str() +
                               "; with the composite estimate in place of eps_i: " + fmt(worst_composite)};
}

// 4
Outcome reduction() {
    const Shape shape{3, 16, 16};
    const auto s = Schedule::linear();
    auto predictor = mixture_predictor(s, shape);
    SamplerConfig cfg;
    cfg.steps = 50;
    cfg.seed = 2024;
    cfg.height = shape.height;
    cfg.width = shape.width;
    const Condition cond{"all", "B"};
    const auto reference = sample_single(predictor, cond, cfg, s);
    double worst = 0.0;
    for (const auto& d : six_kinds(shape)) {
        const std::vector<Condition> same(d.size(), cond);
        worst = std::max(worst, max_abs_diff(sample_factorized(predictor, d, same, cfg, s), reference));
    }
    return {worst <= 1e-6, "max deviation from single-prompt sampling " + fmt(worst) + " (6 kinds, DDIM 50 steps)"};
}

// 5
Outcome recoveries() {
    const Shape shape{3, 16, 18};
    Rng rng(5);
    std::vector<PixelTensor> eps;
    for (int i = 0; i < 4; ++i) eps.push_back(rng.normal_tensor(shape));

    // Averaging. Sums of (1/N) eps_i and (sum eps_i) / N can differ by rounding when 1/N is inexact.
    double mean_err = 0.0;
    bool mean_bitwise = true;
    for (std::size_t n : {2u, 3u, 4u}) {
        const std::vector<PixelTensor> e(eps.begin(), eps.begin() + static_cast<long>(n));
        const auto got = composite_noise(make_scaling(std::vector<double>(n, 1.0 / static_cast<double>(n))), e);
        PixelTensor avg = e[0];
        for (std::size_t i = 1; i < n; ++i) avg += e[i];
        avg *= 1.0 / static_cast<double>(n);
        const double err = max_abs_diff(got, avg);
        mean_err = std::max(mean_err, err);
        if ((n == 2 || n == 4) && err != 0.0) mean_bitwise = false;
    }
    const bool mean_ok = mean_bitwise && mean_err <= 4.0 * 2.2e-16 * max_abs(eps[0] + eps[1] + eps[2]);

    bool cfg_ok = true;
    for (double g : {3.0, 7.0, 7.5}) {
        const auto got = composite_noise(make_scaling({1.0 - g, g}), std::vector<PixelTensor>{eps[0], eps[1]});
        PixelTensor expected(shape);
        for (std::size_t i = 0; i < expected.size(); ++i)
            expected.data()[i] = (1.0 - g) * eps[0].data()[i] + g * eps[1].data()[i];
        cfg_ok = cfg_ok && got == expected;
    }

    const auto sp = make_spatial({SpatialMask::columns(16, 18, 0, 7), SpatialMask::columns(16, 18, 7, 18)});
    const auto stitched = composite_noise(sp, std::vector<PixelTensor>{eps[0], eps[1]});
    bool spatial_ok = true;
    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t y = 0; y < 16; ++y)
            for (std::size_t x = 0; x < 18; ++x)
                spatial_ok = spatial_ok && stitched.at(c, y, x) == eps[x < 7 ? 0 : 1].at(c, y, x);

    return {mean_ok && cfg_ok && spatial_ok,
            std::string("mean ") + (mean_ok ? "ok" : "bad") + " (bit-exact for N=2,4; N=3 within " + fmt(mean_err) +
                "), cfg " + (cfg_ok ? "bit-exact" : "bad") + ", spatial selection " +
                (spatial_ok ? "bit-exact" : "bad")};
}

// 6
double normal_pdf(double x, double mean, double var) {
    return std::exp(-0.5 * (x - mean) * (x - mean) / var) / std::sqrt(2.0 * M_PI * var);
}

Outcome oracle_correctness() {
    const auto s = Schedule::linear();

    // Quadrature on one pixel.
    const double w[] = {0.3, 0.45, 0.25}, mu[] = {-0.7, 0.2, 0.9}, var[] = {0.05, 0.1, 0.3};
    const MixtureCondition m1({{w[0], PixelTensor(Shape{1, 1, 1}, mu[0]), var[0]},
                               {w[1], PixelTensor(Shape{1, 1, 1}, mu[1]), var[1]},
                               {w[2], PixelTensor(Shape{1, 1, 1}, mu[2]), var[2]}});
    double quad_err = 0.0;
    for (std::size_t t : {1u, 50u, 300u, 700u, 1000u}) {
        const double a = s.alpha_bar(t);
        for (double xt : {-1.5, -0.2, 0.4, 1.8}) {
            const int n = 400000;
            const double lo = -12.0, h = 24.0 / n;
            double num = 0.0, den = 0.0;
            for (int i = 0; i <= n; ++i) {
                const double x0 = lo + h * i;
                double prior = 0.0;
                for (int k = 0; k < 3; ++k) prior += w[k] * normal_pdf(x0, mu[k], var[k]);
                const double p = prior * normal_pdf(xt, std::sqrt(a) * x0, 1.0 - a) *
                                 ((i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0));
                num += x0 * p;
                den += p;
            }
            const double eps = (xt - std::sqrt(a) * num / den) / std::sqrt(1.0 - a);
            quad_err = std::max(quad_err, std::abs(predict_noise(m1, PixelTensor(Shape{1, 1, 1}, xt), t, s).data()[0] - eps));
        }
    }

    // Self-normalized importance sampling on 1x2x2 with prior draws.
    const Shape shape{1, 2, 2};
    const MixtureCondition m4({{0.55, PixelTensor(shape, std::vector<double>{0.6, -0.3, 0.1, 0.4}), 0.25},
                               {0.45, PixelTensor(shape, std::vector<double>{-0.5, 0.5, -0.2, -0.6}), 0.4}});
    const std::size_t draws_n = 10000;
    Rng rng(6);
    double worst_z = 0.0;
    for (std::size_t t : {200u, 500u, 800u}) {
        const double a = s.alpha_bar(t);
        const auto xt = rng.normal_tensor(shape);
        const auto draws = sample_data(m4, draws_n, 600 + t);
        std::vector<double> wt(draws_n);
        double wsum = 0.0;
        for (std::size_t k = 0; k < draws_n; ++k) {
            double sq = 0.0;
            for (std::size_t i = 0; i < 4; ++i) sq += std::pow(xt.data()[i] - std::sqrt(a) * draws[k].data()[i], 2);
            wsum += wt[k] = std::exp(-0.5 * sq / (1.0 - a));
        }
        const auto analytic = predict_noise(m4, xt, t, s);
        for (std::size_t i = 0; i < 4; ++i) {
            double est = 0.0;
            for (std::size_t k = 0; k < draws_n; ++k) est += wt[k] * draws[k].data()[i];
            est /= wsum;
            double v = 0.0;
            for (std::size_t k = 0; k < draws_n; ++k) v += wt[k] * wt[k] * std::pow(draws[k].data()[i] - est, 2);
            const double se = std::sqrt(v) / wsum * std::sqrt(a) / std::sqrt(1.0 - a);
            const double eps_mc = (xt.data()[i] - std::sqrt(a) * est) / std::sqrt(1.0 - a);
            worst_z = std::max(worst_z, std::abs(analytic.data()[i] - eps_mc) / se);
        }
    }
    return {quad_err <= 1e-4 && worst_z <= 3.0,
            "quadrature max error " + fmt(quad_err) + " (<= 1e-4), Monte Carlo max deviation " + fmt(worst_z) +
                " standard errors (<= 3)"};
}

// 7
Outcome hybrid_mean() {
    const auto start = std::chrono::steady_clock::now();
    const Shape shape{1, 16, 16};
    PixelTensor mu_a(shape), mu_b(shape);
    for (std::size_t y = 0; y < 16; ++y)
        for (std::size_t x = 0; x < 16; ++x) {
            mu_a.at(0, y, x) = ((x / 2 + y / 2) % 2 ? 0.8 : -0.8);  // fine checkerboard
            mu_b.at(0, y, x) = -0.9 + 1.8 * static_cast<double>(x) / 15.0;  // horizontal ramp
        }
    const auto s = Schedule::linear();
    OraclePredictor predictor(s, {{"A", MixtureCondition::gaussian(mu_a, 1.0)}, {"B", MixtureCondition::gaussian(mu_b, 1.0)}});
    const auto d = make_hybrid(2.0);
    const std::vector<Condition> conds{{"high", "A"}, {"low", "B"}};
    const auto target = d.component(0)(mu_a) + d.component(1)(mu_b);

    SamplerConfig cfg;
    cfg.steps = 50;
    cfg.channels = 1;
    cfg.height = 16;
    cfg.width = 16;
    const std::size_t runs = 256;
    PixelTensor sum(shape), sum_sq(shape);
    for (std::size_t seed = 0; seed < runs; ++seed) {
        cfg.seed = seed;
        const auto x = sample_factorized(predictor, d, conds, cfg, s);
        sum += x;
        for (std::size_t i = 0; i < x.size(); ++i) sum_sq.data()[i] += x.data()[i] * x.data()[i];
    }
    double worst_z = 0.0;
    for (std::size_t i = 0; i < shape.size(); ++i) {
        const double m = sum.data()[i] / runs;
        const double var = (sum_sq.data()[i] - runs * m * m) / (runs - 1);
        worst_z = std::max(worst_z, std::abs(m - target.data()[i]) / std::sqrt(var / runs));
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {worst_z <= 4.0 && seconds < 60.0,
            "max deviation of the 256-seed mean from f_high(mu_A) + f_low(mu_B): " + fmt(worst_z) +
                " standard errors (<= 4), " + fmt(seconds) + " s"};
}

// 8
Outcome inverse_exactness() {
    const Shape shape{3, 16, 18};
    const auto s = Schedule::linear();
    auto predictor = mixture_predictor(s, shape);
    Rng rng(8);
    const auto ref = uniform_tensor(shape, rng);
    SamplerConfig cfg;
    cfg.steps = 50;
    cfg.seed = 8;
    cfg.height = shape.height;
    cfg.width = shape.width;

    struct Case {
        Decomposition d;
        std::string fixed;
    };
    std::vector<Case> cases{
        {make_hybrid(2.0), "low"},
        {make_gray_color(), "gray"},
        {make_spatial({SpatialMask::columns(16, 18, 0, 9), SpatialMask::columns(16, 18, 9, 18)}), "region0"}};
    bool pass = true;
    std::ostringstream detail;
    detail << "|f_fixed(out) - f_fixed(x_ref)|:";
    for (const auto& c : cases) {
        const std::size_t fixed = *c.d.index_of(c.fixed);
        const auto out = sample_inverse(predictor, c.d, distinct_conditions(c.d), ref, fixed, cfg, s);
        const auto& f = c.d.component(fixed);
        const double err = max_abs_diff(f(out), f(ref));
        pass = pass && err <= 1e-5;
        detail << ' ' << c.d.kind() << '/' << c.fixed << '=' << fmt(err);
    }
    return {pass, detail.str() + " (<= 1e-5)"};
}

// 9
class ConstantScorer : public Scorer {
public:
    std::vector<double> embed_image(const PixelTensor&) override { return {0.28, 0.96}; }
    std::vector<double> embed_text(const std::string&) override { return {1.0, 0.0}; }
};

class DetailScorer : public Scorer {
public:
    std::vector<double> embed_image(const PixelTensor& x) override {
        double energy = 0.0;
        for (std::size_t y = 1; y < x.height(); ++y)
            for (std::size_t xx = 0; xx < x.width(); ++xx) energy += std::abs(x.at(0, y, xx) - x.at(0, y - 1, xx));
        energy /= static_cast<double>(x.size());
        const double n = std::sqrt(1.0 + energy * energy);
        return {1.0 / n, energy / n};
    }
    std::vector<double> embed_text(const std::string&) override { return {0.0, 1.0}; }
};

Outcome blur_sweep_harness() {
    const auto f = sweep_factors();
    bool spacing = f.size() == 20 && f.front() == 1.0 && f.back() == 8.0;
    for (std::size_t i = 1; spacing && i < f.size(); ++i) spacing = std::abs(f[i] - f[i - 1] - 7.0 / 19.0) <= 1e-12;

    Rng rng(9);
    const auto x = uniform_tensor(Shape{3, 32, 32}, rng);
    ConstantScorer constant;
    const auto flat = blur_sweep(x, "anything", constant);
    bool flat_ok = flat.scores.size() == 20 && std::abs(flat.max_score - 0.28) <= 1e-15;
    for (double v : flat.scores) flat_ok = flat_ok && v == flat.max_score;

    DetailScorer detail;
    const auto a = blur_sweep(x, "sharp", detail);
    const auto b = blur_sweep(x, "sharp", detail);
    const bool deterministic = a.to_json().dump() == b.to_json().dump() && a.to_csv() == b.to_csv();

    return {spacing && flat_ok && deterministic,
            std::string("20 factors on [1, 8] step 7/19: ") + (spacing ? "yes" : "no") + "; constant scorer max " +
                fmt(flat.max_score) + (flat_ok ? " (flat)" : " (not flat)") + "; repeat reports " +
                (deterministic ? "identical" : "differ")};
}

// 10
long fold(long i, long n) {
    if (n == 1) return 0;
    while (i < 0 || i >= n) {
        if (i < 0) i = -i;
        if (i >= n) i = 2 * (n - 1) - i;
    }
    return i;
}

Outcome separable_blur() {
    Rng rng(10);
    double worst = 0.0;
    for (double sigma : {0.7, 1.0, 2.0, 4.0}) {
        const auto x = uniform_tensor(Shape{3, 16, 16}, rng);
        const auto fast = gaussian_blur(x, sigma);
        const long half = 16;
        std::vector<double> w(33);
        double total = 0.0;
        for (long i = -half; i <= half; ++i) total += w[static_cast<std::size_t>(i + half)] = std::exp(-0.5 * i * i / (sigma * sigma));
        for (auto& v : w) v /= total;
        for (std::size_t c = 0; c < 3; ++c)
            for (long y = 0; y < 16; ++y)
                for (long xx = 0; xx < 16; ++xx) {
                    double acc = 0.0;
                    for (long i = -half; i <= half; ++i)
                        for (long j = -half; j <= half; ++j)
                            acc += w[static_cast<std::size_t>(i + half)] * w[static_cast<std::size_t>(j + half)] *
                                   x.at(c, static_cast<std::size_t>(fold(y + i, 16)), static_cast<std::size_t>(fold(xx + j, 16)));
                    worst = std::max(worst, std::abs(acc - fast.at(c, static_cast<std::size_t>(y), static_cast<std::size_t>(xx))));
                }
    }
    const bool default_33 = kDefaultKernelSize == 33 && GaussianKernel::make(1.0).ksize == 33;
    return {worst <= 1e-6 && default_33,
            "max |separable - naive 2-D| on 16x16 = " + fmt(worst) + "; default kernel size " +
                std::to_string(GaussianKernel::make(1.0).ksize)};
}

const std::vector<std::pair<std::string, std::function<Outcome()>>>& criteria() {
    static const std::vector<std::pair<std::string, std::function<Outcome()>>> list{
        {"decomposition completeness", completeness},
        {"component linearity", linearity},
        {"component-update equivalence", component_update},
        {"reduction to single-prompt sampling", reduction},
        {"averaging, guidance, and spatial recoveries", recoveries},
        {"oracle correctness", oracle_correctness},
        {"end-to-end hybrid mean", hybrid_mean},
        {"inverse-mode exactness", inverse_exactness},
        {"blur-sweep harness", blur_sweep_harness},
        {"separable Gaussian blur", separable_blur},
    };
    return list;
}

}  // namespace

int main(int argc, char** argv) {
    std::size_t only = 0;
    if (argc > 1) {
        only = static_cast<std::size_t>(std::strtoul(argv[1], nullptr, 10));
        if (only < 1 || only > criteria().size()) {
            std::fprintf(stderr, "usage: %s [1-%zu]\n", argv[0], criteria().size());
            return 2;
        }
    }
    int failures = 0;
    for (std::size_t n = 1; n <= criteria().size(); ++n) {
        if (only && n != only) continue;
        const auto& [name, run] = criteria()[n - 1];
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        std::printf("criterion %2zu: %s  %s: %s\n", n, o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
        std::fflush(stdout);
        if (!o.pass) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
