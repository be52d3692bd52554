#include "fdiff/eval.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fdiff/errors.hpp"
#include "fdiff/resample.hpp"

namespace fdiff {

std::vector<double> sweep_factors() {
    std::vector<double> f(kSweepCount);
    const double step = (kSweepMaxFactor - kSweepMinFactor) / static_cast<double>(kSweepCount - 1);
    for (std::size_t i = 0; i < kSweepCount; ++i) f[i] = kSweepMinFactor + step * static_cast<double>(i);
    f.back() = kSweepMaxFactor;
    return f;
}

PixelTensor blur_for_factor(const PixelTensor& x, double factor) {
    if (!(factor >= 1.0)) throw ArgumentError("sweep factor must be >= 1");
    const auto shrink = [&](std::size_t dim) {
        return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(static_cast<double>(dim) / factor)));
    };
    PixelTensor down = resample(x, shrink(x.height()), shrink(x.width()));
    PixelTensor up = resample(down, x.height(), x.width());
    return resample(up, kScorerResolution, kScorerResolution);
}

double alignment(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.empty()) {
        throw ProtocolError("embedding dimensions differ (" + std::to_string(a.size()) + " vs " +
                            std::to_string(b.size()) + ")");
    }
    double ab = 0.0, aa = 0.0, bb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ab += a[i] * b[i];
        aa += a[i] * a[i];
        bb += b[i] * b[i];
    }
    if (aa == 0.0 || bb == 0.0) throw ProtocolError("zero embedding");
    return ab / std::sqrt(aa * bb);
}

SweepReport blur_sweep(const PixelTensor& x, const std::string& prompt, Scorer& scorer) {
    SweepReport report;
    report.prompt = prompt;
    report.factors = sweep_factors();
    const auto text = scorer.embed_text(prompt);
    report.scores.reserve(report.factors.size());
    for (double f : report.factors) {
        try {
            report.scores.push_back(alignment(scorer.embed_image(blur_for_factor(x, f)), text));
        } catch (const BackendError& e) {
            throw BackendError("scoring at factor " + std::to_string(f) + " failed: " + e.what());
        }
    }
    report.max_score = report.scores.front();
    report.argmax_factor = report.factors.front();
    for (std::size_t i = 1; i < report.scores.size(); ++i) {
        if (report.scores[i] > report.max_score) {
            report.max_score = report.scores[i];
            report.argmax_factor = report.factors[i];
        }
    }
    return report;
}

nlohmann::json SweepReport::to_json() const {
    return {{"prompt", prompt},
            {"factors", factors},
            {"scores", scores},
            {"max_score", max_score},
            {"argmax_factor", argmax_factor}};
}

std::string SweepReport::to_csv() const {
    std::ostringstream out;
    out.precision(17);
    out << "factor,score\n";
    for (std::size_t i = 0; i < factors.size(); ++i) out << factors[i] << ',' << scores[i] << '\n';
    return out.str();
}

}  // namespace fdiff
