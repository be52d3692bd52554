#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fdiff/tensor.hpp"

namespace fdiff {

/// Image/text embedding model used to score prompt alignment.
class Scorer {
public:
    virtual ~Scorer() = default;
    virtual std::vector<double> embed_image(const PixelTensor& image) = 0;
    virtual std::vector<double> embed_text(const std::string& prompt) = 0;
};

struct SweepReport {
    std::string prompt;
    std::vector<double> factors;
    std::vector<double> scores;
    double max_score = 0.0;
    // Smallest factor attaining max_score.
    double argmax_factor = 1.0;

    nlohmann::json to_json() const;
    // "factor,score" header plus one row per factor.
    std::string to_csv() const;
};

inline constexpr std::size_t kSweepCount = 20;
inline constexpr double kSweepMinFactor = 1.0;
inline constexpr double kSweepMaxFactor = 8.0;
inline constexpr std::size_t kScorerResolution = 224;

// 20 factors evenly spaced on [1, 8].
std::vector<double> sweep_factors();

// Down/up-sample by `factor` (target round(dim / factor), at least 1 pixel), then resize to 224 x 224.
PixelTensor blur_for_factor(const PixelTensor& x, double factor);

// Cosine similarity of the embeddings; throws ProtocolError on a dimension mismatch.
double alignment(const std::vector<double>& image_embedding, const std::vector<double>& text_embedding);

/// Scores the image against the prompt at every sweep factor and reports the maximum.
SweepReport blur_sweep(const PixelTensor& x, const std::string& prompt, Scorer& scorer);

}  // namespace fdiff
