#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "fdiff/sampler.hpp"
#include "fdiff/schedule.hpp"
#include "fdiff/tensor.hpp"

// JSON/base64 wire format shared with the model server.
//
//   GET  /v1/info           -> {"T", "alphas_cumprod", "resolution": [C,H,W], "model"}
//   POST /v1/predict_noise  {"shape", "dtype": "f32le", "x_t", "t", "conditions": [{"prompt","guidance"}]}
//                           -> {"epsilons": ["<base64>", ...]}
//   POST /v1/embed_image    {"shape", "dtype": "f32le", "image"} -> {"embedding": [...]}
//   POST /v1/embed_text     {"text"} -> {"embedding": [...]}
//
// Tensors travel as base64 of row-major little-endian IEEE-754 binary32.
// The wire timestep is the index into alphas_cumprod, i.e. t - 1 for the
// engine's timestep t (engine t = 0 is the clean image and never queried).
namespace fdiff::wire {

std::string base64_encode(std::span<const unsigned char> bytes);
// Throws ProtocolError on malformed input.
std::vector<unsigned char> base64_decode(std::string_view text);

// Values are narrowed to binary32.
std::string encode_tensor(const PixelTensor& x);
// Throws ProtocolError when the payload is not exactly 4*C*H*W bytes or holds non-finite values.
PixelTensor decode_tensor(std::string_view b64, const Shape& shape);

struct ModelInfo {
    std::size_t T;
    Schedule schedule;
    Shape resolution;
    std::string model;
};

nlohmann::json info_json(const ModelInfo& info);
// Throws ProtocolError on missing/mistyped fields or a length mismatch, ScheduleError
// (naming the index) on out-of-range or non-monotone alphas.
ModelInfo parse_info(const nlohmann::json& body);

nlohmann::json shape_json(const Shape& shape);
Shape parse_shape(const nlohmann::json& j);

nlohmann::json predict_request(const PixelTensor& x_t, std::size_t t, std::span<const Condition> conditions);
std::vector<PixelTensor> parse_predict_response(const nlohmann::json& body, const Shape& shape,
                                                std::size_t expected_count);

nlohmann::json embed_image_request(const PixelTensor& image);
nlohmann::json embed_text_request(const std::string& text);
// Returns the embedding; ProtocolError if it is missing, empty, or not unit norm (1e-4).
std::vector<double> parse_embedding(const nlohmann::json& body);

}  // namespace fdiff::wire
