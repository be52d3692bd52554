#include "fdiff/wire.hpp"

#include <sodium.h>

#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "fdiff/errors.hpp"

namespace fdiff::wire {

namespace {

void init_sodium() {
    if (sodium_init() < 0) throw std::runtime_error("libsodium failed to initialize");
}

const nlohmann::json& field(const nlohmann::json& body, const char* name) {
    if (!body.is_object() || !body.contains(name)) {
        throw ProtocolError(std::string("response is missing \"") + name + "\"");
    }
    return body[name];
}

}  // namespace

std::string base64_encode(std::span<const unsigned char> bytes) {
    init_sodium();
    const std::size_t len = sodium_base64_encoded_len(bytes.size(), sodium_base64_VARIANT_ORIGINAL);
    std::string out(len, '\0');
    sodium_bin2base64(out.data(), len, bytes.data(), bytes.size(), sodium_base64_VARIANT_ORIGINAL);
    out.resize(len - 1);  // drop the terminator
    return out;
}

std::vector<unsigned char> base64_decode(std::string_view text) {
    init_sodium();
    std::vector<unsigned char> out(text.size() / 4 * 3 + 3);
    std::size_t len = 0;
    const char* end = nullptr;
    if (sodium_base642bin(out.data(), out.size(), text.data(), text.size(), nullptr, &len, &end,
                          sodium_base64_VARIANT_ORIGINAL) != 0 ||
        end != text.data() + text.size()) {
        throw ProtocolError("malformed base64 payload");
    }
    out.resize(len);
    return out;
}

std::string encode_tensor(const PixelTensor& x) {
    std::vector<unsigned char> bytes(x.size() * 4);
    std::size_t i = 0;
    for (double v : x.data()) {
        const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
        for (int b = 0; b < 4; ++b) bytes[i++] = static_cast<unsigned char>(bits >> (8 * b));
    }
    return base64_encode(bytes);
}

PixelTensor decode_tensor(std::string_view b64, const Shape& shape) {
    const auto bytes = base64_decode(b64);
    if (bytes.size() != 4 * shape.size()) {
        throw ProtocolError("tensor payload has " + std::to_string(bytes.size()) + " bytes, expected " +
                            std::to_string(4 * shape.size()) + " for shape " + shape.str());
    }
    PixelTensor out(shape);
    auto data = out.data();
    for (std::size_t i = 0; i < data.size(); ++i) {
        std::uint32_t bits = 0;
        for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(bytes[4 * i + b]) << (8 * b);
        const float v = std::bit_cast<float>(bits);
        if (!std::isfinite(v)) throw ProtocolError("tensor payload holds a non-finite value at " + std::to_string(i));
        data[i] = v;
    }
    return out;
}

nlohmann::json shape_json(const Shape& shape) { return {shape.channels, shape.height, shape.width}; }

Shape parse_shape(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 3) throw ProtocolError("shape must be [C, H, W]");
    for (const auto& v : j)
        if (!v.is_number_unsigned() || v.get<std::size_t>() == 0) throw ProtocolError("shape entries must be positive");
    return {j[0].get<std::size_t>(), j[1].get<std::size_t>(), j[2].get<std::size_t>()};
}

nlohmann::json info_json(const ModelInfo& info) {
    const auto& a = info.schedule.alpha_bars();
    return {{"T", info.T},
            {"alphas_cumprod", std::vector<double>(a.begin() + 1, a.end())},
            {"resolution", shape_json(info.resolution)},
            {"model", info.model}};
}

ModelInfo parse_info(const nlohmann::json& body) {
    const auto& t = field(body, "T");
    const auto& alphas = field(body, "alphas_cumprod");
    if (!t.is_number_unsigned() || t.get<std::size_t>() == 0) throw ProtocolError("\"T\" must be a positive integer");
    if (!alphas.is_array()) throw ProtocolError("\"alphas_cumprod\" must be an array");
    const auto T = t.get<std::size_t>();
    if (alphas.size() != T) {
        throw ProtocolError("alphas_cumprod has " + std::to_string(alphas.size()) + " entries but T = " +
                            std::to_string(T));
    }
    std::vector<double> values;
    values.reserve(T);
    for (const auto& v : alphas) {
        if (!v.is_number()) throw ProtocolError("alphas_cumprod entries must be numbers");
        values.push_back(v.get<double>());
    }
    const auto& model = field(body, "model");
    if (!model.is_string()) throw ProtocolError("\"model\" must be a string");
    return {T, Schedule(std::move(values)), parse_shape(field(body, "resolution")), model.get<std::string>()};
}

nlohmann::json predict_request(const PixelTensor& x_t, std::size_t t, std::span<const Condition> conditions) {
    if (t == 0) throw ArgumentError("the clean timestep t = 0 is never sent to the model");
    nlohmann::json conds = nlohmann::json::array();
    for (const auto& c : conditions) conds.push_back({{"prompt", c.payload}, {"guidance", c.guidance}});
    return {{"shape", shape_json(x_t.shape())},
            {"dtype", "f32le"},
            {"x_t", encode_tensor(x_t)},
            {"t", t - 1},
            {"conditions", std::move(conds)}};
}

std::vector<PixelTensor> parse_predict_response(const nlohmann::json& body, const Shape& shape,
                                                std::size_t expected_count) {
    const auto& eps = field(body, "epsilons");
    if (!eps.is_array()) throw ProtocolError("\"epsilons\" must be an array");
    if (eps.size() != expected_count) {
        throw ProtocolError("expected " + std::to_string(expected_count) + " epsilons, got " +
                            std::to_string(eps.size()));
    }
    std::vector<PixelTensor> out;
    out.reserve(eps.size());
    for (const auto& e : eps) {
        if (!e.is_string()) throw ProtocolError("epsilon entries must be base64 strings");
        out.push_back(decode_tensor(e.get<std::string>(), shape));
    }
    return out;
}

nlohmann::json embed_image_request(const PixelTensor& image) {
    return {{"shape", shape_json(image.shape())}, {"dtype", "f32le"}, {"image", encode_tensor(image)}};
}

nlohmann::json embed_text_request(const std::string& text) { return {{"text", text}}; }

std::vector<double> parse_embedding(const nlohmann::json& body) {
    const auto& e = field(body, "embedding");
    if (!e.is_array() || e.empty()) throw ProtocolError("\"embedding\" must be a non-empty array");
    std::vector<double> v;
    v.reserve(e.size());
    double sq = 0.0;
    for (const auto& x : e) {
        if (!x.is_number()) throw ProtocolError("embedding entries must be numbers");
        v.push_back(x.get<double>());
        sq += v.back() * v.back();
    }
    if (std::abs(std::sqrt(sq) - 1.0) > 1e-4) {
        throw ProtocolError("embedding norm is " + std::to_string(std::sqrt(sq)) + ", expected 1");
    }
    return v;
}

}  // namespace fdiff::wire
