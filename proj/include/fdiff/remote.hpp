#pragma once

#include <cstddef>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fdiff/eval.hpp"
#include "fdiff/sampler.hpp"
#include "fdiff/wire.hpp"

namespace fdiff {

struct RemoteEndpoint {
    // scheme://host[:port]
    std::string base_url = "http://127.0.0.1:8000";
    double timeout_seconds = 120.0;
    int retries = 2;
    std::optional<std::string> token;

    // FD_ENDPOINT replaces base_url and FD_TOKEN sets the bearer token when present.
    RemoteEndpoint with_env_overrides() const;
    void validate() const;
};

/// HTTP client for the model server. Safe to share between threads.
class RemoteClient {
public:
    explicit RemoteClient(RemoteEndpoint endpoint);

    const RemoteEndpoint& endpoint() const noexcept { return endpoint_; }

    wire::ModelInfo fetch_info();
    // One round trip; estimates come back in request order.
    std::vector<PixelTensor> predict_noise(const PixelTensor& x_t, std::size_t t,
                                           std::span<const Condition> conditions);
    std::vector<double> embed_image(const PixelTensor& image);
    std::vector<double> embed_text(const std::string& prompt);

private:
    nlohmann::json get(const std::string& path);
    nlohmann::json post(const std::string& path, const nlohmann::json& body);
    std::vector<double> checked_embedding(const nlohmann::json& body);

    RemoteEndpoint endpoint_;
    std::mutex mutex_;
    std::optional<std::size_t> embedding_dim_;
    std::optional<Shape> resolution_;
};

class RemotePredictor : public NoisePredictor {
public:
    explicit RemotePredictor(RemoteClient& client) : client_(client) {}
    std::vector<PixelTensor> predict(const PixelTensor& x_t, std::size_t t,
                                     std::span<const Condition> conditions) override {
        return client_.predict_noise(x_t, t, conditions);
    }

private:
    RemoteClient& client_;
};

class RemoteScorer : public Scorer {
public:
    explicit RemoteScorer(RemoteClient& client) : client_(client) {}
    std::vector<double> embed_image(const PixelTensor& image) override { return client_.embed_image(image); }
    std::vector<double> embed_text(const std::string& prompt) override { return client_.embed_text(prompt); }

private:
    RemoteClient& client_;
};

}  // namespace fdiff
