#include "fdiff/remote.hpp"

#include <httplib.h>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <thread>

#include "fdiff/errors.hpp"

namespace fdiff {

RemoteEndpoint RemoteEndpoint::with_env_overrides() const {
    RemoteEndpoint e = *this;
    if (const char* url = std::getenv("FD_ENDPOINT"); url && *url) e.base_url = url;
    if (const char* token = std::getenv("FD_TOKEN"); token && *token) e.token = token;
    return e;
}

void RemoteEndpoint::validate() const {
    if (!(timeout_seconds > 0.0)) throw ArgumentError("endpoint timeout must be positive");
    if (retries < 0) throw ArgumentError("endpoint retries must be non-negative");
    if (base_url.empty()) throw ArgumentError("endpoint URL is empty");
}

RemoteClient::RemoteClient(RemoteEndpoint endpoint) : endpoint_(std::move(endpoint)) { endpoint_.validate(); }

namespace {

template <class Send>
nlohmann::json round_trip(const RemoteEndpoint& e, const std::string& path, Send send) {
    std::string last_error;
    for (int attempt = 0; attempt <= e.retries; ++attempt) {
        if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(100 << std::min(attempt, 5)));

        httplib::Client client(e.base_url);
        const auto timeout = std::chrono::duration<double>(e.timeout_seconds);
        client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
        client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
        client.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
        if (e.token) client.set_bearer_token_auth(*e.token);

        httplib::Result res = send(client);
        if (!res) {
            last_error = httplib::to_string(res.error());
            continue;
        }
        // 5xx may be transient; requests are pure functions so resending is safe.
        if (res->status >= 500 && attempt < e.retries) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status >= 400) throw ServerError(res->status, res->body);
        try {
            return nlohmann::json::parse(res->body);
        } catch (const nlohmann::json::parse_error& err) {
            throw ProtocolError(path + ": response is not JSON (" + err.what() + ")");
        }
    }
    throw ConnectionError(e.base_url + path + ": " + last_error + " after " + std::to_string(e.retries + 1) +
                          " attempt(s)");
}

}  // namespace

nlohmann::json RemoteClient::get(const std::string& path) {
    return round_trip(endpoint_, path, [&](httplib::Client& c) { return c.Get(path); });
}

nlohmann::json RemoteClient::post(const std::string& path, const nlohmann::json& body) {
    const std::string payload = body.dump();
    return round_trip(endpoint_, path,
                      [&](httplib::Client& c) { return c.Post(path, payload, "application/json"); });
}

wire::ModelInfo RemoteClient::fetch_info() {
    auto info = wire::parse_info(get("/v1/info"));
    std::lock_guard lock(mutex_);
    resolution_ = info.resolution;
    return info;
}

std::vector<PixelTensor> RemoteClient::predict_noise(const PixelTensor& x_t, std::size_t t,
                                                     std::span<const Condition> conditions) {
    {
        std::lock_guard lock(mutex_);
        if (resolution_ && *resolution_ != x_t.shape()) {
            throw ShapeError("x_t is " + x_t.shape().str() + " but the server samples at " + resolution_->str());
        }
    }
    const auto body = post("/v1/predict_noise", wire::predict_request(x_t, t, conditions));
    return wire::parse_predict_response(body, x_t.shape(), conditions.size());
}

std::vector<double> RemoteClient::checked_embedding(const nlohmann::json& body) {
    auto v = wire::parse_embedding(body);
    std::lock_guard lock(mutex_);
    if (!embedding_dim_) {
        embedding_dim_ = v.size();
    } else if (*embedding_dim_ != v.size()) {
        throw ProtocolError("embedding dimension changed from " + std::to_string(*embedding_dim_) + " to " +
                            std::to_string(v.size()));
    }
    return v;
}

std::vector<double> RemoteClient::embed_image(const PixelTensor& image) {
    return checked_embedding(post("/v1/embed_image", wire::embed_image_request(image)));
}

std::vector<double> RemoteClient::embed_text(const std::string& prompt) {
    return checked_embedding(post("/v1/embed_text", wire::embed_text_request(prompt)));
}

}  // namespace fdiff
