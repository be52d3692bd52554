#pragma once

#include <httplib.h>

#include <atomic>
#include <cstdint>
#include <functional>
#include <string>
#include <thread>

#include <nlohmann/json.hpp>

#include "fdiff/decomp.hpp"
#include "fdiff/rng.hpp"
#include "fdiff/schedule.hpp"
#include "fdiff/tensor.hpp"
#include "fdiff/wire.hpp"

namespace fdiff::testing {

inline PixelTensor random_tensor(const Shape& shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
    PixelTensor x(shape);
    for (auto& v : x.data()) v = lo + (hi - lo) * rng.uniform();
    return x;
}

// Every built-in decomposition kind, sized for `shape` (3 channels needed for gray_color).
inline std::vector<Decomposition> all_decompositions(const Shape& shape) {
    std::vector<Decomposition> out;
    out.push_back(make_hybrid(2.0));
    out.push_back(make_triple(0.9, 1.6));
    out.push_back(make_gray_color());
    out.push_back(make_motion(Kernel2D::diagonal(29)));
    const std::size_t third = shape.width / 3;
    out.push_back(make_spatial({SpatialMask::columns(shape.height, shape.width, 0, third),
                                SpatialMask::columns(shape.height, shape.width, third, 2 * third),
                                SpatialMask::columns(shape.height, shape.width, 2 * third, shape.width)}));
    out.push_back(make_scaling({-6.0, 7.0}));
    return out;
}

/// httplib server on an ephemeral loopback port, serving until destroyed.
class LoopbackServer {
public:
    LoopbackServer() = default;
    LoopbackServer(const LoopbackServer&) = delete;
    LoopbackServer& operator=(const LoopbackServer&) = delete;
    ~LoopbackServer() { stop(); }

    httplib::Server& server() { return server_; }

    void start() {
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    void stop() {
        if (thread_.joinable()) {
            server_.stop();
            thread_.join();
        }
    }
    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

private:
    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
};

/// Minimal model server speaking the wire protocol: epsilon = x_t for every condition.
class EchoModelServer {
public:
    explicit EchoModelServer(Shape resolution, Schedule schedule = Schedule::linear(1000))
        : resolution_(resolution), schedule_(std::move(schedule)) {
        auto& s = loop_.server();
        s.Get("/v1/info", [this](const httplib::Request&, httplib::Response& res) {
            ++info_calls;
            res.set_content(wire::info_json({schedule_.T(), schedule_, resolution_, "echo"}).dump(), "application/json");
        });
        s.Post("/v1/predict_noise", [this](const httplib::Request& req, httplib::Response& res) {
            ++predict_calls;
            const auto body = nlohmann::json::parse(req.body);
            last_request = body;
            nlohmann::json eps = nlohmann::json::array();
            for (std::size_t i = 0; i < body["conditions"].size(); ++i) eps.push_back(body["x_t"]);
            res.set_content(nlohmann::json{{"epsilons", eps}}.dump(), "application/json");
        });
        s.Post("/v1/embed_text", [](const httplib::Request& req, httplib::Response& res) {
            const auto text = nlohmann::json::parse(req.body)["text"].get<std::string>();
            // Deterministic unit vector from the text length.
            const double a = static_cast<double>(text.size() % 7) / 7.0;
            res.set_content(nlohmann::json{{"embedding", {std::cos(a), std::sin(a), 0.0}}}.dump(), "application/json");
        });
        s.Post("/v1/embed_image", [](const httplib::Request& req, httplib::Response& res) {
            const auto body = nlohmann::json::parse(req.body);
            const auto img = wire::decode_tensor(body["image"].get<std::string>(), wire::parse_shape(body["shape"]));
            const double m = mean(img);
            const double n = std::sqrt(1.0 + m * m);
            res.set_content(nlohmann::json{{"embedding", {1.0 / n, m / n, 0.0}}}.dump(), "application/json");
        });
        loop_.start();
    }

    std::string url() const { return loop_.url(); }

    std::atomic<int> info_calls{0};
    std::atomic<int> predict_calls{0};
    nlohmann::json last_request;

private:
    Shape resolution_;
    Schedule schedule_;
    LoopbackServer loop_;
};

}  // namespace fdiff::testing
