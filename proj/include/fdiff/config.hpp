#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fdiff/decomp.hpp"
#include "fdiff/remote.hpp"
#include "fdiff/sampler.hpp"

namespace fdiff {

enum class Backend { oracle, remote };

std::string to_string(Backend b);

struct ScheduleSpec {
    std::size_t T = 1000;
    double beta_start = 1e-4;
    double beta_end = 0.02;
};

/// Everything one CLI run needs. Built from JSON, then CLI flags are layered on top.
struct RunConfig {
    nlohmann::json decomposition;
    // One per component, in component order. payload is the prompt (remote) or mixture id (oracle).
    std::vector<Condition> conditions;
    Backend backend = Backend::oracle;
    RemoteEndpoint endpoint;
    // Oracle mixtures, inline ({"conditions": {...}}) or loaded from mixtures_file.
    nlohmann::json mixtures;
    std::optional<std::string> unconditional;
    SamplerConfig sampler;
    ScheduleSpec schedule;
    // Blur sigmas are given at this width and scaled by width / sigma_base_width.
    double sigma_base_width = 64.0;
    std::filesystem::path out_dir = "out";
    // Relative paths in the config resolve against this directory.
    std::filesystem::path base_dir;

    nlohmann::json to_json() const;
};

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> steps;
    std::optional<std::string> backend;
    std::optional<std::string> endpoint;
    std::optional<std::filesystem::path> out;
};

// Throws ValidationError listing every problem found.
RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);
// Throws ValidationError on unparseable override values.
void apply_overrides(RunConfig& cfg, const Overrides& o);

// All problems that can be found without touching the network; empty when valid.
std::vector<std::string> validation_problems(const RunConfig& cfg);
void validate(const RunConfig& cfg);

Decomposition build_decomposition(const nlohmann::json& spec, const Shape& shape, double sigma_base_width = 64.0,
                                  const std::filesystem::path& base_dir = {});

// Loads a PNG as a binary mask (pixel > 127 in the first channel); it must already be h x w.
SpatialMask load_mask(const std::filesystem::path& path, std::size_t height, std::size_t width);

}  // namespace fdiff
