#include "fdiff/config.hpp"

#include <cmath>
#include <fstream>

#include "fdiff/errors.hpp"
#include "fdiff/image_io.hpp"
#include "fdiff/oracle.hpp"

namespace fdiff {

std::string to_string(Backend b) { return b == Backend::oracle ? "oracle" : "remote"; }

namespace {

using nlohmann::json;

Backend parse_backend(const std::string& name) {
    if (name == "oracle") return Backend::oracle;
    if (name == "remote") return Backend::remote;
    throw ArgumentError("unknown backend '" + name + "' (expected oracle or remote)");
}

std::filesystem::path resolve(const std::filesystem::path& p, const std::filesystem::path& base) {
    return p.is_relative() && !base.empty() ? base / p : p;
}

// Runs `fn`, turning any exception into a recorded problem.
template <class Fn>
void collect(std::vector<std::string>& problems, const std::string& where, Fn fn) {
    try {
        fn();
    } catch (const std::exception& e) {
        problems.push_back(where + ": " + e.what());
    }
}

std::size_t odd_ksize(const json& spec) {
    const auto k = spec.value("ksize", static_cast<long long>(kDefaultKernelSize));
    if (k < 3 || k % 2 == 0) throw ArgumentError("ksize must be odd and >= 3, got " + std::to_string(k));
    return static_cast<std::size_t>(k);
}

double positive(const json& spec, const char* key) {
    if (!spec.contains(key) || !spec[key].is_number()) throw ArgumentError(std::string("missing number \"") + key + "\"");
    const double v = spec[key].get<double>();
    if (!(v > 0.0)) throw ArgumentError(std::string(key) + " must be positive, got " + std::to_string(v));
    return v;
}

}  // namespace

SpatialMask load_mask(const std::filesystem::path& path, std::size_t height, std::size_t width) {
    const PixelTensor img = load_image(path);
    if (img.height() != height || img.width() != width) {
        throw ShapeError("mask '" + path.string() + "' is " + std::to_string(img.height()) + "x" +
                         std::to_string(img.width()) + ", run resolution is " + std::to_string(height) + "x" +
                         std::to_string(width));
    }
    std::vector<std::uint8_t> bits(height * width);
    for (std::size_t y = 0; y < height; ++y)
        for (std::size_t x = 0; x < width; ++x) bits[y * width + x] = to_byte(img.at(0, y, x)) > 127 ? 1 : 0;
    return SpatialMask(height, width, std::move(bits));
}

Decomposition build_decomposition(const json& spec, const Shape& shape, double sigma_base_width,
                                  const std::filesystem::path& base_dir) {
    if (!spec.is_object() || !spec.contains("kind") || !spec["kind"].is_string()) {
        throw ArgumentError("decomposition needs a string \"kind\"");
    }
    const std::string kind = spec["kind"];
    const double sigma_scale = static_cast<double>(shape.width) / sigma_base_width;

    Decomposition d = [&]() -> Decomposition {
        if (kind == "hybrid") return make_hybrid(positive(spec, "sigma") * sigma_scale, odd_ksize(spec));
        if (kind == "triple") {
            return make_triple(positive(spec, "sigma1") * sigma_scale, positive(spec, "sigma2") * sigma_scale,
                               odd_ksize(spec));
        }
        if (kind == "gray_color") return make_gray_color();
        if (kind == "motion") {
            const auto& k = spec.value("kernel", json("diag"));
            if (k.is_string()) {
                if (k != "diag") throw ArgumentError("unknown motion kernel '" + k.get<std::string>() + "'");
                return make_motion(Kernel2D::diagonal(spec.value("k", 29)));
            }
            const auto rows = k.get<std::vector<std::vector<double>>>();
            if (rows.empty()) throw ArgumentError("motion kernel matrix is empty");
            std::vector<double> flat;
            for (const auto& r : rows) {
                if (r.size() != rows.front().size()) throw ArgumentError("motion kernel rows differ in length");
                flat.insert(flat.end(), r.begin(), r.end());
            }
            return make_motion(Kernel2D(rows.size(), rows.front().size(), std::move(flat)));
        }
        if (kind == "spatial") {
            std::vector<SpatialMask> masks;
            if (spec.contains("masks")) {
                for (const auto& p : spec["masks"])
                    masks.push_back(load_mask(resolve(p.get<std::string>(), base_dir), shape.height, shape.width));
            } else if (spec.contains("strips")) {
                const auto n = spec["strips"].get<std::size_t>();
                if (n == 0 || n > shape.width) throw ArgumentError("strips must be in [1, width]");
                for (std::size_t i = 0; i < n; ++i)
                    masks.push_back(SpatialMask::columns(shape.height, shape.width, i * shape.width / n,
                                                         (i + 1) * shape.width / n));
            } else {
                throw ArgumentError("spatial decomposition needs \"masks\" (PNG paths) or \"strips\"");
            }
            return make_spatial(masks);
        }
        if (kind == "scaling") {
            if (!spec.contains("weights")) throw ArgumentError("scaling decomposition needs \"weights\"");
            return make_scaling(spec["weights"].get<std::vector<double>>());
        }
        throw ArgumentError("unknown decomposition kind '" + kind + "'");
    }();
    d.check_input(shape);
    return d;
}

RunConfig parse_run_config(const json& j, const std::filesystem::path& base_dir) {
    std::vector<std::string> problems;
    RunConfig cfg;
    cfg.base_dir = base_dir;
    if (!j.is_object()) throw ValidationError({"config must be a JSON object"});

    if (j.contains("decomposition")) {
        cfg.decomposition = j["decomposition"];
    } else {
        problems.push_back("missing \"decomposition\"");
    }

    collect(problems, "backend", [&] { cfg.backend = parse_backend(j.value("backend", std::string("oracle"))); });

    if (!j.contains("conditions") || !j["conditions"].is_array()) {
        problems.push_back("missing \"conditions\" array");
    } else {
        std::size_t i = 0;
        for (const auto& c : j["conditions"]) {
            collect(problems, "conditions[" + std::to_string(i) + "]", [&] {
                Condition cond;
                cond.id = c.value("label", std::to_string(i));
                cond.guidance = c.value("guidance", 1.0);
                if (!(cond.guidance >= 0.0)) throw ArgumentError("guidance must be >= 0");
                const char* key = cfg.backend == Backend::oracle ? "mixture" : "prompt";
                if (!c.contains(key) || !c[key].is_string()) {
                    throw ArgumentError(std::string("needs a string \"") + key + "\" for the " +
                                        to_string(cfg.backend) + " backend");
                }
                cond.payload = c[key];
                cfg.conditions.push_back(std::move(cond));
            });
            ++i;
        }
    }

    if (j.contains("endpoint")) {
        collect(problems, "endpoint", [&] {
            const auto& e = j["endpoint"];
            cfg.endpoint.base_url = e.value("url", cfg.endpoint.base_url);
            cfg.endpoint.timeout_seconds = e.value("timeout", cfg.endpoint.timeout_seconds);
            cfg.endpoint.retries = e.value("retries", cfg.endpoint.retries);
            if (e.contains("token")) cfg.endpoint.token = e["token"].get<std::string>();
        });
    }

    collect(problems, "mixtures", [&] {
        if (j.contains("mixtures")) {
            cfg.mixtures = j["mixtures"];
        } else if (j.contains("mixtures_file")) {
            const auto path = resolve(j["mixtures_file"].get<std::string>(), base_dir);
            std::ifstream in(path);
            if (!in) throw IoError("cannot open '" + path.string() + "'");
            cfg.mixtures = json::parse(in);
        }
        if (j.contains("unconditional")) cfg.unconditional = j["unconditional"].get<std::string>();
    });

    if (j.contains("sampler")) {
        collect(problems, "sampler", [&] {
            const auto& s = j["sampler"];
            cfg.sampler.steps = s.value("steps", cfg.sampler.steps);
            cfg.sampler.kind = parse_update_kind(s.value("kind", std::string("ddim")));
            cfg.sampler.channels = s.value("channels", cfg.sampler.channels);
            if (s.contains("resolution")) {
                const auto r = s["resolution"].get<std::vector<std::size_t>>();
                if (r.size() != 2) throw ArgumentError("resolution must be [H, W]");
                cfg.sampler.height = r[0];
                cfg.sampler.width = r[1];
            }
        });
    }
    collect(problems, "seed", [&] { cfg.sampler.seed = j.value("seed", std::uint64_t{0}); });

    if (j.contains("schedule")) {
        collect(problems, "schedule", [&] {
            const auto& s = j["schedule"];
            cfg.schedule.T = s.value("T", cfg.schedule.T);
            cfg.schedule.beta_start = s.value("beta_start", cfg.schedule.beta_start);
            cfg.schedule.beta_end = s.value("beta_end", cfg.schedule.beta_end);
        });
    }
    collect(problems, "sigma_base_width", [&] {
        cfg.sigma_base_width = j.value("sigma_base_width", cfg.sigma_base_width);
        if (!(cfg.sigma_base_width > 0.0)) throw ArgumentError("must be positive");
    });
    collect(problems, "out", [&] { cfg.out_dir = j.value("out", std::string("out")); });

    if (!problems.empty()) throw ValidationError(std::move(problems));
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config '" + path.string() + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError({"config '" + path.string() + "' is not valid JSON: " + e.what()});
    }
    return parse_run_config(j, path.parent_path());
}

void apply_overrides(RunConfig& cfg, const Overrides& o) {
    std::vector<std::string> problems;
    if (o.seed) cfg.sampler.seed = *o.seed;
    if (o.steps) cfg.sampler.steps = *o.steps;
    if (o.backend) collect(problems, "--backend", [&] { cfg.backend = parse_backend(*o.backend); });
    if (o.endpoint) cfg.endpoint.base_url = *o.endpoint;
    if (o.out) cfg.out_dir = *o.out;
    if (!problems.empty()) throw ValidationError(std::move(problems));
}

std::vector<std::string> validation_problems(const RunConfig& cfg) {
    std::vector<std::string> problems;
    const Shape shape = cfg.sampler.shape();

    collect(problems, "sampler", [&] {
        if (cfg.sampler.steps < 1) throw ArgumentError("steps must be at least 1");
        if (cfg.backend == Backend::oracle && cfg.sampler.steps > cfg.schedule.T) {
            throw ArgumentError("steps (" + std::to_string(cfg.sampler.steps) + ") exceeds schedule length " +
                                std::to_string(cfg.schedule.T));
        }
        if (cfg.sampler.channels != 1 && cfg.sampler.channels != 3) throw ArgumentError("channels must be 1 or 3");
        if (cfg.sampler.height == 0 || cfg.sampler.width == 0) throw ArgumentError("resolution must be positive");
    });
    if (cfg.backend == Backend::oracle) {
        collect(problems, "schedule",
                [&] { Schedule::linear(cfg.schedule.T, cfg.schedule.beta_start, cfg.schedule.beta_end); });
    }

    std::optional<Decomposition> d;
    if (shape.size() > 0 && (shape.channels == 1 || shape.channels == 3)) {
        collect(problems, "decomposition",
                [&] { d = build_decomposition(cfg.decomposition, shape, cfg.sigma_base_width, cfg.base_dir); });
    }
    if (d && d->size() != cfg.conditions.size()) {
        problems.push_back("conditions: " + std::to_string(cfg.conditions.size()) + " given but the " + d->kind() +
                           " decomposition has " + std::to_string(d->size()) + " components");
    }

    if (cfg.backend == Backend::oracle) {
        collect(problems, "mixtures", [&] {
            if (cfg.mixtures.is_null()) throw ArgumentError("the oracle backend needs \"mixtures\" or \"mixtures_file\"");
            const auto mixtures = load_mixtures(cfg.mixtures, shape, cfg.base_dir);
            std::vector<std::string> missing;
            for (const auto& c : cfg.conditions)
                if (!mixtures.count(c.payload)) missing.push_back(c.payload);
            if (cfg.unconditional && !mixtures.count(*cfg.unconditional)) missing.push_back(*cfg.unconditional);
            if (!missing.empty()) {
                std::string msg = "undefined mixture(s):";
                for (const auto& m : missing) msg += " '" + m + "'";
                throw ArgumentError(msg);
            }
        });
        for (const auto& c : cfg.conditions) {
            if (c.guidance != 1.0 && !cfg.unconditional) {
                problems.push_back("conditions: guidance on '" + c.id + "' needs an \"unconditional\" mixture");
            }
        }
    } else {
        collect(problems, "endpoint", [&] { cfg.endpoint.validate(); });
    }
    return problems;
}

void validate(const RunConfig& cfg) {
    auto problems = validation_problems(cfg);
    if (!problems.empty()) throw ValidationError(std::move(problems));
}

nlohmann::json RunConfig::to_json() const {
    json conds = json::array();
    const char* key = backend == Backend::oracle ? "mixture" : "prompt";
    for (const auto& c : conditions) conds.push_back({{"label", c.id}, {key, c.payload}, {"guidance", c.guidance}});
    json j{{"decomposition", decomposition},
           {"conditions", std::move(conds)},
           {"backend", to_string(backend)},
           {"sampler",
            {{"steps", sampler.steps},
             {"kind", to_string(sampler.kind)},
             {"channels", sampler.channels},
             {"resolution", {sampler.height, sampler.width}}}},
           {"schedule", {{"T", schedule.T}, {"beta_start", schedule.beta_start}, {"beta_end", schedule.beta_end}}},
           {"sigma_base_width", sigma_base_width},
           {"seed", sampler.seed},
           {"out", out_dir.string()}};
    if (backend == Backend::oracle) {
        j["mixtures"] = mixtures;
        if (unconditional) j["unconditional"] = *unconditional;
    } else {
        // The token is a credential and never written out.
        j["endpoint"] = {{"url", endpoint.base_url}, {"timeout", endpoint.timeout_seconds}, {"retries", endpoint.retries}};
    }
    return j;
}

}  // namespace fdiff
