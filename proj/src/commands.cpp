#include "fdiff/commands.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "fdiff/errors.hpp"
#include "fdiff/image_io.hpp"
#include "fdiff/oracle.hpp"
#include "fdiff/resample.hpp"

namespace fdiff {

using nlohmann::json;
namespace fs = std::filesystem;

int report_exception(std::ostream& err) {
    try {
        throw;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const BackendError& e) {
        err << "backend error: " << e.what() << '\n';
        return kExitBackend;
    } catch (const IoError& e) {
        err << "i/o error: " << e.what() << '\n';
        return kExitIo;
    } catch (const fs::filesystem_error& e) {
        err << "i/o error: " << e.what() << '\n';
        return kExitIo;
    } catch (const ArgumentError& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const ShapeError& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

namespace {

// A bad served schedule is the server's fault, so it surfaces as a protocol error.
wire::ModelInfo fetch_checked(RemoteClient& client) {
    try {
        return client.fetch_info();
    } catch (const ScheduleError& e) {
        throw ProtocolError(std::string("/v1/info schedule is invalid: ") + e.what());
    }
}

}  // namespace

BackendSession open_backend(const RunConfig& cfg) {
    validate(cfg);
    BackendSession session;
    if (cfg.backend == Backend::oracle) {
        session.schedule = std::make_unique<Schedule>(
            Schedule::linear(cfg.schedule.T, cfg.schedule.beta_start, cfg.schedule.beta_end));
        session.schedule_source = "linear";
        session.model = "analytic-gaussian-mixture";
        session.predictor = std::make_unique<OraclePredictor>(
            *session.schedule, load_mixtures(cfg.mixtures, cfg.sampler.shape(), cfg.base_dir), cfg.unconditional);
        return session;
    }

    session.client = std::make_unique<RemoteClient>(cfg.endpoint);
    wire::ModelInfo info = fetch_checked(*session.client);
    if (info.resolution != cfg.sampler.shape()) {
        throw ProtocolError("server samples at " + info.resolution.str() + " but the run requests " +
                            cfg.sampler.shape().str());
    }
    if (cfg.sampler.steps > info.T) {
        throw ProtocolError("steps (" + std::to_string(cfg.sampler.steps) + ") exceeds the served schedule length " +
                            std::to_string(info.T));
    }
    session.schedule = std::make_unique<Schedule>(std::move(info.schedule));
    session.schedule_source = "remote";
    session.model = info.model;
    session.predictor = std::make_unique<RemotePredictor>(*session.client);
    return session;
}

PixelTensor display_normalize(const PixelTensor& x) {
    if (x.empty()) return x;
    const auto [lo, hi] = std::minmax_element(x.data().begin(), x.data().end());
    const double range = *hi - *lo;
    PixelTensor out(x.shape());
    if (range == 0.0) return out;
    auto o = out.data();
    auto in = x.data();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] = 2.0 * (in[i] - *lo) / range - 1.0;
    return out;
}

namespace {

std::string timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream s;
    s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return s.str();
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << j.dump(2) << '\n';
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
}

struct Trace {
    json steps = json::array();
    StepObserver observer() {
        return [this](const StepRecord& r) {
            steps.push_back({{"step", r.step},
                             {"t", r.t},
                             {"t_prev", r.t_prev},
                             {"predict_seconds", r.predict_seconds},
                             {"step_seconds", r.step_seconds}});
        };
    }
};

json base_manifest(const std::string& command, const RunConfig& cfg, const BackendSession& session,
                   const Decomposition& d) {
    return {{"command", command},
            {"created", timestamp()},
            {"config", cfg.to_json()},
            {"config_base_dir", cfg.base_dir.string()},
            {"seed", cfg.sampler.seed},
            {"schedule",
             {{"T", session.schedule->T()}, {"hash", session.schedule->hash()}, {"source", session.schedule_source}}},
            {"model", session.model},
            {"decomposition", d.describe()}};
}

// Writes output.png and one display PNG per component into `dir`.
GenerateResult write_outputs(const fs::path& dir, const PixelTensor& x, const Decomposition& d) {
    ensure_dir(dir);
    GenerateResult result;
    result.image = dir / "output.png";
    save_image(x, result.image);
    const auto parts = d.apply(x);
    for (std::size_t i = 0; i < parts.size(); ++i) {
        result.components.push_back(dir / ("component_" + d.labels()[i] + ".png"));
        save_image(display_normalize(parts[i]), result.components.back());
    }
    return result;
}

json output_json(const GenerateResult& r) {
    json comps = json::array();
    for (const auto& c : r.components) comps.push_back(c.filename().string());
    return {{"image", r.image.filename().string()}, {"components", comps}};
}

PixelTensor adapt_reference(const PixelTensor& img, const Shape& shape) {
    PixelTensor r = resample(img, shape.height, shape.width);
    if (r.channels() == shape.channels) return r;
    PixelTensor out(shape);
    for (std::size_t y = 0; y < shape.height; ++y) {
        for (std::size_t x = 0; x < shape.width; ++x) {
            const double v = r.channels() == 1 ? r.at(0, y, x) : (r.at(0, y, x) + r.at(1, y, x) + r.at(2, y, x)) / 3.0;
            for (std::size_t c = 0; c < shape.channels; ++c) out.at(c, y, x) = v;
        }
    }
    return out;
}

std::string sigma_name(double sigma) {
    std::ostringstream s;
    s << sigma;
    return s.str();
}

PixelTensor hconcat(const std::vector<PixelTensor>& images) {
    const Shape first = images.front().shape();
    PixelTensor grid(Shape{first.channels, first.height, first.width * images.size()});
    for (std::size_t k = 0; k < images.size(); ++k)
        for (std::size_t c = 0; c < first.channels; ++c)
            for (std::size_t y = 0; y < first.height; ++y)
                for (std::size_t x = 0; x < first.width; ++x) grid.at(c, y, k * first.width + x) = images[k].at(c, y, x);
    return grid;
}

}  // namespace

GenerateResult cmd_generate(const RunConfig& cfg) {
    validate(cfg);
    const Decomposition d = build_decomposition(cfg.decomposition, cfg.sampler.shape(), cfg.sigma_base_width, cfg.base_dir);
    BackendSession session = open_backend(cfg);

    Trace trace;
    const PixelTensor x =
        sample_factorized(*session.predictor, d, cfg.conditions, cfg.sampler, *session.schedule, trace.observer());

    GenerateResult result = write_outputs(cfg.out_dir, x, d);
    json manifest = base_manifest("generate", cfg, session, d);
    manifest["steps"] = std::move(trace.steps);
    manifest["outputs"] = output_json(result);
    result.manifest = cfg.out_dir / "manifest.json";
    write_json(result.manifest, manifest);
    result.manifest_json = std::move(manifest);
    return result;
}

GenerateResult cmd_inverse(const RunConfig& cfg, const fs::path& ref, const std::string& fixed_label) {
    validate(cfg);
    const Shape shape = cfg.sampler.shape();
    const Decomposition d = build_decomposition(cfg.decomposition, shape, cfg.sigma_base_width, cfg.base_dir);
    const auto fixed = d.index_of(fixed_label);
    if (!fixed) {
        std::string valid;
        for (const auto& l : d.labels()) valid += (valid.empty() ? "" : ", ") + l;
        throw ValidationError({"unknown component '" + fixed_label + "'; valid labels: " + valid});
    }
    const PixelTensor x_ref = adapt_reference(load_image(ref), shape);
    BackendSession session = open_backend(cfg);

    Trace trace;
    const PixelTensor x = sample_inverse(*session.predictor, d, cfg.conditions, x_ref, *fixed, cfg.sampler,
                                         *session.schedule, trace.observer());
    const double residual = max_abs_diff(d.component(*fixed)(x), d.component(*fixed)(x_ref));

    GenerateResult result = write_outputs(cfg.out_dir, x, d);
    save_image(x_ref, cfg.out_dir / "reference.png");
    json manifest = base_manifest("inverse", cfg, session, d);
    manifest["reference"] = fs::absolute(ref).string();
    manifest["fixed_component"] = fixed_label;
    manifest["fixed_residual"] = residual;
    manifest["steps"] = std::move(trace.steps);
    manifest["outputs"] = output_json(result);
    result.manifest = cfg.out_dir / "manifest.json";
    write_json(result.manifest, manifest);
    result.manifest_json = std::move(manifest);
    return result;
}

SigmaSweepResult cmd_sweep_sigma(const RunConfig& cfg, const std::vector<double>& sigmas) {
    std::vector<std::string> problems = validation_problems(cfg);
    if (sigmas.empty()) problems.push_back("sigma list is empty");
    for (double s : sigmas)
        if (!(s > 0.0)) problems.push_back("sigma must be positive, got " + sigma_name(s));
    if (cfg.decomposition.value("kind", std::string()) != "hybrid") {
        problems.push_back("sweep-sigma needs a hybrid decomposition");
    }
    if (!problems.empty()) throw ValidationError(std::move(problems));

    BackendSession session = open_backend(cfg);
    ensure_dir(cfg.out_dir);

    SigmaSweepResult result;
    result.sigmas = sigmas;
    std::vector<PixelTensor> images;
    json runs = json::array();
    for (double sigma : sigmas) {
        json spec = cfg.decomposition;
        spec["sigma"] = sigma;
        const Decomposition d = build_decomposition(spec, cfg.sampler.shape(), cfg.sigma_base_width, cfg.base_dir);
        Trace trace;
        PixelTensor x =
            sample_factorized(*session.predictor, d, cfg.conditions, cfg.sampler, *session.schedule, trace.observer());
        const fs::path path = cfg.out_dir / ("sigma_" + sigma_name(sigma) + ".png");
        save_image(x, path);
        result.images.push_back(path);
        runs.push_back({{"sigma", sigma}, {"image", path.filename().string()}, {"decomposition", d.describe()},
                        {"steps", std::move(trace.steps)}});
        images.push_back(std::move(x));
    }
    result.grid = cfg.out_dir / "grid.png";
    save_image(hconcat(images), result.grid);

    json manifest{{"command", "sweep-sigma"},
                  {"created", timestamp()},
                  {"config", cfg.to_json()},
                  {"config_base_dir", cfg.base_dir.string()},
                  {"seed", cfg.sampler.seed},
                  {"schedule",
                   {{"T", session.schedule->T()}, {"hash", session.schedule->hash()}, {"source", session.schedule_source}}},
                  {"model", session.model},
                  {"sigmas", sigmas},
                  {"runs", std::move(runs)},
                  {"grid", result.grid.filename().string()}};
    result.manifest = cfg.out_dir / "manifest.json";
    write_json(result.manifest, manifest);
    return result;
}

std::vector<EvalOutcome> cmd_eval(const fs::path& image, const std::vector<std::string>& prompts, Scorer& scorer,
                                  const fs::path& out_dir) {
    if (prompts.empty()) throw ValidationError({"at least one prompt is required"});
    const PixelTensor x = load_image(image);
    ensure_dir(out_dir);
    std::vector<EvalOutcome> outcomes;
    for (std::size_t i = 0; i < prompts.size(); ++i) {
        EvalOutcome o;
        o.prompt = prompts[i];
        try {
            o.report = blur_sweep(x, prompts[i], scorer);
        } catch (const BackendError& e) {
            o.error = e.what();
        }
        if (o.report) {
            o.json_path = out_dir / ("eval_" + std::to_string(i) + ".json");
            o.csv_path = out_dir / ("eval_" + std::to_string(i) + ".csv");
            json j = o.report->to_json();
            j["image"] = fs::absolute(image).string();
            write_json(o.json_path, j);
            write_text(o.csv_path, o.report->to_csv());
        }
        outcomes.push_back(std::move(o));
    }
    return outcomes;
}

json cmd_info(const RunConfig& cfg) {
    json info{{"backend", to_string(cfg.backend)}};
    std::unique_ptr<Schedule> schedule;
    if (cfg.backend == Backend::oracle) {
        schedule = std::make_unique<Schedule>(
            Schedule::linear(cfg.schedule.T, cfg.schedule.beta_start, cfg.schedule.beta_end));
        info["schedule_source"] = "linear";
    } else {
        RemoteClient client(cfg.endpoint);
        auto served = fetch_checked(client);
        info["endpoint"] = cfg.endpoint.base_url;
        info["model"] = served.model;
        info["resolution"] = wire::shape_json(served.resolution);
        info["schedule_source"] = "remote";
        schedule = std::make_unique<Schedule>(std::move(served.schedule));
    }
    info["T"] = schedule->T();
    info["alpha_bar_first"] = schedule->alpha_bar(1);
    info["alpha_bar_last"] = schedule->alpha_bar(schedule->T());
    info["schedule_hash"] = schedule->hash();
    return info;
}

}  // namespace fdiff
