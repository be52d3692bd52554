#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fdiff/config.hpp"
#include "fdiff/eval.hpp"
#include "fdiff/remote.hpp"

namespace fdiff {

enum ExitCode : int {
    kExitOk = 0,
    kExitValidation = 2,
    kExitBackend = 3,
    kExitIo = 4,
};

// Maps the currently handled exception to an exit code and prints it to `err`.
int report_exception(std::ostream& err);

/// Predictor, schedule, and (for the remote backend) client for one run.
struct BackendSession {
    std::unique_ptr<RemoteClient> client;
    std::unique_ptr<NoisePredictor> predictor;
    std::unique_ptr<Schedule> schedule;
    std::string schedule_source;
    std::string model;
};

// Validates the config first; the remote backend then fetches /v1/info and
// checks the served resolution against the run.
BackendSession open_backend(const RunConfig& cfg);

struct GenerateResult {
    std::filesystem::path image;
    std::vector<std::filesystem::path> components;
    std::filesystem::path manifest;
    nlohmann::json manifest_json;
};

// Rescales a tensor to the full [-1, 1] range for display. Constant tensors map to 0.
PixelTensor display_normalize(const PixelTensor& x);

GenerateResult cmd_generate(const RunConfig& cfg);

GenerateResult cmd_inverse(const RunConfig& cfg, const std::filesystem::path& ref, const std::string& fixed_label);

struct SigmaSweepResult {
    std::vector<double> sigmas;
    std::vector<std::filesystem::path> images;
    std::filesystem::path grid;
    std::filesystem::path manifest;
};

// Hybrid decompositions only; one generation per sigma with the shared seed.
SigmaSweepResult cmd_sweep_sigma(const RunConfig& cfg, const std::vector<double>& sigmas);

struct EvalOutcome {
    std::string prompt;
    std::optional<SweepReport> report;
    std::string error;
    std::filesystem::path json_path;
    std::filesystem::path csv_path;
};

// One report per prompt written as eval_<i>.json / eval_<i>.csv. A failing
// prompt is recorded and the rest still run.
std::vector<EvalOutcome> cmd_eval(const std::filesystem::path& image, const std::vector<std::string>& prompts,
                                  Scorer& scorer, const std::filesystem::path& out_dir);

// Schedule summary, plus served model metadata for the remote backend.
nlohmann::json cmd_info(const RunConfig& cfg);

}  // namespace fdiff
