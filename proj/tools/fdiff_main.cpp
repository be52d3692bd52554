// fdiff: factorized diffusion sampling from the command line.
//
//   fdiff generate    --config run.json [--seed N] [--steps N] [--backend oracle|remote] [--endpoint URL] [--out DIR]
//   fdiff inverse     --config run.json --ref photo.png --fixed low
//   fdiff sweep-sigma --config run.json --sigmas 1,1.5,2
//   fdiff eval        --image out/output.png --prompt "a dog" --prompt "a cat" [--endpoint URL]
//   fdiff info        [--config run.json] [--backend ...] [--endpoint URL]
//
// Exit codes: 0 ok, 2 invalid input, 3 backend/network failure, 4 file i/o.

#include <CLI11.hpp>

#include <iostream>

#include "fdiff/commands.hpp"
#include "fdiff/errors.hpp"

namespace {

struct CommonFlags {
    std::string config;
    fdiff::Overrides overrides;
    std::string backend;
    std::string endpoint;
    std::string out;
    std::uint64_t seed = 0;
    std::size_t steps = 0;
    CLI::Option* seed_opt = nullptr;
    CLI::Option* steps_opt = nullptr;

    void add(CLI::App& app, bool config_required) {
        auto* c = app.add_option("--config", config, "Run configuration (JSON)");
        if (config_required) c->required();
        seed_opt = app.add_option("--seed", seed, "RNG seed");
        steps_opt = app.add_option("--steps", steps, "Number of sampler steps");
        app.add_option("--backend", backend, "oracle or remote");
        app.add_option("--endpoint", endpoint, "Model server URL (remote backend)");
        app.add_option("--out", out, "Output directory");
    }

    // Config file, then FD_ENDPOINT / FD_TOKEN, then flags.
    fdiff::RunConfig load() {
        fdiff::RunConfig cfg;
        if (!config.empty()) {
            cfg = fdiff::load_run_config(config);
        } else {
            cfg.decomposition = {{"kind", "scaling"}, {"weights", {1.0}}};
        }
        cfg.endpoint = cfg.endpoint.with_env_overrides();
        if (*seed_opt) overrides.seed = seed;
        if (*steps_opt) overrides.steps = steps;
        if (!backend.empty()) overrides.backend = backend;
        if (!endpoint.empty()) overrides.endpoint = endpoint;
        if (!out.empty()) overrides.out = out;
        fdiff::apply_overrides(cfg, overrides);
        return cfg;
    }
};

std::vector<double> parse_sigmas(const std::string& text) {
    std::vector<double> out;
    std::vector<std::string> problems;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto end = text.find(',', start);
        const std::string item = text.substr(start, end == std::string::npos ? std::string::npos : end - start);
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            problems.push_back("--sigmas: '" + item + "' is not a number");
        }
        if (end == std::string::npos) break;
        start = end + 1;
    }
    if (!problems.empty()) throw fdiff::ValidationError(std::move(problems));
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Factorized diffusion: condition each component of a linear image decomposition on its own prompt"};
    app.require_subcommand(1);

    CommonFlags gen_flags, inv_flags, sweep_flags, info_flags;

    auto* generate = app.add_subcommand("generate", "Sample one image and write its components and a manifest");
    gen_flags.add(*generate, true);

    auto* inverse = app.add_subcommand("inverse", "Hold one component to a reference image and generate the rest");
    inv_flags.add(*inverse, true);
    std::string ref, fixed;
    inverse->add_option("--ref", ref, "Reference PNG")->required();
    inverse->add_option("--fixed", fixed, "Label of the component taken from the reference")->required();

    auto* sweep = app.add_subcommand("sweep-sigma", "One hybrid generation per blur sigma, shared seed");
    sweep_flags.add(*sweep, true);
    std::string sigmas;
    sweep->add_option("--sigmas", sigmas, "Comma-separated sigma values")->required();

    auto* eval = app.add_subcommand("eval", "Blur-sweep alignment score of an image against prompts");
    std::string image, eval_endpoint, eval_out = "eval";
    std::vector<std::string> prompts;
    eval->add_option("--image", image, "PNG to score")->required();
    eval->add_option("--prompt", prompts, "Prompt (repeatable)")->required();
    eval->add_option("--endpoint", eval_endpoint, "Scorer server URL");
    eval->add_option("--out", eval_out, "Output directory");

    auto* info = app.add_subcommand("info", "Show the schedule and backend in use");
    info_flags.add(*info, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? fdiff::kExitOk : fdiff::kExitValidation;
    }

    try {
        if (*generate) {
            const auto result = fdiff::cmd_generate(gen_flags.load());
            std::cout << result.image.string() << '\n';
            for (const auto& c : result.components) std::cout << c.string() << '\n';
            std::cout << result.manifest.string() << '\n';
        } else if (*inverse) {
            const auto result = fdiff::cmd_inverse(inv_flags.load(), ref, fixed);
            std::cout << result.image.string() << '\n'
                      << "fixed component residual: " << result.manifest_json["fixed_residual"].get<double>() << '\n'
                      << result.manifest.string() << '\n';
        } else if (*sweep) {
            const auto cfg = sweep_flags.load();
            const auto result = fdiff::cmd_sweep_sigma(cfg, parse_sigmas(sigmas));
            for (const auto& p : result.images) std::cout << p.string() << '\n';
            std::cout << result.grid.string() << '\n' << result.manifest.string() << '\n';
        } else if (*eval) {
            fdiff::RemoteEndpoint endpoint = fdiff::RemoteEndpoint{}.with_env_overrides();
            if (!eval_endpoint.empty()) endpoint.base_url = eval_endpoint;
            fdiff::RemoteClient client(endpoint);
            fdiff::RemoteScorer scorer(client);
            const auto outcomes = fdiff::cmd_eval(image, prompts, scorer, eval_out);
            bool failed = false;
            for (const auto& o : outcomes) {
                if (o.report) {
                    std::cout << '"' << o.prompt << "\": max " << o.report->max_score << " at factor "
                              << o.report->argmax_factor << " -> " << o.json_path.string() << '\n';
                } else {
                    failed = true;
                    std::cerr << '"' << o.prompt << "\": " << o.error << '\n';
                }
            }
            return failed ? fdiff::kExitBackend : fdiff::kExitOk;
        } else if (*info) {
            std::cout << fdiff::cmd_info(info_flags.load()).dump(2) << '\n';
        }
    } catch (...) {
        return fdiff::report_exception(std::cerr);
    }
    return fdiff::kExitOk;
}
