// Python bindings. Images and noise cross the boundary as float64 (C, H, W) numpy arrays.

#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <cstring>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "fdiff/config.hpp"
#include "fdiff/decomp.hpp"
#include "fdiff/errors.hpp"
#include "fdiff/eval.hpp"
#include "fdiff/filters.hpp"
#include "fdiff/oracle.hpp"
#include "fdiff/sampler.hpp"
#include "fdiff/schedule.hpp"
#include "fdiff/update.hpp"

namespace py = pybind11;
using namespace fdiff;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

PixelTensor to_tensor(const Array& a) {
    Shape shape;
    if (a.ndim() == 3) {
        shape = {static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)),
                 static_cast<std::size_t>(a.shape(2))};
    } else if (a.ndim() == 2) {
        shape = {1, static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1))};
    } else {
        throw ShapeError("expected a (C, H, W) or (H, W) array, got " + std::to_string(a.ndim()) + " dimension(s)");
    }
    return PixelTensor(shape, std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_array(const PixelTensor& x) {
    Array out({x.channels(), x.height(), x.width()});
    std::copy(x.data().begin(), x.data().end(), out.mutable_data());
    return out;
}

std::vector<PixelTensor> to_tensors(const std::vector<Array>& arrays) {
    std::vector<PixelTensor> out;
    out.reserve(arrays.size());
    for (const auto& a : arrays) out.push_back(to_tensor(a));
    return out;
}

std::vector<Array> to_arrays(const std::vector<PixelTensor>& xs) {
    std::vector<Array> out;
    out.reserve(xs.size());
    for (const auto& x : xs) out.push_back(to_array(x));
    return out;
}

SpatialMask to_mask(const py::array_t<bool, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 2) throw ShapeError("masks must be (H, W) arrays");
    return SpatialMask(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)),
                       std::vector<std::uint8_t>(a.data(), a.data() + a.size()));
}

// Calls fn(x_t, t, [(id, payload, guidance), ...]) -> [eps, ...].
class CallablePredictor : public NoisePredictor {
public:
    explicit CallablePredictor(py::function fn) : fn_(std::move(fn)) {}

    std::vector<PixelTensor> predict(const PixelTensor& x_t, std::size_t t,
                                     std::span<const Condition> conditions) override {
        py::list conds;
        for (const auto& c : conditions) conds.append(py::make_tuple(c.id, c.payload, c.guidance));
        const auto result = fn_(to_array(x_t), t, conds).cast<std::vector<Array>>();
        return to_tensors(result);
    }

private:
    py::function fn_;
};

using MixtureSpec = std::vector<std::tuple<double, Array, double>>;

std::map<std::string, MixtureCondition> to_mixtures(const std::map<std::string, MixtureSpec>& spec) {
    std::map<std::string, MixtureCondition> out;
    for (const auto& [id, comps] : spec) {
        std::vector<MixtureComponent> parts;
        for (const auto& [w, mean, var] : comps) parts.push_back({w, to_tensor(mean), var});
        out.emplace(id, MixtureCondition(std::move(parts)));
    }
    return out;
}

std::vector<Condition> to_conditions(const std::vector<py::tuple>& items) {
    std::vector<Condition> out;
    for (const auto& t : items) {
        if (t.size() < 2 || t.size() > 3) throw ArgumentError("conditions are (id, payload[, guidance]) tuples");
        out.push_back({t[0].cast<std::string>(), t[1].cast<std::string>(), t.size() == 3 ? t[2].cast<double>() : 1.0});
    }
    return out;
}

SamplerConfig make_config(const std::tuple<std::size_t, std::size_t, std::size_t>& shape, std::size_t steps,
                          std::uint64_t seed, const std::string& kind) {
    SamplerConfig cfg;
    std::tie(cfg.channels, cfg.height, cfg.width) = shape;
    cfg.steps = steps;
    cfg.seed = seed;
    cfg.kind = parse_update_kind(kind);
    return cfg;
}

class PyScorer : public Scorer {
public:
    PyScorer(py::function image, py::function text) : image_(std::move(image)), text_(std::move(text)) {}
    std::vector<double> embed_image(const PixelTensor& x) override { return image_(to_array(x)).cast<std::vector<double>>(); }
    std::vector<double> embed_text(const std::string& p) override { return text_(p).cast<std::vector<double>>(); }

private:
    py::function image_;
    py::function text_;
};

}  // namespace

PYBIND11_MODULE(_fdiff, m) {
    m.doc() = "Factorized diffusion sampling";

    py::register_exception<ArgumentError>(m, "ArgumentError", PyExc_ValueError);
    py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
    py::register_exception<ScheduleError>(m, "ScheduleError", PyExc_ValueError);
    py::register_exception<BackendError>(m, "BackendError", PyExc_RuntimeError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const ValidationError& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        }
    });

    py::class_<Schedule>(m, "Schedule")
        .def(py::init<std::vector<double>>(), py::arg("alphas_cumprod"))
        .def_static("linear", &Schedule::linear, py::arg("steps") = 1000, py::arg("beta_start") = 1e-4,
                    py::arg("beta_end") = 0.02)
        .def_property_readonly("T", &Schedule::T)
        .def_property_readonly("alpha_bars", &Schedule::alpha_bars)
        .def("alpha_bar", &Schedule::alpha_bar, py::arg("t"))
        .def("sigma_z", &Schedule::sigma_z, py::arg("t"), py::arg("t_prev"))
        .def("timesteps", &Schedule::timesteps, py::arg("steps"))
        .def("hash", &Schedule::hash);

    py::class_<Decomposition>(m, "Decomposition")
        .def_property_readonly("kind", &Decomposition::kind)
        .def_property_readonly("labels", &Decomposition::labels)
        .def("__len__", &Decomposition::size)
        .def("apply", [](const Decomposition& d, const Array& x) { return to_arrays(d.apply(to_tensor(x))); },
             py::arg("x"))
        .def("component", [](const Decomposition& d, std::size_t i, const Array& x) { return to_array(d.component(i)(to_tensor(x))); },
             py::arg("index"), py::arg("x"))
        .def("describe", [](const Decomposition& d) { return d.describe().dump(); });

    m.def("hybrid", &make_hybrid, py::arg("sigma"), py::arg("ksize") = kDefaultKernelSize);
    m.def("triple", &make_triple, py::arg("sigma1"), py::arg("sigma2"), py::arg("ksize") = kDefaultKernelSize);
    m.def("gray_color", &make_gray_color);
    m.def("motion", [](std::size_t length) { return make_motion(Kernel2D::diagonal(length)); }, py::arg("length"),
          "Diagonal motion blur of the given length.");
    m.def("spatial", [](const std::vector<py::array_t<bool, py::array::c_style | py::array::forcecast>>& masks) {
        std::vector<SpatialMask> ms;
        for (const auto& a : masks) ms.push_back(to_mask(a));
        return make_spatial(ms);
    }, py::arg("masks"));
    m.def("scaling", &make_scaling, py::arg("weights"));
    m.def("identity", &make_identity);
    m.def("from_json", [](const std::string& spec, std::tuple<std::size_t, std::size_t, std::size_t> shape, double base_width) {
        const auto [c, h, w] = shape;
        return build_decomposition(nlohmann::json::parse(spec), Shape{c, h, w}, base_width);
    }, py::arg("spec"), py::arg("shape"), py::arg("sigma_base_width") = 64.0,
          "Build a decomposition from its JSON description; blur sigmas scale with width / sigma_base_width.");

    m.def("gaussian_blur", [](const Array& x, double sigma, std::size_t ksize) {
        return to_array(gaussian_blur(to_tensor(x), sigma, ksize));
    }, py::arg("x"), py::arg("sigma"), py::arg("ksize") = kDefaultKernelSize);
    m.def("composite_noise", [](const Decomposition& d, const std::vector<Array>& eps) {
        return to_array(composite_noise(d, to_tensors(eps)));
    }, py::arg("decomposition"), py::arg("eps"));
    m.def("ddim_step", [](const Array& x, const Array& eps, const Schedule& s, std::size_t t, std::size_t t_prev) {
        return to_array(ddim_step(to_tensor(x), to_tensor(eps), s, t, t_prev));
    }, py::arg("x_t"), py::arg("eps"), py::arg("schedule"), py::arg("t"), py::arg("t_prev"));

    py::class_<OraclePredictor>(m, "OraclePredictor",
                                "Exact noise estimates for Gaussian-mixture conditions: {id: [(w, mean, var), ...]}.")
        .def(py::init([](const Schedule& s, const std::map<std::string, MixtureSpec>& mixtures,
                         std::optional<std::string> unconditional) {
                 return OraclePredictor(s, to_mixtures(mixtures), std::move(unconditional));
             }),
             py::arg("schedule"), py::arg("mixtures"), py::arg("unconditional") = py::none())
        .def("predict", [](OraclePredictor& p, const Array& x, std::size_t t, const std::vector<py::tuple>& conds) {
            const auto c = to_conditions(conds);
            return to_arrays(p.predict(to_tensor(x), t, c));
        }, py::arg("x_t"), py::arg("t"), py::arg("conditions"));

    // predictor: an OraclePredictor or a callable fn(x_t, t, conditions) -> [eps, ...].
    auto with_predictor = [](py::object predictor, auto&& run) {
        if (py::isinstance<OraclePredictor>(predictor)) return run(predictor.cast<OraclePredictor&>());
        CallablePredictor callable(predictor.cast<py::function>());
        return run(callable);
    };

    m.def("sample", [with_predictor](py::object predictor, const Decomposition& d, const std::vector<py::tuple>& conds,
                                     std::tuple<std::size_t, std::size_t, std::size_t> shape, std::size_t steps,
                                     std::uint64_t seed, const std::string& kind, std::optional<Schedule> schedule) {
        const auto s = schedule.value_or(Schedule::linear());
        const auto c = to_conditions(conds);
        const auto cfg = make_config(shape, steps, seed, kind);
        return with_predictor(predictor, [&](NoisePredictor& p) { return to_array(sample_factorized(p, d, c, cfg, s)); });
    }, py::arg("predictor"), py::arg("decomposition"), py::arg("conditions"), py::arg("shape"),
          py::arg("steps") = 100, py::arg("seed") = 0, py::arg("kind") = "ddim", py::arg("schedule") = py::none());

    m.def("sample_inverse", [with_predictor](py::object predictor, const Decomposition& d,
                                             const std::vector<py::tuple>& conds, const Array& ref,
                                             const std::string& fixed, std::size_t steps, std::uint64_t seed,
                                             const std::string& kind, std::optional<Schedule> schedule) {
        const auto s = schedule.value_or(Schedule::linear());
        const auto c = to_conditions(conds);
        const auto x_ref = to_tensor(ref);
        const auto index = d.index_of(fixed);
        if (!index) throw ArgumentError("no component labelled '" + fixed + "'");
        const auto cfg = make_config({x_ref.channels(), x_ref.height(), x_ref.width()}, steps, seed, kind);
        return with_predictor(predictor, [&](NoisePredictor& p) {
            return to_array(sample_inverse(p, d, c, x_ref, *index, cfg, s));
        });
    }, py::arg("predictor"), py::arg("decomposition"), py::arg("conditions"), py::arg("ref"), py::arg("fixed"),
          py::arg("steps") = 100, py::arg("seed") = 0, py::arg("kind") = "ddim", py::arg("schedule") = py::none());

    m.def("sweep_factors", &sweep_factors);
    m.def("blur_sweep", [](const Array& x, const std::string& prompt, py::function embed_image, py::function embed_text) {
        PyScorer scorer(std::move(embed_image), std::move(embed_text));
        const auto r = blur_sweep(to_tensor(x), prompt, scorer);
        return py::dict(py::arg("factors") = r.factors, py::arg("scores") = r.scores,
                        py::arg("max_score") = r.max_score, py::arg("argmax_factor") = r.argmax_factor);
    }, py::arg("x"), py::arg("prompt"), py::arg("embed_image"), py::arg("embed_text"));
}
