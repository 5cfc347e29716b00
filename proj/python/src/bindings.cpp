#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "emgrl/cli/cli.hpp"
#include "emgrl/data/graph.hpp"
#include "emgrl/data/synthetic.hpp"
#include "emgrl/error.hpp"
#include "emgrl/eval/config.hpp"
#include "emgrl/eval/gradsuite.hpp"
#include "emgrl/eval/metrics.hpp"
#include "emgrl/eval/pipeline.hpp"
#include "emgrl/rl/agent.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace emgrl;

namespace {

eval::RunConfig parse_config(const std::string& text) {
    eval::RunConfig cfg = eval::run_config_from_json(nlohmann::json::parse(text.empty() ? "{}" : text));
    cfg.resolve();
    cfg.validate();
    return cfg;
}

std::string run_experiment_json(const std::string& config) {
    const eval::RunConfig cfg = parse_config(config);
    py::gil_scoped_release release;
    return eval::run_experiment(cfg).report.to_json().dump();
}

py::dict synthetic(const std::string& config) {
    const eval::RunConfig cfg = parse_config(config);
    const auto corpus = data::gen_synthetic(cfg.corpus.synthetic, cfg.corpus_seed());
    py::dict series;
    for (const auto& f : corpus.frames) series[py::str(f.farm_id)] = f.power;
    py::list farms;
    for (const auto& m : corpus.farms) farms.append(py::make_tuple(m.farm_id, m.latitude, m.longitude));
    std::vector<std::string> regimes;
    for (auto r : corpus.regimes) regimes.push_back(data::to_string(r));
    return py::dict("series"_a = series, "farms"_a = farms, "regimes"_a = regimes,
                    "timestamps"_a = corpus.frames.front().timestamps);
}

std::vector<std::vector<std::size_t>> knn_graph(const std::vector<std::tuple<std::string, double, double>>& farms,
                                                std::size_t k) {
    std::vector<data::FarmMeta> meta;
    for (const auto& [id, lat, lon] : farms) {
        data::FarmMeta m;
        m.farm_id = id;
        m.latitude = lat;
        m.longitude = lon;
        meta.push_back(m);
    }
    return data::build_graph(meta, k).neighbors;
}

py::list gradient_suite(std::size_t points, std::uint64_t seed) {
    py::list out;
    for (const auto& r : eval::run_gradient_suite(points, seed))
        out.append(py::dict("name"_a = r.name, "points"_a = r.points, "max_rel_error"_a = r.max_rel_error,
                            "passed"_a = r.passed));
    return out;
}

py::tuple run_cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return py::make_tuple(code, out.str(), err.str());
}

}  // namespace

PYBIND11_MODULE(_emgrl, m) {
    m.doc() = "Wind power forecasting with graph-embedded actor-critic ensembles";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

    m.def("mae", [](const std::vector<double>& t, const std::vector<double>& p) { return eval::mae(t, p); },
          "truth"_a, "prediction"_a);
    m.def("rmse", [](const std::vector<double>& t, const std::vector<double>& p) { return eval::rmse(t, p); },
          "truth"_a, "prediction"_a);
    m.def("improvement_pct", py::overload_cast<double, double>(&eval::improvement_pct), "ours"_a, "baseline"_a);
    m.def("ensemble_predict",
          [](const std::vector<double>& forecasts, const std::vector<double>& weights) {
              return rl::ensemble_predict(forecasts, weights);
          },
          "forecasts"_a, "weights"_a);
    m.def("haversine_km", &data::haversine_km, "lat1"_a, "lon1"_a, "lat2"_a, "lon2"_a);
    m.def("knn_graph", &knn_graph, "farms"_a, "k"_a);
    m.def("synthetic", &synthetic, "config"_a = "");
    m.def("resolve_config", [](const std::string& config) { return eval::to_json(parse_config(config)).dump(); },
          "config"_a = "");
    m.def("run_experiment", &run_experiment_json, "config"_a = "");
    m.def("gradient_suite", &gradient_suite, "points"_a = 100, "seed"_a = 0);
    m.def("run_cli", &run_cli, "args"_a);
}
