#include "emgrl/eval/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "emgrl/data/csv.hpp"

namespace emgrl::eval {

using nlohmann::json;

namespace {

const MetricResult& find(const std::vector<MetricResult>& rows, const std::string& model, const std::string& farm) {
    for (const auto& r : rows)
        if (r.model == model && r.farm_id == farm) return r;
    throw std::out_of_range("report has no row for model '" + model + "' farm '" + farm + "'");
}

std::string fixed(double x, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, x);
    return buf;
}

json improvement_json(const Improvement& i) {
    return {{"farm_id", i.farm_id},
            {"metric", to_string(i.metric)},
            {"baseline_model", i.baseline_model},
            {"baseline", i.baseline},
            {"ours", i.ours},
            {"percent", i.percent}};
}

json records(const std::vector<MetricResult>& rows) {
    json out = json::array();
    for (const auto& r : rows)
        for (Metric m : {Metric::mae, Metric::rmse})
            out.push_back({{"model", r.model}, {"farm_id", r.farm_id}, {"metric", to_string(m)}, {"value", r.value(m)}, {"n", r.n}});
    return out;
}

}  // namespace

const MetricResult& ForecastReport::at(const std::string& model, const std::string& farm) const {
    return find(results, model, farm);
}

const MetricResult& ForecastReport::at_seed(std::size_t seed_index, const std::string& model,
                                            const std::string& farm) const {
    return find(per_seed.at(seed_index).results, model, farm);
}

ForecastReport assemble_report(std::vector<SeedResults> per_seed, std::vector<std::string> models,
                               std::vector<std::string> farms, const std::vector<std::string>& base_models,
                               const std::string& ensemble, const std::string& uniform) {
    if (per_seed.empty()) throw std::invalid_argument("assemble_report: no seeds");
    ForecastReport rep;
    rep.models = std::move(models);
    rep.farms = std::move(farms);
    const double reps = static_cast<double>(per_seed.size());
    for (const auto& model : rep.models) {
        for (const auto& farm : rep.farms) {
            MetricResult mean{model, farm, 0.0, 0.0, 0};
            for (const auto& s : per_seed) {
                const auto& r = find(s.results, model, farm);
                mean.mae += r.mae;
                mean.rmse += r.rmse;
                mean.n = r.n;
            }
            mean.mae /= reps;
            mean.rmse /= reps;
            rep.results.push_back(mean);
        }
    }
    rep.per_seed = std::move(per_seed);
    for (const auto& farm : rep.farms) {
        for (Metric m : {Metric::mae, Metric::rmse}) {
            const MetricResult& ours = rep.at(ensemble, farm);
            const MetricResult* best = nullptr;
            for (const auto& b : base_models) {
                const MetricResult& r = rep.at(b, farm);
                if (!best || r.value(m) < best->value(m)) best = &r;
            }
            if (best && best->value(m) > 0.0)
                rep.vs_best_base.push_back(Improvement{farm, m, best->model, best->value(m), ours.value(m),
                                                       improvement_pct(ours.value(m), best->value(m))});
            const MetricResult& u = rep.at(uniform, farm);
            if (u.value(m) > 0.0)
                rep.vs_uniform.push_back(
                    Improvement{farm, m, uniform, u.value(m), ours.value(m), improvement_pct(ours.value(m), u.value(m))});
        }
    }
    return rep;
}

json ForecastReport::to_json() const {
    json seeds = json::array();
    for (const auto& s : per_seed) seeds.push_back({{"seed", s.seed}, {"records", records(s.results)}});
    json best = json::array(), uni = json::array();
    for (const auto& i : vs_best_base) best.push_back(improvement_json(i));
    for (const auto& i : vs_uniform) uni.push_back(improvement_json(i));
    return {{"format", "emgrl.report"},
            {"version", 1},
            {"config_fingerprint", fingerprint},
            {"seed", seed},
            {"scale", normalized ? "normalized" : "original"},
            {"models", models},
            {"farms", farms},
            {"records", records(results)},
            {"improvement_vs_best_base", best},
            {"improvement_vs_uniform", uni},
            {"per_seed", seeds}};
}

std::string ForecastReport::table(Metric metric) const {
    std::size_t label_w = 12;
    for (const auto& m : models) label_w = std::max(label_w, m.size());
    label_w = std::max<std::size_t>(label_w, 24);
    const std::size_t col_w = 10;
    std::ostringstream out;
    auto pad = [](std::string s, std::size_t w, bool right) {
        if (s.size() >= w) return s;
        return right ? std::string(w - s.size(), ' ') + s : s + std::string(w - s.size(), ' ');
    };
    out << to_string(metric) << " (" << (normalized ? "normalized" : "original") << " scale, mean of "
        << per_seed.size() << " seed" << (per_seed.size() == 1 ? "" : "s") << ")\n";
    out << pad("Model", label_w, false);
    for (const auto& f : farms) out << pad(f, col_w, true);
    out << '\n';
    for (const auto& m : models) {
        out << pad(m, label_w, false);
        for (const auto& f : farms) out << pad(fixed(at(m, f).value(metric)), col_w, true);
        out << '\n';
    }
    auto improvement_row = [&](const std::vector<Improvement>& rows, const std::string& label) {
        out << pad(label, label_w, false);
        for (const auto& f : farms) {
            std::string cell = "-";
            for (const auto& i : rows)
                if (i.farm_id == f && i.metric == metric) cell = fixed(i.percent, 2);
            out << pad(cell, col_w, true);
        }
        out << '\n';
    };
    improvement_row(vs_best_base, "Gain vs best base (%)");
    improvement_row(vs_uniform, "Gain vs uniform (%)");
    return out.str();
}

void ForecastReport::write_long_csv(std::ostream& out) const {
    out << "seed,model,farm_id,metric,value,n\n";
    auto emit = [&](const std::string& seed_label, const std::vector<MetricResult>& rows) {
        for (const auto& r : rows)
            for (Metric m : {Metric::mae, Metric::rmse})
                data::write_csv_row(out, {seed_label, r.model, r.farm_id, to_string(m), data::format_double(r.value(m)),
                                          std::to_string(r.n)});
    };
    emit("mean", results);
    for (const auto& s : per_seed) emit(std::to_string(s.seed), s.results);
}

void ForecastReport::write(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    {
        std::ofstream f(dir / "report.json");
        f << to_json().dump(2) << '\n';
    }
    {
        std::ofstream f(dir / "report.txt");
        f << "config " << fingerprint << " seed " << seed << "\n\n" << table(Metric::mae) << '\n' << table(Metric::rmse);
    }
    std::ofstream f(dir / "report_long.csv");
    write_long_csv(f);
    if (!f) throw std::runtime_error("cannot write report files under " + dir.string());
}

}  // namespace emgrl::eval
