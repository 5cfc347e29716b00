#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "emgrl/eval/metrics.hpp"

namespace emgrl::eval {

struct SeedResults {
    std::uint64_t seed = 0;
    std::vector<MetricResult> results;
};

struct Improvement {
    std::string farm_id;
    Metric metric = Metric::mae;
    std::string baseline_model;
    double baseline = 0.0;
    double ours = 0.0;
    double percent = 0.0;
};

struct ForecastReport {
    std::string fingerprint;
    std::uint64_t seed = 0;
    bool normalized = true;
    std::vector<std::string> models;  // row order
    std::vector<std::string> farms;   // column order
    std::vector<MetricResult> results;  // mean over seeds, models x farms
    std::vector<SeedResults> per_seed;
    /// Ensemble vs the best single base model and vs the uniform average.
    std::vector<Improvement> vs_best_base;
    std::vector<Improvement> vs_uniform;

    const MetricResult& at(const std::string& model, const std::string& farm) const;
    const MetricResult& at_seed(std::size_t seed_index, const std::string& model, const std::string& farm) const;

    /// One record per model x farm x metric, plus improvements and per-seed rows.
    nlohmann::json to_json() const;
    /// Models as rows, farms as columns, followed by improvement rows.
    std::string table(Metric metric) const;
    /// Long format: seed,model,farm_id,metric,value,n ("mean" seed for averages).
    void write_long_csv(std::ostream& out) const;

    /// report.json, report.txt and report_long.csv under `dir`.
    void write(const std::filesystem::path& dir) const;
};

/// Averages per-seed results and fills improvements. `base_models` names the
/// single-model rows eligible as "best base"; `ensemble` and `uniform` name
/// the compared rows.
ForecastReport assemble_report(std::vector<SeedResults> per_seed, std::vector<std::string> models,
                               std::vector<std::string> farms, const std::vector<std::string>& base_models,
                               const std::string& ensemble, const std::string& uniform);

}  // namespace emgrl::eval
