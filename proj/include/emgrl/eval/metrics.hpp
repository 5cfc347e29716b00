#pragma once

#include <cstddef>
#include <span>
#include <string>

namespace emgrl::eval {

/// Mean absolute error. Throws on empty or mismatched inputs.
double mae(std::span<const double> truth, std::span<const double> pred);
/// Root mean squared error. Throws on empty or mismatched inputs.
double rmse(std::span<const double> truth, std::span<const double> pred);

enum class Metric { mae, rmse };
std::string to_string(Metric metric);

struct MetricResult {
    std::string model;
    std::string farm_id;
    double mae = 0.0;
    double rmse = 0.0;
    std::size_t n = 0;

    double value(Metric metric) const { return metric == Metric::mae ? mae : rmse; }
};

MetricResult score(std::string model, std::string farm_id, std::span<const double> truth,
                   std::span<const double> pred);

/// (baseline - ours) / baseline * 100. Throws when baseline is not positive.
double improvement_pct(double ours, double baseline);
/// Same, on one metric of two results for the same farm.
double improvement_pct(const MetricResult& ours, const MetricResult& baseline, Metric metric);

}  // namespace emgrl::eval
