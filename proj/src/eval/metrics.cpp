#include "emgrl/eval/metrics.hpp"

#include <cmath>
#include <stdexcept>

#include "emgrl/error.hpp"

namespace emgrl::eval {

namespace {

void check(std::span<const double> truth, std::span<const double> pred, const char* name) {
    if (truth.size() != pred.size()) throw DimensionError(std::string(name) + ": truth vs prediction", truth.size(), pred.size());
    if (truth.empty()) throw std::invalid_argument(std::string(name) + ": empty input");
}

}  // namespace

double mae(std::span<const double> truth, std::span<const double> pred) {
    check(truth, pred, "mae");
    double acc = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) acc += std::abs(truth[i] - pred[i]);
    return acc / static_cast<double>(truth.size());
}

double rmse(std::span<const double> truth, std::span<const double> pred) {
    check(truth, pred, "rmse");
    double acc = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const double e = truth[i] - pred[i];
        acc += e * e;
    }
    return std::sqrt(acc / static_cast<double>(truth.size()));
}

std::string to_string(Metric metric) { return metric == Metric::mae ? "MAE" : "RMSE"; }

MetricResult score(std::string model, std::string farm_id, std::span<const double> truth,
                   std::span<const double> pred) {
    return MetricResult{std::move(model), std::move(farm_id), mae(truth, pred), rmse(truth, pred), truth.size()};
}

double improvement_pct(double ours, double baseline) {
    if (!(baseline > 0.0)) throw std::invalid_argument("improvement_pct: baseline must be positive");
    return (baseline - ours) / baseline * 100.0;
}

double improvement_pct(const MetricResult& ours, const MetricResult& baseline, Metric metric) {
    if (ours.farm_id != baseline.farm_id)
        throw std::invalid_argument("improvement_pct: farms differ (" + ours.farm_id + " vs " + baseline.farm_id + ")");
    return improvement_pct(ours.value(metric), baseline.value(metric));
}

}  // namespace emgrl::eval
