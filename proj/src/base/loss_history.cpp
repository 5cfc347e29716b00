#include "emgrl/base/loss_history.hpp"

#include <cmath>
#include <stdexcept>

#include "emgrl/error.hpp"

namespace emgrl::base {

double pointwise_loss(double forecast, double truth, LossKind kind) {
    const double e = forecast - truth;
    return kind == LossKind::absolute ? std::fabs(e) : e * e;
}

LossHistory::LossHistory(std::size_t models, std::size_t horizon) : models_(models), horizon_(horizon) {
    if (models == 0) throw std::invalid_argument("LossHistory: need at least one model");
    if (horizon == 0) throw std::invalid_argument("LossHistory: horizon must be positive");
}

void LossHistory::push(std::span<const double> row) {
    if (row.size() != models_) throw DimensionError("LossHistory::push", models_, row.size());
    for (double x : row)
        if (!(x >= 0.0) || !std::isfinite(x)) throw std::invalid_argument("LossHistory::push: losses must be finite and >= 0");
    rows_.emplace_back(row.begin(), row.end());
    while (rows_.size() > horizon_) rows_.pop_front();
}

std::vector<double> LossHistory::flatten_padded() const {
    std::vector<double> out(horizon_ * models_, 0.0);
    const std::size_t pad = horizon_ - rows_.size();
    for (std::size_t r = 0; r < rows_.size(); ++r)
        for (std::size_t m = 0; m < models_; ++m) out[(pad + r) * models_ + m] = rows_[r][m];
    return out;
}

}  // namespace emgrl::base
