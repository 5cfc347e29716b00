#pragma once

#include <cstddef>
#include <deque>
#include <span>
#include <vector>

namespace emgrl::base {

enum class LossKind { absolute, squared };

double pointwise_loss(double forecast, double truth, LossKind kind);

/// Ring of the most recent `horizon` loss rows, one entry per base model.
class LossHistory {
public:
    LossHistory(std::size_t models, std::size_t horizon);

    /// Appends a row, evicting the oldest one beyond the horizon.
    void push(std::span<const double> row);

    std::size_t models() const noexcept { return models_; }
    std::size_t horizon() const noexcept { return horizon_; }
    std::size_t rows() const noexcept { return rows_.size(); }
    bool empty() const noexcept { return rows_.empty(); }

    /// Row `i` counted from the oldest retained row.
    const std::vector<double>& row(std::size_t i) const { return rows_.at(i); }
    const std::vector<double>& latest() const { return rows_.back(); }

    /// horizon x models block, oldest row first, zero rows padded in front
    /// while fewer than `horizon` rows exist. Row-major.
    std::vector<double> flatten_padded() const;

private:
    std::size_t models_;
    std::size_t horizon_;
    std::deque<std::vector<double>> rows_;
};

}  // namespace emgrl::base
