#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "emgrl/data/frame.hpp"

namespace emgrl::data {

enum class RegimeKind { ar1, trend, threshold };

std::string to_string(RegimeKind kind);
RegimeKind regime_from_string(const std::string& name);

struct RegimeSegment {
    RegimeKind kind = RegimeKind::ar1;
    std::size_t length = 250;
};

struct SyntheticConfig {
    std::size_t farms = 4;
    std::size_t length = 5000;
    std::int64_t step_seconds = 600;
    std::int64_t start_epoch = 1262304000;  // 2010-01-01T00:00:00Z
    /// Cycled until `length` steps are covered.
    std::vector<RegimeSegment> schedule = {{RegimeKind::ar1, 250}, {RegimeKind::trend, 250}};

    // ar1: x_t = mean + coefficient * (x_{t-1} - mean) + noise
    double ar_coefficient = -0.6;
    double ar_mean = 0.5;
    double ar_noise = 0.05;
    // trend: ramps of +-slope that reverse at the [low, high] band edges
    double trend_slope = 0.01;
    double trend_low = 0.15;
    double trend_high = 0.85;
    double trend_noise = 0.003;
    // threshold: x_t = x_{t-1} - drop if x_{t-1} > level, else + rise
    double threshold_level = 0.5;
    double threshold_drop = 0.12;
    double threshold_rise = 0.05;
    double threshold_noise = 0.01;

    /// Innovation correlation exp(-d / length) over great-circle distance d;
    /// 0 gives independent farms.
    double correlation_length_km = 40.0;
    double center_latitude = 40.5;
    double center_longitude = -70.5;
    double spread_km = 30.0;

    void validate() const;
};

struct SyntheticCorpus {
    std::vector<TimeSeriesFrame> frames;
    std::vector<FarmMeta> farms;
    /// Regime active at each time index (shared by all farms).
    std::vector<RegimeKind> regimes;
};

/// Deterministic in (config, seed). Each farm's series is min-max normalized
/// to [0, 1] over its full length.
SyntheticCorpus gen_synthetic(const SyntheticConfig& config, std::uint64_t seed);

}  // namespace emgrl::data
