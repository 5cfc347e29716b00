#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace emgrl::data {

struct FarmMeta {
    std::string farm_id;
    double latitude = 0.0;   // degrees
    double longitude = 0.0;  // degrees
    std::optional<double> capacity;

    /// Throws std::invalid_argument when coordinates are out of range.
    void validate() const;
    bool operator==(const FarmMeta&) const = default;
};

/// Min-max scaler. Requires min < max.
struct Scaler {
    double min = 0.0;
    double max = 1.0;

    double forward(double x) const { return (x - min) / (max - min); }
    double inverse(double y) const { return y * (max - min) + min; }
    bool operator==(const Scaler&) const = default;
};

/// One farm's power series on an equispaced grid of epoch-second timestamps.
struct TimeSeriesFrame {
    std::string farm_id;
    std::vector<std::int64_t> timestamps;
    std::vector<double> power;
    std::optional<Scaler> scaler;  // set once the power values are normalized

    std::size_t size() const noexcept { return power.size(); }
    bool empty() const noexcept { return power.empty(); }
    /// Step between consecutive timestamps, 0 for frames shorter than 2.
    std::int64_t step() const;
    /// Checks equal lengths, strictly increasing and equispaced timestamps.
    void validate() const;

    bool operator==(const TimeSeriesFrame&) const = default;
};

struct WindowSample {
    std::string farm_id;
    std::vector<double> window;
    double target = 0.0;
    std::size_t t_index = 0;  // frame index of the window's last element
};

/// Fits a scaler on `frame` and returns the normalized frame with it.
std::pair<TimeSeriesFrame, Scaler> normalize_minmax(const TimeSeriesFrame& frame);
/// Applies an existing scaler (e.g. one fitted on a training split).
TimeSeriesFrame apply_scaler(const TimeSeriesFrame& frame, const Scaler& scaler);
/// Maps a normalized frame back to its original units.
TimeSeriesFrame inverse_transform(const TimeSeriesFrame& frame);

/// Train holds timestamps strictly before `boundary`, test the rest.
std::pair<TimeSeriesFrame, TimeSeriesFrame> split_by_date(const TimeSeriesFrame& frame, std::int64_t boundary);

/// Windows of length `window`; sample i targets power[i + window - 1 + horizon].
std::vector<WindowSample> sliding_windows(const TimeSeriesFrame& frame, std::size_t window, std::size_t horizon);

}  // namespace emgrl::data
