#include "emgrl/data/frame.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "emgrl/error.hpp"

namespace emgrl::data {

void FarmMeta::validate() const {
    if (farm_id.empty()) throw std::invalid_argument("FarmMeta: empty farm_id");
    if (!(latitude >= -90.0 && latitude <= 90.0))
        throw std::invalid_argument("FarmMeta '" + farm_id + "': latitude outside [-90, 90]");
    if (!(longitude >= -180.0 && longitude <= 180.0))
        throw std::invalid_argument("FarmMeta '" + farm_id + "': longitude outside [-180, 180]");
}

std::int64_t TimeSeriesFrame::step() const {
    return timestamps.size() < 2 ? 0 : timestamps[1] - timestamps[0];
}

void TimeSeriesFrame::validate() const {
    if (timestamps.size() != power.size())
        throw DimensionError("TimeSeriesFrame '" + farm_id + "': timestamps vs power", timestamps.size(),
                             power.size());
    const std::int64_t s = step();
    for (std::size_t i = 1; i < timestamps.size(); ++i) {
        if (timestamps[i] - timestamps[i - 1] != s || s <= 0)
            throw std::invalid_argument("TimeSeriesFrame '" + farm_id + "': timestamps not equispaced at index " +
                                        std::to_string(i));
    }
    if (scaler && !(scaler->min < scaler->max))
        throw std::invalid_argument("TimeSeriesFrame '" + farm_id + "': scaler requires min < max");
}

std::pair<TimeSeriesFrame, Scaler> normalize_minmax(const TimeSeriesFrame& frame) {
    if (frame.empty()) throw std::invalid_argument("normalize_minmax: empty frame '" + frame.farm_id + "'");
    const auto [lo, hi] = std::minmax_element(frame.power.begin(), frame.power.end());
    if (!(*lo < *hi))
        throw std::invalid_argument("normalize_minmax: constant series for '" + frame.farm_id +
                                    "' has no defined scaler");
    Scaler scaler{*lo, *hi};
    return {apply_scaler(frame, scaler), scaler};
}

TimeSeriesFrame apply_scaler(const TimeSeriesFrame& frame, const Scaler& scaler) {
    if (!(scaler.min < scaler.max)) throw std::invalid_argument("apply_scaler: scaler requires min < max");
    TimeSeriesFrame out = frame;
    for (double& x : out.power) x = scaler.forward(x);
    out.scaler = scaler;
    return out;
}

TimeSeriesFrame inverse_transform(const TimeSeriesFrame& frame) {
    if (!frame.scaler) throw std::invalid_argument("inverse_transform: frame '" + frame.farm_id + "' has no scaler");
    TimeSeriesFrame out = frame;
    for (double& x : out.power) x = frame.scaler->inverse(x);
    out.scaler.reset();
    return out;
}

std::pair<TimeSeriesFrame, TimeSeriesFrame> split_by_date(const TimeSeriesFrame& frame, std::int64_t boundary) {
    if (frame.empty()) throw std::invalid_argument("split_by_date: empty frame '" + frame.farm_id + "'");
    if (boundary < frame.timestamps.front() || boundary > frame.timestamps.back())
        throw std::out_of_range("split_by_date: boundary " + std::to_string(boundary) + " outside [" +
                                std::to_string(frame.timestamps.front()) + ", " +
                                std::to_string(frame.timestamps.back()) + "] for '" + frame.farm_id + "'");
    const auto cut = static_cast<std::size_t>(
        std::lower_bound(frame.timestamps.begin(), frame.timestamps.end(), boundary) - frame.timestamps.begin());
    TimeSeriesFrame train, test;
    train.farm_id = test.farm_id = frame.farm_id;
    train.scaler = test.scaler = frame.scaler;
    train.timestamps.assign(frame.timestamps.begin(), frame.timestamps.begin() + static_cast<std::ptrdiff_t>(cut));
    train.power.assign(frame.power.begin(), frame.power.begin() + static_cast<std::ptrdiff_t>(cut));
    test.timestamps.assign(frame.timestamps.begin() + static_cast<std::ptrdiff_t>(cut), frame.timestamps.end());
    test.power.assign(frame.power.begin() + static_cast<std::ptrdiff_t>(cut), frame.power.end());
    return {std::move(train), std::move(test)};
}

std::vector<WindowSample> sliding_windows(const TimeSeriesFrame& frame, std::size_t window, std::size_t horizon) {
    if (window == 0) throw std::invalid_argument("sliding_windows: window must be positive");
    if (horizon == 0) throw std::invalid_argument("sliding_windows: horizon must be positive");
    if (frame.size() < window + horizon) throw LengthError("sliding_windows '" + frame.farm_id + "'", window + horizon, frame.size());
    const std::size_t count = frame.size() - window - horizon + 1;
    std::vector<WindowSample> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        WindowSample s;
        s.farm_id = frame.farm_id;
        s.window.assign(frame.power.begin() + static_cast<std::ptrdiff_t>(i),
                        frame.power.begin() + static_cast<std::ptrdiff_t>(i + window));
        s.t_index = i + window - 1;
        s.target = frame.power[s.t_index + horizon];
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace emgrl::data
