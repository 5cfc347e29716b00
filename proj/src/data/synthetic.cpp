#include "emgrl/data/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "emgrl/data/graph.hpp"
#include "emgrl/error.hpp"
#include "emgrl/rng.hpp"

namespace emgrl::data {

std::string to_string(RegimeKind kind) {
    switch (kind) {
        case RegimeKind::ar1: return "ar1";
        case RegimeKind::trend: return "trend";
        case RegimeKind::threshold: return "threshold";
    }
    return "?";
}

RegimeKind regime_from_string(const std::string& name) {
    if (name == "ar1") return RegimeKind::ar1;
    if (name == "trend") return RegimeKind::trend;
    if (name == "threshold") return RegimeKind::threshold;
    throw std::invalid_argument("unknown regime kind '" + name + "'");
}

void SyntheticConfig::validate() const {
    if (farms == 0) throw ConfigError("synthetic.farms", "must be positive");
    if (length == 0) throw ConfigError("synthetic.length", "must be positive");
    if (step_seconds <= 0) throw ConfigError("synthetic.step_seconds", "must be positive");
    if (schedule.empty()) throw ConfigError("synthetic.schedule", "must not be empty");
    for (const auto& seg : schedule)
        if (seg.length == 0) throw ConfigError("synthetic.schedule", "segment lengths must be positive");
    if (!(std::fabs(ar_coefficient) < 1.0)) throw ConfigError("synthetic.ar_coefficient", "must satisfy |phi| < 1");
    if (!(trend_low < trend_high)) throw ConfigError("synthetic.trend_low", "must be below trend_high");
    if (ar_noise < 0 || trend_noise < 0 || threshold_noise < 0)
        throw ConfigError("synthetic.noise", "noise scales must be non-negative");
    if (correlation_length_km < 0) throw ConfigError("synthetic.correlation_length_km", "must be non-negative");
    if (spread_km < 0) throw ConfigError("synthetic.spread_km", "must be non-negative");
}

SyntheticCorpus gen_synthetic(const SyntheticConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    Rng layout_rng(derive_seed(seed, "synthetic.layout"));
    Rng noise_rng(derive_seed(seed, "synthetic.noise"));

    SyntheticCorpus corpus;
    constexpr double kKmPerDegree = 111.32;
    const double lon_scale = std::cos(cfg.center_latitude * std::numbers::pi / 180.0);
    for (std::size_t f = 0; f < cfg.farms; ++f) {
        FarmMeta m;
        char id[16];
        std::snprintf(id, sizeof(id), "farm%02zu", f);
        m.farm_id = id;
        const double dx = layout_rng.uniform(-cfg.spread_km, cfg.spread_km);
        const double dy = layout_rng.uniform(-cfg.spread_km, cfg.spread_km);
        m.latitude = std::clamp(cfg.center_latitude + dy / kKmPerDegree, -90.0, 90.0);
        m.longitude = std::clamp(cfg.center_longitude + dx / (kKmPerDegree * std::max(lon_scale, 1e-6)), -180.0, 180.0);
        corpus.farms.push_back(std::move(m));
    }

    const std::size_t n = cfg.farms;
    Eigen::MatrixXd chol = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    if (cfg.correlation_length_km > 0 && n > 1) {
        Eigen::MatrixXd corr(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                const double d = haversine_km(corpus.farms[i].latitude, corpus.farms[i].longitude,
                                              corpus.farms[j].latitude, corpus.farms[j].longitude);
                corr(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                    std::exp(-d / cfg.correlation_length_km);
            }
        Eigen::LLT<Eigen::MatrixXd> llt(corr);
        if (llt.info() != Eigen::Success) throw std::runtime_error("gen_synthetic: correlation matrix not positive definite");
        chol = llt.matrixL();
    }

    corpus.regimes.reserve(cfg.length);
    {
        std::size_t seg = 0, used = 0;
        for (std::size_t t = 0; t < cfg.length; ++t) {
            if (used == cfg.schedule[seg].length) {
                seg = (seg + 1) % cfg.schedule.size();
                used = 0;
            }
            corpus.regimes.push_back(cfg.schedule[seg].kind);
            ++used;
        }
    }

    std::vector<std::vector<double>> latent(n, std::vector<double>(cfg.length));
    std::vector<double> slope(n);
    for (std::size_t f = 0; f < n; ++f) {
        latent[f][0] = layout_rng.uniform(cfg.trend_low, cfg.trend_high);
        slope[f] = layout_rng.uniform(0.0, 1.0) < 0.5 ? -cfg.trend_slope : cfg.trend_slope;
    }
    Eigen::VectorXd z(static_cast<Eigen::Index>(n));
    for (std::size_t t = 1; t < cfg.length; ++t) {
        for (std::size_t f = 0; f < n; ++f) z(static_cast<Eigen::Index>(f)) = noise_rng.normal();
        const Eigen::VectorXd eps = chol * z;
        for (std::size_t f = 0; f < n; ++f) {
            const double prev = latent[f][t - 1];
            const double e = eps(static_cast<Eigen::Index>(f));
            double next = prev;
            switch (corpus.regimes[t]) {
                case RegimeKind::ar1:
                    next = cfg.ar_mean + cfg.ar_coefficient * (prev - cfg.ar_mean) + cfg.ar_noise * e;
                    break;
                case RegimeKind::trend:
                    if (prev >= cfg.trend_high) slope[f] = -cfg.trend_slope;
                    if (prev <= cfg.trend_low) slope[f] = cfg.trend_slope;
                    next = prev + slope[f] + cfg.trend_noise * e;
                    break;
                case RegimeKind::threshold:
                    next = prev + (prev > cfg.threshold_level ? -cfg.threshold_drop : cfg.threshold_rise) +
                           cfg.threshold_noise * e;
                    break;
            }
            latent[f][t] = next;
        }
    }

    for (std::size_t f = 0; f < n; ++f) {
        TimeSeriesFrame frame;
        frame.farm_id = corpus.farms[f].farm_id;
        frame.timestamps.resize(cfg.length);
        for (std::size_t t = 0; t < cfg.length; ++t)
            frame.timestamps[t] = cfg.start_epoch + static_cast<std::int64_t>(t) * cfg.step_seconds;
        frame.power = std::move(latent[f]);
        if (cfg.length >= 2) {
            const auto [lo, hi] = std::minmax_element(frame.power.begin(), frame.power.end());
            if (*lo < *hi) frame = normalize_minmax(frame).first;
            frame.scaler.reset();  // the normalized values are the corpus
        }
        corpus.frames.push_back(std::move(frame));
    }
    return corpus;
}

}  // namespace emgrl::data
