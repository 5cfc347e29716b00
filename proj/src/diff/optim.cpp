#include "emgrl/diff/optim.hpp"

#include <cmath>
#include <stdexcept>

#include "emgrl/error.hpp"

namespace emgrl::diff {

void OptimConfig::validate() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
        throw ConfigError("learning_rate", "must be positive and finite");
    if (kind == OptimizerKind::adam) {
        if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ConfigError("beta1", "must lie in [0, 1)");
        if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("beta2", "must lie in [0, 1)");
        if (!(epsilon > 0.0)) throw ConfigError("epsilon", "must be positive");
    }
}

Optimizer::Optimizer(OptimConfig cfg) : cfg_(cfg) { cfg_.validate(); }

void Optimizer::step(ParamSet& params, const ParamSet& grads, Direction direction) {
    for (const auto& [name, block] : params) {
        if (!grads.contains(name)) throw std::invalid_argument("optimizer: missing gradient block '" + name + "'");
        if (grads.at(name).size() != block.size())
            throw DimensionError("optimizer: gradient block '" + name + "'", block.size(), grads.at(name).size());
    }
    const double sign = direction == Direction::descent ? -1.0 : 1.0;
    ++t_;
    if (cfg_.kind == OptimizerKind::sgd) {
        for (auto& [name, block] : params) {
            auto g = grads.at(name).values();
            auto p = block.values();
            for (std::size_t i = 0; i < p.size(); ++i) p[i] += sign * cfg_.learning_rate * g[i];
        }
        return;
    }
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (auto& [name, block] : params) {
        auto g = grads.at(name).values();
        auto p = block.values();
        Vec& m = m_[name];
        Vec& v = v_[name];
        if (m.empty()) {
            m.assign(p.size(), 0.0);
            v.assign(p.size(), 0.0);
        }
        for (std::size_t i = 0; i < p.size(); ++i) {
            m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
            v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            p[i] += sign * cfg_.learning_rate * mhat / (std::sqrt(vhat) + cfg_.epsilon);
        }
    }
}

ParamSet optimizer_step(const ParamSet& params, const ParamSet& grads, const OptimConfig& cfg,
                        Direction direction) {
    ParamSet out = params;
    Optimizer opt(cfg);
    opt.step(out, grads, direction);
    return out;
}

}  // namespace emgrl::diff
