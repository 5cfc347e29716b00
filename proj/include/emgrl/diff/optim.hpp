#pragma once

#include <map>
#include <string>

#include "emgrl/diff/params.hpp"

namespace emgrl::diff {

enum class OptimizerKind { sgd, adam };
enum class Direction { descent, ascent };

struct OptimConfig {
    double learning_rate = 1e-3;
    OptimizerKind kind = OptimizerKind::adam;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    /// Throws ConfigError on a non-positive learning rate or out-of-range moments.
    void validate() const;
};

/// Stateful optimizer; owns the moment estimates for the blocks it has seen.
class Optimizer {
public:
    explicit Optimizer(OptimConfig cfg);

    /// Updates `params` in place. `grads` must carry every block of `params`.
    void step(ParamSet& params, const ParamSet& grads, Direction direction);

    const OptimConfig& config() const noexcept { return cfg_; }
    long steps() const noexcept { return t_; }

private:
    OptimConfig cfg_;
    long t_ = 0;
    std::map<std::string, Vec> m_;
    std::map<std::string, Vec> v_;
};

/// One stateless update. With an adam config this is the first Adam step from
/// zero moments.
ParamSet optimizer_step(const ParamSet& params, const ParamSet& grads, const OptimConfig& cfg,
                        Direction direction = Direction::descent);

}  // namespace emgrl::diff
