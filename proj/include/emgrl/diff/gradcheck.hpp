#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "emgrl/diff/params.hpp"
#include "emgrl/diff/tape.hpp"

namespace emgrl::diff {

/// Builds a scalar loss on `tape` from an input leaf and bound parameters.
using LossBuilder = std::function<Var(Tape& tape, Var input, const ParamSet& params)>;

struct GradCheckResult {
    std::string name;
    std::size_t points = 0;
    double max_rel_error = 0.0;
    bool passed = false;
};

/// Central-difference check of d(loss)/d(input) and d(loss)/d(params) at one
/// point. Error is ||g_ad - g_fd|| / max(||g_ad|| + ||g_fd||, 1e-12).
double gradient_rel_error(const LossBuilder& build, const Vec& input, const ParamSet& params,
                          double eps = 1e-5);

struct GradCheckCase {
    std::string name;
    std::size_t input_dim = 0;
    /// Fresh parameters for one random point.
    std::function<ParamSet(Rng&)> make_params;
    LossBuilder build;
    /// Inputs are drawn uniform in [-input_scale, input_scale].
    double input_scale = 1.0;
};

GradCheckResult run_gradcheck(const GradCheckCase& c, std::size_t points, std::uint64_t seed,
                              double tolerance = 1e-4, double eps = 1e-5);

}  // namespace emgrl::diff
