#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "emgrl/diff/gradcheck.hpp"

namespace emgrl::eval {

/// Finite-difference cases for every differentiable building block: linear,
/// dilated conv, softmax, conv encoder, GNN layer, loss-encoder MLP, GRU cell,
/// actor, critic and the actor objective through the critic.
std::vector<diff::GradCheckCase> gradient_suite();

std::vector<diff::GradCheckResult> run_gradient_suite(std::size_t points = 100, std::uint64_t seed = 0,
                                                      double tolerance = 1e-4, double eps = 1e-5);

}  // namespace emgrl::eval
