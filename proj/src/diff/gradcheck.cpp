#include "emgrl/diff/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace emgrl::diff {

namespace {

double eval_loss(const LossBuilder& build, const Vec& input, const ParamSet& params) {
    Tape tape;
    Var x = tape.constant(input);
    return build(tape, x, params).scalar();
}

}  // namespace

double gradient_rel_error(const LossBuilder& build, const Vec& input, const ParamSet& params, double eps) {
    Vec analytic, numeric;

    Tape tape;
    Var x = tape.constant(input);
    Var loss = build(tape, x, params);
    Adjoints adj = tape.backward(loss);
    Vec gx = adj.wrt(x);
    analytic.insert(analytic.end(), gx.begin(), gx.end());
    ParamSet gp = adj.params(params);
    for (const auto& [_, b] : gp) analytic.insert(analytic.end(), b.values().begin(), b.values().end());

    Vec probe = input;
    for (std::size_t i = 0; i < probe.size(); ++i) {
        const double orig = probe[i];
        probe[i] = orig + eps;
        const double up = eval_loss(build, probe, params);
        probe[i] = orig - eps;
        const double down = eval_loss(build, probe, params);
        probe[i] = orig;
        numeric.push_back((up - down) / (2.0 * eps));
    }
    ParamSet shifted = params;
    for (auto& [name, b] : shifted) {
        auto v = b.values();
        for (std::size_t i = 0; i < v.size(); ++i) {
            const double orig = v[i];
            v[i] = orig + eps;
            const double up = eval_loss(build, input, shifted);
            v[i] = orig - eps;
            const double down = eval_loss(build, input, shifted);
            v[i] = orig;
            numeric.push_back((up - down) / (2.0 * eps));
        }
    }

    double diff = 0.0, na = 0.0, nn = 0.0;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        diff += (analytic[i] - numeric[i]) * (analytic[i] - numeric[i]);
        na += analytic[i] * analytic[i];
        nn += numeric[i] * numeric[i];
    }
    return std::sqrt(diff) / std::max(std::sqrt(na) + std::sqrt(nn), 1e-12);
}

GradCheckResult run_gradcheck(const GradCheckCase& c, std::size_t points, std::uint64_t seed, double tolerance,
                              double eps) {
    GradCheckResult r;
    r.name = c.name;
    Rng rng(seed);
    for (std::size_t p = 0; p < points; ++p) {
        ParamSet params = c.make_params ? c.make_params(rng) : ParamSet{};
        Vec input(c.input_dim);
        for (double& x : input) x = rng.uniform(-c.input_scale, c.input_scale);
        r.max_rel_error = std::max(r.max_rel_error, gradient_rel_error(c.build, input, params, eps));
        ++r.points;
    }
    r.passed = r.max_rel_error < tolerance;
    return r;
}

}  // namespace emgrl::diff
