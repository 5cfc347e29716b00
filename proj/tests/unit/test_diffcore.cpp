#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>

#include <Eigen/Dense>

#include "emgrl/diff/gradcheck.hpp"
#include "emgrl/diff/optim.hpp"
#include "emgrl/diff/serialize.hpp"
#include "emgrl/diff/tape.hpp"
#include "emgrl/error.hpp"

using namespace emgrl;
using namespace emgrl::diff;

namespace {

ParamSet dense_layer(const std::vector<std::vector<double>>& w, const std::vector<double>& b) {
    ParamSet p;
    Block& wb = p.add("l.w", w.size(), w.front().size());
    for (std::size_t r = 0; r < w.size(); ++r)
        for (std::size_t c = 0; c < w[r].size(); ++c) wb(r, c) = w[r][c];
    Block& bb = p.add("l.b", b.size(), 1);
    for (std::size_t r = 0; r < b.size(); ++r) bb(r, 0) = b[r];
    return p;
}

}  // namespace

TEST_CASE("linear layer on hand-forced inputs") {
    Tape tape;
    const ParamSet id = dense_layer({{1, 0}, {0, 1}}, {0, 0});
    CHECK(linear(tape.constant({1, 2}), id, "l").value() == Vec{1, 2});
    const ParamSet p = dense_layer({{1, 1}, {0, 0}}, {0, 1});
    CHECK(linear(tape.constant({1, 1}), p, "l").value() == Vec{2, 1});
}

TEST_CASE("random 4->3 linear layer matches a dense matrix product") {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        ParamSet p;
        p.add_linear("l", 4, 3, rng);
        Vec x(4);
        for (double& v : x) v = rng.uniform(-2, 2);
        Eigen::MatrixXd w(3, 4);
        Eigen::VectorXd b(3), xv(4);
        for (int r = 0; r < 3; ++r) {
            b(r) = p.at("l.b")(r, 0);
            for (int c = 0; c < 4; ++c) w(r, c) = p.at("l.w")(r, c);
        }
        for (int c = 0; c < 4; ++c) xv(c) = x[c];
        const Eigen::VectorXd expected = w * xv + b;
        Tape tape;
        const Vec y = linear(tape.constant(x), p, "l").value();
        for (int r = 0; r < 3; ++r) CHECK(y[r] == doctest::Approx(expected(r)).epsilon(1e-12));
    }
}

TEST_CASE("linear rejects a dimension mismatch naming both sizes") {
    Tape tape;
    const ParamSet id = dense_layer({{1, 0}, {0, 1}}, {0, 0});
    try {
        linear(tape.constant({1, 2, 3}), id, "l");
        FAIL("expected DimensionError");
    } catch (const DimensionError& e) {
        CHECK(e.expected() == 2);
        CHECK(e.actual() == 3);
    }
}

TEST_CASE("dilated convolution") {
    CHECK(conv1d_dilated(Vec{1, 1, 1, 1}, Vec{1}, 1) == Vec{1, 1, 1, 1});
    CHECK(conv1d_dilated(Vec{1, 2, 3, 4, 5}, Vec{1, 1}, 2) == Vec{4, 6, 8});

    SUBCASE("direct sliding-window oracle") {
        Rng rng(3);
        Vec signal(20), kernel(3);
        for (double& v : signal) v = rng.uniform(-1, 1);
        for (double& v : kernel) v = rng.uniform(-1, 1);
        const Vec y = conv1d_dilated(signal, kernel, 3);
        REQUIRE(y.size() == 20 - 2 * 3);
        for (std::size_t t = 0; t < y.size(); ++t) {
            double expected = 0.0;
            for (std::size_t j = 0; j < 3; ++j) expected += kernel[j] * signal[t + 3 * j];
            CHECK(y[t] == doctest::Approx(expected).epsilon(1e-14));
        }
    }

    SUBCASE("too short a signal reports the required length") {
        try {
            conv1d_dilated(Vec{1, 2, 3}, Vec{1, 1}, 4);
            FAIL("expected LengthError");
        } catch (const LengthError& e) {
            CHECK(e.required() == 5);
            CHECK(e.actual() == 3);
        }
    }

    const std::vector<std::size_t> dilations{1, 2, 4};
    CHECK(receptive_field(2, dilations) == 8);
    CHECK(receptive_field(3, dilations) == 15);
}

TEST_CASE("softmax") {
    CHECK(softmax(Vec{0, 0, 0, 0}) == Vec{0.25, 0.25, 0.25, 0.25});
    for (double c : {-50.0, 0.0, 3.5, 700.0}) {
        const Vec s = softmax(Vec{c, c});
        CHECK(s[0] == 0.5);
        CHECK(s[1] == 0.5);
    }
    const Vec big = softmax(Vec{1000, 0});
    CHECK(std::isfinite(big[0]));
    CHECK(std::isfinite(big[1]));
    CHECK(big[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(big[1] == doctest::Approx(std::exp(-1000.0)).epsilon(1e-6));
    CHECK_THROWS_AS(softmax(Vec{}), std::invalid_argument);
}

TEST_CASE("reverse pass") {
    SUBCASE("x^2 at 3 has gradient 6") {
        Tape tape;
        Var x = tape.constant({3.0});
        const Adjoints adj = tape.backward(sum(square(x)));
        CHECK(adj.wrt(x) == Vec{6.0});
    }
    SUBCASE("cross-entropy at uniform logits and uniform target is stationary") {
        Tape tape;
        Var logits = tape.constant({0.7, 0.7, 0.7});
        Var target = tape.constant({1.0 / 3, 1.0 / 3, 1.0 / 3});
        Var loss = affine(dot(target, log_softmax(logits)), -1.0);
        for (double g : tape.backward(loss).wrt(logits)) CHECK(std::abs(g) < 1e-15);
    }
    SUBCASE("non-scalar loss is rejected") {
        Tape tape;
        Var x = tape.constant({1.0, 2.0});
        CHECK_THROWS(tape.backward(x));
    }
    SUBCASE("backward leaves the tape reusable") {
        Tape tape;
        Var x = tape.constant({2.0});
        Var loss = sum(mul(x, x));
        const std::size_t nodes = tape.size();
        CHECK(tape.backward(loss).wrt(x) == Vec{4.0});
        CHECK(tape.backward(loss).wrt(x) == Vec{4.0});
        CHECK(tape.size() == nodes);
    }
    SUBCASE("parameter gradients are keyed like the set") {
        ParamSet p = dense_layer({{1, 2}}, {0.5});
        Tape tape;
        Var y = linear(tape.constant({3, 4}), p, "l");
        const ParamSet g = tape.backward(sum(y)).params(p);
        CHECK(g.at("l.w").vec() == Vec{3, 4});
        CHECK(g.at("l.b").vec() == Vec{1});
    }
}

TEST_CASE("optimizer steps") {
    ParamSet p;
    p.add("x", 1, 1)(0, 0) = 1.0;
    ParamSet g = p.zeros_like();

    OptimConfig sgd{0.1, OptimizerKind::sgd};
    CHECK(optimizer_step(p, g, sgd) == p);
    OptimConfig adam{0.1, OptimizerKind::adam};
    CHECK(optimizer_step(p, g, adam) == p);

    g.at("x")(0, 0) = 2.0;
    CHECK(optimizer_step(p, g, sgd).at("x")(0, 0) == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(optimizer_step(p, g, sgd, Direction::ascent).at("x")(0, 0) == doctest::Approx(1.2).epsilon(1e-15));
    // First Adam step from zero moments moves by lr * g / (|g| + eps).
    CHECK(optimizer_step(p, g, adam).at("x")(0, 0) == doctest::Approx(1.0 - 0.1 * 2.0 / (2.0 + 1e-8)).epsilon(1e-15));

    ParamSet missing;
    CHECK_THROWS_AS(optimizer_step(p, missing, sgd), std::invalid_argument);
    CHECK_THROWS_AS(OptimConfig{-1.0}.validate(), ConfigError);
}

TEST_CASE("parameter serialization round-trips bit-exactly") {
    ParamSet p;
    Block& b = p.add("a.w", 2, 3);
    const double specials[] = {0.1, -0.0, std::numeric_limits<double>::denorm_min(), 1e308, -1.0 / 3.0, 12345.678};
    for (std::size_t i = 0; i < 6; ++i) b.values()[i] = specials[i];
    Rng rng(5);
    p.add_linear("layer", 5, 4, rng);

    const ParamSet back = params_from_json(to_json(p));
    CHECK(back == p);
    CHECK(std::signbit(back.at("a.w")(0, 1)));

    const auto path = std::filesystem::temp_directory_path() / "emgrl_params_roundtrip.json";
    save_params(p, path);
    CHECK(load_params(path) == p);
    std::filesystem::remove(path);

    for (double x : specials) CHECK(decode_double(encode_double(x)) == x);
    nlohmann::json bad = to_json(p);
    bad["version"] = 99;
    CHECK_THROWS(params_from_json(bad));
}

TEST_CASE("finite-difference check agrees on a small composite") {
    GradCheckCase c;
    c.name = "tanh_linear";
    c.input_dim = 3;
    c.make_params = [](Rng& rng) {
        ParamSet p;
        p.add_linear("l", 3, 2, rng);
        return p;
    };
    c.build = [](Tape&, Var x, const ParamSet& p) { return sum(tanh(linear(x, p, "l"))); };
    const GradCheckResult r = run_gradcheck(c, 25, 1);
    CHECK(r.passed);
    CHECK(r.points == 25);
    CHECK(r.max_rel_error < 1e-7);
}
