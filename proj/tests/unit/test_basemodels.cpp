#include <doctest.h>

#include <cmath>
#include <map>
#include <string>

#include "emgrl/base/loss_history.hpp"
#include "emgrl/base/models.hpp"
#include "emgrl/data/synthetic.hpp"
#include "emgrl/error.hpp"

using namespace emgrl;
using namespace emgrl::base;

namespace {

data::WindowSample sample(std::vector<double> window, double target = 0.0, std::size_t t = 0) {
    return data::WindowSample{"A", std::move(window), target, t};
}

FittedBase ar_model(double intercept, std::vector<double> coefficients, std::size_t window) {
    FittedBase m;
    m.spec.kind = ModelKind::autoregressive;
    m.spec.order = coefficients.size();
    m.window = window;
    m.params = ArModel{intercept, std::move(coefficients)};
    return m;
}

struct SmallCorpus {
    data::WindFarmGraph graph;
    std::vector<data::WindowSample> train;
    std::map<std::size_t, std::vector<diff::Vec>> by_time;  // windows of all nodes per t_index
};

SmallCorpus small_corpus() {
    data::SyntheticConfig cfg;
    cfg.farms = 3;
    cfg.length = 200;
    const auto corpus = data::gen_synthetic(cfg, 2);
    SmallCorpus c;
    c.graph = data::build_graph(corpus.farms, 2);
    for (const auto& node : c.graph.nodes) {
        for (const auto& f : corpus.frames) {
            if (f.farm_id != node.farm_id) continue;
            for (auto& s : data::sliding_windows(f, 8, 1)) {
                c.by_time[s.t_index].push_back(s.window);
                c.train.push_back(std::move(s));
            }
        }
    }
    return c;
}

double predict_with_context(const FittedBase& m, const data::WindowSample& s, const SmallCorpus& c) {
    base::GraphContext ctx{&c.graph, c.by_time.at(s.t_index)};
    return predict_base(m, s, &ctx);
}

}  // namespace

TEST_CASE("persistence returns the window's final value") {
    BaseModelSpec spec;
    const FittedBase m = fit_base(spec, {sample({0.1, 0.42}, 0.5)});
    CHECK(predict_base(m, sample({0.3, 0.42})) == 0.42);
    CHECK(m.spec.label() == "Persistence");
    CHECK_THROWS_AS(predict_base(m, sample({0.42})), DimensionError);
}

TEST_CASE("autoregressive model") {
    SUBCASE("closed-form prediction") {
        const FittedBase m = ar_model(0.0, {0.5}, 3);
        CHECK(predict_base(m, sample({0.1, 0.2, 0.8})) == doctest::Approx(0.4).epsilon(1e-15));
    }
    SUBCASE("AR(1) recovers the coefficient of a noiseless decay") {
        data::TimeSeriesFrame f;
        f.farm_id = "A";
        double x = 1.0;
        for (int t = 0; t < 40; ++t) {
            f.timestamps.push_back(t * 600);
            f.power.push_back(x);
            x *= 0.5;
        }
        BaseModelSpec spec;
        spec.kind = ModelKind::autoregressive;
        spec.order = 1;
        const FittedBase m = fit_base(spec, data::sliding_windows(f, 3, 1));
        const auto& ar = std::get<ArModel>(m.params);
        REQUIRE(ar.coefficients.size() == 1);
        CHECK(std::abs(ar.coefficients[0] - 0.5) < 1e-8);
        CHECK(std::abs(ar.intercept) < 1e-8);
        CHECK(m.spec.label() == "AR(1)");
    }
    SUBCASE("singular system suggests a smaller order") {
        BaseModelSpec spec;
        spec.kind = ModelKind::autoregressive;
        spec.order = 1;
        std::vector<data::WindowSample> flat;
        for (int i = 0; i < 10; ++i) flat.push_back(sample({0.3, 0.3}, 0.3));
        try {
            fit_base(spec, flat);
            FAIL("expected a singular-system error");
        } catch (const std::runtime_error& e) {
            CHECK(std::string(e.what()).find("smaller order") != std::string::npos);
        }
    }
    SUBCASE("empty training set is rejected") {
        BaseModelSpec spec;
        spec.kind = ModelKind::autoregressive;
        CHECK_THROWS_AS(fit_base(spec, {}), std::invalid_argument);
    }
}

TEST_CASE("boosted stumps") {
    SUBCASE("one round on a constant target predicts the mean") {
        BaseModelSpec spec;
        spec.kind = ModelKind::boosted_stumps;
        spec.rounds = 1;
        std::vector<data::WindowSample> train;
        for (int i = 0; i < 12; ++i) train.push_back(sample({0.1 * i, 0.05 * i}, 0.7));
        const FittedBase m = fit_base(spec, train);
        const auto& e = std::get<StumpEnsemble>(m.params);
        CHECK(e.stumps.size() == 1);
        for (const auto& s : train) CHECK(predict_base(m, s) == doctest::Approx(0.7).epsilon(1e-15));
    }
    SUBCASE("a step function is learned and the training loss never rises") {
        BaseModelSpec spec;
        spec.kind = ModelKind::boosted_stumps;
        spec.rounds = 40;
        spec.shrinkage = 0.5;
        std::vector<data::WindowSample> train;
        for (int i = 0; i < 40; ++i) {
            const double x = i / 40.0;
            train.push_back(sample({0.0, x}, x < 0.5 ? 0.2 : 0.9));
        }
        const FittedBase m = fit_base(spec, train);
        CHECK(predict_base(m, sample({0.0, 0.1})) == doctest::Approx(0.2).epsilon(1e-6));
        CHECK(predict_base(m, sample({0.0, 0.9})) == doctest::Approx(0.9).epsilon(1e-6));
        const auto& trace = m.summary.loss_trace;
        for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1] + 1e-15);
    }
}

TEST_CASE("recurrent and graph regressors train, predict deterministically and round-trip") {
    const SmallCorpus c = small_corpus();
    std::vector<BaseModelSpec> specs(2);
    specs[0].kind = ModelKind::recurrent;
    specs[1].kind = ModelKind::graph_regressor;
    for (auto& s : specs) {
        s.epochs = 2;
        s.samples_per_epoch = 200;
        s.hidden_dim = 6;
        s.encoder.output_dim = 6;
    }
    for (const auto& spec : specs) {
        CAPTURE(spec.label());
        const FittedBase a = fit_base(spec, c.train, &c.graph, 7);
        const FittedBase b = fit_base(spec, c.train, &c.graph, 7);
        const FittedBase back = fitted_from_json(to_json(a));
        double err_model = 0.0, err_persist = 0.0;
        for (std::size_t i = 0; i < c.train.size(); i += 17) {
            const auto& s = c.train[i];
            const double y = predict_with_context(a, s, c);
            CHECK(std::isfinite(y));
            CHECK(y == predict_with_context(b, s, c));
            CHECK(y == predict_with_context(back, s, c));
            CHECK(y == predict_with_context(a, s, c));
            err_model += std::abs(y - s.target);
            err_persist += std::abs(s.window.back() - s.target);
        }
        CHECK(err_model <= err_persist * 1.05);
    }
    BaseModelSpec graph_spec = specs[1];
    CHECK_THROWS_AS(fit_base(graph_spec, c.train, nullptr, 1), std::invalid_argument);
}

TEST_CASE("checkpoints of closed-form models reload bit-identically") {
    const SmallCorpus c = small_corpus();
    BaseModelSpec ar;
    ar.kind = ModelKind::autoregressive;
    ar.order = 3;
    BaseModelSpec stumps;
    stumps.kind = ModelKind::boosted_stumps;
    stumps.rounds = 10;
    for (const auto& spec : {BaseModelSpec{}, ar, stumps}) {
        const FittedBase m = fit_base(spec, c.train);
        const FittedBase back = fitted_from_json(to_json(m));
        CHECK(back.spec.label() == m.spec.label());
        for (std::size_t i = 0; i < c.train.size(); i += 11) CHECK(predict_base(m, c.train[i]) == predict_base(back, c.train[i]));
    }
}

TEST_CASE("pool specs parse strictly") {
    const BaseModelSpec s = spec_from_json({{"kind", "autoregressive"}, {"order", 4}}, "pool[1]");
    CHECK(s.kind == ModelKind::autoregressive);
    CHECK(s.order == 4);
    CHECK(spec_from_json(spec_to_json(s), "pool[1]").label() == "AR(4)");
    try {
        spec_from_json({{"kind", "persistence"}, {"colour", 1}}, "pool[0]");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.field() == "pool[0].colour");
    }
    CHECK_THROWS_AS(spec_from_json({{"kind", "lstm"}}, "pool[0]"), ConfigError);
}

TEST_CASE("loss recording") {
    std::vector<FittedBase> exact{ar_model(0.5, {0.0}, 2), ar_model(0.5, {0.0}, 2)};
    LossHistory h0(2, 4);
    CHECK(record_losses(exact, sample({0.1, 0.2}), 0.5, h0) == std::vector<double>{0.0, 0.0});

    std::vector<FittedBase> pool{ar_model(0.3, {0.0}, 2), ar_model(0.7, {0.0}, 2)};
    LossHistory h(2, 3);
    const auto row = record_losses(pool, sample({0.1, 0.2}), 0.5, h);
    CHECK(row[0] == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(row[1] == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(h.rows() == 1);

    const auto sq = record_losses(pool, sample({0.1, 0.2}), 0.5, h, nullptr, LossKind::squared);
    CHECK(sq[0] == doctest::Approx(0.04).epsilon(1e-12));
}

TEST_CASE("loss history ring") {
    LossHistory h(2, 3);
    h.push(std::vector<double>{1, 2});
    CHECK(h.flatten_padded() == std::vector<double>{0, 0, 0, 0, 1, 2});
    h.push(std::vector<double>{3, 4});
    h.push(std::vector<double>{5, 6});
    h.push(std::vector<double>{7, 8});
    CHECK(h.rows() == 3);
    CHECK(h.flatten_padded() == std::vector<double>{3, 4, 5, 6, 7, 8});
    CHECK(h.latest() == std::vector<double>{7, 8});
    CHECK_THROWS(h.push(std::vector<double>{1, 2, 3}));
}
