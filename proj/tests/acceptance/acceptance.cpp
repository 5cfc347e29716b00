#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <iterator>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "emgrl/base/models.hpp"
#include "emgrl/cli/cli.hpp"
#include "emgrl/data/graph.hpp"
#include "emgrl/embed/embedding.hpp"
#include "emgrl/eval/gradsuite.hpp"
#include "emgrl/eval/metrics.hpp"
#include "emgrl/eval/pipeline.hpp"
#include "emgrl/rl/agent.hpp"
#include "emgrl/rl/replay.hpp"

using namespace emgrl;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Verdict {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

void report(int id, const std::string& title, const Verdict& v) {
    std::cout << "criterion " << id << ": " << (v.pass ? "PASS" : "FAIL") << "  " << title << " --"
              << v.detail.str() << std::endl;
}

double compensated_sum(const std::vector<double>& xs) {
    double sum = 0.0, c = 0.0;
    for (double x : xs) {
        const double t = sum + x;
        c += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
        sum = t;
    }
    return sum + c;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

// 1
Verdict gradients() {
    Verdict v;
    const auto t0 = Clock::now();
    const auto results = eval::run_gradient_suite(100, 2024);
    const double elapsed = seconds_since(t0);
    double worst = 0.0;
    std::size_t min_points = results.empty() ? 0 : results.front().points;
    for (const auto& r : results) {
        worst = std::max(worst, r.max_rel_error);
        min_points = std::min(min_points, r.points);
        v.require(r.passed, r.name + " rel error " + std::to_string(r.max_rel_error));
    }
    v.require(min_points >= 100, "fewer than 100 points");
    v.require(elapsed < 60.0, "runtime over 60 s");
    v.detail << " " << results.size() << " cases, >=" << min_points << " points each, max rel error "
             << std::scientific << std::setprecision(2) << worst << std::defaultfloat << ", " << std::fixed
             << std::setprecision(1) << elapsed << " s" << std::defaultfloat;
    return v;
}

// 2
Verdict metrics() {
    Verdict v;
    Rng rng(11);
    std::vector<double> truth(10000), pred(10000), abs_err, sq_err;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        truth[i] = rng.uniform(0, 1);
        pred[i] = rng.uniform(0, 1);
        abs_err.push_back(std::abs(truth[i] - pred[i]));
        sq_err.push_back((truth[i] - pred[i]) * (truth[i] - pred[i]));
    }
    const double n = static_cast<double>(truth.size());
    const double d_mae = std::abs(eval::mae(truth, pred) - compensated_sum(abs_err) / n);
    const double d_rmse = std::abs(eval::rmse(truth, pred) - std::sqrt(compensated_sum(sq_err) / n));
    v.require(d_mae <= 1e-12, "mae oracle");
    v.require(d_rmse <= 1e-12, "rmse oracle");
    std::size_t violations = 0;
    for (int set = 0; set < 1000; ++set) {
        const std::size_t m = 1 + rng.index(100);
        std::vector<double> t(m), p(m);
        for (std::size_t i = 0; i < m; ++i) {
            t[i] = rng.uniform(-3, 3);
            p[i] = rng.uniform(-3, 3);
        }
        if (eval::rmse(t, p) < eval::mae(t, p) * (1.0 - 1e-15)) ++violations;
    }
    v.require(violations == 0, "rmse < mae");
    v.detail << " |mae-oracle|=" << d_mae << " |rmse-oracle|=" << d_rmse << ", rmse>=mae on 1000/1000 sets"
             << (violations ? " NOT" : "");
    return v;
}

eval::RunConfig small_config() {
    eval::RunConfig cfg;
    cfg.corpus.synthetic.farms = 3;
    cfg.corpus.synthetic.length = 900;
    cfg.window = 16;
    cfg.stse.encoder.output_dim = 6;
    cfg.mle.horizon = 4;
    cfg.pretrain.epochs = 1;
    cfg.pretrain.samples_per_epoch = 150;
    cfg.pool.clear();
    cfg.pool.push_back(base::BaseModelSpec{});
    base::BaseModelSpec ar;
    ar.kind = base::ModelKind::autoregressive;
    cfg.pool.push_back(ar);
    cfg.agent.steps = 300;
    cfg.repetitions = 1;
    cfg.seed = 5;
    cfg.resolve();
    return cfg;
}

// 3
Verdict selection() {
    Verdict v;
    Rng rng(12);
    std::size_t mismatches = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 1 + rng.index(8);
        std::vector<double> forecasts(n);
        for (double& f : forecasts) f = rng.uniform(-2, 2);
        const std::size_t pick = rng.index(n);
        std::vector<double> weights(n, 0.0);
        weights[pick] = 1.0;
        if (rl::ensemble_predict(forecasts, weights) != forecasts[pick]) ++mismatches;
    }
    v.require(mismatches == 0, "one-hot mismatch");
    v.detail << " one-hot weights exact in " << 1000 - mismatches << "/1000 draws;";

    eval::RunConfig cfg = small_config();
    base::BaseModelSpec ar;
    ar.kind = base::ModelKind::autoregressive;
    cfg.pool = {ar};
    cfg.resolve();
    const auto r = eval::run_experiment(cfg);
    double worst = 0.0;
    for (const auto& farm : r.report.farms) {
        const auto& ours = r.report.at(eval::kEnsembleLabel, farm);
        const auto& base = r.report.at("AR(2)", farm);
        worst = std::max({worst, std::abs(ours.mae - base.mae), std::abs(ours.rmse - base.rmse)});
    }
    v.require(worst <= 1e-9, "single-model pool differs");
    v.detail << " single-model pool max |EMGRL-AR(2)| = " << worst;
    return v;
}

data::WindFarmGraph random_layout(Rng& rng) {
    std::vector<data::FarmMeta> farms;
    for (std::size_t i = 0; i < 6; ++i) {
        data::FarmMeta m;
        m.farm_id = std::string(1, static_cast<char>('A' + i));
        m.latitude = (i < 3 ? 40.0 : 41.0) + rng.uniform(-0.2, 0.2);
        m.longitude = (i < 3 ? -70.0 : -71.0) + rng.uniform(-0.2, 0.2);
        farms.push_back(m);
    }
    return data::build_graph(farms, 1 + rng.index(3));
}

std::vector<diff::Vec> random_states(Rng& rng, std::size_t dim) {
    std::vector<diff::Vec> out(6, diff::Vec(dim));
    for (auto& s : out)
        for (double& x : s) x = rng.uniform(-1, 1);
    return out;
}

// 4
Verdict gnn_properties() {
    Verdict v;
    Rng rng(13);
    const std::size_t dim = 5;
    std::size_t perm_fail = 0, local_fail = 0, graphs = 0;
    double edgeless_err = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        diff::ParamSet p;
        embed::init_gnn(p, 3, dim, rng);
        auto g = random_layout(rng);
        if (trial % 5 == 0) {
            for (auto& n : g.neighbors) n.clear();
            for (std::size_t i = 0; i + 1 < 6; ++i) {
                g.neighbors[i].push_back(i + 1);
                g.neighbors[i + 1].push_back(i);
            }
        }
        ++graphs;
        const auto h0 = random_states(rng, dim);
        for (std::size_t L = 1; L <= 3; ++L) {
            const auto layers = embed::gnn_layers(L);
            const auto base = embed::gnn_forward(g, h0, p, layers);

            auto shuffled = g;
            for (auto& n : shuffled.neighbors) std::shuffle(n.begin(), n.end(), rng.engine());
            if (embed::gnn_forward(shuffled, h0, p, layers) != base) ++perm_fail;

            for (std::size_t node = 0; node < 6; ++node) {
                const auto hops = data::hop_distances(g, node);
                auto changed = h0;
                for (std::size_t u = 0; u < 6; ++u)
                    if (hops[u] > L)
                        for (double& x : changed[u]) x = rng.uniform(-4, 4);
                if (embed::gnn_forward(g, changed, p, layers)[node] != base[node]) ++local_fail;
            }

            auto edgeless = g;
            for (auto& n : edgeless.neighbors) n.clear();
            const auto joint = embed::gnn_forward(edgeless, h0, p, layers);
            for (std::size_t node = 0; node < 6; ++node) {
                data::WindFarmGraph solo;
                solo.nodes = {g.nodes[node]};
                solo.neighbors = {{}};
                const auto alone = embed::gnn_forward(solo, {h0[node]}, p, layers);
                for (std::size_t i = 0; i < dim; ++i)
                    edgeless_err = std::max(edgeless_err, std::abs(alone[0][i] - joint[node][i]));
            }
        }
    }
    v.require(perm_fail == 0, "permutation changed output");
    v.require(local_fail == 0, "output depends on nodes beyond L hops");
    v.require(edgeless_err <= 1e-12, "edgeless differs from per-node");
    v.detail << " " << graphs << " graphs x L=1..3: permutation mismatches " << perm_fail << ", locality violations "
             << local_fail << ", edgeless max error " << edgeless_err;
    return v;
}

rl::Transition transition(double tag) {
    rl::Transition t;
    t.state = embed::build_state(diff::Vec{tag}, {}, "A", 0);
    t.next_state = t.state;
    t.action = {0.5, 0.5};
    t.reward = tag;
    return t;
}

// 7
Verdict replay() {
    Verdict v;
    rl::ReplayBuffer buf(10, 77);
    bool capacity_ok = true, fifo_ok = true;
    for (int i = 0; i < 35; ++i) {
        buf.push(transition(i));
        capacity_ok = capacity_ok && buf.size() <= buf.capacity();
        const int oldest = std::max(0, i - 9);
        for (std::size_t k = 0; k < buf.size(); ++k) fifo_ok = fifo_ok && buf.at(k).reward == oldest + static_cast<int>(k);
    }
    v.require(capacity_ok, "capacity exceeded");
    v.require(fifo_ok, "eviction not FIFO");

    std::map<double, std::size_t> counts;
    const std::size_t draws = 10000;
    for (std::size_t d = 0; d < draws; ++d) ++counts[buf.sample(1).front()->reward];
    const double expected = static_cast<double>(draws) / 10.0;
    double chi2 = 0.0;
    for (std::size_t k = 0; k < 10; ++k) {
        const double o = static_cast<double>(counts[buf.at(k).reward]);
        chi2 += (o - expected) * (o - expected) / expected;
    }
    const double dof = 9.0;
    const double bound = dof + 3.0 * std::sqrt(2.0 * dof);
    v.require(counts.size() == 10, "samples outside the buffer");
    v.require(chi2 <= bound, "chi-square above 3 sigma");

    bool distinct = true;
    for (int b = 0; b < 200; ++b) {
        std::set<const rl::Transition*> seen;
        for (const auto* t : buf.sample(10)) seen.insert(t);
        distinct = distinct && seen.size() == 10;
    }
    v.require(distinct, "duplicate transitions in a batch");
    v.detail << " capacity held, FIFO order held over 35 pushes, chi2=" << std::fixed << std::setprecision(2) << chi2
             << " (9 dof, 3-sigma bound " << bound << ")" << std::defaultfloat;
    return v;
}

// 9
Verdict persistence() {
    Verdict v;
    eval::RunConfig cfg;
    cfg.resolve();
    const auto data = eval::prepare_data(cfg);
    const auto model = base::fit_base(base::BaseModelSpec{}, data.train_samples());
    std::size_t total = 0, mismatches = 0;
    for (const auto& node : data.test)
        for (const auto& s : node) {
            ++total;
            if (base::predict_base(model, s) != s.window.back()) ++mismatches;
        }
    v.require(total > 0, "no test samples");
    v.require(mismatches == 0, "persistence differs from last window value");
    v.detail << " " << total - mismatches << "/" << total << " test samples equal the window's last value";
    return v;
}

eval::RunConfig regime_config() {
    eval::RunConfig cfg;
    cfg.pool.clear();
    cfg.pool.push_back(base::BaseModelSpec{});
    base::BaseModelSpec ar;
    ar.kind = base::ModelKind::autoregressive;
    ar.order = 2;
    cfg.pool.push_back(ar);
    base::BaseModelSpec stumps;
    stumps.kind = base::ModelKind::boosted_stumps;
    cfg.pool.push_back(stumps);
    cfg.repetitions = 5;
    cfg.seed = 1;
    cfg.agent.steps = 20000;
    cfg.resolve();
    return cfg;
}

// 5 and 6
void regime_experiment(const std::set<int>& wanted, bool& all_pass) {
    const eval::RunConfig cfg = regime_config();
    const auto t0 = Clock::now();
    const auto res = eval::run_experiment(cfg);
    const double elapsed = seconds_since(t0);
    const auto& rep = res.report;
    const std::string all = eval::kAllFarms;

    if (wanted.count(5)) {
        Verdict v;
        const double ours = rep.at(eval::kEnsembleLabel, all).mae;
        const double uniform = rep.at(eval::kUniformLabel, all).mae;
        std::string best_label;
        double best = 1e300;
        for (std::size_t k = 0; k < cfg.pool.size(); ++k) {
            const std::string& m = rep.models[k];
            if (rep.at(m, all).mae < best) best = rep.at(m, all).mae, best_label = m;
        }
        v.require(ours < uniform, "(a) not below uniform");
        v.require(ours <= 1.02 * best, "(b) above 1.02 x best single model");
        std::size_t strong = 0;
        std::ostringstream per_seed;
        for (std::size_t r = 0; r < rep.per_seed.size(); ++r) {
            const double o = rep.at_seed(r, eval::kEnsembleLabel, all).mae;
            const double u = rep.at_seed(r, eval::kUniformLabel, all).mae;
            const double gain = eval::improvement_pct(o, u);
            if (gain >= 5.0) ++strong;
            per_seed << " " << std::fixed << std::setprecision(2) << gain << "%";
        }
        v.require(strong >= 3, "(c) fewer than 3 of 5 seeds gain >= 5%");
        v.require(elapsed < 600.0, "runtime over 10 min");
        v.detail << std::setprecision(4) << " " << cfg.corpus.synthetic.farms << " farms x " << cfg.corpus.synthetic.length
                 << " steps; MAE EMGRL " << ours << ", Uniform " << uniform << ", best single " << best_label << " "
                 << best << "; (b) ratio " << ours / best << "; gain vs uniform per seed" << per_seed.str() << " ("
                 << strong << "/5 >= 5%); " << std::fixed << std::setprecision(1) << elapsed << " s"
                 << std::defaultfloat;
        report(5, "regime-switching experiment", v);
        all_pass = all_pass && v.pass;
    }

    if (wanted.count(6)) {
        Verdict v;
        const auto& regimes = res.data.regimes;
        const std::size_t models = cfg.pool.size();
        std::map<data::RegimeKind, std::vector<double>> err;
        for (const auto& trial : res.trials)
            for (const auto& node : trial.trace)
                for (std::size_t i = 0; i < node.truth.size(); ++i) {
                    auto& e = err[regimes[node.raw_index[i]]];
                    e.resize(models, 0.0);
                    for (std::size_t m = 0; m < models; ++m) e[m] += std::abs(node.forecasts[i][m] - node.truth[i]);
                }
        std::map<data::RegimeKind, std::size_t> correct;
        for (const auto& [regime, e] : err)
            correct[regime] = static_cast<std::size_t>(std::min_element(e.begin(), e.end()) - e.begin());

        auto segment_start = [&](std::size_t t) {
            while (t > 0 && regimes[t - 1] == regimes[t]) --t;
            return t;
        };
        struct Acc {
            double sum = 0.0;
            double n = 0.0;
        };
        std::map<std::size_t, Acc> pooled;
        std::map<std::size_t, std::map<std::size_t, Acc>> by_seed;
        for (std::size_t r = 0; r < res.trials.size(); ++r)
            for (const auto& node : res.trials[r].trace)
                for (std::size_t i = 0; i < node.truth.size(); ++i) {
                    const std::size_t t = node.raw_index[i];
                    const std::size_t s = segment_start(t);
                    const double w = node.weights[i][correct[regimes[t]]];
                    pooled[s].sum += w, pooled[s].n += 1;
                    by_seed[s][r].sum += w, by_seed[s][r].n += 1;
                }
        for (const auto& [start, acc] : pooled) {
            const double mean = acc.sum / acc.n;
            const auto regime = regimes[start];
            v.require(mean > 0.6, "segment at t=" + std::to_string(start) + " mean weight " + std::to_string(mean));
            v.detail << " segment t=" << start << " " << data::to_string(regime) << " (correct "
                     << rep.models[correct[regime]] << "): mean weight " << std::fixed << std::setprecision(3)
                     << mean << " [per seed";
            for (const auto& [r, a] : by_seed[start]) v.detail << " " << a.sum / a.n;
            v.detail << "];" << std::defaultfloat;
        }
        report(6, "regime attribution (mean over seeds and farms per segment)", v);
        all_pass = all_pass && v.pass;
    }
}

// 8
Verdict determinism() {
    Verdict v;
    const fs::path dir = fs::temp_directory_path() / "emgrl_acceptance_determinism";
    fs::remove_all(dir);
    fs::create_directories(dir);
    eval::RunConfig quick = small_config();
    quick.repetitions = 2;
    std::ofstream(dir / "config.json") << eval::to_json(quick).dump(2);
    std::ostringstream sink;
    for (const char* sub : {"first", "second"}) {
        const int code = cli::run({"compare", "-c", (dir / "config.json").string(), "-s", "42", "-o",
                                   (dir / sub).string()},
                                  sink, sink);
        v.require(code == 0, std::string("compare exit code in ") + sub);
    }
    std::size_t identical = 0;
    for (const char* name : {"report.json", "report.txt", "report_long.csv"}) {
        const std::string a = slurp(dir / "first" / name);
        const std::string b = slurp(dir / "second" / name);
        v.require(!a.empty() && a == b, std::string(name) + " differs");
        if (!a.empty() && a == b) ++identical;
    }
    v.detail << " " << identical << "/3 report files byte-identical across two compare runs";
    fs::remove_all(dir);
    return v;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance checks"};
    std::vector<int> criteria{1, 2, 3, 4, 5, 6, 7, 8, 9};
    app.add_option("--criteria", criteria, "Criteria to run")->delimiter(',');
    CLI11_PARSE(app, argc, argv);
    const std::set<int> wanted(criteria.begin(), criteria.end());

    bool all_pass = true;
    auto single = [&](int id, const std::string& title, const std::function<Verdict()>& check) {
        if (!wanted.count(id)) return;
        Verdict v;
        try {
            v = check();
        } catch (const std::exception& e) {
            v.require(false, std::string("exception: ") + e.what());
        }
        report(id, title, v);
        all_pass = all_pass && v.pass;
    };
    single(1, "gradient suite", gradients);
    single(2, "metric oracles", metrics);
    single(3, "selection consistency", selection);
    single(4, "GNN structural properties", gnn_properties);
    single(7, "replay-buffer semantics", replay);
    single(8, "end-to-end determinism", determinism);
    single(9, "persistence baseline", persistence);
    if (wanted.count(5) || wanted.count(6)) {
        try {
            regime_experiment(wanted, all_pass);
        } catch (const std::exception& e) {
            std::cout << "criteria 5/6: FAIL -- exception: " << e.what() << std::endl;
            all_pass = false;
        }
    }
    return all_pass ? 0 : 1;
}
