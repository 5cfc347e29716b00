#include "emgrl/eval/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

#include "emgrl/data/csv.hpp"
#include "emgrl/diff/optim.hpp"
#include "emgrl/diff/serialize.hpp"
#include "emgrl/error.hpp"
#include "emgrl/rng.hpp"

namespace emgrl::eval {

using diff::ParamSet;
using diff::Tape;
using diff::Var;
using diff::Vec;
using nlohmann::json;

std::vector<data::WindowSample> PreparedData::train_samples() const {
    std::vector<data::WindowSample> out;
    for (const auto& node : train) out.insert(out.end(), node.begin(), node.end());
    return out;
}

std::uint64_t repetition_seed(std::uint64_t master, std::size_t r) {
    return derive_seed(master, "repetition." + std::to_string(r));
}

// ---------------------------------------------------------------------------
// Data preparation

PreparedData prepare_data(const RunConfig& config) {
    config.validate();
    std::vector<data::TimeSeriesFrame> frames;
    std::vector<data::FarmMeta> farms;
    PreparedData out;

    if (config.corpus.source == CorpusSource::synthetic) {
        auto corpus = data::gen_synthetic(config.corpus.synthetic, config.corpus_seed());
        frames = std::move(corpus.frames);
        farms = std::move(corpus.farms);
        out.regimes = std::move(corpus.regimes);
    } else {
        if (!std::filesystem::exists(config.corpus.metadata))
            throw ConfigError("corpus.metadata", "file not found: " + config.corpus.metadata.string());
        for (const auto& p : config.corpus.series)
            if (!std::filesystem::exists(p)) throw ConfigError("corpus.series", "file not found: " + p.string());
        farms = data::load_farm_meta(config.corpus.metadata);
        for (const auto& p : config.corpus.series) {
            auto loaded = data::load_series_csv(p, config.corpus.schema);
            for (auto& f : loaded.frames) frames.push_back(std::move(f));
        }
    }

    out.graph = data::build_graph(farms, config.graph_k);
    std::set<std::string> known;
    for (const auto& n : out.graph.nodes) known.insert(n.farm_id);
    std::map<std::string, data::TimeSeriesFrame> by_id;
    for (auto& f : frames) {
        if (!known.count(f.farm_id)) throw ConfigError("corpus.metadata", "no metadata for farm " + f.farm_id);
        const std::string id = f.farm_id;
        if (!by_id.emplace(id, std::move(f)).second)
            throw ConfigError("corpus.series", "farm " + id + " appears in more than one series");
    }
    std::vector<data::TimeSeriesFrame> ordered;
    for (const auto& node : out.graph.nodes) {
        auto it = by_id.find(node.farm_id);
        if (it == by_id.end()) throw ConfigError("corpus.series", "no series for farm " + node.farm_id);
        ordered.push_back(std::move(it->second));
    }
    for (const auto& f : ordered)
        if (f.timestamps != ordered.front().timestamps)
            throw ConfigError("corpus.series",
                              "farm " + f.farm_id + " is not on the time grid of farm " + ordered.front().farm_id);

    const auto& ts = ordered.front().timestamps;
    std::int64_t boundary = 0;
    if (config.split.boundary) {
        boundary = *config.split.boundary;
    } else {
        const auto idx = static_cast<std::size_t>(std::floor(config.split.train_fraction * static_cast<double>(ts.size())));
        if (idx == 0 || idx >= ts.size()) throw ConfigError("split.train_fraction", "leaves an empty split");
        boundary = ts[idx];
    }

    for (const auto& frame : ordered) {
        data::TimeSeriesFrame train, test;
        try {
            std::tie(train, test) = data::split_by_date(frame, boundary);
        } catch (const std::exception& e) {
            throw ConfigError("split.boundary", e.what());
        }
        if (train.empty() || test.empty())
            throw ConfigError("split.boundary", "farm " + frame.farm_id + " has an empty train or test split");
        auto [train_n, scaler] = [&] {
            try {
                return data::normalize_minmax(train);
            } catch (const std::exception& e) {
                throw ConfigError("corpus", "farm " + frame.farm_id + ": " + e.what());
            }
        }();
        auto test_n = data::apply_scaler(test, scaler);
        try {
            out.train.push_back(data::sliding_windows(train_n, config.window, config.horizon));
            out.test.push_back(data::sliding_windows(test_n, config.window, config.horizon));
        } catch (const LengthError& e) {
            throw ConfigError("split", "farm " + frame.farm_id + ": split too short for window + horizon (" + e.what() + ")");
        }
        out.scalers.push_back(scaler);
        out.split_index = train.size();
    }
    return out;
}

// ---------------------------------------------------------------------------
// Features and streams

namespace {

bool same_encoder(const embed::ConvStackConfig& a, const embed::ConvStackConfig& b) {
    return a.channels == b.channels && a.kernel_size == b.kernel_size && a.dilations == b.dilations &&
           a.output_dim == b.output_dim;
}

ParamSet without_prefix(const ParamSet& p, const std::string& prefix) {
    ParamSet out;
    for (const auto& [name, block] : p) {
        if (name.compare(0, prefix.size(), prefix) == 0) continue;
        auto& dst = out.add(name, block.rows(), block.cols());
        std::copy(block.values().begin(), block.values().end(), dst.values().begin());
    }
    return out;
}

std::size_t common_length(const std::vector<std::vector<data::WindowSample>>& split) {
    if (split.empty()) throw std::invalid_argument("split has no nodes");
    for (const auto& node : split)
        if (node.size() != split.front().size())
            throw DimensionError("split: samples per node", split.front().size(), node.size());
    return split.front().size();
}

}  // namespace

SplitFeatures split_features(const std::vector<base::FittedBase>& pool,
                             const std::vector<std::vector<data::WindowSample>>& split,
                             const data::WindFarmGraph& graph, const ParamSet& stse_params,
                             const embed::StseConfig& stse) {
    const std::size_t nodes = split.size();
    if (nodes != graph.size()) throw DimensionError("split_features: nodes", graph.size(), nodes);
    const std::size_t count = common_length(split);
    SplitFeatures f;
    f.forecasts.assign(nodes, std::vector<std::vector<double>>(count, std::vector<double>(pool.size())));
    f.stse.assign(nodes, std::vector<Vec>(count));
    f.truth.assign(nodes, std::vector<double>(count));
    base::GraphContext ctx{&graph, std::vector<Vec>(nodes)};
    for (std::size_t k = 0; k < count; ++k) {
        for (std::size_t v = 0; v < nodes; ++v) {
            ctx.windows[v] = split[v][k].window;
            f.truth[v][k] = split[v][k].target;
        }
        auto emb = embed::compute_stse(graph, ctx.windows, stse_params, stse);
        for (std::size_t v = 0; v < nodes; ++v) f.stse[v][k] = std::move(emb[v]);
        for (std::size_t i = 0; i < pool.size(); ++i) {
            if (pool[i].spec.kind == base::ModelKind::graph_regressor) {
                const auto preds = base::predict_graph(pool[i], ctx);
                for (std::size_t v = 0; v < nodes; ++v) f.forecasts[v][k][i] = preds[v];
            } else {
                for (std::size_t v = 0; v < nodes; ++v) f.forecasts[v][k][i] = base::predict_base(pool[i], split[v][k]);
            }
        }
    }
    return f;
}

std::vector<std::vector<std::vector<double>>> loss_rows(const SplitFeatures& features) {
    std::vector<std::vector<std::vector<double>>> rows(features.forecasts.size());
    for (std::size_t v = 0; v < rows.size(); ++v) {
        for (std::size_t k = 0; k < features.forecasts[v].size(); ++k) {
            std::vector<double> row;
            for (double f : features.forecasts[v][k]) row.push_back(base::pointwise_loss(f, features.truth[v][k], base::LossKind::absolute));
            rows[v].push_back(std::move(row));
        }
    }
    return rows;
}

namespace {

/// Calls visit(node, k, history) for every step whose history is non-empty.
template <typename Visit>
void walk_histories(const std::vector<std::vector<std::vector<double>>>& rows, std::size_t models,
                    std::size_t history_rows, std::size_t delay,
                    const std::vector<std::vector<std::vector<double>>>& carried, bool require_rows, Visit&& visit) {
    for (std::size_t v = 0; v < rows.size(); ++v) {
        base::LossHistory history(models, std::max<std::size_t>(history_rows, 1));
        if (!carried.empty())
            for (const auto& r : carried.at(v)) history.push(r);
        std::size_t next = 0;
        for (std::size_t k = 0; k < rows[v].size(); ++k) {
            while (next + delay <= k) history.push(rows[v][next++]);
            if (require_rows && history.empty()) continue;
            visit(v, k, history);
        }
    }
}

}  // namespace

std::vector<rl::FarmStream> build_streams(const SplitFeatures& features,
                                          const std::vector<std::vector<data::WindowSample>>& split,
                                          const data::WindFarmGraph& graph, const ParamSet& mle_params,
                                          const RunConfig& config,
                                          const std::vector<std::vector<std::vector<double>>>& carried) {
    const auto rows = loss_rows(features);
    const std::size_t models = features.forecasts.empty() || features.forecasts.front().empty()
                                   ? config.pool.size()
                                   : features.forecasts.front().front().size();
    const bool with_mle = config.mle.output_dim > 0;
    std::vector<rl::FarmStream> streams(split.size());
    for (std::size_t v = 0; v < split.size(); ++v) streams[v].farm_id = graph.nodes[v].farm_id;
    walk_histories(rows, models, config.mle.horizon, config.horizon, carried, with_mle,
                   [&](std::size_t v, std::size_t k, const base::LossHistory& history) {
                       Vec mle = with_mle ? embed::compute_mle(history, mle_params, config.mle) : Vec{};
                       streams[v].steps.push_back(rl::AgentStep{
                           embed::build_state(features.stse[v][k], std::move(mle), streams[v].farm_id, split[v][k].t_index),
                           features.forecasts[v][k], features.truth[v][k]});
                   });
    return streams;
}

// ---------------------------------------------------------------------------
// Pretraining

ParamSet pretrain_stse(const RunConfig& config, const PreparedData& data, const std::vector<base::FittedBase>& pool,
                       std::uint64_t seed) {
    for (const auto& m : pool)
        if (m.spec.kind == base::ModelKind::graph_regressor && same_encoder(m.spec.encoder, config.stse.encoder) &&
            m.spec.gnn_layers == config.stse.gnn_layers)
            return without_prefix(std::get<ParamSet>(m.params), "head.");
    base::BaseModelSpec spec;
    spec.kind = base::ModelKind::graph_regressor;
    spec.encoder = config.stse.encoder;
    spec.gnn_layers = config.stse.gnn_layers;
    spec.epochs = config.pretrain.epochs;
    spec.samples_per_epoch = config.pretrain.samples_per_epoch;
    spec.batch_size = config.pretrain.batch_size;
    spec.learning_rate = config.pretrain.learning_rate;
    const auto fitted = base::fit_base(spec, data.train_samples(), &data.graph, seed);
    return without_prefix(std::get<ParamSet>(fitted.params), "head.");
}

ParamSet pretrain_mle(const RunConfig& config, const std::vector<std::vector<std::vector<double>>>& rows,
                      std::size_t models, std::uint64_t seed) {
    const auto& mc = config.mle;
    if (mc.output_dim == 0) return {};
    Rng rng(seed);
    ParamSet params = embed::init_mle(mc, models, rng);
    params.add_linear("readout", mc.output_dim, models, rng);

    std::vector<Vec> inputs, targets;
    walk_histories(rows, models, mc.horizon, config.horizon, {}, true,
                   [&](std::size_t v, std::size_t k, const base::LossHistory& history) {
                       inputs.push_back(history.flatten_padded());
                       Vec t = rows[v][k];
                       for (double& x : t) x *= mc.loss_scale;
                       targets.push_back(std::move(t));
                   });
    if (inputs.empty()) return without_prefix(params, "readout.");

    diff::Optimizer opt(diff::OptimConfig{config.pretrain.learning_rate, diff::OptimizerKind::adam});
    std::vector<std::size_t> idx(inputs.size());
    std::iota(idx.begin(), idx.end(), 0);
    const std::size_t per_epoch = config.pretrain.samples_per_epoch == 0
                                      ? idx.size()
                                      : std::min(config.pretrain.samples_per_epoch, idx.size());
    for (std::size_t epoch = 0; epoch < config.pretrain.epochs; ++epoch) {
        std::shuffle(idx.begin(), idx.end(), rng.engine());
        for (std::size_t start = 0; start < per_epoch; start += config.pretrain.batch_size) {
            const std::size_t end = std::min(per_epoch, start + config.pretrain.batch_size);
            Tape tape;
            std::vector<Var> errors;
            for (std::size_t b = start; b < end; ++b) {
                Var e = embed::compute_mle(tape, tape.constant(inputs[idx[b]]), models, params, mc);
                Var pred = diff::linear(e, params, "readout");
                errors.push_back(diff::square(diff::sub(pred, tape.constant(targets[idx[b]]))));
            }
            Var loss = diff::mean(diff::concat(errors));
            opt.step(params, tape.backward(loss).params(params), diff::Direction::descent);
        }
    }
    return without_prefix(params, "readout.");
}

// ---------------------------------------------------------------------------
// State standardization

StateScaler StateScaler::fit(const std::vector<rl::FarmStream>& streams) {
    StateScaler sc;
    std::size_t n = 0;
    std::vector<double> sum, sq;
    for (const auto& fs : streams) {
        for (const auto& step : fs.steps) {
            const Vec v = step.state.values();
            if (sum.empty()) sum.assign(v.size(), 0.0), sq.assign(v.size(), 0.0);
            for (std::size_t d = 0; d < v.size(); ++d) {
                sum[d] += v[d];
                sq[d] += v[d] * v[d];
            }
            ++n;
        }
    }
    if (n == 0) throw std::invalid_argument("StateScaler::fit: no steps");
    for (std::size_t d = 0; d < sum.size(); ++d) {
        const double mu = sum[d] / static_cast<double>(n);
        const double var = std::max(0.0, sq[d] / static_cast<double>(n) - mu * mu);
        const double sd = std::sqrt(var);
        sc.mean.push_back(mu);
        sc.scale.push_back(sd > 1e-12 ? 1.0 / sd : 1.0);
    }
    return sc;
}

void StateScaler::apply(embed::StateEmbedding& state) const {
    if (state.size() != mean.size()) throw DimensionError("StateScaler: state", mean.size(), state.size());
    for (std::size_t d = 0; d < state.stse.size(); ++d) state.stse[d] = (state.stse[d] - mean[d]) * scale[d];
    const std::size_t off = state.stse.size();
    for (std::size_t d = 0; d < state.mle.size(); ++d)
        state.mle[d] = (state.mle[d] - mean[off + d]) * scale[off + d];
}

void StateScaler::apply(std::vector<rl::FarmStream>& streams) const {
    for (auto& fs : streams)
        for (auto& step : fs.steps) apply(step.state);
}

// ---------------------------------------------------------------------------
// Training and evaluation

TrainedPipeline train_pipeline(const RunConfig& config, const PreparedData& data, std::uint64_t seed) {
    TrainedPipeline p;
    p.config = config;
    p.seed = seed;
    const auto samples = data.train_samples();
    for (std::size_t i = 0; i < config.pool.size(); ++i)
        p.pool.push_back(base::fit_base(config.pool[i], samples, &data.graph, derive_seed(seed, "pool." + std::to_string(i))));
    p.stse = pretrain_stse(config, data, p.pool, derive_seed(seed, "pretrain.stse"));
    const auto features = split_features(p.pool, data.train, data.graph, p.stse, config.stse);
    p.mle = pretrain_mle(config, loss_rows(features), p.pool.size(), derive_seed(seed, "pretrain.mle"));
    auto streams = build_streams(features, data.train, data.graph, p.mle, config);
    p.state_scaler = StateScaler::fit(streams);
    p.state_scaler.apply(streams);
    p.agent = rl::train(streams, config.agent, derive_seed(seed, "agent"));
    return p;
}

TrialOutcome evaluate_pipeline(const TrainedPipeline& p, const PreparedData& data) {
    const auto& config = p.config;
    const std::size_t nodes = data.nodes();
    const std::size_t models = p.pool.size();

    // Losses of the last training samples are known when the test split starts.
    std::vector<std::vector<data::WindowSample>> tail(nodes);
    const std::size_t carry = std::min(config.mle.horizon, data.train.front().size());
    for (std::size_t v = 0; v < nodes; ++v)
        tail[v].assign(data.train[v].end() - static_cast<std::ptrdiff_t>(carry), data.train[v].end());
    const auto carried = loss_rows(split_features(p.pool, tail, data.graph, p.stse, config.stse));

    const auto features = split_features(p.pool, data.test, data.graph, p.stse, config.stse);
    auto streams = build_streams(features, data.test, data.graph, p.mle, config, carried);
    p.state_scaler.apply(streams);

    TrialOutcome out;
    out.seed = p.seed;
    std::vector<std::string> labels;
    for (const auto& m : p.pool) labels.push_back(m.spec.label());

    std::vector<std::vector<double>> all_pred(models + 2);
    std::vector<double> all_truth;
    for (std::size_t v = 0; v < nodes; ++v) {
        const auto& scaler = data.scalers[v];
        auto scale = [&](double x) { return config.denormalize ? scaler.inverse(x) : x; };
        const auto& agent = p.agent.agent_for(v);
        NodeTrace tr;
        tr.farm_id = streams[v].farm_id;
        std::vector<std::vector<double>> pred(models + 2);
        std::vector<double> truth;
        for (const auto& step : streams[v].steps) {
            Vec w = rl::actor_forward(step.state, agent.actor);
            const double y = rl::ensemble_predict(step.forecasts, w);
            const double uniform =
                std::accumulate(step.forecasts.begin(), step.forecasts.end(), 0.0) / static_cast<double>(models);
            for (std::size_t i = 0; i < models; ++i) pred[i].push_back(scale(step.forecasts[i]));
            pred[models].push_back(scale(uniform));
            pred[models + 1].push_back(scale(y));
            truth.push_back(scale(step.truth));
            tr.raw_index.push_back(data.split_index + step.state.t_index + config.horizon);
            tr.weights.push_back(std::move(w));
            tr.forecasts.push_back(step.forecasts);
            tr.truth.push_back(step.truth);
            tr.ensemble.push_back(y);
        }
        for (std::size_t i = 0; i < models + 2; ++i) {
            const std::string& name = i < models ? labels[i] : (i == models ? kUniformLabel : kEnsembleLabel);
            out.results.push_back(score(name, tr.farm_id, truth, pred[i]));
            all_pred[i].insert(all_pred[i].end(), pred[i].begin(), pred[i].end());
        }
        all_truth.insert(all_truth.end(), truth.begin(), truth.end());
        out.trace.push_back(std::move(tr));
    }
    for (std::size_t i = 0; i < models + 2; ++i) {
        const std::string& name = i < models ? labels[i] : (i == models ? kUniformLabel : kEnsembleLabel);
        out.results.push_back(score(name, kAllFarms, all_truth, all_pred[i]));
    }
    return out;
}

ExperimentResult run_experiment(const RunConfig& input) {
    RunConfig config = input;
    if (config.agent.models == 0) config.resolve();
    // Distinct row labels.
    {
        std::map<std::string, int> seen;
        for (auto& spec : config.pool)
            if (seen[spec.label()]++ > 0) spec.name = spec.label() + "#" + std::to_string(seen[spec.label()]);
    }
    ExperimentResult res;
    res.data = prepare_data(config);

    std::vector<SeedResults> seeds;
    for (std::size_t r = 0; r < config.repetitions; ++r) {
        const std::uint64_t s = repetition_seed(config.seed, r);
        const auto pipeline = train_pipeline(config, res.data, s);
        res.trials.push_back(evaluate_pipeline(pipeline, res.data));
        seeds.push_back(SeedResults{s, res.trials.back().results});
    }
    std::vector<std::string> base_labels;
    for (const auto& spec : config.pool) base_labels.push_back(spec.label());
    std::vector<std::string> models = base_labels;
    models.push_back(kUniformLabel);
    models.push_back(kEnsembleLabel);
    std::vector<std::string> farms;
    for (const auto& n : res.data.graph.nodes) farms.push_back(n.farm_id);
    farms.push_back(kAllFarms);
    res.report = assemble_report(std::move(seeds), models, farms, base_labels, kEnsembleLabel, kUniformLabel);
    res.report.fingerprint = config_fingerprint(config);
    res.report.seed = config.seed;
    res.report.normalized = !config.denormalize;
    return res;
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

json encode_vec(const std::vector<double>& v) {
    json out = json::array();
    for (double x : v) out.push_back(diff::encode_double(x));
    return out;
}

std::vector<double> decode_vec(const json& j) {
    std::vector<double> out;
    for (const auto& x : j) out.push_back(diff::decode_double(x.get<std::string>()));
    return out;
}

}  // namespace

void TrainedPipeline::save(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    json pool_json = json::array();
    for (const auto& m : pool) pool_json.push_back(base::to_json(m));
    json agents = json::array();
    if (agent.per_farm.empty()) agents.push_back(diff::to_json(rl::to_paramset(agent.params)));
    for (const auto& a : agent.per_farm) agents.push_back(diff::to_json(rl::to_paramset(a)));
    json doc{{"format", "emgrl.pipeline"},
             {"version", 1},
             {"seed", seed},
             {"config", to_json(config)},
             {"pool", pool_json},
             {"stse", diff::to_json(stse)},
             {"mle", diff::to_json(mle)},
             {"state_mean", encode_vec(state_scaler.mean)},
             {"state_scale", encode_vec(state_scaler.scale)},
             {"agents", agents}};
    std::ofstream f(dir / "pipeline.json");
    f << doc.dump(1) << '\n';
    if (!f) throw std::runtime_error("cannot write " + (dir / "pipeline.json").string());
}

TrainedPipeline TrainedPipeline::load(const std::filesystem::path& dir) {
    const auto path = dir / "pipeline.json";
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open checkpoint " + path.string());
    json doc;
    try {
        doc = json::parse(f);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
    if (doc.value("format", "") != "emgrl.pipeline" || doc.value("version", 0) != 1)
        throw std::runtime_error(path.string() + ": not an emgrl.pipeline v1 checkpoint");
    TrainedPipeline p;
    p.config = run_config_from_json(doc.at("config"));
    p.seed = doc.at("seed").get<std::uint64_t>();
    for (const auto& m : doc.at("pool")) p.pool.push_back(base::fitted_from_json(m));
    p.stse = diff::params_from_json(doc.at("stse"));
    p.mle = diff::params_from_json(doc.at("mle"));
    p.state_scaler.mean = decode_vec(doc.at("state_mean"));
    p.state_scaler.scale = decode_vec(doc.at("state_scale"));
    const auto& agents = doc.at("agents");
    if (agents.empty()) throw std::runtime_error(path.string() + ": no agent parameters");
    p.agent.params = rl::agent_from_paramset(diff::params_from_json(agents.at(0)));
    if (!p.config.agent.shared_agent)
        for (const auto& a : agents) p.agent.per_farm.push_back(rl::agent_from_paramset(diff::params_from_json(a)));
    return p;
}

}  // namespace emgrl::eval
