#include "emgrl/base/models.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

#include <Eigen/Dense>

#include "emgrl/diff/optim.hpp"
#include "emgrl/diff/serialize.hpp"
#include "emgrl/error.hpp"
#include "emgrl/rng.hpp"

namespace emgrl::base {

using diff::ParamSet;
using diff::Tape;
using diff::Var;
using diff::Vec;
using nlohmann::json;

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::persistence: return "persistence";
        case ModelKind::autoregressive: return "autoregressive";
        case ModelKind::boosted_stumps: return "boosted_stumps";
        case ModelKind::recurrent: return "recurrent";
        case ModelKind::graph_regressor: return "graph_regressor";
    }
    return "?";
}

ModelKind model_kind_from_string(const std::string& name) {
    for (auto k : {ModelKind::persistence, ModelKind::autoregressive, ModelKind::boosted_stumps, ModelKind::recurrent,
                   ModelKind::graph_regressor})
        if (to_string(k) == name) return k;
    throw std::invalid_argument("unknown base model kind '" + name + "'");
}

void BaseModelSpec::validate() const {
    switch (kind) {
        case ModelKind::persistence: break;
        case ModelKind::autoregressive:
            if (order < 1) throw ConfigError("pool.order", "p must be >= 1");
            break;
        case ModelKind::boosted_stumps:
            if (rounds < 1) throw ConfigError("pool.rounds", "must be >= 1");
            if (!(shrinkage > 0.0 && shrinkage <= 1.0)) throw ConfigError("pool.shrinkage", "must lie in (0, 1]");
            break;
        case ModelKind::recurrent:
        case ModelKind::graph_regressor:
            if (kind == ModelKind::recurrent && hidden_dim < 1) throw ConfigError("pool.hidden_dim", "must be >= 1");
            if (kind == ModelKind::graph_regressor) encoder.validate("pool.encoder");
            if (epochs < 1) throw ConfigError("pool.epochs", "must be >= 1");
            if (batch_size < 1) throw ConfigError("pool.batch_size", "must be >= 1");
            if (!(learning_rate > 0.0)) throw ConfigError("pool.learning_rate", "must be positive");
            break;
    }
}

std::string BaseModelSpec::label() const {
    if (!name.empty()) return name;
    switch (kind) {
        case ModelKind::persistence: return "Persistence";
        case ModelKind::autoregressive: return "AR(" + std::to_string(order) + ")";
        case ModelKind::boosted_stumps: return "BoostedStumps";
        case ModelKind::recurrent: return "GRU";
        case ModelKind::graph_regressor: return "GraphNet";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Graph grouping

std::vector<GraphBatch> group_by_time(const std::vector<data::WindowSample>& samples,
                                      const data::WindFarmGraph& graph) {
    std::map<std::size_t, GraphBatch> by_time;
    std::map<std::size_t, std::vector<bool>> seen;
    for (const auto& s : samples) {
        const std::size_t node = graph.index_of(s.farm_id);
        auto& b = by_time[s.t_index];
        auto& mask = seen[s.t_index];
        if (b.windows.empty()) {
            b.t_index = s.t_index;
            b.windows.resize(graph.size());
            b.targets.resize(graph.size());
            mask.assign(graph.size(), false);
        }
        b.windows[node] = s.window;
        b.targets[node] = s.target;
        mask[node] = true;
    }
    std::vector<GraphBatch> out;
    for (auto& [t, b] : by_time)
        if (std::all_of(seen[t].begin(), seen[t].end(), [](bool x) { return x; })) out.push_back(std::move(b));
    return out;
}

// ---------------------------------------------------------------------------
// Autoregressive

namespace {

ArModel fit_ar(std::size_t p, const std::vector<data::WindowSample>& train) {
    const std::size_t w = train.front().window.size();
    if (w < p) throw LengthError("autoregressive fit: window shorter than order", p, w);
    const auto n = static_cast<Eigen::Index>(train.size());
    const auto cols = static_cast<Eigen::Index>(p + 1);
    if (n < cols) throw std::runtime_error("autoregressive fit: fewer samples than parameters; use a smaller order p");
    Eigen::MatrixXd x(n, cols);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& s = train[static_cast<std::size_t>(i)];
        x(i, 0) = 1.0;
        for (std::size_t j = 0; j < p; ++j) x(i, static_cast<Eigen::Index>(j + 1)) = s.window[w - 1 - j];
        y(i) = s.target;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    qr.setThreshold(1e-10);
    if (qr.rank() < cols)
        throw std::runtime_error("autoregressive fit: singular least-squares system (rank " + std::to_string(qr.rank()) +
                                 " < " + std::to_string(cols) + "); use a smaller order p");
    const Eigen::VectorXd beta = qr.solve(y);
    ArModel m;
    m.intercept = beta(0);
    for (std::size_t j = 0; j < p; ++j) m.coefficients.push_back(beta(static_cast<Eigen::Index>(j + 1)));
    return m;
}

double predict_ar(const ArModel& m, const Vec& window) {
    double y = m.intercept;
    const std::size_t w = window.size();
    for (std::size_t j = 0; j < m.coefficients.size(); ++j) y += m.coefficients[j] * window[w - 1 - j];
    return y;
}

// ---------------------------------------------------------------------------
// Boosted stumps

double predict_stumps(const StumpEnsemble& e, const Vec& window) {
    double y = e.base;
    for (const auto& s : e.stumps) y += window[s.feature] <= s.threshold ? s.left : s.right;
    return y;
}

StumpEnsemble fit_stumps(const BaseModelSpec& spec, const std::vector<data::WindowSample>& train,
                         TrainingSummary& summary) {
    const std::size_t n = train.size();
    const std::size_t features = train.front().window.size();
    StumpEnsemble e;
    double mean = 0.0;
    for (const auto& s : train) mean += s.target;
    mean /= static_cast<double>(n);
    e.base = mean;

    std::vector<std::vector<std::size_t>> order(features, std::vector<std::size_t>(n));
    for (std::size_t f = 0; f < features; ++f) {
        std::iota(order[f].begin(), order[f].end(), 0);
        std::stable_sort(order[f].begin(), order[f].end(),
                         [&](std::size_t a, std::size_t b) { return train[a].window[f] < train[b].window[f]; });
    }
    std::vector<double> residual(n);
    for (std::size_t i = 0; i < n; ++i) residual[i] = train[i].target - mean;

    auto mse = [&] {
        double acc = 0.0;
        for (double r : residual) acc += r * r;
        return acc / static_cast<double>(n);
    };

    for (std::size_t round = 0; round < spec.rounds; ++round) {
        const double total = std::accumulate(residual.begin(), residual.end(), 0.0);
        Stump best{0, std::numeric_limits<double>::infinity(), total / static_cast<double>(n),
                   total / static_cast<double>(n)};
        double best_gain = 0.0;
        for (std::size_t f = 0; f < features; ++f) {
            const auto& ord = order[f];
            double left_sum = 0.0;
            for (std::size_t i = 0; i + 1 < n; ++i) {
                left_sum += residual[ord[i]];
                const double xv = train[ord[i]].window[f];
                const double xn = train[ord[i + 1]].window[f];
                if (!(xv < xn)) continue;
                const double nl = static_cast<double>(i + 1);
                const double nr = static_cast<double>(n - i - 1);
                const double right_sum = total - left_sum;
                const double gain = left_sum * left_sum / nl + right_sum * right_sum / nr -
                                    total * total / static_cast<double>(n);
                if (gain > best_gain) {
                    best_gain = gain;
                    best = Stump{f, 0.5 * (xv + xn), left_sum / nl, right_sum / nr};
                }
            }
        }
        best.left *= spec.shrinkage;
        best.right *= spec.shrinkage;
        for (std::size_t i = 0; i < n; ++i)
            residual[i] -= train[i].window[best.feature] <= best.threshold ? best.left : best.right;
        e.stumps.push_back(best);
        summary.loss_trace.push_back(mse());
    }
    summary.iterations = spec.rounds;
    summary.final_loss = summary.loss_trace.back();
    return e;
}

// ---------------------------------------------------------------------------
// Recurrent (GRU cell)

ParamSet init_recurrent(const BaseModelSpec& spec, Rng& rng) {
    ParamSet p;
    const std::size_t h = spec.hidden_dim;
    p.add_linear("gru.z", 1 + h, h, rng);
    p.add_linear("gru.r", 1 + h, h, rng);
    p.add_linear("gru.h", 1 + h, h, rng);
    // Zero head: an untrained model starts as persistence.
    p.add("head.w", 1, h);
    p.add("head.b", 1, 1);
    return p;
}

Var recurrent_forward(Tape& tape, Var window, const ParamSet& p, std::size_t hidden) {
    Var h = tape.constant(Vec(hidden, 0.0));
    const std::size_t w = window.size();
    for (std::size_t t = 0; t < w; ++t) {
        Var x = diff::slice(window, t, 1);
        Var xh = diff::concat(x, h);
        Var z = diff::sigmoid(diff::linear(xh, p, "gru.z"));
        Var r = diff::sigmoid(diff::linear(xh, p, "gru.r"));
        Var cand = diff::tanh(diff::linear(diff::concat(x, diff::mul(r, h)), p, "gru.h"));
        // h' = h + z * (cand - h)
        h = diff::add(h, diff::mul(z, diff::sub(cand, h)));
    }
    Var last = diff::slice(window, w - 1, 1);
    return diff::add(last, diff::linear(h, p, "head"));
}

// ---------------------------------------------------------------------------
// Shared gradient trainer

/// `batch_loss` builds the mean loss of the given sample indices on the tape.
using BatchLoss = std::function<Var(Tape&, std::span<const std::size_t>)>;

void train_network(ParamSet& params, std::size_t sample_count, const BaseModelSpec& spec, Rng& rng,
                   const BatchLoss& batch_loss, TrainingSummary& summary) {
    diff::Optimizer opt(diff::OptimConfig{spec.learning_rate, diff::OptimizerKind::adam});
    std::vector<std::size_t> idx(sample_count);
    std::iota(idx.begin(), idx.end(), 0);
    const std::size_t per_epoch =
        spec.samples_per_epoch == 0 ? sample_count : std::min(spec.samples_per_epoch, sample_count);
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t epoch = 0; epoch < spec.epochs; ++epoch) {
        std::shuffle(idx.begin(), idx.end(), rng.engine());
        double total = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < per_epoch; start += spec.batch_size) {
            const std::size_t len = std::min(spec.batch_size, per_epoch - start);
            Tape tape;
            Var loss = batch_loss(tape, std::span<const std::size_t>(idx.data() + start, len));
            total += loss.scalar();
            ++batches;
            opt.step(params, tape.backward(loss).params(params), diff::Direction::descent);
        }
        const double epoch_loss = total / static_cast<double>(batches);
        summary.loss_trace.push_back(epoch_loss);
        summary.iterations = epoch + 1;
        summary.final_loss = epoch_loss;
        if (epoch > 0 && prev - epoch_loss < spec.plateau_tolerance * prev) break;
        prev = epoch_loss;
    }
}

embed::StseConfig stse_config(const BaseModelSpec& spec) { return embed::StseConfig{spec.encoder, spec.gnn_layers}; }

void require_window(const FittedBase& model, const Vec& window) {
    if (window.size() != model.window)
        throw DimensionError("predict_base(" + model.spec.label() + "): window length", model.window, window.size());
}

}  // namespace

diff::ParamSet init_graph_regressor(const BaseModelSpec& spec, std::uint64_t seed) {
    Rng rng(seed);
    ParamSet p = embed::init_stse(stse_config(spec), rng);
    p.add("head.w", 1, spec.encoder.output_dim);
    p.add("head.b", 1, 1);
    return p;
}

std::vector<Var> graph_regressor_forward(Tape& tape, const data::WindFarmGraph& graph, std::span<const Var> windows,
                                         const ParamSet& params, const embed::StseConfig& cfg) {
    std::vector<Var> h = embed::compute_stse(tape, graph, windows, params, cfg);
    std::vector<Var> out;
    out.reserve(h.size());
    for (std::size_t v = 0; v < h.size(); ++v) {
        Var last = diff::slice(windows[v], windows[v].size() - 1, 1);
        out.push_back(diff::add(last, diff::linear(h[v], params, "head")));
    }
    return out;
}

// ---------------------------------------------------------------------------

FittedBase fit_base(const BaseModelSpec& spec, const std::vector<data::WindowSample>& train,
                    const data::WindFarmGraph* graph, std::uint64_t seed) {
    spec.validate();
    if (train.empty()) throw std::invalid_argument("fit_base(" + spec.label() + "): empty training set");
    const std::size_t w = train.front().window.size();
    for (const auto& s : train)
        if (s.window.size() != w) throw DimensionError("fit_base: ragged windows", w, s.window.size());

    FittedBase model;
    model.spec = spec;
    model.window = w;
    Rng rng(derive_seed(seed, "base." + to_string(spec.kind)));

    switch (spec.kind) {
        case ModelKind::persistence:
            break;
        case ModelKind::autoregressive: {
            ArModel ar = fit_ar(spec.order, train);
            double sse = 0.0;
            for (const auto& s : train) {
                const double e = predict_ar(ar, s.window) - s.target;
                sse += e * e;
            }
            model.summary.final_loss = sse / static_cast<double>(train.size());
            model.summary.iterations = 1;
            model.params = std::move(ar);
            break;
        }
        case ModelKind::boosted_stumps:
            model.params = fit_stumps(spec, train, model.summary);
            break;
        case ModelKind::recurrent: {
            ParamSet p = init_recurrent(spec, rng);
            auto loss = [&](Tape& tape, std::span<const std::size_t> batch) {
                std::vector<Var> terms;
                for (std::size_t i : batch) {
                    Var pred = recurrent_forward(tape, tape.constant(train[i].window), p, spec.hidden_dim);
                    terms.push_back(diff::square(diff::affine(pred, 1.0, -train[i].target)));
                }
                return diff::mean(diff::concat(terms));
            };
            train_network(p, train.size(), spec, rng, loss, model.summary);
            model.params = std::move(p);
            break;
        }
        case ModelKind::graph_regressor: {
            if (!graph) throw std::invalid_argument("fit_base(graph_regressor): a farm graph is required");
            const auto groups = group_by_time(train, *graph);
            if (groups.empty())
                throw std::invalid_argument("fit_base(graph_regressor): no time index covers every farm");
            ParamSet p = init_graph_regressor(spec, rng.engine()());
            const auto cfg = stse_config(spec);
            auto loss = [&](Tape& tape, std::span<const std::size_t> batch) {
                std::vector<Var> terms;
                for (std::size_t i : batch) {
                    std::vector<Var> windows;
                    for (const auto& wv : groups[i].windows) windows.push_back(tape.constant(wv));
                    auto preds = graph_regressor_forward(tape, *graph, windows, p, cfg);
                    for (std::size_t v = 0; v < preds.size(); ++v)
                        terms.push_back(diff::square(diff::affine(preds[v], 1.0, -groups[i].targets[v])));
                }
                return diff::mean(diff::concat(terms));
            };
            BaseModelSpec per_group = spec;
            // One step consumes every farm of a time index.
            per_group.batch_size = std::max<std::size_t>(1, spec.batch_size / graph->size());
            per_group.samples_per_epoch =
                spec.samples_per_epoch == 0 ? 0 : std::max<std::size_t>(1, spec.samples_per_epoch / graph->size());
            train_network(p, groups.size(), per_group, rng, loss, model.summary);
            model.params = std::move(p);
            break;
        }
    }
    return model;
}

std::vector<double> predict_graph(const FittedBase& model, const GraphContext& context) {
    if (model.spec.kind != ModelKind::graph_regressor)
        throw std::invalid_argument("predict_graph: model is not a graph_regressor");
    if (!context.graph) throw std::invalid_argument("predict_graph: context has no graph");
    if (context.windows.size() != context.graph->size())
        throw DimensionError("predict_graph: windows vs nodes", context.graph->size(), context.windows.size());
    for (const auto& w : context.windows) require_window(model, w);
    const auto& p = std::get<ParamSet>(model.params);
    Tape tape;
    std::vector<Var> windows;
    for (const auto& w : context.windows) windows.push_back(tape.constant(w));
    std::vector<double> out;
    for (Var v : graph_regressor_forward(tape, *context.graph, windows, p, stse_config(model.spec)))
        out.push_back(v.scalar());
    return out;
}

double predict_base(const FittedBase& model, const data::WindowSample& sample, const GraphContext* context) {
    require_window(model, sample.window);
    switch (model.spec.kind) {
        case ModelKind::persistence:
            return sample.window.back();
        case ModelKind::autoregressive:
            return predict_ar(std::get<ArModel>(model.params), sample.window);
        case ModelKind::boosted_stumps:
            return predict_stumps(std::get<StumpEnsemble>(model.params), sample.window);
        case ModelKind::recurrent: {
            Tape tape;
            return recurrent_forward(tape, tape.constant(sample.window), std::get<ParamSet>(model.params),
                                     model.spec.hidden_dim)
                .scalar();
        }
        case ModelKind::graph_regressor: {
            if (!context || !context->graph)
                throw std::invalid_argument("predict_base(graph_regressor): graph context required");
            const std::size_t node = context->graph->index_of(sample.farm_id);
            if (context->windows.at(node) != sample.window)
                throw std::invalid_argument("predict_base(graph_regressor): context window differs from sample");
            return predict_graph(model, *context)[node];
        }
    }
    throw std::logic_error("predict_base: unknown kind");
}

std::vector<double> record_losses(const std::vector<FittedBase>& pool, const data::WindowSample& sample, double truth,
                                  LossHistory& history, const GraphContext* context, LossKind kind) {
    if (pool.size() != history.models()) throw DimensionError("record_losses: pool vs history", history.models(), pool.size());
    std::vector<double> row;
    row.reserve(pool.size());
    for (const auto& m : pool) row.push_back(pointwise_loss(predict_base(m, sample, context), truth, kind));
    history.push(row);
    return row;
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

json conv_to_json(const embed::ConvStackConfig& c) {
    return {{"channels", c.channels}, {"kernel_size", c.kernel_size}, {"dilations", c.dilations},
            {"output_dim", c.output_dim}};
}

embed::ConvStackConfig conv_from_json(const json& j, const std::string& field) {
    static const std::set<std::string> keys{"channels", "kernel_size", "dilations", "output_dim"};
    for (const auto& [k, _] : j.items())
        if (!keys.count(k)) throw ConfigError(field + "." + k, "unknown key");
    embed::ConvStackConfig c;
    c.channels = j.value("channels", c.channels);
    c.kernel_size = j.value("kernel_size", c.kernel_size);
    c.dilations = j.value("dilations", c.dilations);
    c.output_dim = j.value("output_dim", c.output_dim);
    return c;
}

}  // namespace

json spec_to_json(const BaseModelSpec& s) {
    json j{{"kind", to_string(s.kind)}};
    if (!s.name.empty()) j["name"] = s.name;
    switch (s.kind) {
        case ModelKind::persistence: break;
        case ModelKind::autoregressive: j["order"] = s.order; break;
        case ModelKind::boosted_stumps:
            j["rounds"] = s.rounds;
            j["shrinkage"] = s.shrinkage;
            break;
        case ModelKind::recurrent:
        case ModelKind::graph_regressor:
            if (s.kind == ModelKind::recurrent) j["hidden_dim"] = s.hidden_dim;
            if (s.kind == ModelKind::graph_regressor) {
                j["gnn_layers"] = s.gnn_layers;
                j["encoder"] = conv_to_json(s.encoder);
            }
            j["epochs"] = s.epochs;
            j["samples_per_epoch"] = s.samples_per_epoch;
            j["batch_size"] = s.batch_size;
            j["learning_rate"] = s.learning_rate;
            j["plateau_tolerance"] = s.plateau_tolerance;
            break;
    }
    return j;
}

BaseModelSpec spec_from_json(const json& j, const std::string& field) {
    static const std::set<std::string> keys{"kind",       "name",       "order",          "rounds",
                                            "shrinkage",  "hidden_dim", "gnn_layers",     "encoder",
                                            "epochs",     "samples_per_epoch", "batch_size", "learning_rate",
                                            "plateau_tolerance"};
    if (!j.is_object()) throw ConfigError(field, "must be an object");
    for (const auto& [k, _] : j.items())
        if (!keys.count(k)) throw ConfigError(field + "." + k, "unknown key");
    BaseModelSpec s;
    try {
        s.kind = model_kind_from_string(j.at("kind").get<std::string>());
    } catch (const std::exception& e) {
        throw ConfigError(field + ".kind", e.what());
    }
    s.name = j.value("name", s.name);
    s.order = j.value("order", s.order);
    s.rounds = j.value("rounds", s.rounds);
    s.shrinkage = j.value("shrinkage", s.shrinkage);
    s.hidden_dim = j.value("hidden_dim", s.hidden_dim);
    s.gnn_layers = j.value("gnn_layers", s.gnn_layers);
    if (j.contains("encoder")) s.encoder = conv_from_json(j.at("encoder"), field + ".encoder");
    s.epochs = j.value("epochs", s.epochs);
    s.samples_per_epoch = j.value("samples_per_epoch", s.samples_per_epoch);
    s.batch_size = j.value("batch_size", s.batch_size);
    s.learning_rate = j.value("learning_rate", s.learning_rate);
    s.plateau_tolerance = j.value("plateau_tolerance", s.plateau_tolerance);
    return s;
}

json to_json(const FittedBase& m) {
    json j{{"format", "emgrl.basemodel"},
           {"version", 1},
           {"spec", spec_to_json(m.spec)},
           {"window", m.window},
           {"summary",
            {{"final_loss", diff::encode_double(m.summary.final_loss)},
             {"iterations", m.summary.iterations},
             {"loss_trace", encode_vec(m.summary.loss_trace)}}}};
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, ArModel>) {
                j["ar"] = {{"intercept", diff::encode_double(p.intercept)}, {"coefficients", encode_vec(p.coefficients)}};
            } else if constexpr (std::is_same_v<T, StumpEnsemble>) {
                json stumps = json::array();
                for (const auto& s : p.stumps)
                    stumps.push_back({{"feature", s.feature},
                                      {"threshold", diff::encode_double(s.threshold)},
                                      {"left", diff::encode_double(s.left)},
                                      {"right", diff::encode_double(s.right)}});
                j["stumps"] = {{"base", diff::encode_double(p.base)}, {"stumps", std::move(stumps)}};
            } else if constexpr (std::is_same_v<T, ParamSet>) {
                j["params"] = diff::to_json(p);
            }
        },
        m.params);
    return j;
}

FittedBase fitted_from_json(const json& j) {
    if (j.value("format", "") != "emgrl.basemodel" || j.value("version", 0) != 1)
        throw std::runtime_error("fitted_from_json: not an emgrl.basemodel v1 document");
    FittedBase m;
    m.spec = spec_from_json(j.at("spec"), "spec");
    m.window = j.at("window").get<std::size_t>();
    const auto& s = j.at("summary");
    m.summary.final_loss = diff::decode_double(s.at("final_loss").get<std::string>());
    m.summary.iterations = s.at("iterations").get<std::size_t>();
    m.summary.loss_trace = decode_vec(s.at("loss_trace"));
    switch (m.spec.kind) {
        case ModelKind::persistence: break;
        case ModelKind::autoregressive: {
            ArModel ar;
            ar.intercept = diff::decode_double(j.at("ar").at("intercept").get<std::string>());
            ar.coefficients = decode_vec(j.at("ar").at("coefficients"));
            m.params = std::move(ar);
            break;
        }
        case ModelKind::boosted_stumps: {
            StumpEnsemble e;
            e.base = diff::decode_double(j.at("stumps").at("base").get<std::string>());
            for (const auto& js : j.at("stumps").at("stumps"))
                e.stumps.push_back(Stump{js.at("feature").get<std::size_t>(),
                                         diff::decode_double(js.at("threshold").get<std::string>()),
                                         diff::decode_double(js.at("left").get<std::string>()),
                                         diff::decode_double(js.at("right").get<std::string>())});
            m.params = std::move(e);
            break;
        }
        case ModelKind::recurrent:
        case ModelKind::graph_regressor:
            m.params = diff::params_from_json(j.at("params"));
            break;
    }
    return m;
}

}  // namespace emgrl::base
