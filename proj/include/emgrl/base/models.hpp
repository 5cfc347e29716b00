#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "emgrl/base/loss_history.hpp"
#include "emgrl/data/frame.hpp"
#include "emgrl/data/graph.hpp"
#include "emgrl/diff/params.hpp"
#include "emgrl/embed/embedding.hpp"

namespace emgrl::base {

enum class ModelKind { persistence, autoregressive, boosted_stumps, recurrent, graph_regressor };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

/// Hyperparameters for one pool member. Fields irrelevant to `kind` are ignored.
struct BaseModelSpec {
    ModelKind kind = ModelKind::persistence;
    std::string name;  // display name; derived from the kind when empty

    std::size_t order = 2;  // autoregressive p

    std::size_t rounds = 50;  // boosted_stumps
    double shrinkage = 0.1;

    std::size_t hidden_dim = 16;  // recurrent
    std::size_t gnn_layers = 1;   // graph_regressor
    embed::ConvStackConfig encoder;  // graph_regressor temporal encoder

    // Gradient-trained kinds.
    std::size_t epochs = 4;
    std::size_t samples_per_epoch = 2000;  // 0 uses every sample
    std::size_t batch_size = 16;
    double learning_rate = 5e-3;
    /// Stop early when an epoch improves the mean loss by less than this fraction.
    double plateau_tolerance = 1e-3;

    void validate() const;
    std::string label() const;
};

struct ArModel {
    double intercept = 0.0;
    /// coefficients[j] multiplies the value j steps before the window end.
    std::vector<double> coefficients;
};

/// Depth-1 regression tree: window[feature] <= threshold ? left : right.
struct Stump {
    std::size_t feature = 0;
    double threshold = 0.0;
    double left = 0.0;
    double right = 0.0;
};

struct StumpEnsemble {
    double base = 0.0;
    std::vector<Stump> stumps;  // already scaled by the shrinkage
};

struct TrainingSummary {
    double final_loss = 0.0;
    std::size_t iterations = 0;
    std::vector<double> loss_trace;  // per round (stumps) or per epoch (networks)
};

using LearnedParams = std::variant<std::monostate, ArModel, StumpEnsemble, diff::ParamSet>;

struct FittedBase {
    BaseModelSpec spec;
    std::size_t window = 0;
    LearnedParams params;
    TrainingSummary summary;
};

/// Windows of every farm at one time index, in graph node order.
struct GraphContext {
    const data::WindFarmGraph* graph = nullptr;
    std::vector<diff::Vec> windows;
};

/// Groups samples by t_index into complete per-node contexts; time indices
/// missing any farm are dropped. Returned in increasing t_index order, with
/// matching targets.
struct GraphBatch {
    std::size_t t_index = 0;
    std::vector<diff::Vec> windows;
    std::vector<double> targets;
};
std::vector<GraphBatch> group_by_time(const std::vector<data::WindowSample>& samples,
                                      const data::WindFarmGraph& graph);

/// Fits one pool member. `graph` is required for graph_regressor and ignored
/// otherwise. `seed` drives initialization and sample order of the trained
/// kinds.
FittedBase fit_base(const BaseModelSpec& spec, const std::vector<data::WindowSample>& train,
                    const data::WindFarmGraph* graph = nullptr, std::uint64_t seed = 0);

/// Forecast on the normalized scale. graph_regressor needs `context` holding
/// the windows of all farms at the sample's time index.
double predict_base(const FittedBase& model, const data::WindowSample& sample, const GraphContext* context = nullptr);

/// graph_regressor forecasts for every node of a context at once.
std::vector<double> predict_graph(const FittedBase& model, const GraphContext& context);

/// Appends |forecast_i - truth| (or the squared error) for every pool member.
/// Returns the appended row.
std::vector<double> record_losses(const std::vector<FittedBase>& pool, const data::WindowSample& sample, double truth,
                                  LossHistory& history, const GraphContext* context = nullptr,
                                  LossKind kind = LossKind::absolute);

// Checkpoints: header (kind, hyperparameters, window) plus the learned
// parameters. Doubles are hex-encoded.
nlohmann::json to_json(const FittedBase& model);
FittedBase fitted_from_json(const nlohmann::json& doc);
nlohmann::json spec_to_json(const BaseModelSpec& spec);
BaseModelSpec spec_from_json(const nlohmann::json& doc, const std::string& field = "pool");

/// Graph-regressor style parameters: encoder + GNN + linear head `head`.
diff::ParamSet init_graph_regressor(const BaseModelSpec& spec, std::uint64_t seed);
/// Shared forward used by the graph regressor and its trainer.
std::vector<diff::Var> graph_regressor_forward(diff::Tape& tape, const data::WindFarmGraph& graph,
                                               std::span<const diff::Var> windows, const diff::ParamSet& params,
                                               const embed::StseConfig& cfg);

}  // namespace emgrl::base
