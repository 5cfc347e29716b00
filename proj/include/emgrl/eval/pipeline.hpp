#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "emgrl/base/models.hpp"
#include "emgrl/data/frame.hpp"
#include "emgrl/data/graph.hpp"
#include "emgrl/data/synthetic.hpp"
#include "emgrl/eval/config.hpp"
#include "emgrl/eval/metrics.hpp"
#include "emgrl/eval/report.hpp"
#include "emgrl/rl/agent.hpp"

namespace emgrl::eval {

/// Loaded, split, normalized and windowed corpus. Every per-node vector is in
/// graph node order and all nodes share one time grid, so sample k of every
/// node has the same t_index.
struct PreparedData {
    data::WindFarmGraph graph;
    std::vector<data::Scaler> scalers;  // fitted on the training split
    std::vector<std::vector<data::WindowSample>> train;
    std::vector<std::vector<data::WindowSample>> test;
    std::size_t split_index = 0;        // raw index of the first test step
    std::vector<data::RegimeKind> regimes;  // synthetic corpora only; raw time order

    std::size_t nodes() const noexcept { return graph.size(); }
    /// All training samples, node-major.
    std::vector<data::WindowSample> train_samples() const;
};

/// Loads the corpus and validates everything needed before training starts.
PreparedData prepare_data(const RunConfig& config);

/// Base-model forecasts, spatio-temporal embeddings and truths of one split.
struct SplitFeatures {
    std::vector<std::vector<std::vector<double>>> forecasts;  // [node][k][model]
    std::vector<std::vector<diff::Vec>> stse;                 // [node][k]
    std::vector<std::vector<double>> truth;                   // [node][k]
};

SplitFeatures split_features(const std::vector<base::FittedBase>& pool,
                             const std::vector<std::vector<data::WindowSample>>& split,
                             const data::WindFarmGraph& graph, const diff::ParamSet& stse_params,
                             const embed::StseConfig& stse);

/// Agent streams for one split. Step k sees losses of samples k' <= k - horizon
/// (the most recent mle.horizon of them), preceded by `carried` rows per node.
/// Steps without any known loss are skipped.
std::vector<rl::FarmStream> build_streams(const SplitFeatures& features,
                                          const std::vector<std::vector<data::WindowSample>>& split,
                                          const data::WindFarmGraph& graph, const diff::ParamSet& mle_params,
                                          const RunConfig& config,
                                          const std::vector<std::vector<std::vector<double>>>& carried = {});

/// Per-node loss rows of a split, in sample order.
std::vector<std::vector<std::vector<double>>> loss_rows(const SplitFeatures& features);

/// Per-coordinate affine map applied to state embeddings before the agent.
struct StateScaler {
    std::vector<double> mean;
    std::vector<double> scale;  // 1 / standard deviation; 1 for constant coordinates

    /// Fitted on every step of the given streams.
    static StateScaler fit(const std::vector<rl::FarmStream>& streams);
    void apply(embed::StateEmbedding& state) const;
    void apply(std::vector<rl::FarmStream>& streams) const;
};

/// Everything needed to forecast with a trained pipeline.
struct TrainedPipeline {
    RunConfig config;
    std::uint64_t seed = 0;
    std::vector<base::FittedBase> pool;
    diff::ParamSet stse;
    diff::ParamSet mle;
    StateScaler state_scaler;
    rl::TrainResult agent;

    void save(const std::filesystem::path& dir) const;
    static TrainedPipeline load(const std::filesystem::path& dir);
};

TrainedPipeline train_pipeline(const RunConfig& config, const PreparedData& data, std::uint64_t seed);

/// Encoder, GNN and readout trained on next-value prediction; the returned set
/// has no readout blocks.
diff::ParamSet pretrain_stse(const RunConfig& config, const PreparedData& data,
                             const std::vector<base::FittedBase>& pool, std::uint64_t seed);
/// Loss encoder trained to predict the next loss row; readout dropped.
diff::ParamSet pretrain_mle(const RunConfig& config, const std::vector<std::vector<std::vector<double>>>& rows,
                            std::size_t models, std::uint64_t seed);

/// Test-split forecasts of one node.
struct NodeTrace {
    std::string farm_id;
    std::vector<std::size_t> raw_index;            // raw time index of each target
    std::vector<std::vector<double>> weights;      // agent weights per step
    std::vector<std::vector<double>> forecasts;    // base forecasts per step
    std::vector<double> truth;
    std::vector<double> ensemble;
};

struct TrialOutcome {
    std::uint64_t seed = 0;
    std::vector<MetricResult> results;
    std::vector<NodeTrace> trace;
};

TrialOutcome evaluate_pipeline(const TrainedPipeline& pipeline, const PreparedData& data);

struct ExperimentResult {
    ForecastReport report;
    std::vector<TrialOutcome> trials;
    PreparedData data;
};

/// Fits, trains and evaluates `repetitions` seeded trials on one corpus.
ExperimentResult run_experiment(const RunConfig& config);

/// Seed of repetition r.
std::uint64_t repetition_seed(std::uint64_t master, std::size_t r);

/// Row labels used in reports.
inline constexpr const char* kUniformLabel = "Uniform";
inline constexpr const char* kEnsembleLabel = "EMGRL";
inline constexpr const char* kAllFarms = "all";

}  // namespace emgrl::eval
