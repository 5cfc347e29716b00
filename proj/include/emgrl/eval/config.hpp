#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "emgrl/base/models.hpp"
#include "emgrl/data/csv.hpp"
#include "emgrl/data/synthetic.hpp"
#include "emgrl/embed/embedding.hpp"
#include "emgrl/rl/agent.hpp"

namespace emgrl::eval {

enum class CorpusSource { synthetic, files };

struct CorpusConfig {
    CorpusSource source = CorpusSource::synthetic;
    data::SyntheticConfig synthetic;
    /// Corpus seed; derived from the run seed when absent.
    std::optional<std::uint64_t> synthetic_seed;
    std::vector<std::filesystem::path> series;
    std::filesystem::path metadata;
    data::SchemaDescriptor schema;
};

struct SplitConfig {
    /// First test timestamp (epoch seconds); when absent the boundary is the
    /// timestamp at floor(train_fraction * length).
    std::optional<std::int64_t> boundary;
    double train_fraction = 0.7;
};

/// Next-value pretraining of the spatio-temporal encoder and next-loss
/// pretraining of the loss encoder.
struct PretrainConfig {
    std::size_t epochs = 4;
    std::size_t samples_per_epoch = 2000;
    std::size_t batch_size = 16;
    double learning_rate = 5e-3;
};

struct RunConfig {
    CorpusConfig corpus;
    SplitConfig split;
    std::size_t window = 24;
    std::size_t horizon = 1;
    std::size_t graph_k = 3;
    embed::StseConfig stse;
    embed::MleConfig mle;
    PretrainConfig pretrain;
    std::vector<base::BaseModelSpec> pool = default_pool();
    rl::ActorCriticConfig agent;
    std::size_t repetitions = 1;
    std::uint64_t seed = 0;
    /// Report metrics on the original power scale instead of [0, 1].
    bool denormalize = false;
    std::filesystem::path output_dir;

    static std::vector<base::BaseModelSpec> default_pool();

    /// Fills derived fields (agent.models from the pool size).
    void resolve();
    /// Throws ConfigError naming the offending field.
    void validate() const;
    std::uint64_t corpus_seed() const;
};

/// Unknown keys anywhere are rejected with ConfigError naming the key path.
RunConfig run_config_from_json(const nlohmann::json& doc);
/// Canonical fully resolved form.
nlohmann::json to_json(const RunConfig& config);
RunConfig load_run_config(const std::filesystem::path& path);

nlohmann::json synthetic_to_json(const data::SyntheticConfig& cfg);
data::SyntheticConfig synthetic_from_json(const nlohmann::json& doc, const std::string& field);

/// FNV-1a of the canonical JSON dump, as 16 hex digits.
std::string config_fingerprint(const RunConfig& config);

}  // namespace emgrl::eval
