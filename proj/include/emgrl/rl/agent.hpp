#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "emgrl/base/loss_history.hpp"
#include "emgrl/diff/optim.hpp"
#include "emgrl/diff/params.hpp"
#include "emgrl/diff/tape.hpp"
#include "emgrl/embed/embedding.hpp"
#include "emgrl/rl/replay.hpp"

namespace emgrl::rl {

using diff::ParamSet;
using diff::Tape;
using diff::Var;
using diff::Vec;

struct ActorCriticConfig {
    std::size_t models = 0;  // N; 0 means "take it from the pool"
    double actor_learning_rate = 1e-3;
    double critic_learning_rate = 1e-3;
    diff::OptimizerKind optimizer = diff::OptimizerKind::adam;
    double discount = 0.9;
    std::size_t batch_size = 32;
    std::size_t capacity = 4096;
    std::size_t steps = 20000;
    /// Logit noise decays linearly from start to end over the run.
    double noise_start = 0.3;
    double noise_end = 0.01;
    /// Sampling starts once the buffer holds warmup_factor * batch_size transitions.
    std::size_t warmup_factor = 4;
    std::size_t actor_hidden = 32;
    std::size_t critic_hidden = 64;
    base::LossKind reward = base::LossKind::absolute;
    /// One agent for all farms (round-robin), or one per farm.
    bool shared_agent = true;

    void validate(const std::string& field = "agent") const;
    double noise_at(std::size_t step) const;
};

/// Actor: `l0` -> tanh -> `l1` logits. Critic: `l0` over [state || action]
/// -> tanh -> `l1` scalar.
struct AgentParams {
    ParamSet actor;
    ParamSet critic;

    std::size_t state_dim() const;
    std::size_t action_dim() const;
    bool operator==(const AgentParams&) const = default;
};

/// `zero` initializes every block to 0 (uniform actor, zero critic).
AgentParams init_agent(std::size_t state_dim, const ActorCriticConfig& cfg, std::uint64_t seed, bool zero = false);

Var actor_logits(Tape& tape, Var state, const ParamSet& actor);
/// softmax(logits + noise); `noise` may be invalid for none.
Var actor_forward(Tape& tape, Var state, const ParamSet& actor, Var noise = {});
Var critic_forward(Tape& tape, Var state, Var action, const ParamSet& critic);

/// Weights for one state. Gaussian logit noise of scale `noise_scale` drawn
/// from `rng` when both are set.
Vec actor_forward(const embed::StateEmbedding& state, const ParamSet& actor, double noise_scale = 0.0,
                  Rng* rng = nullptr);
double critic_forward(const embed::StateEmbedding& state, std::span<const double> action, const ParamSet& critic);

/// Convex combination sum_i a_i * forecast_i.
double ensemble_predict(std::span<const double> forecasts, std::span<const double> weights);
/// -|y - truth| or -(y - truth)^2.
double compute_reward(double prediction, double truth, base::LossKind kind = base::LossKind::absolute);
/// Shannon entropy in nats.
double weight_entropy(std::span<const double> weights);

/// One descent step on mean (Q(s,a) - target)^2 with target
/// r + discount * Q(s', pi(s')) held constant. Returns the pre-step loss.
double critic_update(std::span<const Transition* const> batch, AgentParams& agent, const ActorCriticConfig& cfg,
                     diff::Optimizer& optimizer);
/// Mean squared TD error without updating.
double td_loss(std::span<const Transition* const> batch, const AgentParams& agent, const ActorCriticConfig& cfg);
/// One ascent step on mean Q(s, pi(s)) in the actor parameters. Returns the
/// pre-step objective.
double actor_update(std::span<const Transition* const> batch, AgentParams& agent, diff::Optimizer& optimizer);

// ---------------------------------------------------------------------------
// Training over per-farm streams

struct AgentStep {
    embed::StateEmbedding state;
    std::vector<double> forecasts;  // one per base model
    double truth = 0.0;
};

/// One farm's chronological steps; one episode.
struct FarmStream {
    std::string farm_id;
    std::vector<AgentStep> steps;
};

struct TrainLogRow {
    std::size_t step = 0;
    std::string farm_id;
    double reward = 0.0;
    double td_loss = 0.0;  // NaN before the warm-up completes
    double entropy = 0.0;
};

struct TrainResult {
    AgentParams params;                 // the shared agent, or the first farm's when per-farm
    std::vector<AgentParams> per_farm;  // filled when shared_agent is false, in stream order
    std::vector<TrainLogRow> log;

    const AgentParams& agent_for(std::size_t stream) const;
};

/// Throws when a stream is empty, farm ids repeat, t_index does not
/// increase, or state/forecast sizes disagree; messages name the farm and index.
void validate_streams(std::span<const FarmStream> streams, std::size_t models);

/// Farms are visited round-robin, one step each; a farm whose stream ends
/// stores a terminal transition and restarts from its first step.
TrainResult train(std::span<const FarmStream> streams, const ActorCriticConfig& cfg, std::uint64_t seed,
                  const AgentParams* initial = nullptr);

void write_train_log(std::ostream& out, std::span<const TrainLogRow> log);

// Checkpoint: a single ParamSet with blocks under `actor.` and `critic.`.
ParamSet to_paramset(const AgentParams& agent);
AgentParams agent_from_paramset(const ParamSet& params);
void save_agent(const AgentParams& agent, const std::filesystem::path& path);
AgentParams load_agent(const std::filesystem::path& path);

nlohmann::json config_to_json(const ActorCriticConfig& cfg);
ActorCriticConfig config_from_json(const nlohmann::json& doc, const std::string& field = "agent");

}  // namespace emgrl::rl
