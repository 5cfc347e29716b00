#include "emgrl/rl/agent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <set>
#include <stdexcept>

#include "emgrl/data/csv.hpp"
#include "emgrl/diff/serialize.hpp"
#include "emgrl/error.hpp"
#include "emgrl/rng.hpp"

namespace emgrl::rl {

void ActorCriticConfig::validate(const std::string& field) const {
    if (models == 0) throw ConfigError(field + ".models", "must be positive");
    if (!(actor_learning_rate > 0.0)) throw ConfigError(field + ".actor_learning_rate", "must be positive");
    if (!(critic_learning_rate > 0.0)) throw ConfigError(field + ".critic_learning_rate", "must be positive");
    if (!(discount >= 0.0 && discount < 1.0)) throw ConfigError(field + ".discount", "must lie in [0, 1)");
    if (batch_size == 0) throw ConfigError(field + ".batch_size", "must be positive");
    if (capacity < batch_size) throw ConfigError(field + ".capacity", "must be at least batch_size");
    if (warmup_factor == 0) throw ConfigError(field + ".warmup_factor", "must be positive");
    if (capacity < warmup_factor * batch_size)
        throw ConfigError(field + ".capacity", "must hold warmup_factor * batch_size transitions");
    if (!(noise_start >= 0.0)) throw ConfigError(field + ".noise_start", "must be non-negative");
    if (!(noise_end >= 0.0)) throw ConfigError(field + ".noise_end", "must be non-negative");
    if (actor_hidden == 0) throw ConfigError(field + ".actor_hidden", "must be positive");
    if (critic_hidden == 0) throw ConfigError(field + ".critic_hidden", "must be positive");
}

double ActorCriticConfig::noise_at(std::size_t step) const {
    if (steps <= 1) return noise_start;
    const double frac = static_cast<double>(std::min(step, steps - 1)) / static_cast<double>(steps - 1);
    return noise_start + (noise_end - noise_start) * frac;
}

std::size_t AgentParams::state_dim() const { return actor.at("l0.w").cols(); }
std::size_t AgentParams::action_dim() const { return actor.at("l1.w").rows(); }

AgentParams init_agent(std::size_t state_dim, const ActorCriticConfig& cfg, std::uint64_t seed, bool zero) {
    if (state_dim == 0) throw std::invalid_argument("init_agent: state dimension must be positive");
    if (cfg.models == 0) throw ConfigError("agent.models", "must be positive");
    Rng actor_rng(derive_seed(seed, "agent.actor"));
    Rng critic_rng(derive_seed(seed, "agent.critic"));
    AgentParams p;
    p.actor.add_linear("l0", state_dim, cfg.actor_hidden, actor_rng);
    p.actor.add_linear("l1", cfg.actor_hidden, cfg.models, actor_rng);
    p.critic.add_linear("l0", state_dim + cfg.models, cfg.critic_hidden, critic_rng);
    p.critic.add_linear("l1", cfg.critic_hidden, 1, critic_rng);
    if (zero) {
        p.actor.fill(0.0);
        p.critic.fill(0.0);
    }
    return p;
}

// ---------------------------------------------------------------------------

Var actor_logits(Tape& tape, Var state, const ParamSet& actor) {
    if (state.size() != actor.at("l0.w").cols())
        throw DimensionError("actor: state embedding", actor.at("l0.w").cols(), state.size());
    (void)tape;
    Var h = diff::tanh(diff::linear(state, actor, "l0"));
    return diff::linear(h, actor, "l1");
}

Var actor_forward(Tape& tape, Var state, const ParamSet& actor, Var noise) {
    Var logits = actor_logits(tape, state, actor);
    if (noise.valid()) logits = diff::add(logits, noise);
    return diff::softmax(logits);
}

Var critic_forward(Tape& tape, Var state, Var action, const ParamSet& critic) {
    (void)tape;
    const std::size_t expected = critic.at("l0.w").cols();
    if (state.size() + action.size() != expected)
        throw DimensionError("critic: state + action", expected, state.size() + action.size());
    Var h = diff::tanh(diff::linear(diff::concat(state, action), critic, "l0"));
    return diff::linear(h, critic, "l1");
}

namespace {

Vec hidden_tanh(std::span<const double> x, const ParamSet& p) {
    Vec h = diff::linear_forward(x, p.at("l0.w"), p.at("l0.b"));
    for (double& v : h) v = std::tanh(v);
    return h;
}

double critic_value(std::span<const double> state, std::span<const double> action, const ParamSet& critic) {
    const std::size_t expected = critic.at("l0.w").cols();
    if (state.size() + action.size() != expected)
        throw DimensionError("critic: state + action", expected, state.size() + action.size());
    Vec x(state.begin(), state.end());
    x.insert(x.end(), action.begin(), action.end());
    return diff::linear_forward(hidden_tanh(x, critic), critic.at("l1.w"), critic.at("l1.b"))[0];
}

Vec actor_value(std::span<const double> state, const ParamSet& actor, double noise_scale, Rng* rng) {
    if (state.size() != actor.at("l0.w").cols())
        throw DimensionError("actor: state embedding", actor.at("l0.w").cols(), state.size());
    Vec logits = diff::linear_forward(hidden_tanh(state, actor), actor.at("l1.w"), actor.at("l1.b"));
    if (noise_scale > 0.0 && rng)
        for (double& z : logits) z += noise_scale * rng->normal();
    return diff::softmax(logits);
}

}  // namespace

Vec actor_forward(const embed::StateEmbedding& state, const ParamSet& actor, double noise_scale, Rng* rng) {
    return actor_value(state.values(), actor, noise_scale, rng);
}

double critic_forward(const embed::StateEmbedding& state, std::span<const double> action, const ParamSet& critic) {
    return critic_value(state.values(), action, critic);
}

double ensemble_predict(std::span<const double> forecasts, std::span<const double> weights) {
    if (forecasts.size() != weights.size())
        throw DimensionError("ensemble_predict: forecasts vs weights", weights.size(), forecasts.size());
    if (forecasts.empty()) throw std::invalid_argument("ensemble_predict: empty pool");
    double y = 0.0;
    for (std::size_t i = 0; i < forecasts.size(); ++i) y += weights[i] * forecasts[i];
    return y;
}

double compute_reward(double prediction, double truth, base::LossKind kind) {
    return -base::pointwise_loss(prediction, truth, kind);
}

double weight_entropy(std::span<const double> weights) {
    double h = 0.0;
    for (double w : weights)
        if (w > 0.0) h -= w * std::log(w);
    return h;
}

// ---------------------------------------------------------------------------

namespace {

Vec td_targets(std::span<const Transition* const> batch, const AgentParams& agent, const ActorCriticConfig& cfg) {
    Vec targets;
    targets.reserve(batch.size());
    for (const Transition* t : batch) {
        double y = t->reward;
        if (!t->terminal && cfg.discount > 0.0) {
            const Vec next = t->next_state.values();
            const Vec a_next = actor_value(next, agent.actor, 0.0, nullptr);
            y += cfg.discount * critic_value(next, a_next, agent.critic);
        }
        targets.push_back(y);
    }
    return targets;
}

}  // namespace

double td_loss(std::span<const Transition* const> batch, const AgentParams& agent, const ActorCriticConfig& cfg) {
    if (batch.empty()) throw std::invalid_argument("td_loss: empty batch");
    const Vec targets = td_targets(batch, agent, cfg);
    double acc = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const double e = critic_value(batch[i]->state.values(), batch[i]->action, agent.critic) - targets[i];
        acc += e * e;
    }
    return acc / static_cast<double>(batch.size());
}

double critic_update(std::span<const Transition* const> batch, AgentParams& agent, const ActorCriticConfig& cfg,
                     diff::Optimizer& optimizer) {
    if (batch.empty()) throw std::invalid_argument("critic_update: empty batch");
    const Vec targets = td_targets(batch, agent, cfg);
    Tape tape;
    std::vector<Var> errors;
    errors.reserve(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        Var s = tape.constant(batch[i]->state.values());
        Var a = tape.constant(batch[i]->action);
        Var q = critic_forward(tape, s, a, agent.critic);
        errors.push_back(diff::square(diff::affine(q, 1.0, -targets[i])));
    }
    Var loss = diff::mean(diff::concat(errors));
    const double value = loss.scalar();
    optimizer.step(agent.critic, tape.backward(loss).params(agent.critic), diff::Direction::descent);
    return value;
}

double actor_update(std::span<const Transition* const> batch, AgentParams& agent, diff::Optimizer& optimizer) {
    if (batch.empty()) throw std::invalid_argument("actor_update: empty batch");
    Tape tape;
    std::vector<Var> qs;
    qs.reserve(batch.size());
    for (const Transition* t : batch) {
        Var s = tape.constant(t->state.values());
        Var a = actor_forward(tape, s, agent.actor);
        qs.push_back(critic_forward(tape, s, a, agent.critic));
    }
    Var objective = diff::mean(diff::concat(qs));
    const double value = objective.scalar();
    optimizer.step(agent.actor, tape.backward(objective).params(agent.actor), diff::Direction::ascent);
    return value;
}

// ---------------------------------------------------------------------------

const AgentParams& TrainResult::agent_for(std::size_t stream) const {
    if (per_farm.empty()) return params;
    return per_farm.at(stream);
}

void validate_streams(std::span<const FarmStream> streams, std::size_t models) {
    if (streams.empty()) throw std::invalid_argument("train: no farm streams");
    std::set<std::string> ids;
    std::size_t state_dim = 0;
    for (const auto& fs : streams) {
        if (!ids.insert(fs.farm_id).second) throw std::invalid_argument("train: duplicate stream for farm " + fs.farm_id);
        if (fs.steps.empty()) throw std::invalid_argument("train: farm " + fs.farm_id + " has an empty stream");
        for (std::size_t i = 0; i < fs.steps.size(); ++i) {
            const auto& st = fs.steps[i];
            const std::string where = "farm " + fs.farm_id + " index " + std::to_string(i);
            if (st.state.farm_id != fs.farm_id)
                throw std::invalid_argument("train: " + where + " carries state of farm " + st.state.farm_id);
            if (st.forecasts.size() != models)
                throw DimensionError("train: " + where + " forecasts", models, st.forecasts.size());
            if (state_dim == 0) state_dim = st.state.size();
            if (st.state.size() != state_dim) throw DimensionError("train: " + where + " state", state_dim, st.state.size());
            if (i > 0 && st.state.t_index <= fs.steps[i - 1].state.t_index)
                throw std::invalid_argument("train: " + where + " t_index does not increase");
        }
    }
}

namespace {

struct Learner {
    AgentParams params;
    ReplayBuffer buffer;
    diff::Optimizer actor_opt;
    diff::Optimizer critic_opt;
};

}  // namespace

TrainResult train(std::span<const FarmStream> streams, const ActorCriticConfig& cfg, std::uint64_t seed,
                  const AgentParams* initial) {
    cfg.validate();
    validate_streams(streams, cfg.models);
    const std::size_t state_dim = streams.front().steps.front().state.size();
    if (initial && (initial->state_dim() != state_dim || initial->action_dim() != cfg.models))
        throw DimensionError("train: initial agent state dimension", state_dim, initial->state_dim());

    const std::size_t learners = cfg.shared_agent ? 1 : streams.size();
    std::vector<Learner> agents;
    agents.reserve(learners);
    for (std::size_t l = 0; l < learners; ++l) {
        const std::uint64_t s = derive_seed(seed, "agent." + std::to_string(l));
        agents.push_back(Learner{initial ? *initial : init_agent(state_dim, cfg, s),
                                 ReplayBuffer(cfg.capacity, derive_seed(s, "replay")),
                                 diff::Optimizer(diff::OptimConfig{cfg.actor_learning_rate, cfg.optimizer}),
                                 diff::Optimizer(diff::OptimConfig{cfg.critic_learning_rate, cfg.optimizer})});
    }
    Rng noise_rng(derive_seed(seed, "agent.noise"));
    std::vector<std::size_t> cursor(streams.size(), 0);
    const std::size_t warmup = cfg.warmup_factor * cfg.batch_size;

    TrainResult result;
    result.log.reserve(cfg.steps);
    for (std::size_t step = 0; step < cfg.steps; ++step) {
        const std::size_t f = step % streams.size();
        Learner& agent = agents[cfg.shared_agent ? 0 : f];
        const FarmStream& fs = streams[f];
        const std::size_t i = cursor[f];
        const AgentStep& cur = fs.steps[i];

        Vec action = actor_forward(cur.state, agent.params.actor, cfg.noise_at(step), &noise_rng);
        const double y = ensemble_predict(cur.forecasts, action);
        const double reward = compute_reward(y, cur.truth, cfg.reward);
        const bool terminal = i + 1 == fs.steps.size();
        const double entropy = weight_entropy(action);
        agent.buffer.push(Transition{cur.state, std::move(action), reward,
                                     terminal ? cur.state : fs.steps[i + 1].state, terminal});
        cursor[f] = terminal ? 0 : i + 1;

        double loss = std::numeric_limits<double>::quiet_NaN();
        if (agent.buffer.size() >= warmup) {
            const auto batch = agent.buffer.sample(cfg.batch_size);
            loss = critic_update(batch, agent.params, cfg, agent.critic_opt);
            actor_update(batch, agent.params, agent.actor_opt);
        }
        result.log.push_back(TrainLogRow{step, fs.farm_id, reward, loss, entropy});
    }

    result.params = agents.front().params;
    if (!cfg.shared_agent)
        for (auto& a : agents) result.per_farm.push_back(std::move(a.params));
    return result;
}

void write_train_log(std::ostream& out, std::span<const TrainLogRow> log) {
    out << "step,farm_id,reward,td_loss,entropy\n";
    for (const auto& r : log) {
        data::write_csv_row(out, {std::to_string(r.step), r.farm_id, data::format_double(r.reward),
                                  std::isnan(r.td_loss) ? std::string() : data::format_double(r.td_loss),
                                  data::format_double(r.entropy)});
    }
}

// ---------------------------------------------------------------------------

ParamSet to_paramset(const AgentParams& agent) {
    ParamSet out;
    out.merge(agent.actor, "actor.");
    out.merge(agent.critic, "critic.");
    return out;
}

AgentParams agent_from_paramset(const ParamSet& params) {
    AgentParams a{params.extract("actor."), params.extract("critic.")};
    for (const char* name : {"l0.w", "l0.b", "l1.w", "l1.b"}) {
        if (!a.actor.contains(name)) throw std::runtime_error(std::string("agent checkpoint lacks actor.") + name);
        if (!a.critic.contains(name)) throw std::runtime_error(std::string("agent checkpoint lacks critic.") + name);
    }
    if (a.critic.at("l1.w").rows() != 1) throw DimensionError("agent checkpoint: critic output", 1, a.critic.at("l1.w").rows());
    if (a.critic.at("l0.w").cols() != a.state_dim() + a.action_dim())
        throw DimensionError("agent checkpoint: critic input", a.state_dim() + a.action_dim(), a.critic.at("l0.w").cols());
    return a;
}

void save_agent(const AgentParams& agent, const std::filesystem::path& path) { diff::save_params(to_paramset(agent), path); }

AgentParams load_agent(const std::filesystem::path& path) { return agent_from_paramset(diff::load_params(path)); }

// ---------------------------------------------------------------------------

nlohmann::json config_to_json(const ActorCriticConfig& c) {
    return {{"models", c.models},
            {"actor_learning_rate", c.actor_learning_rate},
            {"critic_learning_rate", c.critic_learning_rate},
            {"optimizer", c.optimizer == diff::OptimizerKind::adam ? "adam" : "sgd"},
            {"discount", c.discount},
            {"batch_size", c.batch_size},
            {"capacity", c.capacity},
            {"steps", c.steps},
            {"noise_start", c.noise_start},
            {"noise_end", c.noise_end},
            {"warmup_factor", c.warmup_factor},
            {"actor_hidden", c.actor_hidden},
            {"critic_hidden", c.critic_hidden},
            {"reward", c.reward == base::LossKind::absolute ? "absolute" : "squared"},
            {"shared_agent", c.shared_agent}};
}

ActorCriticConfig config_from_json(const nlohmann::json& j, const std::string& field) {
    static const std::set<std::string> keys{"models",        "actor_learning_rate", "critic_learning_rate",
                                            "optimizer",     "discount",            "batch_size",
                                            "capacity",      "steps",               "noise_start",
                                            "noise_end",     "warmup_factor",       "actor_hidden",
                                            "critic_hidden", "reward",              "shared_agent"};
    if (!j.is_object()) throw ConfigError(field, "must be an object");
    for (const auto& [k, _] : j.items())
        if (!keys.count(k)) throw ConfigError(field + "." + k, "unknown key");
    ActorCriticConfig c;
    try {
        c.models = j.value("models", c.models);
        c.actor_learning_rate = j.value("actor_learning_rate", c.actor_learning_rate);
        c.critic_learning_rate = j.value("critic_learning_rate", c.critic_learning_rate);
        c.discount = j.value("discount", c.discount);
        c.batch_size = j.value("batch_size", c.batch_size);
        c.capacity = j.value("capacity", c.capacity);
        c.steps = j.value("steps", c.steps);
        c.noise_start = j.value("noise_start", c.noise_start);
        c.noise_end = j.value("noise_end", c.noise_end);
        c.warmup_factor = j.value("warmup_factor", c.warmup_factor);
        c.actor_hidden = j.value("actor_hidden", c.actor_hidden);
        c.critic_hidden = j.value("critic_hidden", c.critic_hidden);
        c.shared_agent = j.value("shared_agent", c.shared_agent);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(field, e.what());
    }
    const std::string opt = j.value("optimizer", std::string("adam"));
    if (opt == "adam") c.optimizer = diff::OptimizerKind::adam;
    else if (opt == "sgd") c.optimizer = diff::OptimizerKind::sgd;
    else throw ConfigError(field + ".optimizer", "expected 'adam' or 'sgd'");
    const std::string reward = j.value("reward", std::string("absolute"));
    if (reward == "absolute") c.reward = base::LossKind::absolute;
    else if (reward == "squared") c.reward = base::LossKind::squared;
    else throw ConfigError(field + ".reward", "expected 'absolute' or 'squared'");
    return c;
}

}  // namespace emgrl::rl
