#include "emgrl/eval/gradsuite.hpp"

#include <memory>

#include "emgrl/data/graph.hpp"
#include "emgrl/embed/embedding.hpp"
#include "emgrl/rl/agent.hpp"
#include "emgrl/rng.hpp"

namespace emgrl::eval {

using diff::GradCheckCase;
using diff::ParamSet;
using diff::Tape;
using diff::Var;
using diff::Vec;

namespace {

/// Fixed mixing weights that reduce a vector output to a scalar loss.
Vec mixing(std::size_t n, std::uint64_t tag) {
    Rng rng(derive_seed(tag, "gradsuite.mix"));
    Vec c(n);
    for (double& x : c) x = rng.uniform(-1.0, 1.0);
    return c;
}

Var mix(Tape& tape, Var v, std::uint64_t tag) { return diff::dot(v, tape.constant(mixing(v.size(), tag))); }

/// Two clusters of three farms, each farm linked to its two nearest.
std::shared_ptr<const data::WindFarmGraph> six_farm_graph() {
    std::vector<data::FarmMeta> farms = {
        {"A", 40.00, -70.00, {}}, {"B", 40.05, -70.02, {}}, {"C", 40.02, -70.08, {}},
        {"D", 40.60, -70.50, {}}, {"E", 40.63, -70.55, {}}, {"F", 40.58, -70.57, {}},
    };
    return std::make_shared<const data::WindFarmGraph>(data::build_graph(farms, 2));
}

}  // namespace

std::vector<GradCheckCase> gradient_suite() {
    std::vector<GradCheckCase> cases;

    cases.push_back({"linear", 5,
                     [](Rng& rng) {
                         ParamSet p;
                         p.add_linear("fc", 5, 3, rng);
                         return p;
                     },
                     [](Tape& tape, Var x, const ParamSet& p) { return mix(tape, diff::linear(x, p, "fc"), 1); }});

    cases.push_back({"dilated_conv", 12,
                     [](Rng& rng) {
                         ParamSet p;
                         auto& k = p.add("kernel", 1, 3);
                         for (double& v : k.values()) v = rng.uniform(-1.0, 1.0);
                         return p;
                     },
                     [](Tape& tape, Var x, const ParamSet& p) {
                         return mix(tape, diff::conv1d_dilated(x, tape.param(p, "kernel"), 2), 2);
                     }});

    cases.push_back({"softmax", 5, nullptr,
                     [](Tape& tape, Var x, const ParamSet&) {
                         return diff::add(mix(tape, diff::softmax(x), 3), mix(tape, diff::log_softmax(x), 4));
                     },
                     3.0});

    const embed::ConvStackConfig enc{3, 2, {1, 2, 4}, 5};
    cases.push_back({"conv_encoder", 12,
                     [enc](Rng& rng) {
                         ParamSet p;
                         embed::init_encoder(p, enc, rng);
                         return p;
                     },
                     [enc](Tape& tape, Var x, const ParamSet& p) {
                         return mix(tape, embed::encode_temporal(tape, x, p, enc), 5);
                     }});

    const auto graph = six_farm_graph();
    constexpr std::size_t dim = 4;
    cases.push_back({"gnn_layer", 6 * dim,
                     [](Rng& rng) {
                         ParamSet p;
                         embed::init_gnn(p, 1, dim, rng);
                         return p;
                     },
                     [graph](Tape& tape, Var x, const ParamSet& p) {
                         std::vector<Var> h;
                         for (std::size_t v = 0; v < graph->size(); ++v) h.push_back(diff::slice(x, v * dim, dim));
                         const auto layers = embed::gnn_layers(1);
                         auto out = embed::gnn_forward(tape, *graph, h, p, layers);
                         return mix(tape, diff::concat(out), 6);
                     }});

    const embed::MleConfig mle{embed::MleEncoderKind::mlp, 4, 6, 4, 1.0, {}};
    constexpr std::size_t models = 3;
    cases.push_back({"mle_mlp", mle.horizon * models,
                     [mle](Rng& rng) { return embed::init_mle(mle, models, rng); },
                     [mle](Tape& tape, Var x, const ParamSet& p) {
                         return mix(tape, embed::compute_mle(tape, x, models, p, mle), 7);
                     }});

    cases.push_back({"gru_cell", 6,
                     [](Rng& rng) {
                         ParamSet p;
                         p.add_linear("z", 4, 3, rng);
                         p.add_linear("r", 4, 3, rng);
                         p.add_linear("h", 4, 3, rng);
                         return p;
                     },
                     [](Tape& tape, Var x, const ParamSet& p) {
                         Var h = diff::slice(x, 3, 3);
                         Var in = diff::slice(x, 0, 1);
                         Var xh = diff::concat(in, h);
                         Var z = diff::sigmoid(diff::linear(xh, p, "z"));
                         Var r = diff::sigmoid(diff::linear(xh, p, "r"));
                         Var cand = diff::tanh(diff::linear(diff::concat(in, diff::mul(r, h)), p, "h"));
                         return mix(tape, diff::add(h, diff::mul(z, diff::sub(cand, h))), 8);
                     }});

    rl::ActorCriticConfig ac;
    ac.models = 3;
    ac.actor_hidden = 5;
    ac.critic_hidden = 6;
    constexpr std::size_t state_dim = 6;
    cases.push_back({"actor", state_dim,
                     [ac](Rng& rng) { return rl::init_agent(state_dim, ac, rng.engine()()).actor; },
                     [](Tape& tape, Var x, const ParamSet& p) { return mix(tape, rl::actor_forward(tape, x, p), 9); }});

    cases.push_back({"critic", state_dim + 3,
                     [ac](Rng& rng) { return rl::init_agent(state_dim, ac, rng.engine()()).critic; },
                     [](Tape& tape, Var x, const ParamSet& p) {
                         return rl::critic_forward(tape, diff::slice(x, 0, state_dim), diff::slice(x, state_dim, 3), p);
                     }});

    // Q(s, pi(s)) with both networks in one set: "a." actor, "c." critic.
    cases.push_back({"critic_of_actor", state_dim,
                     [ac](Rng& rng) {
                         const auto agent = rl::init_agent(state_dim, ac, rng.engine()());
                         ParamSet p;
                         p.merge(agent.actor, "a.");
                         p.merge(agent.critic, "c.");
                         return p;
                     },
                     [](Tape&, Var s, const ParamSet& p) {
                         Var a = diff::softmax(diff::linear(diff::tanh(diff::linear(s, p, "a.l0")), p, "a.l1"));
                         Var h = diff::tanh(diff::linear(diff::concat(s, a), p, "c.l0"));
                         return diff::linear(h, p, "c.l1");
                     }});
    return cases;
}

std::vector<diff::GradCheckResult> run_gradient_suite(std::size_t points, std::uint64_t seed, double tolerance,
                                                      double eps) {
    std::vector<diff::GradCheckResult> out;
    for (const auto& c : gradient_suite())
        out.push_back(diff::run_gradcheck(c, points, derive_seed(seed, "gradsuite." + c.name), tolerance, eps));
    return out;
}

}  // namespace emgrl::eval
