#include "emgrl/embed/embedding.hpp"

#include <stdexcept>

#include "emgrl/error.hpp"

namespace emgrl::embed {

std::size_t ConvStackConfig::receptive_field() const { return diff::receptive_field(kernel_size, dilations); }

void ConvStackConfig::validate(const std::string& field) const {
    if (channels == 0) throw ConfigError(field + ".channels", "must be positive");
    if (kernel_size == 0) throw ConfigError(field + ".kernel_size", "must be positive");
    if (dilations.empty()) throw ConfigError(field + ".dilations", "must not be empty");
    for (std::size_t d : dilations)
        if (d == 0) throw ConfigError(field + ".dilations", "must be positive");
    if (output_dim == 0) throw ConfigError(field + ".output_dim", "must be positive");
}

void init_conv_stack(ParamSet& params, const std::string& prefix, std::size_t in_channels,
                     const ConvStackConfig& cfg, Rng& rng) {
    std::size_t c_in = in_channels;
    for (std::size_t l = 0; l < cfg.dilations.size(); ++l) {
        const std::string name = prefix + ".conv" + std::to_string(l);
        // fan_in of one output position is c_in * kernel_size.
        params.add_linear(name, c_in * cfg.kernel_size, cfg.channels, rng);
        c_in = cfg.channels;
    }
    params.add_linear(prefix + ".proj", cfg.channels, cfg.output_dim, rng);
}

Var conv_stack_forward(Tape& tape, std::span<const Var> inputs, const ParamSet& params, const std::string& prefix,
                       const ConvStackConfig& cfg) {
    if (inputs.empty()) throw std::invalid_argument("conv_stack_forward: no input channels");
    const std::size_t length = inputs.front().size();
    for (Var v : inputs)
        if (v.size() != length) throw DimensionError("conv_stack_forward: ragged channels", length, v.size());
    const std::size_t rf = cfg.receptive_field();
    if (length < rf) throw LengthError("encoder window", rf, length);

    std::vector<Var> current(inputs.begin(), inputs.end());
    const std::size_t k = cfg.kernel_size;
    for (std::size_t l = 0; l < cfg.dilations.size(); ++l) {
        const std::string name = prefix + ".conv" + std::to_string(l);
        Var w = tape.param(params, name + ".w");
        Var b = tape.param(params, name + ".b");
        const std::size_t c_in = current.size();
        if (tape.cols(w) != c_in * k) throw DimensionError(name + ".w columns", c_in * k, tape.cols(w));
        std::vector<Var> next;
        next.reserve(cfg.channels);
        for (std::size_t o = 0; o < cfg.channels; ++o) {
            Var acc;
            for (std::size_t i = 0; i < c_in; ++i) {
                Var kernel = diff::slice(w, o * c_in * k + i * k, k);
                Var y = diff::conv1d_dilated(current[i], kernel, cfg.dilations[l]);
                acc = acc.valid() ? diff::add(acc, y) : y;
            }
            next.push_back(diff::tanh(diff::broadcast_add(acc, diff::slice(b, o, 1))));
        }
        current = std::move(next);
    }
    std::vector<Var> pooled;
    pooled.reserve(current.size());
    for (Var c : current) pooled.push_back(diff::mean(c));
    return diff::linear(diff::concat(pooled), params, prefix + ".proj");
}

// ---------------------------------------------------------------------------

void init_encoder(ParamSet& params, const ConvStackConfig& cfg, Rng& rng) {
    cfg.validate("encoder");
    init_conv_stack(params, kEncoderPrefix, 1, cfg, rng);
}

Var encode_temporal(Tape& tape, Var window, const ParamSet& params, const ConvStackConfig& cfg) {
    const Var inputs[] = {window};
    return conv_stack_forward(tape, inputs, params, kEncoderPrefix, cfg);
}

Vec encode_temporal(std::span<const double> window, const ParamSet& params, const ConvStackConfig& cfg) {
    Tape tape;
    Var w = tape.constant(Vec(window.begin(), window.end()));
    return encode_temporal(tape, w, params, cfg).value();
}

// ---------------------------------------------------------------------------

void init_gnn(ParamSet& params, std::size_t layers, std::size_t dim, Rng& rng) {
    for (const auto& layer : gnn_layers(layers)) {
        params.add_linear(layer.message_prefix(), dim, dim, rng);
        params.add_linear(layer.update_prefix(), 2 * dim, dim, rng);
    }
}

std::vector<GnnLayerParams> gnn_layers(std::size_t count) {
    std::vector<GnnLayerParams> out;
    for (std::size_t l = 0; l < count; ++l) out.push_back(GnnLayerParams{l});
    return out;
}

Var message_compute(Var h, const ParamSet& params, const GnnLayerParams& layer) {
    return diff::tanh(diff::linear(h, params, layer.message_prefix()));
}

Var message_aggregate(Tape& tape, std::span<const Var> messages, std::size_t dim) {
    return diff::mean_of(tape, messages, dim);
}

Var message_update(Var aggregate, Var own_message, const ParamSet& params, const GnnLayerParams& layer) {
    if (aggregate.size() != own_message.size())
        throw DimensionError("message_update: aggregate vs own message", aggregate.size(), own_message.size());
    return diff::tanh(diff::linear(diff::concat(aggregate, own_message), params, layer.update_prefix()));
}

std::vector<Var> gnn_forward(Tape& tape, const data::WindFarmGraph& graph, std::span<const Var> initial,
                             const ParamSet& params, std::span<const GnnLayerParams> layers) {
    if (initial.size() != graph.size()) throw DimensionError("gnn_forward: initial states vs nodes", graph.size(), initial.size());
    std::vector<Var> h(initial.begin(), initial.end());
    for (const auto& layer : layers) {
        std::vector<Var> messages;
        messages.reserve(h.size());
        for (Var hv : h) messages.push_back(message_compute(hv, params, layer));
        const std::size_t dim = messages.empty() ? 0 : messages.front().size();
        std::vector<Var> next;
        next.reserve(h.size());
        for (std::size_t v = 0; v < h.size(); ++v) {
            std::vector<Var> incoming;
            incoming.reserve(graph.neighbors[v].size());
            for (std::size_t u : graph.neighbors[v]) incoming.push_back(messages[u]);
            Var a = message_aggregate(tape, incoming, dim);
            next.push_back(message_update(a, messages[v], params, layer));
        }
        h = std::move(next);
    }
    return h;
}

std::vector<Vec> gnn_forward(const data::WindFarmGraph& graph, const std::vector<Vec>& initial,
                             const ParamSet& params, std::span<const GnnLayerParams> layers) {
    Tape tape;
    std::vector<Var> init;
    init.reserve(initial.size());
    for (const auto& v : initial) init.push_back(tape.constant(v));
    std::vector<Vec> out;
    for (Var v : gnn_forward(tape, graph, init, params, layers)) out.push_back(v.value());
    return out;
}

Vec message_compute(std::span<const double> h, const ParamSet& params, const GnnLayerParams& layer) {
    Tape tape;
    return message_compute(tape.constant(Vec(h.begin(), h.end())), params, layer).value();
}

Vec message_aggregate(const std::vector<Vec>& messages, std::size_t dim) {
    Tape tape;
    std::vector<Var> vars;
    for (const auto& m : messages) vars.push_back(tape.constant(m));
    return message_aggregate(tape, vars, dim).value();
}

Vec message_update(std::span<const double> aggregate, std::span<const double> own_message, const ParamSet& params,
                   const GnnLayerParams& layer) {
    Tape tape;
    return message_update(tape.constant(Vec(aggregate.begin(), aggregate.end())),
                          tape.constant(Vec(own_message.begin(), own_message.end())), params, layer)
        .value();
}

// ---------------------------------------------------------------------------

ParamSet init_stse(const StseConfig& cfg, Rng& rng) {
    ParamSet params;
    init_encoder(params, cfg.encoder, rng);
    init_gnn(params, cfg.gnn_layers, cfg.dim(), rng);
    return params;
}

std::vector<Var> compute_stse(Tape& tape, const data::WindFarmGraph& graph, std::span<const Var> windows,
                              const ParamSet& params, const StseConfig& cfg) {
    if (windows.size() != graph.size())
        throw DimensionError("compute_stse: one window per farm required", graph.size(), windows.size());
    std::vector<Var> encoded;
    encoded.reserve(windows.size());
    for (Var w : windows) encoded.push_back(encode_temporal(tape, w, params, cfg.encoder));
    const auto layers = gnn_layers(cfg.gnn_layers);
    return gnn_forward(tape, graph, encoded, params, layers);
}

std::vector<Vec> compute_stse(const data::WindFarmGraph& graph, const std::vector<Vec>& windows,
                              const ParamSet& params, const StseConfig& cfg) {
    Tape tape;
    std::vector<Var> vars;
    vars.reserve(windows.size());
    for (const auto& w : windows) vars.push_back(tape.constant(w));
    std::vector<Vec> out;
    for (Var v : compute_stse(tape, graph, vars, params, cfg)) out.push_back(v.value());
    return out;
}

// ---------------------------------------------------------------------------

ParamSet init_mle(const MleConfig& cfg, std::size_t models, Rng& rng) {
    ParamSet params;
    if (cfg.output_dim == 0) return params;
    if (cfg.horizon == 0) throw ConfigError("embedding.mle.horizon", "must be positive");
    if (cfg.kind == MleEncoderKind::mlp) {
        if (cfg.hidden == 0) throw ConfigError("embedding.mle.hidden", "must be positive");
        params.add_linear("mle.l0", cfg.horizon * models, cfg.hidden, rng);
        params.add_linear("mle.l1", cfg.hidden, cfg.output_dim, rng);
    } else {
        ConvStackConfig conv = cfg.conv;
        conv.output_dim = cfg.output_dim;
        conv.validate("embedding.mle.conv");
        if (conv.receptive_field() > cfg.horizon)
            throw ConfigError("embedding.mle.conv", "receptive field exceeds the loss horizon");
        init_conv_stack(params, "mle", models, conv, rng);
    }
    return params;
}

Var compute_mle(Tape& tape, Var flattened_losses, std::size_t models, const ParamSet& params, const MleConfig& cfg) {
    if (flattened_losses.size() != cfg.horizon * models)
        throw DimensionError("compute_mle: loss block", cfg.horizon * models, flattened_losses.size());
    Var x = cfg.loss_scale == 1.0 ? flattened_losses : diff::affine(flattened_losses, cfg.loss_scale);
    if (cfg.kind == MleEncoderKind::mlp) {
        Var h = diff::tanh(diff::linear(x, params, "mle.l0"));
        return diff::tanh(diff::linear(h, params, "mle.l1"));
    }
    // One channel per model, each a length-H loss sequence.
    std::vector<Var> channels;
    channels.reserve(models);
    for (std::size_t m = 0; m < models; ++m) {
        std::vector<Var> steps;
        steps.reserve(cfg.horizon);
        for (std::size_t r = 0; r < cfg.horizon; ++r) steps.push_back(diff::slice(x, r * models + m, 1));
        channels.push_back(diff::concat(steps));
    }
    ConvStackConfig conv = cfg.conv;
    conv.output_dim = cfg.output_dim;
    return diff::tanh(conv_stack_forward(tape, channels, params, "mle", conv));
}

Vec compute_mle(const base::LossHistory& history, const ParamSet& params, const MleConfig& cfg) {
    if (history.empty()) throw std::invalid_argument("compute_mle: loss history has no rows");
    if (cfg.output_dim == 0) return {};
    if (history.horizon() != cfg.horizon)
        throw DimensionError("compute_mle: history horizon", cfg.horizon, history.horizon());
    Tape tape;
    Var x = tape.constant(history.flatten_padded());
    return compute_mle(tape, x, history.models(), params, cfg).value();
}

// ---------------------------------------------------------------------------

Vec StateEmbedding::values() const {
    Vec out = stse;
    out.insert(out.end(), mle.begin(), mle.end());
    return out;
}

StateEmbedding build_state(Vec stse, Vec mle, std::string farm_id, std::size_t t_index) {
    return StateEmbedding{std::move(stse), std::move(mle), std::move(farm_id), t_index};
}

}  // namespace emgrl::embed
