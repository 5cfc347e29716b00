#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "emgrl/base/loss_history.hpp"
#include "emgrl/data/graph.hpp"
#include "emgrl/diff/params.hpp"
#include "emgrl/diff/tape.hpp"

namespace emgrl::embed {

using diff::ParamSet;
using diff::Tape;
using diff::Var;
using diff::Vec;

/// Stacked dilated convolutions, tanh after each layer, global average over
/// the remaining positions, then a linear projection.
struct ConvStackConfig {
    std::size_t channels = 4;
    std::size_t kernel_size = 2;
    std::vector<std::size_t> dilations{1, 2, 4};
    std::size_t output_dim = 16;

    std::size_t receptive_field() const;
    void validate(const std::string& field) const;
};

/// Blocks `<prefix>.conv<l>.w` (channels x in_channels*kernel),
/// `<prefix>.conv<l>.b`, `<prefix>.proj.w`, `<prefix>.proj.b`.
void init_conv_stack(ParamSet& params, const std::string& prefix, std::size_t in_channels,
                     const ConvStackConfig& cfg, Rng& rng);
Var conv_stack_forward(Tape& tape, std::span<const Var> inputs, const ParamSet& params, const std::string& prefix,
                       const ConvStackConfig& cfg);

// ---------------------------------------------------------------------------
// Temporal encoder

inline constexpr const char* kEncoderPrefix = "enc";

void init_encoder(ParamSet& params, const ConvStackConfig& cfg, Rng& rng);
Var encode_temporal(Tape& tape, Var window, const ParamSet& params, const ConvStackConfig& cfg);
/// Throws LengthError when the window is shorter than the receptive field.
Vec encode_temporal(std::span<const double> window, const ParamSet& params, const ConvStackConfig& cfg);

// ---------------------------------------------------------------------------
// GNN layers

/// Names the message block (MC) and update block (MU) of layer `layer`
/// inside a ParamSet: `gnn<l>.msg.{w,b}` is dim x dim, `gnn<l>.upd.{w,b}` is
/// dim x 2*dim over the concatenation [aggregate || own message].
struct GnnLayerParams {
    std::size_t layer = 0;

    std::string message_prefix() const { return "gnn" + std::to_string(layer) + ".msg"; }
    std::string update_prefix() const { return "gnn" + std::to_string(layer) + ".upd"; }
};

void init_gnn(ParamSet& params, std::size_t layers, std::size_t dim, Rng& rng);
std::vector<GnnLayerParams> gnn_layers(std::size_t count);

/// m_u = tanh(W h_u + b)
Var message_compute(Var h, const ParamSet& params, const GnnLayerParams& layer);
/// Elementwise mean; empty list gives a zero vector of `dim`.
Var message_aggregate(Tape& tape, std::span<const Var> messages, std::size_t dim);
/// h_v' = tanh(W [a_v || m_v] + b)
Var message_update(Var aggregate, Var own_message, const ParamSet& params, const GnnLayerParams& layer);

/// Synchronous message passing over all nodes, one round per layer.
std::vector<Var> gnn_forward(Tape& tape, const data::WindFarmGraph& graph, std::span<const Var> initial,
                             const ParamSet& params, std::span<const GnnLayerParams> layers);
std::vector<Vec> gnn_forward(const data::WindFarmGraph& graph, const std::vector<Vec>& initial,
                             const ParamSet& params, std::span<const GnnLayerParams> layers);

// Value-level component forms.
Vec message_compute(std::span<const double> h, const ParamSet& params, const GnnLayerParams& layer);
Vec message_aggregate(const std::vector<Vec>& messages, std::size_t dim);
Vec message_update(std::span<const double> aggregate, std::span<const double> own_message, const ParamSet& params,
                   const GnnLayerParams& layer);

// ---------------------------------------------------------------------------
// Spatio-temporal embedding

struct StseConfig {
    ConvStackConfig encoder;
    std::size_t gnn_layers = 1;

    std::size_t dim() const { return encoder.output_dim; }
};

/// Encoder and GNN blocks in one ParamSet.
ParamSet init_stse(const StseConfig& cfg, Rng& rng);

/// One current window per graph node, in node order.
std::vector<Var> compute_stse(Tape& tape, const data::WindFarmGraph& graph, std::span<const Var> windows,
                              const ParamSet& params, const StseConfig& cfg);
std::vector<Vec> compute_stse(const data::WindFarmGraph& graph, const std::vector<Vec>& windows,
                              const ParamSet& params, const StseConfig& cfg);

// ---------------------------------------------------------------------------
// Model-loss embedding

enum class MleEncoderKind { mlp, dilated_conv };

struct MleConfig {
    MleEncoderKind kind = MleEncoderKind::mlp;
    std::size_t horizon = 16;
    std::size_t hidden = 32;
    std::size_t output_dim = 8;
    /// Losses are multiplied by this before entering the network.
    double loss_scale = 1.0;
    /// Used by the dilated_conv variant; output_dim is taken from above.
    ConvStackConfig conv{4, 2, {1, 2, 4}, 8};
};

/// `mle.l0` (hidden x horizon*models) and `mle.l1` (output x hidden) for the
/// MLP; a conv stack under prefix `mle` for the dilated_conv variant.
ParamSet init_mle(const MleConfig& cfg, std::size_t models, Rng& rng);

/// Flattened H x N block (zero padded) through the encoder.
Var compute_mle(Tape& tape, Var flattened_losses, std::size_t models, const ParamSet& params, const MleConfig& cfg);
/// Throws when the history holds no rows.
Vec compute_mle(const base::LossHistory& history, const ParamSet& params, const MleConfig& cfg);

// ---------------------------------------------------------------------------
// State embedding

struct StateEmbedding {
    Vec stse;
    Vec mle;
    std::string farm_id;
    std::size_t t_index = 0;

    /// [stse || mle]
    Vec values() const;
    std::size_t size() const noexcept { return stse.size() + mle.size(); }
};

StateEmbedding build_state(Vec stse, Vec mle, std::string farm_id, std::size_t t_index);

}  // namespace emgrl::embed
