#include "emgrl/eval/config.hpp"

#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <set>

#include "emgrl/error.hpp"
#include "emgrl/rng.hpp"

namespace emgrl::eval {

using nlohmann::json;

namespace {

/// Key-checked view of one JSON object.
class Fields {
public:
    Fields(const json& j, std::string field, std::initializer_list<const char*> allowed) : j_(j), field_(std::move(field)) {
        if (!j.is_object()) throw ConfigError(field_.empty() ? "<root>" : field_, "must be an object");
        std::set<std::string> keys(allowed.begin(), allowed.end());
        for (const auto& [k, _] : j.items())
            if (!keys.count(k)) throw ConfigError(path(k), "unknown key");
    }

    std::string path(const std::string& key) const { return field_.empty() ? key : field_ + "." + key; }
    bool has(const char* key) const { return j_.contains(key); }
    const json& at(const char* key) const { return j_.at(key); }

    template <typename T>
    void get(const char* key, T& out) const {
        if (!j_.contains(key)) return;
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception&) {
            throw ConfigError(path(key), "has the wrong type");
        }
    }

private:
    const json& j_;
    std::string field_;
};

std::string message_of(const ConfigError& e) {
    const std::string what = e.what();
    const std::size_t skip = e.field().size() + 2;
    return what.size() > skip ? what.substr(skip) : what;
}

json conv_json(const embed::ConvStackConfig& c) {
    return {{"channels", c.channels}, {"kernel_size", c.kernel_size}, {"dilations", c.dilations}, {"output_dim", c.output_dim}};
}

embed::ConvStackConfig conv_from(const json& j, const std::string& field, embed::ConvStackConfig c) {
    Fields f(j, field, {"channels", "kernel_size", "dilations", "output_dim"});
    f.get("channels", c.channels);
    f.get("kernel_size", c.kernel_size);
    f.get("dilations", c.dilations);
    f.get("output_dim", c.output_dim);
    return c;
}

json schema_json(const data::SchemaDescriptor& s) {
    json j{{"layout", s.layout == data::Layout::wide ? "wide" : "long"},
           {"timestamp_column", s.timestamp_column},
           {"timestamp_format", s.timestamp_format == data::TimestampFormat::iso8601 ? "iso8601" : "epoch"},
           {"power_columns", s.power_columns},
           {"farm_id_column", s.farm_id_column},
           {"power_column", s.power_column},
           {"forward_fill", s.forward_fill},
           {"max_fill_gap", s.max_fill_gap}};
    j["step_seconds"] = s.step_seconds ? json(*s.step_seconds) : json(nullptr);
    return j;
}

data::SchemaDescriptor schema_from(const json& j, const std::string& field) {
    Fields f(j, field,
             {"layout", "timestamp_column", "timestamp_format", "power_columns", "farm_id_column", "power_column",
              "step_seconds", "forward_fill", "max_fill_gap"});
    data::SchemaDescriptor s;
    std::string layout = "wide", format = "iso8601";
    f.get("layout", layout);
    f.get("timestamp_format", format);
    if (layout == "wide") s.layout = data::Layout::wide;
    else if (layout == "long") s.layout = data::Layout::long_format;
    else throw ConfigError(f.path("layout"), "expected 'wide' or 'long'");
    if (format == "iso8601") s.timestamp_format = data::TimestampFormat::iso8601;
    else if (format == "epoch") s.timestamp_format = data::TimestampFormat::epoch;
    else throw ConfigError(f.path("timestamp_format"), "expected 'iso8601' or 'epoch'");
    f.get("timestamp_column", s.timestamp_column);
    f.get("power_columns", s.power_columns);
    f.get("farm_id_column", s.farm_id_column);
    f.get("power_column", s.power_column);
    if (f.has("step_seconds") && !f.at("step_seconds").is_null()) {
        std::int64_t step = 0;
        f.get("step_seconds", step);
        s.step_seconds = step;
    }
    f.get("forward_fill", s.forward_fill);
    f.get("max_fill_gap", s.max_fill_gap);
    return s;
}

json mle_json(const embed::MleConfig& m) {
    return {{"kind", m.kind == embed::MleEncoderKind::mlp ? "mlp" : "dilated_conv"},
            {"horizon", m.horizon},
            {"hidden", m.hidden},
            {"output_dim", m.output_dim},
            {"loss_scale", m.loss_scale},
            {"conv", conv_json(m.conv)}};
}

embed::MleConfig mle_from(const json& j, const std::string& field) {
    Fields f(j, field, {"kind", "horizon", "hidden", "output_dim", "loss_scale", "conv"});
    embed::MleConfig m;
    std::string kind = "mlp";
    f.get("kind", kind);
    if (kind == "mlp") m.kind = embed::MleEncoderKind::mlp;
    else if (kind == "dilated_conv") m.kind = embed::MleEncoderKind::dilated_conv;
    else throw ConfigError(f.path("kind"), "expected 'mlp' or 'dilated_conv'");
    f.get("horizon", m.horizon);
    f.get("hidden", m.hidden);
    f.get("output_dim", m.output_dim);
    f.get("loss_scale", m.loss_scale);
    if (f.has("conv")) m.conv = conv_from(f.at("conv"), f.path("conv"), m.conv);
    return m;
}

}  // namespace

// ---------------------------------------------------------------------------

json synthetic_to_json(const data::SyntheticConfig& c) {
    json schedule = json::array();
    for (const auto& s : c.schedule) schedule.push_back({{"regime", data::to_string(s.kind)}, {"length", s.length}});
    return {{"farms", c.farms},
            {"length", c.length},
            {"step_seconds", c.step_seconds},
            {"start_epoch", c.start_epoch},
            {"schedule", schedule},
            {"ar_coefficient", c.ar_coefficient},
            {"ar_mean", c.ar_mean},
            {"ar_noise", c.ar_noise},
            {"trend_slope", c.trend_slope},
            {"trend_low", c.trend_low},
            {"trend_high", c.trend_high},
            {"trend_noise", c.trend_noise},
            {"threshold_level", c.threshold_level},
            {"threshold_drop", c.threshold_drop},
            {"threshold_rise", c.threshold_rise},
            {"threshold_noise", c.threshold_noise},
            {"correlation_length_km", c.correlation_length_km},
            {"center_latitude", c.center_latitude},
            {"center_longitude", c.center_longitude},
            {"spread_km", c.spread_km}};
}

data::SyntheticConfig synthetic_from_json(const json& j, const std::string& field) {
    Fields f(j, field,
             {"farms", "length", "step_seconds", "start_epoch", "schedule", "ar_coefficient", "ar_mean", "ar_noise",
              "trend_slope", "trend_low", "trend_high", "trend_noise", "threshold_level", "threshold_drop",
              "threshold_rise", "threshold_noise", "correlation_length_km", "center_latitude", "center_longitude",
              "spread_km"});
    data::SyntheticConfig c;
    f.get("farms", c.farms);
    f.get("length", c.length);
    f.get("step_seconds", c.step_seconds);
    f.get("start_epoch", c.start_epoch);
    if (f.has("schedule")) {
        const json& s = f.at("schedule");
        if (!s.is_array()) throw ConfigError(f.path("schedule"), "must be an array");
        c.schedule.clear();
        for (std::size_t i = 0; i < s.size(); ++i) {
            const std::string item = f.path("schedule") + "[" + std::to_string(i) + "]";
            Fields g(s[i], item, {"regime", "length"});
            std::string regime;
            data::RegimeSegment seg;
            g.get("regime", regime);
            g.get("length", seg.length);
            try {
                seg.kind = data::regime_from_string(regime);
            } catch (const std::exception& e) {
                throw ConfigError(item + ".regime", e.what());
            }
            c.schedule.push_back(seg);
        }
    }
    f.get("ar_coefficient", c.ar_coefficient);
    f.get("ar_mean", c.ar_mean);
    f.get("ar_noise", c.ar_noise);
    f.get("trend_slope", c.trend_slope);
    f.get("trend_low", c.trend_low);
    f.get("trend_high", c.trend_high);
    f.get("trend_noise", c.trend_noise);
    f.get("threshold_level", c.threshold_level);
    f.get("threshold_drop", c.threshold_drop);
    f.get("threshold_rise", c.threshold_rise);
    f.get("threshold_noise", c.threshold_noise);
    f.get("correlation_length_km", c.correlation_length_km);
    f.get("center_latitude", c.center_latitude);
    f.get("center_longitude", c.center_longitude);
    f.get("spread_km", c.spread_km);
    return c;
}

// ---------------------------------------------------------------------------

std::vector<base::BaseModelSpec> RunConfig::default_pool() {
    std::vector<base::BaseModelSpec> pool(5);
    pool[0].kind = base::ModelKind::persistence;
    pool[1].kind = base::ModelKind::autoregressive;
    pool[2].kind = base::ModelKind::boosted_stumps;
    pool[3].kind = base::ModelKind::recurrent;
    pool[4].kind = base::ModelKind::graph_regressor;
    return pool;
}

void RunConfig::resolve() { agent.models = pool.size(); }

std::uint64_t RunConfig::corpus_seed() const {
    return corpus.synthetic_seed ? *corpus.synthetic_seed : derive_seed(seed, "corpus");
}

void RunConfig::validate() const {
    if (corpus.source == CorpusSource::synthetic) {
        try {
            corpus.synthetic.validate();
        } catch (const ConfigError& e) {
            throw ConfigError("corpus." + e.field(), message_of(e));
        }
    } else {
        if (corpus.series.empty()) throw ConfigError("corpus.series", "at least one series file is required");
        if (corpus.metadata.empty()) throw ConfigError("corpus.metadata", "a farm metadata file is required");
    }
    if (!split.boundary && !(split.train_fraction > 0.0 && split.train_fraction < 1.0))
        throw ConfigError("split.train_fraction", "must lie in (0, 1)");
    if (window == 0) throw ConfigError("window", "must be positive");
    if (horizon == 0) throw ConfigError("horizon", "must be positive");
    if (graph_k == 0) throw ConfigError("graph_k", "must be positive");
    stse.encoder.validate("stse.encoder");
    if (window < stse.encoder.receptive_field())
        throw ConfigError("window", "shorter than the encoder receptive field (" +
                                        std::to_string(stse.encoder.receptive_field()) + ")");
    if (stse.gnn_layers == 0) throw ConfigError("stse.gnn_layers", "must be positive");
    if (mle.output_dim > 0) {
        if (mle.horizon == 0) throw ConfigError("mle.horizon", "must be positive");
        if (mle.kind == embed::MleEncoderKind::mlp && mle.hidden == 0) throw ConfigError("mle.hidden", "must be positive");
        if (!(mle.loss_scale > 0.0)) throw ConfigError("mle.loss_scale", "must be positive");
        if (mle.kind == embed::MleEncoderKind::dilated_conv) {
            mle.conv.validate("mle.conv");
            if (mle.conv.receptive_field() > mle.horizon)
                throw ConfigError("mle.conv", "receptive field exceeds mle.horizon");
        }
    }
    if (pretrain.epochs == 0) throw ConfigError("pretrain.epochs", "must be positive");
    if (pretrain.batch_size == 0) throw ConfigError("pretrain.batch_size", "must be positive");
    if (!(pretrain.learning_rate > 0.0)) throw ConfigError("pretrain.learning_rate", "must be positive");
    if (pool.empty()) throw ConfigError("pool", "at least one base model is required");
    for (std::size_t i = 0; i < pool.size(); ++i) {
        const std::string field = "pool[" + std::to_string(i) + "]";
        try {
            pool[i].validate();
        } catch (const ConfigError& e) {
            throw ConfigError(field + e.field().substr(4), message_of(e));
        }
        if (pool[i].kind == base::ModelKind::autoregressive && pool[i].order > window)
            throw ConfigError(field + ".order", "exceeds the window length");
        if (pool[i].kind == base::ModelKind::graph_regressor && window < pool[i].encoder.receptive_field())
            throw ConfigError(field + ".encoder", "receptive field exceeds the window length");
    }
    if (agent.models != pool.size()) throw ConfigError("agent.models", "must equal the pool size");
    agent.validate("agent");
    if (repetitions == 0) throw ConfigError("repetitions", "must be positive");
}

// ---------------------------------------------------------------------------

RunConfig run_config_from_json(const json& j) {
    Fields f(j, "",
             {"corpus", "split", "window", "horizon", "graph_k", "stse", "mle", "pretrain", "pool", "agent",
              "repetitions", "seed", "denormalize", "output_dir"});
    RunConfig c;
    if (f.has("corpus")) {
        Fields g(f.at("corpus"), "corpus", {"source", "synthetic", "synthetic_seed", "series", "metadata", "schema"});
        std::string source = "synthetic";
        g.get("source", source);
        if (source == "synthetic") c.corpus.source = CorpusSource::synthetic;
        else if (source == "files") c.corpus.source = CorpusSource::files;
        else throw ConfigError("corpus.source", "expected 'synthetic' or 'files'");
        if (g.has("synthetic")) c.corpus.synthetic = synthetic_from_json(g.at("synthetic"), "corpus.synthetic");
        if (g.has("synthetic_seed") && !g.at("synthetic_seed").is_null()) {
            std::uint64_t s = 0;
            g.get("synthetic_seed", s);
            c.corpus.synthetic_seed = s;
        }
        std::vector<std::string> series;
        if (g.has("series") && g.at("series").is_string()) series.push_back(g.at("series").get<std::string>());
        else g.get("series", series);
        c.corpus.series.assign(series.begin(), series.end());
        std::string meta;
        g.get("metadata", meta);
        c.corpus.metadata = meta;
        if (g.has("schema")) c.corpus.schema = schema_from(g.at("schema"), "corpus.schema");
    }
    if (f.has("split")) {
        Fields g(f.at("split"), "split", {"boundary", "train_fraction"});
        if (g.has("boundary") && !g.at("boundary").is_null()) {
            const json& b = g.at("boundary");
            if (b.is_string()) {
                auto t = data::parse_iso8601(b.get<std::string>());
                if (!t) throw ConfigError("split.boundary", "not an ISO-8601 timestamp");
                c.split.boundary = *t;
            } else if (b.is_number_integer()) {
                c.split.boundary = b.get<std::int64_t>();
            } else {
                throw ConfigError("split.boundary", "expected an ISO-8601 string or epoch seconds");
            }
        }
        g.get("train_fraction", c.split.train_fraction);
    }
    f.get("window", c.window);
    f.get("horizon", c.horizon);
    f.get("graph_k", c.graph_k);
    if (f.has("stse")) {
        Fields g(f.at("stse"), "stse", {"encoder", "gnn_layers"});
        if (g.has("encoder")) c.stse.encoder = conv_from(g.at("encoder"), "stse.encoder", c.stse.encoder);
        g.get("gnn_layers", c.stse.gnn_layers);
    }
    if (f.has("mle")) c.mle = mle_from(f.at("mle"), "mle");
    if (f.has("pretrain")) {
        Fields g(f.at("pretrain"), "pretrain", {"epochs", "samples_per_epoch", "batch_size", "learning_rate"});
        g.get("epochs", c.pretrain.epochs);
        g.get("samples_per_epoch", c.pretrain.samples_per_epoch);
        g.get("batch_size", c.pretrain.batch_size);
        g.get("learning_rate", c.pretrain.learning_rate);
    }
    if (f.has("pool")) {
        const json& p = f.at("pool");
        if (!p.is_array()) throw ConfigError("pool", "must be an array");
        c.pool.clear();
        for (std::size_t i = 0; i < p.size(); ++i) {
            const std::string field = "pool[" + std::to_string(i) + "]";
            try {
                c.pool.push_back(base::spec_from_json(p[i], field));
            } catch (const ConfigError&) {
                throw;
            } catch (const json::exception&) {
                throw ConfigError(field, "has a field of the wrong type");
            }
        }
    }
    if (f.has("agent")) c.agent = rl::config_from_json(f.at("agent"), "agent");
    f.get("repetitions", c.repetitions);
    f.get("seed", c.seed);
    f.get("denormalize", c.denormalize);
    std::string out;
    f.get("output_dir", out);
    c.output_dir = out;
    if (c.agent.models == 0) c.resolve();
    return c;
}

json to_json(const RunConfig& c) {
    json corpus{{"source", c.corpus.source == CorpusSource::synthetic ? "synthetic" : "files"}};
    if (c.corpus.source == CorpusSource::synthetic) {
        corpus["synthetic"] = synthetic_to_json(c.corpus.synthetic);
        corpus["synthetic_seed"] = c.corpus_seed();
    } else {
        std::vector<std::string> series;
        for (const auto& p : c.corpus.series) series.push_back(p.string());
        corpus["series"] = series;
        corpus["metadata"] = c.corpus.metadata.string();
        corpus["schema"] = schema_json(c.corpus.schema);
    }
    json split{{"train_fraction", c.split.train_fraction}};
    split["boundary"] = c.split.boundary ? json(*c.split.boundary) : json(nullptr);
    json pool = json::array();
    for (const auto& s : c.pool) pool.push_back(base::spec_to_json(s));
    return {{"corpus", corpus},
            {"split", split},
            {"window", c.window},
            {"horizon", c.horizon},
            {"graph_k", c.graph_k},
            {"stse", {{"encoder", conv_json(c.stse.encoder)}, {"gnn_layers", c.stse.gnn_layers}}},
            {"mle", mle_json(c.mle)},
            {"pretrain",
             {{"epochs", c.pretrain.epochs},
              {"samples_per_epoch", c.pretrain.samples_per_epoch},
              {"batch_size", c.pretrain.batch_size},
              {"learning_rate", c.pretrain.learning_rate}}},
            {"pool", pool},
            {"agent", rl::config_to_json(c.agent)},
            {"repetitions", c.repetitions},
            {"seed", c.seed},
            {"denormalize", c.denormalize},
            {"output_dir", c.output_dir.string()}};
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot open " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config", path.string() + ": " + e.what());
    }
    return run_config_from_json(j);
}

std::string config_fingerprint(const RunConfig& config) {
    json j = to_json(config);
    j.erase("output_dir");
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(j.dump())));
    return buf;
}

}  // namespace emgrl::eval
