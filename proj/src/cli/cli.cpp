#include "emgrl/cli/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>

#include <CLI11.hpp>

#include "emgrl/data/csv.hpp"
#include "emgrl/error.hpp"
#include "emgrl/eval/gradsuite.hpp"
#include "emgrl/eval/pipeline.hpp"

namespace emgrl::cli {

namespace fs = std::filesystem;

namespace {

struct CommonFlags {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
};

eval::RunConfig load_config(const CommonFlags& flags) {
    eval::RunConfig cfg = flags.config.empty() ? eval::RunConfig{} : eval::load_run_config(flags.config);
    if (flags.seed) cfg.seed = *flags.seed;
    return cfg;
}

fs::path output_dir(const CommonFlags& flags, const eval::RunConfig* cfg) {
    if (!flags.out.empty()) return flags.out;
    if (cfg && !cfg->output_dir.empty()) return cfg->output_dir;
    if (const char* env = std::getenv(kOutputEnv); env && *env) return env;
    return "emgrl_out";
}

void write_resolved(const eval::RunConfig& cfg, const fs::path& dir) {
    fs::create_directories(dir);
    std::ofstream f(dir / "config.resolved.json");
    f << eval::to_json(cfg).dump(2) << '\n';
    if (!f) throw std::runtime_error("cannot write " + (dir / "config.resolved.json").string());
}

/// Validated config with the output directory fixed.
eval::RunConfig prepare(const CommonFlags& flags, fs::path& dir) {
    eval::RunConfig cfg = load_config(flags);
    dir = output_dir(flags, &cfg);
    cfg.output_dir = dir;
    cfg.resolve();
    cfg.validate();
    return cfg;
}

int cmd_synth(const CommonFlags& flags, std::ostream& out) {
    fs::path dir;
    eval::RunConfig cfg = load_config(flags);
    dir = output_dir(flags, &cfg);
    cfg.output_dir = dir;
    cfg.resolve();
    cfg.corpus.source = eval::CorpusSource::synthetic;
    cfg.corpus.synthetic.validate();
    const auto corpus = data::gen_synthetic(cfg.corpus.synthetic, cfg.corpus_seed());
    fs::create_directories(dir);
    data::write_series_csv(dir / "series.csv", corpus.frames, data::SchemaDescriptor{});
    data::write_farm_meta(dir / "farms.csv", corpus.farms);
    {
        std::ofstream f(dir / "regimes.csv");
        f << "timestamp,regime\n";
        for (std::size_t t = 0; t < corpus.regimes.size(); ++t)
            data::write_csv_row(f, {data::format_iso8601(corpus.frames.front().timestamps[t]),
                                    data::to_string(corpus.regimes[t])});
    }
    write_resolved(cfg, dir);
    out << "wrote " << corpus.frames.size() << " farms x " << cfg.corpus.synthetic.length << " steps to "
        << dir.string() << '\n';
    return 0;
}

int cmd_train(const CommonFlags& flags, std::ostream& out) {
    fs::path dir;
    const eval::RunConfig cfg = prepare(flags, dir);
    const auto data = eval::prepare_data(cfg);
    write_resolved(cfg, dir);
    const auto pipeline = eval::train_pipeline(cfg, data, eval::repetition_seed(cfg.seed, 0));
    pipeline.save(dir);
    std::ofstream log(dir / "train_log.csv");
    rl::write_train_log(log, pipeline.agent.log);
    out << "trained " << pipeline.pool.size() << " base models and the agent (" << cfg.agent.steps
        << " steps); checkpoint in " << dir.string() << '\n';
    return 0;
}

int cmd_evaluate(const CommonFlags& flags, const std::string& checkpoint, std::ostream& out) {
    auto pipeline = eval::TrainedPipeline::load(checkpoint);
    eval::RunConfig cfg = pipeline.config;
    const fs::path dir = output_dir(flags, nullptr);
    cfg.output_dir = dir;
    const auto data = eval::prepare_data(cfg);
    write_resolved(cfg, dir);
    const auto outcome = eval::evaluate_pipeline(pipeline, data);

    std::vector<std::string> base, models, farms;
    for (const auto& m : pipeline.pool) base.push_back(m.spec.label());
    models = base;
    models.push_back(eval::kUniformLabel);
    models.push_back(eval::kEnsembleLabel);
    for (const auto& n : data.graph.nodes) farms.push_back(n.farm_id);
    farms.push_back(eval::kAllFarms);
    auto report = eval::assemble_report({eval::SeedResults{outcome.seed, outcome.results}}, models, farms, base,
                                        eval::kEnsembleLabel, eval::kUniformLabel);
    report.fingerprint = eval::config_fingerprint(cfg);
    report.seed = pipeline.seed;
    report.normalized = !cfg.denormalize;
    report.write(dir);
    out << report.table(eval::Metric::mae);
    return 0;
}

int cmd_compare(const CommonFlags& flags, std::optional<std::size_t> repetitions, std::ostream& out) {
    fs::path dir;
    eval::RunConfig cfg = load_config(flags);
    if (repetitions) cfg.repetitions = *repetitions;
    dir = output_dir(flags, &cfg);
    cfg.output_dir = dir;
    cfg.resolve();
    cfg.validate();
    write_resolved(cfg, dir);
    const auto result = eval::run_experiment(cfg);
    result.report.write(dir);
    out << result.report.table(eval::Metric::mae) << '\n' << result.report.table(eval::Metric::rmse);
    return 0;
}

int cmd_gradcheck(std::size_t points, std::uint64_t seed, std::ostream& out) {
    const auto results = eval::run_gradient_suite(points, seed);
    double worst = 0.0;
    bool ok = true;
    for (const auto& r : results) {
        out << std::left << std::setw(18) << r.name << std::right << std::setw(6) << r.points << "  "
            << std::scientific << std::setprecision(3) << r.max_rel_error << std::defaultfloat << "  "
            << (r.passed ? "ok" : "FAIL") << '\n';
        worst = std::max(worst, r.max_rel_error);
        ok = ok && r.passed;
    }
    out << "max relative error " << std::scientific << std::setprecision(3) << worst << std::defaultfloat
        << (ok ? " < 1e-4\n" : " exceeds 1e-4\n");
    return ok ? 0 : 1;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Ensemble wind-power forecasting with graph state embeddings and an actor-critic weighting agent",
                 "emgrl"};
    app.require_subcommand(1);

    CommonFlags flags;
    auto add_common = [&](CLI::App* sub, bool with_config) {
        if (with_config) sub->add_option("-c,--config", flags.config, "JSON run configuration");
        sub->add_option("-o,--out", flags.out, std::string("Output directory (default: config output_dir, $") + kOutputEnv +
                                                   ", or ./emgrl_out)");
    };

    auto* synth = app.add_subcommand("synth", "Write a synthetic regime-switching corpus");
    add_common(synth, true);
    synth->add_option("-s,--seed", flags.seed, "Master seed");

    auto* train = app.add_subcommand("train", "Fit the pool and the agent; write checkpoints");
    add_common(train, true);
    train->add_option("-s,--seed", flags.seed, "Master seed");

    std::string checkpoint;
    auto* evaluate = app.add_subcommand("evaluate", "Evaluate a checkpoint on its test split");
    add_common(evaluate, false);
    evaluate->add_option("-k,--checkpoint", checkpoint, "Directory holding pipeline.json")->required();

    std::optional<std::size_t> repetitions;
    auto* compare = app.add_subcommand("compare", "Full experiment: pool, uniform average and agent");
    add_common(compare, true);
    compare->add_option("-s,--seed", flags.seed, "Master seed");
    compare->add_option("-r,--repetitions", repetitions, "Seeded repetitions to average");

    std::size_t points = 100;
    std::uint64_t grad_seed = 0;
    auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference check of every differentiable op");
    gradcheck->add_option("-n,--points", points, "Random points per operation")->check(CLI::PositiveNumber);
    gradcheck->add_option("-s,--seed", grad_seed, "Seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    try {
        if (*synth) return cmd_synth(flags, out);
        if (*train) return cmd_train(flags, out);
        if (*evaluate) return cmd_evaluate(flags, checkpoint, out);
        if (*compare) return cmd_compare(flags, repetitions, out);
        if (*gradcheck) return cmd_gradcheck(points, grad_seed, out);
    } catch (const ConfigError& e) {
        err << "error: invalid configuration: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv{"emgrl"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace emgrl::cli
