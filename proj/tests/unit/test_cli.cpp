#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "emgrl/cli/cli.hpp"
#include "emgrl/eval/config.hpp"

using namespace emgrl;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("emgrl_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

fs::path small_config(const fs::path& dir) {
    eval::RunConfig cfg;
    cfg.corpus.synthetic.farms = 3;
    cfg.corpus.synthetic.length = 700;
    cfg.window = 16;
    cfg.stse.encoder.output_dim = 4;
    cfg.mle.horizon = 4;
    cfg.pretrain.epochs = 1;
    cfg.pretrain.samples_per_epoch = 100;
    cfg.pool.clear();
    cfg.pool.push_back(base::BaseModelSpec{});
    base::BaseModelSpec ar;
    ar.kind = base::ModelKind::autoregressive;
    cfg.pool.push_back(ar);
    cfg.agent.steps = 200;
    cfg.repetitions = 1;
    cfg.resolve();
    const fs::path path = dir / "config.json";
    std::ofstream(path) << eval::to_json(cfg).dump(2);
    return path;
}

}  // namespace

TEST_CASE("exit codes for malformed invocations") {
    CHECK(run({}).code == 2);
    CHECK(run({"frobnicate"}).code == 2);
    const Outcome bad_flag = run({"compare", "--no-such-flag"});
    CHECK(bad_flag.code == 2);
    CHECK(bad_flag.err.find("error") != std::string::npos);
    const Outcome help = run({"--help"});
    CHECK(help.code == 0);
    CHECK(help.out.find("compare") != std::string::npos);
    CHECK(run({"evaluate"}).code == 2);
}

TEST_CASE("missing metadata file exits 1 and names the path") {
    const fs::path dir = scratch("missing");
    eval::RunConfig cfg;
    cfg.corpus.source = eval::CorpusSource::files;
    cfg.corpus.series = {(dir / "series.csv").string()};
    cfg.corpus.metadata = (dir / "nowhere" / "farms.csv").string();
    std::ofstream(dir / "series.csv") << "timestamp,A\n2010-01-01T00:00:00Z,1\n";
    std::ofstream(dir / "bad.json") << eval::to_json(cfg).dump(2);
    const Outcome r = run({"train", "-c", (dir / "bad.json").string(), "-o", (dir / "out").string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("nowhere") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("invalid configuration names the field") {
    const fs::path dir = scratch("invalid");
    std::ofstream(dir / "c.json") << R"({"agent": {"discount": 1.5}})";
    const Outcome r = run({"compare", "-c", (dir / "c.json").string(), "-o", (dir / "out").string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("agent.discount") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("gradcheck reports the worst relative error") {
    const Outcome r = run({"gradcheck", "-n", "5"});
    CHECK(r.code == 0);
    CHECK(r.out.find("max relative error") != std::string::npos);
    CHECK(r.out.find("FAIL") == std::string::npos);
}

TEST_CASE("compare is byte-identical across runs with a fixed seed") {
    const fs::path dir = scratch("compare");
    const fs::path config = small_config(dir);
    for (const char* sub : {"a", "b"}) {
        const Outcome r = run({"compare", "-c", config.string(), "-s", "7", "-o", (dir / sub).string()});
        REQUIRE(r.code == 0);
        CHECK(r.out.find("EMGRL") != std::string::npos);
    }
    for (const char* name : {"report.json", "report.txt", "report_long.csv"}) {
        CAPTURE(name);
        REQUIRE(fs::exists(dir / "a" / name));
        CHECK(slurp(dir / "a" / name) == slurp(dir / "b" / name));
    }
    const auto resolved = eval::load_run_config(dir / "a" / "config.resolved.json");
    CHECK(resolved.seed == 7);
    fs::remove_all(dir);
}

TEST_CASE("synth, train and evaluate chain through a checkpoint") {
    const fs::path dir = scratch("chain");
    const fs::path config = small_config(dir);
    REQUIRE(run({"synth", "-c", config.string(), "-o", (dir / "synth").string()}).code == 0);
    for (const char* name : {"series.csv", "farms.csv", "regimes.csv", "config.resolved.json"})
        CHECK(fs::exists(dir / "synth" / name));
    REQUIRE(run({"train", "-c", config.string(), "-o", (dir / "ckpt").string()}).code == 0);
    CHECK(fs::exists(dir / "ckpt" / "train_log.csv"));
    const Outcome r = run({"evaluate", "-k", (dir / "ckpt").string(), "-o", (dir / "eval").string()});
    CHECK(r.code == 0);
    CHECK(fs::exists(dir / "eval" / "report.json"));
    fs::remove_all(dir);
}

TEST_CASE("output directory falls back to the environment variable") {
    const fs::path dir = scratch("env");
    const fs::path config = small_config(dir);
    ::setenv(cli::kOutputEnv, (dir / "from_env").string().c_str(), 1);
    CHECK(run({"synth", "-c", config.string()}).code == 0);
    CHECK(fs::exists(dir / "from_env" / "series.csv"));
    CHECK(run({"synth", "-c", config.string(), "-o", (dir / "explicit").string()}).code == 0);
    CHECK(fs::exists(dir / "explicit" / "series.csv"));
    ::unsetenv(cli::kOutputEnv);
    fs::remove_all(dir);
}
