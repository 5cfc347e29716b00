#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <sstream>

#include "emgrl/data/csv.hpp"
#include "emgrl/data/graph.hpp"
#include "emgrl/data/synthetic.hpp"
#include "emgrl/error.hpp"

using namespace emgrl;
using namespace emgrl::data;

namespace {

TimeSeriesFrame make_frame(std::vector<double> power, std::int64_t step = 600, std::int64_t start = 0) {
    TimeSeriesFrame f;
    f.farm_id = "A";
    f.power = std::move(power);
    for (std::size_t i = 0; i < f.power.size(); ++i) f.timestamps.push_back(start + static_cast<std::int64_t>(i) * step);
    return f;
}

FarmMeta farm(std::string id, double lat, double lon) {
    FarmMeta m;
    m.farm_id = std::move(id);
    m.latitude = lat;
    m.longitude = lon;
    return m;
}

double correlation(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

std::vector<double> diffs(const std::vector<double>& x) {
    std::vector<double> d;
    for (std::size_t i = 1; i < x.size(); ++i) d.push_back(x[i] - x[i - 1]);
    return d;
}

}  // namespace

TEST_CASE("wide CSV parsing") {
    std::istringstream in(
        "timestamp,A,B\n"
        "2010-01-01T00:00:00Z,1,5\n"
        "2010-01-01T00:10:00Z,2,6\n"
        "2010-01-01T00:20:00Z,3,7\n"
        "2010-01-01T00:30:00Z,4,8\n");
    const LoadResult r = parse_series_csv(in, SchemaDescriptor{}, "wide.csv");
    REQUIRE(r.frames.size() == 2);
    CHECK(r.frames[0].farm_id == "A");
    CHECK(r.frames[0].power == std::vector<double>{1, 2, 3, 4});
    CHECK(r.frames[1].power == std::vector<double>{5, 6, 7, 8});
    CHECK(r.frames[0].step() == 600);
}

TEST_CASE("duplicate timestamp names the offending row") {
    std::istringstream in(
        "timestamp,A\n"
        "2010-01-01T00:00:00Z,1\n"
        "2010-01-01T00:10:00Z,2\n"
        "2010-01-01T00:10:00Z,3\n");
    try {
        parse_series_csv(in, SchemaDescriptor{}, "dup.csv");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 4);
        CHECK(e.source() == "dup.csv");
    }
}

TEST_CASE("malformed values raise ParseError with the row") {
    std::istringstream bad_time("timestamp,A\n2010-01-01T00:00:00Z,1\nnot-a-date,2\n");
    CHECK_THROWS_AS(parse_series_csv(bad_time, SchemaDescriptor{}, "t.csv"), ParseError);
    std::istringstream bad_power("timestamp,A\n2010-01-01T00:00:00Z,1\n2010-01-01T00:10:00Z,abc\n");
    try {
        parse_series_csv(bad_power, SchemaDescriptor{}, "p.csv");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
}

TEST_CASE("hourly long-format file round-trips through load, write, load") {
    SchemaDescriptor schema;
    schema.layout = Layout::long_format;
    schema.farm_id_column = "zone";
    schema.power_column = "power";
    std::vector<TimeSeriesFrame> frames;
    for (int z = 1; z <= 3; ++z) {
        TimeSeriesFrame f = make_frame({}, 3600, 1325376000);
        f.farm_id = "zone" + std::to_string(z);
        for (int i = 0; i < 48; ++i) {
            f.timestamps.push_back(1325376000 + i * 3600);
            f.power.push_back(0.01 * ((i * 7 + z * 13) % 100) + 1e-17 * i);
        }
        frames.push_back(f);
    }
    const auto dir = std::filesystem::temp_directory_path() / "emgrl_data_roundtrip";
    std::filesystem::create_directories(dir);
    write_series_csv(dir / "a.csv", frames, schema);
    const LoadResult first = load_series_csv(dir / "a.csv", schema);
    write_series_csv(dir / "b.csv", first.frames, schema);
    const LoadResult second = load_series_csv(dir / "b.csv", schema);
    CHECK(first.frames == frames);
    CHECK(second.frames == first.frames);
    std::filesystem::remove_all(dir);
}

TEST_CASE("RFC-4180 quoting") {
    std::istringstream in("a,b\r\n\"x,\"\"y\"\"\",\"line1\nline2\"\r\n");
    const CsvTable t = read_csv(in);
    REQUIRE(t.rows.size() == 1);
    CHECK(t.rows[0][0] == "x,\"y\"");
    CHECK(t.rows[0][1] == "line1\nline2");
    std::ostringstream out;
    write_csv_row(out, t.rows[0]);
    std::istringstream again("a,b\n" + out.str());
    CHECK(read_csv(again).rows[0] == t.rows[0]);
}

TEST_CASE("ISO-8601 parsing") {
    CHECK(parse_iso8601("1970-01-01") == 0);
    CHECK(parse_iso8601("2010-01-01T00:00:00Z") == 1262304000);
    CHECK(parse_iso8601("2010-01-01 00:10") == 1262304600);
    CHECK_FALSE(parse_iso8601("2010-13-01").has_value());
    CHECK(format_iso8601(1262304600) == "2010-01-01T00:10:00Z");
}

TEST_CASE("min-max normalization") {
    const auto [norm, scaler] = normalize_minmax(make_frame({0, 8, 16}));
    CHECK(norm.power == std::vector<double>{0, 0.5, 1});
    CHECK(scaler.min == 0);
    CHECK(scaler.max == 16);
    CHECK(inverse_transform(norm).power == std::vector<double>{0, 8, 16});

    const TimeSeriesFrame unit = make_frame({0, 0.25, 1});
    CHECK(apply_scaler(unit, Scaler{0, 1}).power == unit.power);
    CHECK_THROWS_AS(normalize_minmax(make_frame({2, 2, 2})), std::invalid_argument);
}

TEST_CASE("chronological split") {
    const TimeSeriesFrame f = make_frame({1, 2, 3, 4, 5});
    const auto [train0, test0] = split_by_date(f, f.timestamps.front());
    CHECK(train0.empty());
    CHECK(test0.power == f.power);
    const auto [train, test] = split_by_date(f, f.timestamps[3]);
    CHECK(train.size() + test.size() == f.size());
    CHECK(train.power == std::vector<double>{1, 2, 3});
    CHECK(test.timestamps.front() == f.timestamps[3]);
    CHECK_THROWS_AS(split_by_date(f, f.timestamps.back() + 10 * 600), std::out_of_range);
    CHECK_THROWS_AS(split_by_date(f, f.timestamps.front() - 600), std::out_of_range);
}

TEST_CASE("sliding windows") {
    CHECK(sliding_windows(make_frame({1, 2, 3, 4, 5}), 3, 1).size() == 2);
    const auto w = sliding_windows(make_frame({1, 2, 3, 4}), 2, 1);
    REQUIRE(w.size() == 2);
    CHECK(w[0].window == std::vector<double>{1, 2});
    CHECK(w[0].target == 3);
    CHECK(w[0].t_index == 1);
    CHECK(w[1].window == std::vector<double>{2, 3});
    CHECK(w[1].target == 4);
    try {
        sliding_windows(make_frame({1, 2, 3}), 3, 2);
        FAIL("expected LengthError");
    } catch (const LengthError& e) {
        CHECK(e.required() == 5);
    }
}

TEST_CASE("k-nearest-neighbor graph") {
    SUBCASE("single farm has no edges") {
        const auto g = build_graph({farm("solo", 10, 10)}, 3);
        CHECK(g.edge_count() == 0);
    }
    SUBCASE("collinear farms match a brute-force nearest-neighbor oracle") {
        std::vector<FarmMeta> farms{farm("f0", 0, 0), farm("f1", 0, 1), farm("f3", 0, 3)};
        const auto g = build_graph(farms, 1);
        for (std::size_t v = 0; v < 3; ++v) {
            std::size_t best = v;
            double best_d = 1e300;
            for (std::size_t u = 0; u < 3; ++u) {
                if (u == v) continue;
                const double d = haversine_km(farms[v].latitude, farms[v].longitude, farms[u].latitude, farms[u].longitude);
                if (d < best_d) best_d = d, best = u;
            }
            REQUIRE(g.neighbors[v].size() == 1);
            CHECK(g.neighbors[v][0] == best);
        }
        CHECK(g.neighbors[g.index_of("f0")][0] == g.index_of("f1"));
        CHECK(g.neighbors[g.index_of("f1")][0] == g.index_of("f0"));
        CHECK(g.neighbors[g.index_of("f3")][0] == g.index_of("f1"));
    }
    SUBCASE("six farms in two clusters, k=2, every node has degree 2") {
        std::vector<FarmMeta> farms{farm("A", 40.0, -70.0), farm("B", 40.1, -70.1), farm("C", 40.05, -69.9),
                                    farm("D", 41.0, -71.0), farm("E", 41.1, -71.1), farm("F", 41.05, -70.9)};
        const auto g = build_graph(farms, 2);
        g.validate();
        for (const auto& n : g.neighbors) CHECK(n.size() == 2);
        CHECK(g.edge_count() == 12);
    }
    SUBCASE("duplicate farm ids are rejected") {
        CHECK_THROWS_AS(build_graph({farm("A", 1, 1), farm("A", 1, 1)}, 1), std::invalid_argument);
    }
    CHECK(haversine_km(0, 0, 0, 1) == doctest::Approx(111.195).epsilon(1e-4));
}

TEST_CASE("synthetic corpus") {
    SyntheticConfig cfg;
    cfg.length = 600;
    const SyntheticCorpus a = gen_synthetic(cfg, 9);
    const SyntheticCorpus b = gen_synthetic(cfg, 9);
    CHECK(a.frames == b.frames);
    CHECK(a.farms == b.farms);
    CHECK(a.regimes == b.regimes);
    CHECK(a.frames.size() == cfg.farms);
    CHECK(a.regimes[0] == RegimeKind::ar1);
    CHECK(a.regimes[250] == RegimeKind::trend);
    for (const auto& f : a.frames) {
        CHECK(*std::min_element(f.power.begin(), f.power.end()) == 0.0);
        CHECK(*std::max_element(f.power.begin(), f.power.end()) == 1.0);
    }
    CHECK_FALSE(gen_synthetic(cfg, 10).frames == a.frames);

    SyntheticConfig bad;
    bad.length = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("zero spatial correlation gives independent farms") {
    SyntheticConfig cfg;
    cfg.farms = 2;
    cfg.length = 10000;
    cfg.schedule = {{RegimeKind::ar1, 10000}};
    cfg.correlation_length_km = 0.0;
    const auto c = gen_synthetic(cfg, 4);
    CHECK(std::abs(correlation(c.frames[0].power, c.frames[1].power)) < 0.1);

    cfg.correlation_length_km = 400.0;
    const auto d = gen_synthetic(cfg, 4);
    CHECK(correlation(diffs(d.frames[0].power), diffs(d.frames[1].power)) > 0.5);
}
