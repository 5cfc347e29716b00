#include "emgrl/data/csv.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "emgrl/error.hpp"

namespace emgrl::data {

std::size_t CsvTable::column(const std::string& name) const {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw std::invalid_argument("CSV: missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
}

CsvTable read_csv(std::istream& in, const std::string& source) {
    CsvTable table;
    std::vector<std::string> record;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    std::size_t line = 1;
    std::size_t record_line = 1;

    auto end_field = [&] {
        record.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_record = [&] {
        end_field();
        const bool blank = record.size() == 1 && record[0].empty();
        if (!blank) {
            if (table.header.empty() && table.rows.empty()) {
                table.header = std::move(record);
            } else {
                if (record.size() != table.header.size())
                    throw ParseError(source, record_line,
                                     "expected " + std::to_string(table.header.size()) + " fields, got " +
                                         std::to_string(record.size()));
                table.rows.push_back(std::move(record));
                table.lines.push_back(record_line);
            }
        }
        record.clear();
    };

    char c;
    while (in.get(c)) {
        if (in_quotes) {
            if (c == '"') {
                if (in.peek() == '"') {
                    in.get(c);
                    field.push_back('"');
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++line;
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
            case '"':
                if (field_started) throw ParseError(source, line, "quote inside unquoted field");
                in_quotes = true;
                field_started = true;
                break;
            case ',':
                end_field();
                break;
            case '\r':
                if (in.peek() != '\n') field.push_back(c);
                break;
            case '\n':
                end_record();
                ++line;
                record_line = line;
                break;
            default:
                field.push_back(c);
                field_started = true;
        }
    }
    if (in_quotes) throw ParseError(source, record_line, "unterminated quoted field");
    if (!field.empty() || !record.empty()) end_record();
    if (table.header.empty()) throw ParseError(source, 1, "missing header row");
    return table;
}

CsvTable read_csv_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return read_csv(in, path.string());
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out << ',';
        const std::string& f = fields[i];
        if (f.find_first_of(",\"\r\n") == std::string::npos) {
            out << f;
            continue;
        }
        out << '"';
        for (char c : f) {
            if (c == '"') out << '"';
            out << c;
        }
        out << '"';
    }
    out << '\n';
}

// ---------------------------------------------------------------------------
// Scalars

namespace {

bool parse_int(std::string_view s, int& out) {
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

bool parse_int64(std::string_view s, std::int64_t& out) {
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size() && !s.empty();
}

bool parse_number(const std::string& s, double& out) {
    if (s.empty()) return false;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (*first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last && std::isfinite(out);
}

}  // namespace

std::optional<std::int64_t> parse_iso8601(const std::string& text) {
    std::string_view s = text;
    if (!s.empty() && (s.back() == 'Z' || s.back() == 'z')) s.remove_suffix(1);
    if (s.size() < 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;
    if (!parse_int(s.substr(0, 4), y) || !parse_int(s.substr(5, 2), mo) || !parse_int(s.substr(8, 2), d))
        return std::nullopt;
    if (s.size() > 10) {
        if (s[10] != 'T' && s[10] != ' ') return std::nullopt;
        auto rest = s.substr(11);
        if (rest.size() != 5 && rest.size() != 8) return std::nullopt;
        if (rest[2] != ':' || !parse_int(rest.substr(0, 2), h) || !parse_int(rest.substr(3, 2), mi))
            return std::nullopt;
        if (rest.size() == 8 && (rest[5] != ':' || !parse_int(rest.substr(6, 2), sec))) return std::nullopt;
    }
    using namespace std::chrono;
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || h > 23 || mi > 59 || sec > 59 || h < 0 || mi < 0 || sec < 0) return std::nullopt;
    const auto days = sys_days{ymd}.time_since_epoch().count();
    return static_cast<std::int64_t>(days) * 86400 + h * 3600 + mi * 60 + sec;
}

std::string format_iso8601(std::int64_t epoch_seconds) {
    using namespace std::chrono;
    std::int64_t days = epoch_seconds / 86400;
    std::int64_t rem = epoch_seconds % 86400;
    if (rem < 0) {
        rem += 86400;
        --days;
    }
    const year_month_day ymd{sys_days{std::chrono::days{days}}};
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), static_cast<int>(rem / 3600),
                  static_cast<int>(rem / 60 % 60), static_cast<int>(rem % 60));
    return buf;
}

std::string format_double(double x) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    if (ec != std::errc{}) throw std::runtime_error("format_double failed");
    return std::string(buf, end);
}

// ---------------------------------------------------------------------------
// Series

namespace {

struct RawPoint {
    std::int64_t timestamp;
    double power;
    std::size_t line;
};

std::int64_t parse_timestamp(const std::string& text, TimestampFormat fmt, const std::string& source,
                             std::size_t line) {
    if (fmt == TimestampFormat::epoch) {
        std::int64_t v = 0;
        if (!parse_int64(text, v)) throw ParseError(source, line, "unparseable epoch timestamp '" + text + "'");
        return v;
    }
    auto v = parse_iso8601(text);
    if (!v) throw ParseError(source, line, "unparseable ISO-8601 timestamp '" + text + "'");
    return *v;
}

TimeSeriesFrame assemble(const std::string& farm_id, std::vector<RawPoint> points, const SchemaDescriptor& schema,
                         std::int64_t step, const std::string& source, std::vector<GapRecord>& gaps) {
    std::stable_sort(points.begin(), points.end(),
                     [](const RawPoint& a, const RawPoint& b) { return a.timestamp < b.timestamp; });
    TimeSeriesFrame frame;
    frame.farm_id = farm_id;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const RawPoint& p = points[i];
        if (i > 0) {
            const RawPoint& prev = points[i - 1];
            const std::int64_t diff = p.timestamp - prev.timestamp;
            if (diff == 0)
                throw ParseError(source, std::max(p.line, prev.line),
                                 "duplicate timestamp " + std::to_string(p.timestamp) + " for farm '" + farm_id + "'");
            if (diff % step != 0)
                throw ParseError(source, p.line, "timestamp off the " + std::to_string(step) + " s grid");
            const auto missing = static_cast<std::size_t>(diff / step - 1);
            if (missing > 0) {
                GapRecord gap{farm_id, prev.timestamp, missing, false};
                if (!schema.forward_fill || missing > schema.max_fill_gap)
                    throw ParseError(source, p.line,
                                     std::to_string(missing) + " missing step(s) before this row for farm '" +
                                         farm_id + "'");
                for (std::size_t k = 1; k <= missing; ++k) {
                    frame.timestamps.push_back(prev.timestamp + static_cast<std::int64_t>(k) * step);
                    frame.power.push_back(prev.power);
                }
                gap.filled = true;
                gaps.push_back(gap);
            }
        }
        frame.timestamps.push_back(p.timestamp);
        frame.power.push_back(p.power);
    }
    return frame;
}

std::int64_t infer_step(const std::map<std::string, std::vector<RawPoint>>& per_farm,
                        const SchemaDescriptor& schema) {
    if (schema.step_seconds) {
        if (*schema.step_seconds <= 0) throw std::invalid_argument("schema: step_seconds must be positive");
        return *schema.step_seconds;
    }
    std::int64_t best = 0;
    for (const auto& [_, pts] : per_farm) {
        std::vector<std::int64_t> ts;
        ts.reserve(pts.size());
        for (const auto& p : pts) ts.push_back(p.timestamp);
        std::sort(ts.begin(), ts.end());
        for (std::size_t i = 1; i < ts.size(); ++i) {
            const std::int64_t d = ts[i] - ts[i - 1];
            if (d > 0 && (best == 0 || d < best)) best = d;
        }
    }
    return best == 0 ? 1 : best;
}

}  // namespace

LoadResult parse_series_csv(std::istream& in, const SchemaDescriptor& schema, const std::string& source) {
    const CsvTable table = read_csv(in, source);
    const std::size_t ts_col = table.column(schema.timestamp_column);

    // Preserve first-appearance order of farms.
    std::vector<std::string> order;
    std::map<std::string, std::vector<RawPoint>> per_farm;

    auto number = [&](const std::string& text, std::size_t line, const std::string& farm) {
        double v = 0.0;
        if (!parse_number(text, v))
            throw ParseError(source, line, "non-numeric power '" + text + "' for farm '" + farm + "'");
        return v;
    };

    if (schema.layout == Layout::wide) {
        std::vector<std::string> cols = schema.power_columns;
        if (cols.empty())
            for (std::size_t c = 0; c < table.header.size(); ++c)
                if (c != ts_col) cols.push_back(table.header[c]);
        if (cols.empty()) throw ParseError(source, 1, "no power columns");
        std::vector<std::size_t> idx;
        for (const auto& name : cols) {
            idx.push_back(table.column(name));
            order.push_back(name);
            per_farm[name];
        }
        for (std::size_t r = 0; r < table.rows.size(); ++r) {
            const auto& row = table.rows[r];
            const std::size_t line = table.lines[r];
            const std::int64_t ts = parse_timestamp(row[ts_col], schema.timestamp_format, source, line);
            for (std::size_t j = 0; j < idx.size(); ++j)
                per_farm[cols[j]].push_back({ts, number(row[idx[j]], line, cols[j]), line});
        }
    } else {
        const std::size_t id_col = table.column(schema.farm_id_column);
        const std::size_t p_col = table.column(schema.power_column);
        for (std::size_t r = 0; r < table.rows.size(); ++r) {
            const auto& row = table.rows[r];
            const std::size_t line = table.lines[r];
            const std::string& farm = row[id_col];
            if (farm.empty()) throw ParseError(source, line, "empty farm id");
            const std::int64_t ts = parse_timestamp(row[ts_col], schema.timestamp_format, source, line);
            auto [it, inserted] = per_farm.try_emplace(farm);
            if (inserted) order.push_back(farm);
            it->second.push_back({ts, number(row[p_col], line, farm), line});
        }
    }

    const std::int64_t step = infer_step(per_farm, schema);
    LoadResult result;
    for (const auto& farm : order)
        result.frames.push_back(assemble(farm, std::move(per_farm[farm]), schema, step, source, result.gaps));
    return result;
}

LoadResult load_series_csv(const std::filesystem::path& path, const SchemaDescriptor& schema) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open series file " + path.string());
    return parse_series_csv(in, schema, path.string());
}

void write_series_csv(std::ostream& out, const std::vector<TimeSeriesFrame>& frames,
                      const SchemaDescriptor& schema) {
    auto ts_text = [&](std::int64_t ts) {
        return schema.timestamp_format == TimestampFormat::epoch ? std::to_string(ts) : format_iso8601(ts);
    };
    if (schema.layout == Layout::wide) {
        std::vector<std::string> header{schema.timestamp_column};
        for (const auto& f : frames) header.push_back(f.farm_id);
        write_csv_row(out, header);
        if (frames.empty()) return;
        const auto& ts = frames.front().timestamps;
        for (const auto& f : frames)
            if (f.timestamps != ts)
                throw std::invalid_argument("write_series_csv: wide layout requires aligned timestamps");
        for (std::size_t i = 0; i < ts.size(); ++i) {
            std::vector<std::string> row{ts_text(ts[i])};
            for (const auto& f : frames) row.push_back(format_double(f.power[i]));
            write_csv_row(out, row);
        }
        return;
    }
    write_csv_row(out, {schema.timestamp_column, schema.farm_id_column, schema.power_column});
    for (const auto& f : frames)
        for (std::size_t i = 0; i < f.size(); ++i)
            write_csv_row(out, {ts_text(f.timestamps[i]), f.farm_id, format_double(f.power[i])});
}

void write_series_csv(const std::filesystem::path& path, const std::vector<TimeSeriesFrame>& frames,
                      const SchemaDescriptor& schema) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    write_series_csv(out, frames, schema);
}

// ---------------------------------------------------------------------------
// Farm metadata

std::vector<FarmMeta> load_farm_meta(const std::filesystem::path& path) {
    const CsvTable table = read_csv_file(path);
    const std::size_t id = table.column("farm_id");
    const std::size_t lat = table.column("latitude");
    const std::size_t lon = table.column("longitude");
    const auto cap_it = std::find(table.header.begin(), table.header.end(), "capacity");
    std::vector<FarmMeta> farms;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        FarmMeta m;
        m.farm_id = row[id];
        if (!parse_number(row[lat], m.latitude) || !parse_number(row[lon], m.longitude))
            throw ParseError(path.string(), table.lines[r], "non-numeric coordinate");
        if (cap_it != table.header.end()) {
            const std::string& c = row[static_cast<std::size_t>(cap_it - table.header.begin())];
            if (!c.empty()) {
                double v = 0.0;
                if (!parse_number(c, v)) throw ParseError(path.string(), table.lines[r], "non-numeric capacity");
                m.capacity = v;
            }
        }
        try {
            m.validate();
        } catch (const std::invalid_argument& e) {
            throw ParseError(path.string(), table.lines[r], e.what());
        }
        for (const auto& other : farms)
            if (other.farm_id == m.farm_id)
                throw ParseError(path.string(), table.lines[r], "duplicate farm_id '" + m.farm_id + "'");
        farms.push_back(std::move(m));
    }
    return farms;
}

void write_farm_meta(const std::filesystem::path& path, const std::vector<FarmMeta>& farms) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    const bool any_capacity = std::any_of(farms.begin(), farms.end(), [](const FarmMeta& m) { return m.capacity; });
    std::vector<std::string> header{"farm_id", "latitude", "longitude"};
    if (any_capacity) header.push_back("capacity");
    write_csv_row(out, header);
    for (const auto& m : farms) {
        std::vector<std::string> row{m.farm_id, format_double(m.latitude), format_double(m.longitude)};
        if (any_capacity) row.push_back(m.capacity ? format_double(*m.capacity) : "");
        write_csv_row(out, row);
    }
}

}  // namespace emgrl::data
