#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "emgrl/data/frame.hpp"

namespace emgrl::data {

/// Parsed CSV: header plus data rows, each with its 1-based source line.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> lines;

    /// Index of a header column; throws when absent.
    std::size_t column(const std::string& name) const;
};

/// RFC-4180 reader: quoted fields, doubled quotes, embedded newlines, CRLF.
CsvTable read_csv(std::istream& in, const std::string& source = "<stream>");
CsvTable read_csv_file(const std::filesystem::path& path);
/// Writes one record, quoting fields that need it.
void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

enum class Layout { wide, long_format };
enum class TimestampFormat { iso8601, epoch };

/// Parses ISO-8601 ("YYYY-MM-DD", "YYYY-MM-DDTHH:MM[:SS][Z]", space separator
/// allowed) into UTC epoch seconds. Returns nullopt on malformed text.
std::optional<std::int64_t> parse_iso8601(const std::string& text);
/// Formats as "YYYY-MM-DDTHH:MM:SSZ".
std::string format_iso8601(std::int64_t epoch_seconds);
/// Shortest text that parses back to the same double.
std::string format_double(double x);

struct SchemaDescriptor {
    Layout layout = Layout::wide;
    std::string timestamp_column = "timestamp";
    TimestampFormat timestamp_format = TimestampFormat::iso8601;
    /// Wide layout: farm columns to read; empty means every non-timestamp column.
    std::vector<std::string> power_columns;
    /// Long layout columns.
    std::string farm_id_column = "farm_id";
    std::string power_column = "power";
    /// Expected step; inferred as the smallest positive spacing when absent.
    std::optional<std::int64_t> step_seconds;
    bool forward_fill = false;
    std::size_t max_fill_gap = 3;
};

struct GapRecord {
    std::string farm_id;
    std::int64_t after_timestamp = 0;
    std::size_t missing_steps = 0;
    bool filled = false;
};

struct LoadResult {
    std::vector<TimeSeriesFrame> frames;
    std::vector<GapRecord> gaps;
};

/// One frame per farm, sorted by timestamp. Malformed timestamps, non-numeric
/// power and duplicate timestamps raise ParseError with the source line.
/// Gaps are rejected unless `forward_fill` is set and the gap is within
/// `max_fill_gap` steps.
LoadResult load_series_csv(const std::filesystem::path& path, const SchemaDescriptor& schema);
LoadResult parse_series_csv(std::istream& in, const SchemaDescriptor& schema, const std::string& source);

/// Writes frames in `schema`'s layout. Wide layout requires aligned timestamps.
void write_series_csv(const std::filesystem::path& path, const std::vector<TimeSeriesFrame>& frames,
                      const SchemaDescriptor& schema);
void write_series_csv(std::ostream& out, const std::vector<TimeSeriesFrame>& frames,
                      const SchemaDescriptor& schema);

/// Columns farm_id, latitude, longitude[, capacity].
std::vector<FarmMeta> load_farm_meta(const std::filesystem::path& path);
void write_farm_meta(const std::filesystem::path& path, const std::vector<FarmMeta>& farms);

}  // namespace emgrl::data
