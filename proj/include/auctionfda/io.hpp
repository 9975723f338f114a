#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace auctionfda::io {

struct CsvRow {
    std::size_t line = 0;  // 1-based line number in the source
    std::vector<std::string> fields;
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<CsvRow> rows;
    bool empty_source = false;  // no header line at all
};

/// Reads comma-separated text. Blank lines and lines starting with '#' are
/// skipped; double-quoted fields may contain commas and doubled quotes.
CsvTable read_csv(std::istream& in, std::string_view source);

CsvTable read_csv_file(const std::filesystem::path& path);

/// Column index by header name, or ParseError naming the missing column.
std::size_t require_column(const CsvTable& table, std::string_view name, std::string_view source);

/// Quotes a field only when it contains a comma, quote or newline.
std::string csv_escape(std::string_view field);

/// Shortest decimal text that round-trips to the same double.
std::string format_real(double value);

/// Fixed notation with the given number of fractional digits.
std::string format_fixed(double value, int digits);

std::optional<double> parse_real(std::string_view text);
std::optional<long long> parse_integer(std::string_view text);

/// Parses "YYYY-MM-DDTHH:MM:SS[.fff][Z|+00:00]" (a space may replace 'T') into
/// seconds since the Unix epoch. Only UTC is accepted.
std::optional<double> parse_iso8601(std::string_view text);

/// Formats seconds since the epoch as ISO-8601 UTC with millisecond precision
/// when the value has a fractional part.
std::string format_iso8601(double epoch_seconds);

std::string trim(std::string_view text);
std::string to_lower(std::string_view text);

std::string read_file(const std::filesystem::path& path);

/// Hex SHA-256 digest of a byte string.
std::string sha256_hex(std::string_view bytes);

}  // namespace auctionfda::io
