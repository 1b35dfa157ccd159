#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace frontier_lab::csv {

using Row = std::vector<std::string>;

/// RFC-4180 records: quoted fields, "" escapes, LF or CRLF line ends.
/// Lines starting with '#' outside quotes are skipped when skip_comments is set.
std::vector<Row> parse(std::string_view text, bool skip_comments = false);
std::vector<Row> read_file(const std::filesystem::path& path, bool skip_comments = false);

/// Quotes a field only when it contains a comma, quote, CR or LF.
std::string quote(std::string_view field);
/// Fields joined with commas, terminated by "\n".
std::string format_row(const Row& row);

/// Shortest decimal form that round-trips to the same double; "nan", "inf", "-inf" otherwise.
std::string format_number(double value);

}  // namespace frontier_lab::csv
