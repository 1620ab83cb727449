#pragma once

// Minimal RFC 4180 reader/writer: comma separator, double-quote quoting,
// doubled quotes as escapes, quoted fields may span lines.

#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace linedp::csv {

using Row = std::vector<std::string>;

class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    // Reads the next record.  Returns std::nullopt at end of input.
    // Throws std::runtime_error on an unterminated quoted field.
    std::optional<Row> next();

    // 1-based physical line on which the last returned record started.
    std::size_t record_line() const noexcept { return record_line_; }

private:
    std::istream& in_;
    std::size_t line_ = 1;
    std::size_t record_line_ = 0;
};

std::string quote(std::string_view field);

void write_row(std::ostream& out, std::span<const std::string> fields);
void write_row(std::ostream& out, std::initializer_list<std::string_view> fields);

// Shortest round-trip decimal form of a double; "NA" for missing values.
std::string format_double(double v);
std::string format_optional(const std::optional<double>& v);

// Maps header names to column positions, failing on missing columns.
class Header {
public:
    Header(const Row& header, std::span<const std::string_view> required);
    std::size_t operator[](std::string_view name) const;
    bool has(std::string_view name) const;

private:
    Row names_;
};

}  // namespace linedp::csv
