#include "linedp/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>

namespace linedp::csv {

std::optional<Row> Reader::next() {
    int c = in_.get();
    if (c == std::char_traits<char>::eof()) return std::nullopt;
    record_line_ = line_;

    Row row;
    std::string field;
    bool quoted = false;
    bool field_was_quoted = false;
    for (;; c = in_.get()) {
        if (c == std::char_traits<char>::eof()) {
            if (quoted) {
                throw std::runtime_error("unterminated quoted field starting on line " +
                                         std::to_string(record_line_));
            }
            row.push_back(std::move(field));
            return row;
        }
        const char ch = static_cast<char>(c);
        if (quoted) {
            if (ch == '"') {
                if (in_.peek() == '"') {
                    in_.get();
                    field.push_back('"');
                } else {
                    quoted = false;
                }
            } else {
                if (ch == '\n') ++line_;
                field.push_back(ch);
            }
            continue;
        }
        if (ch == '"' && field.empty() && !field_was_quoted) {
            quoted = true;
            field_was_quoted = true;
        } else if (ch == ',') {
            row.push_back(std::move(field));
            field.clear();
            field_was_quoted = false;
        } else if (ch == '\n' || ch == '\r') {
            if (ch == '\r' && in_.peek() == '\n') in_.get();
            ++line_;
            row.push_back(std::move(field));
            return row;
        } else {
            field.push_back(ch);
        }
    }
}

std::string quote(std::string_view field) {
    const bool needs = field.find_first_of(",\"\r\n") != std::string_view::npos ||
                       (!field.empty() && (field.front() == ' ' || field.back() == ' '));
    if (!needs) return std::string{field};
    std::string out;
    out.reserve(field.size() + 2);
    out.push_back('"');
    for (char ch : field) {
        if (ch == '"') out.push_back('"');
        out.push_back(ch);
    }
    out.push_back('"');
    return out;
}

void write_row(std::ostream& out, std::span<const std::string> fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i != 0) out.put(',');
        out << quote(fields[i]);
    }
    out.put('\n');
}

void write_row(std::ostream& out, std::initializer_list<std::string_view> fields) {
    bool first = true;
    for (auto f : fields) {
        if (!first) out.put(',');
        first = false;
        out << quote(f);
    }
    out.put('\n');
}

std::string format_double(double v) {
    if (std::isnan(v)) return "NA";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string format_optional(const std::optional<double>& v) {
    return v ? format_double(*v) : std::string{"NA"};
}

Header::Header(const Row& header, std::span<const std::string_view> required) : names_(header) {
    if (!names_.empty() && names_.front().starts_with("\xEF\xBB\xBF"))
        names_.front().erase(0, 3);
    for (auto name : required) {
        if (!has(name)) throw std::runtime_error("missing column '" + std::string{name} + "'");
    }
}

std::size_t Header::operator[](std::string_view name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) throw std::runtime_error("missing column '" + std::string{name} + "'");
    return static_cast<std::size_t>(it - names_.begin());
}

bool Header::has(std::string_view name) const {
    return std::find(names_.begin(), names_.end(), name) != names_.end();
}

}  // namespace linedp::csv
