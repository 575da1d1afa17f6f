#include "fwmqkd/csv.hpp"

#include <array>
#include <charconv>
#include <cmath>

#include "fwmqkd/error.hpp"

namespace fwmqkd::csv {

namespace {

template <typename T>
std::string to_chars_string(T value) {
    std::array<char, 64> buf{};
    const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    if (ec != std::errc{}) throw ParameterError("number formatting failed");
    return std::string(buf.data(), end);
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string> split(std::string_view line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        fields.emplace_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return fields;
}

}  // namespace

std::string format_number(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    if (value == 0.0) return "0";  // folds -0
    return to_chars_string(value);
}

std::string format_number(std::int64_t value) { return to_chars_string(value); }
std::string format_number(std::uint64_t value) { return to_chars_string(value); }

double parse_number(std::string_view field) {
    field = trim(field);
    if (field == "nan") return std::nan("");
    if (field == "inf") return HUGE_VAL;
    if (field == "-inf") return -HUGE_VAL;
    if (!field.empty() && field.front() == '+') field.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size()) {
        throw InputError("not a number: '" + std::string(field) + "'");
    }
    return v;
}

std::optional<std::size_t> Table::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    return std::nullopt;
}

Table parse(std::string_view text) {
    Table t;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        const auto line = trim(text.substr(0, nl));
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (line.empty()) continue;
        auto fields = split(line);
        if (t.header.empty()) {
            t.header = std::move(fields);
            continue;
        }
        if (fields.size() != t.header.size()) {
            throw InputError("line " + std::to_string(line_no) + ": expected " + std::to_string(t.header.size()) +
                             " fields, found " + std::to_string(fields.size()));
        }
        t.rows.push_back(std::move(fields));
    }
    if (t.header.empty()) throw InputError("empty CSV document");
    return t;
}

Writer::Writer(const std::vector<std::string>& header) : width_(header.size()) {
    if (header.empty()) throw ParameterError("CSV header must not be empty");
    for (const auto& h : header) cell(h);
    end_row();
    rows_ = 0;
}

Writer& Writer::cell(std::string_view text) {
    if (filled_ == width_) throw ParameterError("CSV row has too many fields");
    if (filled_ > 0) out_.push_back(',');
    out_.append(text);
    ++filled_;
    return *this;
}

void Writer::end_row() {
    if (filled_ != width_) throw ParameterError("CSV row has too few fields");
    out_.push_back('\n');
    filled_ = 0;
    ++rows_;
}

}  // namespace fwmqkd::csv
