#pragma once

// Minimal CSV for the pipeline's numeric tables: '.' decimal, shortest
// round-trip number formatting, LF line endings, mandatory header, no quoting.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fwmqkd::csv {

/// Shortest representation that parses back to the same double; "nan", "inf", "-inf".
std::string format_number(double value);
std::string format_number(std::int64_t value);
std::string format_number(std::uint64_t value);

/// Strict parse of a whole field; InputError on trailing garbage.
double parse_number(std::string_view field);

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::optional<std::size_t> column(std::string_view name) const;
};

/// InputError on an empty document or rows whose width differs from the header.
Table parse(std::string_view text);

class Writer {
public:
    explicit Writer(const std::vector<std::string>& header);

    Writer& cell(std::string_view text);
    Writer& cell(double value) { return cell(format_number(value)); }
    Writer& cell(int value) { return cell(format_number(static_cast<std::int64_t>(value))); }
    Writer& cell(std::int64_t value) { return cell(format_number(value)); }
    Writer& cell(std::uint64_t value) { return cell(format_number(value)); }
    void end_row();

    const std::string& str() const noexcept { return out_; }
    std::size_t rows() const noexcept { return rows_; }

private:
    std::string out_;
    std::size_t width_;
    std::size_t filled_ = 0;
    std::size_t rows_ = 0;
};

}  // namespace fwmqkd::csv
