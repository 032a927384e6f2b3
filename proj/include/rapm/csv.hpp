#pragma once

#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace rapm::csv {

/// Split one CSV record. Double-quoted fields may contain commas and "" escapes.
std::vector<std::string> split_line(std::string_view line);

std::string_view trim(std::string_view s);

/// Header-indexed reader over a stream; lines are numbered from 1 (the header).
class Reader {
public:
    explicit Reader(std::istream& in);

    const std::vector<std::string>& header() const { return header_; }
    std::optional<std::size_t> column(std::string_view name) const;

    /// Throws InputError naming every missing column.
    void require(const std::vector<std::string>& names) const;

    /// Reads the next non-blank record. Returns false at end of input.
    bool next(std::vector<std::string>& fields);
    std::size_t line_number() const { return line_; }

private:
    std::istream& in_;
    std::vector<std::string> header_;
    std::unordered_map<std::string, std::size_t> index_;
    std::size_t line_ = 0;
};

/// Quote a field if it needs quoting.
std::string escape(std::string_view field);

} // namespace rapm::csv
