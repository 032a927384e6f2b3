#include "rapm/csv.hpp"

#include "rapm/errors.hpp"

namespace rapm::csv {

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

std::vector<std::string> split_line(std::string_view line)
{
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.emplace_back(trim(field));
            field.clear();
        } else {
            field.push_back(c);
        }
    }
    out.emplace_back(trim(field));
    return out;
}

std::string escape(std::string_view field)
{
    if (field.find_first_of(",\"\n") == std::string_view::npos)
        return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"')
            out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

Reader::Reader(std::istream& in) : in_(in)
{
    std::string line;
    if (!std::getline(in_, line))
        throw InputError("empty CSV: no header line");
    line_ = 1;
    // UTF-8 byte order mark
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0)
        line.erase(0, 3);
    header_ = split_line(line);
    for (std::size_t i = 0; i < header_.size(); ++i)
        index_.emplace(header_[i], i);
}

std::optional<std::size_t> Reader::column(std::string_view name) const
{
    auto it = index_.find(std::string(name));
    if (it == index_.end())
        return std::nullopt;
    return it->second;
}

void Reader::require(const std::vector<std::string>& names) const
{
    std::string missing;
    for (const auto& n : names) {
        if (!column(n)) {
            if (!missing.empty())
                missing += ", ";
            missing += n;
        }
    }
    if (!missing.empty())
        throw InputError("CSV header is missing column(s): " + missing);
}

bool Reader::next(std::vector<std::string>& fields)
{
    std::string line;
    while (std::getline(in_, line)) {
        ++line_;
        if (trim(line).empty())
            continue;
        fields = split_line(line);
        return true;
    }
    return false;
}

} // namespace rapm::csv
