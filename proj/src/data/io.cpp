#include "rapm/io.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "rapm/errors.hpp"

namespace rapm {

namespace io {

void write_atomic(const std::filesystem::path& path, std::string_view content)
{
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw InputError("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out)
            throw InputError("failed writing " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw InputError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string format_double(double v) { return fmt::format("{}", v); }

OutputSet::OutputSet(std::filesystem::path dir) : dir_(std::move(dir))
{
    std::filesystem::create_directories(dir_);
}

OutputSet::~OutputSet()
{
    if (committed_)
        return;
    std::error_code ec;
    for (const auto& p : written_)
        std::filesystem::remove(p, ec);
}

std::filesystem::path OutputSet::write(const std::string& name, std::string_view content)
{
    auto path = dir_ / name;
    write_atomic(path, content);
    written_.push_back(path);
    return path;
}

} // namespace io
} // namespace rapm
