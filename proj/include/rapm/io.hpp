#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace rapm::io {

/// Writes through a temporary file in the same directory, then renames.
void write_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);  ///< throws InputError

/// Shortest round-trip decimal representation of a double.
std::string format_double(double v);

/// Tracks files written by one command so they can be removed on failure.
class OutputSet {
public:
    explicit OutputSet(std::filesystem::path dir);
    ~OutputSet();
    OutputSet(const OutputSet&) = delete;
    OutputSet& operator=(const OutputSet&) = delete;

    std::filesystem::path write(const std::string& name, std::string_view content);
    void commit() { committed_ = true; }
    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path dir_;
    std::vector<std::filesystem::path> written_;
    bool committed_ = false;
};

} // namespace rapm::io
