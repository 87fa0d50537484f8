#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace optomech::csv {

/// Shortest decimal string that parses back to exactly `x`.
std::string format_double(double x);

/// One CSV field per entry; std::nullopt writes an empty field.
using Row = std::vector<std::optional<std::string>>;

/// Writes to `<path>.tmp` and renames onto `path` in commit(). A writer that
/// is destroyed without commit() removes its temporary file.
class AtomicCsvWriter {
public:
    AtomicCsvWriter(std::filesystem::path path, std::string_view header);
    ~AtomicCsvWriter();
    AtomicCsvWriter(const AtomicCsvWriter&) = delete;
    AtomicCsvWriter& operator=(const AtomicCsvWriter&) = delete;

    void write(const Row& row);
    void commit();

private:
    std::filesystem::path path_;
    std::filesystem::path tmp_;
    std::ofstream out_;
    std::size_t columns_;
    bool committed_ = false;
};

} // namespace optomech::csv
