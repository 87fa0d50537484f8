#include "optomech/csv.hpp"

#include "optomech/errors.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <system_error>

namespace optomech::csv {

std::string format_double(double x) {
    std::array<char, 32> buf{};
    const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    if (ec != std::errc{}) throw SolverError("format_double: conversion failed");
    return std::string(buf.data(), end);
}

AtomicCsvWriter::AtomicCsvWriter(std::filesystem::path path, std::string_view header)
    : path_(std::move(path)), tmp_(path_.string() + ".tmp"),
      columns_(static_cast<std::size_t>(std::count(header.begin(), header.end(), ',')) + 1) {
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
    out_.open(tmp_, std::ios::binary | std::ios::trunc);
    if (!out_) throw std::runtime_error("cannot open " + tmp_.string() + " for writing");
    out_ << header << '\n';
}

AtomicCsvWriter::~AtomicCsvWriter() {
    if (!committed_) {
        out_.close();
        std::error_code ec;
        std::filesystem::remove(tmp_, ec);
    }
}

void AtomicCsvWriter::write(const Row& row) {
    if (row.size() != columns_) {
        throw std::logic_error("csv row has " + std::to_string(row.size()) + " fields, header has " +
                               std::to_string(columns_));
    }
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (i > 0) out_ << ',';
        if (row[i]) out_ << *row[i];
    }
    out_ << '\n';
}

void AtomicCsvWriter::commit() {
    out_.flush();
    if (!out_) throw std::runtime_error("write to " + tmp_.string() + " failed");
    out_.close();
    std::filesystem::rename(tmp_, path_);
    committed_ = true;
}

} // namespace optomech::csv
