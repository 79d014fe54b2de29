#pragma once

#include <string>
#include <vector>

#include "ocshield/data.hpp"

namespace ocshield::csv {

/// Shortest-ish decimal rendering with '.' separator, stable across runs.
std::string format_double(double v);

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

Table read_file(const std::string& path);

/// Numeric table: every cell parsed as double. Throws IoError on
/// missing/ragged files and InvalidArgument on non-numeric cells.
Matrix read_matrix(const std::string& path, std::vector<std::string>* header = nullptr);

/// Features plus a binary label column (named "label" when present,
/// otherwise the last column).
void read_labeled(const std::string& path, Matrix& X, std::vector<int>& y);

class Writer {
public:
    explicit Writer(const std::string& path);
    ~Writer();

    void row(const std::vector<std::string>& cells);
    void close();

private:
    struct Impl;
    Impl* impl_;
};

} // namespace ocshield::csv
