#include "ocshield/csv.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace ocshield::csv {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        // trim surrounding whitespace
        const auto begin = cell.find_first_not_of(" \t\r");
        const auto end = cell.find_last_not_of(" \t\r");
        cells.push_back(begin == std::string::npos ? std::string()
                                                   : cell.substr(begin, end - begin + 1));
    }
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

double parse_double(const std::string& cell, const std::string& path) {
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (end == cell.c_str() || *end != '\0')
        raise(ErrorCode::InvalidArgument, "non-numeric CSV cell '" + cell + "' in " + path);
    return v;
}

} // namespace

Table read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorCode::IoError, "cannot open CSV file: " + path);
    Table table;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cells = split_line(line);
        if (table.header.empty()) {
            table.header = std::move(cells);
        } else {
            if (cells.size() != table.header.size())
                raise(ErrorCode::IoError, "ragged CSV row in " + path);
            table.rows.push_back(std::move(cells));
        }
    }
    if (table.header.empty()) raise(ErrorCode::IoError, "empty CSV file: " + path);
    return table;
}

Matrix read_matrix(const std::string& path, std::vector<std::string>* header) {
    const Table table = read_file(path);
    if (header) *header = table.header;
    Matrix m(table.rows.size(), table.header.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r)
        for (std::size_t c = 0; c < table.header.size(); ++c)
            m.at(r, c) = parse_double(table.rows[r][c], path);
    return m;
}

void read_labeled(const std::string& path, Matrix& X, std::vector<int>& y) {
    std::vector<std::string> header;
    const Matrix all = read_matrix(path, &header);
    if (all.cols < 2)
        raise(ErrorCode::InvalidArgument, "labeled CSV needs at least 2 columns: " + path);

    std::size_t label_col = all.cols - 1;
    for (std::size_t c = 0; c < header.size(); ++c)
        if (header[c] == "label") label_col = c;

    X = Matrix(all.rows, all.cols - 1);
    y.assign(all.rows, 0);
    for (std::size_t r = 0; r < all.rows; ++r) {
        std::size_t out = 0;
        for (std::size_t c = 0; c < all.cols; ++c) {
            if (c == label_col) {
                const double v = all.at(r, c);
                if (v != 0.0 && v != 1.0)
                    raise(ErrorCode::InvalidArgument,
                          "labels must be 0 or 1 in " + path);
                y[r] = static_cast<int>(v);
            } else {
                X.at(r, out++) = all.at(r, c);
            }
        }
    }
}

struct Writer::Impl {
    std::ofstream out;
    std::string path;
};

Writer::Writer(const std::string& path) : impl_(new Impl{std::ofstream(path), path}) {
    if (!impl_->out) {
        delete impl_;
        impl_ = nullptr;
        raise(ErrorCode::IoError, "cannot write CSV file: " + path);
    }
}

Writer::~Writer() {
    delete impl_;
}

void Writer::row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) impl_->out << ',';
        impl_->out << cells[i];
    }
    impl_->out << '\n';
}

void Writer::close() {
    impl_->out.close();
    if (impl_->out.fail()) raise(ErrorCode::IoError, "failed writing " + impl_->path);
}

} // namespace ocshield::csv
