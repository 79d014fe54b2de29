#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ocshield/errors.hpp"

namespace ocshield {

/// Dense row-major matrix of doubles. Rows are examples, columns features.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values; // rows * cols, row-major

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0) {}

    double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }

    std::span<const double> row(std::size_t r) const {
        return {values.data() + r * cols, cols};
    }
    std::span<double> row(std::size_t r) {
        return {values.data() + r * cols, cols};
    }

    void push_row(std::span<const double> x) {
        if (rows == 0 && cols == 0) cols = x.size();
        if (x.size() != cols)
            raise(ErrorCode::DimensionMismatch, "row width does not match matrix");
        values.insert(values.end(), x.begin(), x.end());
        ++rows;
    }
};

} // namespace ocshield
