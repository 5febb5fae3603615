#pragma once

#include <cstddef>
#include <vector>

namespace blindspot {

// Minimal row-major dense matrix of doubles. No expression templates, no
// views; the numeric heavy lifting lives in blindspot::kernels.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double* row(std::size_t i) { return data.data() + i * cols; }
    const double* row(std::size_t i) const { return data.data() + i * cols; }

    double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    void append_row(const double* src) {
        data.insert(data.end(), src, src + cols);
        ++rows;
    }
};

}  // namespace blindspot
