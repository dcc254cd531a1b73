#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <string>
#include <vector>

#include "histad/errors.hpp"

namespace histad {

// Dense row-major container of 64-bit reals. Rank is usually 2
// (batch x features); images are flattened at load time.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> data;

    Tensor() = default;
    Tensor(std::initializer_list<std::size_t> s) : shape(s), data(count(shape), 0.0) {}
    explicit Tensor(std::vector<std::size_t> s) : shape(std::move(s)), data(count(shape), 0.0) {}
    Tensor(std::vector<std::size_t> s, std::vector<double> d) : shape(std::move(s)), data(std::move(d)) {
        if (data.size() != count(shape))
            throw ContractError("tensor: data length " + std::to_string(data.size()) +
                                " does not match shape product " + std::to_string(count(shape)));
    }

    static std::size_t count(const std::vector<std::size_t>& s) {
        std::size_t n = 1;
        for (std::size_t d : s) n *= d;
        return s.empty() ? 0 : n;
    }

    std::size_t size() const { return data.size(); }
    std::size_t rows() const { return shape.empty() ? 0 : shape[0]; }
    std::size_t cols() const { return shape.empty() ? 0 : size() / shape[0]; }

    double& at(std::size_t r, std::size_t c) { return data[r * cols() + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols() + c]; }
    const double* row(std::size_t r) const { return data.data() + r * cols(); }
    double* row(std::size_t r) { return data.data() + r * cols(); }

    bool all_finite() const {
        for (double v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }

    bool operator==(const Tensor& o) const { return shape == o.shape && data == o.data; }
};

inline void require_matrix(const Tensor& t, std::size_t want_cols, const char* what) {
    if (t.shape.size() != 2 || t.cols() != want_cols)
        throw ContractError(std::string(what) + ": expected shape (n, " + std::to_string(want_cols) +
                            "), got cols " + std::to_string(t.cols()));
}

}  // namespace histad
