#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <vector>

#include "shaping/errors.hpp"

namespace shaping {

// Dense row-major matrix of 64-bit floats. The only tensor type in the
// project; vectors are 1xN or Nx1 as convenient.
struct Tensor2 {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Tensor2() = default;
    Tensor2(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {
        if (r < 0 || c < 0) throw ShapeError("Tensor2: negative dimension");
    }

    static Tensor2 zeros(int r, int c) { return Tensor2(r, c); }

    static Tensor2 full(int r, int c, double v) {
        Tensor2 t(r, c);
        for (double& x : t.data) x = v;
        return t;
    }

    static Tensor2 scalar(double v) { return full(1, 1, v); }

    static Tensor2 from_rows(std::initializer_list<std::initializer_list<double>> rows_init) {
        const int r = static_cast<int>(rows_init.size());
        const int c = r > 0 ? static_cast<int>(rows_init.begin()->size()) : 0;
        Tensor2 t(r, c);
        int i = 0;
        for (const auto& row : rows_init) {
            if (static_cast<int>(row.size()) != c) throw ShapeError("Tensor2: ragged rows");
            int j = 0;
            for (double v : row) t.at(i, j++) = v;
            ++i;
        }
        return t;
    }

    double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }

    std::size_t size() const { return data.size(); }

    bool same_shape(const Tensor2& o) const { return rows == o.rows && cols == o.cols; }

    bool all_finite() const {
        for (double v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }

    void fill(double v) {
        for (double& x : data) x = v;
    }
};

inline void require_shape(const Tensor2& t, int r, int c, const char* what) {
    if (t.rows != r || t.cols != c)
        throw ShapeError(std::string(what) + ": expected " + std::to_string(r) + "x" +
                         std::to_string(c) + ", got " + std::to_string(t.rows) + "x" +
                         std::to_string(t.cols));
}

}  // namespace shaping
