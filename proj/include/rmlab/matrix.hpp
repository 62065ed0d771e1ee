#pragma once

#include <cstdint>
#include <vector>

#include "rmlab/distribution.hpp"

namespace rmlab {

// dense row-major real matrix
struct Mat {
    int rows = 0, cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0.0) {}
    double& operator()(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }

    static Mat identity(int n) {
        Mat m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }
    Mat transposed() const {
        Mat t(cols, rows);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) t(j, i) = (*this)(i, j);
        return t;
    }
};

// matrix of atom indices into a DiscreteDist; one byte per entry
struct MatrixSample {
    int n_rows = 0, n_cols = 0;
    std::vector<uint8_t> idx;

    MatrixSample() = default;
    MatrixSample(int r, int c) : n_rows(r), n_cols(c), idx(static_cast<size_t>(r) * c, 0) {}
    uint8_t& at(int i, int j) { return idx[static_cast<size_t>(i) * n_cols + j]; }
    uint8_t at(int i, int j) const { return idx[static_cast<size_t>(i) * n_cols + j]; }
};

inline Mat realize(const MatrixSample& s, const DiscreteDist& d) {
    Mat m(s.n_rows, s.n_cols);
    auto av = d.atoms_double();
    for (size_t i = 0; i < s.idx.size(); ++i) m.a[i] = av[s.idx[i]];
    return m;
}

// entries scaled to exact integers (atom * lcm of atom denominators)
inline std::vector<int64_t> realize_scaled(const MatrixSample& s, const DiscreteDist::ScaledAtoms& sa) {
    std::vector<int64_t> m(s.idx.size());
    for (size_t i = 0; i < s.idx.size(); ++i) m[i] = sa.values[s.idx[i]];
    return m;
}

} // namespace rmlab
