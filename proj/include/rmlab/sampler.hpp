#pragma once

#include <cstdint>
#include <vector>

#include "rmlab/distribution.hpp"
#include "rmlab/levy.hpp"
#include "rmlab/matrix.hpp"
#include "rmlab/rng.hpp"

namespace rmlab {

inline MatrixSample sample_matrix(const DiscreteDist& d, int n, Rng& rng) {
    if (n < 1) throw ValidationError("sample_matrix: n must be >= 1");
    AtomSampler s(d);
    MatrixSample m(n, n);
    for (auto& e : m.idx) e = s.sample(rng);
    return m;
}

inline MatrixSample sample_matrix_rect(const DiscreteDist& d, int rows, int cols, Rng& rng) {
    AtomSampler s(d);
    MatrixSample m(rows, cols);
    for (auto& e : m.idx) e = s.sample(rng);
    return m;
}

// uniform random arrangement of the multiset with m_j copies of atom j
inline std::vector<uint8_t> sample_multislice(const std::vector<int>& m, Rng& rng) {
    std::vector<uint8_t> v;
    for (size_t j = 0; j < m.size(); ++j) {
        if (m[j] < 0) throw ValidationError("sample_multislice: negative count");
        v.insert(v.end(), static_cast<size_t>(m[j]), static_cast<uint8_t>(j));
    }
    // Fisher-Yates
    for (size_t i = v.size(); i > 1; --i) {
        size_t j = static_cast<size_t>(rng.next_below(i));
        std::swap(v[i - 1], v[j]);
    }
    return v;
}

struct SliceBandSample {
    std::vector<uint8_t> idx;
    uint64_t rejections = 0;
};

// i.i.d. draws rejected until per-atom counts land in all bands
inline SliceBandSample sample_slice_band(const DiscreteDist& d, const SliceConstraint& c, Rng& rng,
                                         uint64_t max_rejects = 1000000) {
    if (!c.satisfiable()) throw ValidationError("sample_slice_band: unsatisfiable constraint");
    AtomSampler s(d);
    SliceBandSample out;
    std::vector<int> counts(d.k());
    std::vector<uint8_t> v(static_cast<size_t>(c.n));
    for (uint64_t attempt = 0;; ++attempt) {
        std::fill(counts.begin(), counts.end(), 0);
        for (auto& e : v) {
            e = s.sample(rng);
            ++counts[e];
        }
        if (c.admits(counts)) {
            out.idx = v;
            out.rejections = attempt;
            return out;
        }
        if (attempt >= max_rejects) {
            double rate = 1.0 / static_cast<double>(attempt + 1);
            throw BudgetError("sample_slice_band: rejection budget exhausted, acceptance < " +
                              std::to_string(rate));
        }
    }
}

} // namespace rmlab
