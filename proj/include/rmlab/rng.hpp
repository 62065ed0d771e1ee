#pragma once

#include <cmath>
#include <cstdint>

namespace rmlab {

// (seed, stream) pair; identical pairs reproduce identical draw sequences.
struct RngSeed {
    uint64_t seed = 1;
    uint64_t stream = 0;
};

// splitmix64 generator over a per-stream state; integer-only core so the
// sampling path is byte-identical across platforms.
class Rng {
public:
    explicit Rng(RngSeed s) {
        state_ = mix(s.seed ^ 0x2545f4914f6cdd1dULL);
        state_ = mix(state_ + mix(s.stream + 0x9e3779b97f4a7c15ULL));
    }

    uint64_t next_u64() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0, bound), unbiased (rejection per Lemire)
    uint64_t next_below(uint64_t bound) {
        unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * bound;
        uint64_t lo = static_cast<uint64_t>(m);
        if (lo < bound) {
            uint64_t threshold = (0 - bound) % bound;
            while (lo < threshold) {
                m = static_cast<unsigned __int128>(next_u64()) * bound;
                lo = static_cast<uint64_t>(m);
            }
        }
        return static_cast<uint64_t>(m >> 64);
    }

    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double next_gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * next_unit() - 1.0;
            v = 2.0 * next_unit() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        have_spare_ = true;
        return u * f;
    }

private:
    uint64_t state_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;

    static uint64_t mix(uint64_t z) {
        z = (z ^ (z >> 33)) * 0xff51afd7ed558ccdULL;
        z = (z ^ (z >> 33)) * 0xc4ceb9fe1a85ec53ULL;
        return z ^ (z >> 33);
    }
};

} // namespace rmlab
