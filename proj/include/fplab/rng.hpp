#pragma once

#include <cstdint>
#include <cmath>
#include <string_view>

namespace fplab {

// Counter-based generator (Philox4x32-10). A stream is keyed by
// (seed, purpose tag, stream index); draws are a pure function of the key
// and a block counter, so disjoint streams can be consumed from different
// threads without sharing state and replay is exact.
class Rng {
public:
    Rng(std::uint64_t seed, std::string_view purpose, std::uint64_t stream = 0) {
        const std::uint64_t key = mix64(seed ^ fnv1a64(purpose));
        key_[0] = static_cast<std::uint32_t>(key);
        key_[1] = static_cast<std::uint32_t>(key >> 32);
        ctr_[0] = 0;
        ctr_[1] = 0;
        ctr_[2] = static_cast<std::uint32_t>(stream);
        ctr_[3] = static_cast<std::uint32_t>(stream >> 32);
        pos_ = 4;
        has_spare_gauss_ = false;
        spare_gauss_ = 0.0;
    }

    std::uint32_t next_u32() {
        if (pos_ == 4) refill();
        return buf_[pos_++];
    }

    std::uint64_t next_u64() {
        const std::uint64_t lo = next_u32();
        const std::uint64_t hi = next_u32();
        return (hi << 32) | lo;
    }

    // Uniform on [0,1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform on (0,1]; safe as a log() argument.
    double next_double_open() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller; consumes exactly two uniforms per pair.
    double next_gaussian() {
        if (has_spare_gauss_) {
            has_spare_gauss_ = false;
            return spare_gauss_;
        }
        const double u1 = next_double_open();
        const double u2 = next_double();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 6.283185307179586476925286766559 * u2;
        spare_gauss_ = r * std::sin(t);
        has_spare_gauss_ = true;
        return r * std::cos(t);
    }

    // Uniform integer in [0, bound) by rejection; bound must be positive.
    std::uint64_t next_below(std::uint64_t bound) {
        const std::uint64_t limit = bound * (UINT64_MAX / bound);
        for (;;) {
            const std::uint64_t x = next_u64();
            if (x < limit) return x % bound;
        }
    }

    static std::uint64_t fnv1a64(std::string_view s) {
        std::uint64_t h = 1469598103934665603ULL;
        for (const char c : s) {
            h ^= static_cast<std::uint8_t>(c);
            h *= 1099511628211ULL;
        }
        return h;
    }

private:
    static std::uint64_t mix64(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    static void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
        const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
        hi = static_cast<std::uint32_t>(p >> 32);
        lo = static_cast<std::uint32_t>(p);
    }

    void refill() {
        std::uint32_t c0 = ctr_[0], c1 = ctr_[1], c2 = ctr_[2], c3 = ctr_[3];
        std::uint32_t k0 = key_[0], k1 = key_[1];
        for (int round = 0; round < 10; ++round) {
            std::uint32_t hi0, lo0, hi1, lo1;
            mulhilo(0xD2511F53u, c0, hi0, lo0);
            mulhilo(0xCD9E8D57u, c2, hi1, lo1);
            const std::uint32_t n0 = hi1 ^ c1 ^ k0;
            const std::uint32_t n1 = lo1;
            const std::uint32_t n2 = hi0 ^ c3 ^ k1;
            const std::uint32_t n3 = lo0;
            c0 = n0; c1 = n1; c2 = n2; c3 = n3;
            k0 += 0x9E3779B9u;
            k1 += 0xBB67AE85u;
        }
        buf_[0] = c0; buf_[1] = c1; buf_[2] = c2; buf_[3] = c3;
        pos_ = 0;
        if (++ctr_[0] == 0) ++ctr_[1];
    }

    std::uint32_t key_[2];
    std::uint32_t ctr_[4];
    std::uint32_t buf_[4];
    int pos_;
    double spare_gauss_;
    bool has_spare_gauss_;
};

} // namespace fplab
