// SPDX-License-Identifier: MIT
//
// Deterministic random source for samplers and multistart ascent.
// xoshiro256++ seeded through splitmix64 so that a single 64-bit seed fixes
// every stream; child generators are derived, never shared, which keeps
// reports byte-identical for equal configurations regardless of call order.

#pragma once

#include <cmath>
#include <cstdint>

#include "symcore/matcore.hpp"

namespace symcore {

class Rng {
  public:
    explicit Rng(uint64_t seed) {
        uint64_t x = seed;
        for (int i = 0; i < 4; ++i) s_[i] = splitmix64(x);
    }

    uint64_t next_u64() {
        const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform in [0, 1) with 53 bits of mantissa.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n).
    uint64_t uniform_below(uint64_t n) { return next_u64() % n; }

    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform(), u2 = uniform();
        while (u1 <= 1e-300) u1 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    cplx cgaussian() { return {gaussian(), gaussian()}; }

    // Independent child stream; the label decorrelates siblings.
    uint64_t child_seed(uint64_t label) {
        uint64_t x = next_u64() ^ (0x9e3779b97f4a7c15ULL * (label + 1));
        return splitmix64(x);
    }
    Rng child(uint64_t label) { return Rng(child_seed(label)); }

    CMatrix gaussian_matrix(int rows, int cols) {
        CMatrix m(rows, cols);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) m(i, j) = cgaussian();
        return m;
    }

    // Haar-ish random unit vector.
    std::vector<cplx> unit_vector(int n) {
        std::vector<cplx> v(static_cast<size_t>(n));
        double nn = 0;
        do {
            for (cplx& x : v) x = cgaussian();
            nn = vec_norm(v);
        } while (nn < 1e-12);
        for (cplx& x : v) x /= nn;
        return v;
    }

    // Random PSD contraction 0 <= T <= I.
    CMatrix psd_contraction(int n) {
        CMatrix g = gaussian_matrix(n, n);
        CMatrix p = g.adjoint() * g;
        HermEig e = herm_eig(p);
        CMatrix d(n, n);
        double top = std::max(1e-300, e.values.back());
        for (int i = 0; i < n; ++i) d(i, i) = std::max(0.0, e.values[static_cast<size_t>(i)]) / top;
        return e.vectors * d * e.vectors.adjoint();
    }

    // Haar unitary via Gram-Schmidt of a Ginibre matrix (deterministic given
    // the stream state; adequate for sampling, not for exact Haar statistics).
    CMatrix unitary(int n) {
        CMatrix g = gaussian_matrix(n, n);
        CMatrix q(n, n);
        for (int k = 0; k < n; ++k) {
            std::vector<cplx> w(static_cast<size_t>(n));
            for (int i = 0; i < n; ++i) w[static_cast<size_t>(i)] = g(i, k);
            for (int j = 0; j < k; ++j) {
                cplx ov{};
                for (int i = 0; i < n; ++i) ov += w[static_cast<size_t>(i)] * std::conj(q(i, j));
                for (int i = 0; i < n; ++i) w[static_cast<size_t>(i)] -= ov * q(i, j);
            }
            double nw = vec_norm(w);
            if (nw < 1e-12) {  // resample the column
                for (cplx& x : w) x = cgaussian();
                nw = vec_norm(w);
            }
            for (int i = 0; i < n; ++i) q(i, k) = w[static_cast<size_t>(i)] / nw;
        }
        return q;
    }

    static uint64_t splitmix64(uint64_t& x) {
        x += 0x9e3779b97f4a7c15ULL;
        uint64_t z = x;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

  private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    uint64_t s_[4]{};
    bool have_spare_ = false;
    double spare_ = 0;
};

}  // namespace symcore
