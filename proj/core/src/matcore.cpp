// SPDX-License-Identifier: MIT

#include "symcore/matcore.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace symcore {

CMatrix::CMatrix(int rows, int cols, std::initializer_list<cplx> entries) : CMatrix(rows, cols) {
    if (static_cast<size_t>(rows) * cols != entries.size())
        throw ShapeMismatch("CMatrix initializer size does not match shape");
    std::copy(entries.begin(), entries.end(), a_.begin());
}

CMatrix CMatrix::identity(int n) {
    CMatrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1;
    return m;
}

CMatrix CMatrix::unit(int rows, int cols, int i, int j) {
    CMatrix m(rows, cols);
    m(i, j) = 1;
    return m;
}

CMatrix& CMatrix::operator+=(const CMatrix& b) {
    if (!same_shape(*this, b)) throw ShapeMismatch("operator+= shape mismatch");
    for (size_t i = 0; i < a_.size(); ++i) a_[i] += b.a_[i];
    return *this;
}

CMatrix& CMatrix::operator-=(const CMatrix& b) {
    if (!same_shape(*this, b)) throw ShapeMismatch("operator-= shape mismatch");
    for (size_t i = 0; i < a_.size(); ++i) a_[i] -= b.a_[i];
    return *this;
}

CMatrix& CMatrix::operator*=(cplx z) {
    for (cplx& x : a_) x *= z;
    return *this;
}

CMatrix CMatrix::adjoint() const {
    CMatrix r(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j) r(j, i) = std::conj((*this)(i, j));
    return r;
}

CMatrix CMatrix::transpose() const {
    CMatrix r(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j) r(j, i) = (*this)(i, j);
    return r;
}

CMatrix CMatrix::conjugate() const {
    CMatrix r(rows_, cols_);
    for (size_t i = 0; i < a_.size(); ++i) r.a_[i] = std::conj(a_[i]);
    return r;
}

cplx CMatrix::trace() const {
    cplx t{};
    for (int i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
    return t;
}

double CMatrix::frobenius_norm() const {
    double s = 0;
    for (const cplx& x : a_) s += std::norm(x);
    return std::sqrt(s);
}

double CMatrix::max_abs() const {
    double m = 0;
    for (const cplx& x : a_) m = std::max(m, std::abs(x));
    return m;
}

CMatrix CMatrix::block(int i0, int j0, int r, int c) const {
    CMatrix b(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) b(i, j) = (*this)(i0 + i, j0 + j);
    return b;
}

void CMatrix::set_block(int i0, int j0, const CMatrix& b) {
    for (int i = 0; i < b.rows(); ++i)
        for (int j = 0; j < b.cols(); ++j) (*this)(i0 + i, j0 + j) = b(i, j);
}

CMatrix operator+(CMatrix a, const CMatrix& b) { return a += b; }
CMatrix operator-(CMatrix a, const CMatrix& b) { return a -= b; }

CMatrix operator*(const CMatrix& a, const CMatrix& b) {
    if (a.cols() != b.rows()) throw ShapeMismatch("operator* inner dimension mismatch");
    CMatrix r(a.rows(), b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int k = 0; k < a.cols(); ++k) {
            cplx v = a(i, k);
            if (v == cplx{}) continue;
            for (int j = 0; j < b.cols(); ++j) r(i, j) += v * b(k, j);
        }
    return r;
}

CMatrix operator*(cplx z, CMatrix a) { return a *= z; }

bool same_shape(const CMatrix& a, const CMatrix& b) {
    return a.rows() == b.rows() && a.cols() == b.cols();
}

bool approx_equal(const CMatrix& a, const CMatrix& b, double tol) {
    return same_shape(a, b) && (a - b).max_abs() <= tol;
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
    CMatrix r(a.rows() * b.rows(), a.cols() * b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) {
            cplx v = a(i, j);
            if (v == cplx{}) continue;
            for (int k = 0; k < b.rows(); ++k)
                for (int l = 0; l < b.cols(); ++l)
                    r(i * b.rows() + k, j * b.cols() + l) = v * b(k, l);
        }
    return r;
}

CMatrix direct_sum(const CMatrix& a, const CMatrix& b) {
    CMatrix r(a.rows() + b.rows(), a.cols() + b.cols());
    r.set_block(0, 0, a);
    r.set_block(a.rows(), a.cols(), b);
    return r;
}

CMatrix hstack(const std::vector<CMatrix>& blocks) {
    if (blocks.empty()) return {};
    int cols = 0;
    for (const CMatrix& b : blocks) cols += b.cols();
    CMatrix r(blocks[0].rows(), cols);
    int at = 0;
    for (const CMatrix& b : blocks) {
        if (b.rows() != r.rows()) throw ShapeMismatch("hstack row mismatch");
        r.set_block(0, at, b);
        at += b.cols();
    }
    return r;
}

CMatrix vstack(const std::vector<CMatrix>& blocks) {
    if (blocks.empty()) return {};
    int rows = 0;
    for (const CMatrix& b : blocks) rows += b.rows();
    CMatrix r(rows, blocks[0].cols());
    int at = 0;
    for (const CMatrix& b : blocks) {
        if (b.cols() != r.cols()) throw ShapeMismatch("vstack column mismatch");
        r.set_block(at, 0, b);
        at += b.rows();
    }
    return r;
}

std::vector<cplx> mat_apply(const CMatrix& m, const std::vector<cplx>& v) {
    std::vector<cplx> r(static_cast<size_t>(m.rows()));
    for (int i = 0; i < m.rows(); ++i) {
        cplx s{};
        for (int j = 0; j < m.cols(); ++j) s += m(i, j) * v[static_cast<size_t>(j)];
        r[static_cast<size_t>(i)] = s;
    }
    return r;
}

std::vector<cplx> mat_apply_adjoint(const CMatrix& m, const std::vector<cplx>& v) {
    std::vector<cplx> r(static_cast<size_t>(m.cols()));
    for (int j = 0; j < m.cols(); ++j) {
        cplx s{};
        for (int i = 0; i < m.rows(); ++i) s += std::conj(m(i, j)) * v[static_cast<size_t>(i)];
        r[static_cast<size_t>(j)] = s;
    }
    return r;
}

double vec_norm(const std::vector<cplx>& v) {
    double s = 0;
    for (const cplx& x : v) s += std::norm(x);
    return std::sqrt(s);
}

cplx vec_dot(const std::vector<cplx>& x, const std::vector<cplx>& y) {
    cplx s{};
    for (size_t i = 0; i < x.size(); ++i) s += x[i] * std::conj(y[i]);
    return s;
}

namespace {

double offdiag_frobenius(const CMatrix& a) {
    double s = 0;
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j)
            if (i != j) s += std::norm(a(i, j));
    return std::sqrt(s);
}

}  // namespace

HermEig herm_eig(const CMatrix& a) {
    if (a.rows() != a.cols()) throw ShapeMismatch("herm_eig requires a square matrix");
    const int n = a.rows();
    const double scale = std::max(1.0, a.frobenius_norm());
    if ((a - a.adjoint()).frobenius_norm() > 1e-9 * scale)
        throw NotHermitian("herm_eig input is not hermitian within tolerance");

    // Work on the hermitized copy so roundoff in the input cannot leak into
    // the rotations.
    CMatrix w = a;
    {
        CMatrix ad = a.adjoint();
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) w(i, j) = 0.5 * (w(i, j) + ad(i, j));
    }

    CMatrix v = CMatrix::identity(n);
    const double target = 1e-12 * scale;

    for (int sweep = 0; sweep < 128 && offdiag_frobenius(w) > target; ++sweep) {
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) {
                cplx gamma = w(p, q);
                double g = std::abs(gamma);
                if (g <= 1e-300) continue;
                // Absorb the phase of the pivot so the rotation reduces to the
                // real symmetric case, then use the stable small-angle root.
                cplx phase = gamma / g;  // e^{i phi}
                double app = std::real(w(p, p)), aqq = std::real(w(q, q));
                double tau = (aqq - app) / (2 * g);
                double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1 + tau * tau));
                double c = 1.0 / std::sqrt(1 + t * t);
                double s = t * c;
                // J differs from the identity in rows/cols p,q:
                //   J[p,p] = c            J[p,q] = s
                //   J[q,p] = -s conj(phase)   J[q,q] = c conj(phase)
                cplx jqp = -s * std::conj(phase);
                cplx jqq = c * std::conj(phase);
                // columns: B = W J and V = V J
                for (int i = 0; i < n; ++i) {
                    cplx wp = w(i, p), wq = w(i, q);
                    w(i, p) = c * wp + jqp * wq;
                    w(i, q) = s * wp + jqq * wq;
                    cplx vp = v(i, p), vq = v(i, q);
                    v(i, p) = c * vp + jqp * vq;
                    v(i, q) = s * vp + jqq * vq;
                }
                // rows: W = J* B
                for (int j = 0; j < n; ++j) {
                    cplx wp = w(p, j), wq = w(q, j);
                    w(p, j) = c * wp + std::conj(jqp) * wq;
                    w(q, j) = s * wp + std::conj(jqq) * wq;
                }
                w(p, q) = 0;
                w(q, p) = 0;
            }
    }

    std::vector<int> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> d(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) d[static_cast<size_t>(i)] = std::real(w(i, i));
    std::stable_sort(order.begin(), order.end(),
                     [&](int x, int y) { return d[static_cast<size_t>(x)] < d[static_cast<size_t>(y)]; });

    HermEig out;
    out.values.resize(static_cast<size_t>(n));
    out.vectors = CMatrix(n, n);
    for (int k = 0; k < n; ++k) {
        int src = order[static_cast<size_t>(k)];
        out.values[static_cast<size_t>(k)] = d[static_cast<size_t>(src)];
        for (int i = 0; i < n; ++i) out.vectors(i, k) = v(i, src);
    }
    return out;
}

Svd svd(const CMatrix& a) {
    const int m = a.rows(), n = a.cols();
    Svd out;
    if (m == 0 || n == 0) return out;

    HermEig e = herm_eig(a.adjoint() * a);  // n x n PSD
    const int r = std::min(m, n);
    out.sigma.assign(static_cast<size_t>(r), 0.0);
    out.v = CMatrix(n, n);
    // herm_eig sorts ascending; singular values want descending.
    for (int k = 0; k < n; ++k) {
        int src = n - 1 - k;
        double lam = std::max(0.0, e.values[static_cast<size_t>(src)]);
        if (k < r) out.sigma[static_cast<size_t>(k)] = std::sqrt(lam);
        for (int i = 0; i < n; ++i) out.v(i, k) = e.vectors(i, src);
    }

    const double smax = out.sigma.empty() ? 0.0 : out.sigma[0];
    const double rank_tol = 1e-12 * smax;

    out.u = CMatrix(m, m);
    int filled = 0;
    for (int k = 0; k < r; ++k) {
        if (out.sigma[static_cast<size_t>(k)] <= rank_tol) break;
        std::vector<cplx> vk(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) vk[static_cast<size_t>(i)] = out.v(i, k);
        std::vector<cplx> uk = mat_apply(a, vk);
        for (cplx& x : uk) x /= out.sigma[static_cast<size_t>(k)];
        for (int i = 0; i < m; ++i) out.u(i, filled) = uk[static_cast<size_t>(i)];
        ++filled;
    }
    // Complete the left basis deterministically with Gram-Schmidt over the
    // standard basis.
    for (int cand = 0; cand < m && filled < m; ++cand) {
        std::vector<cplx> w(static_cast<size_t>(m));
        w[static_cast<size_t>(cand)] = 1;
        for (int k = 0; k < filled; ++k) {
            cplx ov{};
            for (int i = 0; i < m; ++i) ov += w[static_cast<size_t>(i)] * std::conj(out.u(i, k));
            for (int i = 0; i < m; ++i) w[static_cast<size_t>(i)] -= ov * out.u(i, k);
        }
        double nw = vec_norm(w);
        if (nw < 0.5) continue;  // candidate mostly inside the span already
        for (int i = 0; i < m; ++i) out.u(i, filled) = w[static_cast<size_t>(i)] / nw;
        ++filled;
    }
    // Extremely defective completion fallback: re-run with a lower threshold.
    for (int cand = 0; cand < m && filled < m; ++cand) {
        std::vector<cplx> w(static_cast<size_t>(m));
        w[static_cast<size_t>(cand)] = 1;
        for (int k = 0; k < filled; ++k) {
            cplx ov{};
            for (int i = 0; i < m; ++i) ov += w[static_cast<size_t>(i)] * std::conj(out.u(i, k));
            for (int i = 0; i < m; ++i) w[static_cast<size_t>(i)] -= ov * out.u(i, k);
        }
        double nw = vec_norm(w);
        if (nw < 1e-8) continue;
        for (int i = 0; i < m; ++i) out.u(i, filled) = w[static_cast<size_t>(i)] / nw;
        ++filled;
    }
    return out;
}

double op_norm(const CMatrix& a) {
    if (a.empty()) return 0;
    HermEig e = herm_eig(a.adjoint() * a);
    return std::sqrt(std::max(0.0, e.values.back()));
}

double trace_norm(const CMatrix& a) {
    Svd s = svd(a);
    double t = 0;
    for (double x : s.sigma) t += x;
    return t;
}

double min_herm_eigenvalue(const CMatrix& a) {
    return herm_eig(a).values.front();
}

bool is_psd(const CMatrix& a) {
    if (a.rows() != a.cols()) return false;
    if (a.rows() == 0) return true;
    HermEig e = herm_eig(a);
    double lo = e.values.front(), hi = std::max(std::abs(e.values.back()), std::abs(lo));
    return lo >= -1e-9 * std::max(1.0, hi);
}

int matrix_rank(const CMatrix& a) {
    if (a.empty()) return 0;
    Svd s = svd(a);
    double smax = s.sigma.empty() ? 0.0 : s.sigma[0];
    int r = 0;
    for (double x : s.sigma)
        if (x > 1e-12 * smax && x > 0) ++r;
    return r;
}

CMatrix psd_sqrt(const CMatrix& p) {
    HermEig e = herm_eig(p);
    const int n = p.rows();
    CMatrix d(n, n);
    for (int i = 0; i < n; ++i) d(i, i) = std::sqrt(std::max(0.0, e.values[static_cast<size_t>(i)]));
    return e.vectors * d * e.vectors.adjoint();
}

CMatrix psd_pinv_sqrt(const CMatrix& p, double rank_tol) {
    HermEig e = herm_eig(p);
    const int n = p.rows();
    double lmax = 0;
    for (double l : e.values) lmax = std::max(lmax, l);
    CMatrix d(n, n);
    for (int i = 0; i < n; ++i) {
        double l = e.values[static_cast<size_t>(i)];
        d(i, i) = (l > rank_tol * lmax && l > 0) ? 1.0 / std::sqrt(l) : 0.0;
    }
    return e.vectors * d * e.vectors.adjoint();
}

CMatrix psd_clip(const CMatrix& a) {
    HermEig e = herm_eig(a);
    const int n = a.rows();
    CMatrix d(n, n);
    for (int i = 0; i < n; ++i) d(i, i) = std::max(0.0, e.values[static_cast<size_t>(i)]);
    return e.vectors * d * e.vectors.adjoint();
}

CMatrix pinv(const CMatrix& a) {
    if (a.empty()) return a.adjoint();
    Svd s = svd(a);
    double smax = s.sigma.empty() ? 0.0 : s.sigma[0];
    CMatrix r(a.cols(), a.rows());
    for (size_t k = 0; k < s.sigma.size(); ++k) {
        double sig = s.sigma[k];
        if (sig <= 1e-12 * smax || sig == 0) continue;
        for (int i = 0; i < a.cols(); ++i)
            for (int j = 0; j < a.rows(); ++j)
                r(i, j) += s.v(i, static_cast<int>(k)) * std::conj(s.u(j, static_cast<int>(k))) / sig;
    }
    return r;
}

std::vector<cplx> lstsq(const CMatrix& a, const std::vector<cplx>& b) {
    return mat_apply(pinv(a), b);
}

PsdLinearMax psd_linear_max(const CMatrix& m) {
    if (m.rows() != m.cols()) throw ShapeMismatch("psd_linear_max requires a square matrix");
    const int n = m.rows();
    CMatrix h(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) h(i, j) = 0.5 * (m(i, j) + std::conj(m(j, i)));
    HermEig e = herm_eig(h);
    PsdLinearMax out{0.0, CMatrix(n, n)};
    CMatrix sel(n, n);
    for (int i = 0; i < n; ++i) {
        double l = e.values[static_cast<size_t>(i)];
        if (l > 0) {
            out.value += l;
            sel(i, i) = 1;
        }
    }
    out.t = e.vectors * sel * e.vectors.adjoint();
    return out;
}

}  // namespace symcore
