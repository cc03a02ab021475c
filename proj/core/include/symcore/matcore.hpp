// SPDX-License-Identifier: MIT
//
// Dense complex linear algebra kernel: Hermitian eigendecomposition (cyclic
// complex Jacobi), SVD, operator and trace norms, PSD calculus, Kronecker
// products and pseudo-inverse square roots.  Everything downstream sits on
// this file; it deliberately has no dependencies beyond the standard library.

#pragma once

#include <complex>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace symcore {

using cplx = std::complex<double>;

class CMatrix {
  public:
    CMatrix() = default;
    CMatrix(int rows, int cols) : rows_(rows), cols_(cols), a_(static_cast<size_t>(rows) * cols) {}
    CMatrix(int rows, int cols, std::initializer_list<cplx> entries);

    static CMatrix identity(int n);
    static CMatrix unit(int rows, int cols, int i, int j);  // matrix unit E_ij

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    bool empty() const { return rows_ == 0 || cols_ == 0; }

    cplx& operator()(int i, int j) { return a_[static_cast<size_t>(i) * cols_ + j]; }
    const cplx& operator()(int i, int j) const { return a_[static_cast<size_t>(i) * cols_ + j]; }

    const std::vector<cplx>& data() const { return a_; }
    std::vector<cplx>& data() { return a_; }

    CMatrix& operator+=(const CMatrix& b);
    CMatrix& operator-=(const CMatrix& b);
    CMatrix& operator*=(cplx z);

    CMatrix adjoint() const;
    CMatrix transpose() const;
    CMatrix conjugate() const;

    cplx trace() const;
    double frobenius_norm() const;
    double max_abs() const;

    CMatrix block(int i0, int j0, int r, int c) const;
    void set_block(int i0, int j0, const CMatrix& b);

  private:
    int rows_ = 0, cols_ = 0;
    std::vector<cplx> a_;
};

CMatrix operator+(CMatrix a, const CMatrix& b);
CMatrix operator-(CMatrix a, const CMatrix& b);
CMatrix operator*(const CMatrix& a, const CMatrix& b);
CMatrix operator*(cplx z, CMatrix a);

bool same_shape(const CMatrix& a, const CMatrix& b);
bool approx_equal(const CMatrix& a, const CMatrix& b, double tol);

CMatrix kron(const CMatrix& a, const CMatrix& b);
CMatrix direct_sum(const CMatrix& a, const CMatrix& b);
CMatrix hstack(const std::vector<CMatrix>& blocks);
CMatrix vstack(const std::vector<CMatrix>& blocks);

// Matrix-vector products for ascent loops.
std::vector<cplx> mat_apply(const CMatrix& m, const std::vector<cplx>& v);
std::vector<cplx> mat_apply_adjoint(const CMatrix& m, const std::vector<cplx>& v);
double vec_norm(const std::vector<cplx>& v);
// <x, y> with the physics-free convention sum x_i conj(y_i).
cplx vec_dot(const std::vector<cplx>& x, const std::vector<cplx>& y);

struct HermEig {
    std::vector<double> values;  // ascending
    CMatrix vectors;             // unitary, columns are eigenvectors
};

// Cyclic complex Jacobi with deterministic row-major sweep order; iterates
// until the off-diagonal Frobenius norm falls below 1e-12 * max(1, ||A||_F).
// Throws NotHermitian when ||A - A*|| exceeds 1e-9 * max(1, ||A||).
HermEig herm_eig(const CMatrix& a);

struct Svd {
    CMatrix u;                  // columns: left singular vectors
    std::vector<double> sigma;  // descending
    CMatrix v;                  // columns: right singular vectors, A = U diag(sigma) V*
};

Svd svd(const CMatrix& a);

double op_norm(const CMatrix& a);
double trace_norm(const CMatrix& a);

double min_herm_eigenvalue(const CMatrix& a);
// PSD test at the relative threshold min eig >= -1e-9 * max(1, ||A||_op).
bool is_psd(const CMatrix& a);

// Matrix rank with singular values below 1e-12 * ||A|| treated as zero.
int matrix_rank(const CMatrix& a);

CMatrix psd_sqrt(const CMatrix& p);
// (P restricted to its range)^{-1/2}; eigenvalues below rank_tol * max-eig are
// treated as null directions and inverted to zero.
CMatrix psd_pinv_sqrt(const CMatrix& p, double rank_tol = 1e-10);
// Clip negative eigenvalues to zero (projection onto the PSD cone).
CMatrix psd_clip(const CMatrix& a);

// Moore-Penrose pseudo-inverse via SVD with the matcore rank threshold.
CMatrix pinv(const CMatrix& a);

// Least squares min ||A x - b||_2; returns the minimum-norm solution.
std::vector<cplx> lstsq(const CMatrix& a, const std::vector<cplx>& b);

struct PsdLinearMax {
    double value;  // sup over 0 <= T <= I of Re tr(T M)
    CMatrix t;     // the optimizing spectral projection
};

// The supremum equals the sum of positive eigenvalues of (M + M*)/2, attained
// at T = projection onto their span.
PsdLinearMax psd_linear_max(const CMatrix& m);

struct NotHermitian : std::runtime_error {
    explicit NotHermitian(const std::string& what) : std::runtime_error(what) {}
};
struct ShapeMismatch : std::runtime_error {
    explicit ShapeMismatch(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace symcore
