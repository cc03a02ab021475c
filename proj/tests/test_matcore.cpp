// Unit tests for the dense linear algebra kernel.
//
// Contracts exercised:
//   herm_eig: A = V diag(lambda) V*, V unitary, eigenvalues ascending.
//   svd: A = U diag(sigma) V*, factors unitary, sigma descending.
//   psd_linear_max: equals the sum of positive eigenvalues of (M + M*)/2
//     and the returned T is a feasible spectral projection attaining it.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "symcore/matcore.hpp"
#include "symcore/rng.hpp"

using namespace symcore;

namespace {

CMatrix random_hermitian(Rng& rng, int n) {
    CMatrix g = rng.gaussian_matrix(n, n);
    CMatrix h = g + g.adjoint();
    return 0.5 * h;
}

bool is_unitary(const CMatrix& u, double tol) {
    return approx_equal(u.adjoint() * u, CMatrix::identity(u.cols()), tol);
}

}  // namespace

TEST_CASE("matrix arithmetic basics") {
    CMatrix a(2, 2, {1, cplx(0, 2), 3, 4});
    CHECK(a.adjoint()(1, 0) == cplx(0, -2));
    CHECK(a.transpose()(0, 1) == cplx(3, 0));
    CHECK(std::abs(a.trace() - cplx(5, 0)) < 1e-15);

    CMatrix e01 = CMatrix::unit(2, 2, 0, 1);
    CMatrix e10 = CMatrix::unit(2, 2, 1, 0);
    CHECK(approx_equal(e01 * e10, CMatrix::unit(2, 2, 0, 0), 1e-15));

    CMatrix k = kron(CMatrix::identity(2), a);
    CHECK(k.rows() == 4);
    CHECK(k(2, 2) == a(0, 0));
    CHECK(k(0, 2) == cplx(0, 0));

    CMatrix ds = direct_sum(a, CMatrix::identity(1));
    CHECK(ds.rows() == 3);
    CHECK(ds(2, 2) == cplx(1, 0));
    CHECK(ds(0, 2) == cplx(0, 0));
}

TEST_CASE("herm_eig reconstructs and orders") {
    Rng rng(0x11);
    for (int n : {1, 2, 3, 5, 8}) {
        for (int trial = 0; trial < 6; ++trial) {
            CMatrix a = random_hermitian(rng, n);
            HermEig e = herm_eig(a);
            REQUIRE(static_cast<int>(e.values.size()) == n);
            for (int i = 0; i + 1 < n; ++i) CHECK(e.values[i] <= e.values[i + 1] + 1e-12);
            CHECK(is_unitary(e.vectors, 1e-10));
            CMatrix d(n, n);
            for (int i = 0; i < n; ++i) d(i, i) = e.values[i];
            CHECK(approx_equal(e.vectors * d * e.vectors.adjoint(), a, 1e-9 * std::max(1.0, a.frobenius_norm())));
        }
    }
}

TEST_CASE("herm_eig rejects non-hermitian input") {
    CMatrix a(2, 2, {0, 1, 0, 0});
    CHECK_THROWS_AS(herm_eig(a), NotHermitian);
}

TEST_CASE("herm_eig handles degenerate spectra") {
    CMatrix a = CMatrix::identity(4);
    HermEig e = herm_eig(a);
    for (double v : e.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(is_unitary(e.vectors, 1e-12));

    CMatrix z(3, 3);
    HermEig ez = herm_eig(z);
    for (double v : ez.values) CHECK(std::abs(v) < 1e-14);
}

TEST_CASE("svd reconstructs rectangular matrices") {
    Rng rng(0x22);
    for (auto [m, n] : {std::pair{3, 5}, {5, 3}, {4, 4}, {1, 6}, {6, 1}}) {
        CMatrix a = rng.gaussian_matrix(m, n);
        Svd s = svd(a);
        CHECK(is_unitary(s.u, 1e-9));
        CHECK(is_unitary(s.v, 1e-9));
        for (size_t i = 0; i + 1 < s.sigma.size(); ++i) CHECK(s.sigma[i] >= s.sigma[i + 1] - 1e-12);
        CMatrix d(m, n);
        for (size_t i = 0; i < s.sigma.size(); ++i) d(static_cast<int>(i), static_cast<int>(i)) = s.sigma[i];
        CHECK(approx_equal(s.u * d * s.v.adjoint(), a, 1e-8 * std::max(1.0, a.frobenius_norm())));
    }
}

TEST_CASE("svd of rank-deficient matrix completes the left basis") {
    CMatrix a(3, 3);
    a(0, 0) = 2;  // rank one
    Svd s = svd(a);
    CHECK(s.sigma[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(std::abs(s.sigma[1]) < 1e-12);
    CHECK(is_unitary(s.u, 1e-10));
}

TEST_CASE("norms and rank") {
    CMatrix a(2, 2, {3, 0, 0, cplx(0, -4)});
    CHECK(op_norm(a) == doctest::Approx(4.0).epsilon(1e-10));
    CHECK(trace_norm(a) == doctest::Approx(7.0).epsilon(1e-10));
    CHECK(matrix_rank(a) == 2);
    CHECK(matrix_rank(CMatrix(3, 3)) == 0);
    CHECK(matrix_rank(CMatrix::unit(3, 3, 0, 1)) == 1);

    CMatrix herm(2, 2, {1, cplx(0, 1), cplx(0, -1), 1});
    CHECK(min_herm_eigenvalue(herm) == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(is_psd(herm));
    CMatrix neg(1, 1, {-1});
    CHECK(!is_psd(neg));
}

TEST_CASE("psd calculus") {
    Rng rng(0x33);
    for (int trial = 0; trial < 8; ++trial) {
        CMatrix g = rng.gaussian_matrix(4, 4);
        CMatrix p = g.adjoint() * g;
        CMatrix r = psd_sqrt(p);
        CHECK(approx_equal(r * r, p, 1e-8 * std::max(1.0, p.frobenius_norm())));
        CHECK(is_psd(r));

        CMatrix q = psd_pinv_sqrt(p);
        // q p q should be the identity on the range of p (full rank generically)
        CHECK(approx_equal(q * p * q, CMatrix::identity(4), 1e-7));
    }
    // Clipping removes exactly the negative part.
    CMatrix a(2, 2, {1, 0, 0, -2});
    CMatrix c = psd_clip(a);
    CHECK(c(0, 0) == cplx(1, 0));
    CHECK(std::abs(c(1, 1)) < 1e-14);
}

TEST_CASE("pinv and lstsq") {
    Rng rng(0x44);
    CMatrix a = rng.gaussian_matrix(5, 3);
    CMatrix ap = pinv(a);
    CHECK(approx_equal(a * ap * a, a, 1e-8 * std::max(1.0, a.frobenius_norm())));
    CHECK(approx_equal(ap * a * ap, ap, 1e-8));

    std::vector<cplx> b = rng.unit_vector(5);
    std::vector<cplx> x = lstsq(a, b);
    // Normal equations: A*(Ax - b) = 0.
    std::vector<cplx> res = mat_apply(a, x);
    for (size_t i = 0; i < res.size(); ++i) res[i] -= b[i];
    std::vector<cplx> g = mat_apply_adjoint(a, res);
    CHECK(vec_norm(g) < 1e-8);
}

TEST_CASE("psd_linear_max matches the positive-part trace formula") {
    Rng rng(0x55);
    for (int trial = 0; trial < 12; ++trial) {
        int n = 2 + static_cast<int>(rng.uniform_below(4));
        CMatrix m = rng.gaussian_matrix(n, n);
        PsdLinearMax r = psd_linear_max(m);

        CMatrix h(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) h(i, j) = 0.5 * (m(i, j) + std::conj(m(j, i)));
        HermEig e = herm_eig(h);
        double expect = 0;
        for (double l : e.values) expect += std::max(0.0, l);
        CHECK(r.value == doctest::Approx(expect).epsilon(1e-9));

        // Feasibility: 0 <= T <= I.
        HermEig et = herm_eig(r.t);
        CHECK(et.values.front() >= -1e-9);
        CHECK(et.values.back() <= 1 + 1e-9);
        // Attainment: Re tr(T M) equals the value.
        double attained = std::real((r.t * m).trace());
        CHECK(attained == doctest::Approx(r.value).epsilon(1e-8));
    }
}

TEST_CASE("psd_linear_max complex rank-one regression") {
    // v = e1, w = i e1: H = (v w* + w v*)/2 = 0, so the value is 0 even though
    // (||v|| ||w|| + Re<v,w>)/2 = 1/2.  Guards the Im<v,w> correction.
    CMatrix m(2, 2);
    m(0, 0) = cplx(0, -1);  // v w* with v = e1, w = i e1
    PsdLinearMax r = psd_linear_max(m);
    CHECK(std::abs(r.value) < 1e-12);
}

TEST_CASE("rng determinism and child streams") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    Rng c(42);
    for (int i = 0; i < 100; ++i) c.next_u64();
    CHECK(a.child_seed(0) == c.child_seed(0));
    Rng d(43);
    CHECK(Rng(42).next_u64() != d.next_u64());

    // unitary() really is unitary
    Rng e(7);
    CMatrix u = e.unitary(4);
    CHECK(is_unitary(u, 1e-10));
    CMatrix t = e.psd_contraction(3);
    HermEig et = herm_eig(t);
    CHECK(et.values.front() >= -1e-12);
    CHECK(et.values.back() <= 1 + 1e-12);
}
