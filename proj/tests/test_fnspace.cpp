// SPDX-License-Identifier: MIT

#include <doctest.h>

#include "symcore/fnspace.hpp"

using namespace symcore;

namespace {

ConcreteOpSpace diag_space(int n) {
    std::vector<CMatrix> basis;
    for (int i = 0; i < n; ++i) {
        CMatrix m(n, n);
        m(i, i) = 1;
        basis.push_back(m);
    }
    SpaceTags t;
    t.is_system = true;
    t.unit_coeffs.assign(static_cast<size_t>(n), cplx{1, 0});
    return {n, n, basis, t};
}

ConcreteOpSpace scalar_system() {
    CMatrix one(1, 1);
    one(0, 0) = 1;
    SpaceTags t;
    t.is_system = true;
    t.unit_coeffs = {cplx{1, 0}};
    return {1, 1, {one}, t};
}

// u with kernel w(x, y) from rank-one strands y_r = delta_r, x_r = row r of w
TensorElement tensor_of_kernel_matrix(const ConcreteOpSpace& e, const ConcreteOpSpace& s,
                                      const CMatrix& w) {
    const int om = w.rows();
    std::vector<TensorElement::Block> blocks;
    for (int r = 0; r < om; ++r) {
        std::vector<cplx> y(static_cast<size_t>(om)), x(static_cast<size_t>(om));
        y[static_cast<size_t>(r)] = 1;
        for (int b = 0; b < om; ++b) x[static_cast<size_t>(b)] = w(r, b);
        blocks.push_back(TensorElement::Block{LevelElement(e, 1, 1, {y}),
                                              LevelElement(s, 1, 1, {{cplx{1, 0}}}),
                                              LevelElement(e, 1, 1, {x})});
    }
    return {e, s, 1, blocks};
}

}  // namespace

TEST_CASE("kernel evaluation of diagonal tensors") {
    ConcreteOpSpace e = diag_space(2);
    ConcreteOpSpace s = scalar_system();

    SUBCASE("rank-one all-ones function") {
        std::vector<cplx> f = {cplx{1, 0}, cplx{1, 0}};
        TensorElement u = TensorElement::elementary(e, s, f, {cplx{1, 0}}, f);
        KernelFunction k = kernel_of_tensor(u);
        REQUIRE(k.omega == 2);
        REQUIRE(k.n == 1);
        for (int x = 0; x < 2; ++x)
            for (int y = 0; y < 2; ++y) CHECK(std::abs(k.at(x, y)(0, 0) - cplx{1, 0}) <= 1e-14);
    }

    SUBCASE("diagonal unit gives the identity kernel") {
        std::vector<TensorElement::Block> blocks;
        for (int i = 0; i < 2; ++i) {
            std::vector<cplx> d(2);
            d[static_cast<size_t>(i)] = 1;
            blocks.push_back(TensorElement::Block{LevelElement(e, 1, 1, {d}),
                                                  LevelElement(s, 1, 1, {{cplx{1, 0}}}),
                                                  LevelElement(e, 1, 1, {d})});
        }
        TensorElement u(e, s, 1, blocks);
        KernelFunction k = kernel_of_tensor(u);
        for (int x = 0; x < 2; ++x)
            for (int y = 0; y < 2; ++y)
                CHECK(std::abs(k.at(x, y)(0, 0) - (x == y ? cplx{1, 0} : cplx{})) <= 1e-14);
    }

    SUBCASE("random tensor matches the direct contraction") {
        ConcreteOpSpace e3 = diag_space(3);
        Rng rng(0xfe11);
        std::vector<TensorElement::Block> blocks;
        for (int r = 0; r < 2; ++r) {
            std::vector<std::vector<cplx>> yc(2, std::vector<cplx>(3)), xc(2, std::vector<cplx>(3));
            std::vector<std::vector<cplx>> sc(1, std::vector<cplx>(1));
            for (auto& slot : yc)
                for (cplx& z : slot) z = rng.cgaussian();
            for (auto& slot : xc)
                for (cplx& z : slot) z = rng.cgaussian();
            sc[0][0] = rng.cgaussian();
            blocks.push_back(TensorElement::Block{LevelElement(e3, 1, 2, yc),
                                                  LevelElement(s, 1, 1, sc),
                                                  LevelElement(e3, 1, 2, xc)});
        }
        TensorElement u(e3, s, 2, blocks);
        KernelFunction k = kernel_of_tensor(u);
        for (int x = 0; x < 3; ++x)
            for (int y = 0; y < 3; ++y)
                for (int i = 0; i < 2; ++i)
                    for (int j = 0; j < 2; ++j) {
                        cplx direct{};
                        for (int a = 0; a < 3; ++a)
                            for (int b = 0; b < 3; ++b)
                                direct += u.coeff(i, j, a, 0, b) *
                                          std::conj(e3.basis_at(a)(x, x)) * e3.basis_at(b)(y, y);
                        CHECK(std::abs(k.at(x, y)(i, j) - direct) <= 1e-12);
                    }
    }

    SUBCASE("non-diagonal and non-scalar inputs are rejected") {
        CMatrix offdiag(2, 2);
        offdiag(0, 1) = 1;
        ConcreteOpSpace bad(2, 2, {offdiag});
        std::vector<cplx> f = {cplx{1, 0}};
        TensorElement u = TensorElement::elementary(bad, s, f, {cplx{1, 0}}, f);
        CHECK_THROWS_AS(kernel_of_tensor(u), UnsupportedSpace);

        ConcreteOpSpace s2 = diag_space(2);
        std::vector<cplx> g = {cplx{1, 0}, cplx{0, 0}};
        TensorElement v =
            TensorElement::elementary(e, s2, g, {cplx{1, 0}, cplx{1, 0}}, g);
        CHECK_THROWS_AS(kernel_of_tensor(v), UnsupportedSpace);
    }
}

TEST_CASE("positivity of kernels") {
    KernelFunction gram;
    gram.omega = 2;
    gram.n = 1;
    gram.blocks.assign(4, CMatrix(1, 1));
    gram.at(0, 0)(0, 0) = 1;
    gram.at(0, 1)(0, 0) = 1;
    gram.at(1, 0)(0, 0) = 1;
    gram.at(1, 1)(0, 0) = 1;
    KernelVerdict v1 = is_positive_kernel(gram);
    CHECK(v1.positive);

    KernelFunction bad = gram;
    bad.at(0, 1)(0, 0) = 2;
    bad.at(1, 0)(0, 0) = 2;
    KernelVerdict v2 = is_positive_kernel(bad);
    CHECK(!v2.positive);
    CHECK(std::abs(v2.min_eig - (-1.0)) <= 1e-12);
    REQUIRE(v2.witness.size() == 2);
    // witness is a null-ish direction: B w = min_eig w
    CMatrix b = bad.full_matrix();
    for (int i = 0; i < 2; ++i) {
        cplx acc{};
        for (int j = 0; j < 2; ++j) acc += b(i, j) * v2.witness[static_cast<size_t>(j)];
        CHECK(std::abs(acc - v2.min_eig * v2.witness[static_cast<size_t>(i)]) <= 1e-9);
    }

    SUBCASE("sums of Grams stay positive") {
        Rng rng(0x9ead);
        KernelFunction k;
        k.omega = 3;
        k.n = 1;
        k.blocks.assign(9, CMatrix(1, 1));
        for (int r = 0; r < 4; ++r) {
            std::vector<cplx> f(3);
            for (cplx& z : f) z = rng.cgaussian();
            for (int x = 0; x < 3; ++x)
                for (int y = 0; y < 3; ++y)
                    k.at(x, y)(0, 0) += std::conj(f[static_cast<size_t>(x)]) * f[static_cast<size_t>(y)];
        }
        CHECK(is_positive_kernel(k).positive);
    }

    SUBCASE("non-hermitian kernels are rejected") {
        KernelFunction k = gram;
        k.at(0, 1)(0, 0) = cplx{0, 1};
        CHECK_THROWS_AS(is_positive_kernel(k), NotHermitian);
    }
}

TEST_CASE("integral operators of discrete measures") {
    KernelFunction bad;
    bad.omega = 2;
    bad.n = 1;
    bad.blocks.assign(4, CMatrix(1, 1));
    bad.at(0, 0)(0, 0) = 1;
    bad.at(0, 1)(0, 0) = 2;
    bad.at(1, 0)(0, 0) = 2;
    bad.at(1, 1)(0, 0) = 1;

    SUBCASE("point mass picks the diagonal value") {
        DiscreteMeasure mu{{1}, {1.0}};
        CMatrix t = integral_operator(bad, mu);
        REQUIRE(t.rows() == 1);
        CHECK(std::abs(t(0, 0) - cplx{1, 0}) <= 1e-14);
    }

    SUBCASE("counting measure reproduces the negative eigenvalue") {
        DiscreteMeasure mu{{0, 1}, {1.0, 1.0}};
        CHECK(!mu.is_probability());
        CMatrix t = integral_operator(bad, mu);
        CHECK(min_herm_eigenvalue(t) <= -1.0 + 1e-9);
    }

    SUBCASE("PSD kernels give PSD operators for any measure") {
        KernelFunction gram;
        gram.omega = 2;
        gram.n = 1;
        gram.blocks.assign(4, CMatrix(1, 1));
        gram.at(0, 0)(0, 0) = 1;
        gram.at(0, 1)(0, 0) = 1;
        gram.at(1, 0)(0, 0) = 1;
        gram.at(1, 1)(0, 0) = 1;
        DiscreteMeasure mu{{0, 1}, {0.3, 0.7}};
        CHECK(mu.is_probability());
        CHECK(min_herm_eigenvalue(integral_operator(gram, mu)) >= -1e-12);
    }

    SUBCASE("empty support is rejected") {
        DiscreteMeasure mu;
        CHECK_THROWS_AS(integral_operator(bad, mu), EmptySupport);
    }

    SUBCASE("linearity in the kernel") {
        KernelFunction two = bad;
        for (CMatrix& blk : two.blocks) blk *= cplx{2, 0};
        DiscreteMeasure mu{{0, 1}, {0.5, 0.5}};
        CMatrix lhs = integral_operator(two, mu);
        CMatrix rhs = integral_operator(bad, mu);
        rhs *= cplx{2, 0};
        CHECK((lhs - rhs).max_abs() <= 1e-14);
    }
}

TEST_CASE("archimedean shift by the diagonal unit") {
    Rng rng(0xa5c1);
    KernelFunction k;
    k.omega = 3;
    k.n = 2;
    k.blocks.assign(9, CMatrix(2, 2));
    for (int x = 0; x < 3; ++x)
        for (int y = x; y < 3; ++y) {
            CMatrix g = rng.gaussian_matrix(2, 2);
            if (y == x) g = 0.5 * (g + g.adjoint());
            k.at(x, y) = g;
            k.at(y, x) = g.adjoint();
        }
    REQUIRE(k.is_hermitian());
    double r = archimedean_radius(k);
    CHECK(is_positive_kernel(shifted_by_unit(k, r)).positive);
    CHECK(is_positive_kernel(shifted_by_unit(k, r + 0.1)).positive);
}

TEST_CASE("kernel refutation bridges into cone certificates") {
    ConcreteOpSpace e = diag_space(2);
    ConcreteOpSpace s = scalar_system();
    CMatrix w(2, 2);
    w(0, 0) = 1;
    w(0, 1) = 2;
    w(1, 0) = 2;
    w(1, 1) = 1;
    TensorElement u = tensor_of_kernel_matrix(e, s, w);

    KernelRefutation ref = refute_kernel(u);
    CHECK(ref.certificate.verdict == Verdict::Refuted);
    REQUIRE(ref.certificate.refutation.has_value());
    CHECK(ref.certificate.refutation->eigenvalue <= -1e-9);
    CHECK(ref.mu.is_probability());
    // uniform probability pair caps at min_eig / omega
    CHECK(std::abs(ref.pair_eval_min_eig - (-0.5)) <= 1e-9);
    // the counting-measure integral operator carries the full eigenvalue
    CHECK(std::abs(ref.integral_min_eig - (-1.0)) <= 1e-9);

    // replay through the pair
    CMatrix m = eval_pair(ref.pair, u);
    CHECK(std::abs(min_herm_eigenvalue(0.5 * (m + m.adjoint())) -
                   ref.certificate.refutation->eigenvalue) <= 1e-12);
    AdmissiblePair::Validation val = ref.pair.validate();
    CHECK(val.ok);

    SUBCASE("block-valued kernels refute at level 2") {
        Rng rng(0xb10c);
        std::vector<std::vector<cplx>> xc(2, std::vector<cplx>(2));
        for (auto& slot : xc)
            for (cplx& z : slot) z = rng.cgaussian();
        LevelElement x(e, 1, 2, xc);
        LevelElement neg(s, 1, 1, {{cplx{-1, 0}}});
        TensorElement v(e, s, 2, {TensorElement::Block{x, neg, x}});
        KernelRefutation r2 = refute_kernel(v);
        CHECK(r2.kernel.n == 2);
        CHECK(r2.certificate.verdict == Verdict::Refuted);
        CHECK(r2.certificate.refutation->eigenvalue <= -1e-9);
    }

    SUBCASE("PSD kernels cannot be refuted") {
        std::vector<cplx> f = {cplx{1, 0}, cplx{1, 0}};
        TensorElement g = TensorElement::elementary(e, s, f, {cplx{1, 0}}, f);
        CHECK_THROWS_AS(refute_kernel(g), KernelIsPositive);
    }
}

TEST_CASE("finite-omega equivalence of kernel and cone verdicts") {
    ConcreteOpSpace e = diag_space(2);
    ConcreteOpSpace s = scalar_system();
    Rng rng(0xe0e0);
    int done = 0;
    for (int trial = 0; trial < 40 && done < 12; ++trial) {
        CMatrix g = rng.gaussian_matrix(2, 2);
        CMatrix w = 0.5 * (g + g.adjoint());
        TensorElement u = tensor_of_kernel_matrix(e, s, w);
        KernelFunction k = kernel_of_tensor(u);
        KernelVerdict kv = is_positive_kernel(k);
        if (std::abs(kv.min_eig) < 1e-6) continue;  // skip borderline samples
        ++done;
        if (kv.positive) {
            RefuteConfig cfg;
            cfg.restarts = 6;
            cfg.climb_iters = 10;
            ConeCertificate cert = refute_positive(u, cfg);
            CHECK(cert.verdict == Verdict::Undecided);
        } else {
            KernelRefutation ref = refute_kernel(u);
            CHECK(ref.certificate.verdict == Verdict::Refuted);
        }
    }
    CHECK(done >= 12);
}
