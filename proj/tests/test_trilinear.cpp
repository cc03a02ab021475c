// SPDX-License-Identifier: MIT

#include <doctest.h>

#include "symcore/trilinear.hpp"

using namespace symcore;

namespace {

std::vector<cplx> unit_coeff(int d, int i) {
    std::vector<cplx> v(static_cast<size_t>(d));
    v[static_cast<size_t>(i)] = 1;
    return v;
}

LevelElement random_level(const ConcreteOpSpace& e, int m, int n, Rng& rng) {
    std::vector<std::vector<cplx>> c(static_cast<size_t>(m) * n,
                                     std::vector<cplx>(static_cast<size_t>(e.dim())));
    for (auto& slot : c)
        for (cplx& z : slot) z = rng.cgaussian();
    return {e, m, n, c};
}

}  // namespace

TEST_CASE("multiplication form evaluates y* s x and amplifies like the product") {
    ConcreteOpSpace e = space_Mn(2);
    ConcreteOpSpace s = space_Mn(2);
    TrilinearForm theta = TrilinearForm::multiplication(e, s);
    CHECK(theta.r() == 2);
    CHECK(theta.adjoint_law_residual() < 1e-12);

    Rng rng(11);
    for (int t = 0; t < 8; ++t) {
        std::vector<cplx> yc(4), sc(4), xc(4);
        for (auto* v : {&yc, &sc, &xc})
            for (cplx& z : *v) z = rng.cgaussian();
        CMatrix direct = e.element(yc).adjoint() * s.element(sc) * e.element(xc);
        CHECK((theta.eval(yc, sc, xc) - direct).max_abs() < 1e-12);
    }

    // amplified evaluation equals the block product Y* S X
    LevelElement y = random_level(e, 2, 3, rng);
    LevelElement x = random_level(e, 2, 3, rng);
    LevelElement sl = random_level(s, 2, 2, rng);
    CMatrix direct = y.concrete().adjoint() * sl.concrete() * x.concrete();
    CHECK((amplify(theta, y, sl, x) - direct).max_abs() < 1e-10);
}

TEST_CASE("positivity sampler accepts the multiplication form and rejects a flipped one") {
    ConcreteOpSpace e = space_Mn(2);
    ConcreteOpSpace s = space_Mn(2);
    TrilinearForm theta = TrilinearForm::multiplication(e, s);
    Rng rng(21);
    PositivityReport ok = sample_positivity(theta, rng, 32, 3);
    CHECK(ok.positive);
    CHECK(ok.min_eig > -1e-9);

    // negated form cannot stay positive
    std::vector<CMatrix> neg;
    for (const CMatrix& t : theta.tensor()) {
        CMatrix m = t;
        m *= cplx(-1, 0);
        neg.push_back(m);
    }
    TrilinearForm bad(e, s, theta.r(), neg);
    Rng rng2(22);
    PositivityReport rej = sample_positivity(bad, rng2, 32, 2);
    CHECK_FALSE(rej.positive);
    CHECK(rej.min_eig < -1e-3);
}

TEST_CASE("polarisation identity recovers the off-diagonal value") {
    ConcreteOpSpace e = space_Mn(2);
    ConcreteOpSpace s = space_Mn(2);
    TrilinearForm theta = TrilinearForm::multiplication(e, s);
    Rng rng(31);
    for (int t = 0; t < 6; ++t) {
        std::vector<cplx> v1(4), v2(4), sc(4);
        for (auto* v : {&v1, &v2, &sc})
            for (cplx& z : *v) z = rng.cgaussian();
        Polarisation p = polarise(theta, v1, sc, v2);
        CHECK((p.combined - theta.eval(v1, sc, v2)).max_abs() < 1e-12);
    }
}

TEST_CASE("gns factorisation of the multiplication form reconstructs exactly") {
    ConcreteOpSpace e = space_Mn(2);
    ConcreteOpSpace s = space_Mn(2);
    TrilinearForm theta = TrilinearForm::multiplication(e, s);
    GnsFactorisation g = gns_factorise(theta);
    CHECK(g.k_dim > 0);
    CHECK(g.reconstruction_residual < 1e-8);
    CHECK(g.psi_unital);
    CHECK(g.psi_cp);
    CHECK(g.psi_min_eig > -1e-9);
    CHECK(g.psi_route == CpRoute::Choi);

    // the intertwining law for the full matrix algebra acting on both sides
    std::vector<CMatrix> a_basis = s.basis();
    CHECK(balanced_intertwining_residual(g, theta, a_basis) < 1e-8);
}

TEST_CASE("gns round-trips a planted factorisation and bounds the cb norm") {
    ConcreteOpSpace e = space_Rn(2);  // row space inside B(C^2, C)
    ConcreteOpSpace s = space_Dn(2);
    Rng rng(41);
    LinMap left = sample_cc_map(e, 3, 1, 1, rng);
    LinMap right = left;
    LinMap mid = LinMap::from_action(s, 3, 3, [&](const CMatrix& a) {
        // embed the diagonal into M_3 by repeating the last entry
        CMatrix out(3, 3);
        out(0, 0) = a(0, 0);
        out(1, 1) = a(1, 1);
        out(2, 2) = a(1, 1);
        return out;
    });
    TrilinearForm theta = TrilinearForm::from_pair(left, mid, right);
    GnsFactorisation g = gns_factorise(theta);
    CHECK(g.reconstruction_residual < 1e-8);
    CHECK(g.psi_unital);
    CHECK(g.psi_cp);

    // planted reconstruction agrees slot by slot
    for (int i = 0; i < e.dim(); ++i)
        for (int j = 0; j < s.dim(); ++j)
            for (int l = 0; l < e.dim(); ++l) {
                CMatrix phi_i = g.phi.apply_coeffs(unit_coeff(e.dim(), i));
                CMatrix phi_l = g.phi.apply_coeffs(unit_coeff(e.dim(), l));
                CMatrix psi_j = g.psi.apply_coeffs(unit_coeff(s.dim(), j));
                CHECK((phi_i.adjoint() * psi_j * phi_l - theta.at(i, j, l)).max_abs() < 1e-9);
            }
}

TEST_CASE("zero form degenerates to an empty dilation space") {
    ConcreteOpSpace e = space_Mn(2);
    ConcreteOpSpace s = space_Mn(2);
    std::vector<CMatrix> zt(static_cast<size_t>(e.dim()) * s.dim() * e.dim(), CMatrix(2, 2));
    TrilinearForm theta(e, s, 2, zt);
    GnsFactorisation g = gns_factorise(theta);
    CHECK(g.k_dim == 0);
    CHECK(g.reconstruction_residual == 0);
    CHECK(g.psi_unital);
    CHECK(g.psi_cp);

    Rng rng(51);
    CcDecomposition dec = cc_decompose(theta, rng);
    CHECK(dec.parts.size() == 4);
    for (const TrilinearForm& p : dec.parts)
        for (const CMatrix& t : p.tensor()) CHECK(t.max_abs() == 0);
}

TEST_CASE("gns rejects a form whose gram is negative") {
    ConcreteOpSpace e = space_Mn(2);
    ConcreteOpSpace s = space_Mn(2);
    TrilinearForm theta = TrilinearForm::multiplication(e, s);
    std::vector<CMatrix> neg;
    for (const CMatrix& t : theta.tensor()) {
        CMatrix m = t;
        m *= cplx(-1, 0);
        neg.push_back(m);
    }
    TrilinearForm bad(e, s, theta.r(), neg);
    CHECK_THROWS_AS(gns_factorise(bad), NotPositive);
}

TEST_CASE("cc decomposition splits a twisted multiplication form into cp parts") {
    // theta(y*, s, x) = y* s (u x) with u unitary: completely contractive,
    // not completely positive
    ConcreteOpSpace e = space_Mn(2);
    ConcreteOpSpace s = space_Mn(2);
    Rng urng(61);
    CMatrix u = urng.unitary(2);
    std::vector<CMatrix> tensor;
    for (int i = 0; i < e.dim(); ++i)
        for (int j = 0; j < s.dim(); ++j)
            for (int l = 0; l < e.dim(); ++l)
                tensor.push_back(e.basis_at(i).adjoint() * s.basis_at(j) * u * e.basis_at(l));
    TrilinearForm theta(e, s, 2, tensor);

    Rng rng(62);
    CcDecomposition dec = cc_decompose(theta, rng);
    CHECK(dec.parts.size() == 4);
    CHECK(dec.reconstruction_residual < 1e-8);
    CHECK(dec.c_used >= 1);

    // every part passes the positivity sampler
    for (size_t m = 0; m < 4; ++m) {
        Rng prng(70 + static_cast<uint64_t>(m));
        PositivityReport rep = sample_positivity(dec.parts[m], prng, 24, 2);
        CHECK(rep.positive);
    }

    // weighted sum agrees with theta pointwise on random arguments
    Rng arng(63);
    std::vector<cplx> yc(4), sc(4), xc(4);
    for (auto* v : {&yc, &sc, &xc})
        for (cplx& z : *v) z = arng.cgaussian();
    CMatrix acc(2, 2);
    for (size_t m = 0; m < 4; ++m) {
        CMatrix t = dec.parts[m].eval(yc, sc, xc);
        t *= dec.weights[m];
        acc += t;
    }
    CHECK((acc - theta.eval(yc, sc, xc)).max_abs() < 1e-8);
}

TEST_CASE("sampled psd levels are positive and stay inside the system") {
    ConcreteOpSpace s = space_Dn(3);
    Rng rng(71);
    for (int t = 0; t < 12; ++t) {
        LevelElement x = sample_psd_level(s, 1 + static_cast<int>(rng.uniform_below(3)), rng);
        CHECK(min_herm_eigenvalue(0.5 * (x.concrete() + x.concrete().adjoint())) > -1e-10);
    }
}
