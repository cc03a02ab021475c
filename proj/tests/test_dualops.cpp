// SPDX-License-Identifier: MIT
#include <doctest.h>

#include <cmath>

#include "symcore/dualops.hpp"

using namespace symcore;

namespace {

std::vector<cplx> uc(int dim, int at) {
    std::vector<cplx> c(static_cast<size_t>(dim), cplx(0.0, 0.0));
    c[static_cast<size_t>(at)] = cplx(1.0, 0.0);
    return c;
}

}  // namespace

TEST_CASE("dual space inverts the pairing on the model spaces") {
    for (const ConcreteOpSpace& e :
         {space_Mn(1), space_Rn(2), space_Cn(2), space_Mn(2)}) {
        DualSpace d = dual_space(e);
        CHECK(d.pairing_residual <= 1e-12);
        for (int a = 0; a < e.dim(); ++a)
            for (int b = 0; b < e.dim(); ++b) {
                cplx acc(0.0, 0.0);
                const CMatrix prod = d.dual_basis[static_cast<size_t>(a)].adjoint() * e.basis_at(b);
                acc = prod.trace();
                const double target = a == b ? 1.0 : 0.0;
                CHECK(std::abs(acc - target) <= 1e-12);
            }
    }

    // skewed row basis exercises the Gram inversion for real
    CMatrix r1(1, 2), r2(1, 2);
    r1(0, 0) = 1.0;
    r2(0, 0) = 1.0;
    r2(0, 1) = 1.0;
    DualSpace ds = dual_space(ConcreteOpSpace(2, 1, {r1, r2}));
    CHECK(ds.pairing_residual <= 1e-12);
    CMatrix f0(1, 2);
    f0(0, 0) = 1.0;
    f0(0, 1) = -1.0;
    CHECK(approx_equal(ds.dual_basis[0], f0, 1e-10));

    // effectively dependent basis cannot invert the pairing
    CMatrix r3(1, 2);
    r3(0, 0) = 1.0;
    r3(0, 1) = 1e-9;
    CHECK_THROWS_AS(dual_space(ConcreteOpSpace(2, 1, {r1, r3})), std::runtime_error);
}

TEST_CASE("dual functional norms bracket the model values") {
    DualSpace dc = dual_space(space_Mn(1));
    NormInterval nc = dual_norm(dual_functional(dc, 0));
    CHECK(nc.lower <= 1.0 + 1e-6);
    CHECK(nc.lower >= 1.0 - 1e-3);
    CHECK(nc.upper >= 1.0 - 1e-6);
    CHECK(nc.upper <= 1.0 + 1e-2);

    DualSpace dr = dual_space(space_Rn(2));
    for (int a : {0, 1}) {
        NormInterval ni = dual_norm(dual_functional(dr, a));
        CHECK(ni.lower <= ni.upper + 1e-12);
        CHECK(ni.lower >= 1.0 - 1e-3);
        CHECK(ni.lower <= 1.0 + 1e-6);
        CHECK(ni.upper >= 1.0 - 1e-6);
    }

    // level-two element [[delta_0, delta_1], [0, delta_0]] of (R_2)^d
    std::vector<std::vector<cplx>> slots = {
        {cplx(1.0, 0.0), cplx(0.0, 0.0)},
        {cplx(0.0, 0.0), cplx(1.0, 0.0)},
        {cplx(0.0, 0.0), cplx(0.0, 0.0)},
        {cplx(1.0, 0.0), cplx(0.0, 0.0)}};
    LinMap f2 = dual_level_map(dr, 2, slots);
    NormInterval n2 = dual_norm(f2);
    CHECK(n2.lower <= n2.upper + 1e-12);
    CHECK(n2.lower >= 1.0 - 1e-3);
}

TEST_CASE("dstar identification round trips with matching norms") {
    ConcreteOpSpace e = space_Cn(2);
    ConcreteOpSpace estar = adjoint_space(e);
    Rng rng(0x5d1);
    LinMap f(e, 2, 2, rng.gaussian_matrix(4, 2));
    LinMap g = dstar_identify(estar, f);
    for (int a : {0, 1})
        CHECK(approx_equal(g.apply_coeffs(uc(2, a)),
                           f.apply_coeffs(uc(2, a)).adjoint(), 1e-12));
    LinMap back = dstar_identify(adjoint_space(estar), g);
    CHECK(approx_equal(back.action(), f.action(), 1e-12));

    LinMap z(e, 2, 2, CMatrix(4, 2));
    CHECK(dstar_identify(estar, z).action().max_abs() <= 1e-300);

    NormInterval nf = cb_norm(f);
    NormInterval ng = cb_norm(g);
    CHECK(std::max(nf.lower, ng.lower) <= std::min(nf.upper, ng.upper) + 1e-6);

    CHECK_THROWS_AS(dstar_identify(e, f), ShapeMismatch);
}

TEST_CASE("iota pairing reproduces the slot deltas and keeps full rank") {
    for (const ConcreteOpSpace& e : {space_Mn(1), space_Rn(2), space_Cn(2)}) {
        DualSpace d = dual_space(e);
        CMatrix q = iota_pairing_matrix(d);
        const int d2 = e.dim() * e.dim();
        CHECK(matrix_rank(q) == d2);
        CHECK(approx_equal(q, CMatrix::identity(d2), 1e-10));
    }
}

TEST_CASE("iota values square up on elementary tensors") {
    ConcreteOpSpace e = space_Cn(2);
    DualSpace d = dual_space(e);
    ConcreteOpSpace s = scalar_middle(2);
    Rng rng(0x90);
    for (int rep = 0; rep < 5; ++rep) {
        LinMap psi(e, 1, 1, rng.gaussian_matrix(1, 2));
        std::vector<cplx> xc = {rng.cgaussian(), rng.cgaussian()};
        TensorElement u = TensorElement::elementary(e, s, xc, {cplx(1.0, 0.0)}, xc);
        CMatrix val = iota_pair(psi, psi, u);
        const cplx pv = psi.apply_coeffs(xc)(0, 0);
        CHECK(std::abs(val(0, 0) - cplx(std::norm(pv), 0.0)) <=
              1e-10 * std::max(1.0, std::norm(pv)));
        CHECK(val(0, 0).real() >= -1e-12);
    }

    // scaled identity middle multiplies the value through
    SpaceTags tags;
    tags.is_system = true;
    tags.unit_coeffs = {cplx(0.5, 0.0)};
    CMatrix twice = CMatrix::identity(2);
    twice *= cplx(2.0, 0.0);
    ConcreteOpSpace smid(2, 2, {twice}, tags);
    LinMap psi(e, 1, 1, rng.gaussian_matrix(1, 2));
    std::vector<cplx> xc = {rng.cgaussian(), rng.cgaussian()};
    TensorElement u1 = TensorElement::elementary(e, s, xc, {cplx(1.0, 0.0)}, xc);
    TensorElement u2 = TensorElement::elementary(e, smid, xc, {cplx(1.0, 0.0)}, xc);
    const cplx v1 = iota_pair(psi, psi, u1)(0, 0);
    const cplx v2 = iota_pair(psi, psi, u2)(0, 0);
    CHECK(std::abs(v2 - 2.0 * v1) <= 1e-10 * std::max(1.0, std::abs(v1)));
}

TEST_CASE("positivity transfers through the pairing") {
    int shift = 0;
    for (const ConcreteOpSpace& e : {space_Rn(2), space_Cn(2), space_Mn(2)}) {
        DualSpace d = dual_space(e);
        DualPositivityReport rep = dual_positivity_check(d, 40, 0xfeed + shift++);
        CHECK(rep.samples == 40);
        CHECK(rep.min_eigenvalue >= -1e-9);
        CHECK(rep.ok);
    }
}

TEST_CASE("shape gates reject mismatched pairings") {
    ConcreteOpSpace e = space_Cn(2);
    DualSpace d = dual_space(e);
    ConcreteOpSpace s = scalar_middle(2);
    LinMap f1 = dual_functional(d, 0);
    std::vector<std::vector<cplx>> slots(4, std::vector<cplx>(2, cplx(0.0, 0.0)));
    LinMap f2 = dual_level_map(d, 2, slots);
    TensorElement u = TensorElement::elementary(e, s, uc(2, 0), {cplx(1.0, 0.0)}, uc(2, 0));

    CHECK_THROWS_AS(iota_pair(f1, f2, u), ShapeMismatch);

    TensorElement um = TensorElement::elementary(
        e, space_Mn(2), uc(2, 0),
        {cplx(1.0, 0.0), cplx(0.0, 0.0), cplx(0.0, 0.0), cplx(1.0, 0.0)}, uc(2, 0));
    CHECK_THROWS_AS(iota_pair(f1, f1, um), ShapeMismatch);

    LinMap fr = dual_functional(dual_space(space_Rn(2)), 0);
    CHECK_THROWS_AS(iota_pair(fr, fr, u), ShapeMismatch);

    CHECK_THROWS_AS(dual_functional(d, 7), ShapeMismatch);
    CHECK_THROWS_AS(dual_level_map(d, 2, {{cplx(1.0, 0.0), cplx(0.0, 0.0)}}), ShapeMismatch);

    ConcreteOpSpace r2 = space_Rn(2);
    TensorElement over_rows = TensorElement::elementary(r2, scalar_middle(1), uc(2, 0),
                                                        {cplx(1.0, 0.0)}, uc(2, 0));
    CHECK_THROWS_AS(iota_eval(d, u, over_rows), ShapeMismatch);
}

TEST_CASE("scalar iota is numerically isometric") {
    IotaGapReport rep = iota_isometry_gap(space_Mn(1), space_Mn(1), 4, 0x51);
    CHECK(rep.samples == 4);
    CHECK(std::abs(rep.gap - (rep.u_sym_lower - rep.image_estimate)) <= 1e-12);
    CHECK(std::abs(rep.gap) <= 1e-6);
}

TEST_CASE("row dual gap search reports a consistent best effort") {
    IotaGapReport rep = iota_isometry_gap(space_Rn(2), space_Cn(2), 6, 0xabc);
    CHECK(rep.samples == 6);
    CHECK(rep.image_estimate >= 0.0);
    CHECK(std::abs(rep.gap - (rep.u_sym_lower - rep.image_estimate)) <= 1e-12);

    IotaGapReport again = iota_isometry_gap(space_Rn(2), space_Cn(2), 6, 0xabc);
    CHECK(again.gap == rep.gap);
    CHECK(again.u_sym_lower == rep.u_sym_lower);
    CHECK(again.image_estimate == rep.image_estimate);
}
