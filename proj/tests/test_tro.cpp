// SPDX-License-Identifier: MIT

#include <doctest.h>

#include "symcore/tro.hpp"

using namespace symcore;

namespace {

ConcreteOpSpace scalar_system() {
    SpaceTags tags;
    tags.is_system = true;
    tags.is_subalgebra = true;
    tags.unit_coeffs = {1.0};
    return ConcreteOpSpace(1, 1, {CMatrix(1, 1, {1.0})}, tags);
}

ConcreteOpSpace scalar_i2() {
    SpaceTags tags;
    tags.is_system = true;
    tags.is_subalgebra = true;
    tags.unit_coeffs = {1.0};
    return ConcreteOpSpace(2, 2, {CMatrix::identity(2)}, tags);
}

}  // namespace

TEST_CASE("is_tro accepts rectangles and reports a broken corner") {
    CHECK(is_tro(space_Mkn(2, 3)).ok);
    CHECK(is_tro(space_Rn(2)).ok);
    CHECK(is_tro(space_Cn(3)).ok);

    std::vector<CMatrix> corner{CMatrix::unit(2, 2, 0, 0), CMatrix::unit(2, 2, 0, 1),
                                CMatrix::unit(2, 2, 1, 0)};
    ConcreteOpSpace broken(2, 2, corner, {});
    TroCheck chk = is_tro(broken);
    REQUIRE_FALSE(chk.ok);
    CMatrix bad = broken.basis_at(chk.i) * broken.basis_at(chk.j).adjoint() *
                  broken.basis_at(chk.k);
    CHECK(project_onto(broken, bad).residual > 1e-6);
}

TEST_CASE("make_tro extracts the product algebras with tags") {
    TroSpace c2 = make_tro(space_Cn(2));
    CHECK(c2.m.tags().is_tro);
    CHECK(c2.left_algebra.dim() == 4);
    CHECK(c2.left_algebra.tags().is_system);
    CHECK(c2.right_algebra.dim() == 1);
    CHECK(c2.right_algebra.tags().is_system);

    TroSpace r2 = make_tro(space_Rn(2));
    CHECK(r2.left_algebra.dim() == 1);
    CHECK(r2.right_algebra.dim() == 4);

    TroSpace corner = make_tro(ConcreteOpSpace(2, 2, {CMatrix::unit(2, 2, 0, 1)}, {}));
    CHECK(corner.left_algebra.dim() == 1);
    CHECK_FALSE(corner.left_algebra.tags().is_system);
    CHECK_FALSE(corner.right_algebra.tags().is_system);

    CHECK_THROWS_AS(make_tro(ConcreteOpSpace(
                        2, 2,
                        {CMatrix::unit(2, 2, 0, 0), CMatrix::unit(2, 2, 0, 1),
                         CMatrix::unit(2, 2, 1, 0)},
                        {})),
                    InvalidSpace);
}

TEST_CASE("product_span composes to the expected product space") {
    ConcreteOpSpace c2 = space_Cn(2);
    ConcreteOpSpace m2 = space_Mn(2);
    std::vector<CMatrix> stars;
    for (const CMatrix& b : c2.basis()) stars.push_back(b.adjoint());
    ConcreteOpSpace sm = product_span(stars, m2.basis());
    CHECK(sm.dim() == 2);  // rows
    ConcreteOpSpace msm = product_span(sm.basis(), c2.basis());
    CHECK(msm.dim() == 1);
    CHECK(msm.ambient_h() == 1);
    CHECK(msm.ambient_k() == 1);
}

TEST_CASE("find_semi_unit assembles exact columns") {
    TroSpace r2 = make_tro(space_Rn(2));
    auto su = find_semi_unit(r2);
    REQUIRE(su.has_value());
    CHECK(su->columns.size() == 2);
    CHECK(su->residual <= 1e-9);
    CMatrix total(2, 2);
    for (const auto& col : su->columns) {
        CMatrix x = r2.m.element(col);
        total += x.adjoint() * x;
    }
    CHECK(approx_equal(total, CMatrix::identity(2), 1e-12));

    TroSpace m2 = make_tro(space_Mn(2));
    auto sm = find_semi_unit(m2);
    REQUIRE(sm.has_value());
    CMatrix tot(2, 2);
    for (const auto& col : sm->columns) {
        CMatrix x = m2.m.element(col);
        tot += x.adjoint() * x;
    }
    CHECK(approx_equal(tot, CMatrix::identity(2), 1e-9));

    TroSpace corner = make_tro(ConcreteOpSpace(2, 2, {CMatrix::unit(2, 2, 0, 1)}, {}));
    CHECK_FALSE(find_semi_unit(corner).has_value());
}

TEST_CASE("mult_element reproduces the concrete triple products") {
    ConcreteOpSpace e = space_Cn(2);
    ConcreteOpSpace s = space_Mn(2);
    for (int yi = 0; yi < 2; ++yi)
        for (int ci = 0; ci < 4; ++ci)
            for (int xi = 0; xi < 2; ++xi) {
                std::vector<cplx> yc(2), sc(4), xc(2);
                yc[static_cast<size_t>(yi)] = 1.0;
                sc[static_cast<size_t>(ci)] = 1.0;
                xc[static_cast<size_t>(xi)] = 1.0;
                TensorElement u = TensorElement::elementary(e, s, yc, sc, xc);
                CMatrix expect = e.basis_at(yi).adjoint() * s.basis_at(ci) * e.basis_at(xi);
                CHECK(approx_equal(mult_element(u), expect, 1e-12));
            }
}

TEST_CASE("balanced context validation gates the module actions") {
    ConcreteOpSpace c2 = space_Cn(2);
    ConcreteOpSpace m2 = space_Mn(2);
    BalancedContext ctx = make_balanced_context(scalar_i2(), c2, m2);
    CHECK(ctx.report.ok);
    CHECK(ctx.report.asa_residual <= 1e-9);

    // diagonal algebra does not stabilise span{I}
    CHECK_THROWS_AS(make_balanced_context(space_Dn(2), c2, scalar_i2()), InvalidContext);
    // S must be a system
    ConcreteOpSpace corner(2, 2, {CMatrix::unit(2, 2, 0, 1)}, {});
    CHECK_THROWS_AS(make_balanced_context(scalar_i2(), c2, corner), InvalidContext);
}

TEST_CASE("balanced seminorm over the scalars matches the symmetrised norm") {
    ConcreteOpSpace e = space_Cn(2);
    ConcreteOpSpace s = space_Mn(2);
    BalancedContext ctx = make_balanced_context(scalar_i2(), e, s);

    std::vector<cplx> yc{1.0, 0.0}, sc{0.0, 1.0, 0.0, 0.0}, xc{0.0, 1.0};
    TensorElement u = TensorElement::elementary(e, s, yc, sc, xc);

    SymNormResult sn = sym_norm(u);
    BalancedResult bal = balanced_seminorm(u, ctx);
    CHECK(std::abs(bal.interval.upper - sn.upper) <= 1e-6);
    CHECK(bal.interval.lower >= sn.lower - 1e-6);
    CHECK(bal.interval.lower <= bal.interval.upper + 1e-9);
    CHECK(bal.interval.upper <= sn.upper + 1e-9);
}

TEST_CASE("balanced seminorm pinches to the product norm on a TRO context") {
    TroSpace tro = make_tro(space_Cn(2));
    ConcreteOpSpace s = space_Mn(2);
    BalancedContext ctx = make_balanced_context(tro.left_algebra, tro.m, s);

    // disjoint supports: the product vanishes and so does the seminorm
    std::vector<cplx> yc{1.0, 0.0}, sc{0.0, 0.0, 0.0, 1.0}, xc{0.0, 1.0};
    TensorElement u = TensorElement::elementary(tro.m, s, yc, sc, xc);
    CHECK(op_norm(mult_element(u)) <= 1e-12);
    BalancedResult bal = balanced_seminorm(u, ctx);
    CHECK(bal.interval.lower <= 1e-12);
    CHECK(bal.interval.upper <= 1e-9);

    // aligned supports: the interval sits at |y* s x| = 1
    std::vector<cplx> sc2{0.0, 1.0, 0.0, 0.0};
    TensorElement v = TensorElement::elementary(tro.m, s, yc, sc2, xc);
    BalancedResult balv = balanced_seminorm(v, ctx);
    CHECK(std::abs(balv.interval.lower - 1.0) <= 1e-9);
    CHECK(std::abs(balv.interval.upper - 1.0) <= 1e-6);

    // generic two-block element: both ends agree with ||mult(u)||
    Rng rng(0x7a11);
    std::vector<TensorElement::Block> blocks;
    for (int r = 0; r < 2; ++r) {
        auto grid = [&](int rows, int cols, const ConcreteOpSpace& sp) {
            std::vector<std::vector<cplx>> g(static_cast<size_t>(rows) * cols);
            for (auto& slot : g) {
                slot.resize(static_cast<size_t>(sp.dim()));
                for (cplx& z : slot) z = rng.cgaussian();
            }
            return g;
        };
        blocks.push_back(TensorElement::Block{LevelElement(tro.m, 2, 2, grid(2, 2, tro.m)),
                                              LevelElement(s, 2, 2, grid(2, 2, s)),
                                              LevelElement(tro.m, 2, 2, grid(2, 2, tro.m))});
    }
    TensorElement w(tro.m, s, 2, blocks);
    double mn = op_norm(mult_element(w));
    BalancedResult balw = balanced_seminorm(w, ctx);
    CHECK(std::abs(balw.interval.lower - mn) <= 1e-9 * std::max(1.0, mn));
    CHECK(std::abs(balw.interval.upper - mn) <= 1e-6 * std::max(1.0, mn));

    SymNormResult sw = sym_norm(w);
    CHECK(balw.interval.upper <= sw.upper + 1e-9);
}

TEST_CASE("admissibility identity separates balanced pairs from plain ones") {
    TroSpace tro = make_tro(space_Cn(2));
    ConcreteOpSpace s = space_Mn(2);
    BalancedContext ctx = make_balanced_context(tro.left_algebra, tro.m, s);

    AdmissiblePair canonical{
        LinMap(ctx.e, ctx.e.ambient_k(), ctx.e.ambient_h(), ctx.e.vectorised_basis()),
        LinMap(ctx.s, ctx.s.ambient_k(), ctx.s.ambient_k(), ctx.s.vectorised_basis())};
    CHECK(admissibility_residual(canonical, ctx) <= 1e-10);

    BalancedDemo demo = balanced_demo();
    CHECK(admissibility_residual(demo.unbalanced_pair, demo.ctx) > 1e-3);
}

TEST_CASE("tro_collapse_check certifies the three model contexts") {
    CollapseReport c2 = tro_collapse_check(make_tro(space_Cn(2)), space_Mn(2), 16, 0x1111);
    CHECK(c2.ok);
    CHECK(c2.max_pair_excess <= 1e-9);
    CHECK(c2.max_canonical_gap <= 1e-9);
    CHECK(c2.max_positive_violation <= 1e-9);
    CHECK(c2.max_synthesis_residual <= 1e-7);

    CollapseReport r2 = tro_collapse_check(make_tro(space_Rn(2)), scalar_system(), 16, 0x2222);
    CHECK(r2.ok);

    CollapseReport m2 = tro_collapse_check(make_tro(space_Mn(2)), space_Mn(2), 16, 0x3333);
    CHECK(m2.ok);

    // corner module: span(M M*) misses the identity
    TroSpace corner = make_tro(ConcreteOpSpace(2, 2, {CMatrix::unit(2, 2, 0, 1)}, {}));
    CHECK_THROWS_AS(tro_collapse_check(corner, space_Mn(2), 4, 0x4444), ModuleConditionFailed);
}

TEST_CASE("balanced demo separates the balanced and plain norms") {
    BalancedDemo d = balanced_demo();
    CHECK(d.balanced.interval.lower <= 1e-12);
    CHECK(d.balanced.interval.upper <= 1e-9);
    CHECK(d.balanced.rewrites_applied >= 1);
    CHECK(d.unbalanced_lower >= 0.25 - 1e-9);
    CHECK(d.unbalanced_pair.validate().ok);

    // pair replay and full determinism
    CHECK(std::abs(op_norm(eval_pair(d.unbalanced_pair, d.u)) - d.unbalanced_lower) <= 1e-12);
    BalancedDemo d2 = balanced_demo();
    CHECK(d2.balanced.interval.lower == d.balanced.interval.lower);
    CHECK(d2.balanced.interval.upper == d.balanced.interval.upper);
    CHECK(d2.unbalanced_lower == d.unbalanced_lower);
}
