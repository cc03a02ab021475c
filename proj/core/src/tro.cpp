// SPDX-License-Identifier: MIT

#include "symcore/tro.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "symcore/rng.hpp"

namespace symcore {
namespace {

int64_t now_ms() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

// orthonormal matrix basis of span{mats} inside B(C^h, C^k)
std::vector<CMatrix> span_basis(int h, int k, const std::vector<CMatrix>& mats) {
    if (mats.empty()) return {};
    CMatrix cols(k * h, static_cast<int>(mats.size()));
    for (size_t j = 0; j < mats.size(); ++j)
        for (int r = 0; r < k * h; ++r)
            cols(r, static_cast<int>(j)) = mats[j].data()[static_cast<size_t>(r)];
    Svd sv = svd(cols);
    double top = sv.sigma.empty() ? 0.0 : sv.sigma.front();
    std::vector<CMatrix> basis;
    for (size_t r = 0; r < sv.sigma.size(); ++r) {
        if (sv.sigma[r] <= 1e-10 * std::max(top, 1e-300)) break;
        CMatrix b(k, h);
        for (int i = 0; i < k * h; ++i)
            b.data()[static_cast<size_t>(i)] = sv.u(i, static_cast<int>(r));
        basis.push_back(b);
    }
    return basis;
}

// span of products, tagged as a subalgebra; tagged as a system too when the
// ambient identity lies inside
ConcreteOpSpace algebra_space(int n, const std::vector<CMatrix>& products) {
    std::vector<CMatrix> basis = span_basis(n, n, products);
    if (basis.empty()) throw InvalidSpace("product algebra spans only zero");
    SpaceTags tags;
    tags.is_subalgebra = true;
    ConcreteOpSpace plain(n, n, basis, tags);
    Projection pi = project_onto(plain, CMatrix::identity(n));
    if (pi.residual <= 1e-9) {
        tags.is_system = true;
        tags.unit_coeffs = pi.coeffs;
        return ConcreteOpSpace(n, n, basis, tags);
    }
    return plain;
}

AdmissiblePair canonical_pair(const ConcreteOpSpace& e, const ConcreteOpSpace& s) {
    LinMap phi(e, e.ambient_k(), e.ambient_h(), e.vectorised_basis());
    LinMap psi(s, s.ambient_k(), s.ambient_k(), s.vectorised_basis());
    return AdmissiblePair{phi, psi};
}

// phi(x) = (x (x) I_m) W with ||W|| <= 1, psi(s) = s (x) I_m; the module
// identity psi(s a) phi(x) = psi(s) phi(a x) holds for every a in B(C^k)
AdmissiblePair sample_balanced_pair(const ConcreteOpSpace& e, const ConcreteOpSpace& s, int m,
                                    Rng& rng) {
    const int h = e.ambient_h(), k = e.ambient_k();
    const int cout = 1 + static_cast<int>(rng.uniform_below(static_cast<uint64_t>(h * m)));
    CMatrix w = rng.gaussian_matrix(h * m, cout);
    double nw = op_norm(w);
    if (nw > 1.0) w *= cplx(1.0 / nw, 0.0);
    const CMatrix im = CMatrix::identity(m);

    CMatrix phi_act(k * m * cout, e.dim());
    for (int a = 0; a < e.dim(); ++a) {
        CMatrix img = kron(e.basis_at(a), im) * w;
        for (size_t r = 0; r < img.data().size(); ++r)
            phi_act(static_cast<int>(r), a) = img.data()[r];
    }
    CMatrix psi_act(k * m * k * m, s.dim());
    for (int c = 0; c < s.dim(); ++c) {
        CMatrix img = kron(s.basis_at(c), im);
        for (size_t r = 0; r < img.data().size(); ++r)
            psi_act(static_cast<int>(r), c) = img.data()[r];
    }
    return AdmissiblePair{LinMap(e, k * m, cout, phi_act), LinMap(s, k * m, k * m, psi_act)};
}

// smallest projection P with (I (x) P) s = s (left) or s (I (x) P) = s
// (right), accepted as a move generator only when it lies in A and is proper
std::optional<CMatrix> support_projection(const ConcreteOpSpace& a_space, const LevelElement& sel,
                                          bool left) {
    const int kr = sel.level_m();
    const int ks = sel.space().ambient_k();
    const CMatrix& sc = sel.concrete();
    CMatrix m(ks, ks);
    for (int p = 0; p < kr; ++p)
        for (int q = 0; q < kr; ++q) {
            CMatrix blk = sc.block(p * ks, q * ks, ks, ks);
            m += left ? blk * blk.adjoint() : blk.adjoint() * blk;
        }
    HermEig eg = herm_eig(m);
    double top = 0;
    for (double v : eg.values) top = std::max(top, std::abs(v));
    if (top < 1e-300) return std::nullopt;
    CMatrix proj(ks, ks);
    int rank = 0;
    for (size_t r = 0; r < eg.values.size(); ++r) {
        if (eg.values[r] <= 1e-10 * top) continue;
        ++rank;
        for (int i = 0; i < ks; ++i)
            for (int j = 0; j < ks; ++j)
                proj(i, j) += eg.vectors(i, static_cast<int>(r)) *
                              std::conj(eg.vectors(j, static_cast<int>(r)));
    }
    if (rank == 0 || rank == ks) return std::nullopt;
    if (project_onto(a_space, proj).residual > 1e-9) return std::nullopt;
    return proj;
}

// rewrite block r as (b* y)* . s' . (a x) with s = b s' a; rejected unless
// the sandwich reproduces s and every new slot stays inside its space
bool apply_move(const ConcreteOpSpace& e, const ConcreteOpSpace& s,
                std::vector<TensorElement::Block>& blocks, size_t r, const CMatrix& b,
                const CMatrix& a) {
    const TensorElement::Block& blk = blocks[r];
    const int kr = blk.s.level_m();
    const int ks = s.ambient_k();
    CMatrix bl = kron(CMatrix::identity(kr), b);
    CMatrix ar = kron(CMatrix::identity(kr), a);
    const CMatrix& sc = blk.s.concrete();
    CMatrix sp = pinv(bl) * sc * pinv(ar);
    double scale = std::max(1.0, sc.max_abs());
    if (!approx_equal(bl * sp * ar, sc, 1e-9 * scale)) return false;
    for (int p = 0; p < kr; ++p)
        for (int q = 0; q < kr; ++q)
            if (project_onto(s, sp.block(p * ks, q * ks, ks, ks)).residual > 1e-9 * scale)
                return false;
    CMatrix yc = kron(CMatrix::identity(kr), b.adjoint()) * blk.y.concrete();
    CMatrix xc = ar * blk.x.concrete();
    try {
        LevelElement ny(e, kr, blk.y.level_n(), yc);
        LevelElement ns(s, kr, kr, sp);
        LevelElement nx(e, kr, blk.x.level_n(), xc);
        blocks[r] = TensorElement::Block{ny, ns, nx};
    } catch (const std::exception&) {
        return false;
    }
    return true;
}

// the proof's column resolution: with semi-unit columns x_c of the ternary
// ring E and T = mult(u), the single block (Y, X~ T X~*, Y) with
// Y[(c,l), j] = delta_{lj} x_c reproduces T exactly at unit Y-norm
std::optional<TensorElement> column_witness(const ConcreteOpSpace& e, const ConcreteOpSpace& s,
                                            int n, const std::vector<CMatrix>& xc,
                                            const CMatrix& t) {
    const int h = e.ambient_h(), k = e.ambient_k();
    const int nc = static_cast<int>(xc.size());
    const int kw = nc * n;
    CMatrix y(kw * k, n * h);
    CMatrix grid(kw * k, kw * k);
    for (int c = 0; c < nc; ++c)
        for (int l = 0; l < n; ++l) y.set_block((c * n + l) * k, l * h, xc[static_cast<size_t>(c)]);
    double scale = std::max(1.0, t.max_abs());
    for (int c = 0; c < nc; ++c)
        for (int l = 0; l < n; ++l)
            for (int c2 = 0; c2 < nc; ++c2)
                for (int l2 = 0; l2 < n; ++l2) {
                    CMatrix blk = xc[static_cast<size_t>(c)] * t.block(l * h, l2 * h, h, h) *
                                  xc[static_cast<size_t>(c2)].adjoint();
                    if (project_onto(s, blk).residual > 1e-9 * scale) return std::nullopt;
                    grid.set_block((c * n + l) * k, (c2 * n + l2) * k, blk);
                }
    try {
        LevelElement ylev(e, kw, n, y);
        LevelElement slev(s, kw, kw, grid);
        return TensorElement(e, s, n, {TensorElement::Block{ylev, slev, ylev}});
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

// semi-unit column resolution of u when E is a ternary ring whose left
// products stay inside A; preserves mult exactly, so it witnesses the class
std::optional<TensorElement> collapse_candidate(const TensorElement& u, const BalancedContext& ctx,
                                                const CMatrix& mu) {
    const ConcreteOpSpace& e = u.e();
    if (!is_tro(e).ok) return std::nullopt;
    for (int i = 0; i < e.dim(); ++i)
        for (int j = 0; j < e.dim(); ++j) {
            CMatrix p = e.basis_at(i) * e.basis_at(j).adjoint();
            if (project_onto(ctx.a, p).residual > 1e-9 * std::max(1.0, p.max_abs()))
                return std::nullopt;
        }
    std::optional<SemiUnit> su;
    try {
        su = find_semi_unit(make_tro(e));
    } catch (const std::exception&) {
        return std::nullopt;
    }
    if (!su) return std::nullopt;
    std::vector<CMatrix> xc;
    for (const auto& col : su->columns) xc.push_back(e.element(col));
    std::optional<TensorElement> w = column_witness(e, u.s(), u.n(), xc, mu);
    if (!w) return std::nullopt;
    if (!approx_equal(mult_element(*w), mu, 1e-9 * std::max(1.0, mu.max_abs())))
        return std::nullopt;
    return w;
}

// hermitian element of the system s plus a unit shift that makes it PSD
std::vector<cplx> psd_system_coeffs(const ConcreteOpSpace& s, Rng& rng) {
    std::vector<cplx> z(static_cast<size_t>(s.dim()));
    for (cplx& v : z) v = rng.cgaussian();
    CMatrix m = s.element(z);
    CMatrix hm = 0.5 * (m + m.adjoint());
    double lam = min_herm_eigenvalue(hm);
    CMatrix p = hm + cplx(std::max(0.0, -lam) + 0.25, 0.0) * s.unit();
    return project_onto(s, p).coeffs;
}

// random sum x* g x with a PSD grid g in M_k(S): Gram grid V* V when its
// blocks stay inside S, otherwise a diagonal of shifted hermitian elements
TensorElement sample_positive(const ConcreteOpSpace& e, const ConcreteOpSpace& s, int n, int kg,
                              Rng& rng) {
    std::vector<std::vector<cplx>> xcoef(static_cast<size_t>(kg) * n);
    for (auto& slot : xcoef) {
        slot.resize(static_cast<size_t>(e.dim()));
        for (cplx& v : slot) v = rng.cgaussian();
    }
    LevelElement x(e, kg, n, xcoef);

    std::vector<std::vector<cplx>> vcoef(static_cast<size_t>(kg) * kg);
    for (auto& slot : vcoef) {
        slot.resize(static_cast<size_t>(s.dim()));
        for (cplx& v : slot) v = rng.cgaussian();
    }
    LevelElement v(s, kg, kg, vcoef);
    CMatrix gg = v.concrete().adjoint() * v.concrete();
    const int ks = s.ambient_k();
    double scale = std::max(1.0, gg.max_abs());
    bool inside = true;
    for (int p = 0; p < kg && inside; ++p)
        for (int q = 0; q < kg && inside; ++q)
            inside = project_onto(s, gg.block(p * ks, q * ks, ks, ks)).residual <= 1e-9 * scale;
    if (inside) {
        LevelElement g(s, kg, kg, gg);
        return TensorElement(e, s, n, {TensorElement::Block{x, g, x}});
    }
    std::vector<std::vector<cplx>> gcoef(static_cast<size_t>(kg) * kg,
                                         std::vector<cplx>(static_cast<size_t>(s.dim())));
    for (int p = 0; p < kg; ++p) gcoef[static_cast<size_t>(p) * kg + p] = psd_system_coeffs(s, rng);
    LevelElement g(s, kg, kg, gcoef);
    return TensorElement(e, s, n, {TensorElement::Block{x, g, x}});
}

bool scalar_identity_algebra(const ConcreteOpSpace& a) {
    if (a.dim() != 1) return false;
    const CMatrix& b = a.basis_at(0);
    cplx lead = b(0, 0);
    if (std::abs(lead) < 1e-12) return false;
    return approx_equal(b, lead * CMatrix::identity(a.ambient_k()), 1e-10 * std::abs(lead));
}

}  // namespace

TroCheck is_tro(const ConcreteOpSpace& m, double tol) {
    TroCheck out;
    out.ok = true;
    const int d = m.dim();
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k) {
                CMatrix p = m.basis_at(i) * m.basis_at(j).adjoint() * m.basis_at(k);
                Projection pr = project_onto(m, p);
                if (pr.residual > tol * std::max(1.0, p.max_abs())) {
                    out.ok = false;
                    out.i = i;
                    out.j = j;
                    out.k = k;
                    out.residual = pr.residual;
                    return out;
                }
                out.residual = std::max(out.residual, pr.residual);
            }
    return out;
}

ConcreteOpSpace product_span(const std::vector<CMatrix>& left, const std::vector<CMatrix>& right) {
    if (left.empty() || right.empty()) throw InvalidSpace("product span of empty families");
    std::vector<CMatrix> prods;
    for (const CMatrix& l : left)
        for (const CMatrix& r : right) {
            if (l.cols() != r.rows()) throw InvalidSpace("product span: shape mismatch");
            prods.push_back(l * r);
        }
    const int k = prods.front().rows(), h = prods.front().cols();
    std::vector<CMatrix> basis = span_basis(h, k, prods);
    if (basis.empty()) throw InvalidSpace("products span only zero");
    return ConcreteOpSpace(h, k, basis, {});
}

TroSpace make_tro(const ConcreteOpSpace& m) {
    TroCheck c = is_tro(m);
    if (!c.ok)
        throw InvalidSpace("not a ternary ring: triple (" + std::to_string(c.i) + "," +
                           std::to_string(c.j) + "," + std::to_string(c.k) +
                           ") leaves the span, residual " + std::to_string(c.residual));
    std::vector<CMatrix> mm, m2;
    for (int i = 0; i < m.dim(); ++i)
        for (int j = 0; j < m.dim(); ++j) {
            mm.push_back(m.basis_at(i) * m.basis_at(j).adjoint());
            m2.push_back(m.basis_at(i).adjoint() * m.basis_at(j));
        }
    SpaceTags tags = m.tags();
    tags.is_tro = true;
    ConcreteOpSpace tagged(m.ambient_h(), m.ambient_k(), m.basis(), tags);
    return TroSpace{tagged, algebra_space(m.ambient_k(), mm), algebra_space(m.ambient_h(), m2)};
}

BalancedContext make_balanced_context(const ConcreteOpSpace& a, const ConcreteOpSpace& e,
                                      const ConcreteOpSpace& s) {
    if (a.ambient_h() != a.ambient_k()) throw InvalidContext("A must act on a square ambient");
    const int k = a.ambient_k();
    if (e.ambient_k() != k) throw InvalidContext("left action needs matching ambients");
    if (s.ambient_h() != s.ambient_k() || s.ambient_k() != k)
        throw InvalidContext("S must live on the ambient of A");
    if (!s.tags().is_system) throw InvalidContext("S must be an operator system");

    BalancedContext ctx{a, e, s, {}};
    BalancedContext::Report& rep = ctx.report;
    rep.unit_residual = project_onto(a, CMatrix::identity(k)).residual;

    auto rel = [](const Projection& p, const CMatrix& m) {
        return p.residual / std::max(1.0, m.max_abs());
    };
    for (int i = 0; i < a.dim(); ++i) {
        CMatrix adj = a.basis_at(i).adjoint();
        rep.algebra_residual = std::max(rep.algebra_residual, rel(project_onto(a, adj), adj));
        for (int j = 0; j < a.dim(); ++j) {
            CMatrix p = a.basis_at(i) * a.basis_at(j);
            rep.algebra_residual = std::max(rep.algebra_residual, rel(project_onto(a, p), p));
        }
    }
    for (int i = 0; i < a.dim(); ++i)
        for (int j = 0; j < e.dim(); ++j) {
            CMatrix p = a.basis_at(i) * e.basis_at(j);
            rep.ae_residual = std::max(rep.ae_residual, rel(project_onto(e, p), p));
        }
    std::vector<CMatrix> dict = a.basis();
    dict.push_back(CMatrix::identity(k));
    for (const CMatrix& b : dict)
        for (const CMatrix& a2 : dict)
            for (int c = 0; c < s.dim(); ++c) {
                CMatrix p = b * s.basis_at(c) * a2;
                rep.asa_residual = std::max(rep.asa_residual, rel(project_onto(s, p), p));
            }
    rep.ok = rep.unit_residual <= 1e-9 && rep.algebra_residual <= 1e-9 &&
             rep.ae_residual <= 1e-9 && rep.asa_residual <= 1e-9;
    if (!rep.ok)
        throw InvalidContext(
            "module action validation failed: unit " + std::to_string(rep.unit_residual) +
            ", algebra " + std::to_string(rep.algebra_residual) + ", A.E " +
            std::to_string(rep.ae_residual) + ", A.S.A " + std::to_string(rep.asa_residual));
    return ctx;
}

CMatrix mult_element(const TensorElement& u) {
    const ConcreteOpSpace& e = u.e();
    const ConcreteOpSpace& s = u.s();
    const int n = u.n(), de = e.dim(), ds = s.dim(), h = e.ambient_h();
    CMatrix out(n * h, n * h);
    for (int a = 0; a < de; ++a)
        for (int c = 0; c < ds; ++c)
            for (int b = 0; b < de; ++b) {
                bool any = false;
                for (int i = 0; i < n && !any; ++i)
                    for (int j = 0; j < n && !any; ++j) any = std::abs(u.coeff(i, j, a, c, b)) > 0;
                if (!any) continue;
                CMatrix p = e.basis_at(a).adjoint() * s.basis_at(c) * e.basis_at(b);
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j) {
                        cplx w = u.coeff(i, j, a, c, b);
                        if (std::abs(w) == 0.0) continue;
                        for (int r = 0; r < h; ++r)
                            for (int cc = 0; cc < h; ++cc)
                                out(i * h + r, j * h + cc) += w * p(r, cc);
                    }
            }
    return out;
}

double admissibility_residual(const AdmissiblePair& pair, const BalancedContext& ctx) {
    double worst = 0;
    std::vector<cplx> ee(static_cast<size_t>(ctx.e.dim()));
    for (int ai = 0; ai < ctx.a.dim(); ++ai) {
        const CMatrix& a = ctx.a.basis_at(ai);
        for (int ci = 0; ci < ctx.s.dim(); ++ci) {
            CMatrix sa = ctx.s.basis_at(ci) * a;
            Projection ps = project_onto(ctx.s, sa);
            CMatrix psi_sa = pair.psi.apply_coeffs(ps.coeffs);
            CMatrix psi_s = pair.psi.apply_coeffs([&] {
                std::vector<cplx> c(static_cast<size_t>(ctx.s.dim()));
                c[static_cast<size_t>(ci)] = 1.0;
                return c;
            }());
            for (int xi = 0; xi < ctx.e.dim(); ++xi) {
                CMatrix ax = a * ctx.e.basis_at(xi);
                Projection pe = project_onto(ctx.e, ax);
                std::fill(ee.begin(), ee.end(), cplx(0, 0));
                ee[static_cast<size_t>(xi)] = 1.0;
                CMatrix left = psi_sa * pair.phi.apply_coeffs(ee);
                CMatrix right = psi_s * pair.phi.apply_coeffs(pe.coeffs);
                worst = std::max(worst, (left - right).max_abs());
            }
        }
    }
    return worst;
}

BalancedResult balanced_seminorm(const TensorElement& u, const BalancedContext& ctx,
                                 const BalancedConfig& cfg) {
    if (!approx_equal(u.e().vectorised_basis(), ctx.e.vectorised_basis(), 1e-9) ||
        !approx_equal(u.s().vectorised_basis(), ctx.s.vectorised_basis(), 1e-9))
        throw InvalidContext("tensor element spaces do not match the context");
    const ConcreteOpSpace& e = u.e();
    const ConcreteOpSpace& s = u.s();
    const int64_t start = now_ms();
    auto out_of_budget = [&] { return cfg.budget_ms >= 0 && now_ms() - start > cfg.budget_ms; };

    BalancedResult out;
    CMatrix mu = mult_element(u);
    out.canonical_value = op_norm(eval_pair(canonical_pair(e, s), u));
    double lower = out.canonical_value;

    Rng rng(cfg.seed);
    for (int r = 0; r < cfg.restarts && !out_of_budget(); ++r) {
        int m = 1 + static_cast<int>(rng.uniform_below(
                        static_cast<uint64_t>(std::max(1, cfg.multiplicity))));
        AdmissiblePair pair = sample_balanced_pair(e, s, m, rng);
        lower = std::max(lower, op_norm(eval_pair(pair, u)));
    }

    HaagerupWitness best = haagerup_upper(u, cfg.improve_iters, cfg.seed);
    std::vector<TensorElement::Block> cur = u.blocks();
    std::vector<CMatrix> dict = ctx.a.basis();
    const CMatrix idk = CMatrix::identity(ctx.a.ambient_k());
    dict.push_back(idk);
    const size_t id_index = dict.size() - 1;

    for (int depth = 0; depth < cfg.rewrite_depth && !out_of_budget(); ++depth) {
        bool improved = false;
        HaagerupWitness cand_best = best;
        std::vector<TensorElement::Block> cand_blocks;
        for (size_t r = 0; r < cur.size() && !out_of_budget(); ++r) {
            std::vector<std::pair<CMatrix, CMatrix>> moves;
            for (size_t bi = 0; bi < dict.size(); ++bi)
                for (size_t ai = 0; ai < dict.size(); ++ai) {
                    if (bi == id_index && ai == id_index) continue;
                    moves.emplace_back(dict[bi], dict[ai]);
                }
            std::optional<CMatrix> pl = support_projection(ctx.a, cur[r].s, true);
            std::optional<CMatrix> prr = support_projection(ctx.a, cur[r].s, false);
            if (pl) moves.emplace_back(*pl, idk);
            if (prr) moves.emplace_back(idk, *prr);
            if (pl && prr) moves.emplace_back(*pl, *prr);
            for (const auto& mv : moves) {
                if (out_of_budget()) break;
                std::vector<TensorElement::Block> trial = cur;
                if (!apply_move(e, s, trial, r, mv.first, mv.second)) continue;
                TensorElement t(e, s, u.n(), trial);
                HaagerupWitness hw = haagerup_upper(t, cfg.improve_iters, cfg.seed);
                if (hw.value < cand_best.value - 1e-12) {
                    cand_best = hw;
                    cand_blocks = std::move(trial);
                    improved = true;
                }
            }
        }
        if (!improved) break;
        best = cand_best;
        cur = std::move(cand_blocks);
        ++out.rewrites_applied;
    }

    if (std::optional<TensorElement> w = collapse_candidate(u, ctx, mu)) {
        HaagerupWitness hw = haagerup_upper(*w, cfg.improve_iters, cfg.seed);
        if (hw.value < best.value) {
            best = hw;
            ++out.rewrites_applied;
        }
    }

    // A = C I is the plain symmetrised norm; fold in its sharper machinery
    if (scalar_identity_algebra(ctx.a)) {
        SymConfig sc;
        sc.seed = cfg.seed;
        sc.budget_ms = cfg.budget_ms;
        SymNormResult sn = sym_norm(u, sc);
        lower = std::max(lower, sn.lower);
        if (sn.haagerup.value < best.value) best = sn.haagerup;
    }

    out.upper_witness = best;
    out.interval = NormInterval{lower, std::max(best.value, lower), true};
    return out;
}

CollapseReport tro_collapse_check(const TroSpace& tro, const ConcreteOpSpace& s, int samples,
                                  uint64_t seed) {
    BalancedContext ctx = [&] {
        try {
            return make_balanced_context(tro.left_algebra, tro.m, s);
        } catch (const InvalidContext& ex) {
            throw ModuleConditionFailed(ex.what());
        }
    }();
    std::optional<SemiUnit> su = find_semi_unit(tro);
    if (!su)
        throw ModuleConditionFailed("span(M* M) is not unital: no column witness available");
    const ConcreteOpSpace& e = tro.m;
    std::vector<CMatrix> xc;
    for (const auto& col : su->columns) xc.push_back(e.element(col));

    // shifted hermitian targets need I in [M* S M] and A inside S
    std::vector<CMatrix> prods;
    for (int a = 0; a < e.dim(); ++a)
        for (int c = 0; c < s.dim(); ++c)
            for (int b = 0; b < e.dim(); ++b)
                prods.push_back(e.basis_at(a).adjoint() * s.basis_at(c) * e.basis_at(b));
    const int h = e.ambient_h();
    std::vector<CMatrix> pbasis = span_basis(h, h, prods);
    bool shift_targets = !pbasis.empty();
    if (shift_targets) {
        ConcreteOpSpace pspace(h, h, pbasis, {});
        shift_targets = project_onto(pspace, CMatrix::identity(h)).residual <= 1e-9;
    }
    for (int i = 0; i < ctx.a.dim() && shift_targets; ++i)
        shift_targets = project_onto(s, ctx.a.basis_at(i)).residual <= 1e-9;
    std::optional<ConcreteOpSpace> pspace;
    if (shift_targets) pspace.emplace(h, h, pbasis, SpaceTags{});

    CollapseReport rep;
    rep.samples = samples;
    AdmissiblePair canon = canonical_pair(e, s);
    Rng root(seed);
    for (int it = 0; it < samples; ++it) {
        Rng rng = root.child(static_cast<uint64_t>(it));
        const int n = 1 + (it % 2);
        const int kr = 1 + static_cast<int>(rng.uniform_below(2));
        const int nblocks = 1 + static_cast<int>(rng.uniform_below(2));

        std::vector<TensorElement::Block> blocks;
        for (int r = 0; r < nblocks; ++r) {
            auto grid = [&](int rows, int cols, const ConcreteOpSpace& sp) {
                std::vector<std::vector<cplx>> g(static_cast<size_t>(rows) * cols);
                for (auto& slot : g) {
                    slot.resize(static_cast<size_t>(sp.dim()));
                    for (cplx& v : slot) v = rng.cgaussian();
                }
                return g;
            };
            blocks.push_back(TensorElement::Block{LevelElement(e, kr, n, grid(kr, n, e)),
                                                  LevelElement(s, kr, kr, grid(kr, kr, s)),
                                                  LevelElement(e, kr, n, grid(kr, n, e))});
        }
        TensorElement u(e, s, n, blocks);
        CMatrix mu = mult_element(u);
        double mn = op_norm(mu);

        rep.max_canonical_gap =
            std::max(rep.max_canonical_gap, std::abs(op_norm(eval_pair(canon, u)) - mn));
        const int m = 1 + static_cast<int>(rng.uniform_below(2));
        AdmissiblePair pair = sample_balanced_pair(e, s, m, rng);
        rep.max_pair_excess = std::max(rep.max_pair_excess, op_norm(eval_pair(pair, u)) - mn);

        // positivity forward: mult of a synthesised positive is PSD
        TensorElement up = sample_positive(e, s, n, kr, rng);
        CMatrix mp = mult_element(up);
        CMatrix mph = 0.5 * (mp + mp.adjoint());
        double mineig = min_herm_eigenvalue(mph);
        rep.max_positive_violation = std::max(
            rep.max_positive_violation, std::max(0.0, -mineig) / std::max(1.0, op_norm(mph)));

        // positivity backward: PSD targets lift along the column witness
        std::vector<CMatrix> targets{mph};
        if (pspace && it % 2 == 1) {
            std::vector<std::vector<cplx>> g(static_cast<size_t>(n) * n);
            for (auto& slot : g) {
                slot.resize(pbasis.size());
                for (cplx& v : slot) v = rng.cgaussian();
            }
            LevelElement hl(*pspace, n, n, g);
            CMatrix hm = 0.5 * (hl.concrete() + hl.concrete().adjoint());
            CMatrix t = hm;
            double shift = op_norm(hm) + 0.25;
            for (int i = 0; i < n * h; ++i) t(i, i) += shift;
            targets.push_back(t);
        }
        for (const CMatrix& t : targets) {
            double tscale = std::max(1.0, t.max_abs());
            std::optional<TensorElement> w = column_witness(e, s, n, xc, t);
            if (!w) {
                rep.max_synthesis_residual = std::max(rep.max_synthesis_residual, 1.0);
                continue;
            }
            double gap = (mult_element(*w) - t).max_abs() / tscale;
            const CMatrix& grid = w->blocks().front().s.concrete();
            double geig = min_herm_eigenvalue(0.5 * (grid + grid.adjoint()));
            double defect = std::max(0.0, -geig) / tscale;
            rep.max_synthesis_residual = std::max(rep.max_synthesis_residual, std::max(gap, defect));
        }
    }
    rep.ok = rep.max_pair_excess <= 1e-9 && rep.max_canonical_gap <= 1e-9 &&
             rep.max_positive_violation <= 1e-9 && rep.max_synthesis_residual <= 1e-7;
    return rep;
}

std::optional<SemiUnit> find_semi_unit(const TroSpace& tro, double tol) {
    const ConcreteOpSpace& m = tro.m;
    const int h = m.ambient_h();
    if (project_onto(tro.right_algebra, CMatrix::identity(h)).residual > 1e-8)
        return std::nullopt;
    CMatrix g(h, h);
    for (int i = 0; i < m.dim(); ++i) g += m.basis_at(i).adjoint() * m.basis_at(i);
    HermEig eg = herm_eig(g);
    double top = eg.values.back();
    if (top < 1e-300 || eg.values.front() < 1e-10 * top) return std::nullopt;
    CMatrix corr = psd_pinv_sqrt(g);

    SemiUnit out;
    CMatrix total(h, h);
    for (int i = 0; i < m.dim(); ++i) {
        CMatrix col = m.basis_at(i) * corr;
        Projection p = project_onto(m, col);
        out.residual = std::max(out.residual, p.residual / std::max(1.0, col.max_abs()));
        out.columns.push_back(p.coeffs);
        total += col.adjoint() * col;
    }
    out.residual = std::max(out.residual, (total - CMatrix::identity(h)).max_abs());
    if (out.residual > tol) return std::nullopt;
    return out;
}

BalancedDemo balanced_demo(const BalancedConfig& cfg) {
    // two diagonal 2x2 blocks inside B(C^4)
    std::vector<CMatrix> eb;
    for (int blk = 0; blk < 2; ++blk)
        for (int p = 0; p < 2; ++p)
            for (int q = 0; q < 2; ++q) {
                CMatrix b(4, 4);
                b(blk * 2 + p, blk * 2 + q) = 1.0;
                eb.push_back(b);
            }
    SpaceTags etags;
    etags.is_tro = true;
    ConcreteOpSpace e(4, 4, eb, etags);
    SpaceTags stags;
    stags.is_system = true;
    stags.is_subalgebra = true;
    stags.unit_coeffs = {1, 0, 0, 1, 1, 0, 0, 1};
    ConcreteOpSpace a(4, 4, eb, stags);
    BalancedContext ctx = make_balanced_context(a, e, a);

    std::vector<cplx> yc(8), sc(8), xcv(8);
    yc[7] = 1.0;  // 0 (+) E22
    sc[0] = 1.0;  // E11 (+) 0
    xcv[0] = 1.0;
    TensorElement u = TensorElement::elementary(e, a, yc, sc, xcv);

    // disjoint rank-one functionals: f matches x, g matches y, and the
    // vector state at the first coordinate keeps psi(s) = 1
    CMatrix phi_act(1, 8), psi_act(1, 8);
    phi_act(0, 0) = 0.5;
    phi_act(0, 7) = 0.5;
    psi_act(0, 0) = 1.0;
    AdmissiblePair pair{LinMap(e, 1, 1, phi_act), LinMap(a, 1, 1, psi_act)};

    BalancedResult res = balanced_seminorm(u, ctx, cfg);
    double lower = op_norm(eval_pair(pair, u));
    return BalancedDemo{ctx, u, res, pair, lower};
}

}  // namespace symcore
