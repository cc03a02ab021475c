// SPDX-License-Identifier: MIT
#include "symcore/dualops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace symcore {

namespace {

std::vector<cplx> unit_coeff(int dim, int at) {
    std::vector<cplx> c(static_cast<size_t>(dim), cplx(0.0, 0.0));
    c[static_cast<size_t>(at)] = cplx(1.0, 0.0);
    return c;
}

// middle space must be a scalar multiple of the identity; returns the scalar
cplx middle_scalar(const ConcreteOpSpace& s, const char* who) {
    if (s.dim() != 1 || s.ambient_h() != s.ambient_k())
        throw ShapeMismatch(std::string(who) + ": middle space must be span of the identity");
    const CMatrix& s0 = s.basis_at(0);
    const cplx mu = s0(0, 0);
    CMatrix scaled = CMatrix::identity(s.ambient_k());
    scaled *= mu;
    if (!approx_equal(s0, scaled, 1e-9 * std::max(1.0, std::abs(mu))))
        throw ShapeMismatch(std::string(who) + ": middle basis is not a scalar identity");
    return mu;
}

void require_same_space(const ConcreteOpSpace& a, const ConcreteOpSpace& b, const char* who) {
    if (a.dim() != b.dim() || a.ambient_h() != b.ambient_h() || a.ambient_k() != b.ambient_k() ||
        !approx_equal(a.vectorised_basis(), b.vectorised_basis(), 1e-9))
        throw ShapeMismatch(std::string(who) + ": spaces do not match basis-wise");
}

}  // namespace

DualSpace dual_space(const ConcreteOpSpace& e) {
    const int d = e.dim();
    const int h = e.ambient_h();
    const int k = e.ambient_k();
    const CMatrix& b = e.vectorised_basis();
    CMatrix gram = b.adjoint() * b;
    CMatrix vecf = b * pinv(gram);
    DualSpace out{e, {}, CMatrix(d, d), 0.0};
    out.dual_basis.reserve(static_cast<size_t>(d));
    for (int a = 0; a < d; ++a) {
        CMatrix f(k, h);
        for (int r = 0; r < k; ++r)
            for (int c = 0; c < h; ++c) f(r, c) = vecf(r * h + c, a);
        out.dual_basis.push_back(f);
    }
    for (int a = 0; a < d; ++a)
        for (int p = 0; p < d; ++p) {
            cplx acc(0.0, 0.0);
            for (int i = 0; i < k * h; ++i) acc += std::conj(vecf(i, a)) * b(i, p);
            out.pairing(a, p) = acc;
            const double target = a == p ? 1.0 : 0.0;
            out.pairing_residual = std::max(out.pairing_residual, std::abs(acc - target));
        }
    if (out.pairing_residual > 1e-12)
        throw InvalidSpace("dual_space: pairing residual " + std::to_string(out.pairing_residual) +
                           " exceeds 1e-12; basis too close to dependent");
    return out;
}

LinMap dual_functional(const DualSpace& d, int a) {
    const int dim = d.base.dim();
    if (a < 0 || a >= dim) throw ShapeMismatch("dual_functional: index out of range");
    CMatrix act(1, dim);
    for (int p = 0; p < dim; ++p) act(0, p) = d.pairing(a, p);
    return LinMap(d.base, 1, 1, act);
}

LinMap dual_level_map(const DualSpace& d, int n, const std::vector<std::vector<cplx>>& slots) {
    const int dim = d.base.dim();
    if (n < 1 || slots.size() != static_cast<size_t>(n) * static_cast<size_t>(n))
        throw ShapeMismatch("dual_level_map: need n*n slot rows");
    for (const auto& row : slots)
        if (row.size() != static_cast<size_t>(dim))
            throw ShapeMismatch("dual_level_map: slot row length must equal dim(E)");
    CMatrix act(n * n, dim);
    for (int s = 0; s < n * n; ++s)
        for (int bidx = 0; bidx < dim; ++bidx)
            act(s, bidx) = slots[static_cast<size_t>(s)][static_cast<size_t>(bidx)];
    return LinMap(d.base, n, n, act);
}

NormInterval dual_norm(const LinMap& f_phi, const CbConfig& cfg) { return cb_norm(f_phi, cfg); }

LinMap dstar_identify(const ConcreteOpSpace& estar, const LinMap& f_phi) {
    const ConcreteOpSpace& e = f_phi.domain();
    if (estar.dim() != e.dim() || estar.ambient_h() != e.ambient_k() ||
        estar.ambient_k() != e.ambient_h())
        throw ShapeMismatch("dstar_identify: estar shape is not adjoint to the domain");
    for (int a = 0; a < e.dim(); ++a)
        if (!approx_equal(estar.basis_at(a), e.basis_at(a).adjoint(), 1e-12))
            throw ShapeMismatch("dstar_identify: estar basis is not the basis-wise adjoint");
    const int r = f_phi.r_out();
    const int c = f_phi.c_out();
    CMatrix act(c * r, e.dim());
    for (int a = 0; a < e.dim(); ++a) {
        CMatrix adj = f_phi.apply_coeffs(unit_coeff(e.dim(), a)).adjoint();
        for (int i = 0; i < c; ++i)
            for (int j = 0; j < r; ++j) act(i * r + j, a) = adj(i, j);
    }
    return LinMap(estar, c, r, act);
}

ConcreteOpSpace scalar_middle(int k) {
    SpaceTags tags;
    tags.is_system = true;
    tags.is_subalgebra = true;
    tags.is_tro = true;
    tags.unit_coeffs = {cplx(1.0, 0.0)};
    return ConcreteOpSpace(k, k, {CMatrix::identity(k)}, tags);
}

CMatrix iota_pair(const LinMap& psi, const LinMap& phi, const TensorElement& u) {
    require_same_space(psi.domain(), u.e(), "iota_pair(psi)");
    require_same_space(phi.domain(), u.e(), "iota_pair(phi)");
    if (psi.r_out() != psi.c_out() || phi.r_out() != phi.c_out() || psi.r_out() != phi.r_out())
        throw ShapeMismatch("iota_pair: dual levels must be square and equal");
    const cplx mu = middle_scalar(u.s(), "iota_pair");
    const int de = u.e().dim();
    const int k = psi.r_out();
    const int n = u.n();
    std::vector<CMatrix> left, right;
    left.reserve(static_cast<size_t>(de));
    right.reserve(static_cast<size_t>(de));
    for (int a = 0; a < de; ++a) {
        left.push_back(psi.apply_coeffs(unit_coeff(de, a)).adjoint());
        right.push_back(phi.apply_coeffs(unit_coeff(de, a)));
    }
    CMatrix out(n * k, n * k);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            CMatrix v(k, k);
            for (int a = 0; a < de; ++a)
                for (int b = 0; b < de; ++b) {
                    const cplx w = u.coeff(i, j, a, 0, b) * mu;
                    if (std::abs(w) < 1e-300) continue;
                    CMatrix term = left[static_cast<size_t>(a)] * right[static_cast<size_t>(b)];
                    term *= w;
                    v += term;
                }
            out.set_block(i * k, j * k, v);
        }
    return out;
}

CMatrix iota_pairing_matrix(const DualSpace& d) {
    const ConcreteOpSpace& e = d.base;
    const int de = e.dim();
    ConcreteOpSpace s = scalar_middle(e.ambient_k());
    std::vector<LinMap> fun;
    fun.reserve(static_cast<size_t>(de));
    for (int a = 0; a < de; ++a) fun.push_back(dual_functional(d, a));
    CMatrix q(de * de, de * de);
    for (int p = 0; p < de; ++p)
        for (int r = 0; r < de; ++r) {
            TensorElement u = TensorElement::elementary(e, s, unit_coeff(de, p),
                                                        {cplx(1.0, 0.0)}, unit_coeff(de, r));
            for (int a = 0; a < de; ++a)
                for (int bb = 0; bb < de; ++bb)
                    q(a * de + bb, p * de + r) =
                        iota_pair(fun[static_cast<size_t>(a)], fun[static_cast<size_t>(bb)], u)(0, 0);
        }
    return q;
}

DualPositivityReport dual_positivity_check(const DualSpace& d, int samples, std::uint64_t seed) {
    const ConcreteOpSpace& e = d.base;
    const int de = e.dim();
    ConcreteOpSpace s = scalar_middle(e.ambient_k());
    Rng rng(seed);
    DualPositivityReport rep;
    double worst = 0.0;
    for (int it = 0; it < samples; ++it) {
        const int k = 1 + it % 2;
        const int n = 1 + (it / 2) % 2;
        const int kg = 1 + static_cast<int>(rng.uniform_below(2));
        LinMap phi(e, k, k, rng.gaussian_matrix(k * k, de));
        std::vector<std::vector<cplx>> xg(static_cast<size_t>(kg) * static_cast<size_t>(n));
        for (auto& slot : xg) {
            slot.resize(static_cast<size_t>(de));
            for (auto& z : slot) z = rng.cgaussian();
        }
        CMatrix v = rng.gaussian_matrix(kg, kg);
        CMatrix g = v.adjoint() * v;
        std::vector<std::vector<cplx>> sg(static_cast<size_t>(kg) * static_cast<size_t>(kg));
        for (int p = 0; p < kg; ++p)
            for (int q = 0; q < kg; ++q) sg[static_cast<size_t>(p) * kg + q] = {g(p, q)};
        LevelElement x(e, kg, n, xg);
        LevelElement mid(s, kg, kg, sg);
        TensorElement u(e, s, n, {TensorElement::Block{x, mid, x}});
        CMatrix val = iota_pair(phi, phi, u);
        CMatrix herm = val + val.adjoint();
        herm *= cplx(0.5, 0.0);
        const double lam = min_herm_eigenvalue(herm);
        const double scale = std::max(1.0, op_norm(herm));
        worst = std::min(worst, lam / scale);
        ++rep.samples;
    }
    rep.min_eigenvalue = worst;
    rep.ok = worst >= -1e-9;
    return rep;
}

CMatrix iota_eval(const DualSpace& d, const TensorElement& u, const TensorElement& v) {
    const int de = d.base.dim();
    if (u.e().dim() != de)
        throw ShapeMismatch("iota_eval: dual realisation dimension must equal dim(E)");
    require_same_space(v.e(), d.base, "iota_eval(probe)");
    const cplx muu = middle_scalar(u.s(), "iota_eval(u)");
    const cplx muv = middle_scalar(v.s(), "iota_eval(v)");
    const int nu = u.n();
    const int nv = v.n();
    const CMatrix& pr = d.pairing;
    CMatrix out(nu * nv, nu * nv);
    for (int i = 0; i < nu; ++i)
        for (int j = 0; j < nu; ++j)
            for (int bi = 0; bi < nv; ++bi)
                for (int bj = 0; bj < nv; ++bj) {
                    cplx acc(0.0, 0.0);
                    for (int a = 0; a < de; ++a)
                        for (int b = 0; b < de; ++b) {
                            const cplx cu = u.coeff(i, j, a, 0, b);
                            if (std::abs(cu) < 1e-300) continue;
                            for (int p = 0; p < de; ++p)
                                for (int q = 0; q < de; ++q) {
                                    const cplx cv = v.coeff(bi, bj, p, 0, q);
                                    if (std::abs(cv) < 1e-300) continue;
                                    acc += cu * cv * std::conj(pr(a, p)) * pr(b, q);
                                }
                        }
                    out(i * nv + bi, j * nv + bj) = acc * muu * muv;
                }
    return out;
}

IotaGapReport iota_isometry_gap(const ConcreteOpSpace& e, const ConcreteOpSpace& edual_realised,
                                int samples, std::uint64_t seed) {
    if (edual_realised.dim() != e.dim())
        throw ShapeMismatch("iota_isometry_gap: realisation dimension must equal dim(E)");
    DualSpace d = dual_space(e);
    const int de = e.dim();
    ConcreteOpSpace su = scalar_middle(edual_realised.ambient_k());
    ConcreteOpSpace sv = scalar_middle(e.ambient_k());
    Rng rng(seed);
    SymConfig cheap;
    cheap.restarts = 8;
    cheap.max_trunc = 2;
    cheap.seed = rng.next_u64();

    std::vector<TensorElement> probes;
    std::vector<double> probe_upper;
    for (int p = 0; p < de; ++p)
        for (int q = 0; q < de; ++q)
            probes.push_back(TensorElement::elementary(e, sv, unit_coeff(de, p),
                                                       {cplx(1.0, 0.0)}, unit_coeff(de, q)));
    for (int t = 0; t < 4; ++t) {
        std::vector<cplx> yc(static_cast<size_t>(de)), xc(static_cast<size_t>(de));
        for (auto& z : yc) z = rng.cgaussian();
        for (auto& z : xc) z = rng.cgaussian();
        probes.push_back(TensorElement::elementary(e, sv, yc, {cplx(1.0, 0.0)}, xc));
    }
    probe_upper.reserve(probes.size());
    for (const TensorElement& v : probes) probe_upper.push_back(sym_norm(v, cheap).upper);

    IotaGapReport best;
    const int total = std::max(1, samples);
    auto consider = [&](const TensorElement& u) {
        SymNormResult sn = sym_norm(u, cheap);
        double est = 0.0;
        for (size_t i = 0; i < probes.size(); ++i) {
            const double denom = std::max(probe_upper[i], 1e-12);
            est = std::max(est, op_norm(iota_eval(d, u, probes[i])) / denom);
        }
        const double gap = sn.lower - est;
        ++best.samples;
        if (best.samples == 1 || gap > best.gap) {
            best.gap = gap;
            best.u_sym_lower = sn.lower;
            best.image_estimate = est;
        }
    };
    consider(TensorElement::elementary(edual_realised, su, unit_coeff(de, 0), {cplx(1.0, 0.0)},
                                       unit_coeff(de, 0)));
    for (int t = 1; t < total; ++t) {
        std::vector<cplx> yc(static_cast<size_t>(de)), xc(static_cast<size_t>(de));
        for (auto& z : yc) z = rng.cgaussian();
        for (auto& z : xc) z = rng.cgaussian();
        consider(TensorElement::elementary(edual_realised, su, yc, {cplx(1.0, 0.0)}, xc));
    }
    return best;
}

}  // namespace symcore
