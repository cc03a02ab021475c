// SPDX-License-Identifier: MIT

#include "symcore/trilinear.hpp"

#include <cmath>
#include <optional>

namespace symcore {

namespace {

constexpr cplx kImag{0, 1};

cplx ipow(int m) {
    switch (((m % 4) + 4) % 4) {
        case 0: return {1, 0};
        case 1: return {0, 1};
        case 2: return {-1, 0};
        default: return {0, -1};
    }
}

// Coefficients of c_j* against the basis of an adjoint-closed space.
std::vector<std::vector<cplx>> star_table(const ConcreteOpSpace& s) {
    std::vector<std::vector<cplx>> t(static_cast<size_t>(s.dim()));
    for (int j = 0; j < s.dim(); ++j) {
        Projection p = project_onto(s, s.basis_at(j).adjoint());
        if (p.residual > 1e-8 * std::max(1.0, s.basis_at(j).frobenius_norm()))
            throw InvalidSpace("space is not adjoint-closed");
        t[static_cast<size_t>(j)] = std::move(p.coeffs);
    }
    return t;
}

}  // namespace

TrilinearForm::TrilinearForm(ConcreteOpSpace e, ConcreteOpSpace s, int r,
                             std::vector<CMatrix> tensor)
    : e_(std::move(e)), s_(std::move(s)), r_(r), tensor_(std::move(tensor)) {
    if (tensor_.size() != static_cast<size_t>(e_.dim()) * s_.dim() * e_.dim())
        throw ShapeMismatch("TrilinearForm: tensor slot count mismatch");
    for (const CMatrix& m : tensor_)
        if (m.rows() != r_ || m.cols() != r_)
            throw ShapeMismatch("TrilinearForm: tensor entry is not r x r");
}

CMatrix TrilinearForm::eval(const std::vector<cplx>& y, const std::vector<cplx>& s,
                            const std::vector<cplx>& x) const {
    const int d = e_.dim(), ds = s_.dim();
    if (static_cast<int>(y.size()) != d || static_cast<int>(x.size()) != d ||
        static_cast<int>(s.size()) != ds)
        throw ShapeMismatch("TrilinearForm::eval: coefficient sizes");
    CMatrix out(r_, r_);
    for (int i = 0; i < d; ++i) {
        cplx yi = std::conj(y[static_cast<size_t>(i)]);
        if (yi == cplx{}) continue;
        for (int j = 0; j < ds; ++j) {
            cplx w = yi * s[static_cast<size_t>(j)];
            if (w == cplx{}) continue;
            for (int l = 0; l < d; ++l) {
                cplx wl = w * x[static_cast<size_t>(l)];
                if (wl == cplx{}) continue;
                const CMatrix& t = at(i, j, l);
                for (size_t p = 0; p < out.data().size(); ++p) out.data()[p] += wl * t.data()[p];
            }
        }
    }
    return out;
}

TrilinearForm TrilinearForm::multiplication(const ConcreteOpSpace& e, const ConcreteOpSpace& s) {
    if (s.ambient_h() != s.ambient_k() || s.ambient_k() != e.ambient_k())
        throw ShapeMismatch("multiplication form: S must act on the row space of E");
    const int r = e.ambient_h();
    std::vector<CMatrix> tensor;
    tensor.reserve(static_cast<size_t>(e.dim()) * s.dim() * e.dim());
    for (int i = 0; i < e.dim(); ++i)
        for (int j = 0; j < s.dim(); ++j)
            for (int l = 0; l < e.dim(); ++l)
                tensor.push_back(e.basis_at(i).adjoint() * s.basis_at(j) * e.basis_at(l));
    return {e, s, r, std::move(tensor)};
}

TrilinearForm TrilinearForm::from_pair(const LinMap& left, const LinMap& mid,
                                       const LinMap& right) {
    if (left.c_out() != right.c_out() || left.r_out() != right.r_out())
        throw ShapeMismatch("from_pair: left/right codomains differ");
    if (mid.r_out() != mid.c_out() || mid.r_out() != left.r_out())
        throw ShapeMismatch("from_pair: middle map must act on the dilation space");
    const ConcreteOpSpace& e = left.domain();
    const ConcreteOpSpace& s = mid.domain();
    const int r = left.c_out();
    std::vector<CMatrix> tensor;
    tensor.reserve(static_cast<size_t>(e.dim()) * s.dim() * e.dim());
    std::vector<CMatrix> limg, rimg, mimg;
    for (int i = 0; i < e.dim(); ++i) {
        std::vector<cplx> ei(static_cast<size_t>(e.dim()));
        ei[static_cast<size_t>(i)] = 1;
        limg.push_back(left.apply_coeffs(ei));
        rimg.push_back(right.apply_coeffs(ei));
    }
    for (int j = 0; j < s.dim(); ++j) {
        std::vector<cplx> ej(static_cast<size_t>(s.dim()));
        ej[static_cast<size_t>(j)] = 1;
        mimg.push_back(mid.apply_coeffs(ej));
    }
    for (int i = 0; i < e.dim(); ++i)
        for (int j = 0; j < s.dim(); ++j)
            for (int l = 0; l < e.dim(); ++l)
                tensor.push_back(limg[static_cast<size_t>(i)].adjoint() *
                                 mimg[static_cast<size_t>(j)] * rimg[static_cast<size_t>(l)]);
    return {e, s, r, std::move(tensor)};
}

double TrilinearForm::adjoint_law_residual() const {
    std::vector<std::vector<cplx>> star = star_table(s_);
    double worst = 0;
    for (int i = 0; i < e_.dim(); ++i)
        for (int j = 0; j < s_.dim(); ++j)
            for (int l = 0; l < e_.dim(); ++l) {
                CMatrix rhs(r_, r_);
                for (int j2 = 0; j2 < s_.dim(); ++j2) {
                    cplx w = star[static_cast<size_t>(j)][static_cast<size_t>(j2)];
                    if (w == cplx{}) continue;
                    const CMatrix& t = at(l, j2, i);
                    for (size_t p = 0; p < rhs.data().size(); ++p) rhs.data()[p] += w * t.data()[p];
                }
                worst = std::max(worst, (at(i, j, l).adjoint() - rhs).max_abs());
            }
    return worst;
}

CMatrix amplify(const TrilinearForm& theta, const LevelElement& y, const LevelElement& s,
                const LevelElement& x) {
    const int m = y.level_m(), n = y.level_n(), r = theta.r();
    if (x.level_m() != m || x.level_n() != n || s.level_m() != m || s.level_n() != m)
        throw ShapeMismatch("amplify: level shapes are inconsistent");
    if (y.space().dim() != theta.e().dim() || x.space().dim() != theta.e().dim() ||
        s.space().dim() != theta.s().dim())
        throw ShapeMismatch("amplify: spaces do not match the form");
    CMatrix out(n * r, n * r);
    for (int j = 0; j < n; ++j)
        for (int j2 = 0; j2 < n; ++j2) {
            CMatrix slot(r, r);
            for (int p = 0; p < m; ++p)
                for (int q = 0; q < m; ++q)
                    slot += theta.eval(y.coeffs_at(p, j), s.coeffs_at(p, q), x.coeffs_at(q, j2));
            out.set_block(j * r, j2 * r, slot);
        }
    return out;
}

LevelElement sample_psd_level(const ConcreteOpSpace& s, int m, Rng& rng) {
    if (!s.tags().is_system)
        throw UnsupportedDomain("sample_psd_level: S must be an operator system");
    const int d = s.dim();
    std::vector<std::vector<cplx>> w(static_cast<size_t>(m) * m,
                                     std::vector<cplx>(static_cast<size_t>(d)));
    for (auto& slot : w)
        for (cplx& c : slot) c = rng.cgaussian();
    LevelElement we(s, m, m, w);
    // hermitize inside M_m(S): H = (W + W*)/2 entrywise
    std::vector<std::vector<cplx>> hc(static_cast<size_t>(m) * m,
                                      std::vector<cplx>(static_cast<size_t>(d)));
    for (int p = 0; p < m; ++p)
        for (int q = 0; q < m; ++q) {
            CMatrix blk = s.element(w[static_cast<size_t>(p) * m + q]);
            CMatrix blk2 = s.element(w[static_cast<size_t>(q) * m + p]).adjoint();
            Projection pr = project_onto(s, 0.5 * (blk + blk2));
            hc[static_cast<size_t>(p) * m + q] = std::move(pr.coeffs);
        }
    LevelElement h(s, m, m, hc);
    double lam = min_herm_eigenvalue(0.5 * (h.concrete() + h.concrete().adjoint()));
    double shift = std::max(0.0, -lam) + 0.05 + 0.5 * rng.uniform();
    for (int p = 0; p < m; ++p) {
        auto& slot = hc[static_cast<size_t>(p) * m + p];
        for (int b = 0; b < d; ++b)
            slot[static_cast<size_t>(b)] += shift * s.tags().unit_coeffs[static_cast<size_t>(b)];
    }
    return {s, m, m, hc};
}

PositivityReport sample_positivity(const TrilinearForm& theta, Rng& rng, int trials,
                                   int max_level, double tol) {
    PositivityReport rep;
    const int d = theta.e().dim();
    for (int t = 0; t < trials; ++t) {
        int m = 1 + static_cast<int>(rng.uniform_below(static_cast<uint64_t>(max_level)));
        int n = 1 + static_cast<int>(rng.uniform_below(static_cast<uint64_t>(max_level)));
        std::vector<std::vector<cplx>> xc(static_cast<size_t>(m) * n,
                                          std::vector<cplx>(static_cast<size_t>(d)));
        for (auto& slot : xc)
            for (cplx& c : slot) c = rng.cgaussian();
        LevelElement x(theta.e(), m, n, xc);
        LevelElement s = sample_psd_level(theta.s(), m, rng);
        CMatrix v = amplify(theta, x, s, x);
        double scale = std::max(1.0, op_norm(v));
        double defect = 0.5 * (v - v.adjoint()).frobenius_norm();
        double lo = min_herm_eigenvalue(0.5 * (v + v.adjoint())) - defect;
        rep.min_eig = std::min(rep.min_eig, lo);
        if (lo < -tol * scale) {
            rep.positive = false;
            ++rep.failures;
        }
    }
    return rep;
}

Polarisation polarise(const TrilinearForm& theta, const std::vector<cplx>& v1,
                      const std::vector<cplx>& s, const std::vector<cplx>& v2) {
    Polarisation out;
    const size_t d = v1.size();
    CMatrix sum(theta.r(), theta.r());
    for (int m = 1; m <= 4; ++m) {
        std::vector<cplx> vm(d);
        for (size_t i = 0; i < d; ++i) vm[i] = v2[i] + ipow(m) * v1[i];
        out.terms[static_cast<size_t>(m - 1)] = theta.eval(vm, s, vm);
        CMatrix scaled = out.terms[static_cast<size_t>(m - 1)];
        scaled *= 0.25 * ipow(m);
        sum += scaled;
    }
    out.combined = std::move(sum);
    return out;
}

GnsFactorisation gns_factorise(const TrilinearForm& theta) {
    const ConcreteOpSpace& e = theta.e();
    const ConcreteOpSpace& s = theta.s();
    if (!s.tags().is_system)
        throw UnsupportedDomain("gns_factorise: S must be an operator system");
    const int d = e.dim(), ds = s.dim(), r = theta.r(), big = d * r;
    const std::vector<cplx>& unit = s.tags().unit_coeffs;

    CMatrix g(big, big);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            CMatrix blk(r, r);
            for (int c = 0; c < ds; ++c) {
                cplx w = unit[static_cast<size_t>(c)];
                if (w == cplx{}) continue;
                const CMatrix& t = theta.at(i, c, j);
                for (size_t p = 0; p < blk.data().size(); ++p) blk.data()[p] += w * t.data()[p];
            }
            g.set_block(i * r, j * r, blk);
        }

    double gscale = std::max(1.0, g.frobenius_norm());
    if ((g - g.adjoint()).frobenius_norm() > 1e-8 * gscale)
        throw NotPositive("gns_factorise: Gram matrix is not hermitian");
    CMatrix gh = 0.5 * (g + g.adjoint());
    HermEig eig = herm_eig(gh);
    double lmax = std::max(0.0, eig.values.back());
    if (eig.values.front() < -1e-9 * std::max(1.0, lmax))
        throw NotPositive("gns_factorise: Gram matrix has a negative eigenvalue");

    int rank = 0;
    for (double l : eig.values)
        if (l > 1e-10 * std::max(lmax, 1e-300)) ++rank;

    GnsFactorisation out{0,
                         LinMap(e, 0, r, CMatrix(0, d)),
                         LinMap(s, 0, 0, CMatrix(0, ds)),
                         gh,
                         0.0,
                         true,
                         CpRoute::Choi,
                         true,
                         0.0};
    if (rank == 0) {
        // degenerate form: everything collapses, phi = 0
        for (const CMatrix& t : theta.tensor())
            out.reconstruction_residual = std::max(out.reconstruction_residual, t.max_abs());
        return out;
    }

    out.k_dim = rank;
    CMatrix v(big, rank);
    CMatrix lam_h(rank, rank), lam_ih(rank, rank);
    for (int c = 0; c < rank; ++c) {
        int src = big - 1 - c;  // largest eigenvalues first
        double l = eig.values[static_cast<size_t>(src)];
        lam_h(c, c) = std::sqrt(l);
        lam_ih(c, c) = 1.0 / std::sqrt(l);
        for (int i = 0; i < big; ++i) v(i, c) = eig.vectors(i, src);
    }

    // phi(b_j) = (Lambda^{1/2} V*) restricted to the j-th r-column block
    CMatrix f = lam_h * v.adjoint();  // rank x big
    CMatrix phi_action(rank * r, d);
    for (int j = 0; j < d; ++j) {
        CMatrix blk = f.block(0, j * r, rank, r);
        for (size_t p = 0; p < blk.data().size(); ++p)
            phi_action(static_cast<int>(p), j) = blk.data()[p];
    }
    out.phi = LinMap(e, rank, r, std::move(phi_action));

    // psi(c_j) = Lambda^{-1/2} V* Theta_j V Lambda^{-1/2}
    CMatrix psi_action(rank * rank, ds);
    for (int j = 0; j < ds; ++j) {
        CMatrix thetaj(big, big);
        for (int i = 0; i < d; ++i)
            for (int l = 0; l < d; ++l) thetaj.set_block(i * r, l * r, theta.at(i, j, l));
        CMatrix pj = lam_ih * v.adjoint() * thetaj * v * lam_ih;
        for (size_t p = 0; p < pj.data().size(); ++p)
            psi_action(static_cast<int>(p), j) = pj.data()[p];
    }
    out.psi = LinMap(s, rank, rank, std::move(psi_action));

    CMatrix psi_unit = out.psi.apply_coeffs(unit);
    out.psi_unital = (psi_unit - CMatrix::identity(rank)).max_abs() <= 1e-10;

    // reconstruction over basis triples
    std::vector<CMatrix> phis;
    for (int i = 0; i < d; ++i) {
        std::vector<cplx> ei(static_cast<size_t>(d));
        ei[static_cast<size_t>(i)] = 1;
        phis.push_back(out.phi.apply_coeffs(ei));
    }
    for (int j = 0; j < ds; ++j) {
        std::vector<cplx> ej(static_cast<size_t>(ds));
        ej[static_cast<size_t>(j)] = 1;
        CMatrix pj = out.psi.apply_coeffs(ej);
        for (int i = 0; i < d; ++i)
            for (int l = 0; l < d; ++l) {
                CMatrix rec = phis[static_cast<size_t>(i)].adjoint() * pj * phis[static_cast<size_t>(l)];
                out.reconstruction_residual =
                    std::max(out.reconstruction_residual, (rec - theta.at(i, j, l)).max_abs());
            }
    }

    // complete positivity of psi: Choi or diagonal route when available,
    // sampled positives otherwise
    try {
        CpReport rep = is_completely_positive(out.psi);
        out.psi_route = classify_domain(s) == DomainKind::FullAlgebra ? CpRoute::Choi
                                                                      : CpRoute::Diagonal;
        out.psi_cp = rep.cp;
        out.psi_min_eig = rep.min_eig;
    } catch (const UnsupportedDomain&) {
        out.psi_route = CpRoute::Sampled;
        Rng rng(0x600d);
        out.psi_cp = true;
        out.psi_min_eig = 0;
        for (int t = 0; t < 32; ++t) {
            int m = 1 + static_cast<int>(rng.uniform_below(2));
            LevelElement sp = sample_psd_level(s, m, rng);
            CMatrix img = out.psi.apply_level(sp);
            double lo = min_herm_eigenvalue(0.5 * (img + img.adjoint()));
            out.psi_min_eig = std::min(out.psi_min_eig, lo);
            if (lo < -1e-9 * std::max(1.0, op_norm(img))) out.psi_cp = false;
        }
    }
    return out;
}

double balanced_intertwining_residual(const GnsFactorisation& g, const TrilinearForm& theta,
                                      const std::vector<CMatrix>& a_basis) {
    const ConcreteOpSpace& e = theta.e();
    const ConcreteOpSpace& s = theta.s();
    double worst = 0;
    for (const CMatrix& a : a_basis)
        for (int j = 0; j < s.dim(); ++j)
            for (int l = 0; l < e.dim(); ++l) {
                Projection sa = project_onto(s, s.basis_at(j) * a);
                Projection ax = project_onto(e, a * e.basis_at(l));
                worst = std::max(worst, std::max(sa.residual, ax.residual));
                std::vector<cplx> el(static_cast<size_t>(e.dim()));
                el[static_cast<size_t>(l)] = 1;
                std::vector<cplx> ej(static_cast<size_t>(s.dim()));
                ej[static_cast<size_t>(j)] = 1;
                CMatrix lhs = g.psi.apply_coeffs(sa.coeffs) * g.phi.apply_coeffs(el);
                CMatrix rhs = g.psi.apply_coeffs(ej) * g.phi.apply_coeffs(ax.coeffs);
                worst = std::max(worst, (lhs - rhs).max_abs());
            }
    return worst;
}

CcDecomposition cc_decompose(const TrilinearForm& theta, Rng& rng) {
    CcDecomposition out;
    out.weights = {kImag, cplx(-1, 0), cplx(0, -1), cplx(1, 0)};  // i^1..i^4

    const ConcreteOpSpace& e = theta.e();
    const ConcreteOpSpace& s = theta.s();
    const int d = e.dim(), ds = s.dim(), r = theta.r();
    const int h = e.ambient_h(), k = e.ambient_k();

    double tmax = 0;
    for (const CMatrix& t : theta.tensor()) tmax = std::max(tmax, t.max_abs());
    if (tmax < 1e-14) {
        // zero form: four zero parts
        std::vector<CMatrix> zt(static_cast<size_t>(d) * ds * d, CMatrix(r, r));
        for (int m = 0; m < 4; ++m) out.parts.emplace_back(e, s, r, zt);
        out.c_used = 0;
        return out;
    }

    // doubled space E (+) E inside B(C^{2h}, C^{2k})
    std::vector<CMatrix> dbasis;
    CMatrix zkh(k, h);
    for (int i = 0; i < d; ++i) dbasis.push_back(direct_sum(e.basis_at(i), zkh));
    for (int i = 0; i < d; ++i) dbasis.push_back(direct_sum(zkh, e.basis_at(i)));
    ConcreteOpSpace ehat(2 * h, 2 * k, std::move(dbasis));

    // ingredients: basis Gram tr(b_a* b_b), traces of S basis, star table of S
    CMatrix bgram(d, d);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) bgram(a, b) = (e.basis_at(a).adjoint() * e.basis_at(b)).trace();
    std::vector<cplx> strace(static_cast<size_t>(ds));
    for (int j = 0; j < ds; ++j) strace[static_cast<size_t>(j)] = s.basis_at(j).trace();
    std::vector<std::vector<cplx>> star = star_table(s);

    CMatrix idr = CMatrix::identity(r);

    for (double c = 1; c <= 64; c *= 2) {
        std::vector<CMatrix> ht(static_cast<size_t>(2 * d) * ds * (2 * d), CMatrix(r, r));
        auto slot = [&](int a, int j, int b) -> CMatrix& {
            return ht[(static_cast<size_t>(a) * ds + j) * (2 * d) + b];
        };
        for (int a = 0; a < 2 * d; ++a)
            for (int j = 0; j < ds; ++j)
                for (int b = 0; b < 2 * d; ++b) {
                    if (a < d && b < d) {
                        CMatrix m = idr;
                        m *= c * strace[static_cast<size_t>(j)] * bgram(a, b);
                        slot(a, j, b) = std::move(m);
                    } else if (a >= d && b >= d) {
                        CMatrix m = idr;
                        m *= c * strace[static_cast<size_t>(j)] * bgram(a - d, b - d);
                        slot(a, j, b) = std::move(m);
                    } else if (a >= d && b < d) {
                        slot(a, j, b) = theta.at(a - d, j, b);
                    } else {
                        // theta-dagger: theta(b_{b-d}*, c_j*, b_a)*
                        CMatrix m(r, r);
                        for (int j2 = 0; j2 < ds; ++j2) {
                            cplx w = star[static_cast<size_t>(j)][static_cast<size_t>(j2)];
                            if (w == cplx{}) continue;
                            const CMatrix& t = theta.at(b - d, j2, a);
                            for (size_t p = 0; p < m.data().size(); ++p) m.data()[p] += w * t.data()[p];
                        }
                        slot(a, j, b) = m.adjoint();
                    }
                }
        TrilinearForm that(ehat, s, r, std::move(ht));

        std::optional<GnsFactorisation> gopt;
        try {
            gopt = gns_factorise(that);
        } catch (const NotPositive&) {
            continue;  // diagonal damping too weak
        }
        GnsFactorisation& g = *gopt;
        if (g.reconstruction_residual > 1e-7 * std::max(1.0, tmax + c)) continue;
        Rng child = rng.child(static_cast<uint64_t>(c));
        PositivityReport pr = sample_positivity(that, child, 24, 2, 1e-8);
        if (!pr.positive) continue;

        // phi_R = Phi restricted to the first copy, phi_L to the second
        std::vector<CMatrix> phiR(static_cast<size_t>(d)), phiL(static_cast<size_t>(d));
        for (int i = 0; i < d; ++i) {
            std::vector<cplx> ei(static_cast<size_t>(2 * d));
            ei[static_cast<size_t>(i)] = 1;
            phiR[static_cast<size_t>(i)] = g.phi.apply_coeffs(ei);
            ei[static_cast<size_t>(i)] = 0;
            ei[static_cast<size_t>(d + i)] = 1;
            phiL[static_cast<size_t>(i)] = g.phi.apply_coeffs(ei);
        }
        std::vector<CMatrix> psis(static_cast<size_t>(ds));
        for (int j = 0; j < ds; ++j) {
            std::vector<cplx> ej(static_cast<size_t>(ds));
            ej[static_cast<size_t>(j)] = 1;
            psis[static_cast<size_t>(j)] = g.psi.apply_coeffs(ej);
        }

        out.parts.clear();
        for (int m = 1; m <= 4; ++m) {
            std::vector<CMatrix> pt;
            pt.reserve(static_cast<size_t>(d) * ds * d);
            std::vector<CMatrix> mix(static_cast<size_t>(d));
            for (int i = 0; i < d; ++i) {
                CMatrix t = phiL[static_cast<size_t>(i)];
                t *= ipow(m);
                mix[static_cast<size_t>(i)] = phiR[static_cast<size_t>(i)] + t;
            }
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < ds; ++j)
                    for (int l = 0; l < d; ++l) {
                        CMatrix v = mix[static_cast<size_t>(i)].adjoint() * psis[static_cast<size_t>(j)] *
                                    mix[static_cast<size_t>(l)];
                        v *= 0.25;
                        pt.push_back(std::move(v));
                    }
            out.parts.emplace_back(e, s, r, std::move(pt));
        }
        out.c_used = c;

        // weighted sum reconstructs theta
        double resid = 0;
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < ds; ++j)
                for (int l = 0; l < d; ++l) {
                    CMatrix acc(r, r);
                    for (int m = 0; m < 4; ++m) {
                        CMatrix t = out.parts[static_cast<size_t>(m)].at(i, j, l);
                        t *= out.weights[static_cast<size_t>(m)];
                        acc += t;
                    }
                    resid = std::max(resid, (acc - theta.at(i, j, l)).max_abs());
                }
        out.reconstruction_residual = resid;
        if (resid <= 1e-7 * std::max(1.0, tmax)) return out;
    }
    throw NotPositive("cc_decompose: no damping constant produced a positive double");
}

}  // namespace symcore
