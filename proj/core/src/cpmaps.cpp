// SPDX-License-Identifier: MIT

#include "symcore/cpmaps.hpp"

#include <chrono>
#include <cmath>

namespace symcore {

namespace {

// Top singular pair by power iteration on A*A. The returned sigma is a
// Rayleigh quotient, hence a certified lower bound on the true sigma_1.
struct TopPair {
    double sigma = 0;
    std::vector<cplx> left, right;
};

TopPair top_singular_pair(const CMatrix& a) {
    TopPair out;
    const int n = a.cols(), m = a.rows();
    if (n == 0 || m == 0) return out;
    std::vector<cplx> v(static_cast<size_t>(n), cplx(1, 0));
    v[0] += 0.25;  // break symmetric starts deterministically
    double nv = vec_norm(v);
    for (cplx& x : v) x /= nv;
    double sigma2 = 0;
    for (int it = 0; it < 300; ++it) {
        std::vector<cplx> av = mat_apply(a, v);
        std::vector<cplx> w = mat_apply_adjoint(a, av);
        double nw = vec_norm(w);
        if (nw < 1e-300) break;
        double next = std::sqrt(nw);  // ||A*A v|| -> sigma^2 when v aligned
        for (cplx& x : w) x /= nw;
        v = std::move(w);
        if (it > 4 && std::abs(next - sigma2) <= 1e-13 * std::max(1.0, next)) {
            sigma2 = next;
            break;
        }
        sigma2 = next;
    }
    std::vector<cplx> av = mat_apply(a, v);
    out.sigma = vec_norm(av);
    out.right = std::move(v);
    if (out.sigma > 1e-300)
        for (cplx& x : av) x /= out.sigma;
    out.left = std::move(av);
    return out;
}

}  // namespace

LinMap::LinMap(ConcreteOpSpace domain, int r_out, int c_out, CMatrix action)
    : domain_(std::move(domain)), r_out_(r_out), c_out_(c_out), action_(std::move(action)) {
    if (action_.rows() != r_out_ * c_out_ || action_.cols() != domain_.dim())
        throw ShapeMismatch("LinMap: action matrix shape mismatch");
}

LinMap LinMap::from_action(ConcreteOpSpace domain, int r_out, int c_out,
                           const std::function<CMatrix(const CMatrix&)>& act) {
    CMatrix action(r_out * c_out, domain.dim());
    for (int b = 0; b < domain.dim(); ++b) {
        CMatrix img = act(domain.basis_at(b));
        if (img.rows() != r_out || img.cols() != c_out)
            throw ShapeMismatch("LinMap::from_action: image has wrong shape");
        for (size_t p = 0; p < img.data().size(); ++p) action(static_cast<int>(p), b) = img.data()[p];
    }
    return {std::move(domain), r_out, c_out, std::move(action)};
}

CMatrix LinMap::apply_coeffs(const std::vector<cplx>& coeffs) const {
    CMatrix out(r_out_, c_out_);
    out.data() = mat_apply(action_, coeffs);
    return out;
}

CMatrix LinMap::apply(const CMatrix& x) const {
    Projection p = project_onto(domain_, x);
    if (p.residual > 1e-8 * std::max(1.0, x.frobenius_norm()))
        throw InconsistentElement("LinMap::apply: input leaves the domain");
    return apply_coeffs(p.coeffs);
}

CMatrix LinMap::apply_level(const LevelElement& x) const {
    const int m = x.level_m(), n = x.level_n();
    CMatrix out(m * r_out_, n * c_out_);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) out.set_block(i * r_out_, j * c_out_, apply_coeffs(x.coeffs_at(i, j)));
    return out;
}

LinMap LinMap::scaled(cplx z) const {
    CMatrix a = action_;
    a *= z;
    return {domain_, r_out_, c_out_, std::move(a)};
}

cplx LevelFunctional::eval(const LevelElement& x) const {
    if (x.level_m() != n || x.level_n() != n || x.space().dim() != d)
        throw ShapeMismatch("LevelFunctional::eval: level or domain mismatch");
    cplx s{};
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const std::vector<cplx>& c = x.coeffs_at(i, j);
            const size_t base = (static_cast<size_t>(i) * n + j) * d;
            for (int b = 0; b < d; ++b) s += weights[base + b] * c[static_cast<size_t>(b)];
        }
    return s;
}

LevelFunctional functional_of_map(const LinMap& phi) {
    if (phi.r_out() != phi.c_out())
        throw ShapeMismatch("functional_of_map: codomain must be square");
    const int n = phi.r_out(), d = phi.domain().dim();
    LevelFunctional s;
    s.n = n;
    s.d = d;
    s.weights.assign(static_cast<size_t>(n) * n * d, cplx{});
    for (int b = 0; b < d; ++b) {
        CMatrix img(n, n);
        for (int p = 0; p < n * n; ++p) img.data()[static_cast<size_t>(p)] = phi.action()(p, b);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                s.weights[(static_cast<size_t>(i) * n + j) * d + b] = img(i, j);
    }
    return s;
}

LinMap map_of_functional(const LevelFunctional& s, const ConcreteOpSpace& domain) {
    if (s.d != domain.dim())
        throw ShapeMismatch("map_of_functional: functional dimension mismatch");
    const int n = s.n, d = s.d;
    CMatrix action(n * n, d);
    for (int b = 0; b < d; ++b)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                action(i * n + j, b) = s.weights[(static_cast<size_t>(i) * n + j) * d + b];
    return {domain, n, n, std::move(action)};
}

DomainKind classify_domain(const ConcreteOpSpace& e) {
    const int h = e.ambient_h(), k = e.ambient_k();
    if (h == k && e.dim() == h * h) return DomainKind::FullAlgebra;
    if (h == k && e.dim() == h) {
        bool diag = true;
        for (const CMatrix& b : e.basis())
            for (int i = 0; i < k && diag; ++i)
                for (int j = 0; j < k; ++j)
                    if (i != j && std::abs(b(i, j)) > 1e-14) {
                        diag = false;
                        break;
                    }
        if (diag) return DomainKind::Diagonal;
    }
    return DomainKind::Other;
}

CMatrix choi_matrix(const LinMap& phi) {
    if (classify_domain(phi.domain()) != DomainKind::FullAlgebra)
        throw UnsupportedDomain("choi_matrix: domain is not a full matrix algebra");
    if (phi.r_out() != phi.c_out())
        throw UnsupportedDomain("choi_matrix: codomain must be square");
    const int k = phi.domain().ambient_k(), n = phi.r_out();
    CMatrix c(k * n, k * n);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            c.set_block(i * n, j * n, phi.apply(CMatrix::unit(k, k, i, j)));
    return c;
}

CpReport is_completely_positive(const LinMap& phi) {
    CpReport rep;
    switch (classify_domain(phi.domain())) {
        case DomainKind::FullAlgebra: {
            CMatrix c = choi_matrix(phi);
            // Hermiticity defect counts against positivity: a CP map is
            // *-linear, so a lopsided Choi matrix is already a failure.
            double defect = (c - c.adjoint()).frobenius_norm();
            if (defect > 1e-9 * std::max(1.0, c.frobenius_norm())) {
                rep.cp = false;
                rep.min_eig = -defect;
                return rep;
            }
            HermEig e = herm_eig(0.5 * (c + c.adjoint()));
            rep.min_eig = e.values.front();
            double scale = std::max(std::abs(e.values.back()), std::abs(e.values.front()));
            rep.cp = rep.min_eig >= -1e-9 * std::max(1.0, scale);
            if (!rep.cp) {
                rep.witness.resize(static_cast<size_t>(c.rows()));
                for (int i = 0; i < c.rows(); ++i) rep.witness[static_cast<size_t>(i)] = e.vectors(i, 0);
            }
            return rep;
        }
        case DomainKind::Diagonal: {
            // Positive maps on a commutative domain are automatically
            // completely positive, so testing phi(E_ii) >= 0 suffices.
            const int k = phi.domain().ambient_k();
            rep.cp = true;
            rep.min_eig = 0;
            bool first = true;
            for (int i = 0; i < k; ++i) {
                CMatrix img = phi.apply(CMatrix::unit(k, k, i, i));
                if (img.rows() != img.cols())
                    throw UnsupportedDomain("is_completely_positive: rectangular codomain");
                double defect = (img - img.adjoint()).frobenius_norm();
                if (defect > 1e-9 * std::max(1.0, img.frobenius_norm())) {
                    rep.cp = false;
                    rep.min_eig = std::min(rep.min_eig, -defect);
                    continue;
                }
                double lo = img.rows() == 0 ? 0.0 : min_herm_eigenvalue(0.5 * (img + img.adjoint()));
                if (first || lo < rep.min_eig) rep.min_eig = lo;
                first = false;
                if (lo < -1e-9 * std::max(1.0, op_norm(img))) rep.cp = false;
            }
            return rep;
        }
        default:
            throw UnsupportedDomain("is_completely_positive: no Choi or diagonal route");
    }
}

namespace {

// Dual basis D with tr(D_b* basis_a) = delta_ab, as columns of (pinv B)*.
CMatrix dual_basis_columns(const ConcreteOpSpace& e) {
    return pinv(e.vectorised_basis()).adjoint();
}

struct AscentState {
    std::vector<std::vector<cplx>> t;  // L x L slots of basis coefficients
    double value = 0;
    std::vector<cplx> xi, eta;         // unit vectors in the amplified codomain
};

double eval_state(const LinMap& phi, int level, AscentState& st) {
    LevelElement te(phi.domain(), level, level, st.t);
    CMatrix big = phi.apply_level(te);
    double tn = op_norm(te.concrete());
    // Normalize onto the unit sphere: feasibility gives a certified lower
    // bound, and pushing to the boundary never hurts a homogeneous objective.
    if (tn > 1e-300) {
        for (auto& slot : st.t)
            for (cplx& c : slot) c /= tn;
        big *= cplx(1.0 / tn, 0);
    }
    TopPair tp = top_singular_pair(big);
    st.value = tp.sigma;
    st.xi = std::move(tp.left);
    st.eta = std::move(tp.right);
    return st.value;
}

}  // namespace

NormInterval cb_norm(const LinMap& phi, const CbConfig& cfg) {
    // Rectangular codomain: corner-embed into a square one, same cb-norm.
    if (phi.r_out() != phi.c_out()) {
        const int r = phi.r_out(), c = phi.c_out(), n = r + c;
        CMatrix action(n * n, phi.domain().dim());
        for (int b = 0; b < phi.domain().dim(); ++b)
            for (int i = 0; i < r; ++i)
                for (int j = 0; j < c; ++j)
                    action(i * n + (r + j), b) = phi.action()(i * c + j, b);
        return cb_norm(LinMap(phi.domain(), n, n, std::move(action)), cfg);
    }

    NormInterval out;
    if (phi.action().max_abs() < 1e-300) {
        out.upper_certified = true;
        return out;  // zero map: [0, 0]
    }

    const ConcreteOpSpace& dom = phi.domain();
    const int d = dom.dim(), h = dom.ambient_h(), k = dom.ambient_k();
    const int m = phi.r_out();
    const int L = m;  // level-m amplification suffices for maps into M_m
    CMatrix dual = dual_basis_columns(dom);

    // Images of basis elements, reused in the gradient assembly.
    std::vector<CMatrix> img(static_cast<size_t>(d));
    for (int b = 0; b < d; ++b) img[static_cast<size_t>(b)] = phi.apply_coeffs([&] {
        std::vector<cplx> e(static_cast<size_t>(d));
        e[static_cast<size_t>(b)] = 1;
        return e;
    }());

    auto start_identity = [&] {
        std::vector<std::vector<cplx>> t(static_cast<size_t>(L) * L,
                                         std::vector<cplx>(static_cast<size_t>(d)));
        CMatrix rect_id(k, h);
        for (int i = 0; i < std::min(h, k); ++i) rect_id(i, i) = 1;
        Projection p = project_onto(dom, rect_id);
        for (int i = 0; i < L; ++i) t[static_cast<size_t>(i) * L + i] = p.coeffs;
        return t;
    };
    auto start_swap = [&] {
        std::vector<std::vector<cplx>> t(static_cast<size_t>(L) * L,
                                         std::vector<cplx>(static_cast<size_t>(d)));
        for (int i = 0; i < L; ++i)
            for (int j = 0; j < L; ++j) {
                if (j >= k || i >= h) continue;
                Projection p = project_onto(dom, CMatrix::unit(k, h, j, i));
                t[static_cast<size_t>(i) * L + j] = p.coeffs;
            }
        return t;
    };

    Rng rng(cfg.seed);
    auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(
                        cfg.budget_ms < 0 ? (1LL << 40) : cfg.budget_ms);

    for (int restart = 0; restart < cfg.restarts + 2; ++restart) {
        if (restart > 0 && std::chrono::steady_clock::now() > deadline) break;
        AscentState st;
        if (restart == 0) st.t = start_identity();
        else if (restart == 1) st.t = start_swap();
        else {
            Rng child = rng.child(static_cast<uint64_t>(restart));
            st.t.assign(static_cast<size_t>(L) * L, std::vector<cplx>(static_cast<size_t>(d)));
            for (auto& slot : st.t)
                for (cplx& c : slot) c = child.cgaussian();
        }
        double prev = eval_state(phi, L, st);

        for (int iter = 0; iter < cfg.max_iters; ++iter) {
            // Gradient entries w_{ijb} = <phi(basis_b) eta_j, xi_i>.
            // cand A: coefficient ascent  t_{ijb} = conj(w_{ijb}).
            // cand B: exact polar step on the concrete gradient, projected
            // back into the domain when it is a proper subspace.
            std::vector<std::vector<cplx>> w(static_cast<size_t>(L) * L,
                                             std::vector<cplx>(static_cast<size_t>(d)));
            for (int i = 0; i < L; ++i)
                for (int j = 0; j < L; ++j)
                    for (int b = 0; b < d; ++b) {
                        cplx acc{};
                        const CMatrix& ib = img[static_cast<size_t>(b)];
                        for (int p = 0; p < m; ++p)
                            for (int q = 0; q < m; ++q)
                                acc += ib(p, q) * st.eta[static_cast<size_t>(j) * m + q] *
                                       std::conj(st.xi[static_cast<size_t>(i) * m + p]);
                        w[static_cast<size_t>(i) * L + j][static_cast<size_t>(b)] = acc;
                    }

            AscentState candA;
            candA.t.assign(static_cast<size_t>(L) * L, std::vector<cplx>(static_cast<size_t>(d)));
            for (size_t s = 0; s < w.size(); ++s)
                for (int b = 0; b < d; ++b)
                    candA.t[s][static_cast<size_t>(b)] = std::conj(w[s][static_cast<size_t>(b)]);
            double va = eval_state(phi, L, candA);

            // Concrete gradient G_ij = sum_b w_{ijb} conj-dual, Z = G^T.
            CMatrix g(L * k, L * h);
            for (int i = 0; i < L; ++i)
                for (int j = 0; j < L; ++j) {
                    CMatrix blk(k, h);
                    for (int b = 0; b < d; ++b) {
                        cplx wb = w[static_cast<size_t>(i) * L + j][static_cast<size_t>(b)];
                        if (wb == cplx{}) continue;
                        for (int p = 0; p < k; ++p)
                            for (int q = 0; q < h; ++q)
                                blk(p, q) += wb * std::conj(dual(p * h + q, b));
                    }
                    g.set_block(i * k, j * h, blk);
                }
            Svd zs = svd(g.transpose());
            CMatrix rect(L * k, L * h);
            for (int i = 0; i < std::min(L * k, L * h); ++i) rect(i, i) = 1;
            CMatrix topt = zs.v * rect * zs.u.adjoint();
            AscentState candB;
            candB.t.assign(static_cast<size_t>(L) * L, std::vector<cplx>(static_cast<size_t>(d)));
            // For a full algebra the polar optimum is already feasible and the
            // projection is exact; for a proper subspace this is an orthogonal
            // projection followed by renormalization inside eval_state.
            for (int i = 0; i < L; ++i)
                for (int j = 0; j < L; ++j) {
                    Projection p = project_onto(dom, topt.block(i * k, j * h, k, h));
                    candB.t[static_cast<size_t>(i) * L + j] = std::move(p.coeffs);
                }
            double vb = eval_state(phi, L, candB);

            AscentState* best = &st;
            double bestv = prev;
            if (va > bestv) {
                best = &candA;
                bestv = va;
            }
            if (vb > bestv) {
                best = &candB;
                bestv = vb;
            }
            if (best != &st) st = std::move(*best);
            if (bestv <= prev + cfg.tol * std::max(1.0, prev)) {
                prev = std::max(prev, bestv);
                break;
            }
            prev = bestv;
        }
        out.lower = std::max(out.lower, prev);
    }

    out.upper = out.lower * (1 + cfg.eps_report);
    out.upper_certified = false;
    return out;
}

LinMap sample_cc_map(const ConcreteOpSpace& e, int r_out, int c_out, int multiplicity, Rng& rng) {
    const int h = e.ambient_h(), k = e.ambient_k();
    CMatrix z1 = random_contraction(rng, h * multiplicity, c_out);
    CMatrix z2 = random_contraction(rng, k * multiplicity, r_out);
    CMatrix z2a = z2.adjoint();
    CMatrix im = CMatrix::identity(multiplicity);
    return LinMap::from_action(e, r_out, c_out,
                               [&](const CMatrix& b) { return z2a * kron(b, im) * z1; });
}

CMatrix StinespringUCP::apply(const CMatrix& s) const {
    return isometry.adjoint() * kron(s, CMatrix::identity(multiplicity)) * isometry;
}

LinMap StinespringUCP::as_linmap() const {
    const int k = domain.ambient_k();
    return LinMap::from_action(domain, k, k, [&](const CMatrix& b) { return apply(b); });
}

StinespringUCP sample_ucp(const ConcreteOpSpace& system, int multiplicity, Rng& rng) {
    if (!system.tags().is_system)
        throw UnsupportedDomain("sample_ucp: domain must be an operator system");
    const int k = system.ambient_k();
    CMatrix u = rng.unitary(k * multiplicity);
    StinespringUCP ucp{system, multiplicity, u.block(0, 0, k * multiplicity, k)};
    return ucp;
}

CMatrix random_contraction(Rng& rng, int rows, int cols) {
    CMatrix g = rng.gaussian_matrix(rows, cols);
    double n = op_norm(g);
    if (n > 1.0) g *= cplx(1.0 / n, 0);
    return g;
}

}  // namespace symcore
