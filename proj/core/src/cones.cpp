// SPDX-License-Identifier: MIT

#include "symcore/cones.hpp"

#include <chrono>
#include <cmath>

namespace symcore {

namespace {

int64_t now_ms() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

double herm_defect(const TensorElement& u) {
    TensorElement st = u.star();
    double worst = 0;
    for (size_t p = 0; p < u.coeffs().size(); ++p)
        worst = std::max(worst, std::abs(u.coeffs()[p] - st.coeffs()[p]));
    return worst;
}

void require_hermitian(const TensorElement& u) {
    if (herm_defect(u) > 1e-9 * std::max(1.0, u.coeff_norm()))
        throw NotHermitian("cone certification requires a selfadjoint element");
}

LinMap identity_map(const ConcreteOpSpace& e) {
    return {e, e.ambient_k(), e.ambient_h(), e.vectorised_basis()};
}

LinMap trace_state_amplified(const ConcreteOpSpace& s, int out_dim) {
    CMatrix action(out_dim * out_dim, s.dim());
    for (int c = 0; c < s.dim(); ++c) {
        cplx w = s.basis_at(c).trace() / double(s.ambient_k());
        for (int i = 0; i < out_dim; ++i) action(i * out_dim + i, c) = w;
    }
    return {s, out_dim, out_dim, std::move(action)};
}

// clip a matrix into the operator-norm unit ball by scaling
CMatrix contract_clip(CMatrix z) {
    double n = op_norm(z);
    if (n > 1) z *= cplx(1.0 / n, 0);
    return z;
}

// nearest isometry: polar factor U V* of the thin SVD
CMatrix isometrize(const CMatrix& a) {
    Svd sv = svd(a);
    const int r = a.cols();
    CMatrix out(a.rows(), r);
    for (int c = 0; c < r; ++c)
        for (int i = 0; i < a.rows(); ++i) {
            cplx acc{};
            for (int j = 0; j < r; ++j) acc += sv.u(i, j) * std::conj(sv.v(c, j));
            out(i, c) = acc;
        }
    return out;
}

struct PairParams {
    int mult = 1;      // phi multiplicity
    CMatrix z1, z2;    // contractions, phi(x) = z2* (x (x) I_mult) z1
    int psi_mult = 1;  // psi multiplicity
    CMatrix viso;      // isometry, psi(s) = V* (s (x) I_psi_mult) V
};

AdmissiblePair build_pair(const ConcreteOpSpace& e, const ConcreteOpSpace& s,
                          const PairParams& p) {
    const int kdim = s.ambient_k();
    const int cout = p.z1.cols();
    CMatrix idm = CMatrix::identity(p.mult);
    CMatrix action(kdim * cout, e.dim());
    for (int a = 0; a < e.dim(); ++a) {
        CMatrix img = p.z2.adjoint() * kron(e.basis_at(a), idm) * p.z1;
        for (size_t q = 0; q < img.data().size(); ++q) action(static_cast<int>(q), a) = img.data()[q];
    }
    CMatrix idp = CMatrix::identity(p.psi_mult);
    CMatrix pact(kdim * kdim, s.dim());
    for (int c = 0; c < s.dim(); ++c) {
        CMatrix img = p.viso.adjoint() * kron(s.basis_at(c), idp) * p.viso;
        for (size_t q = 0; q < img.data().size(); ++q) pact(static_cast<int>(q), c) = img.data()[q];
    }
    return {LinMap(e, kdim, cout, std::move(action)), LinMap(s, kdim, kdim, std::move(pact))};
}

// model coefficients of x* . s . x for coefficient grids (k slots)
std::vector<cplx> model_coeffs(int n, int de, int ds, int k,
                               const std::vector<std::vector<cplx>>& x,
                               const std::vector<std::vector<cplx>>& s) {
    std::vector<cplx> out(static_cast<size_t>(n) * n * de * ds * de);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int p = 0; p < k; ++p)
                for (int q = 0; q < k; ++q) {
                    const auto& yc = x[static_cast<size_t>(p) * n + i];
                    const auto& sc = s[static_cast<size_t>(p) * k + q];
                    const auto& xc = x[static_cast<size_t>(q) * n + j];
                    for (int a = 0; a < de; ++a) {
                        cplx ya = std::conj(yc[static_cast<size_t>(a)]);
                        if (ya == cplx{}) continue;
                        for (int c = 0; c < ds; ++c) {
                            cplx w = ya * sc[static_cast<size_t>(c)];
                            if (w == cplx{}) continue;
                            size_t base = (((static_cast<size_t>(i) * n + j) * de + a) * ds + c) * de;
                            for (int b = 0; b < de; ++b) out[base + b] += w * xc[static_cast<size_t>(b)];
                        }
                    }
                }
    return out;
}

double coeff_dist(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    double t = 0;
    for (size_t p = 0; p < a.size(); ++p) t += std::norm(a[p] - b[p]);
    return std::sqrt(t);
}

}  // namespace

TensorElement synthesis_element(const ConcreteOpSpace& e, const ConcreteOpSpace& s, int n,
                                const SynthesisWitness& w) {
    LevelElement x(e, w.k, n, w.x);
    LevelElement sm(s, w.k, w.k, w.s);
    return {e, s, n, {TensorElement::Block{x, sm, x}}};
}

ConeCertificate refute_positive(const TensorElement& u, const RefuteConfig& cfg) {
    require_hermitian(u);
    const ConcreteOpSpace& e = u.e();
    const ConcreteOpSpace& s = u.s();
    const int64_t t0 = now_ms();

    ConeCertificate cert;
    double best_eig = 0;

    auto check_pair = [&](const AdmissiblePair& pair) -> bool {
        CMatrix m = eval_pair(pair, u);
        CMatrix h = 0.5 * (m + m.adjoint());
        HermEig eig = herm_eig(h);
        double lam = eig.values.front();
        if (lam < best_eig) {
            best_eig = lam;
            if (lam <= -cfg.tol) {
                RefutationWitness w{pair, {}, lam};
                w.vec.resize(static_cast<size_t>(h.rows()));
                for (int i = 0; i < h.rows(); ++i) w.vec[static_cast<size_t>(i)] = eig.vectors(i, 0);
                cert.verdict = Verdict::Refuted;
                cert.refutation = std::move(w);
                return true;
            }
        }
        return false;
    };

    // canonical pairs first: they refute negated squares immediately
    if (s.ambient_k() == e.ambient_k()) {
        if (check_pair({identity_map(e), LinMap(s, s.ambient_k(), s.ambient_k(),
                                                s.vectorised_basis())}))
            return cert;
    }
    if (check_pair({identity_map(e), trace_state_amplified(s, e.ambient_k())})) return cert;

    Rng root(cfg.seed);
    for (int r = 0; r < cfg.restarts; ++r) {
        if (cfg.budget_ms >= 0 && now_ms() - t0 > cfg.budget_ms) break;
        Rng rng = root.child(static_cast<uint64_t>(r));
        PairParams p;
        p.mult = 1 + static_cast<int>(rng.uniform_below(2));
        p.psi_mult = 1 + static_cast<int>(rng.uniform_below(2));
        const int cout = 1 + static_cast<int>(rng.uniform_below(2));
        p.z1 = contract_clip(rng.gaussian_matrix(e.ambient_h() * p.mult, cout));
        p.z2 = contract_clip(rng.gaussian_matrix(e.ambient_k() * p.mult, s.ambient_k()));
        p.viso = isometrize(rng.gaussian_matrix(s.ambient_k() * p.psi_mult, s.ambient_k()));

        AdmissiblePair pair = build_pair(e, s, p);
        if (check_pair(pair)) return cert;
        CMatrix m0 = eval_pair(pair, u);
        double cur = min_herm_eigenvalue(0.5 * (m0 + m0.adjoint()));

        double eps = 0.3;
        for (int it = 0; it < cfg.climb_iters; ++it) {
            PairParams q = p;
            CMatrix g1 = rng.gaussian_matrix(q.z1.rows(), q.z1.cols());
            CMatrix g2 = rng.gaussian_matrix(q.z2.rows(), q.z2.cols());
            CMatrix g3 = rng.gaussian_matrix(q.viso.rows(), q.viso.cols());
            g1 *= eps;
            g2 *= eps;
            g3 *= eps;
            q.z1 = contract_clip(q.z1 + g1);
            q.z2 = contract_clip(q.z2 + g2);
            q.viso = isometrize(q.viso + g3);
            AdmissiblePair cand = build_pair(e, s, q);
            CMatrix mc = eval_pair(cand, u);
            double lam = min_herm_eigenvalue(0.5 * (mc + mc.adjoint()));
            if (lam < cur - 1e-14) {
                cur = lam;
                p = std::move(q);
                if (check_pair(cand)) return cert;
            } else {
                eps *= 0.8;
                if (eps < 1e-3) eps = 0.3;
            }
        }
    }
    cert.verdict = Verdict::Undecided;
    return cert;
}

ConeCertificate synthesize_positive(const TensorElement& u, const SynthesisConfig& cfg) {
    require_hermitian(u);
    const ConcreteOpSpace& e = u.e();
    const ConcreteOpSpace& s = u.s();
    const int n = u.n(), de = e.dim(), ds = s.dim();
    const std::vector<cplx>& target = u.coeffs();
    const double scale = std::max(1.0, u.coeff_norm());
    const int64_t t0 = now_ms();

    std::vector<int> ranks;
    if (cfg.rank > 0)
        ranks.push_back(cfg.rank);
    else
        ranks = {n, 2 * n, 4 * n};

    ConeCertificate cert;
    double best_res = -1;

    Rng root(cfg.seed);
    for (int k : ranks) {
        for (int restart = 0; restart < cfg.restarts; ++restart) {
            if (cfg.budget_ms >= 0 && now_ms() - t0 > cfg.budget_ms) break;
            Rng rng = root.child(static_cast<uint64_t>(k * 1000 + restart));

            std::vector<std::vector<cplx>> x(static_cast<size_t>(k) * n,
                                             std::vector<cplx>(static_cast<size_t>(de)));
            for (auto& slot : x)
                for (cplx& z : slot) z = rng.cgaussian();
            std::vector<std::vector<cplx>> sv(static_cast<size_t>(k) * k,
                                              std::vector<cplx>(static_cast<size_t>(ds)));
            if (s.tags().is_system &&
                s.tags().unit_coeffs.size() == static_cast<size_t>(ds)) {
                for (int p = 0; p < k; ++p) sv[static_cast<size_t>(p) * k + p] = s.tags().unit_coeffs;
            } else {
                for (int p = 0; p < k; ++p)
                    for (cplx& z : sv[static_cast<size_t>(p) * k + p]) z = rng.gaussian();
            }

            // match overall magnitude
            {
                std::vector<cplx> mc = model_coeffs(n, de, ds, k, x, sv);
                double nm = 0;
                for (const cplx& z : mc) nm += std::norm(z);
                nm = std::sqrt(nm);
                if (nm > 1e-14) {
                    double f = std::sqrt(u.coeff_norm() / nm);
                    for (auto& slot : x)
                        for (cplx& z : slot) z *= f;
                }
            }

            double res = coeff_dist(model_coeffs(n, de, ds, k, x, sv), target);
            int stall = 0;
            for (int it = 0; it < cfg.iters && res > cfg.target * scale && stall < 12; ++it) {
                // s-step: shared design over (p,q), separate rhs per middle index c
                CMatrix design(n * de * n * de, k * k);
                for (int i = 0; i < n; ++i)
                    for (int a = 0; a < de; ++a)
                        for (int j = 0; j < n; ++j)
                            for (int b = 0; b < de; ++b) {
                                int row = ((i * de + a) * n + j) * de + b;
                                for (int p = 0; p < k; ++p)
                                    for (int q = 0; q < k; ++q)
                                        design(row, p * k + q) =
                                            std::conj(x[static_cast<size_t>(p) * n + i]
                                                          [static_cast<size_t>(a)]) *
                                            x[static_cast<size_t>(q) * n + j][static_cast<size_t>(b)];
                            }
                CMatrix dp = pinv(design);
                for (int c = 0; c < ds; ++c) {
                    std::vector<cplx> rhs(static_cast<size_t>(n) * de * n * de);
                    for (int i = 0; i < n; ++i)
                        for (int a = 0; a < de; ++a)
                            for (int j = 0; j < n; ++j)
                                for (int b = 0; b < de; ++b)
                                    rhs[static_cast<size_t>(((i * de + a) * n + j) * de + b)] =
                                        u.coeff(i, j, a, c, b);
                    std::vector<cplx> sol = mat_apply(dp, rhs);
                    for (int p = 0; p < k; ++p)
                        for (int q = 0; q < k; ++q)
                            sv[static_cast<size_t>(p) * k + q][static_cast<size_t>(c)] =
                                sol[static_cast<size_t>(p) * k + q];
                }
                // project s to the PSD cone inside M_k(S)
                for (int round = 0; round < 3; ++round) {
                    LevelElement slev(s, k, k, sv);
                    CMatrix clipped = psd_clip(0.5 * (slev.concrete() + slev.concrete().adjoint()));
                    const int ks = s.ambient_k();
                    for (int p = 0; p < k; ++p)
                        for (int q = 0; q < k; ++q) {
                            Projection pr =
                                project_onto(s, clipped.block(p * ks, q * ks, ks, ks));
                            sv[static_cast<size_t>(p) * k + q] = std::move(pr.coeffs);
                        }
                }

                // x-step: right solve with the left factor frozen, then blend
                CMatrix kmat(n * de * ds, k);
                for (int i = 0; i < n; ++i)
                    for (int a = 0; a < de; ++a)
                        for (int c = 0; c < ds; ++c) {
                            int row = (i * de + a) * ds + c;
                            for (int q = 0; q < k; ++q) {
                                cplx acc{};
                                for (int p = 0; p < k; ++p)
                                    acc += std::conj(
                                               x[static_cast<size_t>(p) * n + i][static_cast<size_t>(a)]) *
                                           sv[static_cast<size_t>(p) * k + q][static_cast<size_t>(c)];
                                kmat(row, q) = acc;
                            }
                        }
                CMatrix kp = pinv(kmat);
                std::vector<std::vector<cplx>> z(static_cast<size_t>(k) * n,
                                                 std::vector<cplx>(static_cast<size_t>(de)));
                for (int j = 0; j < n; ++j)
                    for (int b = 0; b < de; ++b) {
                        std::vector<cplx> rhs(static_cast<size_t>(n) * de * ds);
                        for (int i = 0; i < n; ++i)
                            for (int a = 0; a < de; ++a)
                                for (int c = 0; c < ds; ++c)
                                    rhs[static_cast<size_t>((i * de + a) * ds + c)] =
                                        u.coeff(i, j, a, c, b);
                        std::vector<cplx> sol = mat_apply(kp, rhs);
                        for (int q = 0; q < k; ++q)
                            z[static_cast<size_t>(q) * n + j][static_cast<size_t>(b)] =
                                sol[static_cast<size_t>(q)];
                    }
                double alpha = 1;
                bool improved = false;
                for (int bt = 0; bt < 5; ++bt) {
                    std::vector<std::vector<cplx>> xa(x);
                    for (size_t slot = 0; slot < xa.size(); ++slot)
                        for (size_t w = 0; w < xa[slot].size(); ++w)
                            xa[slot][w] += alpha * (z[slot][w] - x[slot][w]);
                    double r2 = coeff_dist(model_coeffs(n, de, ds, k, xa, sv), target);
                    if (r2 < res - 1e-15) {
                        x = std::move(xa);
                        res = r2;
                        improved = true;
                        break;
                    }
                    alpha *= 0.5;
                }
                if (!improved) {
                    res = coeff_dist(model_coeffs(n, de, ds, k, x, sv), target);
                    ++stall;
                }
            }

            res = coeff_dist(model_coeffs(n, de, ds, k, x, sv), target);
            if (best_res < 0 || res < best_res) {
                best_res = res;
                SynthesisWitness w;
                w.k = k;
                w.x = x;
                w.s = sv;
                w.residual = res;
                LevelElement slev(s, k, k, sv);
                w.s_min_eig =
                    min_herm_eigenvalue(0.5 * (slev.concrete() + slev.concrete().adjoint()));
                cert.synthesis = std::move(w);
            }
            if (best_res <= cfg.verdict_tol * scale) break;
        }
        if (best_res >= 0 && best_res <= cfg.verdict_tol * scale) break;
    }

    cert.verdict = (best_res >= 0 && best_res <= cfg.verdict_tol * scale) ? Verdict::Positive
                                                                          : Verdict::Undecided;
    return cert;
}

bool not_operator_system_by_dimension(const ConcreteOpSpace& e) {
    const int d = e.dim(), h = e.ambient_h();
    CMatrix prods(h * h, d * d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            CMatrix p = e.basis_at(i).adjoint() * e.basis_at(j);
            for (size_t q = 0; q < p.data().size(); ++q)
                prods(static_cast<int>(q), i * d + j) = p.data()[q];
        }
    Svd sv = svd(prods);
    int rank = 0;
    for (double sg : sv.sigma)
        if (sg > 1e-10 * std::max(sv.sigma.empty() ? 0.0 : sv.sigma[0], 1e-300)) ++rank;
    return rank < d * d;
}

std::optional<SemiUnit> semi_unit_probe(const ConcreteOpSpace& e, const AdmissiblePair& pair,
                                        int iters, double tol) {
    const int d = e.dim();
    // complete isometry gate on the basis and one random level-2 element
    std::vector<CMatrix> imgs;
    for (int a = 0; a < d; ++a) {
        std::vector<cplx> ea(static_cast<size_t>(d));
        ea[static_cast<size_t>(a)] = 1;
        imgs.push_back(pair.phi.apply_coeffs(ea));
        double na = op_norm(e.basis_at(a));
        if (std::abs(op_norm(imgs.back()) - na) > 1e-8 * std::max(1.0, na)) return std::nullopt;
    }
    {
        Rng rng(0x15e7);
        std::vector<std::vector<cplx>> c(4, std::vector<cplx>(static_cast<size_t>(d)));
        for (auto& slot : c)
            for (cplx& z : slot) z = rng.cgaussian();
        LevelElement lv(e, 2, 2, c);
        double ln = op_norm(lv.concrete());
        double pn = op_norm(pair.phi.apply_level(lv));
        if (std::abs(ln - pn) > 1e-8 * std::max(1.0, ln)) return std::nullopt;
    }

    const int hp = pair.phi.c_out();
    CMatrix t(hp * hp, d * d);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
            CMatrix g = imgs[static_cast<size_t>(a)].adjoint() * imgs[static_cast<size_t>(b)];
            for (size_t q = 0; q < g.data().size(); ++q)
                t(static_cast<int>(q), a * d + b) = g.data()[q];
        }
    std::vector<cplx> bvec(static_cast<size_t>(hp) * hp);
    for (int i = 0; i < hp; ++i) bvec[static_cast<size_t>(i) * hp + i] = 1;

    // span gate
    std::vector<cplx> c0 = lstsq(t, bvec);
    {
        std::vector<cplx> fit = mat_apply(t, c0);
        double r = 0;
        for (size_t q = 0; q < bvec.size(); ++q) r += std::norm(fit[q] - bvec[q]);
        if (std::sqrt(r) > 1e-8) return std::nullopt;
    }

    CMatrix tp = pinv(t);
    CMatrix c(d, d);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) c(a, b) = c0[static_cast<size_t>(a) * d + b];
    c = 0.5 * (c + c.adjoint());

    bool ok = false;
    for (int it = 0; it < iters; ++it) {
        c = psd_clip(c);
        std::vector<cplx> vc(static_cast<size_t>(d) * d);
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b) vc[static_cast<size_t>(a) * d + b] = c(a, b);
        std::vector<cplx> gap = mat_apply(t, vc);
        double r = 0;
        for (size_t q = 0; q < bvec.size(); ++q) {
            gap[q] -= bvec[q];
            r += std::norm(gap[q]);
        }
        double psd_gap = -std::min(0.0, min_herm_eigenvalue(0.5 * (c + c.adjoint())));
        if (std::sqrt(r) <= tol && psd_gap <= tol) {
            ok = true;
            break;
        }
        std::vector<cplx> corr = mat_apply(tp, gap);
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b) c(a, b) -= corr[static_cast<size_t>(a) * d + b];
        c = 0.5 * (c + c.adjoint());
    }
    if (!ok) return std::nullopt;

    c = psd_clip(0.5 * (c + c.adjoint()));
    HermEig eig = herm_eig(c);
    double lmax = std::max(eig.values.back(), 0.0);
    SemiUnit su;
    for (int r2 = d - 1; r2 >= 0; --r2) {
        double lam = eig.values[static_cast<size_t>(r2)];
        if (lam <= 1e-12 * std::max(1.0, lmax)) break;
        std::vector<cplx> col(static_cast<size_t>(d));
        for (int a = 0; a < d; ++a) col[static_cast<size_t>(a)] = std::sqrt(lam) * std::conj(eig.vectors(a, r2));
        su.columns.push_back(std::move(col));
    }
    CMatrix acc(hp, hp);
    for (const auto& col : su.columns) {
        CMatrix img = pair.phi.apply_coeffs(col);
        acc += img.adjoint() * img;
    }
    su.residual = (acc - CMatrix::identity(hp)).max_abs();
    if (su.residual > 1e-7) return std::nullopt;
    return su;
}

}  // namespace symcore
