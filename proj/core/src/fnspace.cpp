// SPDX-License-Identifier: MIT

#include "symcore/fnspace.hpp"

#include <cmath>

namespace symcore {

namespace {

// diagonal entries of every basis element; throws when E is not diagonal
std::vector<std::vector<cplx>> diagonal_values(const ConcreteOpSpace& e) {
    if (e.ambient_h() != e.ambient_k())
        throw UnsupportedSpace("kernel view needs a square diagonal ambient");
    const int om = e.ambient_h();
    double scale = 0;
    for (const CMatrix& b : e.basis()) scale = std::max(scale, b.max_abs());
    std::vector<std::vector<cplx>> vals(static_cast<size_t>(e.dim()),
                                        std::vector<cplx>(static_cast<size_t>(om)));
    for (int a = 0; a < e.dim(); ++a) {
        const CMatrix& b = e.basis_at(a);
        for (int i = 0; i < om; ++i)
            for (int j = 0; j < om; ++j) {
                if (i == j)
                    vals[static_cast<size_t>(a)][static_cast<size_t>(i)] = b(i, i);
                else if (std::abs(b(i, j)) > 1e-12 * std::max(1.0, scale))
                    throw UnsupportedSpace("kernel view needs E inside the diagonal algebra");
            }
    }
    return vals;
}

std::vector<cplx> scalar_values(const ConcreteOpSpace& s) {
    if (s.ambient_h() != 1 || s.ambient_k() != 1)
        throw UnsupportedSpace("kernel view needs a scalar middle system");
    std::vector<cplx> vals(static_cast<size_t>(s.dim()));
    for (int c = 0; c < s.dim(); ++c) vals[static_cast<size_t>(c)] = s.basis_at(c)(0, 0);
    return vals;
}

void check_measure(const KernelFunction& u, const DiscreteMeasure& mu) {
    if (mu.support.empty()) throw EmptySupport("measure has empty support");
    if (mu.support.size() != mu.weights.size())
        throw std::invalid_argument("measure support/weight size mismatch");
    for (size_t p = 0; p < mu.support.size(); ++p) {
        if (mu.support[p] < 0 || mu.support[p] >= u.omega)
            throw std::invalid_argument("measure support outside Omega");
        if (!(mu.weights[p] > 0)) throw std::invalid_argument("measure weights must be positive");
    }
}

}  // namespace

bool KernelFunction::is_hermitian(double tol) const {
    double scale = 0;
    for (const CMatrix& b : blocks) scale = std::max(scale, b.max_abs());
    for (int x = 0; x < omega; ++x)
        for (int y = 0; y < omega; ++y)
            if ((at(y, x) - at(x, y).adjoint()).max_abs() > tol * std::max(1.0, scale))
                return false;
    return true;
}

CMatrix KernelFunction::full_matrix() const {
    CMatrix b(omega * n, omega * n);
    for (int x = 0; x < omega; ++x)
        for (int y = 0; y < omega; ++y)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) b(x * n + i, y * n + j) = at(x, y)(i, j);
    return b;
}

bool DiscreteMeasure::is_probability(double tol) const {
    double total = 0;
    for (double w : weights) total += w;
    return std::abs(total - 1.0) <= tol;
}

KernelFunction kernel_of_tensor(const TensorElement& u) {
    const ConcreteOpSpace& e = u.e();
    const ConcreteOpSpace& s = u.s();
    std::vector<std::vector<cplx>> bval = diagonal_values(e);
    std::vector<cplx> sval = scalar_values(s);
    const int om = e.ambient_h(), n = u.n(), de = e.dim(), ds = s.dim();

    KernelFunction ker;
    ker.omega = om;
    ker.n = n;
    ker.blocks.assign(static_cast<size_t>(om) * om, CMatrix(n, n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int a = 0; a < de; ++a)
                for (int c = 0; c < ds; ++c)
                    for (int b = 0; b < de; ++b) {
                        cplx w = u.coeff(i, j, a, c, b) * sval[static_cast<size_t>(c)];
                        if (w == cplx{}) continue;
                        for (int x = 0; x < om; ++x) {
                            cplx left = std::conj(bval[static_cast<size_t>(a)][static_cast<size_t>(x)]);
                            if (left == cplx{}) continue;
                            for (int y = 0; y < om; ++y)
                                ker.at(x, y)(i, j) +=
                                    w * left * bval[static_cast<size_t>(b)][static_cast<size_t>(y)];
                        }
                    }
    return ker;
}

KernelVerdict is_positive_kernel(const KernelFunction& u) {
    if (!u.is_hermitian()) throw NotHermitian("kernel positivity needs a hermitian kernel");
    CMatrix b = u.full_matrix();
    HermEig eig = herm_eig(0.5 * (b + b.adjoint()));
    KernelVerdict v;
    v.min_eig = eig.values.front();
    double scale = std::max(std::abs(eig.values.front()), std::abs(eig.values.back()));
    v.positive = v.min_eig >= -1e-9 * std::max(1.0, scale);
    if (!v.positive) {
        v.witness.resize(static_cast<size_t>(b.rows()));
        for (int i = 0; i < b.rows(); ++i) v.witness[static_cast<size_t>(i)] = eig.vectors(i, 0);
    }
    return v;
}

CMatrix integral_operator(const KernelFunction& u, const DiscreteMeasure& mu) {
    check_measure(u, mu);
    const int m = static_cast<int>(mu.support.size()), n = u.n;
    CMatrix t(m * n, m * n);
    for (int p = 0; p < m; ++p)
        for (int q = 0; q < m; ++q) {
            double w = std::sqrt(mu.weights[static_cast<size_t>(p)] *
                                 mu.weights[static_cast<size_t>(q)]);
            const CMatrix& blk = u.at(mu.support[static_cast<size_t>(p)],
                                      mu.support[static_cast<size_t>(q)]);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) t(p * n + i, q * n + j) = w * blk(i, j);
        }
    return t;
}

double archimedean_radius(const KernelFunction& u) { return op_norm(u.full_matrix()); }

KernelFunction shifted_by_unit(KernelFunction u, double r) {
    for (int x = 0; x < u.omega; ++x)
        for (int i = 0; i < u.n; ++i) u.at(x, x)(i, i) += r;
    return u;
}

AdmissiblePair refutation_pair_from_kernel(const KernelFunction& k, const ConcreteOpSpace& e,
                                           const ConcreteOpSpace& s) {
    std::vector<std::vector<cplx>> bval = diagonal_values(e);
    std::vector<cplx> sval = scalar_values(s);
    if (e.ambient_h() != k.omega)
        throw UnsupportedSpace("kernel and space disagree on Omega");
    const int om = k.omega;
    const double w = 1.0 / om;

    CMatrix phia(om, e.dim());
    for (int a = 0; a < e.dim(); ++a)
        for (int x = 0; x < om; ++x)
            phia(x, a) = std::sqrt(w) * bval[static_cast<size_t>(a)][static_cast<size_t>(x)];
    CMatrix psia(1, s.dim());
    for (int c = 0; c < s.dim(); ++c) psia(0, c) = sval[static_cast<size_t>(c)];
    return {LinMap(e, 1, om, std::move(phia)), LinMap(s, 1, 1, std::move(psia))};
}

KernelRefutation refute_kernel(const TensorElement& u) {
    KernelFunction ker = kernel_of_tensor(u);
    KernelVerdict kv = is_positive_kernel(ker);
    if (kv.positive) throw KernelIsPositive("kernel is PSD, nothing to refute");

    AdmissiblePair pair = refutation_pair_from_kernel(ker, u.e(), u.s());
    DiscreteMeasure mu;
    mu.support.resize(static_cast<size_t>(ker.omega));
    for (int x = 0; x < ker.omega; ++x) mu.support[static_cast<size_t>(x)] = x;
    mu.weights.assign(static_cast<size_t>(ker.omega), 1.0 / ker.omega);

    CMatrix m = eval_pair(pair, u);
    CMatrix h = 0.5 * (m + m.adjoint());
    HermEig eig = herm_eig(h);
    double lam = eig.values.front();

    DiscreteMeasure counting;
    counting.support = mu.support;
    counting.weights.assign(static_cast<size_t>(ker.omega), 1.0);
    CMatrix t = integral_operator(ker, counting);
    double integral_min = min_herm_eigenvalue(0.5 * (t + t.adjoint()));

    ConeCertificate cert;
    if (lam <= -1e-9) {
        RefutationWitness wit{pair, {}, lam};
        wit.vec.resize(static_cast<size_t>(h.rows()));
        for (int i = 0; i < h.rows(); ++i) wit.vec[static_cast<size_t>(i)] = eig.vectors(i, 0);
        cert.verdict = Verdict::Refuted;
        cert.refutation = std::move(wit);
    } else {
        cert.verdict = Verdict::Undecided;
    }
    return {std::move(ker), std::move(mu), std::move(pair), lam, integral_min, std::move(cert)};
}

}  // namespace symcore
