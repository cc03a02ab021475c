// SPDX-License-Identifier: MIT

#include "symcore/opspace.hpp"

namespace symcore {

namespace {

std::vector<cplx> vectorise(const CMatrix& a) { return a.data(); }

CMatrix build_vec_basis(int h, int k, const std::vector<CMatrix>& basis) {
    CMatrix b(k * h, static_cast<int>(basis.size()));
    for (size_t j = 0; j < basis.size(); ++j) {
        const std::vector<cplx>& v = basis[j].data();
        for (size_t i = 0; i < v.size(); ++i) b(static_cast<int>(i), static_cast<int>(j)) = v[i];
    }
    return b;
}

}  // namespace

ConcreteOpSpace::ConcreteOpSpace(int h, int k, std::vector<CMatrix> basis, SpaceTags tags)
    : h_(h), k_(k), basis_(std::move(basis)), tags_(std::move(tags)) {
    if (basis_.empty()) throw InvalidSpace("operator space needs a nonempty basis");
    for (const CMatrix& b : basis_)
        if (b.rows() != k_ || b.cols() != h_) throw InvalidSpace("basis element has wrong ambient shape");
    vec_basis_ = build_vec_basis(h_, k_, basis_);

    // Linear independence: Gram of the vectorised basis has full rank.
    CMatrix gram = vec_basis_.adjoint() * vec_basis_;
    HermEig e = herm_eig(gram);
    double top = std::max(1e-300, e.values.back());
    if (e.values.front() < 1e-10 * top)
        throw InvalidSpace("basis is numerically linearly dependent");

    if (tags_.is_system) {
        if (h_ != k_) throw InvalidSpace("operator system needs a square ambient");
        if (tags_.unit_coeffs.size() != basis_.size())
            throw InvalidSpace("operator system needs unit coefficients");
        CMatrix u = element(tags_.unit_coeffs);
        if (!approx_equal(u, CMatrix::identity(k_), 1e-9))
            throw InvalidSpace("unit coefficients do not reproduce the identity");
        // Adjoint closure: every basis adjoint projects back with tiny residual.
        for (const CMatrix& b : basis_) {
            std::vector<cplx> c = lstsq(vec_basis_, vectorise(b.adjoint()));
            CMatrix back(k_, h_);
            back.data() = mat_apply(vec_basis_, c);
            if ((back - b.adjoint()).frobenius_norm() > 1e-10 * std::max(1.0, b.frobenius_norm()))
                throw InvalidSpace("operator system span is not adjoint-closed");
        }
    }
}

CMatrix ConcreteOpSpace::element(const std::vector<cplx>& coeffs) const {
    if (coeffs.size() != basis_.size()) throw ShapeMismatch("coefficient count != basis size");
    CMatrix r(k_, h_);
    for (size_t i = 0; i < basis_.size(); ++i) {
        if (coeffs[i] == cplx{}) continue;
        const std::vector<cplx>& b = basis_[i].data();
        for (size_t p = 0; p < b.size(); ++p) r.data()[p] += coeffs[i] * b[p];
    }
    return r;
}

CMatrix ConcreteOpSpace::unit() const {
    if (!tags_.is_system) throw InvalidSpace("space is not tagged as an operator system");
    return element(tags_.unit_coeffs);
}

Projection project_onto(const ConcreteOpSpace& e, const CMatrix& a) {
    if (a.rows() != e.ambient_k() || a.cols() != e.ambient_h())
        throw ShapeMismatch("project_onto: ambient shape mismatch");
    Projection p;
    p.coeffs = lstsq(e.vectorised_basis(), a.data());
    CMatrix back(e.ambient_k(), e.ambient_h());
    back.data() = mat_apply(e.vectorised_basis(), p.coeffs);
    p.residual = (back - a).frobenius_norm();
    return p;
}

ConcreteOpSpace adjoint_space(const ConcreteOpSpace& e) {
    std::vector<CMatrix> adj;
    adj.reserve(static_cast<size_t>(e.dim()));
    for (const CMatrix& b : e.basis()) adj.push_back(b.adjoint());
    SpaceTags tags = e.tags();
    if (tags.is_system)
        for (cplx& c : tags.unit_coeffs) c = std::conj(c);
    return {e.ambient_k(), e.ambient_h(), std::move(adj), std::move(tags)};
}

LevelElement::LevelElement(const ConcreteOpSpace& space, int m, int n,
                           std::vector<std::vector<cplx>> coeffs)
    : space_(&space), m_(m), n_(n), coeffs_(std::move(coeffs)) {
    if (coeffs_.size() != static_cast<size_t>(m) * n)
        throw ShapeMismatch("LevelElement: coefficient slot count != m*n");
    const int k = space.ambient_k(), h = space.ambient_h();
    concrete_ = CMatrix(m * k, n * h);
    for (int i = 0; i < m_; ++i)
        for (int j = 0; j < n_; ++j)
            concrete_.set_block(i * k, j * h, space.element(coeffs_[static_cast<size_t>(i) * n_ + j]));
}

LevelElement::LevelElement(const ConcreteOpSpace& space, int m, int n, const CMatrix& concrete)
    : space_(&space), m_(m), n_(n), concrete_(concrete) {
    const int k = space.ambient_k(), h = space.ambient_h();
    if (concrete.rows() != m * k || concrete.cols() != n * h)
        throw ShapeMismatch("LevelElement: concrete matrix has wrong level shape");
    coeffs_.resize(static_cast<size_t>(m) * n);
    double scale = std::max(1.0, concrete.frobenius_norm());
    for (int i = 0; i < m_; ++i)
        for (int j = 0; j < n_; ++j) {
            Projection p = project_onto(space, concrete.block(i * k, j * h, k, h));
            if (p.residual > 1e-9 * scale)
                throw InconsistentElement("block leaves the operator space");
            coeffs_[static_cast<size_t>(i) * n_ + j] = std::move(p.coeffs);
        }
}

double LevelElement::consistency_residual() const {
    LevelElement rebuilt(*space_, m_, n_, coeffs_);
    return (rebuilt.concrete_ - concrete_).max_abs();
}

double level_norm(const LevelElement& x) {
    if (x.consistency_residual() > 1e-10 * std::max(1.0, x.concrete().frobenius_norm()))
        throw InconsistentElement("level element representations disagree");
    return op_norm(x.concrete());
}

LevelElement adjoint_element(const ConcreteOpSpace& estar, const LevelElement& x) {
    const ConcreteOpSpace& e = x.space();
    if (estar.ambient_h() != e.ambient_k() || estar.ambient_k() != e.ambient_h() ||
        estar.dim() != e.dim())
        throw ShapeMismatch("adjoint_element: espaces are not adjoint-shaped");
    const int m = x.level_m(), n = x.level_n();
    std::vector<std::vector<cplx>> coeffs(static_cast<size_t>(n) * m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) {
            // entry (j,i) of x* is the adjoint of entry (i,j); in the adjoint
            // basis that is the conjugated coefficient vector, provided estar
            // really is the basis-wise adjoint of e (checked by projection).
            CMatrix blk = e.element(x.coeffs_at(i, j)).adjoint();
            Projection p = project_onto(estar, blk);
            if (p.residual > 1e-8 * std::max(1.0, blk.frobenius_norm()))
                throw InconsistentElement("adjoint block leaves the adjoint space");
            coeffs[static_cast<size_t>(j) * m + i] = std::move(p.coeffs);
        }
    return {estar, n, m, std::move(coeffs)};
}

LevelElement direct_sum_element(const LevelElement& x, const LevelElement& y) {
    if (&x.space() != &y.space())
        throw ShapeMismatch("direct_sum_element: elements live over different spaces");
    const int mx = x.level_m(), nx = x.level_n(), my = y.level_m(), ny = y.level_n();
    const int d = x.space().dim();
    std::vector<std::vector<cplx>> coeffs(static_cast<size_t>(mx + my) * (nx + ny),
                                          std::vector<cplx>(static_cast<size_t>(d)));
    for (int i = 0; i < mx; ++i)
        for (int j = 0; j < nx; ++j) coeffs[static_cast<size_t>(i) * (nx + ny) + j] = x.coeffs_at(i, j);
    for (int i = 0; i < my; ++i)
        for (int j = 0; j < ny; ++j)
            coeffs[static_cast<size_t>(mx + i) * (nx + ny) + (nx + j)] = y.coeffs_at(i, j);
    return {x.space(), mx + my, nx + ny, std::move(coeffs)};
}

ConcreteOpSpace space_Rn(int n) {
    std::vector<CMatrix> basis;
    for (int j = 0; j < n; ++j) basis.push_back(CMatrix::unit(1, n, 0, j));
    SpaceTags t;
    t.is_tro = true;
    return {n, 1, std::move(basis), t};
}

ConcreteOpSpace space_Cn(int n) {
    std::vector<CMatrix> basis;
    for (int i = 0; i < n; ++i) basis.push_back(CMatrix::unit(n, 1, i, 0));
    SpaceTags t;
    t.is_tro = true;
    return {1, n, std::move(basis), t};
}

ConcreteOpSpace space_Dn(int n) {
    std::vector<CMatrix> basis;
    for (int i = 0; i < n; ++i) basis.push_back(CMatrix::unit(n, n, i, i));
    SpaceTags t;
    t.is_system = true;
    t.is_subalgebra = true;
    t.is_tro = true;
    t.unit_coeffs.assign(static_cast<size_t>(n), cplx(1, 0));
    return {n, n, std::move(basis), t};
}

ConcreteOpSpace space_Mkn(int k, int n) {
    std::vector<CMatrix> basis;
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < n; ++j) basis.push_back(CMatrix::unit(k, n, i, j));
    SpaceTags t;
    t.is_tro = true;
    if (k == n) {
        t.is_system = true;
        t.is_subalgebra = true;
        t.unit_coeffs.assign(static_cast<size_t>(k) * n, cplx(0, 0));
        for (int i = 0; i < k; ++i) t.unit_coeffs[static_cast<size_t>(i) * n + i] = 1;
    }
    return {n, k, std::move(basis), t};
}

ConcreteOpSpace space_Mn(int n) { return space_Mkn(n, n); }

}  // namespace symcore
