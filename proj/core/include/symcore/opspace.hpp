// SPDX-License-Identifier: MIT
//
// Concrete operator spaces E <= B(C^h, C^k) spanned by a finite matrix basis,
// with elements of every matrix level M_{m,n}(E). A level element is stored
// both concretely (the big (m k) x (n h) matrix, authoritative for norms) and
// abstractly (an m x n array of basis coefficients, authoritative for
// equality and tensor bookkeeping).

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "symcore/matcore.hpp"

namespace symcore {

struct InconsistentElement : std::runtime_error {
    explicit InconsistentElement(const std::string& what) : std::runtime_error(what) {}
};
struct InvalidSpace : std::runtime_error {
    explicit InvalidSpace(const std::string& what) : std::runtime_error(what) {}
};

struct SpaceTags {
    bool is_system = false;
    bool is_subalgebra = false;
    bool is_tro = false;
    // coefficients reproducing the ambient identity when is_system
    std::vector<cplx> unit_coeffs;
};

class ConcreteOpSpace {
  public:
    // basis entries are k x h matrices (operators C^h -> C^k)
    ConcreteOpSpace(int h, int k, std::vector<CMatrix> basis, SpaceTags tags = {});

    int ambient_h() const { return h_; }
    int ambient_k() const { return k_; }
    int dim() const { return static_cast<int>(basis_.size()); }
    const std::vector<CMatrix>& basis() const { return basis_; }
    const CMatrix& basis_at(int i) const { return basis_[static_cast<size_t>(i)]; }
    const SpaceTags& tags() const { return tags_; }

    // Linear combination sum coeffs[i] * basis[i].
    CMatrix element(const std::vector<cplx>& coeffs) const;

    // Columns are vectorised basis matrices; shape (k h) x dim.
    const CMatrix& vectorised_basis() const { return vec_basis_; }

    // Unit of an operator system (throws InvalidSpace when not a system).
    CMatrix unit() const;

  private:
    int h_ = 0, k_ = 0;
    std::vector<CMatrix> basis_;
    SpaceTags tags_;
    CMatrix vec_basis_;
};

// Least-squares coefficients of A against the basis and the residual norm;
// residual <= 1e-9 certifies membership of A in E.
struct Projection {
    std::vector<cplx> coeffs;
    double residual = 0;
};
Projection project_onto(const ConcreteOpSpace& e, const CMatrix& a);

// Basis-wise adjoint space E* <= B(C^k, C^h).
ConcreteOpSpace adjoint_space(const ConcreteOpSpace& e);

// Element of M_{m,n}(E).
class LevelElement {
  public:
    // From an m x n array of coefficient vectors (row-major slots).
    LevelElement(const ConcreteOpSpace& space, int m, int n,
                 std::vector<std::vector<cplx>> coeffs);
    // From a concrete (m k) x (n h) matrix; each block is projected onto E and
    // the element is rejected when some block leaves the space.
    LevelElement(const ConcreteOpSpace& space, int m, int n, const CMatrix& concrete);

    const ConcreteOpSpace& space() const { return *space_; }
    int level_m() const { return m_; }
    int level_n() const { return n_; }
    const CMatrix& concrete() const { return concrete_; }
    const std::vector<cplx>& coeffs_at(int i, int j) const {
        return coeffs_[static_cast<size_t>(i) * n_ + j];
    }
    const std::vector<std::vector<cplx>>& coeffs() const { return coeffs_; }

    // max |concrete - sum coeffs (x) basis| over entries.
    double consistency_residual() const;

  private:
    const ConcreteOpSpace* space_;
    int m_, n_;
    CMatrix concrete_;
    std::vector<std::vector<cplx>> coeffs_;
};

// op_norm of the concrete matrix; throws InconsistentElement when the two
// representations disagree beyond 1e-10 (relative).
double level_norm(const LevelElement& x);

// Entrywise-adjoint element x* in M_{n,m}(E*): (x*)_{ji} = (x_{ij})*.
LevelElement adjoint_element(const ConcreteOpSpace& estar, const LevelElement& x);

// diag(x, y) at concatenated levels.
LevelElement direct_sum_element(const LevelElement& x, const LevelElement& y);

// Standard spaces.
ConcreteOpSpace space_Rn(int n);          // rows: span{E_{1j}} in B(C^n, C)
ConcreteOpSpace space_Cn(int n);          // columns: span{E_{i1}} in B(C, C^n)
ConcreteOpSpace space_Dn(int n);          // diagonal subalgebra of M_n
ConcreteOpSpace space_Mkn(int k, int n);  // all of B(C^n, C^k)
ConcreteOpSpace space_Mn(int n);          // full M_n as an operator system

}  // namespace symcore
