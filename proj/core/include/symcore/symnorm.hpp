// SPDX-License-Identifier: MIT
//
// Symmetrised-norm machinery: tensor elements of M_n(E* . S . E) with their
// involution, admissible pairs (phi completely contractive, psi unital
// completely positive), certified lower bounds via pair evaluation, the
// plus-norm alternating ascent for C*-algebra instances, and Haagerup-style
// factorisation upper bounds.

#pragma once

#include <optional>
#include <string>

#include "symcore/trilinear.hpp"

namespace symcore {

struct WitnessUnavailable : std::runtime_error {
    explicit WitnessUnavailable(const std::string& what) : std::runtime_error(what) {}
};

// Element of M_n(E* . S . E) stored as a list of factorisation blocks
// (y, s, x) with y, x in M_{k,n}(E) and s in M_k(S), representing
// sum_r y_r* . s_r . x_r, together with its canonical coefficient tensor
//   coeff(i, j, a, c, b) = sum_r sum_{p,q} conj(y_r[p,i][a]) s_r[p,q][c] x_r[q,j][b].
// Equality of elements is equality of coefficient tensors. S must be an
// operator system (the involution needs adjoints in S).
class TensorElement {
  public:
    struct Block {
        LevelElement y, s, x;
    };

    TensorElement(ConcreteOpSpace e, ConcreteOpSpace s, int n, std::vector<Block> blocks);

    // level elements reference their space by address, so blocks are rebuilt
    // against the member copies whenever the element is copied or moved
    TensorElement(const TensorElement& o);
    TensorElement(TensorElement&& o);
    TensorElement& operator=(const TensorElement& o);
    TensorElement& operator=(TensorElement&& o);

    // single block, k = 1, n = 1
    static TensorElement elementary(const ConcreteOpSpace& e, const ConcreteOpSpace& s,
                                    const std::vector<cplx>& y, const std::vector<cplx>& sc,
                                    const std::vector<cplx>& x);

    const ConcreteOpSpace& e() const { return e_; }
    const ConcreteOpSpace& s() const { return s_; }
    int n() const { return n_; }
    const std::vector<Block>& blocks() const { return blocks_; }

    const std::vector<cplx>& coeffs() const { return coeffs_; }
    cplx coeff(int i, int j, int a, int c, int b) const {
        return coeffs_[(((static_cast<size_t>(i) * n_ + j) * e_.dim() + a) * s_.dim() + c) *
                           e_.dim() +
                       b];
    }
    double coeff_norm() const;

    // involution: blocks (x, s*, y); star(star(u)) == u
    TensorElement star() const;
    // scalar-matrix module action alpha * u * beta on the slot index
    TensorElement scalar_mult(const CMatrix& alpha, const CMatrix& beta) const;

  private:
    ConcreteOpSpace e_, s_;
    int n_;
    std::vector<Block> blocks_;
    std::vector<cplx> coeffs_;
};

bool same_element(const TensorElement& u, const TensorElement& v, double tol = 1e-10);

// selfadjoint double [[0, u], [u*, 0]] at level 2n
TensorElement offdiag(const TensorElement& u);

// phi completely contractive E -> B(C^{h'}, C^{k'}), psi unital completely
// positive S -> M_{k'}. validate() re-checks the contract; samplers build
// pairs that satisfy it by construction.
struct AdmissiblePair {
    LinMap phi;
    LinMap psi;

    struct Validation {
        bool ok = false;
        double psi_unit_defect = 0;
        double psi_min_eig = 0;
        double phi_cb_lower = 0;
    };
    Validation validate(const CbConfig& cfg = {.restarts = 6}) const;
};

// (phi* . psi . phi)^(n)(u): slot (i,j) = sum_{a,c,b} coeff * phi(b_a)* psi(c_c) phi(b_b);
// linear in u.
CMatrix eval_pair(const AdmissiblePair& pair, const TensorElement& u);

// Alternating ascent for sup over 0 <= T <= I of ||sum (a_i* (x) I_k) T (b_i (x) I_k)||.
// lower is certified by the best feasible T; upper repeats it as an estimate
// (not certified; the true sup is the k -> infinity limit).
struct PlusConfig {
    int restarts = 32;
    uint64_t seed = 0x9a55;
    int iters = 60;
    double tol = 1e-10;
    int64_t budget_ms = -1;
};
struct PlusResult {
    double value = 0;        // certified lower bound at this truncation
    CMatrix t;               // optimal 0 <= T <= I found
    NormInterval interval;   // {value, value, false}
};
PlusResult plus_norm(const std::vector<std::pair<CMatrix, CMatrix>>& rep_pairs, int k,
                     const PlusConfig& cfg = {});

// Factorisation upper bound: merge the stored blocks into one (Y, S, X),
// rebalance per block, then improve by random invertible mixing accepted on
// decrease. Always an upper bound for the Haagerup norm, hence for the
// symmetrised norm.
struct HaagerupWitness {
    CMatrix y, s, x;     // concrete level matrices of the merged factorisation
    double value = 0;    // ||y|| ||s|| ||x||
    double expansion_residual = 0;  // coefficient match against the input
};
HaagerupWitness haagerup_upper(const TensorElement& u, int improve_iters = 60,
                               uint64_t seed = 0x4aa6);

// Polarised lower-bound pair phi = (f + i^m g)/2 (best m), psi the normalised
// trace state of S. Functionals are ambient matrices, f(z) = tr(F* z);
// contractivity is certified by trace_norm(F) <= 1 + 1e-9, disjointness by
// |f(y)|, |g(x)| <= tol. Throws WitnessUnavailable on validation failure.
AdmissiblePair polarised_witness(const ConcreteOpSpace& e, const ConcreteOpSpace& s,
                                 const CMatrix& f, const CMatrix& g, const std::vector<cplx>& y,
                                 const std::vector<cplx>& x, double tol = 1e-9);
// Coordinate search: f, g from top singular triples of x and y. Guarantees
// 4 |phi(y)* phi(x)| >= ||y|| ||x|| by the polarisation identity.
AdmissiblePair polarised_witness_search(const ConcreteOpSpace& e, const ConcreteOpSpace& s,
                                        const std::vector<cplx>& y, const std::vector<cplx>& x);

struct SymConfig {
    int restarts = 32;
    uint64_t seed = 0x51ee;
    int max_trunc = 4;       // plus-norm truncations 1..max_trunc
    double k_stabilise = 1e-8;
    int pair_out_dim = 2;    // h' of sampled phi
    int multiplicity = 2;
    double tol = 1e-9;
    int64_t budget_ms = -1;
};

struct SymNormResult {
    double lower = 0;
    double upper = 0;
    bool upper_certified = true;
    std::string lower_source;              // which witness attained the lower bound
    std::optional<AdmissiblePair> lower_witness;
    HaagerupWitness haagerup;
    double plus_estimate = -1;             // S = C, full-algebra E instances only
    std::vector<double> plus_by_k;         // empirical k-dependence
};

SymNormResult sym_norm(const TensorElement& u, const SymConfig& cfg = {});

}  // namespace symcore
