// SPDX-License-Identifier: MIT
//
// Trilinear forms theta: E* x S x E -> M_r stored by their basis tensor
// theta(b_i*, c_j, b_l), with amplification to matrix levels, a positivity
// sampler, polarisation, a constructive GNS-style factorisation
// theta(y*, s, x) = phi(y)* psi(s) phi(x), and the decomposition of a
// completely contractive form into four completely positive parts with
// fourth-root-of-unity weights.

#pragma once

#include <array>

#include "symcore/cpmaps.hpp"

namespace symcore {

struct NotPositive : std::runtime_error {
    explicit NotPositive(const std::string& what) : std::runtime_error(what) {}
};

class TrilinearForm {
  public:
    // tensor[(i * dim(S) + j) * dim(E) + l] = theta(b_i*, c_j, b_l), an r x r matrix.
    TrilinearForm(ConcreteOpSpace e, ConcreteOpSpace s, int r, std::vector<CMatrix> tensor);

    const ConcreteOpSpace& e() const { return e_; }
    const ConcreteOpSpace& s() const { return s_; }
    int r() const { return r_; }
    const CMatrix& at(int i, int j, int l) const {
        return tensor_[(static_cast<size_t>(i) * s_.dim() + j) * e_.dim() + l];
    }
    const std::vector<CMatrix>& tensor() const { return tensor_; }

    // theta(y*, s, x) for coefficient vectors (conjugate-linear in y).
    CMatrix eval(const std::vector<cplx>& y, const std::vector<cplx>& s,
                 const std::vector<cplx>& x) const;

    // Multiplication form theta(y*, s, x) = y* s x for E <= B(C^h, C^k) and
    // S <= B(C^k); target dimension r = h.
    static TrilinearForm multiplication(const ConcreteOpSpace& e, const ConcreteOpSpace& s);
    // Pair form theta(y*, s, x) = left(y)* mid(s) right(x) with
    // left, right: E -> B(C^r, C^K) and mid: S -> M_K.
    static TrilinearForm from_pair(const LinMap& left, const LinMap& mid, const LinMap& right);

    // max residual of theta(y*,s,x)* = theta(x*,s*,y) over basis triples;
    // needs S adjoint-closed (coefficients of c_j* recovered by projection).
    double adjoint_law_residual() const;

  private:
    ConcreteOpSpace e_, s_;
    int r_;
    std::vector<CMatrix> tensor_;
};

// Amplified evaluation theta^{(m,n)}(y*, s, x) of size (n r) x (n r):
//   slot (j, j') = sum_{p,q} theta((y_{p,j})*, s_{p,q}, x_{q,j'}).
// y, x are level-(m,n) elements of E; s is a level-(m,m) element of S.
CMatrix amplify(const TrilinearForm& theta, const LevelElement& y, const LevelElement& s,
                const LevelElement& x);

// Positivity sampler: theta(x*, s, x) against random x in M_{m,n}(E) and
// random PSD s in M_m(S)+, levels m, n <= max_level. Requires S to be an
// operator system (positives are sampled as shifted hermitians).
struct PositivityReport {
    bool positive = true;
    double min_eig = 0;      // most negative eigenvalue seen
    int failures = 0;
};
PositivityReport sample_positivity(const TrilinearForm& theta, Rng& rng, int trials = 64,
                                   int max_level = 3, double tol = 1e-9);

// Random PSD level-m element of an operator system S (shift of a hermitian).
LevelElement sample_psd_level(const ConcreteOpSpace& s, int m, Rng& rng);

// Polarisation: terms[m] = theta((v2 + i^m v1)*, s, (v2 + i^m v1)) for
// m = 1..4 (stored at index m-1), so that
//   theta(v1*, s, v2) = (1/4) sum_m i^m terms[m].
struct Polarisation {
    std::array<CMatrix, 4> terms;
    CMatrix combined;  // the quarter signed sum
};
Polarisation polarise(const TrilinearForm& theta, const std::vector<cplx>& v1,
                      const std::vector<cplx>& s, const std::vector<cplx>& v2);

enum class CpRoute { Choi, Diagonal, Sampled };

struct GnsFactorisation {
    int k_dim = 0;
    LinMap phi;   // E -> B(C^r, C^K), stored as K x r matrices
    LinMap psi;   // S -> M_K, unital
    CMatrix gram; // PSD Gram on E (x) C^r

    double reconstruction_residual = 0;  // max over basis triples
    bool psi_unital = false;
    CpRoute psi_route = CpRoute::Sampled;
    bool psi_cp = false;
    double psi_min_eig = 0;
};

// GNS construction on E (x) C^r with inner product from theta(., 1_S, .).
// Throws NotPositive when the Gram matrix fails PSD; a zero Gram yields the
// degenerate factorisation K_dim = 0. S must be an operator system.
GnsFactorisation gns_factorise(const TrilinearForm& theta);

// Intertwining residual of the A-balanced identity
//   psi(s a) phi(x) = psi(s) phi(a x)
// over basis triples, for a subalgebra A given by ambient matrices that
// multiply S on the right and E on the left.
double balanced_intertwining_residual(const GnsFactorisation& g, const TrilinearForm& theta,
                                      const std::vector<CMatrix>& a_basis);

// Four completely positive parts with weights i^m:
//   theta = sum_{m=1..4} weights[m-1] * parts[m-1],
// built through the doubling form theta_hat on E (+) E and its GNS pair.
struct CcDecomposition {
    std::vector<TrilinearForm> parts;  // four c.p. forms
    std::array<cplx, 4> weights{};     // i, -1, -i, 1
    double c_used = 0;                 // diagonal damping that made the double PSD
    double reconstruction_residual = 0;
};
CcDecomposition cc_decompose(const TrilinearForm& theta, Rng& rng);

}  // namespace symcore
