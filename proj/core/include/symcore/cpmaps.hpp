// SPDX-License-Identifier: MIT
//
// Linear maps between matrix spaces. A map is stored by its action matrix on
// basis coefficients, so composition and amplification are exact. Ships the
// Choi-style duality map <-> level functional, complete positivity tests
// (Choi route on full algebras, diagonal route on commutative domains),
// cb-norm estimation by alternating ascent, and samplers for completely
// contractive maps and unital completely positive maps in dilation form.

#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "symcore/opspace.hpp"
#include "symcore/rng.hpp"

namespace symcore {

struct UnsupportedDomain : std::runtime_error {
    explicit UnsupportedDomain(const std::string& what) : std::runtime_error(what) {}
};

class LinMap {
  public:
    // action has shape (r_out * c_out) x dim(domain): column b is the
    // vectorised image of basis element b.
    LinMap(ConcreteOpSpace domain, int r_out, int c_out, CMatrix action);

    // Build from the action on basis elements.
    static LinMap from_action(ConcreteOpSpace domain, int r_out, int c_out,
                              const std::function<CMatrix(const CMatrix&)>& act);

    const ConcreteOpSpace& domain() const { return domain_; }
    int r_out() const { return r_out_; }
    int c_out() const { return c_out_; }
    const CMatrix& action() const { return action_; }

    CMatrix apply_coeffs(const std::vector<cplx>& coeffs) const;
    // Apply to an ambient matrix that lies in the domain (projection checked).
    CMatrix apply(const CMatrix& x) const;
    // Amplification phi^(m,n): blockwise application to a level element.
    CMatrix apply_level(const LevelElement& x) const;

    LinMap scaled(cplx z) const;

  private:
    ConcreteOpSpace domain_;
    int r_out_, c_out_;
    CMatrix action_;
};

// Functional on M_n(X) given by weights against slot/basis coordinates:
//   s(x) = sum_{i,j,b} weights[(i n + j) d + b] * coeffs(i,j)[b].
struct LevelFunctional {
    int n = 1;
    int d = 1;
    std::vector<cplx> weights;

    cplx eval(const LevelElement& x) const;
};

// s_phi with s_phi(x (x) E_ij) = phi(x)[i,j]; equivalently
// s_phi((x_ij)) = sum_ij <phi(x_ij) e_j, e_i> on the amplified level.
LevelFunctional functional_of_map(const LinMap& phi);
// Inverse: phi_s(x)[i,j] = s(x (x) E_ij).
LinMap map_of_functional(const LevelFunctional& s, const ConcreteOpSpace& domain);

enum class DomainKind { FullAlgebra, Diagonal, Other };
DomainKind classify_domain(const ConcreteOpSpace& e);

// Choi matrix sum_ij E_ij (x) phi(E_ij) for a full-algebra domain M_k.
CMatrix choi_matrix(const LinMap& phi);

struct CpReport {
    bool cp = false;
    double min_eig = 0;           // Choi route: most negative Choi eigenvalue
    std::vector<cplx> witness;    // eigenvector on failure (Choi route)
};

// Full matrix algebra: Choi PSD test with witness. Diagonal domain: each
// phi(E_ii) PSD (positive maps on commutative domains are automatically
// completely positive). Throws UnsupportedDomain otherwise.
CpReport is_completely_positive(const LinMap& phi);

struct NormInterval {
    double lower = 0;
    double upper = 0;
    bool upper_certified = false;
};

struct CbConfig {
    int restarts = 32;
    uint64_t seed = 0x5eed;
    int max_iters = 80;
    double tol = 1e-10;
    int64_t budget_ms = -1;      // checked at restart boundaries only
    double eps_report = 1e-6;    // heuristic upper = lower * (1 + eps)
};

// cb-norm of a map into M_{r x c}. For square codomains the level-m
// amplification suffices; rectangular codomains are embedded as a corner of a
// square one. lower is certified by a feasible input; upper is heuristic
// unless the map is the zero map.
NormInterval cb_norm(const LinMap& phi, const CbConfig& cfg = {});

// phi(x) = Z2* (x (x) I_m) Z1 for random contractions Z1, Z2; completely
// contractive by construction.
LinMap sample_cc_map(const ConcreteOpSpace& e, int r_out, int c_out, int multiplicity, Rng& rng);

// Unital completely positive map on an operator system S <= B(C^k) in
// dilation form s -> V* (s (x) I_r) V with V an isometry.
struct StinespringUCP {
    ConcreteOpSpace domain;  // operator system
    int multiplicity = 1;
    CMatrix isometry;        // (k r) x k, V* V = I_k

    CMatrix apply(const CMatrix& s) const;
    LinMap as_linmap() const;
};

StinespringUCP sample_ucp(const ConcreteOpSpace& system, int multiplicity, Rng& rng);

// Random contraction: Gaussian matrix scaled into the unit ball (exact polar
// contraction when the norm exceeds one).
CMatrix random_contraction(Rng& rng, int rows, int cols);

}  // namespace symcore
