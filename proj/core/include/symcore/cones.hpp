// SPDX-License-Identifier: MIT
//
// Matricial cone certification for elements of M_n(E* . S . E): synthesis
// certificates u = x* . s . x with s PSD (inner approximation), refutation
// certificates through admissible pairs (outer), and the dimension
// obstruction to operator-system structure.

#pragma once

#include "symcore/symnorm.hpp"

namespace symcore {

enum class Verdict { Positive, Refuted, Undecided };

struct SynthesisWitness {
    int k = 0;                          // synthesis rank
    std::vector<std::vector<cplx>> x;   // k x n coefficient slots over dim E
    std::vector<std::vector<cplx>> s;   // k x k coefficient slots over dim S
    double residual = 0;                // coefficient-norm mismatch
    double s_min_eig = 0;               // of the concrete level matrix
};

struct RefutationWitness {
    AdmissiblePair pair;
    std::vector<cplx> vec;              // unit vector with <eval v, v> <= -1e-9
    double eigenvalue = 0;
};

struct ConeCertificate {
    Verdict verdict = Verdict::Undecided;
    std::optional<SynthesisWitness> synthesis;
    std::optional<RefutationWitness> refutation;
};

// rebuild the synthesized element from a witness (for replay)
TensorElement synthesis_element(const ConcreteOpSpace& e, const ConcreteOpSpace& s, int n,
                                const SynthesisWitness& w);

struct RefuteConfig {
    int restarts = 48;
    int climb_iters = 40;
    uint64_t seed = 0x2ef0;
    double tol = 1e-9;
    int64_t budget_ms = -1;
};

// Search for an admissible pair whose evaluation has a negative eigenvalue.
// Sound: never returns Positive; Undecided when the budget runs out.
// Throws NotHermitian unless u = u* within 1e-9 in coefficient norm.
ConeCertificate refute_positive(const TensorElement& u, const RefuteConfig& cfg = {});

struct SynthesisConfig {
    int rank = 0;                       // 0: schedule n, 2n, 4n
    int restarts = 12;
    int iters = 250;
    uint64_t seed = 0x57a6;
    double target = 1e-10;              // keep polishing below the verdict line
    double verdict_tol = 1e-7;
    int64_t budget_ms = -1;
};

// Alternating least squares over (x, s >= 0); Positive when the coefficient
// residual falls below verdict_tol, else Undecided.
ConeCertificate synthesize_positive(const TensorElement& u, const SynthesisConfig& cfg = {});

// dim span(E* E) < dim(E)^2 certifies that no operator-system structure is
// compatible with the symmetrisation
bool not_operator_system_by_dimension(const ConcreteOpSpace& e);

// Finitely supported column x = (x_1..x_m) over E with
// sum_i phi(x_i)* phi(x_i) = I, searched through a PSD coefficient matrix
// (affine/PSD alternating projections). Requires phi completely isometric on
// the basis within 1e-8; returns nullopt when the identity is not in
// span{phi(b_a)* phi(b_b)} or projections stall.
struct SemiUnit {
    std::vector<std::vector<cplx>> columns;  // coefficient vectors of x_i
    double residual = 0;                     // || sum phi(x_i)* phi(x_i) - I ||
};
std::optional<SemiUnit> semi_unit_probe(const ConcreteOpSpace& e, const AdmissiblePair& pair,
                                        int iters = 400, double tol = 1e-9);

}  // namespace symcore
