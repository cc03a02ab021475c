// SPDX-License-Identifier: MIT
//
// Ternary rings of operators: closure validation, the left/right product
// algebras, the balanced symmetrisation seminorm over the left algebra,
// the collapse of balanced symmetrisations of TRO contexts onto the
// concrete product space, and semi-unit construction.

#pragma once

#include "symcore/fnspace.hpp"

namespace symcore {

struct InvalidContext : std::runtime_error {
    explicit InvalidContext(const std::string& what) : std::runtime_error(what) {}
};
struct ModuleConditionFailed : std::runtime_error {
    explicit ModuleConditionFailed(const std::string& what) : std::runtime_error(what) {}
};

struct TroCheck {
    bool ok = false;
    int i = -1, j = -1, k = -1;  // counterexample triple b_i b_j* b_k on failure
    double residual = 0;
};

// exhaustive basis-triple closure check m1 m2* m3 in span(M)
TroCheck is_tro(const ConcreteOpSpace& m, double tol = 1e-9);

struct TroSpace {
    ConcreteOpSpace m;
    ConcreteOpSpace left_algebra;   // span(M M*)
    ConcreteOpSpace right_algebra;  // span(M* M)
};

// Validates closure and extracts the product algebras (tagged as systems
// when they contain the ambient identity). Throws InvalidSpace.
TroSpace make_tro(const ConcreteOpSpace& m);

// span of pairwise products a_i* b_j (adjoint_left) or a_i b_j* ... helper
// exposed for tests: orthonormal basis of span{ l(a_i) r(b_j) }.
ConcreteOpSpace product_span(const std::vector<CMatrix>& left,
                             const std::vector<CMatrix>& right);

struct BalancedContext {
    ConcreteOpSpace a;  // unital selfadjoint subalgebra of B(C^kE)
    ConcreteOpSpace e;  // A . E subset E (left action on the concrete level)
    ConcreteOpSpace s;  // A . S . A subset S

    struct Report {
        bool ok = false;
        double algebra_residual = 0;  // closure of A under products/adjoints
        double unit_residual = 0;     // distance of I to span(A)
        double ae_residual = 0;       // worst projection residual of a . x
        double asa_residual = 0;      // worst projection residual of b . s . a
    } report;
};

// Validates the module structure; throws InvalidContext when violated.
BalancedContext make_balanced_context(const ConcreteOpSpace& a, const ConcreteOpSpace& e,
                                      const ConcreteOpSpace& s);

struct BalancedConfig {
    int restarts = 24;        // A-admissible pair samples
    int multiplicity = 2;     // amplification bound for the pair family
    int rewrite_depth = 3;    // balanced rewrite search depth
    int improve_iters = 40;   // haagerup polish per rewrite candidate
    uint64_t seed = 0xba1a;
    int64_t budget_ms = -1;
};

struct BalancedResult {
    NormInterval interval;            // lower from pairs, upper from rewrites
    double canonical_value = 0;       // identity-family pair value
    int rewrites_applied = 0;         // moves used by the best upper witness
    HaagerupWitness upper_witness;    // factorisation of the rewritten tensor
};

// Seminorm bounds for the A-balanced symmetrisation. The lower bound samples
// the structurally A-admissible family phi(x) = (x (x) I_m) W,
// psi(s) = s (x) I_m; the upper bound searches balanced rewrites
// y* . (b s a) . x -> (y* b) . s . (a x) before refactoring. When E is a
// ternary ring with a semi-unit and span(E E*) <= A, the column resolution
// x = sum (x x_c*) x_c enters the move set and pinches the upper bound to
// ||mult(u)||. A = C I reduces to the plain symmetrised norm.
BalancedResult balanced_seminorm(const TensorElement& u, const BalancedContext& ctx,
                                 const BalancedConfig& cfg = {});

// max over basis triples (a, x, s) of |psi(s a) phi(x) - psi(s) phi(a x)|;
// <= 1e-10 certifies A-admissibility of the pair on the context.
double admissibility_residual(const AdmissiblePair& pair, const BalancedContext& ctx);

// Concrete product sum y* s x of the stored coefficients: the image of u in
// M_n([E* S E]) under multiplication, an (n h) x (n h) matrix.
CMatrix mult_element(const TensorElement& u);

struct CollapseReport {
    int samples = 0;
    double max_pair_excess = 0;       // max over samples of pair value - |mult(u)|
    double max_canonical_gap = 0;     // worst |canonical value - |mult(u)||
    double max_positive_violation = 0;  // most negative eigenvalue of mult(positive)
    double max_synthesis_residual = 0;  // worst reconstruction of PSD targets
    bool ok = false;
};

// Collapse of the balanced symmetrisation of a TRO context onto [M* S M]:
// pair values never exceed the product norm, the canonical pair attains it,
// and positivity transfers both ways. S must be an [M M*]-bimodule.
CollapseReport tro_collapse_check(const TroSpace& tro, const ConcreteOpSpace& s, int samples,
                                  uint64_t seed = 0x7209);

// Finite column with sum x_i* x_i = I on the domain side, when span(M* M)
// is unital: basis assembly followed by the C^{-1/2} correction.
std::optional<SemiUnit> find_semi_unit(const TroSpace& tro, double tol = 1e-9);

// Balancing can kill tensors the plain symmetrised norm sees: an elementary
// y* . s . x over two diagonal 2x2 blocks whose supports a single projection
// of A separates has balanced interval [0, 0] while an admissible pair built
// from disjoint rank-one functionals keeps the unbalanced norm >= 1/4.
struct BalancedDemo {
    BalancedContext ctx;
    TensorElement u;
    BalancedResult balanced;
    AdmissiblePair unbalanced_pair;
    double unbalanced_lower = 0;
};
BalancedDemo balanced_demo(const BalancedConfig& cfg = {});

}  // namespace symcore
