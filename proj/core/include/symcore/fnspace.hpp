// SPDX-License-Identifier: MIT
//
// Function-space symmetrisation over a finite point set: kernel view of
// tensors over diagonal spaces, the PSD-kernel positivity criterion,
// discrete-measure integral operators, and refutation bridges into the
// cone certificates.

#pragma once

#include "symcore/cones.hpp"

namespace symcore {

struct UnsupportedSpace : std::runtime_error {
    explicit UnsupportedSpace(const std::string& what) : std::runtime_error(what) {}
};
struct EmptySupport : std::runtime_error {
    explicit EmptySupport(const std::string& what) : std::runtime_error(what) {}
};
struct KernelIsPositive : std::runtime_error {
    explicit KernelIsPositive(const std::string& what) : std::runtime_error(what) {}
};

// u : Omega x Omega -> M_n, stored as an omega x omega grid of n x n blocks.
struct KernelFunction {
    int omega = 0;
    int n = 1;
    std::vector<CMatrix> blocks;  // row-major, blocks[x * omega + y] = u(x, y)

    const CMatrix& at(int x, int y) const { return blocks[static_cast<size_t>(x) * omega + y]; }
    CMatrix& at(int x, int y) { return blocks[static_cast<size_t>(x) * omega + y]; }

    // u(y,x) = u(x,y)* blockwise
    bool is_hermitian(double tol = 1e-10) const;

    // full block matrix indexed by (x, i), shape (omega n) x (omega n)
    CMatrix full_matrix() const;
};

struct DiscreteMeasure {
    std::vector<int> support;      // indices into Omega
    std::vector<double> weights;   // strictly positive

    bool is_probability(double tol = 1e-12) const;
};

// Evaluation view of a tensor over a diagonal space: needs E inside the
// diagonal algebra and S scalar.
KernelFunction kernel_of_tensor(const TensorElement& u);

struct KernelVerdict {
    bool positive = false;
    double min_eig = 0;
    std::vector<cplx> witness;  // negative eigenvector when not positive
};

// Exact PSD decision on the full block matrix. Throws NotHermitian.
KernelVerdict is_positive_kernel(const KernelFunction& u);

// Matrix of T_u^mu on the weighted little-l2 of the support, conjugated by
// the weight square roots so that hermitian kernels give hermitian matrices:
// block(p, q) = sqrt(w_p w_q) u(x_p, x_q).
CMatrix integral_operator(const KernelFunction& u, const DiscreteMeasure& mu);

// One-norm shift candidate: r >= archimedean_radius(u) makes
// shifted_by_unit(u, r) positive.
double archimedean_radius(const KernelFunction& u);
KernelFunction shifted_by_unit(KernelFunction u, double r);

// Admissible pair realising T_u^mu for the uniform probability measure:
// phi(f) = row (sqrt(w_x) f(x))_x, psi the identity of the scalar system.
AdmissiblePair refutation_pair_from_kernel(const KernelFunction& k, const ConcreteOpSpace& e,
                                           const ConcreteOpSpace& s);

struct KernelRefutation {
    KernelFunction kernel;
    DiscreteMeasure mu;             // uniform probability measure used by the pair
    AdmissiblePair pair;
    double pair_eval_min_eig = 0;   // min eigenvalue of eval_pair on u
    double integral_min_eig = 0;    // min eigenvalue of T_u^mu for counting mu
    ConeCertificate certificate;
};

// Bridge from a tensor with a non-PSD kernel to a Refuted cone certificate.
// Throws KernelIsPositive when the kernel is PSD.
KernelRefutation refute_kernel(const TensorElement& u);

}  // namespace symcore
