// SPDX-License-Identifier: MIT
#pragma once

#include <cstdint>
#include <vector>

#include "symcore/symnorm.hpp"

namespace symcore {

// Dual space E^d of a concrete operator space. The dual basis is kept as
// Riesz representatives inside the span of E: F_a = sum_c (G^{-1})(c, a) b_c
// with G the basis Gram matrix, so that tr(F_a^* b_b) = delta_ab. Level-n
// elements of M_n(E^d) are handled through the associated maps E -> M_n and
// their norms delegate to the cb-norm of that map (interval-valued, no exact
// cb oracle).
struct DualSpace {
    ConcreteOpSpace base;
    std::vector<CMatrix> dual_basis;  // ambient k x h representatives F_a
    CMatrix pairing;                  // pairing(a, b) = tr(F_a^* b_b)
    double pairing_residual = 0;      // max |pairing - I|
};

// Dual basis by Gram inversion. Throws InvalidSpace when the computed
// pairing fails to reproduce the identity to 1e-12.
DualSpace dual_space(const ConcreteOpSpace& e);

// delta_a as a level-one element of E^d: the map E -> M_1 whose action row
// is the computed pairing row a (kept as computed, not snapped to units).
LinMap dual_functional(const DualSpace& d, int a);

// Representing map E -> M_n of a level-n dual element. slots lists the n*n
// slot functionals row-major; slots[i*n + j][b] is the value of slot (i, j)
// on basis element b.
LinMap dual_level_map(const DualSpace& d, int n, const std::vector<std::vector<cplx>>& slots);

// Norm of a level element of E^d through its representing map.
NormInterval dual_norm(const LinMap& f_phi, const CbConfig& cfg = {});

// Identification (E^d)* = (E*)^d: the adjoint of Phi acts on E* by
// x* -> Phi(x)^*. Input is the representing map of Phi on E, output the
// representing map on estar, which must be the basis-wise adjoint space of
// the domain (ShapeMismatch otherwise). The map is its own inverse: applying
// it twice across estar and the domain returns the original action, and the
// cb-norm intervals of input and output overlap.
LinMap dstar_identify(const ConcreteOpSpace& estar, const LinMap& f_phi);

// Scalar middle span{I_k} as an operator system, the S = C symmetrisation.
ConcreteOpSpace scalar_middle(int k);

// Pairing iota(Psi^* . Phi) evaluated on u in M_n(E^* . E):
//   V(i, j) = sum_{a,b} coeff(i, j, a, 0, b) mu Psi(b_a)^* Phi(b_b)
// where the middle space of u is the scalar span of mu I. psi and phi must
// represent square dual levels of equal size over the domain of u; throws
// ShapeMismatch otherwise. For psi == phi and u in the positive cone the
// value matrix is PSD: V = Y^* (G (x) I) Y for u = x^* (G (x) I) x.
CMatrix iota_pair(const LinMap& psi, const LinMap& phi, const TensorElement& u);

// d^2 x d^2 matrix pairing the functionals iota(delta_a^* . delta_b) against
// the elementary tensors b_p^* . b_q, rows indexed (a, b) and columns (p, q).
// Full rank certifies that the iota image separates E^* . E slot by slot.
CMatrix iota_pairing_matrix(const DualSpace& d);

// Positivity transfer: random dual levels Phi against random cone elements
// u = x^* s x with PSD scalar grids s, checking iota(Phi^* . Phi)(u) >= 0.
struct DualPositivityReport {
    int samples = 0;
    double min_eigenvalue = 0;  // most negative relative eigenvalue seen
    bool ok = false;
};
DualPositivityReport dual_positivity_check(const DualSpace& d, int samples,
                                           std::uint64_t seed = 0xd0a1);

// General iota evaluation against the computed pairing. u lives over a
// concrete realisation of E^d whose basis index a stands for delta_a, v over
// the base space, both with scalar middles. Returns the (n_u n_v) square
//   V((i, I), (j, J)) = sum u(i, j, a, ., b) v(I, J, p, ., q)
//                           conj(pairing(a, p)) pairing(b, q)
// including both middle scalars.
CMatrix iota_eval(const DualSpace& d, const TensorElement& u, const TensorElement& v);

// Best-effort search for a norm gap of iota: samples u over the realised
// dual and lower-estimates ||iota(u)|| by |iota(u)(v)| / ||v||_upper over a
// probe pool v. gap = (sym lower of u) - estimate; a positive gap is a
// candidate non-isometry instance, not a certificate, since upper bounds for
// the image norm are out of scope.
struct IotaGapReport {
    double u_sym_lower = 0;
    double image_estimate = 0;
    double gap = 0;
    int samples = 0;
};
IotaGapReport iota_isometry_gap(const ConcreteOpSpace& e, const ConcreteOpSpace& edual_realised,
                                int samples, std::uint64_t seed = 0x107a);

}  // namespace symcore
