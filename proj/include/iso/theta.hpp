#pragma once

// Level-4 algebraic theta machinery: modular lifts of elliptic theta
// null points from fourth roots of root differences, theta coordinates
// of curve points, affine differential and three-way additions, and the
// isogeny that carries a product theta null point on E^g to the theta
// null point of the quotient by a maximal isotropic ell-kernel.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "iso/ecurve.hpp"
#include "iso/kernelgen.hpp"

namespace iso {

struct ThetaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// coordinates are a dense array over (Z/level)^g with flat index
// sum_c i_c * level^c; affine marks a modular lift w.r.t. basis_tag
struct ThetaNullPoint {
    unsigned g = 1;
    unsigned level = 4;
    FieldPtr K;
    std::vector<FFElem> coords;
    bool affine = false;
    std::string basis_tag;
};

struct ThetaPoint {
    std::vector<FFElem> coords;
    bool affine = false;
};

// integer matrix with F^t F = ell * Id, r minimal in {1, 2, 4}
struct FMatrix {
    int r = 1;
    long F[4][4] = {};
};

// data of a genus-1 modular lift: split Weierstrass roots, fourth roots
// of their differences, and a square root of -1, over a tower extension
// K of the requested base field
struct ThetaLiftData {
    EllCurve E;
    FieldPtr K;
    FFElem e1, e2, e3; // x^3 + a4 x + a6 = (x-e1)(x-e2)(x-e3)
    FFElem a1, a2, a3; // a2^4 = e1-e2, a1^4 = e2-e3, a3^4 = e1-e3
    FFElem im;         // im^2 = -1
};

// deterministically extend `base` until the cubic splits, the three
// fourth roots exist, and -1 is a square; root choices are the first in
// the field's enumeration order
ThetaLiftData thomae_roots(const EllCurve& E, FieldPtr base, std::uint64_t seed);

// (a2 + a3, a1, a3 - a2, a1): the modular lift of the level-4 null
// point of E w.r.t. dx/y
ThetaNullPoint thomae_lift(const EllCurve& E, const ThetaLiftData& roots);

// coordinate-wise product of g genus-1 null points
ThetaNullPoint product_theta(const std::vector<ThetaNullPoint>& lifts);

// projective level-4 theta coordinates of P; P at infinity returns the
// null coordinates
ThetaPoint theta_point(const EllCurve& E, const EPoint& P, const ThetaLiftData& roots);

// F with F^t F = ell * Id: (a) if ell = a^2, [[a,b],[-b,a]] if
// ell = a^2 + b^2 with a, b > 0, else a quaternion norm matrix from a
// four-square decomposition
FMatrix f_matrix(long ell);

// --- affine addition engine (level 4, dimension g, flat indices) ---

// index arithmetic on flat (Z/4)^g indices
int theta_idx_add(int a, int b, unsigned g);
int theta_idx_neg(int a, unsigned g);

// affine lift of P + Q from affine lifts of P, Q, P - Q and the null
std::vector<FFElem> theta_diff_add(const std::vector<FFElem>& vP,
                                   const std::vector<FFElem>& vQ,
                                   const std::vector<FFElem>& vD,
                                   const std::vector<FFElem>& vN, unsigned g);

// affine lift of P + Q + R from the points, their pairwise sums and the null
std::vector<FFElem> theta_triple_add(const std::vector<FFElem>& vP,
                                     const std::vector<FFElem>& vQ,
                                     const std::vector<FFElem>& vR,
                                     const std::vector<FFElem>& vPQ,
                                     const std::vector<FFElem>& vPR,
                                     const std::vector<FFElem>& vQR,
                                     const std::vector<FFElem>& vN, unsigned g);

// --- the isogeny ---

struct IsogenyThetaResult {
    ThetaNullPoint null_B;   // projective level-4 null point of A/K
    std::vector<FFElem> t;   // affine products th_i * th_anchor^(r-1)
    int anchor = 0;          // flat index of the anchor
    FMatrix F;
    long ell = 0;
};

// lift: genus-1 modular lift data of E over an extension of the
// kernel's torsion field; K: maximal isotropic kernel of order ell^g.
// The t_i are the modular products w.r.t. w_B with f^* w_B equal to the
// product basis (dx/y, ..., dx/y); anchor < 0 selects the first index
// with a nonzero r-fold product.
IsogenyThetaResult isogeny_theta(const ThetaLiftData& lift, const IsogenyKernel& K,
                                 std::uint64_t seed, int anchor = -1);

// --- level-(2,2) view ---

// vals[amask * 2^g + imask] = sum_j (-1)^(amask . j) coords[i + 2 j],
// the raw partial Fourier transform without a 1/2^g factor
struct Theta22 {
    unsigned g = 1;
    std::vector<FFElem> vals;
    const FFElem& at(unsigned amask, unsigned imask) const {
        return vals[(amask << g) | imask];
    }
    static bool even_char(unsigned amask, unsigned imask) {
        return __builtin_parity(amask & imask) == 0;
    }
};

Theta22 theta4_to_theta22(const std::vector<FFElem>& coords, unsigned g);

// symmetry plus the Riemann quartic relations on the zero section;
// exhaustive for g = 1, deterministically sampled for g >= 2
bool riemann_check(const ThetaNullPoint& null);

} // namespace iso
