#pragma once

// Ordinary elliptic curves over finite fields: point arithmetic over
// extension towers, trace computation, minimality of the endomorphism
// ring, torsion bases with Frobenius matrices and Weil pairings, and
// Velu quotients by cyclic subgroups.

#include <array>
#include <optional>
#include <vector>

#include "iso/fieldtower.hpp"

namespace iso {

struct EllCurve {
    FieldPtr F;    // base field F_q
    FFElem a4, a6; // y^2 = x^3 + a4 x + a6
    Int t;         // trace of Frobenius, #E(F_q) = q + 1 - t
};

// point over an extension K of the curve's base field (or the base
// field itself)
struct EPoint {
    FieldPtr K;
    FFElem x, y;
    bool inf = true;

    static EPoint infinity(FieldPtr K) { return {std::move(K), {}, {}, true}; }
    static EPoint affine(FieldPtr K, FFElem x, FFElem y) {
        return {std::move(K), std::move(x), std::move(y), false};
    }
    bool operator==(const EPoint& o) const {
        if (inf || o.inf) return inf == o.inf;
        return x == o.x && y == o.y;
    }
};

struct TorsionData {
    long ell = 0;
    long ext_degree = 0; // E[ell] is rational over F_{q^ext_degree}
    FieldPtr K;
    EPoint b0, b1;              // basis of E[ell]
    std::array<long, 4> pi;     // Frobenius matrix (row-major) mod ell
    FFElem zeta;                // weil_pairing(b0, b1)
};

// curve with given coefficients; counts points to record the trace
EllCurve make_curve(const FieldPtr& F, const FFElem& a4, const FFElem& a6);

Int curve_order(const FieldPtr& F, const FFElem& a4, const FFElem& a6);

bool on_curve(const EllCurve& E, const EPoint& P);
EPoint ep_neg(const EPoint& P);
EPoint ep_add(const EllCurve& E, const EPoint& P, const EPoint& Q);
EPoint ep_mul(const EllCurve& E, const Int& n, const EPoint& P);
EPoint ep_frobenius(const EllCurve& E, const EPoint& P); // coordinate-wise x -> x^q
long ep_order(const EllCurve& E, const EPoint& P, long multiple);

// division polynomial of odd index n as a univariate polynomial in x
FFPoly division_polynomial(const EllCurve& E, long n);

// curves over F_q with trace t and End(E) = Z[pi], in a deterministic
// scan order over (a4, a6); stops after `limit` curves
std::vector<EllCurve> curves_with_trace_minring(std::uint64_t q, const Int& t,
                                                std::size_t limit = 1);

// End(E) = Z[pi]: no prime ell0 dividing the conductor of Z[pi] has
// scalar Frobenius on E[ell0]
bool has_min_endoring(const EllCurve& E);

// basis of E[ell] over the smallest extension where it is rational
TorsionData torsion_data(const EllCurve& E, long ell);

// ell-Weil pairing of two ell-torsion points over a common field
FFElem weil_pairing(const EllCurve& E, const EPoint& P, const EPoint& Q, long ell);

// quotient by the cyclic Galois-stable subgroup generated by G of odd
// order n coprime to the characteristic; returns a curve over F_q
EllCurve velu_quotient(const EllCurve& E, const EPoint& G, long n);

} // namespace iso
