#pragma once

// Imaginary quadratic fields F = Q(sqrt(d_F)), orders R = Z[f*omega],
// fractional ideals with Hermite-reduced bases, colon quotients, local
// norm groups and the 2-adic Hilbert symbol.

#include <optional>
#include <vector>

#include "iso/linalg.hpp"

namespace iso {

// Element a + b*sqrt(d_F) of F = Q(sqrt(d_F)).
struct QOElem {
    Rat a, b;
    long dF = 0;

    QOElem() = default;
    QOElem(Rat a_, Rat b_, long dF_) : a(std::move(a_)), b(std::move(b_)), dF(dF_) {}

    QOElem operator+(const QOElem& o) const { return {a + o.a, b + o.b, dF}; }
    QOElem operator-(const QOElem& o) const { return {a - o.a, b - o.b, dF}; }
    QOElem operator-() const { return {-a, -b, dF}; }
    QOElem operator*(const QOElem& o) const {
        return {a * o.a + b * o.b * Rat(dF), a * o.b + b * o.a, dF};
    }
    QOElem conj() const { return {a, -b, dF}; }
    Rat nr() const { return a * a - b * b * Rat(dF); }
    Rat tr() const { return a + a; }
    QOElem inverse() const;
    QOElem operator/(const QOElem& o) const { return *this * o.inverse(); }
    bool operator==(const QOElem& o) const { return a == o.a && b == o.b && dF == o.dF; }
    bool is_zero() const { return a == 0 && b == 0; }
    bool is_rational() const { return b == 0; }
};

struct QuadOrder {
    long dF = 0; // fundamental discriminant, negative, = 0 or 1 mod 4
    long f = 1;  // conductor

    long disc() const { return f * f * dF; }
    bool is_maximal() const { return f == 1; }
    QuadOrder maximal() const { return {dF, 1}; }
    bool operator==(const QuadOrder& o) const { return dF == o.dF && f == o.f; }

    QOElem from_rat(const Rat& r) const { return {r, Rat(0), dF}; }
    QOElem sqrt_d() const { return {Rat(0), Rat(1), dF}; }
    QOElem omega() const { return {Rat(dF) / 2, Rat(1) / 2, dF}; }   // (d_F+sqrt(d_F))/2
    QOElem gen() const { return {Rat((long)f * dF) / 2, Rat(f) / 2, dF}; } // f*omega
};

// Fractional R-ideal: canonical HNF Z-basis, rows in (1, sqrt(d_F))
// coordinates. Also caches the conductor of the multiplicator ring.
class FracIdeal {
public:
    FracIdeal() = default;
    static FracIdeal from_gens(const QuadOrder& R, const std::vector<QOElem>& gens);
    static FracIdeal from_basis(const QuadOrder& R, const QOElem& b1, const QOElem& b2);
    static FracIdeal unit(const QuadOrder& R);                 // R itself
    static FracIdeal maximal_order_ideal(const QuadOrder& R);  // O as an R-module

    const QuadOrder& order() const { return R_; }
    const QMat& basis() const { return B_; } // 2x2, rows = Z-basis
    QOElem basis_elem(int i) const { return {B_[i][0], B_[i][1], R_.dF}; }
    long mult_conductor() const { return mult_f_; } // conductor of (a:a)

    bool operator==(const FracIdeal& o) const { return B_ == o.B_ && R_ == o.R_; }
    bool contains(const QOElem& x) const;
    bool is_zero() const { return B_.empty(); }

    FracIdeal mul(const FracIdeal& o) const;
    FracIdeal mul(const QOElem& x) const;
    FracIdeal add(const FracIdeal& o) const;
    FracIdeal intersect(const FracIdeal& o) const;
    FracIdeal conj() const;
    // (this : o) = { x in F : x*o <= this }
    FracIdeal colon(const FracIdeal& o) const;
    // conj(R : this); satisfies dual(dual(a)) = a for any a
    FracIdeal dual() const;
    bool is_invertible() const { return mult_f_ == R_.f; }
    // |F/this| style generalized index relative to R: det(B)/det(basis of R)
    Rat index_in_order() const;

private:
    QuadOrder R_;
    QMat B_; // 2x2 rational, canonical HNF form
    long mult_f_ = 0;
    static FracIdeal make(const QuadOrder& R, QMat rows);
};

// Order of discriminant t^2 - 4q together with pi = (t + sqrt(t^2-4q))/2.
std::pair<QuadOrder, QOElem> order_from_frobenius(const Int& q, const Int& t);

// Decide u in Nr(R_p^*) via the local norm group case table.
bool norm_class_contains(const QuadOrder& R, const Int& p, const Int& u);

// 2-adic Hilbert symbol of two odd integers: (-1)^(eps(u) eps(v)).
int hilbert_symbol_2(const Int& u, const Int& v);

// Legendre symbol (a/p) for odd prime p.
int legendre(const Int& a, const Int& p);

// The two primes of R above an odd split prime p coprime to f*d_F,
// as (p, f*omega - c) and its conjugate.
std::optional<std::pair<FracIdeal, FracIdeal>> split_prime_ideals(const QuadOrder& R, const Int& p);

// Smallest prime factor (q must be a prime power for callers, but the
// function just factors).
Int smallest_prime_factor(const Int& q);
bool is_prime_power(const Int& q, Int* p_out = nullptr, unsigned* e_out = nullptr);

} // namespace iso
