#pragma once

// Exact arithmetic in finite fields F_p and explicit extension towers.
// Extension elements are dense coefficient vectors over the prime field;
// towers are flattened at construction time and a base field embeds through
// a cached image of its generator.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <gmpxx.h>

namespace iso {

using Int = mpz_class;
using Rat = mpq_class;

class FiniteField;
using FieldPtr = std::shared_ptr<const FiniteField>;

class FFElem {
public:
    FFElem() = default;
    FFElem(FieldPtr F, std::vector<std::uint64_t> coeffs);

    const FieldPtr& field() const { return F_; }
    const std::vector<std::uint64_t>& coeffs() const { return c_; }

    bool is_zero() const;
    bool is_one() const;

    FFElem operator+(const FFElem& o) const;
    FFElem operator-(const FFElem& o) const;
    FFElem operator-() const;
    FFElem operator*(const FFElem& o) const;
    FFElem operator/(const FFElem& o) const;
    FFElem inverse() const;
    FFElem pow(const Int& e) const;
    FFElem frobenius() const;            // x -> x^p
    FFElem frobenius_power(long k) const; // x -> x^(p^k)

    bool operator==(const FFElem& o) const;
    bool operator!=(const FFElem& o) const { return !(*this == o); }

    std::string str() const;

private:
    FieldPtr F_;
    std::vector<std::uint64_t> c_;
    friend class FiniteField;
};

// Polynomials over an arbitrary FiniteField, coefficient order c[0] + c[1] x + ...
using FFPoly = std::vector<FFElem>;

class FiniteField : public std::enable_shared_from_this<FiniteField> {
public:
    // Prime field F_p.
    static FieldPtr prime_field(std::uint64_t p);

    // Degree-`degree` extension of `base` with a deterministically seeded
    // irreducible defining polynomial; the result is flattened over F_p.
    // degree == 1 returns `base` itself.
    static FieldPtr make_extension(FieldPtr base, unsigned degree, std::uint64_t seed);

    std::uint64_t p() const { return p_; }
    unsigned degree() const { return n_; }          // total degree over F_p
    const Int& card() const { return card_; }       // p^degree
    const std::vector<std::uint64_t>& modulus() const { return mod_; }
    const FieldPtr& base() const { return base_; }  // null for prime fields
    unsigned base_degree() const;                   // degree of base over F_p

    FFElem zero() const;
    FFElem one() const;
    FFElem from_int(const Int& k) const;
    FFElem from_rat(const Rat& r) const;
    FFElem gen() const;                 // class of x
    FFElem elem(std::vector<std::uint64_t> c) const;
    // Deterministic enumeration element #k (counting in base p).
    FFElem nth_element(const Int& k) const;

    // Embed an element of `base()` (or of any field along the recorded
    // tower) into this field; `down` inverts it for elements known to lie
    // in the base.
    FFElem embed(const FFElem& x) const;
    std::optional<FFElem> down(const FFElem& x) const;

    bool is_square(const FFElem& x) const;
    std::vector<FFElem> nth_roots(const FFElem& x, unsigned n) const;
    std::optional<FFElem> sqrt(const FFElem& x) const;

private:
    FiniteField() = default;

    std::uint64_t p_ = 0;
    unsigned n_ = 1;
    Int card_;
    std::vector<std::uint64_t> mod_;   // monic, length n_+1
    FieldPtr base_;                    // tower parent (null for prime field)
    std::vector<std::vector<std::uint64_t>> gen_image_pows_; // base-gen^i here
    // Row-reduced system for `down`: columns of the embedding matrix.
    std::vector<std::vector<std::uint64_t>> down_mat_;
    std::vector<int> down_pivots_;

    std::vector<std::uint64_t> reduce(std::vector<std::uint64_t> v) const;
    std::vector<FFElem> rth_roots_impl(const FFElem& x, unsigned r) const;
    void build_down_solver();
    friend class FFElem;
};

// --- generic polynomial utilities over a FiniteField ---

FFPoly poly_trim(FFPoly f);
FFPoly poly_add(const FFPoly& a, const FFPoly& b);
FFPoly poly_sub(const FFPoly& a, const FFPoly& b);
FFPoly poly_mul(const FFPoly& a, const FFPoly& b);
FFPoly poly_mod(FFPoly a, const FFPoly& m);
FFPoly poly_divexact(const FFPoly& a, const FFPoly& b);
FFPoly poly_gcd(FFPoly a, FFPoly b);
FFPoly poly_monic(FFPoly f);
FFPoly poly_powmod(const FFPoly& base, const Int& e, const FFPoly& m);
FFElem poly_eval(const FFPoly& f, const FFElem& x);
FFPoly poly_derivative(const FFPoly& f);
int poly_deg(const FFPoly& f); // -1 for zero

// All roots of f in its coefficient field (deterministic order by element
// enumeration index). Seeded equal-degree splitting.
std::vector<FFElem> poly_roots(const FFPoly& f, std::uint64_t seed);

// Full factorization into monic irreducibles (with multiplicity).
std::vector<std::pair<FFPoly, unsigned>> poly_factor(const FFPoly& f, std::uint64_t seed);

} // namespace iso
