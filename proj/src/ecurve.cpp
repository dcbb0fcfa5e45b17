#include "iso/ecurve.hpp"

#include <functional>
#include <map>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "iso/quadorder.hpp"

namespace iso {

namespace {

// embed x into K along the recorded tower (identity if already there)
FFElem lift(const FieldPtr& K, const FFElem& x) {
    if (x.field() == K) return x;
    return K->embed(x);
}

std::vector<long> prime_factors_long(long n) {
    std::vector<long> out;
    for (long p = 2; p * p <= n; ++p)
        if (n % p == 0) {
            out.push_back(p);
            while (n % p == 0) n /= p;
        }
    if (n > 1) out.push_back(n);
    return out;
}

FFElem rhs_at(const EllCurve& E, const FieldPtr& K, const FFElem& x) {
    return x * x * x + lift(K, E.a4) * x + lift(K, E.a6);
}

// deterministic scan for an affine point of E over K
EPoint scan_point(const EllCurve& E, const FieldPtr& K, Int& cursor) {
    while (cursor < K->card()) {
        FFElem x = K->nth_element(cursor);
        ++cursor;
        FFElem s = rhs_at(E, K, x);
        auto y = K->sqrt(s);
        if (y) return EPoint::affine(K, x, *y);
    }
    throw std::runtime_error("no affine point found on the curve");
}

struct MillerDegenerate {};

// one chord-or-tangent step: returns T + Q and the value at X of the
// line through T and Q divided by the vertical at T + Q
std::pair<EPoint, FFElem> miller_step(const EllCurve& E, const EPoint& T, const EPoint& Q,
                                      const EPoint& X) {
    const FieldPtr& K = X.K;
    if (T.inf) return {Q, K->one()};
    if (Q.inf) return {T, K->one()};
    if (T.x == Q.x && T.y == -Q.y) {
        FFElem v = X.x - T.x;
        if (v.is_zero()) throw MillerDegenerate{};
        return {EPoint::infinity(K), v};
    }
    FFElem lam;
    if (T == Q) {
        FFElem den = T.y + T.y;
        if (den.is_zero()) throw MillerDegenerate{};
        FFElem three = K->from_int(3);
        lam = (three * T.x * T.x + lift(K, E.a4)) / den;
    } else {
        lam = (Q.y - T.y) / (Q.x - T.x);
    }
    FFElem xs = lam * lam - T.x - Q.x;
    FFElem ys = lam * (T.x - xs) - T.y;
    EPoint S = EPoint::affine(K, xs, ys);
    FFElem num = X.y - T.y - lam * (X.x - T.x);
    FFElem den = X.x - S.x;
    if (num.is_zero() || den.is_zero()) throw MillerDegenerate{};
    return {S, num / den};
}

// f_{n,P} evaluated at X via double-and-add
FFElem miller_eval(const EllCurve& E, const EPoint& P, long n, const EPoint& X) {
    const FieldPtr& K = X.K;
    FFElem f = K->one();
    EPoint T = P;
    std::vector<int> bits;
    for (long m = n; m > 0; m >>= 1) bits.push_back(static_cast<int>(m & 1));
    for (std::size_t i = bits.size() - 1; i-- > 0;) {
        auto [T2, v] = miller_step(E, T, T, X);
        f = f * f * v;
        T = T2;
        if (bits[i]) {
            auto [T3, w] = miller_step(E, T, P, X);
            f = f * w;
            T = T3;
        }
    }
    if (f.is_zero()) throw MillerDegenerate{};
    return f;
}

} // namespace

Int curve_order(const FieldPtr& F, const FFElem& a4, const FFElem& a6) {
    Int n = 1; // the point at infinity
    if (F->degree() == 1) {
        // prime field: tabulate the nonzero squares once
        std::uint64_t q = F->p();
        std::vector<char> sq(q, 0);
        for (std::uint64_t y = 1; y < q; ++y) {
            unsigned __int128 yy = static_cast<unsigned __int128>(y) * y;
            sq[static_cast<std::uint64_t>(yy % q)] = 1;
        }
        std::uint64_t a = a4.coeffs().empty() ? 0 : a4.coeffs()[0];
        std::uint64_t b = a6.coeffs().empty() ? 0 : a6.coeffs()[0];
        for (std::uint64_t x = 0; x < q; ++x) {
            unsigned __int128 r = static_cast<unsigned __int128>(x) * x % q;
            r = r * x % q;
            r = (r + static_cast<unsigned __int128>(a) * x + b) % q;
            std::uint64_t v = static_cast<std::uint64_t>(r);
            if (v == 0)
                n += 1;
            else if (sq[v])
                n += 2;
        }
        return n;
    }
    for (Int k = 0; k < F->card(); ++k) {
        FFElem x = F->nth_element(k);
        FFElem s = x * x * x + a4 * x + a6;
        if (s.is_zero())
            n += 1;
        else if (F->is_square(s))
            n += 2;
    }
    return n;
}

EllCurve make_curve(const FieldPtr& F, const FFElem& a4, const FFElem& a6) {
    FFElem four = F->from_int(4), ts = F->from_int(27);
    FFElem disc = four * a4 * a4 * a4 + ts * a6 * a6;
    if (disc.is_zero()) throw std::invalid_argument("singular Weierstrass equation");
    Int t = F->card() + 1 - curve_order(F, a4, a6);
    return {F, a4, a6, t};
}

bool on_curve(const EllCurve& E, const EPoint& P) {
    if (P.inf) return true;
    return P.y * P.y == rhs_at(E, P.K, P.x);
}

EPoint ep_neg(const EPoint& P) {
    if (P.inf) return P;
    return EPoint::affine(P.K, P.x, -P.y);
}

EPoint ep_add(const EllCurve& E, const EPoint& P, const EPoint& Q) {
    if (P.inf) return Q;
    if (Q.inf) return P;
    const FieldPtr& K = P.K;
    if (P.x == Q.x && P.y == -Q.y) return EPoint::infinity(K);
    FFElem lam;
    if (P == Q) {
        FFElem three = K->from_int(3);
        lam = (three * P.x * P.x + lift(K, E.a4)) / (P.y + P.y);
    } else {
        lam = (Q.y - P.y) / (Q.x - P.x);
    }
    FFElem xs = lam * lam - P.x - Q.x;
    FFElem ys = lam * (P.x - xs) - P.y;
    return EPoint::affine(K, xs, ys);
}

EPoint ep_mul(const EllCurve& E, const Int& n, const EPoint& P) {
    Int m = n;
    EPoint B = P;
    if (m < 0) {
        m = -m;
        B = ep_neg(B);
    }
    EPoint acc = EPoint::infinity(P.K);
    while (m > 0) {
        if (mpz_odd_p(m.get_mpz_t())) acc = ep_add(E, acc, B);
        B = ep_add(E, B, B);
        m >>= 1;
    }
    return acc;
}

EPoint ep_frobenius(const EllCurve& E, const EPoint& P) {
    if (P.inf) return P;
    long n = static_cast<long>(E.F->degree());
    return EPoint::affine(P.K, P.x.frobenius_power(n), P.y.frobenius_power(n));
}

long ep_order(const EllCurve& E, const EPoint& P, long multiple) {
    long n = multiple;
    for (long r : prime_factors_long(multiple))
        while (n % r == 0 && ep_mul(E, Int(n / r), P).inf) n /= r;
    return n;
}

FFPoly division_polynomial(const EllCurve& E, long n) {
    if (n < 1 || n % 2 == 0) throw std::invalid_argument("odd division polynomial index required");
    const FieldPtr& F = E.F;
    FFElem a = E.a4, b = E.a6;
    auto c = [&](long k) { return F->from_int(k); };
    // psi_m = f_m for odd m, y * f_m for even m
    std::map<long, FFPoly> f;
    f[0] = {};
    f[1] = {F->one()};
    f[2] = {c(2)};
    f[3] = {-(a * a), c(12) * b, c(6) * a, F->zero(), c(3)};
    f[4] = {c(4) * (-(c(8) * b * b) - a * a * a), c(4) * (-(c(4) * a * b)),
            c(4) * (-(c(5) * a * a)), c(4) * (c(20) * b), c(4) * (c(5) * a), F->zero(), c(4)};
    FFPoly rhs = {b, a, F->zero(), F->one()};
    FFPoly rhs2 = poly_mul(rhs, rhs);
    FFElem half = c(2).inverse();
    std::function<const FFPoly&(long)> get = [&](long m) -> const FFPoly& {
        auto it = f.find(m);
        if (it != f.end()) return it->second;
        FFPoly out;
        if (m % 2 == 1) {
            long k = (m - 1) / 2;
            FFPoly t1 = poly_mul(get(k + 2), poly_mul(get(k), poly_mul(get(k), get(k))));
            FFPoly t2 = poly_mul(get(k - 1), poly_mul(get(k + 1), poly_mul(get(k + 1), get(k + 1))));
            if (k % 2 == 0)
                out = poly_sub(poly_mul(rhs2, t1), t2);
            else
                out = poly_sub(t1, poly_mul(rhs2, t2));
        } else {
            long k = m / 2;
            FFPoly t1 = poly_mul(get(k + 2), poly_mul(get(k - 1), get(k - 1)));
            FFPoly t2 = poly_mul(get(k - 2), poly_mul(get(k + 1), get(k + 1)));
            out = poly_mul(get(k), poly_sub(t1, t2));
            for (auto& cf : out) cf = cf * half;
        }
        return f.emplace(m, poly_trim(std::move(out))).first->second;
    };
    return get(n);
}

bool has_min_endoring(const EllCurve& E) {
    auto [R, pi] = order_from_frobenius(E.F->card(), E.t);
    (void)pi;
    if (R.f == 1) return true;
    for (long ell0 : prime_factors_long(R.f)) {
        if (ell0 == 2) {
            // scalar Frobenius on E[2] means the full 2-torsion is
            // rational, i.e. x^3 + a4 x + a6 splits over F_q
            FFPoly cubic = {E.a6, E.a4, E.F->zero(), E.F->one()};
            if (poly_roots(cubic, 7).size() == 3) return false;
            continue;
        }
        TorsionData td = torsion_data(E, ell0);
        if (td.pi[1] % ell0 == 0 && td.pi[2] % ell0 == 0 &&
            (td.pi[0] - td.pi[3]) % ell0 == 0)
            return false;
    }
    return true;
}

TorsionData torsion_data(const EllCurve& E, long ell) {
    const FieldPtr& F = E.F;
    if (ell < 3 || ell % 2 == 0) throw std::invalid_argument("odd torsion level required");
    if (Int(ell) % Int(F->p()) == 0) throw std::invalid_argument("torsion level divides the characteristic");
    FFPoly psi = division_polynomial(E, ell);
    auto factors = poly_factor(psi, 0x7051 + static_cast<std::uint64_t>(ell));
    long d = 1;
    for (const auto& [h, mult] : factors) {
        (void)mult;
        d = std::lcm<long>(d, poly_deg(h));
    }
    FieldPtr K1 = FiniteField::make_extension(F, static_cast<unsigned>(d),
                                              0x3a7 + static_cast<std::uint64_t>(ell));
    // x-coordinates of the nonzero ell-torsion, in deterministic order
    std::vector<FFElem> xs;
    for (const auto& [h, mult] : factors) {
        (void)mult;
        FFPoly hk;
        for (const auto& cf : h) hk.push_back(K1->embed(cf));
        for (const auto& r : poly_roots(hk, 0x11d)) xs.push_back(r);
    }
    bool all_square = true;
    for (const auto& x : xs)
        if (!K1->is_square(rhs_at(E, K1, x))) {
            all_square = false;
            break;
        }
    FieldPtr K = K1;
    long e = d;
    if (!all_square) {
        K = FiniteField::make_extension(K1, 2, 0x3a8 + static_cast<std::uint64_t>(ell));
        e = 2 * d;
    }
    std::vector<EPoint> pts;
    for (const auto& x : xs) {
        FFElem xk = lift(K, x);
        auto y = K->sqrt(rhs_at(E, K, xk));
        if (!y) throw std::runtime_error("torsion point not rational over the computed extension");
        pts.push_back(EPoint::affine(K, xk, *y));
    }
    std::vector<long> rs = prime_factors_long(ell);
    auto exact_order = [&](const EPoint& P) {
        for (long r : rs)
            if (ep_mul(E, Int(ell / r), P).inf) return false;
        return true;
    };
    auto exact_root_order = [&](const FFElem& z) {
        if (z.pow(ell) != K->one()) return false;
        for (long r : rs)
            if (z.pow(ell / r) == K->one()) return false;
        return true;
    };
    TorsionData td;
    td.ell = ell;
    td.ext_degree = e;
    td.K = K;
    std::size_t i0 = 0;
    while (i0 < pts.size() && !exact_order(pts[i0])) ++i0;
    if (i0 == pts.size()) throw std::runtime_error("no point of exact order found");
    td.b0 = pts[i0];
    bool have = false;
    for (std::size_t j = i0 + 1; j < pts.size() && !have; ++j) {
        if (!exact_order(pts[j])) continue;
        FFElem z = weil_pairing(E, td.b0, pts[j], ell);
        if (exact_root_order(z)) {
            td.b1 = pts[j];
            td.zeta = z;
            have = true;
        }
    }
    if (!have) throw std::runtime_error("no independent torsion point found");
    // Frobenius matrix: pi(b_i) = pi[2i]*b0 + pi[2i+1]*b1
    for (int i = 0; i < 2; ++i) {
        EPoint img = ep_frobenius(E, i == 0 ? td.b0 : td.b1);
        bool done = false;
        for (long a = 0; a < ell && !done; ++a) {
            EPoint ab = ep_mul(E, Int(a), td.b0);
            for (long b = 0; b < ell && !done; ++b)
                if (ep_add(E, ab, ep_mul(E, Int(b), td.b1)) == img) {
                    td.pi[2 * i] = a;
                    td.pi[2 * i + 1] = b;
                    done = true;
                }
        }
        if (!done) throw std::runtime_error("Frobenius image not in the torsion span");
    }
    return td;
}

FFElem weil_pairing(const EllCurve& E, const EPoint& P, const EPoint& Q, long ell) {
    const FieldPtr& K = P.K;
    if (P.inf || Q.inf || P == Q) return K->one();
    Int cursor = 0;
    for (int attempt = 0; attempt < 64; ++attempt) {
        EPoint S = scan_point(E, K, cursor);
        try {
            EPoint QS = ep_add(E, Q, S);
            EPoint PmS = ep_add(E, P, ep_neg(S));
            FFElem a = miller_eval(E, P, ell, QS) / miller_eval(E, P, ell, S);
            FFElem b = miller_eval(E, Q, ell, PmS) / miller_eval(E, Q, ell, ep_neg(S));
            return a / b;
        } catch (const MillerDegenerate&) {
            continue;
        }
    }
    throw std::runtime_error("no valid auxiliary point for the Weil pairing");
}

EllCurve velu_quotient(const EllCurve& E, const EPoint& G, long n) {
    const FieldPtr& F = E.F;
    if (n == 1 || G.inf) return E;
    if (n % 2 == 0) throw std::invalid_argument("odd quotient order required");
    if (!ep_mul(E, Int(n), G).inf) throw std::invalid_argument("generator order does not divide n");
    const FieldPtr& K = G.K;
    FFElem a4K = lift(K, E.a4);
    FFElem v = K->zero(), w = K->zero();
    EPoint Q = G;
    for (long i = 1; i < n; ++i) {
        if (Q.inf) throw std::invalid_argument("generator has order smaller than n");
        FFElem tQ = K->from_int(3) * Q.x * Q.x + a4K;
        FFElem uQ = (Q.y * Q.y) + (Q.y * Q.y);
        v = v + tQ;
        w = w + uQ + tQ * Q.x;
        Q = ep_add(E, Q, G);
    }
    FFElem a4n = lift(K, E.a4) - K->from_int(5) * v;
    FFElem a6n = lift(K, E.a6) - K->from_int(7) * w;
    auto a4d = K->down(a4n);
    auto a6d = K->down(a6n);
    FFElem a4q, a6q;
    if (K == F) {
        a4q = a4n;
        a6q = a6n;
    } else {
        // Galois-stable subgroups give coefficients in the base field
        if (!a4d || !a6d) throw std::invalid_argument("subgroup is not Galois stable");
        a4q = *a4d;
        a6q = *a6d;
        while (a4q.field() != F) {
            auto x4 = a4q.field()->down(a4q);
            auto x6 = a6q.field()->down(a6q);
            if (!x4 || !x6) throw std::invalid_argument("subgroup is not Galois stable");
            a4q = *x4;
            a6q = *x6;
        }
    }
    return make_curve(F, a4q, a6q);
}

std::vector<EllCurve> curves_with_trace_minring(std::uint64_t q, const Int& t, std::size_t limit) {
    // base field for the prime power q
    std::uint64_t p = q;
    unsigned n = 1;
    for (std::uint64_t d = 2; d * d <= q; ++d)
        if (q % d == 0) {
            p = d;
            n = 0;
            for (std::uint64_t m = q; m > 1; m /= d) {
                if (m % d != 0) throw std::invalid_argument("not a prime power");
                ++n;
            }
            break;
        }
    FieldPtr F = FiniteField::prime_field(p);
    if (n > 1) F = FiniteField::make_extension(F, n, 0xf1e1d);
    Int N = Int(q) + 1 - t;
    if (gcd(t, Int(p)) != 1) throw std::invalid_argument("ordinary trace required");

    std::vector<EllCurve> out;
    for (Int i = 0; i < F->card() && out.size() < limit; ++i) {
        FFElem a4 = F->nth_element(i);
        for (Int j = 0; j < F->card() && out.size() < limit; ++j) {
            FFElem a6 = F->nth_element(j);
            FFElem disc = F->from_int(4) * a4 * a4 * a4 + F->from_int(27) * a6 * a6;
            if (disc.is_zero()) continue;
            // cheap pre-filter: one affine point must be killed by N
            EllCurve cand{F, a4, a6, t};
            Int cursor = 0;
            EPoint P = scan_point(cand, F, cursor);
            if (!ep_mul(cand, N, P).inf) continue;
            if (curve_order(F, a4, a6) != N) continue;
            if (!has_min_endoring(cand)) continue;
            out.push_back(cand);
        }
    }
    if (out.empty()) throw std::runtime_error("no curve with the requested trace and minimal ring");
    return out;
}

} // namespace iso
