#include "iso/fieldtower.hpp"

#include <algorithm>
#include <cassert>
#include <functional>
#include <random>
#include <sstream>
#include <stdexcept>

namespace iso {

namespace {

using u64 = std::uint64_t;
using Poly = std::vector<u64>; // over F_p, c[0] + c[1] x + ...

void trim(Poly& a) {
    while (!a.empty() && a.back() == 0) a.pop_back();
}

int deg(const Poly& a) { return static_cast<int>(a.size()) - 1; }

u64 addm(u64 a, u64 b, u64 p) { u64 s = a + b; return s >= p ? s - p : s; }
u64 subm(u64 a, u64 b, u64 p) { return a >= b ? a - b : a + p - b; }

u64 powm_u64(u64 b, u64 e, u64 p) {
    u64 r = 1 % p;
    b %= p;
    while (e) {
        if (e & 1) r = (r * b) % p;
        b = (b * b) % p;
        e >>= 1;
    }
    return r;
}

u64 invm(u64 a, u64 p) {
    // p prime, a != 0
    return powm_u64(a % p, p - 2, p);
}

// Raw product; entries bounded by n*p^2, caller keeps p < 2^24 and n < 2^15.
Poly pmul(const Poly& a, const Poly& b, u64 p) {
    if (a.empty() || b.empty()) return {};
    Poly c(a.size() + b.size() - 1, 0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        u64 ai = a[i];
        if (!ai) continue;
        for (std::size_t j = 0; j < b.size(); ++j) c[i + j] += ai * b[j];
    }
    for (auto& x : c) x %= p;
    trim(c);
    return c;
}

Poly padd(const Poly& a, const Poly& b, u64 p) {
    Poly c(std::max(a.size(), b.size()), 0);
    for (std::size_t i = 0; i < c.size(); ++i) {
        u64 x = i < a.size() ? a[i] : 0, y = i < b.size() ? b[i] : 0;
        c[i] = addm(x, y, p);
    }
    trim(c);
    return c;
}

Poly psub(const Poly& a, const Poly& b, u64 p) {
    Poly c(std::max(a.size(), b.size()), 0);
    for (std::size_t i = 0; i < c.size(); ++i) {
        u64 x = i < a.size() ? a[i] : 0, y = i < b.size() ? b[i] : 0;
        c[i] = subm(x, y, p);
    }
    trim(c);
    return c;
}

// a mod m; m need not be monic.
Poly pmod(Poly a, const Poly& m, u64 p) {
    trim(a);
    int dm = deg(m);
    assert(dm >= 0);
    u64 lc_inv = invm(m.back(), p);
    while (deg(a) >= dm) {
        int da = deg(a);
        u64 c = (a.back() * lc_inv) % p;
        if (c) {
            for (int j = 0; j <= dm; ++j)
                a[da - dm + j] = subm(a[da - dm + j], (c * m[j]) % p, p);
        }
        a.pop_back();
        trim(a);
    }
    return a;
}

Poly pmulmod(const Poly& a, const Poly& b, const Poly& m, u64 p) {
    return pmod(pmul(a, b, p), m, p);
}

Poly ppowmod(Poly base, Int e, const Poly& m, u64 p) {
    Poly r = {1};
    base = pmod(std::move(base), m, p);
    while (e > 0) {
        if (mpz_odd_p(e.get_mpz_t())) r = pmulmod(r, base, m, p);
        base = pmulmod(base, base, m, p);
        e >>= 1;
    }
    return r;
}

Poly pgcd(Poly a, Poly b, u64 p) {
    trim(a);
    trim(b);
    while (!b.empty()) {
        Poly r = pmod(a, b, p);
        a = std::move(b);
        b = std::move(r);
    }
    if (!a.empty()) {
        u64 inv = invm(a.back(), p);
        for (auto& x : a) x = (x * inv) % p;
    }
    return a;
}

std::vector<unsigned> prime_divisors(unsigned n) {
    std::vector<unsigned> out;
    for (unsigned d = 2; d * d <= n; ++d)
        if (n % d == 0) {
            out.push_back(d);
            while (n % d == 0) n /= d;
        }
    if (n > 1) out.push_back(n);
    return out;
}

} // namespace

// ---------------- FiniteField ----------------

unsigned FiniteField::base_degree() const { return base_ ? base_->n_ : 1; }

std::vector<u64> FiniteField::reduce(std::vector<u64> v) const {
    if (n_ == 1) {
        u64 r = v.empty() ? 0 : v[0] % p_;
        return {r};
    }
    Poly w = pmod(std::move(v), mod_, p_);
    w.resize(n_, 0);
    return w;
}

FieldPtr FiniteField::prime_field(u64 p) {
    if (p < 3) throw std::invalid_argument("characteristic must be an odd prime");
    if (p >= (1ull << 24)) throw std::invalid_argument("characteristic too large");
    for (u64 d = 2; d * d <= p; ++d)
        if (p % d == 0) throw std::invalid_argument("characteristic must be prime");
    auto F = std::shared_ptr<FiniteField>(new FiniteField());
    F->p_ = p;
    F->n_ = 1;
    F->card_ = Int(static_cast<unsigned long>(p));
    F->mod_ = {0, 1};
    return F;
}

FFElem FiniteField::zero() const {
    return FFElem(shared_from_this(), std::vector<u64>(n_, 0));
}
FFElem FiniteField::one() const {
    std::vector<u64> c(n_, 0);
    c[0] = 1;
    return FFElem(shared_from_this(), c);
}
FFElem FiniteField::gen() const {
    std::vector<u64> c(n_, 0);
    if (n_ == 1)
        c[0] = 0;
    else
        c[1] = 1;
    return FFElem(shared_from_this(), c);
}
FFElem FiniteField::from_int(const Int& k) const {
    Int r = k % Int(static_cast<unsigned long>(p_));
    if (r < 0) r += Int(static_cast<unsigned long>(p_));
    std::vector<u64> c(n_, 0);
    c[0] = r.get_ui();
    return FFElem(shared_from_this(), c);
}
FFElem FiniteField::from_rat(const Rat& r) const {
    FFElem num = from_int(r.get_num());
    FFElem den = from_int(r.get_den());
    return num / den;
}
FFElem FiniteField::elem(std::vector<u64> c) const {
    for (auto& x : c) x %= p_;
    c.resize(std::max<std::size_t>(c.size(), n_), 0);
    return FFElem(shared_from_this(), reduce(std::move(c)));
}
FFElem FiniteField::nth_element(const Int& k) const {
    Int v = k;
    std::vector<u64> c(n_, 0);
    Int P(static_cast<unsigned long>(p_));
    for (unsigned i = 0; i < n_ && v > 0; ++i) {
        Int d = v % P;
        c[i] = d.get_ui();
        v /= P;
    }
    return FFElem(shared_from_this(), c);
}

namespace {
bool same_field(const FiniteField& a, const FiniteField& b) {
    return &a == &b || (a.p() == b.p() && a.degree() == b.degree() && a.modulus() == b.modulus());
}
} // namespace

FFElem FiniteField::embed(const FFElem& x) const {
    if (same_field(*x.field(), *this)) return FFElem(shared_from_this(), x.coeffs());
    if (!base_) throw std::invalid_argument("embed: element not in tower");
    FFElem y = same_field(*x.field(), *base_) ? x : base_->embed(x);
    // sum y.c[i] * gen_image^i
    std::vector<u64> acc(n_, 0);
    for (unsigned i = 0; i < base_->n_; ++i) {
        u64 c = y.coeffs()[i];
        if (!c) continue;
        const auto& pw = gen_image_pows_[i];
        for (unsigned j = 0; j < n_; ++j) acc[j] = (acc[j] + c * pw[j]) % p_;
    }
    return FFElem(shared_from_this(), acc);
}

void FiniteField::build_down_solver() {
    // Embedding matrix M: n_ x m, column i = gen_image^i. Row-reduce and
    // remember the operations as a full n_ x n_ transform.
    unsigned m = base_->n_;
    std::vector<std::vector<u64>> M(n_, std::vector<u64>(m, 0));
    for (unsigned i = 0; i < m; ++i)
        for (unsigned r = 0; r < n_; ++r) M[r][i] = gen_image_pows_[i][r];
    std::vector<std::vector<u64>> T(n_, std::vector<u64>(n_, 0));
    for (unsigned r = 0; r < n_; ++r) T[r][r] = 1;
    down_pivots_.assign(m, -1);
    unsigned row = 0;
    for (unsigned col = 0; col < m && row < n_; ++col) {
        unsigned pr = row;
        while (pr < n_ && M[pr][col] == 0) ++pr;
        if (pr == n_) continue; // cannot happen for injective embedding
        std::swap(M[pr], M[row]);
        std::swap(T[pr], T[row]);
        u64 inv = invm(M[row][col], p_);
        for (auto& x : M[row]) x = (x * inv) % p_;
        for (auto& x : T[row]) x = (x * inv) % p_;
        for (unsigned r = 0; r < n_; ++r) {
            if (r == row) continue;
            u64 c = M[r][col];
            if (!c) continue;
            for (unsigned j = 0; j < m; ++j) M[r][j] = subm(M[r][j], (c * M[row][j]) % p_, p_);
            for (unsigned j = 0; j < n_; ++j) T[r][j] = subm(T[r][j], (c * T[row][j]) % p_, p_);
        }
        down_pivots_[col] = static_cast<int>(row);
        ++row;
    }
    down_mat_ = std::move(T);
}

std::optional<FFElem> FiniteField::down(const FFElem& x) const {
    if (!base_) return std::nullopt;
    if (!same_field(*x.field(), *this)) {
        if (same_field(*x.field(), *base_)) return x;
        return std::nullopt;
    }
    unsigned m = base_->n_;
    // c = T*x ; solution coords at pivot rows, remaining rows must vanish.
    std::vector<u64> tv(n_, 0);
    for (unsigned r = 0; r < n_; ++r) {
        unsigned __int128 acc = 0;
        for (unsigned j = 0; j < n_; ++j) acc += static_cast<unsigned __int128>(down_mat_[r][j]) * x.coeffs()[j];
        tv[r] = static_cast<u64>(acc % p_);
    }
    std::vector<u64> c(m, 0);
    std::vector<bool> used(n_, false);
    for (unsigned col = 0; col < m; ++col) {
        if (down_pivots_[col] < 0) return std::nullopt;
        c[col] = tv[static_cast<unsigned>(down_pivots_[col])];
        used[static_cast<unsigned>(down_pivots_[col])] = true;
    }
    // Verify consistency by re-embedding.
    FFElem cand(base_, c);
    if (embed(cand) != x) return std::nullopt;
    return cand;
}

FieldPtr FiniteField::make_extension(FieldPtr base, unsigned degree, u64 seed) {
    if (degree == 0) throw std::invalid_argument("extension degree must be positive");
    if (degree == 1) return base;
    const u64 p = base->p();
    const unsigned m = base->n_;
    const unsigned n = m * degree;

    std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ull + p * 1000003ull + n * 0x100000001B3ull);

    // Find a monic irreducible g of degree `degree` over `base`.
    FFPoly g;
    auto rand_base_elem = [&]() {
        std::vector<u64> c(m, 0);
        for (unsigned i = 0; i < m; ++i) c[i] = rng() % p;
        return FFElem(base, c);
    };
    FFPoly X = {base->zero(), base->one()};
    std::vector<unsigned> eprimes = prime_divisors(degree);
    for (;;) {
        g.clear();
        for (unsigned i = 0; i < degree; ++i) g.push_back(rand_base_elem());
        g.push_back(base->one());
        // Irreducibility: x^(|K|^degree) == x mod g, and for each prime r | degree,
        // gcd(x^(|K|^(degree/r)) - x, g) = 1. Frobenius powers via composition.
        FFPoly h1 = poly_powmod(X, base->card(), g); // x^|K| mod g
        auto compose_mod = [&](const FFPoly& a, const FFPoly& b) {
            // a(b) mod g
            FFPoly r = {};
            for (int i = poly_deg(a); i >= 0; --i) {
                r = poly_mod(poly_mul(r, b), g);
                r = poly_add(r, {a[static_cast<std::size_t>(i)]});
            }
            return r;
        };
        auto frob_pow = [&](unsigned k) {
            // x^(|K|^k) mod g by binary composition
            FFPoly r = X, sq = h1;
            bool started = false;
            FFPoly acc;
            unsigned kk = k;
            while (kk) {
                if (kk & 1) {
                    acc = started ? compose_mod(acc, sq) : sq;
                    started = true;
                }
                kk >>= 1;
                if (kk) sq = compose_mod(sq, sq);
            }
            return started ? acc : r;
        };
        FFPoly top = frob_pow(degree);
        if (poly_deg(poly_sub(top, X)) >= 0) continue;
        bool ok = true;
        for (unsigned r : eprimes) {
            FFPoly hr = frob_pow(degree / r);
            FFPoly gg = poly_gcd(poly_sub(hr, X), g);
            if (poly_deg(gg) != 0) {
                ok = false;
                break;
            }
        }
        if (ok) break;
    }

    auto F = std::shared_ptr<FiniteField>(new FiniteField());
    F->p_ = p;
    F->n_ = n;
    mpz_pow_ui(F->card_.get_mpz_t(), Int(static_cast<unsigned long>(p)).get_mpz_t(), n);
    F->base_ = base;

    if (m == 1) {
        // Flat already; modulus is g with constant coefficients.
        Poly mod(n + 1, 0);
        for (unsigned i = 0; i <= n; ++i) mod[i] = g[i].coeffs()[0];
        F->mod_ = mod;
        F->gen_image_pows_ = {std::vector<u64>(n, 0)};
        F->gen_image_pows_[0][0] = 1; // embeds constants
        F->build_down_solver();
        return F;
    }

    // Tower arithmetic in base[z]/(g); flatten a generator gamma = z + c*y
    // (y = generator of base) whose minimal polynomial over F_p has degree n.
    auto flatten = [&](const FFPoly& t) {
        std::vector<u64> v(n, 0);
        for (unsigned i = 0; i < t.size(); ++i)
            for (unsigned j = 0; j < m; ++j) v[i * m + j] = t[i].coeffs()[j];
        return v;
    };
    for (u64 cshift = 0;; ++cshift) {
        FFPoly gamma = {base->gen() * base->from_int(Int(static_cast<unsigned long>(cshift))),
                        base->one()};
        // rows: flattened gamma^0..gamma^n
        std::vector<std::vector<u64>> pw(n + 1);
        FFPoly cur = {base->one()};
        for (unsigned i = 0; i <= n; ++i) {
            pw[i] = flatten(cur);
            if (i < n) cur = poly_mod(poly_mul(cur, gamma), g);
        }
        // Eliminate: rows 0..n-1 must be independent; then row n's expansion
        // in them gives the minimal polynomial.
        std::vector<std::vector<u64>> A(n, std::vector<u64>(n));
        for (unsigned i = 0; i < n; ++i) A[i] = pw[i];
        std::vector<std::vector<u64>> inv(n, std::vector<u64>(n, 0));
        for (unsigned i = 0; i < n; ++i) inv[i][i] = 1;
        bool singular = false;
        // Invert A^T-style: we solve x*A = target rows later, so invert A as
        // row-vector basis: standard Gauss-Jordan on A with inv tracking.
        std::vector<std::vector<u64>> Ac = A;
        for (unsigned col = 0, row = 0; col < n; ++col, ++row) {
            unsigned pr = row;
            while (pr < n && Ac[pr][col] == 0) ++pr;
            if (pr == n) {
                singular = true;
                break;
            }
            std::swap(Ac[pr], Ac[row]);
            std::swap(inv[pr], inv[row]);
            u64 iv = invm(Ac[row][col], p);
            for (unsigned j = 0; j < n; ++j) {
                Ac[row][j] = (Ac[row][j] * iv) % p;
                inv[row][j] = (inv[row][j] * iv) % p;
            }
            for (unsigned r = 0; r < n; ++r) {
                if (r == row) continue;
                u64 c = Ac[r][col];
                if (!c) continue;
                for (unsigned j = 0; j < n; ++j) {
                    Ac[r][j] = subm(Ac[r][j], (c * Ac[row][j]) % p, p);
                    inv[r][j] = subm(inv[r][j], (c * inv[row][j]) % p, p);
                }
            }
        }
        if (singular) continue;
        // coords w of a flattened vector v in the gamma-power basis:
        // sum_i w_i * pw[i] = v, i.e. w = v * A^{-1} with A's rows the powers.
        auto coords = [&](const std::vector<u64>& v) {
            std::vector<u64> w(n, 0);
            for (unsigned i = 0; i < n; ++i) {
                unsigned __int128 acc = 0;
                for (unsigned j = 0; j < n; ++j) acc += static_cast<unsigned __int128>(v[j]) * inv[j][i];
                w[i] = static_cast<u64>(acc % p);
            }
            return w;
        };
        std::vector<u64> mp = coords(pw[n]); // gamma^n = sum mp[i] gamma^i
        Poly mod(n + 1, 0);
        for (unsigned i = 0; i < n; ++i) mod[i] = (p - mp[i]) % p;
        mod[n] = 1;
        F->mod_ = mod;
        // Image of the base generator y in gamma-coordinates.
        FFPoly ypoly = {base->gen()};
        std::vector<u64> ycoord = coords(flatten(ypoly));
        F->gen_image_pows_.assign(m, std::vector<u64>(n, 0));
        F->gen_image_pows_[0][0] = 1;
        if (m > 1) F->gen_image_pows_[1] = ycoord;
        FFElem yimg(F, ycoord);
        FFElem acc = yimg;
        for (unsigned i = 2; i < m; ++i) {
            acc = acc * yimg;
            F->gen_image_pows_[i] = acc.coeffs();
        }
        F->build_down_solver();
        return F;
    }
}

bool FiniteField::is_square(const FFElem& x) const {
    if (x.is_zero()) return true;
    Int e = (card_ - 1) / 2;
    return x.pow(e).is_one();
}

std::optional<FFElem> FiniteField::sqrt(const FFElem& x) const {
    auto r = nth_roots(x, 2);
    if (r.empty()) return std::nullopt;
    return r.front();
}

std::vector<FFElem> FiniteField::nth_roots(const FFElem& x, unsigned n) const {
    if (n == 0) throw std::invalid_argument("nth_roots: n must be positive");
    if (p_ != 0 && n % p_ == 0) throw std::invalid_argument("nth_roots: n divisible by characteristic");
    if (x.is_zero()) return {zero()};
    std::vector<FFElem> roots = {x};
    for (unsigned r : prime_divisors(n)) {
        unsigned mult = 0;
        unsigned nn = n;
        while (nn % r == 0) {
            nn /= r;
            ++mult;
        }
        for (unsigned k = 0; k < mult; ++k) {
            std::vector<FFElem> next;
            for (const auto& y : roots) {
                auto rr = rth_roots_impl(y, r);
                next.insert(next.end(), rr.begin(), rr.end());
            }
            std::sort(next.begin(), next.end(), [](const FFElem& a, const FFElem& b) {
                return a.coeffs() < b.coeffs();
            });
            next.erase(std::unique(next.begin(), next.end()), next.end());
            roots = std::move(next);
            if (roots.empty()) return roots;
        }
    }
    return roots;
}

} // namespace iso

// rth_roots_impl needs access to private state; declare as member via a
// small extension of the class using a free function in namespace scope.
namespace iso {

std::vector<FFElem> FiniteField::rth_roots_impl(const FFElem& x, unsigned r) const {
    Int m = card_ - 1;
    Int R(static_cast<unsigned long>(r));
    if (m % R != 0) {
        // unique root
        Int inv_r;
        mpz_invert(inv_r.get_mpz_t(), R.get_mpz_t(), m.get_mpz_t());
        return {x.pow(inv_r)};
    }
    Int t = m;
    unsigned s = 0;
    while (t % R == 0) {
        t /= R;
        ++s;
    }
    Int S;
    mpz_pow_ui(S.get_mpz_t(), R.get_mpz_t(), s);
    // nonresidue
    FFElem z = zero();
    for (Int k = 2;; ++k) {
        z = nth_element(k);
        if (z.is_zero()) continue;
        if (!z.pow(m / R).is_one()) break;
    }
    FFElem rho = z.pow(t);           // order exactly r^s
    FFElem mu = rho.pow(S / R);      // order r
    // Pohlig-Hellman digits of X = x^t base rho.
    FFElem X = x.pow(t);
    std::vector<FFElem> mupow(r);
    mupow[0] = one();
    for (unsigned i = 1; i < r; ++i) mupow[i] = mupow[i - 1] * mu;
    Int e = 0;
    Int rpow = 1;
    FFElem cur = X;
    FFElem rho_inv = rho.inverse();
    for (unsigned j = 0; j < s; ++j) {
        FFElem probe = cur.pow(S / (rpow * R));
        unsigned d = r; // sentinel
        for (unsigned i = 0; i < r; ++i)
            if (probe == mupow[i]) {
                d = i;
                break;
            }
        if (d == r) return {}; // not in the subgroup: no root
        if (d) {
            e += rpow * Int(static_cast<unsigned long>(d));
            cur = cur * rho_inv.pow(rpow * Int(static_cast<unsigned long>(d)));
        }
        rpow *= R;
    }
    if (e % R != 0) return {};
    // alpha = r^{-1} mod t (alpha = 0 when t = 1); k = (r*alpha - 1)/t
    Int alpha = 0;
    if (t > 1) mpz_invert(alpha.get_mpz_t(), R.get_mpz_t(), t.get_mpz_t());
    Int kk = (R * alpha - 1) / t;
    Int c = ((e / R) * kk) % S;
    if (c < 0) c += S;
    FFElem y = x.pow(alpha) * rho.pow(S - c);
    std::vector<FFElem> out;
    FFElem w = one();
    FFElem zeta = rho.pow(S / R);
    for (unsigned i = 0; i < r; ++i) {
        out.push_back(y * w);
        w = w * zeta;
    }
    return out;
}

// ---------------- FFElem ----------------

FFElem::FFElem(FieldPtr F, std::vector<u64> coeffs) : F_(std::move(F)), c_(std::move(coeffs)) {
    c_.resize(F_->degree(), 0);
}

bool FFElem::is_zero() const {
    for (auto x : c_)
        if (x) return false;
    return true;
}
bool FFElem::is_one() const {
    if (c_.empty() || c_[0] != 1) return false;
    for (std::size_t i = 1; i < c_.size(); ++i)
        if (c_[i]) return false;
    return true;
}

bool FFElem::operator==(const FFElem& o) const {
    return same_field(*F_, *o.F_) && c_ == o.c_;
}

FFElem FFElem::operator+(const FFElem& o) const {
    assert(same_field(*F_, *o.F_));
    std::vector<u64> c(c_.size());
    u64 p = F_->p();
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = addm(c_[i], o.c_[i], p);
    return FFElem(F_, std::move(c));
}
FFElem FFElem::operator-(const FFElem& o) const {
    assert(same_field(*F_, *o.F_));
    std::vector<u64> c(c_.size());
    u64 p = F_->p();
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = subm(c_[i], o.c_[i], p);
    return FFElem(F_, std::move(c));
}
FFElem FFElem::operator-() const {
    std::vector<u64> c(c_.size());
    u64 p = F_->p();
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = c_[i] ? p - c_[i] : 0;
    return FFElem(F_, std::move(c));
}

FFElem FFElem::operator*(const FFElem& o) const {
    assert(same_field(*F_, *o.F_));
    const unsigned n = F_->degree();
    const u64 p = F_->p();
    if (n == 1) return FFElem(F_, {(c_[0] * o.c_[0]) % p});
    // Raw schoolbook product, then lazy reduction by the (monic) modulus.
    std::vector<u64> z(2 * n - 1, 0);
    for (unsigned i = 0; i < n; ++i) {
        u64 ai = c_[i];
        if (!ai) continue;
        for (unsigned j = 0; j < n; ++j) z[i + j] += ai * o.c_[j];
    }
    const auto& mod = F_->modulus();
    for (unsigned i = 2 * n - 2; i >= n; --i) {
        u64 c = z[i] % p;
        if (c) {
            for (unsigned j = 0; j < n; ++j) z[i - n + j] += c * (p - mod[j]);
        }
        z[i] = 0;
        if (i == n) break;
    }
    std::vector<u64> out(n);
    for (unsigned j = 0; j < n; ++j) out[j] = z[j] % p;
    return FFElem(F_, std::move(out));
}

FFElem FFElem::inverse() const {
    if (is_zero()) throw std::domain_error("inverse of zero");
    const u64 p = F_->p();
    if (F_->degree() == 1) return FFElem(F_, {invm(c_[0], p)});
    // extended Euclid over F_p[x]: r0 = modulus, r1 = this; track only the
    // coefficient of `this`.
    Poly r0 = F_->modulus();
    Poly r1(c_.begin(), c_.end());
    trim(r1);
    Poly u0 = {}, u1 = {1};
    while (!r1.empty()) {
        // r0 = q*r1 + rem
        Poly rem = r0, q;
        int db = deg(r1);
        u64 lc_inv = invm(r1.back(), p);
        q.assign(static_cast<std::size_t>(std::max(0, deg(r0) - db) + 1), 0);
        while (deg(rem) >= db) {
            int dr = deg(rem);
            u64 c = (rem.back() * lc_inv) % p;
            q[static_cast<std::size_t>(dr - db)] = c;
            for (int j = 0; j <= db; ++j)
                rem[static_cast<std::size_t>(dr - db + j)] =
                    subm(rem[static_cast<std::size_t>(dr - db + j)], (c * r1[static_cast<std::size_t>(j)]) % p, p);
            trim(rem);
        }
        trim(q);
        Poly nu = psub(u0, pmul(q, u1, p), p);
        r0 = std::move(r1);
        r1 = std::move(rem);
        u0 = std::move(u1);
        u1 = std::move(nu);
    }
    assert(deg(r0) == 0);
    u64 ainv = invm(r0[0], p);
    Poly res = u0;
    for (auto& x : res) x = (x * ainv) % p;
    res.resize(F_->degree(), 0);
    return FFElem(F_, res);
}

FFElem FFElem::operator/(const FFElem& o) const { return *this * o.inverse(); }

FFElem FFElem::pow(const Int& e) const {
    if (e < 0) return inverse().pow(-e);
    FFElem r = F_->one();
    FFElem b = *this;
    Int ee = e;
    while (ee > 0) {
        if (mpz_odd_p(ee.get_mpz_t())) r = r * b;
        b = b * b;
        ee >>= 1;
    }
    return r;
}

FFElem FFElem::frobenius() const { return pow(Int(static_cast<unsigned long>(F_->p()))); }
FFElem FFElem::frobenius_power(long k) const {
    Int e;
    long kk = ((k % F_->degree()) + F_->degree()) % F_->degree();
    mpz_pow_ui(e.get_mpz_t(), Int(static_cast<unsigned long>(F_->p())).get_mpz_t(),
               static_cast<unsigned long>(kk));
    return pow(e);
}

std::string FFElem::str() const {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < c_.size(); ++i) {
        if (i) os << ",";
        os << c_[i];
    }
    os << "]";
    return os.str();
}

// ---------------- generic polynomials ----------------

int poly_deg(const FFPoly& f) {
    for (int i = static_cast<int>(f.size()) - 1; i >= 0; --i)
        if (!f[static_cast<std::size_t>(i)].is_zero()) return i;
    return -1;
}

FFPoly poly_trim(FFPoly f) {
    int d = poly_deg(f);
    f.resize(static_cast<std::size_t>(d + 1));
    return f;
}

FFPoly poly_add(const FFPoly& a, const FFPoly& b) {
    FFPoly c = a;
    if (b.size() > c.size()) c.resize(b.size(), b.empty() ? FFElem() : b[0].field()->zero());
    for (std::size_t i = 0; i < b.size(); ++i) c[i] = (i < a.size()) ? a[i] + b[i] : b[i];
    return poly_trim(c);
}

FFPoly poly_sub(const FFPoly& a, const FFPoly& b) {
    if (b.empty()) return poly_trim(a);
    FFPoly nb(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) nb[i] = -b[i];
    return poly_add(a, nb);
}

FFPoly poly_mul(const FFPoly& a, const FFPoly& b) {
    if (poly_deg(a) < 0 || poly_deg(b) < 0) return {};
    auto F = a[0].field();
    FFPoly c(a.size() + b.size() - 1, F->zero());
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].is_zero()) continue;
        for (std::size_t j = 0; j < b.size(); ++j) {
            if (b[j].is_zero()) continue;
            c[i + j] = c[i + j] + a[i] * b[j];
        }
    }
    return poly_trim(c);
}

FFPoly poly_mod(FFPoly a, const FFPoly& m) {
    a = poly_trim(std::move(a));
    FFPoly mm = poly_trim(m);
    int dm = poly_deg(mm);
    if (dm < 0) throw std::domain_error("poly_mod by zero");
    FFElem lcinv = mm.back().inverse();
    while (poly_deg(a) >= dm) {
        int da = poly_deg(a);
        FFElem c = a.back() * lcinv;
        for (int j = 0; j <= dm; ++j) {
            std::size_t idx = static_cast<std::size_t>(da - dm + j);
            a[idx] = a[idx] - c * mm[static_cast<std::size_t>(j)];
        }
        a = poly_trim(std::move(a));
    }
    return a;
}

FFPoly poly_divexact(const FFPoly& a, const FFPoly& b) {
    FFPoly r = poly_trim(a), q;
    FFPoly bb = poly_trim(b);
    int db = poly_deg(bb);
    if (db < 0) throw std::domain_error("division by zero polynomial");
    if (poly_deg(r) < db) return {};
    auto F = bb[0].field();
    q.assign(static_cast<std::size_t>(poly_deg(r) - db + 1), F->zero());
    FFElem lcinv = bb.back().inverse();
    while (poly_deg(r) >= db) {
        int dr = poly_deg(r);
        FFElem c = r.back() * lcinv;
        q[static_cast<std::size_t>(dr - db)] = c;
        for (int j = 0; j <= db; ++j) {
            std::size_t idx = static_cast<std::size_t>(dr - db + j);
            r[idx] = r[idx] - c * bb[static_cast<std::size_t>(j)];
        }
        r = poly_trim(std::move(r));
    }
    return q;
}

FFPoly poly_monic(FFPoly f) {
    f = poly_trim(std::move(f));
    if (f.empty()) return f;
    FFElem inv = f.back().inverse();
    for (auto& c : f) c = c * inv;
    return f;
}

FFPoly poly_gcd(FFPoly a, FFPoly b) {
    a = poly_trim(std::move(a));
    b = poly_trim(std::move(b));
    while (poly_deg(b) >= 0) {
        FFPoly r = poly_mod(a, b);
        a = std::move(b);
        b = std::move(r);
    }
    return poly_monic(a);
}

FFPoly poly_powmod(const FFPoly& base, const Int& e, const FFPoly& m) {
    auto F = poly_trim(m)[0].field();
    FFPoly r = {F->one()};
    FFPoly b = poly_mod(base, m);
    Int ee = e;
    while (ee > 0) {
        if (mpz_odd_p(ee.get_mpz_t())) r = poly_mod(poly_mul(r, b), m);
        b = poly_mod(poly_mul(b, b), m);
        ee >>= 1;
    }
    return r;
}

FFElem poly_eval(const FFPoly& f, const FFElem& x) {
    FFElem r = x.field()->zero();
    for (int i = poly_deg(f); i >= 0; --i) r = r * x + f[static_cast<std::size_t>(i)];
    return r;
}

FFPoly poly_derivative(const FFPoly& f) {
    if (f.size() <= 1) return {};
    auto F = f[0].field();
    FFPoly d(f.size() - 1, F->zero());
    for (std::size_t i = 1; i < f.size(); ++i) d[i - 1] = f[i] * F->from_int(Int(static_cast<unsigned long>(i)));
    return poly_trim(d);
}

namespace {

// Split a product of distinct irreducibles of the same degree d.
void edf(const FFPoly& f, unsigned d, std::mt19937_64& rng, std::vector<FFPoly>& out) {
    int df = poly_deg(f);
    if (df <= 0) return;
    if (static_cast<unsigned>(df) == d) {
        out.push_back(poly_monic(f));
        return;
    }
    auto F = f[0].field();
    Int qd;
    mpz_pow_ui(qd.get_mpz_t(), F->card().get_mpz_t(), d);
    Int e = (qd - 1) / 2;
    for (;;) {
        FFPoly a(static_cast<std::size_t>(df), F->zero());
        for (auto& c : a) c = F->nth_element(Int(static_cast<unsigned long>(rng() % 1000000007ull)));
        FFPoly h = poly_powmod(a, e, f);
        h = poly_sub(h, {F->one()});
        FFPoly g = poly_gcd(h, f);
        int dg = poly_deg(g);
        if (dg > 0 && dg < df) {
            edf(g, d, rng, out);
            edf(poly_divexact(f, g), d, rng, out);
            return;
        }
    }
}

} // namespace

std::vector<std::pair<FFPoly, unsigned>> poly_factor(const FFPoly& fin, u64 seed) {
    std::vector<std::pair<FFPoly, unsigned>> result;
    FFPoly f = poly_monic(poly_trim(fin));
    if (poly_deg(f) <= 0) return result;
    auto F = f[0].field();
    std::mt19937_64 rng(seed ^ 0xA5A5A5A55A5A5A5Aull);

    // Squarefree decomposition (odd characteristic).
    struct Item {
        FFPoly poly;
        unsigned mult;
    };
    std::vector<Item> square_free;
    std::function<void(FFPoly, unsigned)> sff = [&](FFPoly g, unsigned mult) {
        while (poly_deg(g) > 0) {
            FFPoly d = poly_derivative(g);
            if (poly_deg(d) < 0) {
                // g = h(x^p): take p-th roots of coefficients
                unsigned p = static_cast<unsigned>(F->p());
                FFPoly h((static_cast<std::size_t>(poly_deg(g)) / p) + 1, F->zero());
                Int proot = F->card() / Int(static_cast<unsigned long>(F->p()));
                for (std::size_t i = 0; i < h.size(); ++i) h[i] = g[i * p].pow(proot);
                g = std::move(h);
                mult *= p;
                continue;
            }
            FFPoly c = poly_gcd(g, d);
            FFPoly w = poly_divexact(g, c);
            unsigned i = 1;
            while (poly_deg(w) > 0) {
                FFPoly y = poly_gcd(w, c);
                FFPoly part = poly_divexact(w, y);
                if (poly_deg(part) > 0) square_free.push_back({poly_monic(part), mult * i});
                w = std::move(y);
                c = poly_divexact(c, w);
                ++i;
            }
            g = std::move(c);
            if (poly_deg(g) > 0) {
                sff(g, mult * i);
                return;
            }
        }
    };
    sff(f, 1);

    for (auto& item : square_free) {
        // Distinct-degree on item.poly
        FFPoly g = item.poly;
        FFPoly X = {F->zero(), F->one()};
        FFPoly h = X;
        unsigned d = 0;
        while (poly_deg(g) > 0) {
            ++d;
            if (2 * d > static_cast<unsigned>(poly_deg(g))) {
                result.push_back({poly_monic(g), item.mult});
                break;
            }
            h = poly_powmod(h, F->card(), g);
            FFPoly gd = poly_gcd(poly_sub(h, X), g);
            if (poly_deg(gd) > 0) {
                std::vector<FFPoly> irr;
                edf(gd, d, rng, irr);
                for (auto& pI : irr) result.push_back({pI, item.mult});
                g = poly_divexact(g, gd);
                h = poly_mod(h, g);
            }
        }
    }
    std::sort(result.begin(), result.end(), [](const auto& a, const auto& b) {
        if (a.first.size() != b.first.size()) return a.first.size() < b.first.size();
        for (std::size_t i = a.first.size(); i-- > 0;) {
            if (a.first[i].coeffs() != b.first[i].coeffs()) return a.first[i].coeffs() < b.first[i].coeffs();
        }
        return a.second < b.second;
    });
    return result;
}

std::vector<FFElem> poly_roots(const FFPoly& fin, u64 seed) {
    FFPoly f = poly_monic(poly_trim(fin));
    std::vector<FFElem> roots;
    if (poly_deg(f) <= 0) return roots;
    auto F = f[0].field();
    FFPoly X = {F->zero(), F->one()};
    FFPoly xq = poly_powmod(X, F->card(), f);
    FFPoly lin = poly_gcd(poly_sub(xq, X), f);
    std::mt19937_64 rng(seed ^ 0xC3C3C3C3C3C3C3C3ull);
    std::function<void(FFPoly)> split = [&](FFPoly g) {
        int dg = poly_deg(g);
        if (dg <= 0) return;
        if (dg == 1) {
            roots.push_back(-g[0] / g[1]);
            return;
        }
        Int e = (F->card() - 1) / 2;
        for (;;) {
            FFElem a = F->nth_element(Int(static_cast<unsigned long>(rng() % 1000000007ull)));
            FFPoly h = poly_powmod({a, F->one()}, e, g);
            h = poly_sub(h, {F->one()});
            FFPoly d = poly_gcd(h, g);
            int dd = poly_deg(d);
            if (dd > 0 && dd < dg) {
                split(d);
                split(poly_divexact(g, d));
                return;
            }
        }
    };
    split(lin);
    std::sort(roots.begin(), roots.end(),
              [](const FFElem& a, const FFElem& b) { return a.coeffs() < b.coeffs(); });
    return roots;
}

} // namespace iso
