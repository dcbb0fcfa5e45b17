#include "iso/quadorder.hpp"

#include <cassert>
#include <stdexcept>

namespace iso {

QOElem QOElem::inverse() const {
    Rat n = nr();
    if (n == 0) throw std::domain_error("inverse of zero");
    return {a / n, -b / n, dF};
}

namespace {

// Basis of { x in F : x * rowlat(B2) <= rowlat(B1) }, x written in
// (1, sqrt(d_F)) coordinates. Pure lattice computation, no FracIdeal.
QMat colon_basis(const QMat& B1, const QMat& B2, long dF) {
    auto B1inv = qmat_inverse(B1);
    assert(B1inv.has_value());
    QMat functionals; // rows c: the condition is <c, (u,v)> in Z for x = u + v sqrt(dF)
    for (int j = 0; j < 2; ++j) {
        Rat a = B2[j][0], b = B2[j][1];
        // (u + v s)(a + b s) = (ua + vb dF) + (ub + va) s, coords row = (u,v) M^T
        QMat M = {{a, b * Rat(dF)}, {b, a}};
        QMat C = qmat_mul(qmat_transpose(M), *B1inv);
        for (int k = 0; k < 2; ++k) functionals.push_back({C[0][k], C[1][k]});
    }
    return qmat_lattice_dual(qmat_lattice_hnf(functionals));
}

} // namespace

FracIdeal FracIdeal::make(const QuadOrder& R, QMat rows) {
    FracIdeal I;
    I.R_ = R;
    I.B_ = qmat_lattice_hnf(rows);
    if (I.B_.empty()) return I; // zero module
    if (I.B_.size() != 2) throw std::invalid_argument("fractional ideal must have Z-rank 2");
    // multiplicator ring (a:a) = Z + f' omega Z; its projection to the
    // sqrt(d_F) coordinate is the ideal (f'/2)Z, so f' is twice the gcd
    // of the second column of any basis.
    QMat mr = qmat_lattice_hnf(colon_basis(I.B_, I.B_, R.dF));
    assert(mr.size() == 2);
    auto rgcd = [](const Rat& x, const Rat& y) -> Rat {
        Int n;
        mpz_gcd(n.get_mpz_t(), Int(x.get_num() * y.get_den()).get_mpz_t(),
                Int(y.get_num() * x.get_den()).get_mpz_t());
        return Rat(n) / Rat(x.get_den() * y.get_den());
    };
    Rat f2 = rgcd(mr[0][1], mr[1][1]) * 2;
    assert(f2.get_den() == 1 && f2 > 0);
    I.mult_f_ = static_cast<long>(f2.get_num().get_si());
    return I;
}

FracIdeal FracIdeal::from_gens(const QuadOrder& R, const std::vector<QOElem>& gens) {
    QMat rows;
    QOElem fw = R.gen();
    for (const auto& g : gens) {
        rows.push_back({g.a, g.b});
        QOElem gw = g * fw;
        rows.push_back({gw.a, gw.b});
    }
    return make(R, rows);
}

FracIdeal FracIdeal::from_basis(const QuadOrder& R, const QOElem& b1, const QOElem& b2) {
    QMat rows = {{b1.a, b1.b}, {b2.a, b2.b}};
    return make(R, rows);
}

FracIdeal FracIdeal::unit(const QuadOrder& R) {
    return from_gens(R, {R.from_rat(Rat(1))});
}

FracIdeal FracIdeal::maximal_order_ideal(const QuadOrder& R) {
    return from_basis(R, R.from_rat(Rat(1)), R.omega());
}

bool FracIdeal::contains(const QOElem& x) const {
    auto sol = qmat_solve_left(B_, {x.a, x.b});
    if (!sol) return false;
    return (*sol)[0].get_den() == 1 && (*sol)[1].get_den() == 1;
}

FracIdeal FracIdeal::mul(const FracIdeal& o) const {
    QMat rows;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            QOElem p = basis_elem(i) * o.basis_elem(j);
            rows.push_back({p.a, p.b});
        }
    return make(R_, rows);
}

FracIdeal FracIdeal::mul(const QOElem& x) const {
    QMat rows;
    for (int i = 0; i < 2; ++i) {
        QOElem p = basis_elem(i) * x;
        rows.push_back({p.a, p.b});
    }
    return make(R_, rows);
}

FracIdeal FracIdeal::add(const FracIdeal& o) const {
    QMat rows = B_;
    rows.insert(rows.end(), o.B_.begin(), o.B_.end());
    return make(R_, rows);
}

FracIdeal FracIdeal::intersect(const FracIdeal& o) const {
    return make(R_, qmat_lattice_intersect(B_, o.B_));
}

FracIdeal FracIdeal::conj() const {
    QMat rows = B_;
    for (auto& r : rows) r[1] = -r[1];
    return make(R_, rows);
}

FracIdeal FracIdeal::colon(const FracIdeal& o) const {
    return make(R_, colon_basis(B_, o.B_, R_.dF));
}

FracIdeal FracIdeal::dual() const {
    return FracIdeal::unit(R_).colon(*this).conj();
}

Rat FracIdeal::index_in_order() const {
    QMat RB = FracIdeal::unit(R_).basis();
    Rat q = qmat_det(B_) / qmat_det(RB);
    if (q < 0) q = -q;
    return q;
}

// ---------------- arithmetic helpers ----------------

Int smallest_prime_factor(const Int& q) {
    Int n = q;
    if (n < 0) n = -n;
    for (Int d = 2; d * d <= n; ++d)
        if (n % d == 0) return d;
    return n;
}

bool is_prime_power(const Int& q, Int* p_out, unsigned* e_out) {
    if (q < 2) return false;
    Int p = smallest_prime_factor(q);
    Int n = q;
    unsigned e = 0;
    while (n % p == 0) {
        n /= p;
        ++e;
    }
    if (n != 1) return false;
    if (p_out) *p_out = p;
    if (e_out) *e_out = e;
    return true;
}

std::pair<QuadOrder, QOElem> order_from_frobenius(const Int& q, const Int& t) {
    Int p;
    unsigned e;
    if (!is_prime_power(q, &p, &e)) throw std::invalid_argument("q must be a prime power");
    if (t * t >= 4 * q) throw std::invalid_argument("trace out of the imaginary range");
    if (t % p == 0) throw std::invalid_argument("not ordinary: p divides t");
    Int disc = t * t - 4 * q; // negative
    // disc = c^2 * m, m squarefree negative
    Int m = disc, c = 1;
    for (Int d = 2; d * d <= -m; ++d)
        while (m % (d * d) == 0) {
            m /= d * d;
            c *= d;
        }
    Int rem = ((m % 4) + 4) % 4;
    long dF;
    Int half; // pi = t/2 + (half/2) sqrt(dF)
    if (rem == 1) {
        dF = static_cast<long>(m.get_si());
        half = c;
    } else {
        dF = static_cast<long>(Int(4 * m).get_si());
        assert(c % 2 == 0);
        half = c / 2;
    }
    long f = static_cast<long>(half.get_si()); // disc = f^2 dF
    QuadOrder R{dF, f};
    assert(Int(R.disc()) == disc);
    QOElem pi{Rat(t) / 2, Rat(half) / 2, dF};
    assert(pi.tr() == Rat(t));
    assert(pi.nr() == Rat(q));
    return {R, pi};
}

int legendre(const Int& a, const Int& p) {
    Int base = ((a % p) + p) % p;
    Int ex = (p - 1) / 2;
    Int r;
    mpz_powm(r.get_mpz_t(), base.get_mpz_t(), ex.get_mpz_t(), p.get_mpz_t());
    if (r == 0) return 0;
    return r == 1 ? 1 : -1;
}

int hilbert_symbol_2(const Int& u, const Int& v) {
    if (u % 2 == 0 || v % 2 == 0) throw std::invalid_argument("hilbert_symbol_2 needs odd arguments");
    auto eps = [](const Int& x) {
        Int m = ((x % 4) + 4) % 4;
        return m == 3;
    };
    return (eps(u) && eps(v)) ? -1 : 1;
}

bool norm_class_contains(const QuadOrder& R, const Int& p, const Int& u) {
    if (u % p == 0) throw std::invalid_argument("u must be a unit at p");
    long dF = R.dF, f = R.f;
    if (p != 2) {
        if ((Int(f) * Int(dF)) % p != 0) return true;
        return legendre(u, p) == 1;
    }
    auto mod8 = [](const Int& x) {
        Int m = ((x % 8) + 8) % 8;
        return m.get_ui();
    };
    unsigned long u8 = mod8(u);
    if (dF % 2 != 0 && f % 4 != 0) return true;
    if (dF % 8 == 0 && f % 2 != 0) {
        unsigned long w = mod8(Int(1 - dF / 4));
        return u8 == 1 || u8 == w;
    }
    if ((Int(f) * Int(f) * Int(dF)) % 32 == 0) return u8 == 1;
    return u8 == 1 || u8 == 5;
}

std::optional<std::pair<FracIdeal, FracIdeal>> split_prime_ideals(const QuadOrder& R, const Int& p) {
    if (p == 2 || (Int(R.f) * Int(R.dF)) % p == 0) return std::nullopt;
    Int dmod = ((Int(R.dF) % p) + p) % p;
    if (legendre(dmod, p) != 1) return std::nullopt;
    Int s = -1;
    for (Int x = 0; x < p; ++x) // p stays small throughout this project
        if ((x * x - dmod) % p == 0) {
            s = x;
            break;
        }
    assert(s >= 0);
    // f*omega = (f dF + f sqrt(dF))/2, its residue above p is f(dF + s)/2 mod p
    Int inv2;
    mpz_invert(inv2.get_mpz_t(), Int(2).get_mpz_t(), p.get_mpz_t());
    Int c = Int(R.f) * (Int(R.dF) + s) % p * inv2 % p;
    c = ((c % p) + p) % p;
    QOElem fw = R.gen();
    FracIdeal P = FracIdeal::from_gens(R, {R.from_rat(Rat(p)), fw - R.from_rat(Rat(c))});
    FracIdeal Pbar = P.conj();
    assert(!(P == Pbar));
    assert(P.mul(Pbar) == FracIdeal::unit(R).mul(R.from_rat(Rat(p))));
    return std::make_pair(P, Pbar);
}

} // namespace iso
