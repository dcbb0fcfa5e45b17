#include "iso/classify.hpp"

#include <algorithm>
#include <cassert>
#include <cstdlib>
#include <deque>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

namespace iso {

namespace {

// ---------------- small helpers ----------------

Int rat_mod(const Rat& r, const Int& p) {
    Int num = r.get_num() % p;
    Int den = r.get_den() % p;
    Int inv;
    int ok = mpz_invert(inv.get_mpz_t(), den.get_mpz_t(), p.get_mpz_t());
    if (!ok) throw std::domain_error("rational not p-integral");
    return ((num * inv) % p + p) % p;
}

Int inv_mod(const Int& a, const Int& p) {
    Int inv;
    Int ared = ((a % p) + p) % p;
    int ok = mpz_invert(inv.get_mpz_t(), ared.get_mpz_t(), p.get_mpz_t());
    if (!ok) throw std::domain_error("not invertible mod p");
    return inv;
}

bool in_order(const QuadOrder& R, const QOElem& x) {
    // x = s + t*(f*omega) with t = 2b/f, s = a - b*d_F
    Rat t = Rat(2) * x.b / Rat(R.f);
    Rat s = x.a - x.b * Rat(R.dF);
    return t.get_den() == 1 && s.get_den() == 1;
}

bool is_split(long dF, const Int& p) {
    if (p == 2) return dF % 2 != 0 && ((dF % 8) + 8) % 8 == 1;
    if (Int(dF) % p == 0) return false;
    return legendre(Int(dF), p) == 1;
}

std::vector<Int> prime_divisors(Int n) {
    if (n < 0) n = -n;
    std::vector<Int> out;
    for (Int d = 2; d * d <= n; ++d)
        if (n % d == 0) {
            out.push_back(d);
            while (n % d == 0) n /= d;
        }
    if (n > 1) out.push_back(n);
    return out;
}

FVec vec_scaled(const QOElem& c, const FVec& v) {
    FVec r;
    r.reserve(v.size());
    for (const auto& x : v) r.push_back(c * x);
    return r;
}

FVec vec_sum(const FVec& a, const FVec& b) {
    FVec r;
    r.reserve(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r.push_back(a[i] + b[i]);
    return r;
}

QVec row_combo(const std::vector<Int>& c, const QMat& B) {
    QVec r(B[0].size(), Rat(0));
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (c[i] == 0) continue;
        for (std::size_t j = 0; j < r.size(); ++j) r[j] += Rat(c[i]) * B[i][j];
    }
    return r;
}

std::string zkey(const QMat& B) {
    std::ostringstream os;
    for (const auto& row : B)
        for (const auto& x : row) os << x.get_str() << ';';
    return os.str();
}

// A * L for a (fractional) ideal A
HermLattice scale_by_ideal(const HermLattice& L, const FracIdeal& A) {
    QMat rows;
    for (std::size_t i = 0; i < L.zbasis().size(); ++i) {
        FVec v = L.basis_vec(i);
        for (int j = 0; j < 2; ++j)
            rows.push_back(L.flat_from_vec(vec_scaled(A.basis_elem(j), v)));
    }
    return HermLattice::from_zbasis(L.space(), rows);
}

bool is_unimodular(const HermLattice& L) {
    IntegralClass c = classify_integral(L);
    return c == IntegralClass::OddUnimodular || c == IntegralClass::EvenUnimodular;
}

// residue map R_(p) -> R/P = F_p for a prime ideal P of norm p
struct ResidueMap {
    QuadOrder R;
    Int p;
    Int c; // f*omega = c (mod P)

    static ResidueMap make(const QuadOrder& R, const FracIdeal& P) {
        Rat idx = P.index_in_order();
        assert(idx.get_den() == 1);
        Int p = idx.get_num();
        QOElem gen = R.gen();
        for (Int c = 0; c < p; ++c)
            if (P.contains(gen - R.from_rat(Rat(c)))) return {R, p, c};
        throw std::invalid_argument("ideal has no rational residue field");
    }

    Int operator()(const QOElem& y) const {
        Rat t = Rat(2) * y.b / Rat(R.f);
        Rat s = y.a - y.b * Rat(R.dF);
        return (rat_mod(s, p) + rat_mod(t, p) * (c % p)) % p;
    }
};

// isometry-class registry with a fingerprint prefilter
struct ClassRegistry {
    std::vector<HermLattice> classes;
    std::vector<std::string> fps;

    // returns true if L was new
    bool insert(const HermLattice& L) {
        std::string fp = L.fingerprint();
        for (std::size_t i = 0; i < classes.size(); ++i)
            if (fps[i] == fp && is_isometric(classes[i], L)) return false;
        classes.push_back(L);
        fps.push_back(fp);
        return true;
    }
};

std::vector<Int> pick_neighbour_primes(const QuadOrder& R, const ClassifyOptions& opts) {
    Int fd = Int(R.f) * Int(R.dF);
    if (!opts.neighbour_primes.empty()) {
        for (const Int& p : opts.neighbour_primes)
            if (p == 2 || fd % p == 0 || !is_split(R.dF, p))
                throw std::invalid_argument("neighbour primes must be odd, split and coprime to f*d_F");
        return opts.neighbour_primes;
    }
    std::vector<Int> out;
    for (Int p = 3; p <= opts.neighbour_prime_bound && out.size() < 2; p += 2) {
        if (smallest_prime_factor(p) != p) continue;
        if (fd % p == 0 || !is_split(R.dF, p)) continue;
        out.push_back(p);
    }
    if (out.empty())
        throw std::runtime_error("no odd split neighbour prime below the configured bound; "
                                 "raise neighbour_prime_bound");
    return out;
}

// close a set of seed lattices under P-neighbours at the given primes
std::vector<HermLattice> genus_closure(const std::vector<HermLattice>& seeds,
                                       const std::vector<Int>& primes) {
    ClassRegistry reg;
    std::deque<std::size_t> work;
    for (const auto& s : seeds)
        if (reg.insert(s)) work.push_back(reg.classes.size() - 1);
    const QuadOrder& R = seeds.front().space().R;
    std::vector<FracIdeal> ideals;
    for (const Int& p : primes) {
        auto pr = split_prime_ideals(R, p);
        assert(pr.has_value());
        ideals.push_back(pr->first);
        ideals.push_back(pr->second);
    }
    while (!work.empty()) {
        HermLattice L = reg.classes[work.front()];
        work.pop_front();
        for (const auto& P : ideals)
            for (const auto& N : neighbours(L, P))
                if (reg.insert(N)) work.push_back(reg.classes.size() - 1);
    }
    return reg.classes;
}

// greedy ascent to a maximal integral overlattice
HermLattice ascend_maximal(HermLattice L) {
    const HermSpace& V = L.space();
    const QuadOrder& R = V.R;
    std::size_t n = L.zbasis().size();
    for (;;) {
        HermLattice D = dual_lattice(L);
        Rat idx = L.index_in(D);
        assert(idx.get_den() == 1);
        if (idx == 1) return L;
        bool improved = false;
        for (const Int& p : prime_divisors(idx.get_num())) {
            // candidates x in (1/p)L / L, one per line
            std::vector<Int> c(n, 0);
            std::size_t lead = n;
            auto next = [&]() -> bool {
                // iterate normalized coefficient vectors: c[lead] = 1,
                // earlier entries zero, later entries free
                if (lead == n) {
                    lead = n - 1;
                    c.assign(n, 0);
                    c[lead] = 1;
                    return true;
                }
                for (std::size_t i = n; i-- > lead + 1;) {
                    if (c[i] + 1 < p) {
                        ++c[i];
                        return true;
                    }
                    c[i] = 0;
                }
                if (lead == 0) return false;
                c.assign(n, 0);
                --lead;
                c[lead] = 1;
                return true;
            };
            while (next()) {
                QVec flat = row_combo(c, L.zbasis());
                for (auto& x : flat) x /= Rat(p);
                FVec x = L.vec_from_flat(flat);
                if (!D.contains(x)) continue;
                if (!in_order(R, V.h(x, x))) continue;
                QMat rows = L.zbasis();
                rows.push_back(flat);
                rows.push_back(L.flat_from_vec(vec_scaled(R.gen(), x)));
                HermLattice E = HermLattice::from_zbasis(V, rows);
                if (E == L) continue;
                if (classify_integral(E) == IntegralClass::NonIntegral) continue;
                L = E;
                improved = true;
                break;
            }
            if (improved) break;
        }
        if (!improved) return L;
    }
}

// search for an even unimodular lattice agreeing with L away from 2
std::optional<HermLattice> find_even_unimodular(const HermLattice& L) {
    const HermSpace& V = L.space();
    const QuadOrder& R = V.R;
    std::size_t n = L.zbasis().size();
    // index-2 stable sublattices K with 2L <= K <= L, then even
    // unimodular overlattices K + R*x with x in (1/2)K
    std::size_t masks = (std::size_t{1} << n);
    for (std::size_t t = 1; t < masks; ++t) {
        std::size_t pivot = 0;
        while (!((t >> pivot) & 1)) ++pivot;
        QMat rows;
        for (std::size_t i = 0; i < n; ++i) {
            if (i == pivot) continue;
            std::vector<Int> c(n, 0);
            c[i] = 1;
            if ((t >> i) & 1) c[pivot] = 1; // e_i + e_pivot kills the functional mod 2
            rows.push_back(row_combo(c, L.zbasis()));
        }
        {
            std::vector<Int> c(n, 0);
            c[pivot] = 2;
            rows.push_back(row_combo(c, L.zbasis()));
        }
        HermLattice K = L;
        try {
            K = HermLattice::from_zbasis(V, rows);
        } catch (const std::exception&) {
            continue; // subgroup not stable under the order
        }
        for (std::size_t m = 1; m < masks; ++m) {
            std::vector<Int> c(n, 0);
            for (std::size_t i = 0; i < n; ++i) c[i] = (m >> i) & 1;
            QVec flat = row_combo(c, K.zbasis());
            for (auto& x : flat) x /= 2;
            FVec x = K.vec_from_flat(flat);
            if (!in_order(R, V.h(x, x))) continue;
            QMat erows = K.zbasis();
            erows.push_back(flat);
            erows.push_back(K.flat_from_vec(vec_scaled(R.gen(), x)));
            try {
                HermLattice E = HermLattice::from_zbasis(V, erows);
                if (!(E == L) && classify_integral(E) == IntegralClass::EvenUnimodular)
                    return E;
            } catch (const std::exception&) {
                continue;
            }
        }
    }
    return std::nullopt;
}

// stable sublattices of index p: kernels of surjections M/pM -> Z/p
std::vector<HermLattice> index_p_sublattices(const HermLattice& M, const Int& p) {
    std::size_t n = M.zbasis().size();
    std::vector<HermLattice> out;
    std::vector<Int> t(n, 0);
    std::size_t lead = n;
    auto next = [&]() -> bool {
        if (lead == n) {
            lead = n - 1;
            t.assign(n, 0);
            t[lead] = 1;
            return true;
        }
        for (std::size_t i = n; i-- > lead + 1;) {
            if (t[i] + 1 < p) {
                ++t[i];
                return true;
            }
            t[i] = 0;
        }
        if (lead == 0) return false;
        t.assign(n, 0);
        --lead;
        t[lead] = 1;
        return true;
    };
    while (next()) {
        // kernel of c -> sum c_i t_i mod p; pivot = lead with t[lead] = 1
        QMat rows;
        for (std::size_t i = 0; i < n; ++i) {
            if (i == lead) continue;
            std::vector<Int> c(n, 0);
            c[i] = 1;
            c[lead] = ((p - t[i]) % p + p) % p;
            rows.push_back(row_combo(c, M.zbasis()));
        }
        std::vector<Int> c(n, 0);
        c[lead] = p;
        rows.push_back(row_combo(c, M.zbasis()));
        try {
            out.push_back(HermLattice::from_zbasis(M.space(), rows));
        } catch (const std::exception&) {
            // subgroup not stable under the order
        }
    }
    return out;
}

bool sandwich_condition(const HermLattice& M, long f) {
    // f * M^# <= M
    HermLattice Fm = dual_lattice(M).scale(M.space().R.from_rat(Rat(f)));
    return M.contains_lattice(Fm);
}

// ---------------- mod-p linear algebra for isotropic subspaces ----------------

using PVec = std::vector<long>;
using PMat = std::vector<PVec>;

PMat rref_mod(PMat a, long p) {
    std::size_t rows = a.size();
    if (rows == 0) return a;
    std::size_t cols = a[0].size(), r = 0;
    for (std::size_t c = 0; c < cols && r < rows; ++c) {
        std::size_t piv = r;
        while (piv < rows && a[piv][c] % p == 0) ++piv;
        if (piv == rows) continue;
        std::swap(a[r], a[piv]);
        long inv = inv_mod(Int(a[r][c]), Int(p)).get_si();
        for (auto& x : a[r]) x = ((x * inv) % p + p) % p;
        for (std::size_t i = 0; i < rows; ++i) {
            if (i == r || a[i][c] % p == 0) continue;
            long m = a[i][c] % p;
            for (std::size_t j = 0; j < cols; ++j)
                a[i][j] = (((a[i][j] - m * a[r][j]) % p) + p) % p;
        }
        ++r;
    }
    a.resize(r);
    return a;
}

std::string pkey(const PMat& a) {
    std::ostringstream os;
    for (const auto& row : a) {
        for (long x : row) os << x << ',';
        os << '|';
    }
    return os.str();
}

// basis of { v : v . c = 0 for all constraint rows c } in F_p^n
PMat nullspace_mod(const PMat& constraints, long p, std::size_t n) {
    PMat a = rref_mod(constraints, p);
    std::vector<long> pivot_col;
    std::vector<bool> is_pivot(n, false);
    for (const auto& row : a) {
        std::size_t c = 0;
        while (c < n && row[c] == 0) ++c;
        if (c < n) {
            pivot_col.push_back(static_cast<long>(c));
            is_pivot[c] = true;
        }
    }
    PMat basis;
    for (std::size_t fcol = 0; fcol < n; ++fcol) {
        if (is_pivot[fcol]) continue;
        PVec v(n, 0);
        v[fcol] = 1;
        for (std::size_t r = 0; r < a.size(); ++r)
            v[pivot_col[r]] = ((-a[r][fcol]) % p + p) % p;
        basis.push_back(v);
    }
    return basis;
}

bool in_span_mod(const PMat& rref_basis, const PVec& v, long p) {
    PVec w = v;
    std::size_t n = v.size();
    for (const auto& row : rref_basis) {
        std::size_t c = 0;
        while (c < n && row[c] == 0) ++c;
        if (c == n) continue;
        long m = w[c] % p;
        if (m == 0) continue;
        for (std::size_t j = 0; j < n; ++j) w[j] = ((w[j] - m * row[j]) % p + p) % p;
    }
    for (long x : w)
        if (x % p != 0) return false;
    return true;
}

// all g-dimensional subspaces of F_p^n totally isotropic for the
// alternating form Phi, as canonical reduced bases
std::vector<PMat> isotropic_subspaces(const PMat& Phi, long p, int g) {
    std::size_t n = Phi.size();
    std::vector<PMat> out;
    std::set<std::string> seen, done;
    std::vector<PMat> stack = {PMat{}};
    while (!stack.empty()) {
        PMat basis = stack.back();
        stack.pop_back();
        PMat canon = rref_mod(basis, p);
        std::string key = pkey(canon);
        if (!seen.insert(key).second) continue;
        if (static_cast<int>(canon.size()) == g) {
            out.push_back(canon);
            continue;
        }
        // constraints: Phi(v, b) = 0 for current basis vectors
        PMat constraints;
        for (const auto& b : canon) {
            PVec c(n, 0);
            for (std::size_t i = 0; i < n; ++i) {
                long s = 0;
                for (std::size_t j = 0; j < n; ++j) s = (s + Phi[i][j] * b[j]) % p;
                c[i] = (s + p) % p;
            }
            constraints.push_back(c);
        }
        PMat nsp = nullspace_mod(constraints, p, n);
        // iterate the nullspace, skipping vectors already in the span
        std::size_t k = nsp.size();
        std::vector<long> coef(k, 0);
        auto next = [&]() -> bool {
            for (std::size_t i = k; i-- > 0;) {
                if (coef[i] + 1 < p) {
                    ++coef[i];
                    return true;
                }
                coef[i] = 0;
            }
            return false;
        };
        while (next()) {
            PVec v(n, 0);
            for (std::size_t i = 0; i < k; ++i) {
                if (coef[i] == 0) continue;
                for (std::size_t j = 0; j < n; ++j) v[j] = (v[j] + coef[i] * nsp[i][j]) % p;
            }
            if (in_span_mod(canon, v, p)) continue;
            PMat ext = canon;
            ext.push_back(v);
            stack.push_back(ext);
        }
    }
    return out;
}

} // namespace

// ---------------- public interface ----------------

FracIdeal prime_ideal_above(const QuadOrder& R, const Int& p) {
    QOElem gen = R.gen();
    for (Int c = 0; c < p; ++c) {
        QOElem y = gen - R.from_rat(Rat(c));
        if (rat_mod(y.nr(), p) != 0) continue;
        FracIdeal P = FracIdeal::from_gens(R, {R.from_rat(Rat(p)), y});
        if (P.index_in_order() == Rat(p)) return P;
    }
    return FracIdeal::from_gens(R, {R.from_rat(Rat(p))});
}

HermSpace space_with_det_class(const QuadOrder& R, int g, const std::vector<Int>& I) {
    Int fd = Int(R.f) * Int(R.dF);
    for (const Int& p : I) {
        if (fd % p != 0 || is_split(R.dF, p))
            throw std::invalid_argument("determinant class primes must be non-split divisors of f*d_F");
    }
    if (I.size() % 2 != 0) throw std::invalid_argument("determinant class set must have even cardinality");
    for (Int e = 1; e < 100000; ++e) {
        if (R.dF % 2 == 0 && e % 2 == 0) continue; // keep the determinant a unit at a ramified 2
        FMat gram(g, FVec(g, R.from_rat(Rat(0))));
        for (int i = 0; i < g; ++i) gram[i][i] = R.from_rat(Rat(1));
        gram[g - 1][g - 1] = R.from_rat(Rat(e));
        HermSpace V{R, gram};
        std::vector<Int> test = prime_divisors(fd);
        for (const Int& p : prime_divisors(e))
            if (std::find(test.begin(), test.end(), p) == test.end()) test.push_back(p);
        bool ok = true;
        for (const Int& p : test) {
            bool want_norm = std::find(I.begin(), I.end(), p) == I.end();
            if (space_det_is_norm(V, p) != want_norm) {
                ok = false;
                break;
            }
        }
        if (ok) return V;
    }
    throw std::runtime_error("no diagonal space found with the requested determinant class");
}

std::vector<GenusDescriptor> genus_descriptors(const QuadOrder& R, int g) {
    Int fd = Int(R.f) * Int(R.dF);
    std::vector<Int> nonsplit;
    for (const Int& p : prime_divisors(fd))
        if (!is_split(R.dF, p)) nonsplit.push_back(p);
    std::vector<GenusDescriptor> out;
    std::size_t s = nonsplit.size();
    for (std::size_t mask = 0; mask < (std::size_t{1} << s); ++mask) {
        if (__builtin_popcountll(mask) % 2 != 0) continue;
        GenusDescriptor d;
        d.rank = g;
        for (std::size_t i = 0; i < s; ++i)
            if ((mask >> i) & 1) d.det_nonnorm_primes.push_back(nonsplit[i]);
        out.push_back(d);
        if (g % 2 == 0 && R.dF % 2 == 0) {
            HermSpace V = space_with_det_class(R, g, d.det_nonnorm_primes);
            Int e = V.gram[g - 1][g - 1].a.get_num();
            Int u = (g % 4 == 0) ? e : -e;
            if (R.dF % 8 == 0 || norm_class_contains(QuadOrder{R.dF, 1}, 2, u)) {
                GenusDescriptor dev = d;
                dev.even_at_2 = true;
                out.push_back(dev);
            }
        }
    }
    return out;
}

std::vector<HermLattice> neighbours(const HermLattice& L, const FracIdeal& P) {
    const HermSpace& V = L.space();
    const QuadOrder& R = V.R;
    Rat pidx = P.index_in_order();
    if (pidx.get_den() != 1) throw std::invalid_argument("neighbour ideal must be integral");
    Int p = pidx.get_num();
    Int fd = Int(R.f) * Int(R.dF);
    if (p == 2 || fd % p == 0 || !is_split(R.dF, p))
        throw std::invalid_argument("neighbour prime must be odd, split and coprime to f*d_F");
    FracIdeal Pbar = P.conj();
    std::size_t n = L.zbasis().size();
    int g = L.rank();

    HermLattice PbarL = scale_by_ideal(L, Pbar);
    HermLattice PL = scale_by_ideal(L, P);

    // generators of L / Pbar*L as a module over R/Pbar = F_p
    std::vector<FVec> gens;
    {
        HermLattice K = PbarL;
        for (std::size_t i = 0; i < n && !(K == L); ++i) {
            FVec u = L.basis_vec(i);
            if (K.contains(u)) continue;
            gens.push_back(u);
            QMat rows = K.zbasis();
            rows.push_back(L.flat_from_vec(u));
            rows.push_back(L.flat_from_vec(vec_scaled(R.gen(), u)));
            K = HermLattice::from_zbasis(V, rows);
        }
        assert(static_cast<int>(gens.size()) == g);
    }
    ResidueMap res = ResidueMap::make(R, P);

    std::vector<HermLattice> out;
    std::set<std::string> seen;

    // one candidate line per normalized coefficient vector in F_p^g
    std::vector<Int> lam(gens.size(), 0);
    std::size_t lead = gens.size();
    auto next = [&]() -> bool {
        std::size_t gg = gens.size();
        if (lead == gg) {
            lead = gg - 1;
            lam.assign(gg, 0);
            lam[lead] = 1;
            return true;
        }
        for (std::size_t i = gg; i-- > lead + 1;) {
            if (lam[i] + 1 < p) {
                ++lam[i];
                return true;
            }
            lam[i] = 0;
        }
        if (lead == 0) return false;
        lam.assign(gg, 0);
        --lead;
        lam[lead] = 1;
        return true;
    };
    while (next()) {
        FVec v(g, R.from_rat(Rat(0)));
        for (std::size_t i = 0; i < gens.size(); ++i)
            if (lam[i] != 0) v = vec_sum(v, vec_scaled(R.from_rat(Rat(lam[i])), gens[i]));
        // adjust v within its line so that h(v,v) = 0 mod p
        Rat nv = V.h(v, v).a;
        if (rat_mod(nv, p) != 0) {
            bool fixed = false;
            for (std::size_t i = 0; i < n && !fixed; ++i) {
                FVec y = PbarL.basis_vec(i);
                Int mu = rat_mod(V.h(y, v).tr(), p);
                if (mu == 0) continue;
                Int t = ((p - rat_mod(nv, p)) * inv_mod(mu, p)) % p;
                v = vec_sum(v, vec_scaled(R.from_rat(Rat(t)), y));
                fixed = true;
            }
            if (!fixed) continue; // no isotropic representative on this line
        }
        assert(rat_mod(V.h(v, v).a, p) == 0);

        // M = { x in L : h(x, v) in P }
        std::vector<Int> t(n);
        std::size_t piv = n;
        for (std::size_t i = 0; i < n; ++i) {
            t[i] = res(V.h(L.basis_vec(i), v));
            if (piv == n && t[i] != 0) piv = i;
        }
        assert(piv < n);
        Int ipiv = inv_mod(t[piv], p);
        QMat rows;
        for (std::size_t i = 0; i < n; ++i) {
            if (i == piv) continue;
            std::vector<Int> c(n, 0);
            c[i] = 1;
            c[piv] = ((p - (t[i] * ipiv) % p) % p + p) % p;
            rows.push_back(row_combo(c, L.zbasis()));
        }
        {
            std::vector<Int> c(n, 0);
            c[piv] = p;
            rows.push_back(row_combo(c, L.zbasis()));
        }
        // conj(P)^{-1} v = (1/p) P v
        QOElem invp = R.from_rat(Rat(1) / Rat(p));
        for (int j = 0; j < 2; ++j)
            rows.push_back(L.flat_from_vec(vec_scaled(P.basis_elem(j) * invp, v)));
        HermLattice Lp = HermLattice::from_zbasis(V, rows);
        if (Lp == L) continue;
        HermLattice C = L.intersect(Lp);
        if (C.index_in(L) != Rat(p) || C.index_in(Lp) != Rat(p)) continue;
        if (!C.contains_lattice(PL)) continue; // L/(L cap L') must be R/P
        if (classify_integral(Lp) != classify_integral(L)) continue;
        if (seen.insert(zkey(Lp.zbasis())).second) out.push_back(Lp);
    }
    return out;
}

std::vector<HermLattice> enum_unimodular_maximal(const QuadOrder& O, int g,
                                                 const ClassifyOptions& opts) {
    if (!O.is_maximal())
        throw std::invalid_argument("enum_unimodular_maximal needs the maximal order");
    std::vector<Int> primes = pick_neighbour_primes(O, opts);
    std::vector<HermLattice> result;
    for (const GenusDescriptor& d : genus_descriptors(O, g)) {
        HermSpace V = space_with_det_class(O, g, d.det_nonnorm_primes);
        HermLattice Lodd = ascend_maximal(HermLattice::free_lattice(V));
        if (classify_integral(Lodd) != IntegralClass::OddUnimodular)
            throw std::runtime_error("odd unimodular seed construction failed");
        HermLattice seed = Lodd;
        if (d.even_at_2) {
            auto E = find_even_unimodular(Lodd);
            if (!E)
                throw std::runtime_error("even unimodular seed not found by the index-2 search");
            seed = *E;
        }
        for (const auto& L : genus_closure({seed}, primes)) result.push_back(L);
    }
    return result;
}

std::vector<HermLattice> enum_unimodular_order(const QuadOrder& R, int g,
                                               const ClassifyOptions& opts) {
    if (R.is_maximal()) return enum_unimodular_maximal(R, g, opts);
    QuadOrder O = R.maximal();
    long f = R.f;
    std::vector<Int> primes = pick_neighbour_primes(R, opts);
    Rat f2g = 1;
    for (int i = 0; i < 2 * g; ++i) f2g *= Rat(f);

    std::vector<HermLattice> result;
    Int fd = Int(f) * Int(R.dF);
    std::vector<Int> nonsplit;
    for (const Int& p : prime_divisors(fd))
        if (!is_split(R.dF, p)) nonsplit.push_back(p);
    std::size_t s = nonsplit.size();
    for (std::size_t mask = 0; mask < (std::size_t{1} << s); ++mask) {
        if (__builtin_popcountll(mask) % 2 != 0) continue;
        std::vector<Int> I;
        for (std::size_t i = 0; i < s; ++i)
            if ((mask >> i) & 1) I.push_back(nonsplit[i]);
        HermSpace V_R = space_with_det_class(R, g, I);
        HermSpace V_O{O, V_R.gram};

        // classes of maximal integral lattices J over O
        HermLattice J0 = ascend_maximal(HermLattice::free_lattice(V_O));
        std::vector<HermLattice> seeds = {J0};
        if (g % 2 == 0 && R.dF % 2 == 0 && is_unimodular(J0)) {
            Int e = V_O.gram[g - 1][g - 1].a.get_num();
            Int u = (g % 4 == 0) ? e : -e;
            if (R.dF % 8 == 0 || norm_class_contains(QuadOrder{R.dF, 1}, 2, u)) {
                auto E = find_even_unimodular(J0);
                if (!E)
                    throw std::runtime_error("even unimodular seed not found by the index-2 search");
                seeds.push_back(*E);
            }
        }
        std::vector<HermLattice> Jclasses = genus_closure(seeds, primes);

        // classes of O-lattices M with f*M^# <= M <= M^#: walk down
        // through stable index-p sublattices; the condition is
        // inherited upwards, so failing nodes have no valid sublattices
        ClassRegistry Ms;
        for (const auto& J : Jclasses) {
            if (!sandwich_condition(J, f)) continue;
            std::deque<HermLattice> work = {J};
            std::set<std::string> visited = {zkey(J.zbasis())};
            while (!work.empty()) {
                HermLattice M = work.front();
                work.pop_front();
                Ms.insert(M);
                for (const Int& p : prime_divisors(Int(f)))
                    for (const auto& Msub : index_p_sublattices(M, p)) {
                        if (!visited.insert(zkey(Msub.zbasis())).second) continue;
                        if (!sandwich_condition(Msub, f)) continue;
                        work.push_back(Msub);
                    }
            }
        }

        // unimodular R-lattices between f*M^# and M with O*L = M; the
        // covolume of a unimodular R-lattice is fixed, so the index
        // [M : L] is known and we walk down from M through stable
        // index-p sublattices containing f*M^# for exactly that index
        Rat covol = 1; // det of the trace form of any unimodular R-lattice
        for (int i = 0; i < g; ++i) covol *= Rat(std::labs(f * f * R.dF));
        for (const auto& M : Ms.classes) {
            HermLattice M_R = HermLattice::from_zbasis(V_R, M.zbasis());
            // the R-dual of an O-stable lattice equals f times its O-dual
            HermLattice F_R = dual_lattice(M_R);
            Rat ratio = covol / qmat_det(M_R.f1()); // = [M : L]^2
            if (ratio.get_den() != 1) continue;
            Int idx = isqrt(ratio.get_num());
            if (idx * idx != ratio.get_num()) continue;
            ClassRegistry found;
            std::vector<Int> fps = prime_divisors(Int(f));
            if (fps.size() == 1 && fps[0] == Int(f)) {
                // f prime: M / f*M^# is an F_f-space of dimension 2m
                // carrying the pairing h mod R; the unimodular L are the
                // preimages of its totally isotropic m-dim subspaces
                long p = f;
                long m = 0;
                for (Int q = idx; q % p == 0; q /= p) ++m;
                auto Binv = qmat_inverse(M_R.zbasis());
                QMat C = qmat_mul(F_R.zbasis(), *Binv);
                std::size_t n = C.size();
                std::vector<std::vector<long>> Cm(n, std::vector<long>(n));
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t j = 0; j < n; ++j) Cm[i][j] = rat_mod(C[i][j], Int(p)).get_si();
                // pivot columns of the image of f*M^# in M/fM
                std::vector<bool> is_pivot(n, false);
                std::size_t row = 0;
                for (std::size_t col = 0; col < n && row < n; ++col) {
                    std::size_t r = row;
                    while (r < n && Cm[r][col] % p == 0) ++r;
                    if (r == n) continue;
                    std::swap(Cm[r], Cm[row]);
                    long inv = 1;
                    while ((inv * Cm[row][col]) % p != 1) ++inv;
                    for (std::size_t i = 0; i < n; ++i)
                        if (i != row) {
                            long c = (Cm[i][col] * inv) % p;
                            for (std::size_t j = 0; j < n; ++j)
                                Cm[i][j] = ((Cm[i][j] - c * Cm[row][j]) % p + p) % p;
                        }
                    is_pivot[col] = true;
                    ++row;
                }
                std::vector<std::size_t> comp;
                for (std::size_t c = 0; c < n; ++c)
                    if (!is_pivot[c]) comp.push_back(c);
                if (comp.size() != static_cast<std::size_t>(2 * m))
                    throw std::runtime_error("unexpected quotient dimension in the unimodular walk");
                std::size_t k = comp.size();
                std::vector<FVec> cv(k);
                for (std::size_t i = 0; i < k; ++i)
                    cv[i] = M_R.vec_from_flat(M_R.zbasis()[comp[i]]);
                FMat H(k, FVec(k, R.from_rat(Rat(0))));
                for (std::size_t i = 0; i < k; ++i)
                    for (std::size_t j = 0; j < k; ++j) H[i][j] = V_R.h(cv[i], cv[j]);
                auto in_order = [&](const QOElem& x) {
                    Rat y = Rat(2) * x.b / Rat(f); // x = a0 + y*f*omega
                    if (y.get_den() != 1) return false;
                    Rat a0 = x.a - y * Rat(f) * Rat(R.dF) / Rat(2);
                    return a0.get_den() == 1;
                };
                auto pair_in_R = [&](const std::vector<long>& u, const std::vector<long>& v) {
                    QOElem acc = R.from_rat(Rat(0));
                    for (std::size_t i = 0; i < k; ++i)
                        for (std::size_t j = 0; j < k; ++j)
                            if (u[i] != 0 && v[j] != 0)
                                acc = acc + H[i][j] * R.from_rat(Rat(u[i] * v[j]));
                    return in_order(acc);
                };
                auto leaf = [&](const std::vector<std::vector<long>>& rows) {
                    QMat zrows = F_R.zbasis();
                    for (const auto& rv : rows) {
                        QVec flat(n, Rat(0));
                        for (std::size_t i = 0; i < k; ++i)
                            if (rv[i] != 0)
                                for (std::size_t j = 0; j < n; ++j)
                                    flat[j] += Rat(rv[i]) * M_R.zbasis()[comp[i]][j];
                        zrows.push_back(flat);
                    }
                    HermLattice X = HermLattice::from_zbasis(V_R, zrows);
                    if (is_unimodular(X) && X.mul_order(O).zbasis() == M_R.zbasis()) found.insert(X);
                };
                // echelon-form bases with fixed pivot columns, pruned by
                // isotropy of each completed row against the prefix
                std::vector<std::size_t> pcols(m);
                std::vector<std::vector<long>> rows;
                std::function<void(long)> fill_row = [&](long r) {
                    if (r == m) {
                        leaf(rows);
                        return;
                    }
                    std::vector<std::size_t> free_cols;
                    for (std::size_t c = pcols[r] + 1; c < k; ++c)
                        if (std::find(pcols.begin(), pcols.end(), c) == pcols.end())
                            free_cols.push_back(c);
                    std::vector<long> v(k, 0);
                    v[pcols[r]] = 1;
                    std::function<void(std::size_t)> assign = [&](std::size_t pos) {
                        if (pos == free_cols.size()) {
                            for (const auto& w : rows)
                                if (!pair_in_R(w, v) || !pair_in_R(v, w)) return;
                            if (!pair_in_R(v, v)) return;
                            rows.push_back(v);
                            fill_row(r + 1);
                            rows.pop_back();
                            return;
                        }
                        for (long t = 0; t < p; ++t) {
                            v[free_cols[pos]] = t;
                            assign(pos + 1);
                        }
                        v[free_cols[pos]] = 0;
                    };
                    assign(0);
                };
                std::function<void(std::size_t, long)> pick = [&](std::size_t start, long r) {
                    if (r == m) {
                        fill_row(0);
                        return;
                    }
                    for (std::size_t c = start; c + (m - r) <= k + 1 && c < k; ++c) {
                        pcols[r] = c;
                        pick(c + 1, r + 1);
                    }
                };
                if (m == 0)
                    leaf({});
                else
                    pick(0, 0);
            } else {
                // composite conductor: walk down through index-p
                // sublattices containing f*M^# to the known index
                std::vector<HermLattice> level = {M_R};
                for (const Int& p : fps) {
                    long depth = 0;
                    Int q = idx;
                    while (q % p == 0) {
                        q /= p;
                        ++depth;
                    }
                    for (long step = 0; step < depth; ++step) {
                        std::set<std::string> visited;
                        std::vector<HermLattice> next_level;
                        for (const auto& X : level)
                            for (const auto& Y : index_p_sublattices(X, p)) {
                                if (!Y.contains_lattice(F_R)) continue;
                                if (visited.insert(zkey(Y.zbasis())).second)
                                    next_level.push_back(Y);
                            }
                        level = std::move(next_level);
                    }
                }
                for (const auto& X : level)
                    if (is_unimodular(X) && X.mul_order(O).zbasis() == M_R.zbasis()) found.insert(X);
            }
            for (const auto& L : found.classes) result.push_back(L);
        }
    }
    return result;
}

std::vector<HermLattice> enum_unimodular_projective(const QuadOrder& R, int g,
                                                    const ClassifyOptions& opts) {
    if (R.is_maximal()) return enum_unimodular_maximal(R, g, opts);
    // chain of minimal overorders up to the maximal order
    std::vector<QuadOrder> orders = {R};
    while (!orders.back().is_maximal()) {
        long fc = orders.back().f;
        Int p = smallest_prime_factor(Int(fc));
        orders.push_back(QuadOrder{R.dF, fc / static_cast<long>(p.get_si())});
    }
    std::vector<HermLattice> S = enum_unimodular_maximal(orders.back(), g, opts);
    for (std::size_t k = orders.size() - 1; k >= 1; --k) {
        const QuadOrder& Rhigh = orders[k];
        const QuadOrder& Rlow = orders[k - 1];
        long p = Rlow.f / Rhigh.f;
        std::vector<HermLattice> T;
        for (const auto& M : S) {
            const QMat& B = M.zbasis();
            std::size_t n = B.size();
            const HermSpace& Vh = M.space();
            HermSpace Vlow{Rlow, Vh.gram};
            // Phi(x, y) = h(x, y) + Rlow, valued in Rhigh/Rlow = Z/p
            PMat Phi(n, PVec(n, 0));
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) {
                    QOElem hij = Vh.h(M.basis_vec(i), M.basis_vec(j));
                    Phi[i][j] = rat_mod(Rat(2) * hij.b / Rat(Rhigh.f), Int(p)).get_si();
                }
            ClassRegistry found;
            for (const auto& W : isotropic_subspaces(Phi, p, g)) {
                QMat rows;
                for (const auto& w : W) {
                    std::vector<Int> c(n);
                    for (std::size_t i = 0; i < n; ++i) c[i] = w[i];
                    rows.push_back(row_combo(c, B));
                }
                for (std::size_t i = 0; i < n; ++i) {
                    std::vector<Int> c(n, 0);
                    c[i] = p;
                    rows.push_back(row_combo(c, B));
                }
                try {
                    HermLattice L = HermLattice::from_zbasis(Vlow, rows);
                    if (!is_unimodular(L)) continue;
                    if (!L.is_projective()) continue;
                    if (L.mul_order(Rhigh).zbasis() != B) continue;
                    found.insert(L);
                } catch (const std::exception&) {
                    continue; // preimage not stable under the smaller order
                }
            }
            for (const auto& L : found.classes) T.push_back(L);
        }
        S = T;
    }
    return S;
}

bool is_free_lattice(const HermLattice& L) {
    if (!L.is_projective()) return false;
    const HermSpace& V = L.space();
    const QuadOrder& R = V.R;
    std::size_t n = L.zbasis().size();
    int g = L.rank();

    // free full sublattice N <= L with [L:N] coprime to the conductor
    std::mt19937 rng(20260824u);
    HermLattice N = L;
    Rat idx;
    bool have = false;
    for (int attempt = 0; attempt < 500 && !have; ++attempt) {
        QMat rows;
        for (int i = 0; i < g; ++i) {
            std::vector<Int> c(n);
            if (attempt == 0) {
                // first try the obvious pairs of basis vectors
                for (std::size_t j = 0; j < n; ++j) c[j] = (j == static_cast<std::size_t>(2 * i)) ? 1 : 0;
            } else {
                for (std::size_t j = 0; j < n; ++j) c[j] = Int(static_cast<long>(rng() % 7)) - 3;
            }
            QVec flat = row_combo(c, L.zbasis());
            FVec v = L.vec_from_flat(flat);
            rows.push_back(flat);
            rows.push_back(L.flat_from_vec(vec_scaled(R.gen(), v)));
        }
        if (qmat_rank(rows) != n) continue;
        HermLattice cand = HermLattice::from_zbasis(V, rows);
        idx = cand.index_in(L);
        assert(idx.get_den() == 1);
        Int gcd;
        mpz_gcd(gcd.get_mpz_t(), idx.get_num().get_mpz_t(), Int(R.f).get_mpz_t());
        if (gcd == 1) {
            N = cand;
            have = true;
        }
    }
    if (!have)
        throw std::runtime_error("no free sublattice with index coprime to the conductor found");

    // Steinitz class: product of the composition factors of L/N
    FracIdeal cls = FracIdeal::unit(R);
    for (const Int& p : prime_divisors(idx.get_num())) {
        FracIdeal P = prime_ideal_above(R, p);
        if (P.index_in_order() != Rat(p)) continue; // inert: principal factors only
        std::vector<FracIdeal> ideals = {P};
        if (!(P.conj() == P)) ideals.push_back(P.conj());
        for (const auto& Q : ideals) {
            HermLattice X = L;
            for (;;) {
                HermLattice Xn = scale_by_ideal(X, Q).add(N);
                Rat step = Xn.index_in(X);
                if (step == 1) break;
                Int st = step.get_num();
                while (st % p == 0) {
                    cls = cls.mul(Q);
                    st /= p;
                }
                assert(st == 1);
                X = Xn;
            }
        }
    }

    // principal iff the ideal contains an element of norm equal to its index
    Rat target = cls.index_in_order();
    QMat gram(2, QVec(2));
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            QOElem prod = cls.basis_elem(i) * cls.basis_elem(j).conj();
            gram[i][j] = prod.a;
        }
    for (const auto& [v, norm] : fincke_pohst(gram, target)) {
        if (norm != target) continue;
        QOElem x = cls.basis_elem(0) * QOElem(Rat(v[0]), Rat(0), R.dF) +
                   cls.basis_elem(1) * QOElem(Rat(v[1]), Rat(0), R.dF);
        if (FracIdeal::from_gens(R, {x}) == cls) return true;
    }
    return false;
}

} // namespace iso
