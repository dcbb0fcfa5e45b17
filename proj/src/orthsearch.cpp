#include "iso/orthsearch.hpp"

#include <algorithm>
#include <cassert>
#include <functional>

namespace iso {

namespace {

Int gcd_int(const Int& a, const Int& b) {
    Int g;
    mpz_gcd(g.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return g;
}

std::vector<Int> prime_factors(Int n) {
    std::vector<Int> out;
    if (n < 0) n = -n;
    for (Int p = 2; p * p <= n; ++p)
        if (n % p == 0) {
            out.push_back(p);
            while (n % p == 0) n /= p;
        }
    if (n > 1) out.push_back(n);
    return out;
}

QVec flat_of(const HermLattice& L, const FVec& v) { return L.flat_from_vec(v); }

// lexicographic order on flattened coordinates
bool flat_less(const QVec& a, const QVec& b) {
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] < b[i]) return true;
        if (b[i] < a[i]) return false;
    }
    return false;
}

// one representative per +-pair, sorted for deterministic output
std::vector<FVec> normalized_vectors(const HermLattice& L, const Rat& ell) {
    std::vector<std::pair<QVec, FVec>> keyed;
    for (auto& v : herm_short_vectors(L, ell)) {
        QVec f = flat_of(L, v);
        QVec nf = f;
        for (auto& x : nf) x = -x;
        if (flat_less(f, nf)) continue; // keep the lexicographically larger sign
        keyed.push_back({std::move(f), std::move(v)});
    }
    std::sort(keyed.begin(), keyed.end(),
              [](const auto& x, const auto& y) { return flat_less(x.first, y.first); });
    std::vector<FVec> out;
    for (auto& [k, v] : keyed) out.push_back(std::move(v));
    return out;
}

// dimension over F of the span of the given vectors
std::size_t f_span_dim(const HermLattice& L, const std::vector<const FVec*>& vs) {
    const QuadOrder& R = L.space().R;
    QMat rows;
    for (const FVec* v : vs) {
        rows.push_back(L.flat_from_vec(*v));
        FVec w = *v;
        for (auto& c : w) c = c * R.sqrt_d();
        rows.push_back(L.flat_from_vec(w));
    }
    if (rows.empty()) return 0;
    return qmat_rank(rows) / 2;
}

// saturated integer left kernel of a rational matrix A (k x m):
// basis of { x in Z^k : x * A = 0 }
ZMat integer_left_kernel(const QMat& A) {
    std::size_t k = A.size(), m = A.empty() ? 0 : A[0].size();
    Int den(1);
    for (const auto& row : A)
        for (const auto& x : row) {
            Int d = x.get_den();
            den = den / gcd_int(den, d) * d;
        }
    ZMat aug(k, ZVec(m + k, Int(0)));
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            Rat s = A[i][j] * Rat(den);
            assert(s.get_den() == 1);
            aug[i][j] = s.get_num();
        }
        aug[i][m + i] = 1;
    }
    ZMat H = zmat_hnf(std::move(aug));
    ZMat ker;
    for (const auto& row : H) {
        bool zero = true;
        for (std::size_t j = 0; j < m; ++j) zero = zero && row[j] == 0;
        if (!zero) continue;
        ker.push_back(ZVec(row.begin() + static_cast<long>(m), row.end()));
    }
    return ker;
}

} // namespace

std::vector<FVec> short_vectors(const HermLattice& L, const Rat& ell) {
    return herm_short_vectors(L, ell);
}

OrthFamily orthogonal_basis(const HermLattice& L) {
    const HermSpace& V = L.space();
    int g = L.rank();
    OrthFamily fam;
    // current sublattice as rows of flattened coordinates
    QMat rows = L.zbasis();
    for (int step = 0; step < g; ++step) {
        std::size_t k = rows.size();
        std::vector<FVec> basis;
        for (const auto& r : rows) basis.push_back(L.vec_from_flat(r));
        QMat G(k, QVec(k));
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j) G[i][j] = V.h(basis[i], basis[j]).tr();
        // minimal nonzero value of the trace form on the sublattice
        Rat bound = G[0][0];
        for (std::size_t i = 1; i < k; ++i) bound = std::min(bound, G[i][i]);
        auto sv = fincke_pohst(G, bound);
        assert(!sv.empty());
        Rat best = sv[0].second;
        std::size_t at = 0;
        for (std::size_t i = 1; i < sv.size(); ++i)
            if (sv[i].second < best) {
                best = sv[i].second;
                at = i;
            }
        FVec v(static_cast<std::size_t>(g), V.R.from_rat(Rat(0)));
        for (std::size_t i = 0; i < k; ++i)
            for (int m = 0; m < g; ++m)
                v[m] = v[m] + basis[i][static_cast<std::size_t>(m)] * V.R.from_rat(Rat(sv[at].first[i]));
        fam.vectors.push_back(v);
        fam.norms.push_back(V.h(v, v).a);
        // pass to the orthogonal complement: h(., v) = 0 gives two
        // rational linear conditions on the coefficient vector
        QMat cond(k, QVec(2));
        for (std::size_t i = 0; i < k; ++i) {
            QOElem hv = V.h(basis[i], v);
            cond[i][0] = hv.a;
            cond[i][1] = hv.b;
        }
        ZMat ker = integer_left_kernel(cond);
        QMat next;
        for (const auto& c : ker) {
            QVec r(rows[0].size(), Rat(0));
            for (std::size_t i = 0; i < k; ++i)
                for (std::size_t j = 0; j < r.size(); ++j) r[j] += Rat(c[i]) * rows[i][j];
            next.push_back(std::move(r));
        }
        rows = std::move(next);
    }
    assert(rows.empty());
    return fam;
}

bool rational_is_field_norm(const QuadOrder& R, const Rat& x) {
    if (x <= 0) return false;
    HermSpace V1{R.maximal(), {{R.maximal().from_rat(x)}}};
    std::vector<Int> ps = {Int(2)};
    for (const Int& n : {Int(R.dF), Int(x.get_num()), Int(x.get_den())})
        for (const Int& p : prime_factors(n))
            if (std::find(ps.begin(), ps.end(), p) == ps.end()) ps.push_back(p);
    for (const Int& p : ps)
        if (!space_det_is_norm(V1, p)) return false;
    return true;
}

std::optional<OrthFamily> orthogonal_family_norm(const HermLattice& L, const Rat& ell) {
    const HermSpace& V = L.space();
    int g = L.rank();
    Rat target = V.det_rational();
    for (int i = 0; i < g; ++i) target *= ell;
    if (!rational_is_field_norm(V.R, target)) return std::nullopt;

    std::vector<FVec> S = normalized_vectors(L, ell);
    std::vector<const FVec*> family;
    std::function<bool(std::vector<const FVec*>)> backtrack =
        [&](std::vector<const FVec*> S_ptr) -> bool {
        if (family.size() == static_cast<std::size_t>(g)) return true;
        if (family.size() + S_ptr.size() < static_cast<std::size_t>(g)) return false;
        if (family.size() + f_span_dim(L, S_ptr) < static_cast<std::size_t>(g)) return false;
        const FVec* v = S_ptr.front();
        bool orth = true;
        for (const FVec* f : family) orth = orth && V.h(*v, *f).is_zero();
        if (orth) {
            std::vector<const FVec*> rest;
            for (std::size_t i = 1; i < S_ptr.size(); ++i)
                if (V.h(*v, *S_ptr[i]).is_zero()) rest.push_back(S_ptr[i]);
            family.push_back(v);
            if (backtrack(std::move(rest))) return true;
            family.pop_back();
        }
        S_ptr.erase(S_ptr.begin());
        return backtrack(std::move(S_ptr));
    };
    std::vector<const FVec*> all;
    for (const auto& v : S) all.push_back(&v);
    if (!backtrack(std::move(all))) return std::nullopt;
    OrthFamily fam;
    for (const FVec* v : family) {
        fam.vectors.push_back(*v);
        fam.norms.push_back(ell);
    }
    return fam;
}

namespace {

// det(L_p, h) as a p-adic unit class, via a local basis at an odd
// prime p: g of the 2g integer basis vectors spanning with index
// coprime to p
Int local_det_unit(const HermLattice& L, const Int& p) {
    const HermSpace& V = L.space();
    int g = L.rank();
    std::size_t n = 2 * static_cast<std::size_t>(g);
    std::vector<std::size_t> pick;
    Rat det;
    std::function<bool(std::size_t)> choose = [&](std::size_t start) {
        if (pick.size() == static_cast<std::size_t>(g)) {
            QMat rows;
            for (std::size_t i : pick) {
                FVec v = L.basis_vec(i);
                rows.push_back(L.flat_from_vec(v));
                FVec vw = v;
                for (auto& c : vw) c = c * V.R.gen();
                rows.push_back(L.flat_from_vec(vw));
            }
            if (qmat_rank(rows) != n) return false;
            HermLattice sub = HermLattice::from_zbasis(V, rows);
            Rat ix = sub.index_in(L);
            if (ix.get_den() % p == 0 || ix.get_num() % p == 0) return false;
            FMat G(g, FVec(g, V.R.from_rat(Rat(0))));
            std::vector<FVec> bs;
            for (std::size_t i : pick) bs.push_back(L.basis_vec(i));
            for (int i = 0; i < g; ++i)
                for (int j = 0; j < g; ++j) G[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = V.h(bs[static_cast<std::size_t>(i)], bs[static_cast<std::size_t>(j)]);
            det = HermSpace{V.R, G}.det_rational();
            return true;
        }
        for (std::size_t i = start; i < n; ++i) {
            pick.push_back(i);
            if (choose(i + 1)) return true;
            pick.pop_back();
        }
        return false;
    };
    bool ok = choose(0);
    assert(ok);
    (void)ok;
    Int u = det.get_num() * det.get_den();
    assert(u % p != 0);
    return u;
}

int hilbert_product(const std::vector<int>& u) {
    int s = 1;
    for (std::size_t i = 0; i < u.size(); ++i)
        for (std::size_t j = i + 1; j < u.size(); ++j) s *= hilbert_symbol_2(Int(u[i]), Int(u[j]));
    return s;
}

} // namespace

bool feasible_equal_norm(const HermLattice& L, const Int& a) {
    const HermSpace& V = L.space();
    const QuadOrder& R = V.R;
    int g = L.rank();
    if (g % 2 == 0 && !rational_is_field_norm(R, V.det_rational())) return false;
    std::vector<Int> ap = prime_factors(a);
    for (const Int& p : ap)
        if (!L.is_free_at(p)) return false;
    if (a % 2 == 0) {
        bool two_relevant = (Int(R.f) * Int(R.dF)) % 2 == 0;
        if (two_relevant) {
            LocalData d2 = local_data(L, Int(2));
            if (d2.even) return false; // an equal-norm diagonal lattice is odd
            assert(!d2.diag_units_2.empty());
            const std::vector<int>& u = d2.diag_units_2;
            Int prod(1);
            for (int ui : u) prod = prod * ui % 8;
            bool nice = R.f % 2 != 0 || norm_class_contains(R, 2, Int(3)) ||
                        norm_class_contains(R, 2, Int(7));
            if (g % 2 == 0 && !norm_class_contains(R, 2, prod)) return false;
            if (!nice) {
                int target = hilbert_product(u);
                bool found = false;
                for (int l2 : {1, 3, 5, 7}) {
                    if (g % 2 == 1 && !norm_class_contains(R, 2, Int(l2) * prod % 8)) continue;
                    int pw = (g % 2 == 1) ? (g - 1) / 2 : g / 2;
                    int rhs = (pw % 2 == 0) ? 1 : hilbert_symbol_2(Int(l2), Int(l2));
                    if (rhs == target) {
                        found = true;
                        break;
                    }
                }
                if (!found) return false;
            }
        }
    }
    if (g % 2 == 0) {
        Int gf = gcd_int(a, Int(R.f));
        for (const Int& p : prime_factors(gf)) {
            if (p == 2) continue;
            if (!norm_class_contains(R, p, local_det_unit(L, p) % p)) return false;
        }
    }
    return true;
}

EllSearch min_odd_ell(const HermLattice& L, const Int& p, const Int& bound) {
    EllSearch out;
    const HermSpace& V = L.space();
    if (L.rank() % 2 == 0 && !rational_is_field_norm(V.R, V.det_rational())) {
        out.status = EllSearchStatus::DeterminantObstruction;
        return out;
    }
    if (!feasible_equal_norm(L, 2 * p)) {
        out.status = EllSearchStatus::LocalObstruction;
        return out;
    }
    HermLattice Ld = dual_lattice(L);
    for (Int ell = 1; ell <= bound; ell += 2) {
        if (ell % p == 0) continue;
        auto fam = orthogonal_family_norm(Ld, Rat(ell));
        if (fam) {
            out.status = EllSearchStatus::Found;
            out.ell = ell;
            out.family = std::move(*fam);
            return out;
        }
    }
    out.status = EllSearchStatus::BoundExceeded;
    return out;
}

} // namespace iso
