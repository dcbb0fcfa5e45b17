#include "iso/kernelgen.hpp"

#include <map>
#include <set>
#include <sstream>

#include "iso/linalg.hpp"

namespace iso {

namespace {

Int gcd_int(const Int& a, const Int& b) {
    Int g;
    mpz_gcd(g.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return g;
}

long mod_reduce(const Int& x, long ell) {
    Int r = ((x % ell) + ell) % ell;
    return r.get_si();
}

// Smith form with the right transform only: U * A * V = D; returns the
// diagonal of D (length = #cols, padded with zeros) and V (cols x cols)
void smith_right(std::vector<std::vector<Int>> A, std::vector<Int>& diag,
                 std::vector<std::vector<Int>>& V) {
    std::size_t n = A.size(), m = A.empty() ? 0 : A[0].size();
    V.assign(m, std::vector<Int>(m, 0));
    for (std::size_t i = 0; i < m; ++i) V[i][i] = 1;
    auto col_sub = [&](std::size_t j, std::size_t jt, const Int& q) {
        for (std::size_t i = 0; i < n; ++i) A[i][j] -= q * A[i][jt];
        for (std::size_t i = 0; i < m; ++i) V[i][j] -= q * V[i][jt];
    };
    auto col_swap = [&](std::size_t j, std::size_t jt) {
        for (std::size_t i = 0; i < n; ++i) std::swap(A[i][j], A[i][jt]);
        for (std::size_t i = 0; i < m; ++i) std::swap(V[i][j], V[i][jt]);
    };
    std::size_t t = 0;
    while (t < n && t < m) {
        // locate a nonzero pivot of smallest absolute value
        bool found = false;
        std::size_t pi = t, pj = t;
        Int best = 0;
        for (std::size_t i = t; i < n; ++i)
            for (std::size_t j = t; j < m; ++j)
                if (A[i][j] != 0 && (!found || abs(A[i][j]) < best)) {
                    best = abs(A[i][j]);
                    pi = i;
                    pj = j;
                    found = true;
                }
        if (!found) break;
        std::swap(A[pi], A[t]);
        if (pj != t) col_swap(pj, t);
        bool clean = true;
        for (std::size_t i = t + 1; i < n; ++i)
            if (A[i][t] != 0) {
                Int q = A[i][t] / A[t][t];
                for (std::size_t j = t; j < m; ++j) A[i][j] -= q * A[t][j];
                if (A[i][t] != 0) clean = false;
            }
        for (std::size_t j = t + 1; j < m; ++j)
            if (A[t][j] != 0) {
                Int q = A[t][j] / A[t][t];
                col_sub(j, t, q);
                if (A[t][j] != 0) clean = false;
            }
        if (!clean) continue;
        // enforce the divisibility chain
        bool divides = true;
        for (std::size_t i = t + 1; i < n && divides; ++i)
            for (std::size_t j = t + 1; j < m && divides; ++j)
                if (A[i][j] % A[t][t] != 0) {
                    // fold column j into column t and restart the pivot
                    for (std::size_t k = 0; k < n; ++k) A[k][t] += A[k][j];
                    for (std::size_t k = 0; k < m; ++k) V[k][t] += V[k][j];
                    divides = false;
                }
        if (!divides) continue;
        ++t;
    }
    diag.assign(m, 0);
    for (std::size_t i = 0; i < n && i < m; ++i) diag[i] = abs(A[i][i]);
}

std::string point_key(const EPoint& P) {
    if (P.inf) return "o";
    return P.x.str() + "," + P.y.str();
}

std::string tuple_key(const std::vector<EPoint>& T) {
    std::string s;
    for (const auto& P : T) s += point_key(P) + "|";
    return s;
}

} // namespace

FMat presentation_matrix(const HermLattice& L, const OrthFamily& family) {
    const HermSpace& V = L.space();
    std::size_t g = static_cast<std::size_t>(L.rank());
    if (family.vectors.size() != g) throw std::invalid_argument("family size must equal the rank");
    std::size_t r = L.zbasis().size();
    FMat P(r, FVec(g));
    for (std::size_t i = 0; i < r; ++i) {
        FVec v = L.basis_vec(i);
        for (std::size_t j = 0; j < g; ++j) P[i][j] = V.h(v, family.vectors[j]);
    }
    return P;
}

std::pair<Int, Int> frobenius_coords(const QOElem& x, const Int& t, long f) {
    Rat bpi = Rat(2) * x.b / Rat(f);
    Rat api = x.a - bpi * Rat(t) / Rat(2);
    if (bpi.get_den() != 1 || api.get_den() != 1)
        throw std::invalid_argument("element does not lie in Z[pi]");
    return {api.get_num(), bpi.get_num()};
}

IsogenyKernel kernel_points(const HermLattice& L, const EllCurve& E, long ell,
                            const OrthFamily& family) {
    const QuadOrder& R = L.space().R;
    std::size_t g = static_cast<std::size_t>(L.rank());
    for (const Rat& nrm : family.norms)
        if (nrm != Rat(ell)) throw std::invalid_argument("family norms must all equal ell");
    // the order of the lattice must match Z[pi] of the curve
    {
        auto [Rpi, pi] = order_from_frobenius(E.F->card(), E.t);
        (void)pi;
        if (!(Rpi == R)) throw std::invalid_argument("curve order does not match the lattice order");
    }
    FMat P = presentation_matrix(L, family);
    std::size_t r = P.size();
    TorsionData td = torsion_data(E, ell);
    long p00 = td.pi[0], p01 = td.pi[1], p10 = td.pi[2], p11 = td.pi[3];
    // Q acts on stacked coordinate columns (a_1, b_1, ..., a_g, b_g)
    std::vector<std::vector<Int>> Q(2 * r, std::vector<Int>(2 * g, 0));
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < g; ++j) {
            auto [a, b] = frobenius_coords(P[i][j], E.t, R.f);
            long am = mod_reduce(a, ell), bm = mod_reduce(b, ell);
            // a * Id + b * Pi, Pi in the column-action orientation
            Q[2 * i][2 * j] = (am + bm * p00) % ell;
            Q[2 * i][2 * j + 1] = (bm * p10) % ell;
            Q[2 * i + 1][2 * j] = (bm * p01) % ell;
            Q[2 * i + 1][2 * j + 1] = (am + bm * p11) % ell;
        }
    std::vector<Int> diag;
    std::vector<std::vector<Int>> V;
    smith_right(Q, diag, V);
    // solutions mod ell in the transformed coordinates are cyclic of
    // order gcd(d_i, ell) in each position
    std::vector<long> orders(2 * g);
    Int total = 1;
    for (std::size_t i = 0; i < 2 * g; ++i) {
        orders[i] = gcd_int(diag[i], Int(ell)).get_si();
        total *= orders[i];
    }
    Int expected = 1;
    for (std::size_t i = 0; i < g; ++i) expected *= ell;
    std::size_t full = 0, trivial = 0;
    for (long o : orders) {
        if (o == ell) ++full;
        if (o == 1) ++trivial;
    }
    if (total != expected || full != g || trivial != g)
        throw KernelRankError("kernel is not isomorphic to (Z/ell)^g at ell = " +
                              std::to_string(ell));
    IsogenyKernel K;
    K.E = E;
    K.ell = ell;
    K.torsion = td;
    for (std::size_t i = 0; i < 2 * g; ++i) {
        if (orders[i] != ell) continue;
        std::vector<long> coords(2 * g);
        for (std::size_t k = 0; k < 2 * g; ++k) coords[k] = mod_reduce(V[k][i], ell);
        std::vector<EPoint> tuple;
        for (std::size_t j = 0; j < g; ++j)
            tuple.push_back(ep_add(E, ep_mul(E, Int(coords[2 * j]), td.b0),
                                   ep_mul(E, Int(coords[2 * j + 1]), td.b1)));
        K.gen_coords.push_back(std::move(coords));
        K.gens.push_back(std::move(tuple));
    }
    return K;
}

KernelReport validate_kernel(const IsogenyKernel& K) {
    KernelReport rep;
    const EllCurve& E = K.E;
    long ell = K.ell;
    std::size_t g = K.gens.empty() ? 0 : K.gens[0].size();
    // closure of the generated subgroup
    std::map<std::string, std::vector<EPoint>> closure;
    std::vector<EPoint> zero(g, EPoint::infinity(K.torsion.K));
    closure[tuple_key(zero)] = zero;
    for (const auto& gen : K.gens) {
        std::map<std::string, std::vector<EPoint>> next;
        for (const auto& [key, base] : closure) {
            std::vector<EPoint> cur = base;
            for (long k = 0; k < ell; ++k) {
                next.emplace(tuple_key(cur), cur);
                for (std::size_t j = 0; j < g; ++j) cur[j] = ep_add(E, cur[j], gen[j]);
            }
        }
        closure = std::move(next);
    }
    Int expected = 1;
    for (std::size_t i = 0; i < g; ++i) expected *= ell;
    rep.order_ok = Int(closure.size()) == expected;
    // rank g: the r-torsion of the subgroup has order r^g for r | ell
    rep.rank_ok = rep.order_ok;
    for (long rr = 2; rr <= ell && rep.rank_ok; ++rr) {
        if (ell % rr != 0) continue;
        bool prime = true;
        for (long s = 2; s * s <= rr; ++s)
            if (rr % s == 0) prime = false;
        if (!prime) continue;
        Int count = 0;
        for (const auto& [key, tup] : closure) {
            bool killed = true;
            for (std::size_t j = 0; j < g && killed; ++j)
                killed = ep_mul(E, Int(rr), tup[j]).inf;
            if (killed) ++count;
        }
        Int want = 1;
        for (std::size_t i = 0; i < g; ++i) want *= rr;
        rep.rank_ok = count == want;
    }
    // isotropy under the product Weil pairing
    rep.isotropic = true;
    for (std::size_t a = 0; a < K.gens.size() && rep.isotropic; ++a)
        for (std::size_t b = a + 1; b < K.gens.size() && rep.isotropic; ++b) {
            FFElem prod = K.torsion.K->one();
            for (std::size_t j = 0; j < g; ++j)
                prod = prod * weil_pairing(E, K.gens[a][j], K.gens[b][j], ell);
            rep.isotropic = prod == K.torsion.K->one();
        }
    // coordinate-wise Frobenius maps the subgroup into itself
    rep.frobenius_stable = true;
    for (const auto& gen : K.gens) {
        std::vector<EPoint> img;
        for (const auto& P : gen) img.push_back(ep_frobenius(E, P));
        if (closure.find(tuple_key(img)) == closure.end()) {
            rep.frobenius_stable = false;
            break;
        }
    }
    return rep;
}

std::vector<std::vector<long>> kernel_canonical(const IsogenyKernel& K) {
    std::size_t g2 = K.gen_coords.empty() ? 0 : K.gen_coords[0].size();
    ZMat rows;
    for (const auto& c : K.gen_coords) {
        std::vector<Int> row;
        for (long v : c) row.push_back(v);
        rows.push_back(row);
    }
    for (std::size_t i = 0; i < g2; ++i) {
        std::vector<Int> row(g2, 0);
        row[i] = K.ell;
        rows.push_back(row);
    }
    ZMat h = zmat_hnf(rows);
    std::vector<std::vector<long>> out;
    for (const auto& row : h) {
        std::vector<long> r;
        for (const auto& v : row) r.push_back(mod_reduce(v, K.ell));
        out.push_back(r);
    }
    return out;
}

} // namespace iso
