#include "iso/hermlat.hpp"

#include <algorithm>
#include <cassert>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace iso {

namespace {

long rat_val2(const Rat& r) {
    assert(r != 0);
    Int n = r.get_num(), d = r.get_den();
    long v = 0;
    while (n % 2 == 0) { n /= 2; ++v; }
    while (d % 2 == 0) { d /= 2; --v; }
    return v;
}

long rat_mod8_unit(const Rat& r) {
    // r a 2-adic unit: its class in {1,3,5,7}
    Int n = ((r.get_num() % 8) + 8) % 8;
    Int d = ((r.get_den() % 8) + 8) % 8;
    // odd residues mod 8 are their own inverses
    Int m = (n * d) % 8;
    return m.get_si();
}

// determinant of a matrix over F by Gaussian elimination
QOElem fmat_det(FMat a, long dF) {
    std::size_t n = a.size();
    QOElem det{Rat(1), Rat(0), dF};
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        while (piv < n && a[piv][c].is_zero()) ++piv;
        if (piv == n) return {Rat(0), Rat(0), dF};
        if (piv != c) {
            std::swap(a[piv], a[c]);
            det = -det;
        }
        det = det * a[c][c];
        QOElem inv = a[c][c].inverse();
        for (std::size_t r = c + 1; r < n; ++r) {
            QOElem m = a[r][c] * inv;
            for (std::size_t k = c; k < n; ++k) a[r][k] = a[r][k] - m * a[c][k];
        }
    }
    return det;
}

} // namespace

QOElem HermSpace::h(const FVec& x, const FVec& y) const {
    QOElem acc{Rat(0), Rat(0), R.dF};
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = 0; j < y.size(); ++j)
            acc = acc + x[i] * gram[i][j] * y[j].conj();
    return acc;
}

Rat HermSpace::det_rational() const {
    QOElem d = fmat_det(gram, R.dF);
    assert(d.b == 0); // hermitian determinants are rational
    return d.a;
}

bool HermSpace::is_positive_definite() const {
    int g = rank();
    for (int k = 1; k <= g; ++k) {
        FMat sub(k, FVec(k, QOElem{Rat(0), Rat(0), R.dF}));
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) sub[i][j] = gram[i][j];
        QOElem d = fmat_det(sub, R.dF);
        if (!(d.b == 0) || !(d.a > 0)) return false;
    }
    return true;
}

FVec HermLattice::vec_from_flat(const QVec& t) const {
    int g = rank();
    FVec v(g, QOElem{Rat(0), Rat(0), V_.R.dF});
    for (int i = 0; i < g; ++i) v[i] = {t[2 * i], t[2 * i + 1], V_.R.dF};
    return v;
}

QVec HermLattice::flat_from_vec(const FVec& v) const {
    QVec t(2 * rank());
    for (int i = 0; i < rank(); ++i) {
        t[2 * i] = v[i].a;
        t[2 * i + 1] = v[i].b;
    }
    return t;
}

HermLattice HermLattice::from_zbasis(const HermSpace& V, const QMat& rows) {
    HermLattice L;
    L.V_ = V;
    L.B_ = qmat_lattice_hnf(rows);
    std::size_t n = 2 * static_cast<std::size_t>(V.rank());
    if (L.B_.size() != n) throw std::invalid_argument("lattice is not full in its space");
    // must be stable under multiplication by f*omega
    QOElem fw = V.R.gen();
    for (std::size_t i = 0; i < n; ++i) {
        FVec v = L.basis_vec(i);
        for (auto& c : v) c = c * fw;
        if (!L.contains(v)) throw std::invalid_argument("Z-module is not an R-module");
    }
    return L;
}

HermLattice HermLattice::from_pseudo(const HermSpace& V, std::vector<PseudoPair> pb) {
    QMat rows;
    HermLattice tmp;
    tmp.V_ = V;
    for (const auto& [a, x] : pb) {
        for (int k = 0; k < 2; ++k) {
            QOElem c = a.basis_elem(k);
            FVec v = x;
            for (auto& e : v) e = e * c;
            rows.push_back(tmp.flat_from_vec(v));
        }
    }
    HermLattice L = from_zbasis(V, rows);
    L.pb_ = std::move(pb);
    return L;
}

HermLattice HermLattice::free_lattice(const HermSpace& V) {
    std::vector<PseudoPair> pb;
    int g = V.rank();
    for (int i = 0; i < g; ++i) {
        FVec x(g, QOElem{Rat(0), Rat(0), V.R.dF});
        x[i] = {Rat(1), Rat(0), V.R.dF};
        pb.push_back({FracIdeal::unit(V.R), x});
    }
    return from_pseudo(V, std::move(pb));
}

bool HermLattice::contains(const FVec& v) const {
    auto sol = qmat_solve_left(B_, flat_from_vec(v));
    if (!sol) return false;
    for (const auto& c : *sol)
        if (c.get_den() != 1) return false;
    return true;
}

bool HermLattice::contains_lattice(const HermLattice& o) const {
    for (std::size_t i = 0; i < o.B_.size(); ++i)
        if (!contains(o.basis_vec(i))) return false;
    return true;
}

Rat HermLattice::index_in(const HermLattice& super) const {
    Rat q = qmat_det(B_) / qmat_det(super.B_);
    if (q < 0) q = -q;
    return q;
}

HermLattice HermLattice::add(const HermLattice& o) const {
    QMat rows = B_;
    rows.insert(rows.end(), o.B_.begin(), o.B_.end());
    return from_zbasis(V_, rows);
}

HermLattice HermLattice::intersect(const HermLattice& o) const {
    return from_zbasis(V_, qmat_lattice_intersect(B_, o.B_));
}

HermLattice HermLattice::scale(const QOElem& c) const {
    QMat rows;
    for (std::size_t i = 0; i < B_.size(); ++i) {
        FVec v = basis_vec(i);
        for (auto& e : v) e = e * c;
        rows.push_back(flat_from_vec(v));
    }
    return from_zbasis(V_, rows);
}

HermLattice HermLattice::mul_order(const QuadOrder& S) const {
    QMat rows = B_;
    QOElem sg = S.gen();
    for (std::size_t i = 0; i < B_.size(); ++i) {
        FVec v = basis_vec(i);
        for (auto& e : v) e = e * sg;
        rows.push_back(flat_from_vec(v));
    }
    return from_zbasis(V_, rows);
}

FMat HermLattice::herm_gram() const {
    std::size_t n = B_.size();
    FMat H(n, FVec(n, QOElem{Rat(0), Rat(0), V_.R.dF}));
    std::vector<FVec> bs(n);
    for (std::size_t i = 0; i < n; ++i) bs[i] = basis_vec(i);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) H[i][j] = V_.h(bs[i], bs[j]);
    return H;
}

QMat HermLattice::f1() const {
    FMat H = herm_gram();
    std::size_t n = H.size();
    QMat M(n, QVec(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) M[i][j] = H[i][j].a * 2;
    return M;
}

QMat HermLattice::fsqrt() const {
    FMat H = herm_gram();
    std::size_t n = H.size();
    QMat M(n, QVec(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) M[i][j] = H[i][j].b * Rat(2 * V_.R.dF);
    return M;
}

Rat HermLattice::index_under_maximal() const {
    return index_in(mul_order(V_.R.maximal()));
}

std::vector<int> HermLattice::module_type_at(const Int& p) const {
    int g = rank();
    long f = V_.R.f;
    int e = 0;
    long pf = static_cast<long>(p.get_si());
    long fr = f;
    while (fr % pf == 0) {
        fr /= pf;
        ++e;
    }
    if (e == 0) return std::vector<int>(g, 0);
    // t_j = log_p [S_j L : L] for the overorder S_j of conductor f / p^j
    std::vector<long> t(e + 1, 0);
    for (int j = 1; j <= e; ++j) {
        long fj = f;
        for (int k = 0; k < j; ++k) fj /= pf;
        QuadOrder Sj{V_.R.dF, fj};
        Rat idx = index_in(mul_order(Sj));
        assert(idx.get_den() == 1);
        Int v = idx.get_num();
        long tj = 0;
        while (v % p == 0) {
            v /= p;
            ++tj;
        }
        assert(v == 1);
        t[j] = tj;
    }
    // t_j - t_{j-1} = #{ i : deficiency d_i <= j-1 }, c_i = e - d_i
    std::vector<int> cs;
    for (int j = 1; j <= e; ++j) {
        long cnt = t[j] - t[j - 1];
        long prev = (j == 1) ? 0 : t[j - 1] - t[j - 2];
        for (long k = prev; k < cnt; ++k) cs.push_back(e - (j - 1));
    }
    while (static_cast<int>(cs.size()) < g) cs.push_back(0);
    std::sort(cs.begin(), cs.end());
    return cs;
}

bool HermLattice::is_free_at(const Int& p) const {
    long f = V_.R.f;
    int e = 0;
    long pf = static_cast<long>(p.get_si());
    while (f % pf == 0) {
        f /= pf;
        ++e;
    }
    if (e == 0) return true;
    auto cs = module_type_at(p);
    for (int c : cs)
        if (c != e) return false;
    return true;
}

bool HermLattice::is_projective() const {
    long f = V_.R.f;
    for (long p = 2; p <= f; ++p) {
        if (f % p != 0) continue;
        if (!is_free_at(Int(p))) return false;
        while (f % p == 0) f /= p;
    }
    return true;
}

HermLattice dual_lattice(const HermLattice& L) {
    const HermSpace& V = L.space();
    int g = L.rank();
    long dF = V.R.dF;
    long f = V.R.f;
    std::size_t n = 2 * static_cast<std::size_t>(g);
    QMat functionals;
    for (std::size_t j = 0; j < n; ++j) {
        FVec bj = L.basis_vec(j);
        QVec arow(n), srow(n);
        for (int i = 0; i < g; ++i) {
            QOElem hij{Rat(0), Rat(0), dF};
            for (int m = 0; m < g; ++m) hij = hij + V.gram[i][m] * bj[m].conj();
            // x = sum (t_re + t_im sqrt(d)) e_i, so h(x, b_j) = a(t) + s(t) sqrt(d)
            arow[2 * i] = hij.a;
            srow[2 * i] = hij.b;
            arow[2 * i + 1] = hij.b * Rat(dF);
            srow[2 * i + 1] = hij.a;
        }
        // a + s sqrt(d) lies in R iff a - s*dF in Z and 2s/f in Z
        QVec u(n), v(n);
        for (std::size_t k = 0; k < n; ++k) {
            u[k] = arow[k] - srow[k] * Rat(dF);
            v[k] = srow[k] * Rat(2) / Rat(f);
        }
        functionals.push_back(u);
        functionals.push_back(v);
    }
    QMat db = qmat_lattice_dual(qmat_lattice_hnf(functionals));
    return HermLattice::from_zbasis(V, db);
}

IntegralClass classify_integral(const HermLattice& L) {
    HermLattice D = dual_lattice(L);
    if (!D.contains_lattice(L)) return IntegralClass::NonIntegral;
    if (!(D == L)) return IntegralClass::IntegralNonUnimodular;
    FMat H = L.herm_gram();
    bool even = true;
    std::size_t n = H.size();
    for (std::size_t i = 0; i < n && even; ++i) {
        const Rat& d = H[i][i].a; // h(b_i, b_i) is rational
        if (d.get_den() != 1 || d.get_num() % 2 != 0) even = false;
        for (std::size_t j = i + 1; j < n && even; ++j) {
            Rat tr = H[i][j].a * 2;
            if (tr.get_den() != 1 || tr.get_num() % 2 != 0) even = false;
        }
    }
    return even ? IntegralClass::EvenUnimodular : IntegralClass::OddUnimodular;
}

// ---------------- decomposition ----------------

namespace {

// restrict L to the R-sublattice spanned by the given flat ambient rows,
// returned as a full lattice in its own hermitian space
HermLattice component_lattice(const HermLattice& L, const QMat& rows) {
    const HermSpace& V = L.space();
    long dF = V.R.dF;
    std::size_t m = rows.size();
    assert(m % 2 == 0);
    int k = static_cast<int>(m / 2);
    // choose k of the rows that are F-linearly independent
    std::vector<FVec> basis;
    QMat W2; // rows: flat(w), flat(sqrt(d) w) for each chosen w
    HermLattice helper = L;
    for (const auto& r : rows) {
        if (static_cast<int>(basis.size()) == k) break;
        FVec w = helper.vec_from_flat(r);
        FVec wsd = w;
        for (auto& c : wsd) c = c * QOElem{Rat(0), Rat(1), dF};
        QMat trial = W2;
        trial.push_back(r);
        trial.push_back(helper.flat_from_vec(wsd));
        if (qmat_rank(trial) == trial.size()) {
            W2 = trial;
            basis.push_back(w);
        }
    }
    assert(static_cast<int>(basis.size()) == k);
    FMat gram(k, FVec(k, QOElem{Rat(0), Rat(0), dF}));
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) gram[i][j] = V.h(basis[i], basis[j]);
    HermSpace sub{V.R, gram};
    // coordinates of each row in the chosen F-basis give the new flat rows
    QMat newrows;
    for (const auto& r : rows) {
        auto s = qmat_solve_left(W2, r);
        assert(s.has_value());
        newrows.push_back(*s);
    }
    return HermLattice::from_zbasis(sub, newrows);
}

} // namespace

std::vector<HermLattice> decompose(const HermLattice& L) {
    QMat G = L.f1();
    QMat S = L.fsqrt();
    std::size_t n = G.size();
    ZMat U = lll_transform(G);
    QMat Uq(n, QVec(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) Uq[i][j] = Rat(U[i][j]);
    QMat Gr = qmat_mul(qmat_mul(Uq, G), qmat_transpose(Uq));
    Rat bound(0);
    for (std::size_t i = 0; i < n; ++i) bound = std::max(bound, Gr[i][i]);
    auto found = fincke_pohst(Gr, bound);
    std::vector<QVec> vs; // coordinates in the Z-basis of L
    std::vector<Rat> norms;
    for (auto& [x, q] : found) {
        QVec c(n, Rat(0));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) c[j] += Rat(x[i]) * Uq[i][j];
        vs.push_back(c);
        norms.push_back(q);
    }
    std::vector<std::size_t> order(vs.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return norms[a] < norms[b]; });
    auto ip = [&](const QVec& a, const QVec& b, const QMat& M) -> Rat {
        Rat s(0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) s += a[i] * M[i][j] * b[j];
        return s;
    };
    // a vector splits if it is an orthogonal sum y + z with y strictly
    // shorter; process by increasing norm so all shorter vectors are known
    std::vector<std::size_t> indec;
    std::vector<std::size_t> seen;
    for (std::size_t oi : order) {
        const QVec& x = vs[oi];
        bool splits = false;
        for (std::size_t pj : seen) {
            if (!(norms[pj] < norms[oi])) continue;
            for (int sgn : {1, -1}) {
                QVec z(n);
                bool zero = true;
                for (std::size_t k = 0; k < n; ++k) {
                    z[k] = x[k] - Rat(sgn) * vs[pj][k];
                    if (z[k] != 0) zero = false;
                }
                if (zero) continue;
                if (ip(vs[pj], z, G) == 0) {
                    splits = true;
                    break;
                }
            }
            if (splits) break;
        }
        seen.push_back(oi);
        if (!splits) indec.push_back(oi);
    }
    std::vector<std::size_t> parent(indec.size());
    std::iota(parent.begin(), parent.end(), 0);
    std::function<std::size_t(std::size_t)> find = [&](std::size_t a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    };
    for (std::size_t a = 0; a < indec.size(); ++a)
        for (std::size_t b = a + 1; b < indec.size(); ++b)
            if (ip(vs[indec[a]], vs[indec[b]], G) != 0 || ip(vs[indec[a]], vs[indec[b]], S) != 0)
                parent[find(a)] = find(b);
    std::map<std::size_t, QMat> groups;
    for (std::size_t a = 0; a < indec.size(); ++a) {
        QVec flat(n, Rat(0));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) flat[j] += vs[indec[a]][i] * L.zbasis()[i][j];
        groups[find(a)].push_back(flat);
    }
    std::vector<HermLattice> out;
    QMat all;
    for (auto& [root, rows] : groups) {
        QMat span = qmat_lattice_hnf(rows);
        all.insert(all.end(), span.begin(), span.end());
        if (span.size() == n)
            out.push_back(HermLattice::from_zbasis(L.space(), span));
        else
            out.push_back(component_lattice(L, span));
    }
    // the indecomposable vectors must span L itself
    assert(qmat_lattice_hnf(all) == L.zbasis());
    return out;
}

// ---------------- isometries and automorphisms ----------------

namespace {

struct IsoResult {
    bool found = false;
    ZMat zmap; // maps the Z-basis of L1 to that of L2 (row convention)
};

// backtracking over images of an LLL-reduced basis of L1, constrained to
// preserve both trace forms; when collect_all is set, every automorphism
// is recorded (L1 must equal L2 in that case)
IsoResult isometry_search(const HermLattice& L1, const HermLattice& L2, bool collect_all,
                          std::vector<ZMat>* all_out) {
    IsoResult res;
    if (!(L1.space().R == L2.space().R) || L1.rank() != L2.rank()) return res;
    QMat G1 = L1.f1(), S1 = L1.fsqrt();
    QMat G2 = L2.f1(), S2 = L2.fsqrt();
    std::size_t n = G1.size();
    if (qmat_det(G1) != qmat_det(G2)) return res;
    ZMat U1 = lll_transform(G1);
    QMat U1q(n, QVec(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) U1q[i][j] = Rat(U1[i][j]);
    QMat G1r = qmat_mul(qmat_mul(U1q, G1), qmat_transpose(U1q));
    QMat S1r = qmat_mul(qmat_mul(U1q, S1), qmat_transpose(U1q));
    Rat bound(0);
    for (std::size_t i = 0; i < n; ++i) bound = std::max(bound, G1r[i][i]);
    // candidate images: all vectors of L2 of norm up to the bound
    ZMat U2 = lll_transform(G2);
    QMat U2q(n, QVec(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) U2q[i][j] = Rat(U2[i][j]);
    QMat G2r = qmat_mul(qmat_mul(U2q, G2), qmat_transpose(U2q));
    auto short2 = fincke_pohst(G2r, bound);
    std::vector<QVec> cand;
    std::vector<Rat> cnorm;
    for (auto& [x, q] : short2) {
        QVec c(n, Rat(0));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) c[j] += Rat(x[i]) * U2q[i][j];
        cand.push_back(c);
        cnorm.push_back(q);
        QVec neg(n);
        for (std::size_t j = 0; j < n; ++j) neg[j] = -c[j];
        cand.push_back(neg);
        cnorm.push_back(q);
    }
    // precompute G2 * c and S2 * c for fast pairwise products
    std::vector<QVec> gc(cand.size(), QVec(n, Rat(0))), sc(cand.size(), QVec(n, Rat(0)));
    for (std::size_t a = 0; a < cand.size(); ++a)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                gc[a][i] += G2[i][j] * cand[a][j];
                sc[a][i] += S2[i][j] * cand[a][j];
            }
    auto dot = [&](const QVec& a, const QVec& b) -> Rat {
        Rat s(0);
        for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
        return s;
    };
    std::vector<std::size_t> chosen(n);
    std::function<bool(std::size_t)> rec = [&](std::size_t depth) -> bool {
        if (depth == n) {
            QMat C(n, QVec(n));
            for (std::size_t i = 0; i < n; ++i) C[i] = cand[chosen[i]];
            // zmap = U1^{-1} C maps L1 coordinates to L2 coordinates
            auto U1inv = qmat_inverse(U1q);
            QMat Mq = qmat_mul(*U1inv, C);
            ZMat M(n, ZVec(n));
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) {
                    assert(Mq[i][j].get_den() == 1);
                    M[i][j] = Mq[i][j].get_num();
                }
            Int d = zmat_det(M);
            if (d != 1 && d != -1) return false;
            if (collect_all) {
                all_out->push_back(M);
                return false; // keep searching
            }
            res.found = true;
            res.zmap = M;
            return true;
        }
        for (std::size_t a = 0; a < cand.size(); ++a) {
            if (cnorm[a] != G1r[depth][depth]) continue;
            bool ok = true;
            for (std::size_t j = 0; j < depth && ok; ++j) {
                // f1 is symmetric, fsqrt is antisymmetric: match (r_j, r_depth)
                if (dot(cand[chosen[j]], gc[a]) != G1r[j][depth]) ok = false;
                else if (dot(cand[chosen[j]], sc[a]) != S1r[j][depth]) ok = false;
            }
            if (!ok) continue;
            chosen[depth] = a;
            if (rec(depth + 1)) return true;
        }
        return false;
    };
    rec(0);
    return res;
}

} // namespace

std::optional<FMat> is_isometric(const HermLattice& L1, const HermLattice& L2) {
    IsoResult r = isometry_search(L1, L2, false, nullptr);
    if (!r.found) return std::nullopt;
    std::size_t n = L1.zbasis().size();
    int g = L1.rank();
    long dF = L1.space().R.dF;
    // flat map: v -> v * Z1^{-1} * (zmap * Z2)
    QMat W(n, QVec(n, Rat(0)));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = 0; k < n; ++k) W[i][k] += Rat(r.zmap[i][j]) * L2.zbasis()[j][k];
    auto Z1inv = qmat_inverse(L1.zbasis());
    QMat M = qmat_mul(*Z1inv, W);
    FMat P(g, FVec(g, QOElem{Rat(0), Rat(0), dF}));
    for (int i = 0; i < g; ++i) {
        FVec img = L1.vec_from_flat(M[2 * i]);
        P[i] = img;
    }
    // verify P * Gram2 * conj(P)^T = Gram1
    for (int i = 0; i < g; ++i)
        for (int j = 0; j < g; ++j) {
            QOElem acc{Rat(0), Rat(0), dF};
            for (int a = 0; a < g; ++a)
                for (int b = 0; b < g; ++b) acc = acc + P[i][a] * L2.space().gram[a][b] * P[j][b].conj();
            assert(acc == L1.space().gram[i][j]);
        }
    return P;
}

AutGroup aut_group(const HermLattice& L) {
    AutGroup ag;
    isometry_search(L, L, true, &ag.elements);
    ag.order = ag.elements.size();
    return ag;
}

// ---------------- short vectors and local data ----------------

std::vector<FVec> herm_short_vectors(const HermLattice& L, const Rat& ell) {
    QMat G = L.f1();
    std::size_t n = G.size();
    ZMat U = lll_transform(G);
    QMat Uq(n, QVec(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) Uq[i][j] = Rat(U[i][j]);
    QMat Gr = qmat_mul(qmat_mul(Uq, G), qmat_transpose(Uq));
    auto found = fincke_pohst(Gr, ell * 2);
    std::vector<FVec> out;
    for (auto& [x, q] : found) {
        if (q != ell * 2) continue;
        QVec flat(n, Rat(0));
        QVec coord(n, Rat(0));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) coord[j] += Rat(x[i]) * Uq[i][j];
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) flat[j] += coord[i] * L.zbasis()[i][j];
        FVec v = L.vec_from_flat(flat);
        if (!(L.space().h(v, v) == QOElem{ell, Rat(0), L.space().R.dF})) continue;
        out.push_back(v);
        FVec neg = v;
        for (auto& c : neg) c = -c;
        out.push_back(neg);
    }
    return out;
}

bool space_det_is_norm(const HermSpace& V, const Int& p) {
    Rat det = V.det_rational();
    assert(det != 0);
    long dF = V.R.dF;
    Int D(-dF);
    // split primes: everything is a local norm
    auto val = [&](Rat r) {
        long v = 0;
        Int n = r.get_num(), d = r.get_den();
        while (n % p == 0) { n /= p; ++v; }
        while (d % p == 0) { d /= p; --v; }
        return v;
    };
    auto unit_part = [&](Rat r, long v) -> Int {
        // multiply out p^{-v} and return numerator*denominator (same square class)
        Rat u = r;
        Rat pw(1);
        for (long k = 0; k < std::labs(v); ++k) pw *= Rat(p);
        if (v > 0) u = u / pw;
        if (v < 0) u = u * pw;
        return u.get_num() * u.get_den();
    };
    bool ramified = (Int(dF) % p == 0);
    if (!ramified) {
        bool split;
        if (p == 2) {
            long m8 = ((dF % 8) + 8) % 8;
            split = (m8 == 1);
        } else {
            split = (legendre(Int(dF), p) == 1);
        }
        if (split) return true;
        // inert: norms are units times even powers of p
        long v = val(det);
        if (v % 2 != 0) return false;
        return true; // all units are norms at unramified p
    }
    // ramified: divide by a norm of valuation 1 until the p-part is gone
    Int nrm; // a norm of F of p-adic valuation 1
    if (p != 2) {
        nrm = -Int(dF);
    } else if (dF % 8 == 0) {
        nrm = -Int(dF) / 4;
    } else {
        nrm = 1 - Int(dF) / 4;
    }
    long v = val(det);
    Rat adj = det;
    for (long k = 0; k < std::labs(v); ++k) {
        if (v > 0) adj = adj / Rat(nrm);
        else adj = adj * Rat(nrm);
    }
    long v2 = val(adj);
    assert(v2 == 0);
    Int u = unit_part(adj, 0);
    return norm_class_contains(QuadOrder{dF, 1}, p, u);
}

namespace {

// orthogonal 2-adic diagonalization of a free odd unimodular lattice;
// returns the classes of the diagonal in {1,3,5,7}
std::optional<std::vector<int>> local_diag_2(const HermLattice& L) {
    const HermSpace& V = L.space();
    int g = L.rank();
    std::size_t n = 2 * static_cast<std::size_t>(g);
    // find g vectors whose R-span has odd index in L
    std::vector<FVec> basis;
    {
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), 0);
        std::vector<std::size_t> pick;
        std::function<bool(std::size_t, std::size_t)> choose = [&](std::size_t start, std::size_t need) {
            if (need == 0) {
                QMat rows;
                HermLattice helper = L;
                QOElem fw = V.R.gen();
                for (std::size_t i : pick) {
                    FVec v = helper.basis_vec(i);
                    rows.push_back(helper.flat_from_vec(v));
                    FVec vw = v;
                    for (auto& c : vw) c = c * fw;
                    rows.push_back(helper.flat_from_vec(vw));
                }
                if (qmat_rank(rows) != n) return false;
                HermLattice sub = HermLattice::from_zbasis(V, rows);
                Rat ix = sub.index_in(L);
                if (ix.get_den() != 1 || ix.get_num() % 2 == 0) return false;
                for (std::size_t i : pick) basis.push_back(L.basis_vec(i));
                return true;
            }
            for (std::size_t i = start; i + need <= n; ++i) {
                pick.push_back(i);
                if (choose(i + 1, need - 1)) return true;
                pick.pop_back();
            }
            return false;
        };
        if (!choose(0, static_cast<std::size_t>(g))) return std::nullopt;
    }
    // split off vectors of odd norm, with backtracking over the choice:
    // a greedy choice can leave an even orthogonal complement even when
    // the lattice is diagonalizable, so every candidate must be tried
    QOElem fw = V.R.gen();
    std::function<std::optional<std::vector<int>>(const std::vector<FVec>&)> reduce =
        [&](const std::vector<FVec>& bs) -> std::optional<std::vector<int>> {
        if (bs.empty()) return std::vector<int>{};
        std::size_t k = bs.size();
        // coefficients a + b f*omega with small a, b cover all classes mod 2
        long cr = (k <= 3) ? 2 : 1;
        std::vector<QOElem> coeffs;
        for (long a = -cr; a <= cr; ++a)
            for (long b = -cr; b <= cr; ++b)
                coeffs.push_back(QOElem{Rat(a), Rat(0), V.R.dF} + fw * QOElem{Rat(b), Rat(0), V.R.dF});
        std::vector<std::pair<FVec, std::size_t>> cands; // vector and the index with unit coefficient
        std::vector<std::size_t> digits(k, 0);
        std::function<void(std::size_t)> enumerate = [&](std::size_t pos) {
            if (pos == k) {
                FVec v(V.rank(), QOElem{Rat(0), Rat(0), V.R.dF});
                bool allzero = true;
                std::size_t unit_at = k;
                for (std::size_t i = 0; i < k; ++i) {
                    const QOElem& lam = coeffs[digits[i]];
                    if (lam.is_zero()) continue;
                    allzero = false;
                    Rat nl = lam.nr();
                    if (unit_at == k && nl != 0 && rat_val2(nl) == 0) unit_at = i;
                    for (int m = 0; m < V.rank(); ++m) v[m] = v[m] + bs[i][m] * lam;
                }
                if (allzero || unit_at == k) return;
                QOElem nr = V.h(v, v);
                if (nr.a == 0 || rat_val2(nr.a) != 0) return;
                cands.push_back({std::move(v), unit_at});
                return;
            }
            for (std::size_t c = 0; c < coeffs.size(); ++c) {
                digits[pos] = c;
                enumerate(pos + 1);
            }
        };
        enumerate(0);
        for (const auto& [x, unit_at] : cands) {
            QOElem nx = V.h(x, x);
            std::vector<FVec> rest;
            for (std::size_t i = 0; i < k; ++i) {
                if (i == unit_at) continue;
                FVec b = bs[i];
                QOElem c = V.h(b, x) / nx;
                for (int m = 0; m < V.rank(); ++m) b[m] = b[m] - c * x[m];
                rest.push_back(std::move(b));
            }
            auto sub = reduce(rest);
            if (sub) {
                sub->push_back(static_cast<int>(rat_mod8_unit(nx.a)));
                std::sort(sub->begin(), sub->end());
                return sub;
            }
        }
        return std::nullopt;
    };
    auto diag = reduce(basis);
    if (!diag) return std::nullopt;
    // normalize each entry to the smallest representative of its class
    // modulo Nr(R_2^*): multiplying a diagonal entry by a unit norm does
    // not change the lattice
    for (int& u : *diag)
        for (int v : {1, 3, 5, 7})
            if (norm_class_contains(V.R, 2, Int((v * u) % 8))) {
                u = v;
                break;
            }
    std::sort(diag->begin(), diag->end());
    return diag;
}

} // namespace

LocalData local_data(const HermLattice& L, const Int& p) {
    LocalData d;
    d.rank = L.rank();
    d.det_is_norm = space_det_is_norm(L.space(), p);
    d.free = L.is_free_at(p);
    if (p == 2) {
        IntegralClass c = classify_integral(L);
        d.even = (c == IntegralClass::EvenUnimodular);
        bool two_relevant = (Int(L.space().R.f) * Int(L.space().R.dF)) % 2 == 0;
        if (d.free && !d.even && two_relevant) {
            auto diag = local_diag_2(L);
            if (diag) d.diag_units_2 = *diag;
        }
    }
    return d;
}

std::string HermLattice::fingerprint() const {
    std::ostringstream os;
    QMat G = f1();
    os << "det=" << qmat_det(G).get_str();
    switch (classify_integral(*this)) {
        case IntegralClass::OddUnimodular: os << ";odd-unimod"; break;
        case IntegralClass::EvenUnimodular: os << ";even-unimod"; break;
        case IntegralClass::IntegralNonUnimodular: os << ";integral"; break;
        case IntegralClass::NonIntegral: os << ";nonintegral"; break;
    }
    std::size_t n = G.size();
    ZMat U = lll_transform(G);
    QMat Uq(n, QVec(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) Uq[i][j] = Rat(U[i][j]);
    QMat Gr = qmat_mul(qmat_mul(Uq, G), qmat_transpose(Uq));
    auto found = fincke_pohst(Gr, Rat(20));
    std::map<Rat, int> counts;
    for (auto& [x, q] : found) counts[q] += 2;
    os << ";theta=";
    for (auto& [q, c] : counts) os << q.get_str() << ":" << c << ",";
    return os.str();
}

} // namespace iso
