#include "iso/linalg.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>

namespace iso {

QMat qmat_identity(std::size_t n) {
    QMat a(n, QVec(n, Rat(0)));
    for (std::size_t i = 0; i < n; ++i) a[i][i] = 1;
    return a;
}

QMat qmat_mul(const QMat& a, const QMat& b) {
    std::size_t n = a.size(), m = b.empty() ? 0 : b[0].size(), k = b.size();
    QMat c(n, QVec(m, Rat(0)));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t l = 0; l < k; ++l) {
            if (a[i][l] == 0) continue;
            for (std::size_t j = 0; j < m; ++j) c[i][j] += a[i][l] * b[l][j];
        }
    return c;
}

QVec qmat_vec(const QMat& a, const QVec& v) {
    QVec r(a.size(), Rat(0));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < v.size(); ++j) r[i] += a[i][j] * v[j];
    return r;
}

QMat qmat_transpose(const QMat& a) {
    if (a.empty()) return {};
    QMat t(a[0].size(), QVec(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a[0].size(); ++j) t[j][i] = a[i][j];
    return t;
}

QMat qmat_scale(const QMat& a, const Rat& c) {
    QMat r = a;
    for (auto& row : r)
        for (auto& x : row) x *= c;
    return r;
}

QMat qmat_add(const QMat& a, const QMat& b) {
    QMat r = a;
    for (std::size_t i = 0; i < r.size(); ++i)
        for (std::size_t j = 0; j < r[i].size(); ++j) r[i][j] += b[i][j];
    return r;
}

Rat qmat_det(QMat a) {
    std::size_t n = a.size();
    Rat det(1);
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        while (piv < n && a[piv][col] == 0) ++piv;
        if (piv == n) return Rat(0);
        if (piv != col) {
            std::swap(a[piv], a[col]);
            det = -det;
        }
        det *= a[col][col];
        Rat inv = Rat(1) / a[col][col];
        for (std::size_t r = col + 1; r < n; ++r) {
            if (a[r][col] == 0) continue;
            Rat f = a[r][col] * inv;
            for (std::size_t j = col; j < n; ++j) a[r][j] -= f * a[col][j];
        }
    }
    return det;
}

std::size_t qmat_rank(QMat a) {
    std::size_t rows = a.size(), cols = rows ? a[0].size() : 0, rank = 0;
    for (std::size_t col = 0; col < cols && rank < rows; ++col) {
        std::size_t piv = rank;
        while (piv < rows && a[piv][col] == 0) ++piv;
        if (piv == rows) continue;
        std::swap(a[piv], a[rank]);
        Rat inv = Rat(1) / a[rank][col];
        for (std::size_t r = 0; r < rows; ++r) {
            if (r == rank || a[r][col] == 0) continue;
            Rat f = a[r][col] * inv;
            for (std::size_t j = col; j < cols; ++j) a[r][j] -= f * a[rank][j];
        }
        ++rank;
    }
    return rank;
}

std::optional<QMat> qmat_inverse(QMat a) {
    std::size_t n = a.size();
    QMat inv = qmat_identity(n);
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        while (piv < n && a[piv][col] == 0) ++piv;
        if (piv == n) return std::nullopt;
        std::swap(a[piv], a[col]);
        std::swap(inv[piv], inv[col]);
        Rat d = Rat(1) / a[col][col];
        for (std::size_t j = 0; j < n; ++j) {
            a[col][j] *= d;
            inv[col][j] *= d;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col || a[r][col] == 0) continue;
            Rat f = a[r][col];
            for (std::size_t j = 0; j < n; ++j) {
                a[r][j] -= f * a[col][j];
                inv[r][j] -= f * inv[col][j];
            }
        }
    }
    return inv;
}

std::optional<QVec> qmat_solve_left(const QMat& A, const QVec& b) {
    // x * A = b  <=>  A^T x^T = b^T
    QMat At = qmat_transpose(A);
    std::size_t rows = At.size(), cols = rows ? At[0].size() : 0;
    QMat aug = At;
    for (std::size_t i = 0; i < rows; ++i) aug[i].push_back(b[i]);
    std::size_t rank = 0;
    std::vector<std::size_t> pivcol;
    for (std::size_t col = 0; col < cols && rank < rows; ++col) {
        std::size_t piv = rank;
        while (piv < rows && aug[piv][col] == 0) ++piv;
        if (piv == rows) continue;
        std::swap(aug[piv], aug[rank]);
        Rat d = Rat(1) / aug[rank][col];
        for (auto& x : aug[rank]) x *= d;
        for (std::size_t r = 0; r < rows; ++r) {
            if (r == rank || aug[r][col] == 0) continue;
            Rat f = aug[r][col];
            for (std::size_t j = 0; j <= cols; ++j) aug[r][j] -= f * aug[rank][j];
        }
        pivcol.push_back(col);
        ++rank;
    }
    for (std::size_t r = rank; r < rows; ++r)
        if (aug[r][cols] != 0) return std::nullopt;
    QVec x(cols, Rat(0));
    for (std::size_t i = 0; i < rank; ++i) x[pivcol[i]] = aug[i][cols];
    return x;
}

QMat qmat_left_kernel(const QMat& A) {
    // kernel of x -> x*A: row-reduce A with row-op tracking.
    std::size_t rows = A.size(), cols = rows ? A[0].size() : 0;
    QMat a = A;
    QMat T = qmat_identity(rows);
    std::size_t rank = 0;
    for (std::size_t col = 0; col < cols && rank < rows; ++col) {
        std::size_t piv = rank;
        while (piv < rows && a[piv][col] == 0) ++piv;
        if (piv == rows) continue;
        std::swap(a[piv], a[rank]);
        std::swap(T[piv], T[rank]);
        Rat d = Rat(1) / a[rank][col];
        for (auto& x : a[rank]) x *= d;
        for (auto& x : T[rank]) x *= d;
        for (std::size_t r = 0; r < rows; ++r) {
            if (r == rank || a[r][col] == 0) continue;
            Rat f = a[r][col];
            for (std::size_t j = 0; j < cols; ++j) a[r][j] -= f * a[rank][j];
            for (std::size_t j = 0; j < rows; ++j) T[r][j] -= f * T[rank][j];
        }
        ++rank;
    }
    QMat ker(T.begin() + static_cast<long>(rank), T.end());
    return ker;
}

ZMat zmat_identity(std::size_t n) {
    ZMat a(n, ZVec(n, Int(0)));
    for (std::size_t i = 0; i < n; ++i) a[i][i] = 1;
    return a;
}

ZMat zmat_mul(const ZMat& a, const ZMat& b) {
    std::size_t n = a.size(), m = b.empty() ? 0 : b[0].size(), k = b.size();
    ZMat c(n, ZVec(m, Int(0)));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t l = 0; l < k; ++l) {
            if (a[i][l] == 0) continue;
            for (std::size_t j = 0; j < m; ++j) c[i][j] += a[i][l] * b[l][j];
        }
    return c;
}

Int zmat_det(ZMat a) {
    QMat q(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (auto& x : a[i]) q[i].push_back(Rat(x));
    Rat d = qmat_det(q);
    assert(d.get_den() == 1);
    return d.get_num();
}

ZMat zmat_hnf(ZMat a) {
    std::size_t rows = a.size(), cols = rows ? a[0].size() : 0;
    std::size_t rank = 0;
    for (std::size_t col = 0; col < cols && rank < rows; ++col) {
        // reduce rows rank..end on this column by gcd steps
        for (;;) {
            std::size_t piv = rows;
            for (std::size_t r = rank; r < rows; ++r)
                if (a[r][col] != 0 && (piv == rows || abs(a[r][col]) < abs(a[piv][col]))) piv = r;
            if (piv == rows) break;
            std::swap(a[piv], a[rank]);
            bool clean = true;
            for (std::size_t r = rank + 1; r < rows; ++r) {
                if (a[r][col] == 0) continue;
                Int q = a[r][col] / a[rank][col];
                // round toward making remainder small
                for (std::size_t j = 0; j < cols; ++j) a[r][j] -= q * a[rank][j];
                if (a[r][col] != 0) clean = false;
            }
            if (clean) break;
        }
        if (a[rank][col] == 0) continue;
        if (a[rank][col] < 0)
            for (auto& x : a[rank]) x = -x;
        // reduce above
        for (std::size_t r = 0; r < rank; ++r) {
            Int q;
            mpz_fdiv_q(q.get_mpz_t(), a[r][col].get_mpz_t(), a[rank][col].get_mpz_t());
            if (q != 0)
                for (std::size_t j = 0; j < cols; ++j) a[r][j] -= q * a[rank][j];
        }
        ++rank;
    }
    a.resize(rank);
    return a;
}

std::pair<ZMat, Int> qmat_hnf(const QMat& a) {
    Int den = 1;
    for (const auto& row : a)
        for (const auto& x : row) mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), x.get_den().get_mpz_t());
    ZMat z(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (const auto& x : a[i]) {
            Rat s = x * Rat(den);
            assert(s.get_den() == 1);
            z[i].push_back(s.get_num());
        }
    ZMat h = zmat_hnf(std::move(z));
    // minimize denominator: divide by gcd of all entries and den
    Int g = den;
    for (const auto& row : h)
        for (const auto& x : row) mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), x.get_mpz_t());
    if (g > 1) {
        for (auto& row : h)
            for (auto& x : row) x /= g;
        den /= g;
    }
    return {h, den};
}

QMat qmat_from_scaled(const ZMat& h, const Int& d) {
    QMat q(h.size());
    for (std::size_t i = 0; i < h.size(); ++i)
        for (const auto& x : h[i]) q[i].push_back(Rat(x) / Rat(d));
    return q;
}

ZMat lll_transform(const QMat& gram) {
    const std::size_t n = gram.size();
    ZMat U = zmat_identity(n);
    if (n <= 1) return U;
    // current Gram of U * G * U^T
    QMat G = gram;
    auto swap_rows = [&](std::size_t k) {
        std::swap(U[k], U[k - 1]);
        std::swap(G[k], G[k - 1]);
        for (std::size_t i = 0; i < n; ++i) std::swap(G[i][k], G[i][k - 1]);
    };
    auto translate = [&](std::size_t k, std::size_t j, const Int& q) {
        // row_k -= q * row_j
        if (q == 0) return;
        for (std::size_t c = 0; c < n; ++c) U[k][c] -= q * U[j][c];
        Rat qq(q);
        for (std::size_t c = 0; c < n; ++c) G[k][c] -= qq * G[j][c];
        for (std::size_t c = 0; c < n; ++c) G[c][k] -= qq * G[c][j];
    };
    // Gram-Schmidt data recomputed on demand (n <= 8 here, so simplicity wins)
    QVec B(n);
    QMat mu(n, QVec(n, Rat(0)));
    auto gso = [&]() {
        for (std::size_t i = 0; i < n; ++i) {
            B[i] = G[i][i];
            for (std::size_t j = 0; j < i; ++j) {
                Rat m = G[i][j];
                for (std::size_t l = 0; l < j; ++l) m -= mu[i][l] * mu[j][l] * B[l];
                mu[i][j] = (B[j] == 0) ? Rat(0) : m / B[j];
                B[i] -= mu[i][j] * mu[i][j] * B[j];
            }
        }
    };
    gso();
    std::size_t k = 1;
    const Rat delta(3, 4);
    while (k < n) {
        for (std::size_t j = k; j-- > 0;) {
            Rat m = mu[k][j];
            Int q;
            // nearest integer
            Rat half(1, 2);
            Rat shifted = m + half;
            mpz_fdiv_q(q.get_mpz_t(), shifted.get_num().get_mpz_t(), shifted.get_den().get_mpz_t());
            if (q != 0) {
                translate(k, j, q);
                gso();
            }
        }
        if (B[k] >= (delta - mu[k][k - 1] * mu[k][k - 1]) * B[k - 1]) {
            ++k;
        } else {
            swap_rows(k);
            gso();
            if (k > 1) --k;
        }
    }
    return U;
}

Int isqrt(const Int& n) {
    Int r;
    mpz_sqrt(r.get_mpz_t(), n.get_mpz_t());
    return r;
}

Int rat_floor(const Rat& r) {
    Int q;
    mpz_fdiv_q(q.get_mpz_t(), r.get_num().get_mpz_t(), r.get_den().get_mpz_t());
    return q;
}

Int rat_sqrt_floor(const Rat& r) {
    if (r < 0) throw std::domain_error("rat_sqrt_floor of negative");
    Int k = isqrt(rat_floor(r));
    while (Rat((k + 1) * (k + 1)) <= r) ++k;
    while (Rat(k * k) > r) --k;
    return k;
}

std::vector<std::pair<ZVec, Rat>> fincke_pohst(const QMat& gram, const Rat& bound) {
    const std::size_t n = gram.size();
    std::vector<std::pair<ZVec, Rat>> out;
    if (n == 0) return out;
    // Cholesky-style: q[i][i] = D_i, q[i][j] = mu factors (i<j)
    QMat q = gram;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            q[j][i] = q[i][j];
            q[i][j] = q[i][j] / q[i][i];
        }
        for (std::size_t k = i + 1; k < n; ++k)
            for (std::size_t l = k; l < n; ++l) q[k][l] -= q[k][i] * q[i][l];
    }
    // Q(x) = sum_i D_i (x_i + sum_{j>i} q_ij x_j)^2
    ZVec x(n, Int(0));
    std::function<void(std::size_t, Rat)> rec = [&](std::size_t level, Rat remaining) {
        std::size_t i = level; // from n-1 down to 0
        Rat Di = q[i][i];
        Rat ci(0);
        for (std::size_t j = i + 1; j < n; ++j) ci += q[i][j] * Rat(x[j]);
        // D_i (x_i + c_i)^2 <= remaining
        Rat lim2 = remaining / Di;
        // widen the window by one to absorb the sqrt truncation; the exact
        // term test below rejects any overshoot
        Int t = rat_sqrt_floor(lim2);
        Int lo = rat_floor(-ci - Rat(t)) - 1;
        Int hi = rat_floor(-ci + Rat(t)) + 1;
        for (Int v = lo; v <= hi; ++v) {
            Rat term = Di * (Rat(v) + ci) * (Rat(v) + ci);
            if (term > remaining) continue;
            x[i] = v;
            if (i == 0) {
                bool zero = true;
                for (auto& xx : x)
                    if (xx != 0) {
                        zero = false;
                        break;
                    }
                if (!zero) {
                    // value of the form
                    Rat val = bound - (remaining - term);
                    // normalize representative: last nonzero coordinate > 0
                    ZVec rep = x;
                    for (std::size_t j = n; j-- > 0;) {
                        if (rep[j] != 0) {
                            if (rep[j] < 0)
                                for (auto& xx : rep) xx = -xx;
                            break;
                        }
                    }
                    // avoid duplicates: only emit if x equals its representative
                    if (rep == x) out.push_back({x, val});
                }
            } else {
                rec(i - 1, remaining - term);
            }
        }
        x[i] = 0;
    };
    rec(n - 1, bound);
    return out;
}

} // namespace iso

namespace iso {

QMat qmat_lattice_hnf(const QMat& rows) {
    auto [h, d] = qmat_hnf(rows);
    return qmat_from_scaled(h, d);
}

QMat qmat_lattice_dual(const QMat& B) {
    auto inv = qmat_inverse(B);
    return qmat_transpose(*inv);
}

QMat qmat_lattice_intersect(const QMat& B1, const QMat& B2) {
    QMat sum = qmat_lattice_dual(B1);
    QMat d2 = qmat_lattice_dual(B2);
    sum.insert(sum.end(), d2.begin(), d2.end());
    return qmat_lattice_dual(qmat_lattice_hnf(sum));
}

} // namespace iso
