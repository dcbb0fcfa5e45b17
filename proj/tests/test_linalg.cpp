#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "iso/linalg.hpp"

#include <set>

using namespace iso;

TEST_CASE("inverse and determinant") {
    QMat a = {{Rat(2), Rat(1)}, {Rat(1), Rat(1)}};
    CHECK(qmat_det(a) == Rat(1));
    auto inv = qmat_inverse(a);
    REQUIRE(inv.has_value());
    CHECK(qmat_mul(a, *inv) == qmat_identity(2));
    QMat s = {{Rat(1), Rat(2)}, {Rat(2), Rat(4)}};
    CHECK(qmat_det(s) == Rat(0));
    CHECK(!qmat_inverse(s).has_value());
    CHECK(qmat_rank(s) == 1);
}

TEST_CASE("solve_left and left kernel") {
    QMat A = {{Rat(1), Rat(0)}, {Rat(0), Rat(1)}, {Rat(1), Rat(1)}};
    QVec b = {Rat(3), Rat(5)};
    auto x = qmat_solve_left(A, b);
    REQUIRE(x.has_value());
    QVec check(2, Rat(0));
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 2; ++j) check[j] += (*x)[i] * A[i][j];
    CHECK(check == b);
    auto ker = qmat_left_kernel(A);
    REQUIRE(ker.size() == 1);
    QVec z(2, Rat(0));
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 2; ++j) z[j] += ker[0][i] * A[i][j];
    CHECK(z == QVec{Rat(0), Rat(0)});
}

TEST_CASE("HNF is canonical for equal row spans") {
    ZMat a = {{Int(2), Int(0)}, {Int(0), Int(2)}, {Int(1), Int(1)}};
    ZMat b = {{Int(1), Int(1)}, {Int(1), Int(-1)}};
    auto ha = zmat_hnf(a);
    auto hb = zmat_hnf(b);
    CHECK(ha == hb);
    REQUIRE(ha.size() == 2);
    CHECK(ha[0][0] == 1);
    CHECK(ha[1][1] == 2);
}

TEST_CASE("rational HNF with denominator") {
    QMat a = {{Rat(1, 2), Rat(0)}, {Rat(0), Rat(1, 2)}};
    auto [h, d] = qmat_hnf(a);
    CHECK(d == 2);
    CHECK(h == ZMat{{Int(1), Int(0)}, {Int(0), Int(1)}});
    auto back = qmat_from_scaled(h, d);
    CHECK(back[0][0] == Rat(1, 2));
}

TEST_CASE("LLL transform is unimodular and reduces the Gram") {
    QMat g = {{Rat(42), Rat(41)}, {Rat(41), Rat(42)}};
    ZMat U = lll_transform(g);
    Int d = zmat_det(U);
    CHECK((d == 1 || d == -1));
    // reduced Gram
    QMat Uq(2, QVec(2));
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) Uq[i][j] = Rat(U[i][j]);
    QMat R = qmat_mul(qmat_mul(Uq, g), qmat_transpose(Uq));
    CHECK(R[0][0] <= g[0][0]);
    CHECK(R[0][0] == Rat(2)); // (1,-1) has norm 2*42-2*41 = 2
}

TEST_CASE("fincke_pohst matches brute force box search") {
    QMat g = {{Rat(2), Rat(1)}, {Rat(1), Rat(3)}};
    Rat bound(25);
    auto found = fincke_pohst(g, bound);
    std::set<std::pair<long, long>> got;
    for (auto& [v, val] : found) {
        got.insert({v[0].get_si(), v[1].get_si()});
        // value correctness
        Rat q = Rat(2) * Rat(v[0] * v[0]) + Rat(2) * Rat(v[0] * v[1]) + Rat(3) * Rat(v[1] * v[1]);
        CHECK(q == val);
        CHECK(q <= bound);
    }
    std::set<std::pair<long, long>> expect;
    for (long a = -10; a <= 10; ++a)
        for (long b = -10; b <= 10; ++b) {
            if (a == 0 && b == 0) continue;
            long q = 2 * a * a + 2 * a * b + 3 * b * b;
            if (Rat(q) <= bound) {
                // representative with positive last nonzero coordinate
                long aa = a, bb = b;
                if (bb < 0 || (bb == 0 && aa < 0)) {
                    aa = -aa;
                    bb = -bb;
                }
                expect.insert({aa, bb});
            }
        }
    CHECK(got == expect);
}
