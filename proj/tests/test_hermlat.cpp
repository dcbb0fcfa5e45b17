#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "iso/hermlat.hpp"

#include <algorithm>

using namespace iso;

namespace {

QOElem el(const QuadOrder& R, const Rat& a, const Rat& b) { return {a, b, R.dF}; }

// Gram entries written as x + y*omega with omega = (dF + sqrt(dF))/2
QOElem om(const QuadOrder& R, long x, long y) {
    return R.from_rat(Rat(x)) + R.omega() * R.from_rat(Rat(y));
}

HermSpace diag_space(const QuadOrder& R, const std::vector<Rat>& d) {
    int g = static_cast<int>(d.size());
    FMat gram(g, FVec(g, R.from_rat(Rat(0))));
    for (int i = 0; i < g; ++i) gram[i][i] = R.from_rat(d[i]);
    return {R, gram};
}

} // namespace

TEST_CASE("free lattices, duals, integrality") {
    QuadOrder R{-19, 1};
    HermSpace V = diag_space(R, {Rat(1), Rat(1)});
    REQUIRE(V.is_positive_definite());
    HermLattice L = HermLattice::free_lattice(V);
    CHECK(L.rank() == 2);
    CHECK(classify_integral(L) == IntegralClass::OddUnimodular);
    CHECK(dual_lattice(L) == L);

    // scaling gives an integral but non-unimodular lattice of index 2^4
    HermLattice L2 = L.scale(R.from_rat(Rat(2)));
    CHECK(classify_integral(L2) == IntegralClass::IntegralNonUnimodular);
    CHECK(L2.index_in(L) == Rat(16));
    CHECK(L.contains_lattice(L2));
    CHECK(!L2.contains_lattice(L));
    CHECK(dual_lattice(dual_lattice(L2)) == L2);

    // dual reverses inclusions
    CHECK(dual_lattice(L).contains_lattice(dual_lattice(L2)) == false);
    CHECK(dual_lattice(L2).contains_lattice(dual_lattice(L)));

    // diag(1,2) free lattice is integral, not unimodular
    HermLattice M = HermLattice::free_lattice(diag_space(R, {Rat(1), Rat(2)}));
    CHECK(classify_integral(M) == IntegralClass::IntegralNonUnimodular);

    // non R-stable Z-module is rejected
    HermSpace V1 = diag_space(R, {Rat(1)});
    CHECK_THROWS(HermLattice::from_zbasis(V1, {{Rat(1), Rat(0)}, {Rat(0), Rat(1)}}));
}

TEST_CASE("double dual is the identity on random-ish lattices") {
    std::vector<QuadOrder> orders = {{-19, 1}, {-43, 1}, {-3, 3}, {-4, 2}, {-40, 1}};
    for (const auto& R : orders) {
        HermSpace V = diag_space(R, {Rat(1), Rat(3), Rat(2)});
        HermLattice L = HermLattice::free_lattice(V);
        auto pr = split_prime_ideals(R, R.dF == -19 ? 5 : 11);
        std::vector<PseudoPair> pb;
        FVec x1 = {R.from_rat(Rat(1)), R.from_rat(Rat(0)), R.from_rat(Rat(0))};
        FVec x2 = {R.from_rat(Rat(1)), R.from_rat(Rat(1)), R.from_rat(Rat(0))};
        FVec x3 = {R.gen(), R.from_rat(Rat(0)), R.from_rat(Rat(1))};
        if (pr) {
            pb.push_back({pr->first, x1});
            pb.push_back({pr->second, x2});
        } else {
            pb.push_back({FracIdeal::unit(R).mul(R.from_rat(Rat(1) / 2)), x1});
            pb.push_back({FracIdeal::unit(R), x2});
        }
        pb.push_back({FracIdeal::unit(R), x3});
        HermLattice M = HermLattice::from_pseudo(V, pb);
        CHECK(dual_lattice(dual_lattice(M)) == M);
        CHECK(dual_lattice(dual_lattice(L)) == L);
        // det of the trace form equals det(h)^2 |disc|^g
        Rat dh = V.det_rational();
        Rat expected = dh * dh;
        Int D(-(long)R.f * R.f * R.dF);
        for (int i = 0; i < 3; ++i) expected *= Rat(D);
        CHECK(qmat_det(L.f1()) == expected);
    }
}

TEST_CASE("rank 2 unimodular lattice over disc -19") {
    QuadOrder R{-19, 1};
    QOElem w = R.omega() + R.from_rat(Rat(10)); // (1 + sqrt(-19))/2
    CHECK(w == el(R, Rat(1) / 2, Rat(1) / 2));
    FMat G = {{R.from_rat(Rat(2)), -w.conj()}, {-w, R.from_rat(Rat(3))}};
    HermSpace V{R, G};
    REQUIRE(V.is_positive_definite());
    CHECK(V.det_rational() == Rat(1));
    HermLattice L = HermLattice::free_lattice(V);
    CHECK(classify_integral(L) == IntegralClass::OddUnimodular);
    CHECK(decompose(L).size() == 1);
    CHECK(L.is_projective());

    // automorphisms: contains +-identity, order even
    AutGroup A = aut_group(L);
    CHECK(A.order % 2 == 0);
    bool has_minus = false;
    ZMat minus = zmat_identity(4);
    for (auto& r : minus)
        for (auto& c : r) c = -c;
    for (const auto& M : A.elements)
        if (M == minus) has_minus = true;
    CHECK(has_minus);

    // same lattice with the basis swapped is isometric
    FMat G2 = {{R.from_rat(Rat(3)), -w}, {-w.conj(), R.from_rat(Rat(2))}};
    HermLattice L2 = HermLattice::free_lattice(HermSpace{R, G2});
    auto P = is_isometric(L, L2);
    REQUIRE(P.has_value());
    CHECK(L.fingerprint() == L2.fingerprint());

    // and it is not isometric to the decomposable diag(1,1) lattice
    HermLattice D = HermLattice::free_lattice(diag_space(R, {Rat(1), Rat(1)}));
    CHECK(!is_isometric(L, D).has_value());
}

TEST_CASE("the five rank 3 unimodular lattices over disc -43") {
    QuadOrder R{-43, 1};
    // entries x + y*w with w = (1 + sqrt(-43))/2 = omega + 22
    auto e = [&](long x, long y) {
        return R.from_rat(Rat(x)) + (R.omega() + R.from_rat(Rat(22))) * R.from_rat(Rat(y));
    };
    auto mk = [&](std::vector<std::vector<std::pair<long, long>>> rows) {
        int g = 3;
        FMat G(g, FVec(g, R.from_rat(Rat(0))));
        for (int i = 0; i < g; ++i)
            for (int j = 0; j < g; ++j) G[i][j] = e(rows[i][j].first, rows[i][j].second);
        return HermLattice::free_lattice(HermSpace{R, G});
    };
    QOElem w = R.omega() + R.from_rat(Rat(22));
    CHECK(w == el(R, Rat(1) / 2, Rat(1) / 2));
    // 1 - conj(w) = 1 - (1 - w + tr(w) - ... ) ; just write entries as a + b w
    // using conj(w) = 1 - w since tr(w) = 1
    std::vector<HermLattice> Ls = {
        // [3, 1, 1-conj(w); 1, 4, 2; 1-w, 2, 5] with 1-conj(w) = w
        mk({{{3, 0}, {1, 0}, {0, 1}}, {{1, 0}, {4, 0}, {2, 0}}, {{1, -1}, {2, 0}, {5, 0}}}),
        // [3, 1+conj(w), 2-conj(w); 1+w, 5, -2-conj(w); 2-w, -2-w, 5]
        mk({{{3, 0}, {2, -1}, {1, 1}}, {{1, 1}, {5, 0}, {-3, 1}}, {{2, -1}, {-2, -1}, {5, 0}}}),
        // [2, -1, 1; -1, 4, 1-conj(w); 1, 1-w, 4]
        mk({{{2, 0}, {-1, 0}, {1, 0}}, {{-1, 0}, {4, 0}, {0, 1}}, {{1, 0}, {1, -1}, {4, 0}}}),
        // [3, 1, -1-conj(w); 1, 3, -1; -1-w, -1, 5]
        mk({{{3, 0}, {1, 0}, {-2, 1}}, {{1, 0}, {3, 0}, {-1, 0}}, {{-1, -1}, {-1, 0}, {5, 0}}}),
        // [3, -1, -1-conj(w); -1, 3, 0; -1-w, 0, 5]
        mk({{{3, 0}, {-1, 0}, {-2, 1}}, {{-1, 0}, {3, 0}, {0, 0}}, {{-1, -1}, {0, 0}, {5, 0}}}),
    };
    std::vector<unsigned long> expected_aut = {2, 12, 4, 4, 4};
    for (std::size_t i = 0; i < Ls.size(); ++i) {
        REQUIRE(Ls[i].space().is_positive_definite());
        CHECK(Ls[i].space().det_rational() == Rat(1));
        CHECK(classify_integral(Ls[i]) == IntegralClass::OddUnimodular);
        CHECK(decompose(Ls[i]).size() == 1);
        CHECK(aut_group(Ls[i]).order == expected_aut[i]);
    }
    for (std::size_t i = 0; i < Ls.size(); ++i)
        for (std::size_t j = i + 1; j < Ls.size(); ++j)
            CHECK(!is_isometric(Ls[i], Ls[j]).has_value());
}

TEST_CASE("rank 3 unimodular lattice over Z[2i] and its 2-adic diagonal") {
    QuadOrder R{-4, 2};
    QOElem i2 = R.gen(); // 2i = f*omega for dF=-4, f=2? f*omega = (f dF + f sqrt(dF))/2 = -4 + sqrt(-4)
    // write 2i directly as 0 + 1*sqrt(-4)
    QOElem twoi = el(R, Rat(0), Rat(1));
    CHECK(i2 == twoi + R.from_rat(Rat(-4)));
    QOElem one = R.from_rat(Rat(1));
    FMat G = {{one * R.from_rat(Rat(3)), twoi, twoi - one},
              {-twoi, one * R.from_rat(Rat(3)), twoi + one},
              {-twoi - one, -twoi + one, one * R.from_rat(Rat(3))}};
    HermSpace V{R, G};
    REQUIRE(V.is_positive_definite());
    CHECK(V.det_rational() == Rat(1));
    HermLattice L = HermLattice::free_lattice(V);
    CHECK(classify_integral(L) == IntegralClass::OddUnimodular);
    LocalData d2 = local_data(L, 2);
    CHECK(d2.free);
    CHECK(!d2.even);
    CHECK(d2.det_is_norm);
    CHECK(d2.diag_units_2 == std::vector<int>({1, 3, 3}));
}

TEST_CASE("non-free unimodular lattice over Q(sqrt(-10))") {
    QuadOrder R{-40, 1};
    QOElem sd = R.sqrt_d(); // sqrt(-40) = 2 sqrt(-10)
    // work with sqrt(-10) = sd / 2
    QOElem s10 = el(R, Rat(0), Rat(1) / 2);
    CHECK(s10 * s10 == R.from_rat(Rat(-10)));
    (void)sd;
    HermSpace V = diag_space(R, {Rat(1), Rat(2)});
    // prime over 2: (2, sqrt(-10))
    FracIdeal p2 = FracIdeal::from_gens(R, {R.from_rat(Rat(2)), s10});
    CHECK(p2.index_in_order() == Rat(2));
    FracIdeal quarterO = FracIdeal::unit(R).mul(R.from_rat(Rat(1) / 4));
    std::vector<PseudoPair> pb = {
        {p2, {R.from_rat(Rat(2)), R.from_rat(Rat(0))}},
        {quarterO, {s10 + R.from_rat(Rat(2)), R.from_rat(Rat(1))}},
    };
    HermLattice L = HermLattice::from_pseudo(V, pb);
    CHECK(classify_integral(L) == IntegralClass::OddUnimodular);
    CHECK(L.is_projective());
    // the space determinant 2 is not a local norm exactly at the ramified primes 2 and 5
    CHECK(!space_det_is_norm(V, 2));
    CHECK(!space_det_is_norm(V, 5));
    CHECK(space_det_is_norm(V, 3));
    CHECK(space_det_is_norm(V, 7));
    CHECK(space_det_is_norm(V, 13));
}

TEST_CASE("orthogonal sums decompose into their summands") {
    QuadOrder R{-19, 1};
    QOElem w = el(R, Rat(1) / 2, Rat(1) / 2);
    FMat G = {{R.from_rat(Rat(1)), R.from_rat(Rat(0)), R.from_rat(Rat(0))},
              {R.from_rat(Rat(0)), R.from_rat(Rat(2)), -w.conj()},
              {R.from_rat(Rat(0)), -w, R.from_rat(Rat(3))}};
    HermLattice L = HermLattice::free_lattice(HermSpace{R, G});
    auto parts = decompose(L);
    REQUIRE(parts.size() == 2);
    std::sort(parts.begin(), parts.end(),
              [](const HermLattice& a, const HermLattice& b) { return a.rank() < b.rank(); });
    CHECK(parts[0].rank() == 1);
    CHECK(parts[1].rank() == 2);
    CHECK(classify_integral(parts[0]) == IntegralClass::OddUnimodular);
    CHECK(classify_integral(parts[1]) == IntegralClass::OddUnimodular);
    // the rank 2 part is the indecomposable unimodular lattice from above
    FMat G2 = {{R.from_rat(Rat(2)), -w.conj()}, {-w, R.from_rat(Rat(3))}};
    HermLattice M = HermLattice::free_lattice(HermSpace{R, G2});
    CHECK(is_isometric(parts[1], M).has_value());

    HermLattice D3 = HermLattice::free_lattice(diag_space(R, {Rat(1), Rat(1), Rat(1)}));
    CHECK(decompose(D3).size() == 3);
}

TEST_CASE("even unimodular binary lattice over Z[sqrt(-2)]") {
    QuadOrder R{-8, 1};
    QOElem s2 = el(R, Rat(0), Rat(1)); // sqrt(-8)? no: sqrt(dF) = sqrt(-8)
    // use a = 1 + sqrt(-2) = 1 + sd/2
    QOElem a = R.from_rat(Rat(1)) + el(R, Rat(0), Rat(1) / 2);
    CHECK(a.nr() == Rat(3));
    (void)s2;
    FMat G = {{R.from_rat(Rat(2)), a}, {a.conj(), R.from_rat(Rat(2))}};
    HermSpace V{R, G};
    REQUIRE(V.is_positive_definite());
    CHECK(V.det_rational() == Rat(1));
    HermLattice L = HermLattice::free_lattice(V);
    CHECK(classify_integral(L) == IntegralClass::EvenUnimodular);
    LocalData d = local_data(L, 2);
    CHECK(d.even);
}

TEST_CASE("module structure at the conductor for disc -27") {
    QuadOrder R{-3, 3};
    HermSpace V = diag_space(R, {Rat(1), Rat(1), Rat(1)});
    FVec e1 = {R.from_rat(Rat(1)), R.from_rat(Rat(0)), R.from_rat(Rat(0))};
    FVec e2 = {R.from_rat(Rat(0)), R.from_rat(Rat(1)), R.from_rat(Rat(0))};
    FVec e3 = {R.from_rat(Rat(0)), R.from_rat(Rat(0)), R.from_rat(Rat(1))};

    HermLattice F = HermLattice::free_lattice(V);
    CHECK(F.is_projective());
    CHECK(F.is_free_at(3));
    CHECK(F.module_type_at(3) == std::vector<int>({1, 1, 1}));
    CHECK(F.index_under_maximal() == Rat(27));

    // R^2 + O e3: not projective, multiplicator conductors {1,1,maximal}
    std::vector<PseudoPair> pb = {{FracIdeal::unit(R), e1},
                                  {FracIdeal::unit(R), e2},
                                  {FracIdeal::maximal_order_ideal(R), e3}};
    HermLattice M = HermLattice::from_pseudo(V, pb);
    CHECK(!M.is_projective());
    CHECK(!M.is_free_at(3));
    CHECK(M.module_type_at(3) == std::vector<int>({0, 1, 1}));
    CHECK(M.index_under_maximal() == Rat(9));

    // projective but built from an invertible ideal of the order
    auto pr13 = split_prime_ideals(R, 13);
    REQUIRE(pr13.has_value());
    std::vector<PseudoPair> pb2 = {{FracIdeal::unit(R), e1},
                                   {FracIdeal::unit(R), e2},
                                   {pr13->first, e3}};
    HermLattice P = HermLattice::from_pseudo(V, pb2);
    CHECK(P.is_projective());
    CHECK(P.module_type_at(3) == std::vector<int>({1, 1, 1}));
    CHECK(P.index_under_maximal() == Rat(27));

    // at primes away from the conductor everything is free
    CHECK(M.is_free_at(2));
    CHECK(M.is_free_at(5));
}

TEST_CASE("automorphism groups of diagonal lattices") {
    QuadOrder R{-19, 1};
    // units of R are +-1: diag(1,1) has signed permutations, order 8
    HermLattice D = HermLattice::free_lattice(diag_space(R, {Rat(1), Rat(1)}));
    CHECK(aut_group(D).order == 8);
    // diag(1,2): no swap, order 4
    HermLattice D2 = HermLattice::free_lattice(diag_space(R, {Rat(1), Rat(2)}));
    CHECK(aut_group(D2).order == 4);
    // rank 1
    HermLattice D1 = HermLattice::free_lattice(diag_space(R, {Rat(1)}));
    CHECK(aut_group(D1).order == 2);
    // over Z[i] the units are +-1, +-i: rank 1 group has order 4
    QuadOrder Zi{-4, 1};
    HermLattice E1 = HermLattice::free_lattice(diag_space(Zi, {Rat(1)}));
    CHECK(aut_group(E1).order == 4);
}

TEST_CASE("vectors of given hermitian norm") {
    QuadOrder R{-19, 1};
    HermLattice D = HermLattice::free_lattice(diag_space(R, {Rat(1), Rat(1)}));
    auto v1 = herm_short_vectors(D, Rat(1));
    CHECK(v1.size() == 4); // +-e1, +-e2
    for (const auto& v : v1) CHECK(D.space().h(v, v) == R.from_rat(Rat(1)));
    // norm 5 = Nr(omega + 2)? omega = (-19+sqrt(-19))/2, use elements of norm 5: a^2+19b^2=20 -> none with half ints: ((1+sqrt)/2): (1+19)/4=5 yes
    auto v5 = herm_short_vectors(D, Rat(5));
    CHECK(v5.size() > 0);
    for (const auto& v : v5) {
        CHECK(D.space().h(v, v) == R.from_rat(Rat(5)));
        CHECK(D.contains(v));
    }

    QOElem w = el(R, Rat(1) / 2, Rat(1) / 2);
    FMat G2 = {{R.from_rat(Rat(2)), -w.conj()}, {-w, R.from_rat(Rat(3))}};
    HermLattice L = HermLattice::free_lattice(HermSpace{R, G2});
    CHECK(herm_short_vectors(L, Rat(1)).empty());
    auto v2 = herm_short_vectors(L, Rat(2));
    CHECK(v2.size() == 4); // +-e1 and +-(w e1 + 2 e2)
    for (const auto& v : v2) CHECK(L.space().h(v, v) == R.from_rat(Rat(2)));
}
