#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <set>
#include <sstream>

#include "iso/classify.hpp"
#include "iso/orthsearch.hpp"

using namespace iso;

namespace {

HermSpace diag_space(const QuadOrder& R, const std::vector<Rat>& d) {
    int g = static_cast<int>(d.size());
    FMat gram(g, FVec(g, R.from_rat(Rat(0))));
    for (int i = 0; i < g; ++i) gram[i][i] = R.from_rat(d[i]);
    return {R, gram};
}

std::string vec_key(const HermLattice& L, const FVec& v) {
    std::ostringstream os;
    for (const auto& x : L.flat_from_vec(v)) os << x.get_str() << ';';
    return os.str();
}

// exhaustive box enumeration of {v in L : h(v,v) = ell}
std::set<std::string> box_oracle(const HermLattice& L, const Rat& ell) {
    QMat G = L.f1();
    std::size_t n = G.size();
    auto inv = qmat_inverse(G);
    REQUIRE(inv.has_value());
    std::vector<long> radius(n);
    for (std::size_t i = 0; i < n; ++i)
        radius[i] = rat_sqrt_floor(Rat(2) * ell * (*inv)[i][i]).get_si();
    std::set<std::string> out;
    std::vector<long> c(n, 0);
    std::function<void(std::size_t)> rec = [&](std::size_t pos) {
        if (pos == n) {
            QVec flat(n, Rat(0));
            bool zero = true;
            for (std::size_t i = 0; i < n; ++i) {
                zero = zero && c[i] == 0;
                for (std::size_t j = 0; j < n; ++j) flat[j] += Rat(c[i]) * L.zbasis()[i][j];
            }
            if (zero) return;
            FVec v = L.vec_from_flat(flat);
            QOElem h = L.space().h(v, v);
            if (h.is_rational() && h.a == ell) out.insert(vec_key(L, v));
            return;
        }
        for (long t = -radius[pos]; t <= radius[pos]; ++t) {
            c[pos] = t;
            rec(pos + 1);
        }
    };
    rec(0);
    return out;
}

void check_family(const HermLattice& L, const OrthFamily& fam, const Rat& ell) {
    REQUIRE(fam.vectors.size() == static_cast<std::size_t>(L.rank()));
    for (std::size_t i = 0; i < fam.vectors.size(); ++i) {
        CHECK(L.contains(fam.vectors[i]));
        CHECK(fam.norms[i] == ell);
        for (std::size_t j = 0; j < fam.vectors.size(); ++j) {
            QOElem h = L.space().h(fam.vectors[i], fam.vectors[j]);
            if (i == j)
                CHECK(h == L.space().R.from_rat(ell));
            else
                CHECK(h.is_zero());
        }
    }
}

} // namespace

TEST_CASE("short vectors match the box oracle on small lattices") {
    QuadOrder R19{-19, 1};
    QOElem w = R19.omega() + R19.from_rat(Rat(10));
    HermSpace V{R19, {{R19.from_rat(Rat(2)), -w.conj()}, {-w, R19.from_rat(Rat(3))}}};
    std::vector<HermLattice> Ls = {HermLattice::free_lattice(V),
                                   HermLattice::free_lattice(diag_space(QuadOrder{-11, 1}, {1, 1}))};
    for (const auto& L : Ls)
        for (long ell = 1; ell <= 20; ++ell) {
            std::set<std::string> fast;
            for (const auto& v : short_vectors(L, Rat(ell))) fast.insert(vec_key(L, v));
            CHECK(fast == box_oracle(L, Rat(ell)));
        }
}

TEST_CASE("unit norm vectors of free diagonal lattices") {
    QuadOrder R{-19, 1};
    HermLattice L1 = HermLattice::free_lattice(diag_space(R, {1}));
    CHECK(short_vectors(L1, Rat(1)).size() == 2);
    HermLattice L2 = HermLattice::free_lattice(diag_space(R, {1, 1}));
    CHECK(short_vectors(L2, Rat(1)).size() == 4);
}

TEST_CASE("greedy orthogonal basis is orthogonal and minimal on diagonals") {
    QuadOrder R{-11, 1};
    HermLattice L = HermLattice::free_lattice(diag_space(R, {1, 1, 1}));
    OrthFamily fam = orthogonal_basis(L);
    REQUIRE(fam.vectors.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(fam.norms[i] == Rat(1));
        CHECK(L.contains(fam.vectors[i]));
        for (std::size_t j = i + 1; j < 3; ++j)
            CHECK(L.space().h(fam.vectors[i], fam.vectors[j]).is_zero());
    }

    // a non-diagonal lattice still yields an orthogonal family inside L
    QOElem w = R.omega() + R.from_rat(Rat(6)); // (1+sqrt(-11))/2, norm 3
    HermSpace V{R, {{R.from_rat(Rat(2)), w}, {w.conj(), R.from_rat(Rat(2))}}};
    HermLattice M = HermLattice::free_lattice(V);
    OrthFamily fm = orthogonal_basis(M);
    REQUIRE(fm.vectors.size() == 2);
    CHECK(M.contains(fm.vectors[0]));
    CHECK(M.contains(fm.vectors[1]));
    CHECK(V.h(fm.vectors[0], fm.vectors[1]).is_zero());
    CHECK(fm.norms[0] <= fm.norms[1]);
}

TEST_CASE("equal norm family on a scaled identity is found immediately") {
    QuadOrder R{-19, 1};
    HermLattice L = HermLattice::free_lattice(diag_space(R, {5, 5, 5}));
    auto fam = orthogonal_family_norm(L, Rat(5));
    REQUIRE(fam.has_value());
    check_family(L, *fam, Rat(5));
}

TEST_CASE("determinant pre-test agrees with exhaustive search on small lattices") {
    // whenever the pre-test rejects, no family exists among the short vectors
    std::vector<std::pair<QuadOrder, std::vector<Rat>>> cases = {
        {QuadOrder{-40, 1}, {1, 2}}, {QuadOrder{-40, 1}, {1, 3}},  {QuadOrder{-11, 1}, {1, 2}},
        {QuadOrder{-15, 2}, {1, 2}}, {QuadOrder{-15, 2}, {2, 3}},  {QuadOrder{-4, 2}, {1, 5}},
    };
    for (const auto& [R, diag] : cases) {
        HermLattice L = HermLattice::free_lattice(diag_space(R, diag));
        for (long ell = 1; ell <= 9; ++ell) {
            Rat target = L.space().det_rational() * Rat(ell) * Rat(ell);
            bool pretest = rational_is_field_norm(R, target);
            // brute force over pairs of norm-ell vectors
            auto sv = short_vectors(L, Rat(ell));
            bool exists = false;
            for (std::size_t i = 0; i < sv.size() && !exists; ++i)
                for (std::size_t j = i + 1; j < sv.size() && !exists; ++j)
                    exists = L.space().h(sv[i], sv[j]).is_zero();
            if (!pretest) CHECK(!exists);
            auto fam = orthogonal_family_norm(L, Rat(ell));
            CHECK(fam.has_value() == exists);
            if (fam) check_family(L, *fam, Rat(ell));
        }
    }
}

TEST_CASE("rank 2 lattice with non-norm determinant admits no equal norm family") {
    // L = p*(2,0) + (1/4)O*(sqrt(-10)+2, 1) in diag(1,2) over Q(sqrt(-10))
    QuadOrder O{-40, 1};
    HermSpace V = diag_space(O, {1, 2});
    QOElem rt10{Rat(0), Rat(1) / Rat(2), -40}; // sqrt(-10) = sqrt(-40)/2
    FracIdeal P = FracIdeal::from_gens(O, {O.from_rat(Rat(2)), rt10});
    FracIdeal quarter = FracIdeal::unit(O).mul(O.from_rat(Rat(1) / Rat(4)));
    FVec x1 = {O.from_rat(Rat(2)), O.from_rat(Rat(0))};
    FVec x2 = {rt10 + O.from_rat(Rat(2)), O.from_rat(Rat(1))};
    HermLattice L = HermLattice::from_pseudo(V, {{P, x1}, {quarter, x2}});

    CHECK(classify_integral(L) == IntegralClass::OddUnimodular);
    CHECK(L.is_projective());
    CHECK(!rational_is_field_norm(O, V.det_rational()));
    CHECK(!feasible_equal_norm(L, Int(2)));
    EllSearch s = min_odd_ell(L, Int(3));
    CHECK(s.status == EllSearchStatus::DeterminantObstruction);
    // the search really never succeeds up to a modest bound
    HermLattice Ld = dual_lattice(L);
    for (long ell = 1; ell <= 15; ell += 2) CHECK(!orthogonal_family_norm(Ld, Rat(ell)).has_value());
}

TEST_CASE("the rank 3 lattice over Z[2i] has a 2-adic obstruction") {
    QuadOrder R{-4, 2};
    QOElem ti = R.sqrt_d(); // 2i
    auto e = [&](long a, long b) { return R.from_rat(Rat(a)) + R.from_rat(Rat(b)) * ti; };
    HermSpace V{R,
                {{e(3, 0), e(0, 1), e(-1, 1)}, {e(0, -1), e(3, 0), e(1, 1)}, {e(-1, -1), e(1, -1), e(3, 0)}}};
    HermLattice L = HermLattice::free_lattice(V);
    CHECK(classify_integral(L) == IntegralClass::OddUnimodular);
    CHECK(!feasible_equal_norm(L, Int(2)));
    EllSearch s = min_odd_ell(L, Int(3));
    CHECK(s.status == EllSearchStatus::LocalObstruction);
    HermLattice Ld = dual_lattice(L);
    for (long ell = 1; ell <= 11; ell += 2) CHECK(!orthogonal_family_norm(Ld, Rat(ell)).has_value());
}

TEST_CASE("smallest odd norms for the rank 2 class over disc -19") {
    QuadOrder R{-19, 1};
    QOElem w = R.omega() + R.from_rat(Rat(10));
    HermSpace V{R, {{R.from_rat(Rat(2)), -w.conj()}, {-w, R.from_rat(Rat(3))}}};
    HermLattice L = HermLattice::free_lattice(V);
    EllSearch s = min_odd_ell(L, Int(61));
    REQUIRE(s.status == EllSearchStatus::Found);
    CHECK(s.ell == 3);
    check_family(dual_lattice(L), s.family, Rat(3));
}

TEST_CASE("smallest odd norms for the five rank 3 classes over disc -43") {
    QuadOrder R{-43, 1};
    auto classes = enum_unimodular_maximal(R, 3);
    std::multiset<std::pair<unsigned long, long>> seen;
    for (const auto& L : classes) {
        if (decompose(L).size() != 1) continue;
        EllSearch s = min_odd_ell(L, Int(10313));
        REQUIRE(s.status == EllSearchStatus::Found);
        seen.insert({aut_group(L).order, s.ell.get_si()});
        check_family(dual_lattice(L), s.family, Rat(s.ell));
    }
    std::multiset<std::pair<unsigned long, long>> expected = {
        {2, 11}, {12, 9}, {4, 9}, {4, 11}, {4, 11}};
    CHECK(seen == expected);
}

TEST_CASE("only two of the nine classes over disc -60 admit an odd norm") {
    QuadOrder R{-15, 2};
    auto classes = enum_unimodular_projective(R, 2);
    std::vector<long> found;
    std::size_t det_obstructed = 0, local_obstructed = 0;
    for (const auto& L : classes) {
        if (decompose(L).size() != 1) continue;
        EllSearch s = min_odd_ell(L, Int(271));
        if (s.status == EllSearchStatus::Found) {
            found.push_back(s.ell.get_si());
            check_family(dual_lattice(L), s.family, Rat(s.ell));
        } else if (s.status == EllSearchStatus::DeterminantObstruction) {
            ++det_obstructed;
        } else if (s.status == EllSearchStatus::LocalObstruction) {
            ++local_obstructed;
        }
    }
    CHECK(found == std::vector<long>({5, 5}));
    CHECK(det_obstructed == 5);
    CHECK(local_obstructed == 2);
}
