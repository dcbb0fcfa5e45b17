#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "iso/kernelgen.hpp"
#include "iso/orthsearch.hpp"

using namespace iso;

namespace {

HermLattice disc19_lattice() {
    QuadOrder R{-19, 1};
    QOElem w = R.omega() + R.from_rat(Rat(10));
    HermSpace V{R, {{R.from_rat(Rat(2)), -w.conj()}, {-w, R.from_rat(Rat(3))}}};
    return HermLattice::free_lattice(V);
}

EllCurve curve61() {
    FieldPtr F = FiniteField::prime_field(61);
    return make_curve(F, F->from_int(11), F->from_int(17));
}

} // namespace

TEST_CASE("frobenius coordinates recombine exactly") {
    QuadOrder R{-19, 1};
    // pi for q = 61, t = -15: disc -19, conductor 1
    QOElem pi{Rat(-15) / 2, Rat(1) / 2, -19};
    for (long a = -3; a <= 3; ++a)
        for (long b = -3; b <= 3; ++b) {
            QOElem x = R.from_rat(Rat(a)) + R.from_rat(Rat(b)) * pi;
            auto [ap, bp] = frobenius_coords(x, Int(-15), 1);
            CHECK(ap == a);
            CHECK(bp == b);
        }
    CHECK_THROWS(frobenius_coords(QOElem{Rat(1) / 3, Rat(0), -19}, Int(-15), 1));
}

TEST_CASE("presentation matrix entries lie in the order and recombine") {
    HermLattice L = disc19_lattice();
    EllSearch s = min_odd_ell(L, Int(61));
    REQUIRE(s.status == EllSearchStatus::Found);
    REQUIRE(s.ell == 3);
    FMat P = presentation_matrix(L, s.family);
    REQUIRE(P.size() == 4);
    REQUIRE(P[0].size() == 2);
    for (const auto& row : P)
        for (const auto& x : row) CHECK_NOTHROW(frobenius_coords(x, Int(-15), 1));
    // entry (i, j) is the pairing of basis vector i against family j
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 2; ++j)
            CHECK(P[i][j] == L.space().h(L.basis_vec(i), s.family.vectors[j]));
}

TEST_CASE("kernel for the disc -19 class at ell = 3 validates") {
    HermLattice L = disc19_lattice();
    EllCurve E = curve61();
    EllSearch s = min_odd_ell(L, Int(61));
    REQUIRE(s.status == EllSearchStatus::Found);
    IsogenyKernel K = kernel_points(L, E, 3, s.family);
    CHECK(K.ell == 3);
    CHECK(K.torsion.ext_degree == 4);
    REQUIRE(K.gens.size() == 2);
    for (const auto& tup : K.gens) {
        REQUIRE(tup.size() == 2);
        for (const auto& P : tup) {
            CHECK(on_curve(E, P));
            CHECK(ep_mul(E, Int(3), P).inf);
        }
    }
    KernelReport rep = validate_kernel(K);
    CHECK(rep.order_ok);
    CHECK(rep.rank_ok);
    CHECK(rep.isotropic);
    CHECK(rep.frobenius_stable);
}

TEST_CASE("kernel subgroup does not depend on the basis presentation") {
    HermLattice L = disc19_lattice();
    EllCurve E = curve61();
    EllSearch s = min_odd_ell(L, Int(61));
    REQUIRE(s.status == EllSearchStatus::Found);
    IsogenyKernel K1 = kernel_points(L, E, 3, s.family);

    // rebuild the same lattice from a pseudo-basis
    const HermSpace& V = L.space();
    FracIdeal one = FracIdeal::unit(V.R);
    FVec x1 = {V.R.from_rat(Rat(1)), V.R.from_rat(Rat(0))};
    FVec x2 = {V.R.from_rat(Rat(0)), V.R.from_rat(Rat(1))};
    HermLattice L2 = HermLattice::from_pseudo(V, {{one, x1}, {one, x2}});
    REQUIRE(L2 == L);
    IsogenyKernel K2 = kernel_points(L2, E, 3, s.family);
    CHECK(kernel_canonical(K1) == kernel_canonical(K2));
}

TEST_CASE("free rank 2 lattice over disc -11 gives a valid kernel end to end") {
    QuadOrder R{-11, 1};
    QOElem w = R.omega() + R.from_rat(Rat(6)); // (1 + sqrt(-11))/2, norm 3
    HermSpace V{R, {{R.from_rat(Rat(2)), w}, {w.conj(), R.from_rat(Rat(2))}}};
    HermLattice L = HermLattice::free_lattice(V);
    REQUIRE(classify_integral(L) == IntegralClass::OddUnimodular);
    // q = 5, t = 3: disc 9 - 20 = -11, maximal order
    auto curves = curves_with_trace_minring(5, Int(3), 1);
    REQUIRE(curves.size() == 1);
    const EllCurve& E = curves[0];
    auto fam = orthogonal_family_norm(dual_lattice(L), Rat(3));
    REQUIRE(fam.has_value());
    IsogenyKernel K = kernel_points(L, E, 3, *fam);
    CHECK(validate_kernel(K).ok());
}

TEST_CASE("validator flags deliberately broken subgroups") {
    EllCurve E = curve61();
    TorsionData td = torsion_data(E, 3);
    EPoint inf = EPoint::infinity(td.K);

    IsogenyKernel good;
    good.E = E;
    good.ell = 3;
    good.torsion = td;
    good.gens = {{td.b0, inf}, {inf, td.b0}};
    KernelReport r1 = validate_kernel(good);
    CHECK(r1.order_ok);
    CHECK(r1.rank_ok);
    CHECK(r1.isotropic);
    // Frobenius mixes b0 and b1 here, so the subgroup is not stable
    CHECK(!r1.frobenius_stable);

    IsogenyKernel bad = good;
    bad.gens = {{td.b0, td.b0}, {td.b1, inf}};
    KernelReport r2 = validate_kernel(bad);
    CHECK(r2.order_ok);
    CHECK(!r2.isotropic);

    IsogenyKernel small = good;
    small.gens = {{td.b0, inf}};
    KernelReport r3 = validate_kernel(small);
    CHECK(!r3.order_ok);
}
