#pragma once

// Hermitian lattices over imaginary quadratic orders: integer bases of
// rank 2g, duals, integrality and parity, orthogonal decomposition,
// isometries and automorphism groups via the pair of trace forms.

#include <optional>
#include <string>
#include <vector>

#include "iso/quadorder.hpp"

namespace iso {

using FVec = std::vector<QOElem>;
using FMat = std::vector<FVec>;

// Hermitian space (F^g, h), h linear in the first argument and
// h(x, y) = conj(h(y, x)); Gram[i][j] = h(e_i, e_j).
struct HermSpace {
    QuadOrder R;
    FMat gram;

    int rank() const { return static_cast<int>(gram.size()); }
    QOElem h(const FVec& x, const FVec& y) const;
    Rat det_rational() const; // det of the Gram matrix, a rational number
    bool is_positive_definite() const;
    bool operator==(const HermSpace& o) const { return R == o.R && gram == o.gram; }
};

struct PseudoPair {
    FracIdeal ideal;
    FVec vec;
};

enum class IntegralClass { NonIntegral, OddUnimodular, EvenUnimodular, IntegralNonUnimodular };

// Full R-lattice in (V, h), stored as a canonical HNF basis of its
// rank-2g Z-module in flattened coordinates (re_1, im_1, ..., re_g, im_g)
// where v_i = re_i + im_i * sqrt(d_F). A pseudo-basis is kept when the
// lattice was built from one.
class HermLattice {
public:
    static HermLattice from_pseudo(const HermSpace& V, std::vector<PseudoPair> pb);
    static HermLattice from_zbasis(const HermSpace& V, const QMat& rows);
    static HermLattice free_lattice(const HermSpace& V); // R^g, standard basis

    const HermSpace& space() const { return V_; }
    int rank() const { return V_.rank(); }
    const QMat& zbasis() const { return B_; } // 2g x 2g, HNF-canonical
    const std::optional<std::vector<PseudoPair>>& pseudo_basis() const { return pb_; }

    FVec vec_from_flat(const QVec& t) const;
    QVec flat_from_vec(const FVec& v) const;
    // i-th Z-basis vector as an element of F^g
    FVec basis_vec(std::size_t i) const { return vec_from_flat(B_[i]); }

    bool contains(const FVec& v) const;
    bool contains_lattice(const HermLattice& o) const;
    bool operator==(const HermLattice& o) const { return B_ == o.B_ && V_ == o.V_; }
    Rat index_in(const HermLattice& super) const; // [super : this]

    HermLattice add(const HermLattice& o) const;
    HermLattice intersect(const HermLattice& o) const;
    HermLattice scale(const QOElem& c) const;
    HermLattice mul_order(const QuadOrder& S) const; // S * L for an overorder S

    // trace forms on the Z-basis: f1 = Tr(h(b_i,b_j)), fsqrt = Tr(sqrt(d) h(b_i,b_j))
    QMat f1() const;
    QMat fsqrt() const;
    FMat herm_gram() const;

    // [O L : L]; equals f^g exactly when L is projective over R
    Rat index_under_maximal() const;
    bool is_projective() const;
    bool is_free_at(const Int& p) const;
    // multiset of conductor exponents c_i at p of the multiplicator rings
    // in a Borevich-Faddeev decomposition, recovered from the index chain
    // log_p [S_j L : L] = sum_i max(0, c_i - j)
    std::vector<int> module_type_at(const Int& p) const;

    // short invariant string: det, parity, sorted prefix of the f1 theta series
    std::string fingerprint() const;

private:
    HermSpace V_;
    QMat B_;
    std::optional<std::vector<PseudoPair>> pb_;
};

HermLattice dual_lattice(const HermLattice& L);
IntegralClass classify_integral(const HermLattice& L);

// unique orthogonal decomposition into indecomposable R-sublattices
std::vector<HermLattice> decompose(const HermLattice& L);

// Isometry L1 -> L2 as a matrix P over F acting on row coordinate
// vectors, P * Gram2 * conj(P)^T = Gram1 and (L1) P = L2; or absent.
std::optional<FMat> is_isometric(const HermLattice& L1, const HermLattice& L2);

struct AutGroup {
    std::vector<ZMat> elements; // in Z-basis coordinates of L
    unsigned long order = 0;
};
AutGroup aut_group(const HermLattice& L);

struct LocalData {
    int rank = 0;
    bool det_is_norm = true; // det(V_p, h) in Nr(F_p^*)
    bool even = false;
    bool free = true; // L_p free over R_p
    std::vector<int> diag_units_2; // L_2 = <u_1,...,u_g>, u_i in {1,3,5,7}, when free and odd at 2
};
LocalData local_data(const HermLattice& L, const Int& p);

// class of det(V_p, h) in Q_p^*/Nr(F_p^*) for the space alone
bool space_det_is_norm(const HermSpace& V, const Int& p);

// all v in L with h(v,v) = ell (both signs included)
std::vector<FVec> herm_short_vectors(const HermLattice& L, const Rat& ell);

} // namespace iso
