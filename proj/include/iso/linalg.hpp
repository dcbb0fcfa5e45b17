#pragma once

// Exact dense linear algebra over Q and Z: Gauss, HNF, LLL, and
// Fincke-Pohst enumeration of short vectors of a positive definite form.

#include <functional>
#include <optional>
#include <vector>

#include "iso/fieldtower.hpp" // Int, Rat

namespace iso {

using ZVec = std::vector<Int>;
using ZMat = std::vector<ZVec>;
using QVec = std::vector<Rat>;
using QMat = std::vector<QVec>;

QMat qmat_identity(std::size_t n);
QMat qmat_mul(const QMat& a, const QMat& b);
QVec qmat_vec(const QMat& a, const QVec& v);
QMat qmat_transpose(const QMat& a);
QMat qmat_scale(const QMat& a, const Rat& c);
QMat qmat_add(const QMat& a, const QMat& b);
Rat qmat_det(QMat a);
std::size_t qmat_rank(QMat a);
std::optional<QMat> qmat_inverse(QMat a);
// Solve x * A = b (row-vector convention); nullopt if inconsistent.
std::optional<QVec> qmat_solve_left(const QMat& A, const QVec& b);
// Basis (as rows) of { x : x * A = 0 }.
QMat qmat_left_kernel(const QMat& A);

ZMat zmat_identity(std::size_t n);
ZMat zmat_mul(const ZMat& a, const ZMat& b);
Int zmat_det(ZMat a);

// Row Hermite normal form of the Z-module spanned by the rows; zero rows
// dropped, pivots positive, entries above each pivot reduced into [0, pivot).
ZMat zmat_hnf(ZMat a);

// Scale a rational row-span to integers: returns (H, d) with the module
// equal to (1/d) * rowspan(H), H in HNF. Canonical: d minimal positive.
std::pair<ZMat, Int> qmat_hnf(const QMat& a);
QMat qmat_from_scaled(const ZMat& h, const Int& d);

// Canonical basis of the Z-module spanned by the rows (HNF, denominators cleared).
QMat qmat_lattice_hnf(const QMat& rows);
// Dual of a full-rank row lattice: rows of (B^{-1})^T.
QMat qmat_lattice_dual(const QMat& B);
// Intersection of two full-rank row lattices: dual(dual(B1) + dual(B2)).
QMat qmat_lattice_intersect(const QMat& B1, const QMat& B2);

// Exact LLL on a positive definite Gram matrix; returns unimodular U with
// U * G * U^T reduced (delta = 3/4).
ZMat lll_transform(const QMat& gram);

// All x != 0 with x G x^T <= bound, one representative per +-pair
// (the representative has positive last nonzero coordinate).
std::vector<std::pair<ZVec, Rat>> fincke_pohst(const QMat& gram, const Rat& bound);

Int isqrt(const Int& n);
Int rat_floor(const Rat& r);
// floor(sqrt(r)) for r >= 0
Int rat_sqrt_floor(const Rat& r);

} // namespace iso
