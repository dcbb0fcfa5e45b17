#pragma once

// Orthogonal families in definite hermitian lattices: short vector
// enumeration through the trace form, greedy orthogonal bases, a
// backtracking search for equal-norm families, and local feasibility
// tests that predict when an odd equal norm exists.

#include <optional>
#include <vector>

#include "iso/hermlat.hpp"

namespace iso {

struct OrthFamily {
    std::vector<FVec> vectors; // pairwise h-orthogonal
    std::vector<Rat> norms;    // norms[i] = h(vectors[i], vectors[i])
};

// all v in L with h(v,v) = ell, both signs included
std::vector<FVec> short_vectors(const HermLattice& L, const Rat& ell);

// g pairwise orthogonal vectors of L, each of minimal norm in the
// running orthogonal complement sublattice
OrthFamily orthogonal_basis(const HermLattice& L);

// g pairwise orthogonal vectors of L all of norm ell, or absent; a
// determinant class pre-test short-circuits impossible instances
std::optional<OrthFamily> orthogonal_family_norm(const HermLattice& L, const Rat& ell);

// whether x is a norm from F = Frac(R); decided place by place
bool rational_is_field_norm(const QuadOrder& R, const Rat& x);

// whether the unimodular lattice L contains a free sublattice
// isometric to <ell,...,ell> for some ell coprime to a; purely local
bool feasible_equal_norm(const HermLattice& L, const Int& a);

enum class EllSearchStatus {
    Found,
    DeterminantObstruction, // even rank and det(V,h) is not a norm of F
    LocalObstruction,       // no ell coprime to 2p passes the local tests
    BoundExceeded
};

struct EllSearch {
    EllSearchStatus status = EllSearchStatus::BoundExceeded;
    Int ell;           // set when status == Found
    OrthFamily family; // orthogonal family in the dual of L, when Found
};

// smallest odd ell <= bound coprime to p such that the dual of the
// unimodular lattice L has an equal-norm orthogonal family of norm ell
EllSearch min_odd_ell(const HermLattice& L, const Int& p, const Int& bound = Int(50));

} // namespace iso
