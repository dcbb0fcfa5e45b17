#pragma once

// Enumeration of isometry classes of unimodular positive definite
// hermitian lattices: spaces with prescribed determinant class, Kneser
// neighbour closure at split primes, sandwich search between f*M^# and
// M for non-maximal orders, and descent through minimal overorder
// chains for projective lattices.

#include <vector>

#include "iso/hermlat.hpp"

namespace iso {

// A genus of unimodular lattices of rank g: the set I of primes where
// the space determinant is not a local norm (even cardinality, only
// non-split divisors of f*d_F), plus the parity at a ramified 2.
struct GenusDescriptor {
    int rank = 0;
    std::vector<Int> det_nonnorm_primes;
    bool even_at_2 = false;
};

struct ClassifyOptions {
    // neighbour closure primes; empty = the two smallest odd split
    // primes coprime to f*d_F below neighbour_prime_bound
    std::vector<Int> neighbour_primes;
    Int neighbour_prime_bound = Int(200);
};

// All genus descriptors of rank g over R.
std::vector<GenusDescriptor> genus_descriptors(const QuadOrder& R, int g);

// Positive definite space diag(1,...,1,e) over Frac(R) whose
// determinant is a local norm exactly away from I.
HermSpace space_with_det_class(const QuadOrder& R, int g, const std::vector<Int>& I);

// All P-neighbours of L: lattices L' with L/(L cap L') = O/P and
// L'/(L cap L') = O/conj(P). P must lie over an odd split prime
// coprime to f*d_F at which L is unimodular.
std::vector<HermLattice> neighbours(const HermLattice& L, const FracIdeal& P);

// Representatives of the isometry classes of positive definite
// unimodular hermitian lattices of rank g (decomposables included).
std::vector<HermLattice> enum_unimodular_maximal(const QuadOrder& O, int g,
                                                 const ClassifyOptions& opts = {});
std::vector<HermLattice> enum_unimodular_order(const QuadOrder& R, int g,
                                               const ClassifyOptions& opts = {});
// Projective classes only, by descent through a minimal overorder chain.
std::vector<HermLattice> enum_unimodular_projective(const QuadOrder& R, int g,
                                                    const ClassifyOptions& opts = {});

// The prime ideal (p, f*omega - c) of norm p when p splits or
// ramifies; the inert ideal pR otherwise.
FracIdeal prime_ideal_above(const QuadOrder& R, const Int& p);

// Whether the projective lattice L is a free R-module: Steinitz-type
// test via the index ideal class over a free full sublattice whose
// index is coprime to the conductor.
bool is_free_lattice(const HermLattice& L);

} // namespace iso
