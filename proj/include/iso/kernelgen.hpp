#pragma once

// Kernels of the isogeny E^g -> A attached to a unimodular hermitian
// lattice: presentation of the lattice generators in an orthogonal
// frame, kernel generators inside E[ell]^g through a torsion basis,
// and validation of the resulting subgroup.

#include <stdexcept>
#include <utility>
#include <vector>

#include "iso/ecurve.hpp"
#include "iso/hermlat.hpp"
#include "iso/orthsearch.hpp"

namespace iso {

// raised when the computed kernel is not isomorphic to (Z/ell Z)^g;
// callers retry with the next admissible ell
struct KernelRankError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IsogenyKernel {
    EllCurve E;
    long ell = 0;
    TorsionData torsion;
    // g coordinate rows mod ell w.r.t. the torsion basis, component j
    // of a tuple occupying columns (2j, 2j+1)
    std::vector<std::vector<long>> gen_coords;
    std::vector<std::vector<EPoint>> gens; // g tuples of g points
};

// matrix of the Z-basis generators of L in the frame (u_j / ell):
// entry (i, j) = h(v_i, u_j), an element of the order
FMat presentation_matrix(const HermLattice& L, const OrthFamily& family);

// write x in Z[pi] with pi = (t + f sqrt(dF)) / 2; returns (a, b) such
// that x = a + b pi
std::pair<Int, Int> frobenius_coords(const QOElem& x, const Int& t, long f);

IsogenyKernel kernel_points(const HermLattice& L, const EllCurve& E, long ell,
                            const OrthFamily& family);

struct KernelReport {
    bool order_ok = false;
    bool rank_ok = false;
    bool isotropic = false;
    bool frobenius_stable = false;
    bool ok() const { return order_ok && rank_ok && isotropic && frobenius_stable; }
};
KernelReport validate_kernel(const IsogenyKernel& K);

// canonical generator matrix of the subgroup mod ell (HNF of the row
// span together with ell * Id), independent of the generator choice
std::vector<std::vector<long>> kernel_canonical(const IsogenyKernel& K);

} // namespace iso
