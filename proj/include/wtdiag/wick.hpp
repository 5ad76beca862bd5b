#pragma once

#include <complex>
#include <vector>

#include "wtdiag/diagram.hpp"

namespace wtdiag {

/// Bijection from conjugated leaves to non-conjugated leaves, stored as
/// ordered (non-conjugated, conjugated) index pairs. No pair lies within one
/// block.
struct Pairing {
    std::vector<std::pair<int, int>> pairs;  // (ci, cbj), ascending in cbj
};

/// Diagram plus a Wick pairing of its leaves. E(F) = E_D u E_L; f[j] = i iff
/// cbar_j ~ c_i across any edge of F.
struct FeynmanDiagram {
    Diagram base;
    Pairing pairing;
    std::vector<int> f;  // permutation of {0..2N}

    int order_N() const { return base.order_N(); }
    std::vector<EdgeD> edges_D() const { return base.edges(); }
    const std::vector<std::pair<int, int>>& edges_L() const { return pairing.pairs; }
};

/// All same-block-avoiding pairings of D, lexicographic in conjugated-leaf
/// id then non-conjugated-leaf id. Empty when no valid pairing exists.
std::vector<FeynmanDiagram> enumerate_feynman(const Diagram& d);

/// F_{m,n}: union over product_set(m,n); each element keeps its base diagram.
std::vector<FeynmanDiagram> feynman_set(int m, int n);

/// The permutation f_F of {0..2N}.
std::vector<int> f_permutation(const FeynmanDiagram& f);

/// c_F = (-1)^{#w} i^N where #w counts non-conjugated virtual vertices.
std::complex<double> phase_constant(const FeynmanDiagram& f);
std::complex<double> phase_constant(const Diagram& d);

/// Structural checks for a Feynman diagram (pairing bijectivity, same-block
/// exclusion, f being a permutation). Empty list iff valid.
std::vector<std::string> validate_feynman(const FeynmanDiagram& f);

}  // namespace wtdiag
