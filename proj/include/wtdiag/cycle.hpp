#pragma once

#include <string>
#include <vector>

#include "wtdiag/wick.hpp"

namespace wtdiag {

/// Alternating Hamilton cycle of the augmented graph U_F, stored through the
/// per-block choice of kept dashed edges.
///   crossed[k] == false: keep (c_{2k-1}, cbar_{2k-1}) and (c_{2k}, cbar_{2k})
///   crossed[k] == true:  keep (c_{2k-1}, cbar_{2k})   and (c_{2k}, cbar_{2k-1})
/// The root-root dashed edge (c_0, cbar_0) is always kept. The reduced cycle
/// over non-conjugated vertices is `order` with inverse lookup `pos`, and
/// pi[j] = i iff the reduced cycle steps c_j -> c_i.
struct HamiltonCycle {
    std::vector<bool> crossed;  // size N+1, entry 0 unused
    std::vector<int> order;     // reduced cycle, order[0] == 0
    std::vector<int> pos;       // pos[order[t]] == t
    std::vector<int> pi;
    int splice_steps = 0;       // merge steps performed by the constructor

    int length() const { return static_cast<int>(order.size()); }
};

/// Canonical cycle: start from the parallel matching in every block, then
/// repeatedly splice at the lowest-index block whose pair {2k-1, 2k} spans
/// two distinct cycles (Lemma 5.1 construction).
HamiltonCycle hamilton_cycle(const FeynmanDiagram& f);

/// Cycle from an explicit per-block matching pattern; throws if the pattern
/// does not yield a single cycle.
HamiltonCycle cycle_from_matching(const FeynmanDiagram& f, const std::vector<bool>& crossed);

/// Cycle from an explicit reduced vertex sequence (e.g. a published fixture);
/// the dashed matching is inferred and validated.
HamiltonCycle cycle_from_order(const FeynmanDiagram& f, const std::vector<int>& order);

/// A valid alternative cycle differing from `avoid` in its reduced order, if
/// one exists (used by the cycle-invariance checks).
bool alternative_cycle(const FeynmanDiagram& f, const HamiltonCycle& avoid, HamiltonCycle& out);

/// Empty iff C is an alternating Hamilton cycle of U_F containing all solid
/// edges, two dashed edges per block, and satisfying the per-block
/// consistency {pi(2k-1), pi(2k)} = {f(2k-1), f(2k)}.
std::vector<std::string> validate_cycle(const FeynmanDiagram& f, const HamiltonCycle& c);

std::vector<int> pi_permutation(const HamiltonCycle& c);

}  // namespace wtdiag
