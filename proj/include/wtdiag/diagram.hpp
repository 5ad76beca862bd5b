#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace wtdiag {

/// Reference to a vertex: c_idx (conj=false) or cbar_idx (conj=true).
struct VertexRef {
    bool conj = false;
    int idx = 0;
    friend bool operator==(const VertexRef& a, const VertexRef& b) {
        return a.conj == b.conj && a.idx == b.idx;
    }
};

struct Vertex {
    int id = 0;            // index j in {0..2N}
    bool conjugated = false;
    bool is_virtual = false;
    int degree = 0;
    int block = 0;         // 0 for roots, else k = ceil(id/2)
    int time_slot = 0;     // 0 -> tau1, 1 -> tau2, k+1 -> l_k
};

/// Block k holds vertices {c_{2k-1}, c_{2k}, cbar_{2k-1}, cbar_{2k}}.
/// `conjugated` means the virtual vertex sits at cbar_{2k} (generated by a
/// non-conjugated parent); otherwise it sits at c_{2k}.
struct Block {
    int index = 0;
    bool conjugated = false;
    VertexRef parent;
    std::array<int, 4> deg{};  // degrees of (c_{2k-1}, c_{2k}, cbar_{2k-1}, cbar_{2k})
};

/// Edge of a diagram, (c_i, cbar_j); one endpoint is virtual, the other has
/// degree >= 1.
struct EdgeD {
    int ci = 0;
    int cbj = 0;
};

struct Diagram {
    int m = 0, n = 0;
    std::vector<Block> blocks;  // size N = m + n, blocks[k-1] has index k

    int order_N() const { return m + n; }

    Vertex vertex(bool conj, int id) const;
    int degree(bool conj, int id) const;
    bool is_virtual(bool conj, int id) const;
    static int block_of(int id) { return id == 0 ? 0 : (id + 1) / 2; }
    static int time_slot_of(bool conj, int id) {
        return id == 0 ? (conj ? 1 : 0) : block_of(id) + 1;
    }

    /// The N edges E(D), one per block, linking the block's virtual vertex to
    /// its generating vertex.
    std::vector<EdgeD> edges() const;

    /// Indices of non-conjugated (L) and conjugated (Lbar) leaves, ascending.
    std::vector<int> leaves(bool conj) const;

    /// Conjugation-flip involution (maps D_m diagrams to Dbar_m and back).
    Diagram mirrored() const;

    /// Stable identity string (used as a canonical key and fixture id).
    std::string key() const;
};

enum class Orientation { Normal, Mirrored };

/// All diagrams of D_m (or Dbar_m), in canonical order: depth-first over the
/// lexicographic degree compositions chosen at each block.
std::vector<Diagram> enumerate_diagrams(int m, Orientation orientation = Orientation::Normal);

/// D_m x Dbar_n: first-component blocks numbered 1..m, second m+1..N.
std::vector<Diagram> product_set(int m, int n);

/// Independent counting oracle: |D_m| by the composition recurrence
/// D(p) = sum_{p1+p2+p3=p-1} D(p1) D(p2) D(p3), D(0) = 1.
std::uint64_t diagram_count(int m);

/// Empty iff all structural invariants hold; violations are messages.
std::vector<std::string> validate_structure(const Diagram& d);

}  // namespace wtdiag
