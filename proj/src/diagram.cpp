#include "wtdiag/diagram.hpp"

#include <deque>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace wtdiag {

namespace {

/// Rooted expansion tree of a vertex of given degree: a vertex of degree
/// p >= 1 spawns three children of degrees (p1, p2, p3), p1+p2+p3 = p-1.
/// Children 0 and 1 keep the parent's conjugation, child 2 flips it.
struct Shape {
    int deg = 0;
    std::array<const Shape*, 3> kid{nullptr, nullptr, nullptr};
};

using ShapeArena = std::vector<std::unique_ptr<Shape>>;

class ShapePool {
public:
    const std::vector<const Shape*>& shapes_for(int deg) {
        if (deg < 0) throw std::invalid_argument("enumerate_diagrams: negative order");
        while (static_cast<int>(byDeg_.size()) <= deg) grow();
        return byDeg_[static_cast<size_t>(deg)];
    }

private:
    void grow() {
        int p = static_cast<int>(byDeg_.size());
        std::vector<const Shape*> out;
        if (p == 0) {
            out.push_back(make(Shape{0, {nullptr, nullptr, nullptr}}));
        } else {
            for (int p1 = 0; p1 <= p - 1; ++p1)
                for (int p2 = 0; p2 <= p - 1 - p1; ++p2) {
                    int p3 = p - 1 - p1 - p2;
                    for (const Shape* s1 : byDeg_[static_cast<size_t>(p1)])
                        for (const Shape* s2 : byDeg_[static_cast<size_t>(p2)])
                            for (const Shape* s3 : byDeg_[static_cast<size_t>(p3)])
                                out.push_back(make(Shape{p, {s1, s2, s3}}));
                }
        }
        byDeg_.push_back(std::move(out));
    }
    const Shape* make(Shape s) {
        pool_.push_back(std::make_unique<Shape>(s));
        return pool_.back().get();
    }
    std::vector<std::vector<const Shape*>> byDeg_;
    std::vector<std::unique_ptr<Shape>> pool_;
};

ShapePool& pool() {
    static ShapePool p;
    return p;
}

/// Materialise one rooted component into `d`, numbering blocks breadth-first
/// from the root and, inside a block, in listed vertex order.
void materialize(Diagram& d, const Shape* rootShape, bool rootConj, int& nextBlock) {
    struct Item {
        VertexRef v;
        const Shape* shape;
    };
    std::deque<Item> queue;
    queue.push_back({VertexRef{rootConj, 0}, rootShape});
    while (!queue.empty()) {
        Item it = queue.front();
        queue.pop_front();
        if (it.shape->deg == 0) continue;
        int k = nextBlock++;
        Block b;
        b.index = k;
        b.conjugated = !it.v.conj;  // non-conjugated parents generate Bbar_k
        b.parent = it.v;
        const Shape* s1 = it.shape->kid[0];
        const Shape* s2 = it.shape->kid[1];
        const Shape* s3 = it.shape->kid[2];
        if (b.conjugated) {
            // Bbar_k = {c_{2k-1}, c_{2k}, cbar_{2k-1}, wbar_{2k}}
            b.deg = {s1->deg, s2->deg, s3->deg, 0};
            queue.push_back({VertexRef{false, 2 * k - 1}, s1});
            queue.push_back({VertexRef{false, 2 * k}, s2});
            queue.push_back({VertexRef{true, 2 * k - 1}, s3});
        } else {
            // B_k = {c_{2k-1}, w_{2k}, cbar_{2k-1}, cbar_{2k}}
            b.deg = {s3->deg, 0, s1->deg, s2->deg};
            queue.push_back({VertexRef{false, 2 * k - 1}, s3});
            queue.push_back({VertexRef{true, 2 * k - 1}, s1});
            queue.push_back({VertexRef{true, 2 * k}, s2});
        }
        d.blocks.push_back(b);
    }
}

Diagram assemble(int m, int n, const Shape* first, const Shape* second) {
    Diagram d;
    d.m = m;
    d.n = n;
    int nextBlock = 1;
    if (first) materialize(d, first, /*rootConj=*/false, nextBlock);
    if (second) materialize(d, second, /*rootConj=*/true, nextBlock);
    return d;
}

/// Recover the expansion tree rooted at `v` from a materialised diagram.
const Shape* extract_shape(const Diagram& d, VertexRef v, ShapeArena& arena) {
    auto node = std::make_unique<Shape>();
    node->deg = d.degree(v.conj, v.idx);
    Shape* raw = node.get();
    arena.push_back(std::move(node));
    if (raw->deg == 0) return raw;
    const Block* blk = nullptr;
    for (const Block& b : d.blocks)
        if (b.parent == v) { blk = &b; break; }
    if (!blk) throw std::logic_error("extract_shape: vertex of positive degree generates no block");
    int k = blk->index;
    if (blk->conjugated) {
        raw->kid[0] = extract_shape(d, {false, 2 * k - 1}, arena);
        raw->kid[1] = extract_shape(d, {false, 2 * k}, arena);
        raw->kid[2] = extract_shape(d, {true, 2 * k - 1}, arena);
    } else {
        raw->kid[0] = extract_shape(d, {true, 2 * k - 1}, arena);
        raw->kid[1] = extract_shape(d, {true, 2 * k}, arena);
        raw->kid[2] = extract_shape(d, {false, 2 * k - 1}, arena);
    }
    return raw;
}

/// Conjugation-flip of an expansion tree is the tree itself (the composition
/// data does not reference conjugation), so mirroring reduces to swapping the
/// two components and re-materialising with flipped root conjugations.
}  // namespace

Vertex Diagram::vertex(bool conj, int id) const {
    Vertex v;
    v.id = id;
    v.conjugated = conj;
    v.degree = degree(conj, id);
    v.is_virtual = is_virtual(conj, id);
    v.block = block_of(id);
    v.time_slot = time_slot_of(conj, id);
    return v;
}

int Diagram::degree(bool conj, int id) const {
    if (id == 0) return conj ? n : m;
    const Block& b = blocks[static_cast<size_t>(block_of(id) - 1)];
    int slot = (conj ? 2 : 0) + (id % 2 == 0 ? 1 : 0);
    return b.deg[static_cast<size_t>(slot)];
}

bool Diagram::is_virtual(bool conj, int id) const {
    if (id == 0 || id % 2 == 1) return false;
    const Block& b = blocks[static_cast<size_t>(block_of(id) - 1)];
    return b.conjugated == conj;
}

std::vector<EdgeD> Diagram::edges() const {
    std::vector<EdgeD> e;
    e.reserve(blocks.size());
    for (const Block& b : blocks) {
        if (b.conjugated)
            e.push_back({b.parent.idx, 2 * b.index});  // (c_parent, wbar_{2k})
        else
            e.push_back({2 * b.index, b.parent.idx});  // (w_{2k}, cbar_parent)
    }
    return e;
}

std::vector<int> Diagram::leaves(bool conj) const {
    std::vector<int> out;
    for (int j = 0; j <= 2 * order_N(); ++j)
        if (!is_virtual(conj, j) && degree(conj, j) == 0) out.push_back(j);
    return out;
}

Diagram Diagram::mirrored() const {
    ShapeArena arena;
    const Shape* first = extract_shape(*this, {false, 0}, arena);
    const Shape* second = extract_shape(*this, {true, 0}, arena);
    return assemble(n, m, second, first);
}

std::string Diagram::key() const {
    std::ostringstream os;
    os << m << "," << n << ":";
    for (const Block& b : blocks)
        os << (b.conjugated ? "C" : "N") << (b.parent.conj ? "~" : "") << b.parent.idx << "["
           << b.deg[0] << b.deg[1] << b.deg[2] << b.deg[3] << "]";
    return os.str();
}

std::vector<Diagram> enumerate_diagrams(int m, Orientation orientation) {
    const auto& shapes = pool().shapes_for(m);
    std::vector<Diagram> out;
    out.reserve(shapes.size());
    for (const Shape* s : shapes) {
        if (orientation == Orientation::Normal)
            out.push_back(assemble(m, 0, s, nullptr));
        else
            out.push_back(assemble(0, m, nullptr, s));
    }
    return out;
}

std::vector<Diagram> product_set(int m, int n) {
    const auto& first = pool().shapes_for(m);
    const auto& second = pool().shapes_for(n);
    std::vector<Diagram> out;
    out.reserve(first.size() * second.size());
    for (const Shape* s1 : first)
        for (const Shape* s2 : second) out.push_back(assemble(m, n, s1, s2));
    return out;
}

std::uint64_t diagram_count(int m) {
    if (m < 0) throw std::invalid_argument("diagram_count: negative order");
    static std::vector<std::uint64_t> memo{1};
    while (static_cast<int>(memo.size()) <= m) {
        int p = static_cast<int>(memo.size());
        std::uint64_t total = 0;
        for (int p1 = 0; p1 <= p - 1; ++p1)
            for (int p2 = 0; p2 <= p - 1 - p1; ++p2)
                total += memo[static_cast<size_t>(p1)] * memo[static_cast<size_t>(p2)] *
                         memo[static_cast<size_t>(p - 1 - p1 - p2)];
        memo.push_back(total);
    }
    return memo[static_cast<size_t>(m)];
}

std::vector<std::string> validate_structure(const Diagram& d) {
    std::vector<std::string> v;
    const int N = d.order_N();
    auto fail = [&](const std::string& msg) { v.push_back(msg); };

    if (static_cast<int>(d.blocks.size()) != N)
        fail("block count != N");
    for (int k = 1; k <= static_cast<int>(d.blocks.size()); ++k) {
        const Block& b = d.blocks[static_cast<size_t>(k - 1)];
        if (b.index != k) fail("block indices not 1..N in order");
        int vslot = b.conjugated ? 3 : 1;
        if (b.deg[static_cast<size_t>(vslot)] != 0)
            fail("virtual vertex of block " + std::to_string(k) + " has nonzero degree");
        int degsum = b.deg[0] + b.deg[1] + b.deg[2] + b.deg[3];
        if (b.parent.idx < 0 || b.parent.idx > 2 * N) {
            fail("block " + std::to_string(k) + " parent out of range");
            continue;
        }
        int pdeg = d.degree(b.parent.conj, b.parent.idx);
        if (degsum != pdeg - 1)
            fail("block " + std::to_string(k) + " degree != parent degree - 1");
        if (b.conjugated == b.parent.conj)
            fail("block " + std::to_string(k) + " conjugation must differ from its parent's");
        if (Diagram::block_of(b.parent.idx) >= k)
            fail("block " + std::to_string(k) + " parent does not precede it");
    }
    if (!v.empty()) return v;  // counts below assume consistent blocks

    // 4N+2 vertices, half conjugated: structural by representation; check
    // edge shapes, leaf counts and leaf isolation instead.
    auto edges = d.edges();
    if (static_cast<int>(edges.size()) != N) fail("edge count != N");
    for (const EdgeD& e : edges) {
        bool cv = d.is_virtual(false, e.ci);
        bool bv = d.is_virtual(true, e.cbj);
        if (cv == bv) fail("edge must couple exactly one virtual vertex");
        int realDeg = cv ? d.degree(true, e.cbj) : d.degree(false, e.ci);
        if (realDeg < 1) fail("edge couples a virtual vertex to a leaf");
    }
    if (static_cast<int>(d.leaves(false).size()) != N + 1)
        fail("non-conjugated leaf count != N+1");
    if (static_cast<int>(d.leaves(true).size()) != N + 1)
        fail("conjugated leaf count != N+1");
    return v;
}

}  // namespace wtdiag
