#include "wtdiag/cycle.hpp"

#include <stdexcept>

namespace wtdiag {

namespace {

/// Dashed partner of c_j among non-conjugated indices: the index b such that
/// the kept dashed edge at c_j goes to cbar_b.
int dashed_partner(int j, const std::vector<bool>& crossed) {
    if (j == 0) return 0;
    int k = Diagram::block_of(j);
    if (!crossed[static_cast<size_t>(k)]) return j;
    return (j == 2 * k - 1) ? 2 * k : 2 * k - 1;
}

/// pi = f o d where d is the dashed-partner involution.
std::vector<int> make_pi(const FeynmanDiagram& f, const std::vector<bool>& crossed) {
    const int M = 2 * f.order_N() + 1;
    std::vector<int> pi(static_cast<size_t>(M));
    for (int j = 0; j < M; ++j)
        pi[static_cast<size_t>(j)] = f.f[static_cast<size_t>(dashed_partner(j, crossed))];
    return pi;
}

/// Cycle labels of the permutation pi; returns the number of cycles.
int cycle_labels(const std::vector<int>& pi, std::vector<int>& label) {
    const int M = static_cast<int>(pi.size());
    label.assign(static_cast<size_t>(M), -1);
    int count = 0;
    for (int start = 0; start < M; ++start) {
        if (label[static_cast<size_t>(start)] >= 0) continue;
        int j = start;
        while (label[static_cast<size_t>(j)] < 0) {
            label[static_cast<size_t>(j)] = count;
            j = pi[static_cast<size_t>(j)];
        }
        ++count;
    }
    return count;
}

HamiltonCycle finish(const FeynmanDiagram& f, std::vector<bool> crossed, int steps) {
    HamiltonCycle c;
    c.crossed = std::move(crossed);
    c.pi = make_pi(f, c.crossed);
    const int M = 2 * f.order_N() + 1;
    c.order.reserve(static_cast<size_t>(M));
    c.pos.assign(static_cast<size_t>(M), -1);
    int j = 0;
    for (int t = 0; t < M; ++t) {
        if (c.pos[static_cast<size_t>(j)] >= 0)
            throw std::logic_error("hamilton_cycle: pi is not a single cycle");
        c.order.push_back(j);
        c.pos[static_cast<size_t>(j)] = t;
        j = c.pi[static_cast<size_t>(j)];
    }
    if (j != 0) throw std::logic_error("hamilton_cycle: cycle does not close");
    c.splice_steps = steps;
    return c;
}

}  // namespace

HamiltonCycle hamilton_cycle(const FeynmanDiagram& f) {
    const int N = f.order_N();
    if (N < 1) throw std::invalid_argument("hamilton_cycle: requires N >= 1");
    for (const auto& msg : validate_feynman(f))
        throw std::invalid_argument("hamilton_cycle: invalid input: " + msg);

    std::vector<bool> crossed(static_cast<size_t>(N + 1), false);
    std::vector<int> pi = make_pi(f, crossed);
    std::vector<int> label;
    int cycles = cycle_labels(pi, label);
    int steps = 0;
    while (cycles > 1) {
        int pick = -1;
        for (int k = 1; k <= N; ++k) {
            if (label[static_cast<size_t>(2 * k - 1)] != label[static_cast<size_t>(2 * k)]) {
                pick = k;
                break;
            }
        }
        if (pick < 0)
            throw std::logic_error("hamilton_cycle: no splice block found (disconnected input)");
        crossed[static_cast<size_t>(pick)] = !crossed[static_cast<size_t>(pick)];
        pi = make_pi(f, crossed);
        int now = cycle_labels(pi, label);
        if (now != cycles - 1) throw std::logic_error("hamilton_cycle: splice failed to merge");
        cycles = now;
        ++steps;
    }
    return finish(f, std::move(crossed), steps);
}

HamiltonCycle cycle_from_matching(const FeynmanDiagram& f, const std::vector<bool>& crossed) {
    if (static_cast<int>(crossed.size()) != f.order_N() + 1)
        throw std::invalid_argument("cycle_from_matching: pattern size must be N+1");
    return finish(f, crossed, 0);
}

HamiltonCycle cycle_from_order(const FeynmanDiagram& f, const std::vector<int>& order) {
    const int N = f.order_N();
    const int M = 2 * N + 1;
    if (static_cast<int>(order.size()) != M)
        throw std::invalid_argument("cycle_from_order: sequence must list all 2N+1 vertices");
    std::vector<int> pos(static_cast<size_t>(M), -1);
    for (int t = 0; t < M; ++t) {
        int j = order[static_cast<size_t>(t)];
        if (j < 0 || j >= M || pos[static_cast<size_t>(j)] >= 0)
            throw std::invalid_argument("cycle_from_order: sequence is not a permutation");
        pos[static_cast<size_t>(j)] = t;
    }
    std::vector<int> pi(static_cast<size_t>(M));
    for (int t = 0; t < M; ++t)
        pi[static_cast<size_t>(order[static_cast<size_t>(t)])] =
            order[static_cast<size_t>((t + 1) % M)];
    // Infer the dashed matching from pi = f o d.
    std::vector<bool> crossed(static_cast<size_t>(N + 1), false);
    for (int k = 1; k <= N; ++k) {
        int a = 2 * k - 1, b = 2 * k;
        if (pi[static_cast<size_t>(a)] == f.f[static_cast<size_t>(a)] &&
            pi[static_cast<size_t>(b)] == f.f[static_cast<size_t>(b)]) {
            crossed[static_cast<size_t>(k)] = false;
        } else if (pi[static_cast<size_t>(a)] == f.f[static_cast<size_t>(b)] &&
                   pi[static_cast<size_t>(b)] == f.f[static_cast<size_t>(a)]) {
            crossed[static_cast<size_t>(k)] = true;
        } else {
            throw std::invalid_argument(
                "cycle_from_order: sequence violates the per-block consistency at block " +
                std::to_string(k));
        }
    }
    if (pi[0] != f.f[0])
        throw std::invalid_argument("cycle_from_order: root step must follow the root solid edge");
    HamiltonCycle c = finish(f, crossed, 0);
    if (c.order != [&] {
            std::vector<int> rot;
            int start = 0;
            while (order[static_cast<size_t>(start)] != 0) ++start;
            for (int t = 0; t < M; ++t)
                rot.push_back(order[static_cast<size_t>((start + t) % M)]);
            return rot;
        }())
        throw std::logic_error("cycle_from_order: reconstruction mismatch");
    return c;
}

bool alternative_cycle(const FeynmanDiagram& f, const HamiltonCycle& avoid, HamiltonCycle& out) {
    const int N = f.order_N();
    // Toggle pairs of blocks on top of the canonical matching; a single
    // toggle splits the cycle, so search over two-block toggles first, then
    // over full patterns for small N.
    for (std::uint64_t mask = 1; mask < (1ull << N); ++mask) {
        std::vector<bool> crossed = avoid.crossed;
        for (int k = 1; k <= N; ++k)
            if (mask & (1ull << (k - 1))) crossed[static_cast<size_t>(k)] = !crossed[static_cast<size_t>(k)];
        std::vector<int> pi = make_pi(f, crossed);
        std::vector<int> label;
        if (cycle_labels(pi, label) != 1) continue;
        HamiltonCycle c = finish(f, crossed, 0);
        if (c.order != avoid.order) {
            out = std::move(c);
            return true;
        }
    }
    return false;
}

std::vector<std::string> validate_cycle(const FeynmanDiagram& f, const HamiltonCycle& c) {
    std::vector<std::string> v;
    const int N = f.order_N();
    const int M = 2 * N + 1;
    if (static_cast<int>(c.crossed.size()) != N + 1) {
        v.push_back("matching pattern has wrong size");
        return v;
    }
    // Two dashed edges per block and the root-root edge are implied by the
    // matching representation; check the cycle itself.
    std::vector<int> pi = make_pi(f, c.crossed);
    if (c.pi != pi) v.push_back("pi inconsistent with kept dashed edges");
    std::vector<int> label;
    if (cycle_labels(pi, label) != 1)
        v.push_back("kept edges decompose into more than one cycle");
    if (static_cast<int>(c.order.size()) != M) {
        v.push_back("reduced cycle has wrong length");
        return v;
    }
    for (int t = 0; t < M; ++t) {
        int j = c.order[static_cast<size_t>(t)];
        int nxt = c.order[static_cast<size_t>((t + 1) % M)];
        if (pi[static_cast<size_t>(j)] != nxt) {
            v.push_back("reduced order does not follow pi");
            break;
        }
    }
    for (int t = 0; t < M; ++t)
        if (c.pos[static_cast<size_t>(c.order[static_cast<size_t>(t)])] != t) {
            v.push_back("pos table inconsistent");
            break;
        }
    // (5.7): {pi(2k-1), pi(2k)} = {f(2k-1), f(2k)} for every block.
    for (int k = 1; k <= N; ++k) {
        int a = pi[static_cast<size_t>(2 * k - 1)], b = pi[static_cast<size_t>(2 * k)];
        int fa = f.f[static_cast<size_t>(2 * k - 1)], fb = f.f[static_cast<size_t>(2 * k)];
        if (!((a == fa && b == fb) || (a == fb && b == fa)))
            v.push_back("consistency {pi,f} fails at block " + std::to_string(k));
    }
    return v;
}

std::vector<int> pi_permutation(const HamiltonCycle& c) { return c.pi; }

}  // namespace wtdiag
