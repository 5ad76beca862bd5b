#include "wtdiag/wick.hpp"

#include <algorithm>
#include <stdexcept>

namespace wtdiag {

namespace {

std::vector<int> build_f(const Diagram& d, const Pairing& p) {
    const int N = d.order_N();
    std::vector<int> f(static_cast<size_t>(2 * N + 1), -1);
    for (const EdgeD& e : d.edges()) f[static_cast<size_t>(e.cbj)] = e.ci;
    for (const auto& [ci, cbj] : p.pairs) f[static_cast<size_t>(cbj)] = ci;
    for (int j = 0; j <= 2 * N; ++j)
        if (f[static_cast<size_t>(j)] < 0)
            throw std::logic_error("build_f: conjugated vertex " + std::to_string(j) +
                                   " has no adjacent vertex");
    return f;
}

}  // namespace

std::vector<FeynmanDiagram> enumerate_feynman(const Diagram& d) {
    const std::vector<int> cbLeaves = d.leaves(true);
    const std::vector<int> cLeaves = d.leaves(false);
    std::vector<FeynmanDiagram> out;
    if (cbLeaves.size() != cLeaves.size()) return out;

    const size_t n = cbLeaves.size();
    std::vector<bool> used(n, false);
    std::vector<int> choice(n, -1);

    auto same_block = [](int i, int j) {
        return i >= 1 && j >= 1 && Diagram::block_of(i) == Diagram::block_of(j);
    };

    // Depth-first over conjugated leaves ascending; partners ascending.
    auto rec = [&](auto&& self, size_t depth) -> void {
        if (depth == n) {
            FeynmanDiagram f;
            f.base = d;
            for (size_t t = 0; t < n; ++t)
                f.pairing.pairs.emplace_back(cLeaves[static_cast<size_t>(choice[t])], cbLeaves[t]);
            f.f = build_f(d, f.pairing);
            out.push_back(std::move(f));
            return;
        }
        int cbj = cbLeaves[depth];
        for (size_t c = 0; c < n; ++c) {
            if (used[c] || same_block(cLeaves[c], cbj)) continue;
            used[c] = true;
            choice[depth] = static_cast<int>(c);
            self(self, depth + 1);
            used[c] = false;
        }
    };
    rec(rec, 0);
    return out;
}

std::vector<FeynmanDiagram> feynman_set(int m, int n) {
    std::vector<FeynmanDiagram> out;
    for (const Diagram& d : product_set(m, n)) {
        auto fs = enumerate_feynman(d);
        out.insert(out.end(), std::make_move_iterator(fs.begin()),
                   std::make_move_iterator(fs.end()));
    }
    return out;
}

std::vector<int> f_permutation(const FeynmanDiagram& f) { return f.f; }

std::complex<double> phase_constant(const Diagram& d) {
    int nw = 0;
    for (const Block& b : d.blocks)
        if (!b.conjugated) ++nw;  // w_{2k} is a non-conjugated virtual vertex
    int N = d.order_N();
    static const std::complex<double> ipow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    std::complex<double> c = ipow[N % 4];
    return (nw % 2 == 0) ? c : -c;
}

std::complex<double> phase_constant(const FeynmanDiagram& f) { return phase_constant(f.base); }

std::vector<std::string> validate_feynman(const FeynmanDiagram& f) {
    std::vector<std::string> v = validate_structure(f.base);
    const int N = f.order_N();
    const auto cb = f.base.leaves(true);
    const auto cl = f.base.leaves(false);
    if (f.pairing.pairs.size() != cb.size()) v.push_back("pairing does not cover all leaves");
    std::vector<bool> seenC(static_cast<size_t>(2 * N + 1), false),
        seenCb(static_cast<size_t>(2 * N + 1), false);
    for (const auto& [ci, cbj] : f.pairing.pairs) {
        if (std::find(cl.begin(), cl.end(), ci) == cl.end())
            v.push_back("pair endpoint c_" + std::to_string(ci) + " is not a leaf");
        if (std::find(cb.begin(), cb.end(), cbj) == cb.end())
            v.push_back("pair endpoint cbar_" + std::to_string(cbj) + " is not a leaf");
        if (ci >= 1 && cbj >= 1 && Diagram::block_of(ci) == Diagram::block_of(cbj))
            v.push_back("pair joins two leaves of block " +
                        std::to_string(Diagram::block_of(ci)));
        if (ci <= 2 * N && seenC[static_cast<size_t>(ci)]) v.push_back("pairing reuses a non-conjugated leaf");
        if (cbj <= 2 * N && seenCb[static_cast<size_t>(cbj)]) v.push_back("pairing reuses a conjugated leaf");
        if (ci <= 2 * N) seenC[static_cast<size_t>(ci)] = true;
        if (cbj <= 2 * N) seenCb[static_cast<size_t>(cbj)] = true;
    }
    std::vector<bool> hit(static_cast<size_t>(2 * N + 1), false);
    if (static_cast<int>(f.f.size()) != 2 * N + 1) {
        v.push_back("f has wrong size");
    } else {
        for (int j = 0; j <= 2 * N; ++j) {
            int i = f.f[static_cast<size_t>(j)];
            if (i < 0 || i > 2 * N || hit[static_cast<size_t>(i)]) {
                v.push_back("f is not a permutation");
                break;
            }
            hit[static_cast<size_t>(i)] = true;
        }
    }
    return v;
}

}  // namespace wtdiag
