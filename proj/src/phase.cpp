#include "wtdiag/phase.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "wtdiag/rational.hpp"
#include "wtdiag/rng.hpp"

namespace wtdiag {

namespace {

/// True iff c lies on the arc [a, b] of the reduced cycle (inclusive).
inline bool in_arc(const HamiltonCycle& c, int vertex, int a, int b) {
    const int M = c.length();
    int da = c.pos[static_cast<size_t>(vertex)] - c.pos[static_cast<size_t>(a)];
    int db = c.pos[static_cast<size_t>(b)] - c.pos[static_cast<size_t>(a)];
    if (da < 0) da += M;
    if (db < 0) db += M;
    return da <= db;
}

}  // namespace

AlphaMatrix alpha_matrix(const FeynmanDiagram& f, const HamiltonCycle& c) {
    const int N = f.order_N();
    AlphaMatrix m;
    m.N = N;
    m.a.assign(static_cast<size_t>(N * N), 0);
    for (int i = 1; i <= N; ++i)
        for (int j = 1; j <= N; ++j) {
            if (i == j) continue;
            bool p1 = in_arc(c, 2 * j - 1, 2 * i - 1, 2 * i);
            bool p2 = in_arc(c, 2 * j, 2 * i - 1, 2 * i);
            int v = 0;
            if (p1 && !p2) v = 1;
            else if (!p1 && p2) v = -1;
            m.at(i - 1, j - 1) = v;
        }
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
            if (m.at(i, j) != -m.at(j, i))
                throw std::logic_error("alpha_matrix: skew-symmetry violated");
    return m;
}

XiMap xi_map(const FeynmanDiagram& f, const HamiltonCycle& c) {
    const int N = f.order_N();
    XiMap xi;
    xi.N = N;
    xi.coeff.assign(static_cast<size_t>(2 * N + 1), std::vector<int>(static_cast<size_t>(N), 0));
    for (int j = 1; j <= 2 * N; ++j) {
        // Walk the arc [c_j, c_0) and accumulate (-1)^{i+1} z_{ceil(i/2)}.
        int v = j;
        while (v != 0) {
            int zi = (v + 1) / 2;
            xi.coeff[static_cast<size_t>(j)][static_cast<size_t>(zi - 1)] +=
                (v % 2 == 1) ? 1 : -1;
            v = c.pi[static_cast<size_t>(v)];
        }
    }
    return xi;
}

std::vector<std::vector<double>> xi_values(const XiMap& xi, std::span<const double> s,
                                           std::span<const double> z, int d) {
    const int N = xi.N;
    if (static_cast<int>(z.size()) != N * d || static_cast<int>(s.size()) != d)
        throw std::invalid_argument("xi_values: dimension mismatch");
    std::vector<std::vector<double>> out(static_cast<size_t>(2 * N + 1),
                                         std::vector<double>(static_cast<size_t>(d)));
    for (int j = 0; j <= 2 * N; ++j) {
        for (int a = 0; a < d; ++a) {
            double v = s[static_cast<size_t>(a)];
            for (int i = 0; i < N; ++i) {
                int cc = xi.coeff[static_cast<size_t>(j)][static_cast<size_t>(i)];
                if (cc) v += cc * z[static_cast<size_t>(i * d + a)];
            }
            out[static_cast<size_t>(j)][static_cast<size_t>(a)] = v;
        }
    }
    return out;
}

std::vector<double> omega_vector(const AlphaMatrix& alpha, std::span<const double> z, int d) {
    const int N = alpha.N;
    if (static_cast<int>(z.size()) != N * d)
        throw std::invalid_argument("omega_vector: dimension mismatch");
    std::vector<double> w(static_cast<size_t>(N), 0.0);
    for (int j = 0; j < N; ++j) {
        double acc = 0;
        for (int i = 0; i < N; ++i) {
            int aji = alpha.at(j, i);
            if (!aji) continue;
            double dot = 0;
            for (int a = 0; a < d; ++a)
                dot += z[static_cast<size_t>(j * d + a)] * z[static_cast<size_t>(i * d + a)];
            acc += aji * dot;
        }
        w[static_cast<size_t>(j)] = 2.0 * acc;
    }
    return w;
}

std::vector<double> omega_vector_from_xi(const XiMap& xi, const std::vector<int>& f,
                                         std::span<const double> s, std::span<const double> z,
                                         int d) {
    const int N = xi.N;
    auto xv = xi_values(xi, s, z, d);
    auto sq = [&](int j) {
        double t = 0;
        for (double v : xv[static_cast<size_t>(j)]) t += v * v;
        return t;
    };
    std::vector<double> w(static_cast<size_t>(N));
    for (int k = 1; k <= N; ++k) {
        double v = sq(2 * k - 1) + sq(2 * k) - sq(f[static_cast<size_t>(2 * k - 1)]) -
                   sq(f[static_cast<size_t>(2 * k)]);
        w[static_cast<size_t>(k - 1)] = v;
    }
    return w;
}

double phase_value(const AlphaMatrix& alpha, std::span<const double> l,
                   std::span<const double> z, int d) {
    const int N = alpha.N;
    if (static_cast<int>(l.size()) != N || static_cast<int>(z.size()) != N * d)
        throw std::invalid_argument("phase_value: dimension mismatch");
    double acc = 0;
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
            int aij = alpha.at(i, j);
            if (!aij) continue;
            double dot = 0;
            for (int a = 0; a < d; ++a)
                dot += z[static_cast<size_t>(i * d + a)] * z[static_cast<size_t>(j * d + a)];
            acc += aij * (l[static_cast<size_t>(i)] - l[static_cast<size_t>(j)]) * dot;
        }
    return acc;
}

bool is_true_diagram(const AlphaMatrix& alpha) {
    for (int i = 0; i < alpha.N; ++i) {
        bool nonzero = false;
        for (int j = 0; j < alpha.N; ++j)
            if (alpha.at(i, j)) { nonzero = true; break; }
        if (!nonzero) return false;
    }
    return alpha.N > 0;
}

SpectralProfile decompose_and_rank(const AlphaMatrix& alpha, int d) {
    const int N = alpha.N;
    SpectralProfile p;
    // Connected components of the symmetric support graph.
    std::vector<int> comp(static_cast<size_t>(N), -1);
    int nc = 0;
    for (int start = 0; start < N; ++start) {
        if (comp[static_cast<size_t>(start)] >= 0) continue;
        std::vector<int> stack{start};
        comp[static_cast<size_t>(start)] = nc;
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            for (int u = 0; u < N; ++u)
                if (alpha.at(v, u) != 0 && comp[static_cast<size_t>(u)] < 0) {
                    comp[static_cast<size_t>(u)] = nc;
                    stack.push_back(u);
                }
        }
        ++nc;
    }
    p.components.assign(static_cast<size_t>(nc), {});
    for (int i = 0; i < N; ++i)
        p.components[static_cast<size_t>(comp[static_cast<size_t>(i)])].push_back(i + 1);

    for (const auto& block : p.components) {
        // Exact rank of the vectors r_ij = alpha_ij (e_i - e_j), i<j in block.
        std::vector<std::vector<std::int64_t>> rows;
        for (size_t a = 0; a < block.size(); ++a)
            for (size_t b = a + 1; b < block.size(); ++b) {
                int i = block[a] - 1, j = block[b] - 1;
                if (alpha.at(i, j) == 0) continue;
                std::vector<std::int64_t> r(static_cast<size_t>(N), 0);
                r[static_cast<size_t>(i)] = alpha.at(i, j);
                r[static_cast<size_t>(j)] = -alpha.at(i, j);
                rows.push_back(std::move(r));
            }
        int rk = exact_rank(rows);
        p.block_ranks.push_back(rk);
        p.total_rank += rk;
        int nk = static_cast<int>(block.size());
        if (nk >= 2 && rk != nk - 1) p.lemma72_consistent = false;
        if (nk == 1 && rk != 0) p.lemma72_consistent = false;
        p.blockwise_exponent += std::min(nk - 1, d);
        if (nk - 1 == d) p.psi_log = true;
    }
    p.predicted_exponent = std::min((N + 1) / 2, d);
    p.chi_log = (N == 3 && d == 2) || (N == 2 && d == 1);
    return p;
}

SpectralProfile spectral_check(const AlphaMatrix& alpha, std::span<const double> l) {
    const int N = alpha.N;
    if (static_cast<int>(l.size()) != N)
        throw std::invalid_argument("spectral_check: dimension mismatch");
    SpectralProfile p = decompose_and_rank(alpha, 1);
    Eigen::MatrixXd q(N, N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
            q(i, j) = alpha.at(i, j) * (l[static_cast<size_t>(i)] - l[static_cast<size_t>(j)]);
    p.identity_residual = spectral_identity_residual(
        std::span<const double>(q.data(), static_cast<size_t>(N * N)), N);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(q);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("spectral_check: eigen-solver failed");
    std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + N);
    std::sort(ev.begin(), ev.end(),
              [](double x, double y) { return std::abs(x) > std::abs(y); });
    p.eigenvalues = ev;
    double k = 0;
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) k += q(i, j) * q(i, j);
    p.K_of_l = 0.5 * k;
    return p;
}

double spectral_identity_residual(std::span<const double> sym, int n) {
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = sym[static_cast<size_t>(i * n + j)];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("spectral_identity_residual: eigen-solver failed");
    double lhs = a.squaredNorm();
    double cross = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) cross += es.eigenvalues()[i] * es.eigenvalues()[j];
    double resid = std::abs(lhs + 2.0 * cross);
    double scale = std::max(lhs, 1e-300);
    return resid / scale;
}

GenericRankInfo classify_generic_rank(const AlphaMatrix& alpha, std::uint64_t seed) {
    const int N = alpha.N;
    GenericRankInfo info;
    Rng rng(seed);
    for (int trial = 0; trial < 3; ++trial) {
        std::vector<std::int64_t> l(static_cast<size_t>(N));
        for (auto& v : l) v = rng.uniform_int(-1000, 1000);
        std::vector<std::vector<std::int64_t>> q(static_cast<size_t>(N),
                                                 std::vector<std::int64_t>(static_cast<size_t>(N)));
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j)
                q[static_cast<size_t>(i)][static_cast<size_t>(j)] =
                    alpha.at(i, j) * (l[static_cast<size_t>(i)] - l[static_cast<size_t>(j)]);
        info.k = std::max(info.k, exact_rank(q));
    }
    // Structural F^2 test: nonzero entries confined to row/column q.
    for (int q = 0; q < N && !info.f2; ++q) {
        bool ok = false, confined = true;
        for (int i = 0; i < N && confined; ++i)
            for (int j = 0; j < N; ++j) {
                if (alpha.at(i, j) == 0) continue;
                ok = true;
                if (i != q && j != q) { confined = false; break; }
            }
        if (ok && confined) {
            info.f2 = true;
            info.f2_index = q + 1;
        }
    }
    return info;
}

}  // namespace wtdiag
