#include "wtdiag/oracle.hpp"

#include <atomic>
#include <cmath>
#include <map>
#include <stdexcept>
#include <thread>

namespace wtdiag {

void OracleConfig::validate() const {
    model.validate();
    if (model.infinite_T()) throw std::invalid_argument("oracle: requires finite T");
    if (grid_nodes < 8) throw std::invalid_argument("oracle: grid too coarse");
    if (cutoff <= 0) throw std::invalid_argument("oracle: cutoff must be positive");
    if (tau_max < model.tau1 || tau_max < model.tau2)
        throw std::invalid_argument("oracle: tau_max must cover tau1, tau2");
    if (max_order < 0 || max_order > 6) throw std::invalid_argument("oracle: bad max_order");
}

int OracleLattice::mode_index(std::span<const std::int64_t> k) const {
    for (size_t i = 0; i < mode_num.size(); ++i) {
        bool eq = true;
        for (int a = 0; a < d; ++a)
            if (mode_num[i][static_cast<size_t>(a)] != k[static_cast<size_t>(a)]) {
                eq = false;
                break;
            }
        if (eq) return static_cast<int>(i);
    }
    return -1;
}

OracleLattice OracleLattice::build(const OracleConfig& cfg) {
    OracleLattice lat;
    lat.d = cfg.model.d;
    lat.L = cfg.model.L;
    const std::int64_t K = static_cast<std::int64_t>(std::floor(cfg.cutoff * cfg.model.L + 1e-9));
    const std::int64_t cutoff_sq = static_cast<std::int64_t>(
        std::llround(cfg.cutoff * cfg.cutoff * cfg.model.L * cfg.model.L));
    std::vector<std::int64_t> k(static_cast<size_t>(lat.d), -K);
    bool done = false;
    while (!done) {
        std::int64_t norm = 0;
        for (int a = 0; a < lat.d; ++a) norm += k[static_cast<size_t>(a)] * k[static_cast<size_t>(a)];
        if (norm <= cutoff_sq) {
            lat.mode_num.push_back(k);
            double s2 = static_cast<double>(norm) / (lat.L * lat.L);
            lat.gamma.push_back(cfg.model.gamma_sq(s2));
            lat.bval.push_back(cfg.model.b.at_sq(s2));
        }
        int c = 0;
        for (;; ++c) {
            if (c == lat.d) { done = true; break; }
            if (++k[static_cast<size_t>(c)] <= K) break;
            k[static_cast<size_t>(c)] = -K;
        }
    }
    const int M = static_cast<int>(lat.mode_num.size());
    lat.triples.assign(static_cast<size_t>(M), {});
    lat.omega_values.assign(static_cast<size_t>(M), {});
    std::vector<std::int64_t> s3(static_cast<size_t>(lat.d));
    for (int target = 0; target < M; ++target) {
        std::map<std::int64_t, int> bucket_of;  // omega numerator -> bucket id
        std::int64_t ns = 0;
        for (int a = 0; a < lat.d; ++a)
            ns += lat.mode_num[static_cast<size_t>(target)][static_cast<size_t>(a)] *
                  lat.mode_num[static_cast<size_t>(target)][static_cast<size_t>(a)];
        for (int i1 = 0; i1 < M; ++i1)
            for (int i2 = 0; i2 < M; ++i2) {
                std::int64_t n1 = 0, n2 = 0, n3 = 0;
                for (int a = 0; a < lat.d; ++a) {
                    std::int64_t v1 = lat.mode_num[static_cast<size_t>(i1)][static_cast<size_t>(a)];
                    std::int64_t v2 = lat.mode_num[static_cast<size_t>(i2)][static_cast<size_t>(a)];
                    std::int64_t v3 = v1 + v2 - lat.mode_num[static_cast<size_t>(target)][static_cast<size_t>(a)];
                    s3[static_cast<size_t>(a)] = v3;
                    n1 += v1 * v1;
                    n2 += v2 * v2;
                    n3 += v3 * v3;
                }
                int i3 = lat.mode_index(s3);
                if (i3 < 0) continue;
                // (1.8): {s1, s2} != {s3, s}
                if (i1 == i3 || i1 == target) continue;
                std::int64_t omega_num = n1 + n2 - n3 - ns;
                auto [it, inserted] = bucket_of.try_emplace(
                    omega_num, static_cast<int>(lat.omega_values[static_cast<size_t>(target)].size()));
                if (inserted)
                    lat.omega_values[static_cast<size_t>(target)].push_back(
                        static_cast<double>(omega_num) / (lat.L * lat.L));
                lat.triples[static_cast<size_t>(target)].push_back(
                    Triple{i1, i2, i3, it->second});
            }
    }
    return lat;
}

int OraclePath::node_of(double tau) const {
    double x = (tau - t0) / h;
    int node = static_cast<int>(std::lround(x));
    if (node < 0 || node >= nodes || std::abs(x - node) > 1e-9)
        throw std::invalid_argument("oracle: time is not a grid node");
    return node;
}

OraclePath sample_a0(const OracleConfig& cfg, const OracleLattice& lat, std::uint64_t seed) {
    cfg.validate();
    OraclePath p;
    p.nodes = cfg.grid_nodes;
    p.t0 = -cfg.model.T;
    p.h = (cfg.tau_max + cfg.model.T) / (cfg.grid_nodes - 1);
    p.max_order = 0;
    const int M = static_cast<int>(lat.mode_num.size());
    p.a.assign(1, std::vector<std::complex<double>>(static_cast<size_t>(M) * p.nodes, {0.0, 0.0}));
    Rng rng(seed);
    for (int mode = 0; mode < M; ++mode) {
        double g = lat.gamma[static_cast<size_t>(mode)];
        double decay = std::exp(-g * p.h);
        // E a abar = (b^2/g)(1 - e^{-2 g h}) per step; circular complex noise.
        double c = lat.bval[static_cast<size_t>(mode)] *
                   std::sqrt((1.0 - std::exp(-2.0 * g * p.h)) / (2.0 * g));
        std::complex<double> cur(0.0, 0.0);
        auto* row = &p.a[0][static_cast<size_t>(mode) * p.nodes];
        row[0] = cur;
        for (int t = 1; t < p.nodes; ++t) {
            cur = cur * decay + c * std::complex<double>(rng.normal(), rng.normal());
            row[t] = cur;
        }
    }
    return p;
}

namespace {

struct FilonCoeffs {
    std::complex<double> decay, c_prev, c_cur;
};

FilonCoeffs filon_for(double gamma, double omega_over_nu, double h) {
    std::complex<double> kappa(gamma, omega_over_nu);
    std::complex<double> e = std::exp(-kappa * h);
    std::complex<double> E0 = (1.0 - e) / kappa;
    std::complex<double> E1 = -1.0 / (kappa * kappa) + e * (h / kappa + 1.0 / (kappa * kappa));
    FilonCoeffs f;
    f.decay = e;
    f.c_prev = -E1 / h;
    f.c_cur = E0 + E1 / h;
    return f;
}

}  // namespace

void duhamel_fill(OraclePath& path, const OracleConfig& cfg, const OracleLattice& lat) {
    const int M = static_cast<int>(lat.mode_num.size());
    const int nodes = path.nodes;
    const double nu = cfg.model.nu;
    const double Lfac = std::pow(cfg.model.L, -static_cast<double>(cfg.model.d));
    path.max_order = cfg.max_order;
    path.a.resize(static_cast<size_t>(cfg.max_order) + 1);
    for (int ord = 1; ord <= cfg.max_order; ++ord)
        path.a[static_cast<size_t>(ord)].assign(static_cast<size_t>(M) * nodes, {0.0, 0.0});

    // Per (mode, bucket): Filon coefficients, rolling phase e^{i omega l / nu},
    // prefix integrals P per order, and previous-node bucket sums per order.
    struct BucketState {
        FilonCoeffs f;
        std::complex<double> phase, phase_step;
    };
    std::vector<std::vector<BucketState>> st(static_cast<size_t>(M));
    for (int mode = 0; mode < M; ++mode) {
        auto& buckets = st[static_cast<size_t>(mode)];
        for (double w : lat.omega_values[static_cast<size_t>(mode)]) {
            BucketState b;
            b.f = filon_for(lat.gamma[static_cast<size_t>(mode)], w / nu, path.h);
            b.phase = std::polar(1.0, w * path.t0 / nu);
            b.phase_step = std::polar(1.0, w * path.h / nu);
            buckets.push_back(b);
        }
    }
    const int maxOrd = cfg.max_order;
    std::vector<std::vector<std::vector<std::complex<double>>>> P(
        static_cast<size_t>(maxOrd) + 1), Gprev(static_cast<size_t>(maxOrd) + 1);
    for (int ord = 1; ord <= maxOrd; ++ord) {
        P[static_cast<size_t>(ord)].assign(static_cast<size_t>(M), {});
        Gprev[static_cast<size_t>(ord)].assign(static_cast<size_t>(M), {});
        for (int mode = 0; mode < M; ++mode) {
            size_t nb = lat.omega_values[static_cast<size_t>(mode)].size();
            P[static_cast<size_t>(ord)][static_cast<size_t>(mode)].assign(nb, {0.0, 0.0});
            Gprev[static_cast<size_t>(ord)][static_cast<size_t>(mode)].assign(nb, {0.0, 0.0});
        }
    }
    std::vector<std::complex<double>> G;

    for (int t = 0; t < nodes; ++t) {
        for (int ord = 1; ord <= maxOrd; ++ord) {
            for (int mode = 0; mode < M; ++mode) {
                size_t nb = lat.omega_values[static_cast<size_t>(mode)].size();
                G.assign(nb, {0.0, 0.0});
                // sum over compositions m1+m2+m3 = ord-1 of a^{m1} a^{m2} conj(a^{m3})
                for (int m1 = 0; m1 <= ord - 1; ++m1)
                    for (int m2 = 0; m2 <= ord - 1 - m1; ++m2) {
                        int m3 = ord - 1 - m1 - m2;
                        const auto& A1 = path.a[static_cast<size_t>(m1)];
                        const auto& A2 = path.a[static_cast<size_t>(m2)];
                        const auto& A3 = path.a[static_cast<size_t>(m3)];
                        for (const auto& tr : lat.triples[static_cast<size_t>(mode)]) {
                            std::complex<double> prod =
                                A1[static_cast<size_t>(tr.i1) * nodes + t] *
                                A2[static_cast<size_t>(tr.i2) * nodes + t] *
                                std::conj(A3[static_cast<size_t>(tr.i3) * nodes + t]);
                            G[static_cast<size_t>(tr.bucket)] += prod;
                        }
                    }
                auto& Pm = P[static_cast<size_t>(ord)][static_cast<size_t>(mode)];
                auto& Gp = Gprev[static_cast<size_t>(ord)][static_cast<size_t>(mode)];
                std::complex<double> acc(0.0, 0.0);
                auto& buckets = st[static_cast<size_t>(mode)];
                for (size_t b = 0; b < nb; ++b) {
                    if (t > 0)
                        Pm[b] = Pm[b] * buckets[b].f.decay + buckets[b].f.c_prev * Gp[b] +
                                buckets[b].f.c_cur * G[b];
                    acc += buckets[b].phase * Pm[b];
                    Gp[b] = G[b];
                }
                path.a[static_cast<size_t>(ord)][static_cast<size_t>(mode) * nodes + t] =
                    std::complex<double>(0.0, 1.0) * Lfac * acc;
            }
        }
        if (t + 1 < nodes)
            for (int mode = 0; mode < M; ++mode)
                for (auto& b : st[static_cast<size_t>(mode)]) b.phase *= b.phase_step;
    }
}

std::complex<double> duhamel_order1_direct(const OraclePath& path, const OracleConfig& cfg,
                                           const OracleLattice& lat, int mode, int node) {
    // Same quadrature, one prefix integral per (s1, s2) pair, phases applied
    // per pair instead of per bucket.
    const double nu = cfg.model.nu;
    const double Lfac = std::pow(cfg.model.L, -static_cast<double>(cfg.model.d));
    std::complex<double> acc(0.0, 0.0);
    for (const auto& tr : lat.triples[static_cast<size_t>(mode)]) {
        double w = lat.omega_values[static_cast<size_t>(mode)][static_cast<size_t>(tr.bucket)];
        FilonCoeffs f = filon_for(lat.gamma[static_cast<size_t>(mode)], w / nu, path.h);
        std::complex<double> P(0.0, 0.0);
        std::complex<double> gp(0.0, 0.0);
        for (int t = 0; t <= node; ++t) {
            std::complex<double> g =
                path.at(0, tr.i1, t) * path.at(0, tr.i2, t) * std::conj(path.at(0, tr.i3, t));
            if (t > 0) P = P * f.decay + f.c_prev * gp + f.c_cur * g;
            gp = g;
        }
        double l_node = path.t0 + node * path.h;
        acc += std::polar(1.0, w * l_node / nu) * P;
    }
    return std::complex<double>(0.0, 1.0) * Lfac * acc;
}

OraclePath restrict_path(const OraclePath& path, int factor) {
    OraclePath out;
    out.t0 = path.t0;
    out.h = path.h * factor;
    out.nodes = (path.nodes - 1) / factor + 1;
    if ((path.nodes - 1) % factor != 0)
        throw std::invalid_argument("restrict_path: node count not divisible");
    out.max_order = 0;
    size_t modes = path.a[0].size() / static_cast<size_t>(path.nodes);
    out.a.assign(1, std::vector<std::complex<double>>(modes * out.nodes));
    for (size_t mode = 0; mode < modes; ++mode)
        for (int t = 0; t < out.nodes; ++t)
            out.a[0][mode * out.nodes + t] =
                path.a[0][mode * path.nodes + static_cast<size_t>(t) * factor];
    return out;
}

namespace {

OracleEstimate mc_pair(int m, int n, const OracleConfig& cfg, std::span<const double> s,
                       std::uint64_t replicates, std::uint64_t seed, int jobs, bool conjugated) {
    cfg.validate();
    OracleLattice lat = OracleLattice::build(cfg);
    std::vector<std::int64_t> k(static_cast<size_t>(cfg.model.d));
    for (int a = 0; a < cfg.model.d; ++a) {
        double scaled = s[static_cast<size_t>(a)] * cfg.model.L;
        k[static_cast<size_t>(a)] = std::llround(scaled);
        if (std::abs(scaled - static_cast<double>(k[static_cast<size_t>(a)])) > 1e-9)
            throw std::invalid_argument("oracle: s must lie on the lattice");
    }
    int target = lat.mode_index(k);
    if (target < 0) throw std::invalid_argument("oracle: s outside the mode cutoff");

    OracleConfig c = cfg;
    c.max_order = std::max(m, n);
    struct Part {
        double sr = 0, si = 0, qr = 0, qi = 0;
        std::uint64_t n = 0;
    };
    const std::uint64_t chunk = 64;
    const std::uint64_t nChunks = (replicates + chunk - 1) / chunk;
    std::vector<Part> parts(static_cast<size_t>(nChunks));
    auto work = [&](std::uint64_t ci) {
        Part p;
        std::uint64_t lo = ci * chunk, hi = std::min(replicates, lo + chunk);
        for (std::uint64_t r = lo; r < hi; ++r) {
            OraclePath path = sample_a0(c, lat, derive_seed(seed, r));
            duhamel_fill(path, c, lat);
            int t1 = path.node_of(c.model.tau1);
            int t2 = path.node_of(c.model.tau2);
            std::complex<double> x =
                conjugated ? path.at(m, target, t1) * std::conj(path.at(n, target, t2))
                           : path.at(m, target, t1) * path.at(n, target, t2);
            p.sr += x.real();
            p.si += x.imag();
            p.qr += x.real() * x.real();
            p.qi += x.imag() * x.imag();
            ++p.n;
        }
        parts[static_cast<size_t>(ci)] = p;
    };
    int nj = std::max(1, jobs);
    if (nj == 1) {
        for (std::uint64_t ci = 0; ci < nChunks; ++ci) work(ci);
    } else {
        std::atomic<std::uint64_t> next{0};
        std::vector<std::thread> pool;
        for (int t = 0; t < nj; ++t)
            pool.emplace_back([&] {
                for (;;) {
                    std::uint64_t ci = next.fetch_add(1);
                    if (ci >= nChunks) return;
                    work(ci);
                }
            });
        for (auto& th : pool) th.join();
    }
    Part tot;
    for (const auto& p : parts) {
        tot.sr += p.sr;
        tot.si += p.si;
        tot.qr += p.qr;
        tot.qi += p.qi;
        tot.n += p.n;
    }
    OracleEstimate e;
    e.replicates = tot.n;
    e.seed = seed;
    e.grid_nodes = cfg.grid_nodes;
    e.cutoff = cfg.cutoff;
    double nn = static_cast<double>(tot.n);
    e.value = {tot.sr / nn, tot.si / nn};
    if (tot.n > 1) {
        double vr = std::max(0.0, (tot.qr - tot.sr * tot.sr / nn) / (nn - 1));
        double vi = std::max(0.0, (tot.qi - tot.si * tot.si / nn) / (nn - 1));
        e.stderr_re = std::sqrt(vr / nn);
        e.stderr_im = std::sqrt(vi / nn);
    }
    return e;
}

}  // namespace

OracleEstimate mc_correlation(int m, int n, const OracleConfig& cfg, std::span<const double> s,
                              std::uint64_t replicates, std::uint64_t seed, int jobs) {
    return mc_pair(m, n, cfg, s, replicates, seed, jobs, /*conjugated=*/true);
}

OracleEstimate mc_nonconjugated(int m, int n, const OracleConfig& cfg, std::span<const double> s,
                                std::uint64_t replicates, std::uint64_t seed) {
    return mc_pair(m, n, cfg, s, replicates, seed, 1, /*conjugated=*/false);
}

}  // namespace wtdiag
