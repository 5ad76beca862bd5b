#include "wtdiag/evaluate.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "wtdiag/rng.hpp"

namespace wtdiag {

namespace {

constexpr double kPi = 3.14159265358979323846;

/// Gaussian proposal over z in R^{N*d}: per space dimension the same N x N
/// covariance (4 w M)^{-1} matched to the leaf weight product, mean solving
/// M mu = -u s_alpha.
struct Proposal {
    int N = 0, d = 0;
    Eigen::MatrixXd chol_lower;    // L with M = L L^T
    Eigen::MatrixXd chol_inv_t;    // L^{-T}
    std::vector<double> mu;        // N*d
    double scale = 1.0;            // 1/sqrt(4 w)
    double log_norm = 0.0;         // log of the pdf normalisation constant
    double phi_min = 0.0;          // min_z sum |xi_psi|^2

    void sample(Rng& rng, std::vector<double>& z, std::vector<double>& u) const {
        u.resize(static_cast<size_t>(N));
        for (int al = 0; al < d; ++al) {
            for (int i = 0; i < N; ++i) u[static_cast<size_t>(i)] = rng.normal();
            // z = mu + scale * L^{-T} u, so Cov(z) = scale^2 M^{-1}.
            for (int i = 0; i < N; ++i) {
                double v = 0;
                for (int j = i; j < N; ++j) v += chol_inv_t(i, j) * u[static_cast<size_t>(j)];
                z[static_cast<size_t>(i * d + al)] = mu[static_cast<size_t>(i * d + al)] + scale * v;
            }
        }
    }

    double log_pdf(std::span<const double> z) const {
        double quad = 0.0;
        for (int al = 0; al < d; ++al) {
            // |L^T (z - mu)|^2 per dimension.
            for (int i = 0; i < N; ++i) {
                double v = 0;
                for (int j = i; j < N; ++j)
                    v += chol_lower(j, i) *
                         (z[static_cast<size_t>(j * d + al)] - mu[static_cast<size_t>(j * d + al)]);
                quad += v * v;
            }
        }
        return log_norm - 0.5 * quad / (scale * scale);
    }
};

Eigen::MatrixXd leaf_gram(const DiagramAlgebra& alg) {
    const int N = alg.order_N();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(N, N);
    for (const auto& e : alg.el) {
        const auto& c = alg.xi.coeff[static_cast<size_t>(e.xi_row)];
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j)
                m(i, j) += c[static_cast<size_t>(i)] * c[static_cast<size_t>(j)];
    }
    return m;
}

Eigen::VectorXd leaf_coeff_sum(const DiagramAlgebra& alg) {
    const int N = alg.order_N();
    Eigen::VectorXd u = Eigen::VectorXd::Zero(N);
    for (const auto& e : alg.el) {
        const auto& c = alg.xi.coeff[static_cast<size_t>(e.xi_row)];
        for (int i = 0; i < N; ++i) u(i) += c[static_cast<size_t>(i)];
    }
    return u;
}

Proposal build_proposal(const Eigen::MatrixXd& gram, const Eigen::VectorXd& usum,
                        const DensityModel& m, std::span<const double> s, double s_sq_count) {
    Proposal p;
    p.N = static_cast<int>(gram.rows());
    p.d = m.d;
    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("proposal: leaf Gram matrix is not positive definite");
    p.chol_lower = llt.matrixL();
    p.chol_inv_t =
        p.chol_lower.transpose().triangularView<Eigen::Upper>().solve(
            Eigen::MatrixXd::Identity(p.N, p.N));
    Eigen::VectorXd mu_param = llt.solve(-usum);
    p.mu.assign(static_cast<size_t>(p.N * p.d), 0.0);
    for (int i = 0; i < p.N; ++i)
        for (int al = 0; al < p.d; ++al)
            p.mu[static_cast<size_t>(i * p.d + al)] = mu_param(i) * s[static_cast<size_t>(al)];
    double w = m.b.width;
    p.scale = 1.0 / std::sqrt(4.0 * w);
    double logdetL = 0.0;
    for (int i = 0; i < p.N; ++i) logdetL += std::log(p.chol_lower(i, i));
    // pdf = (2 pi scale^2)^{-Nd/2} det(M)^{d/2} exp(-|L^T(z-mu)|^2 / (2 scale^2))
    p.log_norm = -0.5 * p.N * p.d * std::log(2.0 * kPi * p.scale * p.scale) + p.d * logdetL;
    // phi_min = sum_psi |xi_psi(mu)|^2 = |s|^2 * (count + u^T mu_param)
    double s2 = 0;
    for (double v : s) s2 += v * v;
    p.phi_min = s2 * (s_sq_count + usum.dot(mu_param));
    return p;
}

struct Accumulator {
    double sum_re = 0, sum_im = 0, sq_re = 0, sq_im = 0;
    std::uint64_t n = 0;
    void add(std::complex<double> v) {
        sum_re += v.real();
        sum_im += v.imag();
        sq_re += v.real() * v.real();
        sq_im += v.imag() * v.imag();
        ++n;
    }
    void merge(const Accumulator& o) {
        sum_re += o.sum_re;
        sum_im += o.sum_im;
        sq_re += o.sq_re;
        sq_im += o.sq_im;
        n += o.n;
    }
    IntegralEstimate finish() const {
        IntegralEstimate e;
        e.samples = n;
        if (n == 0) return e;
        double nn = static_cast<double>(n);
        e.value = {sum_re / nn, sum_im / nn};
        if (n > 1) {
            double vr = std::max(0.0, (sq_re - sum_re * sum_re / nn) / (nn - 1));
            double vi = std::max(0.0, (sq_im - sum_im * sum_im / nn) / (nn - 1));
            e.stderr_re = std::sqrt(vr / nn);
            e.stderr_im = std::sqrt(vi / nn);
        }
        return e;
    }
};

/// Deterministic chunked Monte Carlo: chunk c draws from Rng::stream(seed, c)
/// and partial results merge in chunk order regardless of worker count.
template <class SampleFn>
IntegralEstimate mc_run(const McOptions& opts, SampleFn&& fn) {
    const std::uint64_t chunkSize = std::max<std::uint64_t>(1, opts.chunk);
    const std::uint64_t nChunks = (opts.samples + chunkSize - 1) / chunkSize;
    std::vector<Accumulator> parts(static_cast<size_t>(nChunks));
    auto work = [&](std::uint64_t c) {
        Rng rng = Rng::stream(opts.seed, c);
        std::uint64_t lo = c * chunkSize;
        std::uint64_t hi = std::min(opts.samples, lo + chunkSize);
        Accumulator acc;
        fn(rng, hi - lo, acc);
        parts[static_cast<size_t>(c)] = acc;
    };
    int jobs = std::max(1, opts.jobs);
    if (jobs == 1 || nChunks <= 1) {
        for (std::uint64_t c = 0; c < nChunks; ++c) work(c);
    } else {
        std::vector<std::thread> pool;
        std::atomic<std::uint64_t> next{0};
        for (int t = 0; t < jobs; ++t)
            pool.emplace_back([&] {
                for (;;) {
                    std::uint64_t c = next.fetch_add(1);
                    if (c >= nChunks) return;
                    work(c);
                }
            });
        for (auto& th : pool) th.join();
    }
    Accumulator total;
    for (const auto& a : parts) total.merge(a);
    IntegralEstimate e = total.finish();
    e.seed = opts.seed;
    return e;
}

}  // namespace

std::vector<DiagramAlgebra> compile_diagrams(int m, int n, bool true_only) {
    std::vector<DiagramAlgebra> out;
    for (const Diagram& d : product_set(m, n))
        for (FeynmanDiagram& f : enumerate_feynman(d)) {
            DiagramAlgebra a = DiagramAlgebra::build(std::move(f));
            if (!true_only || a.true_diagram) out.push_back(std::move(a));
        }
    return out;
}

IntegralEstimate continuum_J(const DiagramAlgebra& alg, const DensityModel& m,
                             std::span<const double> s, const McOptions& opts) {
    m.validate();
    if (!alg.true_diagram) {
        IntegralEstimate e;
        e.method = "excluded-not-true";
        e.seed = opts.seed;
        return e;
    }
    const int N = alg.order_N();
    if (N == 0) {
        IntegralEstimate e;
        DensityAtZ atz(alg, m, s, {});
        std::vector<double> times{m.tau1, m.tau2};
        e.value = atz.density(m, times);
        e.method = "closed-form";
        e.seed = opts.seed;
        return e;
    }
    Proposal prop = build_proposal(leaf_gram(alg), leaf_coeff_sum(alg), m, s,
                                   static_cast<double>(alg.el.size()));
    const bool kernel_route = m.infinite_T() && m.tau1 == m.tau2;

    IntegralEstimate e = mc_run(opts, [&](Rng& rng, std::uint64_t count, Accumulator& acc) {
        std::vector<double> z(static_cast<size_t>(N * m.d)), u, times(static_cast<size_t>(N + 2));
        DensityAtZ atz;
        std::vector<double> delta(static_cast<size_t>(N));
        for (std::uint64_t i = 0; i < count; ++i) {
            prop.sample(rng, z, u);
            atz.reset(alg, m, s, z);
            double lp = prop.log_pdf(z);
            std::complex<double> val;
            if (kernel_route) {
                val = atz.B_product * kernel_sum(alg, m, atz) * std::exp(-lp);
            } else {
                // Joint (l, z) sampling: per-block exponential offsets along
                // the E_D tree, pdf exp(-sum delta).
                times[0] = m.tau1;
                times[1] = m.tau2;
                double sum_delta = 0.0;
                for (int k = 1; k <= N; ++k) {
                    double dlt = -std::log(rng.uniform_pos());
                    delta[static_cast<size_t>(k - 1)] = dlt;
                    sum_delta += dlt;
                }
                for (size_t ei = 0; ei < alg.ed.size(); ++ei) {
                    // edges are stored per block in index order; virtual slot
                    // k+1 determines block k, parent time already filled.
                    int wslot = alg.ed_slot_w[ei];
                    int rslot = alg.ed_slot_r[ei];
                    times[static_cast<size_t>(wslot)] =
                        times[static_cast<size_t>(rslot)] - delta[static_cast<size_t>(wslot - 2)];
                }
                double dv = atz.density(m, times);
                if (dv == 0.0) {
                    acc.add({0.0, 0.0});
                    continue;
                }
                double phase = 0.0;
                for (int k = 1; k <= N; ++k)
                    phase += atz.omega[static_cast<size_t>(k - 1)] * times[static_cast<size_t>(k + 1)];
                val = std::polar(dv, phase / m.nu) * std::exp(sum_delta - lp);
            }
            acc.add(val);
        }
    });
    e.method = kernel_route ? "kernel-mc" : "time-quadrature-mc";
    return e;
}

IntegralEstimate continuum_J_sum(std::span<const DiagramAlgebra> algs,
                                 std::span<const std::complex<double>> weights,
                                 const DensityModel& m, std::span<const double> s,
                                 const McOptions& opts) {
    m.validate();
    if (algs.empty()) {
        IntegralEstimate e;
        e.method = "kernel-mc-sum";
        e.seed = opts.seed;
        return e;
    }
    if (!(m.infinite_T() && m.tau1 == m.tau2))
        throw std::invalid_argument("continuum_J_sum: kernel route requires tau1 == tau2, T = inf");
    const int N = algs[0].order_N();
    for (const auto& a : algs)
        if (a.order_N() != N)
            throw std::invalid_argument("continuum_J_sum: mixed orders");
    // Shared proposal: average of the per-diagram Gram matrices.
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(N, N);
    Eigen::VectorXd usum = Eigen::VectorXd::Zero(N);
    double cnt = 0;
    for (const auto& a : algs) {
        gram += leaf_gram(a);
        usum += leaf_coeff_sum(a);
        cnt += static_cast<double>(a.el.size());
    }
    gram /= static_cast<double>(algs.size());
    usum /= static_cast<double>(algs.size());
    cnt /= static_cast<double>(algs.size());
    Proposal prop = build_proposal(gram, usum, m, s, cnt);

    IntegralEstimate e = mc_run(opts, [&](Rng& rng, std::uint64_t count, Accumulator& acc) {
        std::vector<double> z(static_cast<size_t>(N * m.d)), u;
        std::vector<DensityAtZ> atz(algs.size());
        for (std::uint64_t i = 0; i < count; ++i) {
            prop.sample(rng, z, u);
            double lp = prop.log_pdf(z);
            std::complex<double> total(0.0, 0.0);
            for (size_t a = 0; a < algs.size(); ++a) {
                if (!algs[a].true_diagram) continue;
                atz[a].reset(algs[a], m, s, z);
                total += weights[a] * atz[a].B_product * kernel_sum(algs[a], m, atz[a]);
            }
            acc.add(total * std::exp(-lp));
        }
    });
    e.method = "kernel-mc-sum";
    return e;
}

namespace {

/// One-dimensional lattice Gaussian sums used by the truncation bound.
double lattice_gauss_sum(double a, double step, double centre, double lo, double hi) {
    // sum over grid points x in [lo, hi] of exp(-a (x - centre)^2)
    double total = 0.0;
    double start = std::ceil(lo / step) * step;
    for (double x = start; x <= hi + 1e-12; x += step) {
        double t = x - centre;
        total += std::exp(-a * t * t);
    }
    return total;
}

double lattice_gauss_tail(double a, double step, double centre, double radius) {
    // sum over |x - centre| > radius on the grid
    double total = 0.0;
    for (double x = std::ceil((centre + radius) / step) * step;; x += step) {
        double t = x - centre;
        double v = std::exp(-a * t * t);
        total += v;
        if (v < 1e-300 || total > 1e290) break;
    }
    for (double x = std::floor((centre - radius) / step) * step;; x -= step) {
        double t = x - centre;
        double v = std::exp(-a * t * t);
        total += v;
        if (v < 1e-300 || total > 1e290) break;
    }
    return total;
}

struct LatticeContext {
    const DiagramAlgebra* alg;
    const DensityModel* m;
    std::vector<double> s;
    std::vector<std::int64_t> s_num;  // L * s, exact lattice coordinates
    int N, d;
    bool kernel_route;
    double time_rel_tol;
};

/// Exact admissibility of a lattice point: z_j != 0 and (alpha z)_j != 0.
bool z_admissible(const LatticeContext& ctx, std::span<const std::int64_t> zi) {
    const int N = ctx.N, d = ctx.d;
    for (int j = 0; j < N; ++j) {
        bool zero = true;
        for (int al = 0; al < d; ++al)
            if (zi[static_cast<size_t>(j * d + al)] != 0) { zero = false; break; }
        if (zero) return false;
    }
    for (int j = 0; j < N; ++j) {
        bool zero = true;
        for (int al = 0; al < d; ++al) {
            std::int64_t acc = 0;
            for (int i = 0; i < N; ++i) {
                int aji = ctx.alg->alpha.at(j, i);
                if (aji) acc += aji * zi[static_cast<size_t>(i * d + al)];
            }
            if (acc != 0) { zero = false; break; }
        }
        if (zero) return false;
    }
    return true;
}

bool omega_resonant(const LatticeContext& ctx, std::span<const std::int64_t> zi) {
    // omega_j = 2 z_j . (alpha z)_j; integer test on the scaled lattice.
    const int N = ctx.N, d = ctx.d;
    for (int j = 0; j < N; ++j) {
        std::int64_t dot = 0;
        for (int al = 0; al < d; ++al) {
            std::int64_t acc = 0;
            for (int i = 0; i < N; ++i) {
                int aji = ctx.alg->alpha.at(j, i);
                if (aji) acc += aji * zi[static_cast<size_t>(i * d + al)];
            }
            dot += zi[static_cast<size_t>(j * d + al)] * acc;
        }
        if (dot != 0) return false;
    }
    return true;
}

std::complex<double> lattice_summand(const LatticeContext& ctx, DensityAtZ& atz,
                                     std::span<const double> z) {
    const DensityModel& m = *ctx.m;
    atz.reset(*ctx.alg, m, ctx.s, z);
    if (m.theta == ThetaKind::Exponential) {
        if (ctx.kernel_route) return atz.B_product * kernel_sum(*ctx.alg, m, atz);
        return time_integral_full(*ctx.alg, m, atz, ctx.time_rel_tol);
    }
    return time_integral_full(*ctx.alg, m, atz, ctx.time_rel_tol);
}

}  // namespace

IntegralEstimate lattice_J(const DiagramAlgebra& alg, const DensityModel& m,
                           std::span<const double> s, const LatticeOptions& opts) {
    m.validate();
    const int N = alg.order_N();
    const int d = m.d;
    IntegralEstimate est;
    est.method = "lattice";
    if (!alg.true_diagram && N > 0) {
        est.method = "excluded-not-true";
        return est;
    }

    LatticeContext ctx;
    ctx.alg = &alg;
    ctx.m = &m;
    ctx.s.assign(s.begin(), s.end());
    ctx.N = N;
    ctx.d = d;
    ctx.kernel_route = m.infinite_T() && m.tau1 == m.tau2;
    ctx.time_rel_tol = opts.time_rel_tol;
    ctx.s_num.resize(static_cast<size_t>(d));
    for (int al = 0; al < d; ++al) {
        double scaled = s[static_cast<size_t>(al)] * m.L;
        std::int64_t k = std::llround(scaled);
        if (std::abs(scaled - static_cast<double>(k)) > 1e-9)
            throw std::invalid_argument("lattice_J: s must lie on the lattice Z^d / L");
        ctx.s_num[static_cast<size_t>(al)] = k;
    }

    if (N == 0) {
        DensityAtZ atz(alg, m, s, {});
        std::vector<double> times{m.tau1, m.tau2};
        est.value = atz.density(m, times);
        est.method = "closed-form";
        return est;
    }

    const bool box_mode = opts.mode_box > 0.0;
    double radius = opts.z_radius;
    double tail_bound = 0.0;

    Eigen::MatrixXd gram = leaf_gram(alg);
    Eigen::VectorXd usum = leaf_coeff_sum(alg);
    Proposal prop = build_proposal(gram, usum, m, s, static_cast<double>(alg.el.size()));
    double lambda_min = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(gram).eigenvalues()(0);
    double mu_max = 0.0;
    for (double v : prop.mu) mu_max = std::max(mu_max, std::abs(v));
    // |summand(z)| <= amp^{2(N+1)} e^{-2w Phi(z)} * time_bound, and
    // Phi(z) >= Phi_min + lambda_min(M) |z - mu|^2 exactly (Phi is quadratic).
    const double time_bound =
        ctx.kernel_route ? static_cast<double>(alg.orders.size()) / (2.0 * m.gamma_sq(m.norm_sq(s)))
                         : std::pow(std::max(m.tau1, m.tau2) + m.T, N);
    auto tail_at = [&](double rad) {
        double a = 2.0 * m.b.width * lambda_min * 0.999;
        double step = 1.0 / m.L;
        double full = lattice_gauss_sum(a, step, 0.0, -rad - 60.0, rad + 60.0);
        double rad_eff = std::max(rad - mu_max, 0.25);
        double tail = lattice_gauss_tail(a, step, 0.0, rad_eff);
        double ampf = std::pow(m.b.amp * m.b.amp, static_cast<double>(alg.el.size()));
        return static_cast<double>(N * d) * tail * std::pow(full, N * d - 1) * ampf *
               std::exp(-2.0 * m.b.width * prop.phi_min) * time_bound;
    };
    if (radius <= 0.0) {
        if (box_mode) {
            // every xi row lies in the box, so |z_i| = |xi_{2i-1} - xi_{pi(2i-1)}|
            // is at most 2 * box; enumerate a superset and filter exactly.
            radius = 2.0 * opts.mode_box + 0.5;
        } else {
            radius = 2.0;
            double ampf = std::pow(m.b.amp * m.b.amp, static_cast<double>(alg.el.size()));
            double retained_scale =
                ampf * std::exp(-2.0 * m.b.width * prop.phi_min) * time_bound;
            for (;;) {
                tail_bound = tail_at(radius);
                if (tail_bound <= opts.tail_eps * std::max(retained_scale, 1e-300)) break;
                if (radius > 40.0) break;
                radius *= 1.3;
            }
        }
    } else if (!box_mode) {
        tail_bound = tail_at(radius);
    }

    // Enumerate the integer grid.
    const std::int64_t K = static_cast<std::int64_t>(std::ceil(radius * m.L));
    const int dims = N * d;
    std::vector<std::int64_t> zi(static_cast<size_t>(dims), -K);
    std::vector<double> z(static_cast<size_t>(dims));
    DensityAtZ atz;
    std::complex<double> total(0.0, 0.0);
    double retained_abs = 0.0;

    // Box policy precomputation: |xi_row|^2 <= box^2 exactly on the scaled
    // lattice (all entries integers over L).
    const std::int64_t box_sq_num = box_mode
        ? static_cast<std::int64_t>(std::llround(opts.mode_box * opts.mode_box * m.L * m.L))
        : 0;

    bool done = false;
    while (!done) {
        bool skip = false;
        if (box_mode) {
            for (int row = 0; row <= 2 * N && !skip; ++row) {
                std::int64_t norm = 0;
                const auto& coeff = alg.xi.coeff[static_cast<size_t>(row)];
                for (int al = 0; al < d; ++al) {
                    std::int64_t v = ctx.s_num[static_cast<size_t>(al)];
                    for (int i = 0; i < N; ++i)
                        if (coeff[static_cast<size_t>(i)])
                            v += coeff[static_cast<size_t>(i)] * zi[static_cast<size_t>(i * d + al)];
                    norm += v * v;
                }
                if (norm > box_sq_num) skip = true;
            }
        }
        if (!skip && z_admissible(ctx, zi)) {
            bool include = true;
            if (m.theta == ThetaKind::ResonanceIndicator) include = omega_resonant(ctx, zi);
            if (include) {
                for (int c = 0; c < dims; ++c)
                    z[static_cast<size_t>(c)] = static_cast<double>(zi[static_cast<size_t>(c)]) / m.L;
                std::complex<double> v = lattice_summand(ctx, atz, z);
                total += v;
                retained_abs += std::abs(v);
            }
        }
        // odometer increment
        int c = 0;
        for (;; ++c) {
            if (c == dims) { done = true; break; }
            if (++zi[static_cast<size_t>(c)] <= K) break;
            zi[static_cast<size_t>(c)] = -K;
        }
    }

    double norm = std::pow(m.L, -static_cast<double>(N * d));
    est.value = total * norm;
    est.truncation_bound = box_mode ? 0.0 : tail_bound * norm;
    est.samples = 0;
    return est;
}

IntegralEstimate correlation(int m_ord, int n_ord, const DensityModel& model,
                             std::span<const double> s, const std::string& mode,
                             const McOptions& mc, const LatticeOptions& lat) {
    model.validate();
    IntegralEstimate est;
    est.seed = mc.seed;
    if (m_ord + n_ord == 1) {
        est.method = "exact-zero";
        return est;
    }
    auto algs = compile_diagrams(m_ord, n_ord, /*true_only=*/true);
    if (mode == "lattice") {
        std::complex<double> total(0.0, 0.0);
        double bound = 0.0;
        for (const auto& a : algs) {
            IntegralEstimate e = lattice_J(a, model, s, lat);
            total += a.c_F * e.value;
            bound += e.truncation_bound;
        }
        est.value = total;
        est.truncation_bound = bound;
        est.method = "lattice";
        return est;
    }
    if (mode != "continuum") throw std::invalid_argument("correlation: mode must be lattice|continuum");
    if (m_ord + n_ord == 0) {
        return continuum_J(algs.at(0), model, s, mc);
    }
    if (model.infinite_T() && model.tau1 == model.tau2) {
        std::vector<std::complex<double>> weights;
        for (const auto& a : algs) weights.push_back(a.c_F);
        return continuum_J_sum(algs, weights, model, s, mc);
    }
    // General times: estimate diagrams independently. c_F rotates components,
    // so combine the per-component errors conservatively.
    std::complex<double> total(0.0, 0.0);
    double var = 0;
    std::uint64_t samples = 0;
    for (size_t i = 0; i < algs.size(); ++i) {
        McOptions o = mc;
        o.seed = mc.seed ^ (0x9E3779B97F4A7C15ull * (i + 1));
        IntegralEstimate e = continuum_J(algs[i], model, s, o);
        total += algs[i].c_F * e.value;
        double se = std::max(e.stderr_re, e.stderr_im);
        var += se * se;
        samples += e.samples;
    }
    est.value = total;
    est.stderr_re = est.stderr_im = std::sqrt(var);
    est.samples = samples;
    est.method = "time-quadrature-mc";
    return est;
}

IntegralEstimate spectrum_order(int k, const DensityModel& model, std::span<const double> s,
                                const std::string& mode, const McOptions& mc,
                                const LatticeOptions& lat) {
    if (k < 0) throw std::invalid_argument("spectrum_order: k must be >= 0");
    if (model.tau1 != model.tau2)
        throw std::invalid_argument("spectrum_order: requires tau1 == tau2");
    IntegralEstimate total;
    total.seed = mc.seed;
    total.method = "spectrum(" + mode + ")";
    double vr = 0, vi = 0;
    for (int k1 = 0; k1 <= k; ++k1) {
        McOptions o = mc;
        o.seed = mc.seed ^ (0xD1B54A32D192ED03ull * (k1 + 1));
        IntegralEstimate e = correlation(k1, k - k1, model, s, mode, o, lat);
        total.value += e.value;
        vr += e.stderr_re * e.stderr_re;
        vi += e.stderr_im * e.stderr_im;
        total.samples += e.samples;
        total.truncation_bound += e.truncation_bound;
    }
    total.stderr_re = std::sqrt(vr);
    total.stderr_im = std::sqrt(vi);
    return total;
}

QuotientResult quotient_integral(const QuotientForm& form, int d, double nu,
                                 const McOptions& opts) {
    const int M = form.M;
    if (M < 2) throw std::invalid_argument("quotient_integral: M must be >= 2");
    const int K = static_cast<int>(form.A.size());
    if (K < 1) throw std::invalid_argument("quotient_integral: need at least one form");
    for (const auto& a : form.A) {
        if (static_cast<int>(a.size()) != M * M)
            throw std::invalid_argument("quotient_integral: matrix size mismatch");
        std::int64_t tr = 0;
        for (int i = 0; i < M; ++i) tr += a[static_cast<size_t>(i * M + i)];
        if (tr != 0) throw std::invalid_argument("quotient_integral: matrices must be traceless");
        for (int i = 0; i < M; ++i)
            for (int j = 0; j < M; ++j)
                if (a[static_cast<size_t>(i * M + j)] != a[static_cast<size_t>(j * M + i)])
                    throw std::invalid_argument("quotient_integral: matrices must be symmetric");
    }
    QuotientResult res;
    {
        std::vector<std::vector<std::int64_t>> stacked;
        for (const auto& a : form.A) stacked.push_back(a);
        res.rank_r = exact_rank(stacked);
    }
    auto G = form.G ? form.G : [](std::span<const double> z) {
        double t = 0;
        for (double v : z) t += v * v;
        return std::exp(-t);
    };
    const int dims = M * d;
    const double sigma = std::sqrt(0.5);  // matches exp(-|z|^2)
    const double log_norm = -0.5 * dims * std::log(2.0 * kPi * sigma * sigma);

    auto run = [&](bool bound_only) {
        return mc_run(opts, [&](Rng& rng, std::uint64_t count, Accumulator& acc) {
            std::vector<double> z(static_cast<size_t>(dims));
            for (std::uint64_t i = 0; i < count; ++i) {
                double quad = 0;
                for (int c = 0; c < dims; ++c) {
                    z[static_cast<size_t>(c)] = sigma * rng.normal();
                    quad += z[static_cast<size_t>(c)] * z[static_cast<size_t>(c)];
                }
                double lp = log_norm - 0.5 * quad / (sigma * sigma);
                std::complex<double> denom_prod(1.0, 0.0);
                double gamma_prod = 1.0;
                for (int k = 0; k < K; ++k) {
                    double q = 0;
                    const auto& a = form.A[static_cast<size_t>(k)];
                    for (int i = 0; i < M; ++i)
                        for (int j = 0; j < M; ++j) {
                            std::int64_t c = a[static_cast<size_t>(i * M + j)];
                            if (!c) continue;
                            double dot = 0;
                            for (int al = 0; al < d; ++al)
                                dot += z[static_cast<size_t>(i * d + al)] *
                                       z[static_cast<size_t>(j * d + al)];
                            q += static_cast<double>(c) * dot;
                        }
                    double gk = form.Gammas.empty()
                                    ? 1.0
                                    : form.Gammas[static_cast<size_t>(k)](z);
                    if (!(gk > 0.0))
                        throw std::invalid_argument("quotient_integral: Gamma must be positive");
                    gamma_prod *= gk;
                    denom_prod *= std::complex<double>(gk, q / nu);
                }
                double g = G(z);
                std::complex<double> val =
                    bound_only ? std::complex<double>(std::abs(g) / gamma_prod, 0.0)
                               : g / denom_prod;
                acc.add(val * std::exp(-lp));
            }
        });
    };
    res.estimate = run(false);
    res.estimate.method = "quotient-mc";
    {
        McOptions o = opts;
        o.samples = std::max<std::uint64_t>(20'000, opts.samples / 50);
        o.seed = opts.seed ^ 0xABCDEF12345ull;
        IntegralEstimate b = mc_run(o, [&](Rng& rng, std::uint64_t count, Accumulator& acc) {
            std::vector<double> z(static_cast<size_t>(dims));
            for (std::uint64_t i = 0; i < count; ++i) {
                double quad = 0;
                for (int c = 0; c < dims; ++c) {
                    z[static_cast<size_t>(c)] = sigma * rng.normal();
                    quad += z[static_cast<size_t>(c)] * z[static_cast<size_t>(c)];
                }
                double lp = log_norm - 0.5 * quad / (sigma * sigma);
                double gamma_prod = 1.0;
                for (int k = 0; k < K; ++k)
                    gamma_prod *= form.Gammas.empty() ? 1.0
                                                      : form.Gammas[static_cast<size_t>(k)](z);
                acc.add(std::complex<double>(std::abs(G(z)) / gamma_prod * std::exp(-lp), 0.0));
            }
        });
        res.pointwise_bound = b.value.real();
    }
    return res;
}

PowerLawFit fit_power_law(std::span<const double> nus, std::span<const double> values,
                          std::span<const double> stderrs) {
    const int n = static_cast<int>(nus.size());
    PowerLawFit best;
    if (n < 3) {
        best.stable = false;
        return best;
    }
    double ssr_by_q[2] = {0, 0};
    PowerLawFit fits[2];
    for (int q = 0; q <= 1; ++q) {
        double Sw = 0, Sx = 0, Sy = 0, Sxx = 0, Sxy = 0;
        for (int i = 0; i < n; ++i) {
            double v = std::abs(values[static_cast<size_t>(i)]);
            double sig = stderrs.empty() ? 0.0 : stderrs[static_cast<size_t>(i)];
            double rel = v > 0 ? std::max(sig / v, 1e-6) : 1.0;
            double w = 1.0 / (rel * rel);
            double x = std::log(nus[static_cast<size_t>(i)]);
            double y = std::log(std::max(v, 1e-300)) -
                       q * std::log(std::log(1.0 / nus[static_cast<size_t>(i)]));
            Sw += w;
            Sx += w * x;
            Sy += w * y;
            Sxx += w * x * x;
            Sxy += w * x * y;
        }
        double det = Sw * Sxx - Sx * Sx;
        PowerLawFit f;
        f.q = q;
        f.p = (Sw * Sxy - Sx * Sy) / det;
        f.log_a = (Sxx * Sy - Sx * Sxy) / det;
        f.p_stderr = std::sqrt(Sw / det);
        double ssr = 0;
        for (int i = 0; i < n; ++i) {
            double v = std::abs(values[static_cast<size_t>(i)]);
            double sig = stderrs.empty() ? 0.0 : stderrs[static_cast<size_t>(i)];
            double rel = v > 0 ? std::max(sig / v, 1e-6) : 1.0;
            double x = std::log(nus[static_cast<size_t>(i)]);
            double y = std::log(std::max(v, 1e-300)) -
                       q * std::log(std::log(1.0 / nus[static_cast<size_t>(i)]));
            double r = (y - f.log_a - f.p * x) / rel;
            ssr += r * r;
        }
        f.ssr = ssr;
        f.dof = n - 2;
        ssr_by_q[q] = ssr;
        fits[q] = f;
    }
    best = ssr_by_q[0] <= ssr_by_q[1] ? fits[0] : fits[1];
    best.ssr_alt = ssr_by_q[1 - best.q];
    best.stable = n >= 5 && best.p_stderr < 0.5;
    return best;
}

SweepResult scaling_sweep(
    const std::function<IntegralEstimate(const DensityModel&, std::uint64_t)>& target,
    const DensityModel& base, std::span<const double> grid, int predicted_exponent,
    bool predicted_log, std::uint64_t seed) {
    if (grid.size() < 5)
        throw std::invalid_argument("scaling_sweep: grid needs at least 5 points");
    for (size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] < grid[i - 1]))
            throw std::invalid_argument("scaling_sweep: grid must be strictly decreasing");
    SweepResult res;
    std::vector<double> nus, vals, errs;
    for (size_t i = 0; i < grid.size(); ++i) {
        DensityModel m = base;
        m.nu = grid[i];
        IntegralEstimate e = target(m, seed ^ (0xA0761D6478BD642Full * (i + 1)));
        res.points.push_back({grid[i], e});
        nus.push_back(grid[i]);
        vals.push_back(std::abs(e.value));
        errs.push_back(e.stderr_max());
    }
    res.fit = fit_power_law(nus, vals, errs);
    res.predicted_exponent = predicted_exponent;
    res.predicted_log = predicted_log;
    return res;
}

}  // namespace wtdiag
