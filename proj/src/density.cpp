#include "wtdiag/density.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>

#include "wtdiag/quadrature.hpp"
#include "wtdiag/rng.hpp"

namespace wtdiag {

void DensityModel::validate() const {
    if (d < 1) throw std::invalid_argument("model: d must be >= 1");
    if (!(nu > 0.0 && nu <= 0.5)) throw std::invalid_argument("model: nu must be in (0, 1/2]");
    if (!(L >= 1.0)) throw std::invalid_argument("model: L must be >= 1");
    if (!(T > 0.0)) throw std::invalid_argument("model: T must be positive");
    if (!std::isinf(T) && (tau1 < -T || tau2 < -T))
        throw std::invalid_argument("model: tau1, tau2 must be >= -T");
    if (!(gamma0.c0 >= 1.0) || gamma0.c1 < 0.0 || gamma0.c2 < 0.0)
        throw std::invalid_argument("model: gamma0 must satisfy gamma0(y) >= 1 for y >= 0");
    if (!(b.amp > 0.0) || !(b.width > 0.0))
        throw std::invalid_argument("model: b must be a positive decaying profile");
}

namespace {

DiagramAlgebra::Edge make_edge(const Diagram& d, int ci, int cbj) {
    DiagramAlgebra::Edge e;
    e.xi_row = ci;
    e.slot_a = Diagram::time_slot_of(false, ci);
    e.slot_b = Diagram::time_slot_of(true, cbj);
    e.block_a = Diagram::block_of(ci);
    e.block_b = Diagram::block_of(cbj);
    return e;
}

}  // namespace

DiagramAlgebra DiagramAlgebra::build(FeynmanDiagram f) {
    HamiltonCycle c = f.order_N() >= 1 ? hamilton_cycle(f) : HamiltonCycle{};
    return build(std::move(f), std::move(c));
}

DiagramAlgebra DiagramAlgebra::build(FeynmanDiagram f, HamiltonCycle cycle) {
    DiagramAlgebra a;
    a.F = std::move(f);
    a.C = std::move(cycle);
    const int N = a.order_N();
    a.c_F = phase_constant(a.F);
    if (N >= 1) {
        for (const auto& msg : validate_cycle(a.F, a.C))
            throw std::invalid_argument("DiagramAlgebra: invalid cycle: " + msg);
        a.alpha = alpha_matrix(a.F, a.C);
        a.xi = xi_map(a.F, a.C);
        a.true_diagram = is_true_diagram(a.alpha);
    } else {
        a.alpha.N = 0;
        a.xi.N = 0;
        a.xi.coeff.assign(1, {});
        a.true_diagram = true;  // the root-root pairing carries the order-0 term
    }

    for (const EdgeD& e : a.F.base.edges()) {
        Edge ed = make_edge(a.F.base, e.ci, e.cbj);
        a.ed.push_back(ed);
        bool ci_virtual = a.F.base.is_virtual(false, e.ci);
        a.ed_slot_r.push_back(ci_virtual ? ed.slot_b : ed.slot_a);
        a.ed_slot_w.push_back(ci_virtual ? ed.slot_a : ed.slot_b);
    }
    for (const auto& [ci, cbj] : a.F.edges_L()) a.el.push_back(make_edge(a.F.base, ci, cbj));

    if (N >= 1) {
        a.gamma_pairs.assign(static_cast<size_t>(N * (N + 1) / 2), {});
        auto add_pair = [&](const Edge& e) {
            if (e.block_a == e.block_b) return;
            a.gamma_pairs[static_cast<size_t>(a.pair_id(e.block_a, e.block_b))].push_back(e.xi_row);
        };
        for (const Edge& e : a.ed) add_pair(e);
        for (const Edge& e : a.el) add_pair(e);
        a.admissible = admissible_orders(a.F);
        for (const auto& q : a.admissible) {
            CompiledOrder co;
            co.q = q;
            co.cut_offsets.push_back(0);
            for (int k = 1; k <= N; ++k) {
                for (int r = 0; r < k; ++r)
                    for (int j = k; j <= N; ++j) {
                        int br = r == 0 ? 0 : q[static_cast<size_t>(r - 1)];
                        int bj = q[static_cast<size_t>(j - 1)];
                        int pid = a.pair_id(br, bj);
                        if (!a.gamma_pairs[static_cast<size_t>(pid)].empty())
                            co.cut_pair_ids.push_back(pid);
                    }
                co.cut_offsets.push_back(static_cast<int>(co.cut_pair_ids.size()));
            }
            a.orders.push_back(std::move(co));
        }
    }
    return a;
}

std::vector<std::vector<int>> admissible_orders(const FeynmanDiagram& f) {
    const int N = f.order_N();
    std::vector<std::vector<int>> out;
    if (N == 0) return out;
    // Constraints: block of the virtual endpoint may not precede (in time)
    // the block of the real endpoint; roots sit above every block.
    std::vector<std::pair<int, int>> constraints;  // (w_block, r_block), r_block 0 = root
    for (const EdgeD& e : f.base.edges()) {
        bool ci_virtual = f.base.is_virtual(false, e.ci);
        int wb = Diagram::block_of(ci_virtual ? e.ci : e.cbj);
        int rb = Diagram::block_of(ci_virtual ? e.cbj : e.ci);
        constraints.emplace_back(wb, rb);
    }
    std::vector<int> q(static_cast<size_t>(N));
    std::iota(q.begin(), q.end(), 1);
    std::vector<int> pos(static_cast<size_t>(N + 1), 0);
    do {
        for (int t = 0; t < N; ++t) pos[static_cast<size_t>(q[static_cast<size_t>(t)])] = t + 1;
        bool ok = true;
        for (const auto& [wb, rb] : constraints) {
            int pw = pos[static_cast<size_t>(wb)];
            int pr = rb == 0 ? 0 : pos[static_cast<size_t>(rb)];
            if (pw < pr) { ok = false; break; }
        }
        if (ok) out.push_back(q);
    } while (std::next_permutation(q.begin(), q.end()));
    return out;
}

DensityAtZ::DensityAtZ(const DiagramAlgebra& a, const DensityModel& m, std::span<const double> s,
                       std::span<const double> z) {
    reset(a, m, s, z);
}

void DensityAtZ::reset(const DiagramAlgebra& a, const DensityModel& m, std::span<const double> s,
                       std::span<const double> z) {
    alg = &a;
    const int N = a.order_N();
    const int d = m.d;
    xi_sq.assign(static_cast<size_t>(2 * N + 1), 0.0);
    for (int row = 0; row <= 2 * N; ++row) {
        double total = 0.0;
        const auto& coeff = a.xi.coeff[static_cast<size_t>(row)];
        for (int al = 0; al < d; ++al) {
            double v = s[static_cast<size_t>(al)];
            for (int i = 0; i < N; ++i) {
                int cc = coeff[static_cast<size_t>(i)];
                if (cc) v += cc * z[static_cast<size_t>(i * d + al)];
            }
            total += v * v;
        }
        xi_sq[static_cast<size_t>(row)] = total;
    }
    gamma_s = m.gamma_sq(m.norm_sq(s));
    gamma_ed.clear();
    gamma_el.clear();
    B_el.clear();
    B_product = 1.0;
    for (const auto& e : a.ed) gamma_ed.push_back(m.gamma_sq(xi_sq[static_cast<size_t>(e.xi_row)]));
    for (const auto& e : a.el) {
        double s2 = xi_sq[static_cast<size_t>(e.xi_row)];
        gamma_el.push_back(m.gamma_sq(s2));
        B_el.push_back(m.B_sq(s2));
        B_product *= B_el.back();
    }
    if (N >= 1) {
        omega.assign(static_cast<size_t>(N), 0.0);
        for (int j = 0; j < N; ++j) {
            double acc = 0;
            for (int i = 0; i < N; ++i) {
                int aji = a.alpha.at(j, i);
                if (!aji) continue;
                double dot = 0;
                for (int al = 0; al < d; ++al)
                    dot += z[static_cast<size_t>(j * d + al)] * z[static_cast<size_t>(i * d + al)];
                acc += aji * dot;
            }
            omega[static_cast<size_t>(j)] = 2.0 * acc;
        }
        pair_gamma.assign(a.gamma_pairs.size(), 0.0);
        size_t ei = 0;
        for (const auto& e : a.ed) {
            if (e.block_a != e.block_b)
                pair_gamma[static_cast<size_t>(a.pair_id(e.block_a, e.block_b))] += gamma_ed[ei];
            ++ei;
        }
        ei = 0;
        for (const auto& e : a.el) {
            if (e.block_a != e.block_b)
                pair_gamma[static_cast<size_t>(a.pair_id(e.block_a, e.block_b))] += gamma_el[ei];
            ++ei;
        }
    }
}

double DensityAtZ::density(const DensityModel& m, std::span<const double> times) const {
    double val = 1.0;
    const bool finT = !m.infinite_T();
    for (size_t i = 0; i < alg->ed.size(); ++i) {
        double lr = times[static_cast<size_t>(alg->ed_slot_r[i])];
        double lw = times[static_cast<size_t>(alg->ed_slot_w[i])];
        if (lw > lr || (finT && lw < -m.T)) return 0.0;
        val *= std::exp(-gamma_ed[i] * (lr - lw));
    }
    for (size_t i = 0; i < alg->el.size(); ++i) {
        double la = times[static_cast<size_t>(alg->el[i].slot_a)];
        double lb = times[static_cast<size_t>(alg->el[i].slot_b)];
        double term = std::exp(-gamma_el[i] * std::abs(la - lb));
        if (finT) term -= std::exp(-gamma_el[i] * (la + lb + 2.0 * m.T));
        val *= term * B_el[i];
    }
    return val;
}

std::complex<double> DensityAtZ::kernel_integrand(const DensityModel& m,
                                                  std::span<const double> times) const {
    double mag = 0.0;  // log-magnitude
    for (size_t i = 0; i < alg->ed.size(); ++i) {
        double lr = times[static_cast<size_t>(alg->ed_slot_r[i])];
        double lw = times[static_cast<size_t>(alg->ed_slot_w[i])];
        if (lw > lr) return {0.0, 0.0};
        mag -= gamma_ed[i] * (lr - lw);
    }
    for (size_t i = 0; i < alg->el.size(); ++i) {
        double la = times[static_cast<size_t>(alg->el[i].slot_a)];
        double lb = times[static_cast<size_t>(alg->el[i].slot_b)];
        mag -= gamma_el[i] * std::abs(la - lb);
    }
    double phase = 0.0;
    for (int k = 1; k <= alg->order_N(); ++k)
        phase += omega[static_cast<size_t>(k - 1)] * times[static_cast<size_t>(k + 1)];
    return std::polar(std::exp(mag), phase / m.nu);
}

namespace {

void require_kernel_hypotheses(const DensityModel& m) {
    if (!m.infinite_T())
        throw std::invalid_argument("time_kernel: requires T = infinity");
    if (m.tau1 != m.tau2)
        throw std::invalid_argument("time_kernel: requires tau1 == tau2");
}

bool order_admissible(const DiagramAlgebra& alg, std::span<const int> q) {
    const int N = alg.order_N();
    std::vector<int> pos(static_cast<size_t>(N + 1), 0);
    for (int t = 0; t < N; ++t) pos[static_cast<size_t>(q[static_cast<size_t>(t)])] = t + 1;
    for (size_t i = 0; i < alg.ed.size(); ++i) {
        // slot k+1 belongs to block k; slots 0/1 are the roots.
        int wslot = alg.ed_slot_w[i], rslot = alg.ed_slot_r[i];
        int wb = wslot - 1;  // virtual endpoint always sits in a block
        int rb = rslot >= 2 ? rslot - 1 : 0;
        int pw = pos[static_cast<size_t>(wb)];
        int pr = rb == 0 ? 0 : pos[static_cast<size_t>(rb)];
        if (pw < pr) return false;
    }
    return true;
}

}  // namespace

std::complex<double> time_kernel(const DiagramAlgebra& alg, const DensityModel& m,
                                 const DensityAtZ& atz, std::span<const int> q) {
    require_kernel_hypotheses(m);
    const int N = alg.order_N();
    if (static_cast<int>(q.size()) != N) throw std::invalid_argument("time_kernel: bad ordering");
    if (!order_admissible(alg, q)) return {0.0, 0.0};

    std::complex<double> prod(1.0, 0.0);
    double omega_tail = 0.0;
    // k runs N..1; factor k uses the tail sum of omegas and the gamma cut.
    for (int k = N; k >= 1; --k) {
        omega_tail += atz.omega[static_cast<size_t>(q[static_cast<size_t>(k - 1)] - 1)];
        double gamma_cut = 0.0;
        for (int r = 0; r < k; ++r)
            for (int j = k; j <= N; ++j) {
                int br = r == 0 ? 0 : q[static_cast<size_t>(r - 1)];
                int bj = q[static_cast<size_t>(j - 1)];
                gamma_cut += atz.pair_gamma[static_cast<size_t>(alg.pair_id(br, bj))];
            }
        std::complex<double> denom(gamma_cut, k == 1 ? 0.0 : omega_tail / m.nu);
        prod /= denom;
    }
    return prod;
}

std::complex<double> kernel_sum(const DiagramAlgebra& alg, const DensityModel& m,
                                const DensityAtZ& atz) {
    const int N = alg.order_N();
    const double inv_nu = 1.0 / m.nu;
    std::complex<double> total(0.0, 0.0);
    for (const auto& co : alg.orders) {
        std::complex<double> prod(1.0, 0.0);
        double omega_tail = 0.0;
        for (int k = N; k >= 1; --k) {
            omega_tail += atz.omega[static_cast<size_t>(co.q[static_cast<size_t>(k - 1)] - 1)];
            double gamma_cut = 0.0;
            for (int t = co.cut_offsets[static_cast<size_t>(k - 1)];
                 t < co.cut_offsets[static_cast<size_t>(k)]; ++t)
                gamma_cut += atz.pair_gamma[static_cast<size_t>(co.cut_pair_ids[static_cast<size_t>(t)])];
            prod /= std::complex<double>(gamma_cut, k == 1 ? 0.0 : omega_tail * inv_nu);
        }
        total += prod;
    }
    return total;
}

KernelFactorTable kernel_tables(const DiagramAlgebra& alg, std::span<const int> q) {
    const int N = alg.order_N();
    KernelFactorTable t;
    t.omega_blocks.assign(static_cast<size_t>(N), {});
    t.gamma_rows.assign(static_cast<size_t>(N), {});
    for (int k = 1; k <= N; ++k) {
        auto& ob = t.omega_blocks[static_cast<size_t>(k - 1)];
        for (int j = k; j <= N; ++j) ob.push_back(q[static_cast<size_t>(j - 1)]);
        auto& gr = t.gamma_rows[static_cast<size_t>(k - 1)];
        for (int r = 0; r < k; ++r)
            for (int j = k; j <= N; ++j) {
                int br = r == 0 ? 0 : q[static_cast<size_t>(r - 1)];
                int bj = q[static_cast<size_t>(j - 1)];
                for (int row : alg.gamma_pairs[static_cast<size_t>(alg.pair_id(br, bj))])
                    gr.push_back(row);
            }
        std::sort(gr.begin(), gr.end());
    }
    return t;
}

double density_value(const DiagramAlgebra& alg, const DensityModel& m, std::span<const double> s,
                     std::span<const double> l, std::span<const double> z) {
    const int N = alg.order_N();
    if (static_cast<int>(l.size()) != N) throw std::invalid_argument("density_value: bad l");
    DensityAtZ atz(alg, m, s, z);
    std::vector<double> times(static_cast<size_t>(N + 2));
    times[0] = m.tau1;
    times[1] = m.tau2;
    for (int k = 0; k < N; ++k) times[static_cast<size_t>(k + 2)] = l[static_cast<size_t>(k)];
    return atz.density(m, times);
}

bool kernel_gammas_separated(const DiagramAlgebra& alg, const DensityModel& m,
                             std::span<const std::int64_t> s_num,
                             std::span<const std::int64_t> z_num, std::int64_t den,
                             std::span<const int> q) {
    const int N = alg.order_N();
    const int d = m.d;
    auto xi_sq = [&](int row) {
        Rational total(0);
        for (int a = 0; a < d; ++a) {
            std::int64_t num = s_num[static_cast<size_t>(a)];
            for (int i = 0; i < N; ++i)
                num += alg.xi.coeff[static_cast<size_t>(row)][static_cast<size_t>(i)] *
                       z_num[static_cast<size_t>(i * d + a)];
            total = total + Rational(num * num, den * den);
        }
        return total;
    };
    std::vector<Rational> pg(alg.gamma_pairs.size(), Rational(0));
    for (size_t p = 0; p < alg.gamma_pairs.size(); ++p)
        for (int row : alg.gamma_pairs[p]) pg[p] = pg[p] + m.gamma0.exact_at(xi_sq(row));
    for (int k = 1; k <= N; ++k) {
        Rational cut(0);
        for (int r = 0; r < k; ++r)
            for (int j = k; j <= N; ++j) {
                int br = r == 0 ? 0 : q[static_cast<size_t>(r - 1)];
                int bj = q[static_cast<size_t>(j - 1)];
                cut = cut + pg[static_cast<size_t>(alg.pair_id(br, bj))];
            }
        if (!(cut >= Rational(1))) return false;
    }
    return true;
}

namespace {

/// Map simplex difference coordinates v (v_i >= 0) to the slot time vector.
void fill_times(const DiagramAlgebra& alg, double t, std::span<const int> q,
                std::span<const double> v, std::vector<double>& times) {
    const int N = alg.order_N();
    times[0] = t;
    times[1] = t;
    double cur = t;
    for (int k = 0; k < N; ++k) {
        cur -= v[static_cast<size_t>(k)];
        times[static_cast<size_t>(q[static_cast<size_t>(k)] + 1)] = cur;
    }
}

}  // namespace

SimplexQuadResult simplex_time_quadrature(const DiagramAlgebra& alg, const DensityModel& m,
                                          const DensityAtZ& atz, std::span<const int> q,
                                          double rel_tol, std::uint64_t probe_seed) {
    require_kernel_hypotheses(m);
    const int N = alg.order_N();
    const double t = m.tau1;
    SimplexQuadResult res;
    std::vector<double> times(static_cast<size_t>(N + 2));
    std::vector<double> v(static_cast<size_t>(N), 0.0);

    auto eval = [&](std::span<const double> vv) {
        fill_times(alg, t, q, vv, times);
        return atz.kernel_integrand(m, times);
    };

    // Inadmissible orderings: the indicator is identically zero on the open
    // simplex, so interior probes decide the value.
    Rng rng(probe_seed);
    bool interior_zero = true;
    for (int probe = 0; probe < 3; ++probe) {
        for (auto& vi : v) vi = 0.05 + 0.4 * rng.uniform();
        if (std::abs(eval(v)) != 0.0) { interior_zero = false; break; }
    }
    if (interior_zero) return res;

    // Per-axis decay rates from the integrand itself, then per-axis adaptive
    // panels; the simplex integrand in these coordinates is a product of
    // one-dimensional factors (checked below), each equal to 1 at v = 0.
    std::complex<double> prod(1.0, 0.0);
    double rel_err = 0.0;
    std::vector<double> vmax(static_cast<size_t>(N));
    for (int i = 0; i < N; ++i) {
        std::fill(v.begin(), v.end(), 0.0);
        const double h = 0.25;
        v[static_cast<size_t>(i)] = h;
        double rate = -std::log(std::max(std::abs(eval(v)), 1e-300)) / h;
        rate = std::max(rate, 0.5);
        double vm = std::min(42.0 / rate, 80.0);
        vmax[static_cast<size_t>(i)] = vm;
        auto axis = [&](double x) {
            v[static_cast<size_t>(i)] = x;
            return eval(v);
        };
        auto r = adaptive_gk<std::complex<double>>(axis, 0.0, vm, 1e-14, rel_tol, 6000);
        v[static_cast<size_t>(i)] = 0.0;
        prod *= r.value;
        rel_err += r.abserr / std::max(std::abs(r.value), 1e-300);
    }
    // Separability spot check at a random joint point.
    for (int i = 0; i < N; ++i)
        v[static_cast<size_t>(i)] = rng.uniform() * std::min(vmax[static_cast<size_t>(i)], 2.0);
    std::complex<double> joint = eval(v);
    std::complex<double> split(1.0, 0.0);
    std::vector<double> vv(static_cast<size_t>(N), 0.0);
    for (int i = 0; i < N; ++i) {
        vv[static_cast<size_t>(i)] = v[static_cast<size_t>(i)];
        split *= eval(vv);
        vv[static_cast<size_t>(i)] = 0.0;
    }
    if (std::abs(joint - split) > 1e-8 * std::max(1.0, std::abs(joint)))
        res.separable_ok = false;

    res.value = prod;
    res.abserr = std::abs(prod) * rel_err;
    return res;
}

std::complex<double> simplex_time_quadrature_nested(const DiagramAlgebra& alg,
                                                    const DensityModel& m,
                                                    const DensityAtZ& atz,
                                                    std::span<const int> q, double rel_tol) {
    require_kernel_hypotheses(m);
    const int N = alg.order_N();
    const double t = m.tau1;
    std::vector<double> times(static_cast<size_t>(N + 2));
    std::vector<double> v(static_cast<size_t>(N), 0.0);

    // Reuse the same per-axis truncation logic.
    std::vector<double> vmax(static_cast<size_t>(N));
    for (int i = 0; i < N; ++i) {
        std::fill(v.begin(), v.end(), 0.0);
        v[static_cast<size_t>(i)] = 0.25;
        fill_times(alg, t, q, v, times);
        double g = std::abs(atz.kernel_integrand(m, times));
        double rate = std::max(-std::log(std::max(g, 1e-300)) / 0.25, 0.5);
        vmax[static_cast<size_t>(i)] = std::min(42.0 / rate, 80.0);
    }
    std::fill(v.begin(), v.end(), 0.0);

    std::function<std::complex<double>(int)> level = [&](int dim) -> std::complex<double> {
        auto f = [&](double x) {
            v[static_cast<size_t>(dim)] = x;
            if (dim + 1 == N) {
                fill_times(alg, t, q, v, times);
                return atz.kernel_integrand(m, times);
            }
            return level(dim + 1);
        };
        auto r = adaptive_gk<std::complex<double>>(f, 0.0, vmax[static_cast<size_t>(dim)], 1e-13,
                                                   rel_tol, 1500);
        v[static_cast<size_t>(dim)] = 0.0;
        return r.value;
    };
    return level(0);
}

std::complex<double> time_integral_full(const DiagramAlgebra& alg, const DensityModel& m,
                                        const DensityAtZ& atz, double rel_tol) {
    const int N = alg.order_N();
    if (N == 0) {
        std::vector<double> times{m.tau1, m.tau2};
        return {atz.density(m, times), 0.0};
    }
    // Each block's time is capped by its tree's root time through the E_D
    // chain; the density enforces the rest, we only need outer bounds.
    std::vector<double> ub(static_cast<size_t>(N), std::max(m.tau1, m.tau2));
    {
        std::vector<int> root_of(static_cast<size_t>(N + 1), -1);
        for (const Block& b : alg.F.base.blocks) {
            int pb = Diagram::block_of(b.parent.idx);
            root_of[static_cast<size_t>(b.index)] =
                pb == 0 ? (b.parent.conj ? 1 : 0) : root_of[static_cast<size_t>(pb)];
        }
        for (int k = 1; k <= N; ++k)
            ub[static_cast<size_t>(k - 1)] = root_of[static_cast<size_t>(k)] == 0 ? m.tau1 : m.tau2;
    }
    double lo = m.infinite_T() ? std::min({m.tau1, m.tau2, 0.0}) - 60.0 : -m.T;

    std::vector<double> times(static_cast<size_t>(N + 2));
    times[0] = m.tau1;
    times[1] = m.tau2;
    const bool use_phase = m.theta == ThetaKind::Exponential;

    std::function<std::complex<double>(int)> level = [&](int dim) -> std::complex<double> {
        // Kinks of the integrand in l_dim sit at the other (already fixed)
        // times and at the roots.
        std::vector<double> breaks{m.tau1, m.tau2};
        for (int k = 0; k < dim; ++k) breaks.push_back(times[static_cast<size_t>(k + 2)]);
        auto f = [&](double x) -> std::complex<double> {
            times[static_cast<size_t>(dim + 2)] = x;
            if (dim + 1 == N) {
                double dv = atz.density(m, times);
                if (dv == 0.0) return {0.0, 0.0};
                if (!use_phase) return {dv, 0.0};
                double phase = 0.0;
                for (int k = 1; k <= N; ++k)
                    phase += atz.omega[static_cast<size_t>(k - 1)] * times[static_cast<size_t>(k + 1)];
                return std::polar(dv, phase / m.nu);
            }
            return level(dim + 1);
        };
        auto r = adaptive_gk_pieces<std::complex<double>>(f, lo, ub[static_cast<size_t>(dim)],
                                                          breaks, 1e-13, rel_tol, 1200);
        return r.value;
    };
    return level(0);
}

}  // namespace wtdiag
