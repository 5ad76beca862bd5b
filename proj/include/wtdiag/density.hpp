#pragma once

#include <complex>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "wtdiag/phase.hpp"
#include "wtdiag/rational.hpp"

namespace wtdiag {

/// Dissipation profile gamma^0(y) = c0 + c1 y + c2 y^2 with c0 >= 1,
/// c1, c2 >= 0, kept alongside exact rational coefficients.
struct Gamma0 {
    double c0 = 1.0, c1 = 1.0, c2 = 0.0;
    Rational r0{1}, r1{1}, r2{0};
    double operator()(double y) const { return c0 + y * (c1 + y * c2); }
    Rational exact_at(const Rational& y) const { return r0 + y * (r1 + y * r2); }
};

/// Forcing profile b(s) = amp * exp(-width |s|^2).
struct BProfile {
    double amp = 1.0, width = 1.0;
    double at_sq(double s2) const { return amp * std::exp(-width * s2); }
};

enum class ThetaKind { Exponential, ResonanceIndicator };

struct DensityModel {
    int d = 1;
    double nu = 0.5;
    double L = 1.0;
    double T = std::numeric_limits<double>::infinity();
    double tau1 = 0.0, tau2 = 0.0;
    Gamma0 gamma0;
    BProfile b;
    ThetaKind theta = ThetaKind::Exponential;

    double gamma_sq(double s2) const { return gamma0(s2); }
    double B_sq(double s2) const {
        double bv = b.at_sq(s2);
        return bv * bv / gamma0(s2);
    }
    double norm_sq(std::span<const double> s) const {
        double t = 0;
        for (double v : s) t += v * v;
        return t;
    }
    bool infinite_T() const { return std::isinf(T); }
    /// Throws std::invalid_argument when a field is out of its stated range.
    void validate() const;
};

/// Everything derived from one Feynman diagram that evaluation needs:
/// canonical (or overridden) cycle, alpha, xi, edge tables, the block-pair
/// coupling table gamma^F_{ij} and the admissible time orderings.
struct DiagramAlgebra {
    FeynmanDiagram F;
    HamiltonCycle C;
    AlphaMatrix alpha;
    XiMap xi;
    std::complex<double> c_F;
    bool true_diagram = false;

    struct Edge {
        int xi_row;   // xi index of the non-conjugated endpoint
        int slot_a;   // time slot of the non-conjugated endpoint
        int slot_b;   // time slot of the conjugated endpoint
        int block_a;  // block of the non-conjugated endpoint (0 = roots)
        int block_b;
    };
    std::vector<Edge> ed;  // E_D; slot_a/slot_b keep (r, w) orientation below
    std::vector<Edge> el;  // E_L
    // For E_D edges: index of the (real, virtual) time slots.
    std::vector<int> ed_slot_r, ed_slot_w;

    // gamma^F_{ij}: xi rows of the edges coupling block i with block j,
    // indexed by pair_id(i, j) over 0 <= i < j <= N.
    std::vector<std::vector<int>> gamma_pairs;
    int pair_id(int i, int j) const {
        if (i > j) std::swap(i, j);
        return i * (order_N() + 1) - i * (i + 1) / 2 + (j - i - 1);
    }

    std::vector<std::vector<int>> admissible;  // S^N_F, each q holds block ids, descending times

    /// Admissible orderings compiled for the kernel hot path: per factor
    /// k = 1..N the flattened list of gamma pair ids crossing the cut.
    struct CompiledOrder {
        std::vector<int> q;
        std::vector<int> cut_offsets;   // size N+1
        std::vector<int> cut_pair_ids;  // flattened
    };
    std::vector<CompiledOrder> orders;

    int order_N() const { return F.order_N(); }

    static DiagramAlgebra build(FeynmanDiagram f);
    static DiagramAlgebra build(FeynmanDiagram f, HamiltonCycle cycle);
};

/// Per-z precomputation: gamma and B of every edge, omega vector, and the
/// pair-coupling values.
struct DensityAtZ {
    const DiagramAlgebra* alg = nullptr;
    std::vector<double> xi_sq;        // |xi_row|^2 for every row
    std::vector<double> gamma_ed, gamma_el, B_el;
    std::vector<double> omega;        // per block, 1-based block b -> omega[b-1]
    std::vector<double> pair_gamma;   // per pair_id
    double B_product = 1.0;
    double gamma_s = 1.0;

    DensityAtZ() = default;
    DensityAtZ(const DiagramAlgebra& a, const DensityModel& m, std::span<const double> s,
               std::span<const double> z);

    /// Recompute in place (no allocation after the first call with the same
    /// diagram).
    void reset(const DiagramAlgebra& a, const DensityModel& m, std::span<const double> s,
               std::span<const double> z);

    /// F^F of (4.7) at times t = (tau1, tau2, l_1..l_N); zero outside the
    /// indicator region, includes the B/gamma leaf factors.
    double density(const DensityModel& m, std::span<const double> times) const;

    /// Integrand of the time integral with T = infinity and leaf B-factors
    /// stripped: product of E_D/E_L exponentials times the oscillatory phase.
    std::complex<double> kernel_integrand(const DensityModel& m,
                                          std::span<const double> times) const;
};

/// All permutations q of {1..N} (descending times) compatible with every E_D
/// constraint under tau1 = tau2.
std::vector<std::vector<int>> admissible_orders(const FeynmanDiagram& f);

/// Closed-form time kernel I_s^q (Lemma 8.4); requires tau1 == tau2 and
/// T = infinity. Returns 0 for inadmissible q.
std::complex<double> time_kernel(const DiagramAlgebra& alg, const DensityModel& m,
                                 const DensityAtZ& atz, std::span<const int> q);

/// Sum of time kernels over the admissible orderings.
std::complex<double> kernel_sum(const DiagramAlgebra& alg, const DensityModel& m,
                                const DensityAtZ& atz);

/// Symbolic pieces of one kernel factor: for k = 1..N the omega index set
/// {q(j) : j >= k} and the multiset of xi rows entering the Gamma sum.
struct KernelFactorTable {
    std::vector<std::vector<int>> omega_blocks;  // per k (1-based factor index)
    std::vector<std::vector<int>> gamma_rows;
};
KernelFactorTable kernel_tables(const DiagramAlgebra& alg, std::span<const int> q);

/// F^F(tau, l, xi(z)) of (4.7) composed with the z-coordinates (5.12).
double density_value(const DiagramAlgebra& alg, const DensityModel& m,
                     std::span<const double> s, std::span<const double> l,
                     std::span<const double> z);

/// Exact rational check that every Gamma combination of the kernel for
/// ordering q is >= 1 (Lemma 8.4 separation); needs lattice z (z = k/L) and
/// lattice s.
bool kernel_gammas_separated(const DiagramAlgebra& alg, const DensityModel& m,
                             std::span<const std::int64_t> s_num,
                             std::span<const std::int64_t> z_num, std::int64_t den,
                             std::span<const int> q);

/// Independent time-integration oracle for I_s^q: adaptive Gauss-Kronrod on
/// the simplex L_q in the difference coordinates, driving the black-box
/// integrand (indicator-aware density times phase). Returns the integral and
/// a conservative error estimate.
struct SimplexQuadResult {
    std::complex<double> value{};
    double abserr = 0.0;
    bool separable_ok = true;
};
SimplexQuadResult simplex_time_quadrature(const DiagramAlgebra& alg, const DensityModel& m,
                                          const DensityAtZ& atz, std::span<const int> q,
                                          double rel_tol = 1e-9, std::uint64_t probe_seed = 7);

/// Fully nested adaptive quadrature of the same integrand over the simplex
/// (no separability assumption); cost grows exponentially with N, intended
/// for N <= 3 cross-checks.
std::complex<double> simplex_time_quadrature_nested(const DiagramAlgebra& alg,
                                                    const DensityModel& m,
                                                    const DensityAtZ& atz,
                                                    std::span<const int> q, double rel_tol = 1e-8);

/// Time integral of density * phase over all of R^N for finite T and general
/// tau1, tau2: recursive piecewise-adaptive quadrature with kink breakpoints.
/// Intended for small N (used on the lattice route).
std::complex<double> time_integral_full(const DiagramAlgebra& alg, const DensityModel& m,
                                        const DensityAtZ& atz, double rel_tol = 1e-8);

}  // namespace wtdiag
