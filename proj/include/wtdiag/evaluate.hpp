#pragma once

#include <functional>
#include <string>

#include "wtdiag/density.hpp"

namespace wtdiag {

struct IntegralEstimate {
    std::complex<double> value{};
    double stderr_re = 0.0, stderr_im = 0.0;
    std::uint64_t samples = 0;
    std::uint64_t seed = 0;
    std::string method;
    double truncation_bound = 0.0;

    double stderr_max() const { return std::max(stderr_re, stderr_im); }
};

struct McOptions {
    std::uint64_t samples = 1'000'000;
    std::uint64_t seed = 1;
    int jobs = 1;
    std::uint64_t chunk = 1 << 16;
};

struct LatticeOptions {
    // Cutoff policy: either mirror a mode box (every xi within |xi| <= box),
    // or certify a tail bound below tail_eps * |retained sum|.
    double mode_box = 0.0;  // > 0 selects the box policy
    double tail_eps = 1e-8;
    double z_radius = 0.0;  // 0 = choose automatically
    double time_rel_tol = 1e-8;
};

/// Compile every Feynman diagram of F_{m,n} (canonical cycles); optionally
/// only the true ones.
std::vector<DiagramAlgebra> compile_diagrams(int m, int n, bool true_only);

/// Lattice sum J_s(F) of (5.18) with exact exclusion of the constraint
/// hyperplanes; time integration by quadrature (finite T allowed) or by the
/// closed-form kernels when tau1 == tau2 and T is infinite.
IntegralEstimate lattice_J(const DiagramAlgebra& alg, const DensityModel& m,
                           std::span<const double> s, const LatticeOptions& opts = {});

/// Continuum integral Jtilde_s(F) via the kernel route (Monte Carlo over z
/// with a Gaussian proposal matched to the leaf weights); falls back to joint
/// (l, z) Monte Carlo when tau1 != tau2 or T is finite.
IntegralEstimate continuum_J(const DiagramAlgebra& alg, const DensityModel& m,
                             std::span<const double> s, const McOptions& opts = {});

/// Weighted sum over several diagrams with common random numbers (one shared
/// proposal), so stochastic error tracks the summed integrand including its
/// cancellations. Weights default to c_F.
IntegralEstimate continuum_J_sum(std::span<const DiagramAlgebra> algs,
                                 std::span<const std::complex<double>> weights,
                                 const DensityModel& m, std::span<const double> s,
                                 const McOptions& opts = {});

/// E a^(m) abar^(n): c_F-weighted sum over the true diagrams (exact 0 for
/// m + n == 1).
IntegralEstimate correlation(int m, int n, const DensityModel& model, std::span<const double> s,
                             const std::string& mode, const McOptions& mc = {},
                             const LatticeOptions& lat = {});

/// n_s^k = sum_{k1+k2=k} correlation(k1, k2) at tau1 == tau2.
IntegralEstimate spectrum_order(int k, const DensityModel& model, std::span<const double> s,
                                const std::string& mode, const McOptions& mc = {},
                                const LatticeOptions& lat = {});

/// Generic quotient integral (8.14). Gamma functions must be bounded below
/// by a positive constant; matrices must be traceless.
struct QuotientForm {
    int M = 2;                                   // number of z blocks
    std::vector<std::vector<std::int64_t>> A;    // K matrices, row-major M x M
    std::vector<std::function<double(std::span<const double>)>> Gammas;  // empty -> all 1
    std::function<double(std::span<const double>)> G;                    // empty -> exp(-|z|^2)
};
struct QuotientResult {
    IntegralEstimate estimate;
    int rank_r = 0;          // exact rank of span{A_k}
    double pointwise_bound = 0.0;  // MC estimate of int G / prod Gamma
};
QuotientResult quotient_integral(const QuotientForm& form, int d, double nu,
                                 const McOptions& opts = {});

/// Weighted log-log power-law fit |J| ~ a nu^p (ln 1/nu)^q, q in {0, 1}
/// selected by penalized residual.
struct PowerLawFit {
    double p = 0.0;
    double p_stderr = 0.0;
    double log_a = 0.0;
    int q = 0;
    double ssr = 0.0;   // weighted sum of squared residuals of the chosen model
    double ssr_alt = 0.0;
    int dof = 0;
    bool stable = true;
};
PowerLawFit fit_power_law(std::span<const double> nus, std::span<const double> values,
                          std::span<const double> stderrs);

struct SweepPoint {
    double nu = 0.0;
    IntegralEstimate estimate;
};
struct SweepResult {
    std::vector<SweepPoint> points;
    PowerLawFit fit;
    int predicted_exponent = 0;
    bool predicted_log = false;
};

/// nu-scaling sweep of an arbitrary estimator; grid must be strictly
/// decreasing with at least 5 points.
SweepResult scaling_sweep(
    const std::function<IntegralEstimate(const DensityModel&, std::uint64_t)>& target,
    const DensityModel& base, std::span<const double> grid, int predicted_exponent,
    bool predicted_log, std::uint64_t seed);

}  // namespace wtdiag
