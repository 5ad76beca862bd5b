#pragma once

#include <complex>
#include <vector>

#include "wtdiag/density.hpp"
#include "wtdiag/evaluate.hpp"
#include "wtdiag/rng.hpp"

namespace wtdiag {

/// Truncated-lattice simulation of the Duhamel hierarchy: a^(0) is sampled
/// exactly as an Ornstein-Uhlenbeck process on a uniform grid and higher
/// orders come from the recursion with the oscillatory factor integrated
/// exactly against a piecewise-linear interpolant of the chaos products.
struct OracleConfig {
    DensityModel model;     // uses d, nu, L, T, tau1/tau2, gamma0, b
    double cutoff = 2.0;    // keep modes with |s| <= cutoff
    int grid_nodes = 64;    // uniform nodes on [-T, tau_max]
    double tau_max = 0.0;
    int max_order = 2;

    void validate() const;
};

struct OracleLattice {
    int d = 1;
    double L = 1.0;
    std::vector<std::vector<std::int64_t>> mode_num;  // L * s per mode
    std::vector<double> gamma, bval;

    struct Triple {
        int i1, i2, i3;
        int bucket;  // index into omega_keys of the target mode
    };
    std::vector<std::vector<Triple>> triples;            // per target mode
    std::vector<std::vector<double>> omega_values;       // per target mode
    int mode_index(std::span<const std::int64_t> k) const;

    static OracleLattice build(const OracleConfig& cfg);
};

struct OraclePath {
    double t0 = 0.0, h = 0.0;
    int nodes = 0;
    int max_order = 0;
    // a[order][mode * nodes + node]
    std::vector<std::vector<std::complex<double>>> a;

    std::complex<double> at(int order, int mode, int node) const {
        return a[static_cast<size_t>(order)][static_cast<size_t>(mode) * nodes + node];
    }
    int node_of(double tau) const;
};

/// Exact OU sampling of a^(0) on the grid (no discretisation bias).
OraclePath sample_a0(const OracleConfig& cfg, const OracleLattice& lat, std::uint64_t seed);

/// Fill orders 1..max_order by the Duhamel recursion.
void duhamel_fill(OraclePath& path, const OracleConfig& cfg, const OracleLattice& lat);

/// Order-1 value at one (mode, node) by the direct triple sum without the
/// omega-bucket grouping; equals the grouped computation to rounding.
std::complex<double> duhamel_order1_direct(const OraclePath& path, const OracleConfig& cfg,
                                           const OracleLattice& lat, int mode, int node);

/// Restriction of a path to every `factor`-th node (orders above 0 dropped;
/// the restricted a^(0) is again an exact OU path).
OraclePath restrict_path(const OraclePath& path, int factor);

struct OracleEstimate {
    std::complex<double> value{};
    double stderr_re = 0.0, stderr_im = 0.0;
    std::uint64_t replicates = 0;
    std::uint64_t seed = 0;
    int grid_nodes = 0;
    double cutoff = 0.0;
};

/// Monte-Carlo estimate of E a^(m)(tau1) conj(a^(n)(tau2)) at mode s.
OracleEstimate mc_correlation(int m, int n, const OracleConfig& cfg, std::span<const double> s,
                              std::uint64_t replicates, std::uint64_t seed, int jobs = 1);

/// E a^(m)(tau1) a^(n)(tau2) (non-conjugated pair), which must vanish.
OracleEstimate mc_nonconjugated(int m, int n, const OracleConfig& cfg, std::span<const double> s,
                                std::uint64_t replicates, std::uint64_t seed);

}  // namespace wtdiag
