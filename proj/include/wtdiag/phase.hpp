#pragma once

#include <span>
#include <vector>

#include "wtdiag/cycle.hpp"

namespace wtdiag {

/// N x N skew-symmetric matrix with entries in {-1, 0, +1}.
struct AlphaMatrix {
    int N = 0;
    std::vector<int> a;  // row-major
    int at(int i, int j) const { return a[static_cast<size_t>(i * N + j)]; }
    int& at(int i, int j) { return a[static_cast<size_t>(i * N + j)]; }
};

/// Affine map z -> xi: xi_j(z) = s + sum_i coeff[j][i] z_i, coeff in {-1,0,1},
/// xi_0 = s (coeff row 0 is zero).
struct XiMap {
    int N = 0;
    std::vector<std::vector<int>> coeff;  // (2N+1) rows of N entries
};

AlphaMatrix alpha_matrix(const FeynmanDiagram& f, const HamiltonCycle& c);
XiMap xi_map(const FeynmanDiagram& f, const HamiltonCycle& c);

/// xi values for concrete z (z laid out as N blocks of d components) given a
/// mode s of dimension d; returns 2N+1 vectors of dimension d.
std::vector<std::vector<double>> xi_values(const XiMap& xi, std::span<const double> s,
                                           std::span<const double> z, int d);

/// omega_j(z) = 2 z_j . sum_i alpha_ji z_i.
std::vector<double> omega_vector(const AlphaMatrix& alpha, std::span<const double> z, int d);

/// Cross-check route: omega_j = |xi_{2j-1}|^2 + |xi_{2j}|^2 - |sigma_{2j-1}|^2
/// - |sigma_{2j}|^2 with sigma = xi o f.
std::vector<double> omega_vector_from_xi(const XiMap& xi, const std::vector<int>& f,
                                         std::span<const double> s, std::span<const double> z,
                                         int d);

/// Omega(l, z) = sum_{ij} alpha_ij (l_i - l_j) z_i . z_j.
double phase_value(const AlphaMatrix& alpha, std::span<const double> l,
                   std::span<const double> z, int d);

/// True diagrams: alpha has no zero rows.
bool is_true_diagram(const AlphaMatrix& alpha);

struct SpectralProfile {
    // Partition / rank data.
    std::vector<std::vector<int>> components;  // irreducible support blocks (1-based indices)
    std::vector<int> block_ranks;              // R_k, exact
    int total_rank = 0;
    bool lemma72_consistent = true;            // R_k == N_k - 1 on every component
    int predicted_exponent = 0;                // min(ceil(N/2), d)
    int blockwise_exponent = 0;                // sum_k min(N_k - 1, d), per (7.3)
    bool chi_log = false;                      // (1.13): (N,d) in {(3,2),(2,1)}
    bool psi_log = false;                      // some N_k - 1 == d
    // Spectral data at a given l.
    std::vector<double> eigenvalues;           // sorted by decreasing |.|
    double K_of_l = 0.0;                       // 1/2 sum q_ij^2
    double identity_residual = 0.0;            // |K + sum_{i<j} lam_i lam_j| (relative)
};

SpectralProfile decompose_and_rank(const AlphaMatrix& alpha, int d);

SpectralProfile spectral_check(const AlphaMatrix& alpha, std::span<const double> l);

/// Relative residual of the traceless-symmetric identity
/// sum a_ij^2 = -2 sum_{i<j} lam_i lam_j for an arbitrary symmetric matrix
/// with zero trace (row-major, size n).
double spectral_identity_residual(std::span<const double> sym, int n);

struct GenericRankInfo {
    int k = 0;            // max exact rank of Q(l) over sampled integer l
    bool f2 = false;      // nonzero entries confined to one row/column pair
    int f2_index = -1;    // the 1-based distinguished index q when f2 holds
};

/// Generic rank by exact integer ranks of Q(l) at 3 seeded random integer l
/// vectors with entries in [-1000, 1000].
GenericRankInfo classify_generic_rank(const AlphaMatrix& alpha, std::uint64_t seed = 1234);

}  // namespace wtdiag
