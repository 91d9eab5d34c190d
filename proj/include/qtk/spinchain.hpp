#pragma once

#include <cstdint>
#include <vector>

#include "qtk/linops.hpp"

namespace qtk {

struct HeisenbergParams {
    int N = 12;
    double energy_unit = 1.0;
    double h_goe = 2.0;
    double h_mbl = 20.0;
    double alpha = 0.0;  // 0 -> h_goe, 1 -> h_mbl

    void validate() const;
    double h() const { return (1.0 - alpha) * h_goe + alpha * h_mbl; }
    HeisenbergParams at(double a) const {
        HeisenbergParams p = *this;
        p.alpha = a;
        return p;
    }
};

struct DisorderRealization {
    std::vector<double> fields;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;

    static DisorderRealization sample(int N, std::uint64_t seed, std::uint64_t stream);
};

struct IsingParams {
    int N = 10;
    double J = 1.0;
    double h = 0.5;
    double g = 1.05;
};

struct GapStatistics {
    std::vector<double> gaps;
    double mean_gap = 0.0;
    double window_lo = 0.0, window_hi = 0.0;
    double ks_poisson = 0.0, ks_goe = 0.0;

    bool poisson_like() const { return ks_poisson < ks_goe; }
};

double rescale_factor(int N, double h);
double rescale_factor(const HeisenbergParams& p);

// Computational states with N/2 bits set, ascending. Site j is bit N-1-j, bit 0 = spin up.
std::vector<std::uint32_t> half_filling_basis(int N);

RMat heisenberg_sector_matrix(const HeisenbergParams& p, const DisorderRealization& r);
HermitianOperator build_heisenberg(const HeisenbergParams& p, const DisorderRealization& r);
// Same Hamiltonian on the full 2^N space, from embedded Pauli products.
CMat heisenberg_full(const HeisenbergParams& p, const DisorderRealization& r);

RMat ising_matrix(const IsingParams& p);
HermitianOperator build_ising(const IsingParams& p);

double dos_gaussian(double E, int N, double energy_unit, double dim);
// 2 sqrt(pi N) E / dim, the DOS-weighted mean gap of dos_gaussian.
double mean_gap_gaussian(int N, double energy_unit, double dim);
// Mean gap of a Gaussian DOS whose variance is energy_unit^2, as for the rescaled chain.
double mean_gap_rescaled(double energy_unit, double dim);

double ks_distance(std::vector<double> samples, double (*cdf)(double));
double cdf_poisson(double s);
double cdf_goe(double s);

GapStatistics gap_statistics(const RVec& eigenvalues, double window_fraction = 2.0 / 3.0);
GapStatistics gap_statistics(const SpectralDecomposition& s, double window_fraction = 2.0 / 3.0);

struct RepulsionEstimate {
    double delta_minus = 0.0;
    double mean_gap = 0.0;
    std::vector<double> bin_edges;
    std::vector<double> density;
};

// Mode of the gap density on 64 log-spaced bins over [min gap, mean gap].
// Bins with fewer than 100 gaps are skipped when any bin reaches 100.
RepulsionEstimate level_repulsion_scale(const std::vector<double>& gaps, int bins = 64);

}  // namespace qtk
