#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "qtk/linops.hpp"
#include "qtk/spinchain.hpp"

namespace qtk {

inline constexpr double kInfBeta = std::numeric_limits<double>::infinity();

struct CycleConfig {
    double Wb = 0.0;
    double beta_c = kInfBeta;
    double beta_h = 0.0;
    double v = 0.0;               // tuning speed, energy^2; 0 means adiabatic
    double dt_times_gap = 0.405;  // step length in units of 1/<delta>
    std::size_t max_steps = 1u << 22;

    void validate() const;
};

struct CycleRecord {
    double W1 = 0, W3 = 0, Q2 = 0, Q4 = 0, Wtot = 0;
    double E0 = 0, Etau = 0, Etau1 = 0, Etau2 = 0;  // E(0), E(tau), E(tau'), E(tau'')
};

// Builds a record from the four stroke-boundary energies.
CycleRecord make_record(double E0, double Etau, double Etau1, double Etau2);

struct QubitToyParams {
    double delta_goe = 1.0;
    double delta_mbl = 0.2;
};

// Gibbs weights over ascending energies. beta may be 0 or +inf (ground space).
RVec gibbs_weights(const RVec& energies, double beta);

DensityMatrix initial_state(const HermitianOperator& H_goe, double beta_h);
DensityMatrix adiabatic_stroke(const DensityMatrix& rho, const SpectralDecomposition& start,
                               const SpectralDecomposition& end);

// Maximal runs [first, last] of consecutive ascending levels whose gaps are all < Wb.
std::vector<std::pair<int, int>> gap_chains(const RVec& energies, double Wb);
RVec cold_redistribute(const RVec& populations, const RVec& energies, double Wb, double beta_c);

struct BathResult {
    DensityMatrix rho;
    double heat = 0.0;
};

BathResult cold_thermalize(const DensityMatrix& rho, const SpectralDecomposition& mbl, double Wb, double beta_c);
BathResult hot_thermalize(const DensityMatrix& rho, const HermitianOperator& H_goe, double beta_h);

// Adiabatic cycle on level occupations. `hot_side` is the Hamiltonian at the start
// of stroke 1 (thermalized by the hot bath), `cold_side` the one at its end.
CycleRecord run_cycle_levels(const RVec& hot_side, const RVec& cold_side, const CycleConfig& cfg);

// Adiabatic cycle carried out on explicit density matrices in the sigma^z basis.
CycleRecord run_cycle_dense(const HermitianOperator& H_goe, const HermitianOperator& H_mbl, const CycleConfig& cfg);

struct DiabaticStroke {
    DensityMatrix rho;
    std::size_t steps = 0;
    double unitarity_error = 0.0;
};

// Stepwise tuning alpha_from -> alpha_to at speed v with step dt: K = floor(tau/dt)
// full steps at alpha_k = alpha_from + k v dt / E (direction-signed) and a final
// partial step, tau = |alpha_to - alpha_from| E / v.
DiabaticStroke diabatic_stroke(const DensityMatrix& rho, const HeisenbergParams& params,
                               const DisorderRealization& r, double alpha_from, double alpha_to, double v, double dt,
                               std::size_t max_steps);

CycleRecord run_cycle(const DisorderRealization& r, const HeisenbergParams& params, const CycleConfig& cfg);

// Diabatic cycles for speeds v_K = E/(K dt) with every K dividing K_max, sharing
// one set of step diagonalizations. Returns one record per entry of `steps`.
std::vector<CycleRecord> diabatic_cycles_nested(const DisorderRealization& r, const HeisenbergParams& params,
                                                const CycleConfig& cfg, const std::vector<int>& steps, double dt);

double speed_for_steps(int K, double energy_unit, double dt);

std::pair<double, double> qubit_toy(const QubitToyParams& p);
// The same closed form obtained by running the generic cycle on two-level spectra.
CycleRecord qubit_toy_cycle(const QubitToyParams& p);

struct Moment {
    double mean = 0.0;
    double se = 0.0;
};

struct EnsembleStats {
    std::size_t count = 0;
    Moment W1, W3, Q2, Q4, Wtot;
    std::optional<double> eta;
    double se_eta = 0.0;
};

EnsembleStats summarize(const std::vector<CycleRecord>& records);

struct SweepPoint {
    double wb_over_gap = 0.0;
    double Wb = 0.0;
    EnsembleStats stats;
};

struct SweepResult {
    double mean_gap = 0.0;  // <delta> used to scale Wb
    std::vector<SweepPoint> points;
};

// Adiabatic ensemble over disorder realizations (stream index = realization index).
SweepResult ensemble_sweep(const HeisenbergParams& params, const std::vector<double>& wb_over_gap, double beta_c,
                           double beta_h, std::size_t count, std::uint64_t seed, int threads);

struct WorstCase {
    double rate = 0.0;
    double se = 0.0;
    std::size_t negatives = 0;
};

WorstCase worst_case_rate(const std::vector<CycleRecord>& records);

}  // namespace qtk
