#pragma once

#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "qtk/linops.hpp"

namespace qtk {

// H = Q_0 followed by the charges Q_1..Q_c, all on one copy's space.
struct ChargeSet {
    std::vector<CMat> charges;

    Eigen::Index dim() const { return charges.empty() ? 0 : charges.front().rows(); }
    std::size_t size() const { return charges.size(); }
    // Hermitian, equal dimensions, linearly independent.
    void validate() const;

    static ChargeSet spin_half();  // {sigma^x, sigma^y, sigma^z}
};

// gamma = exp(-sum_j mu_j Q_j) / Z. `work` is the exponent sum_j mu_j Q_j.
struct Nats {
    DensityMatrix gamma;
    double Z = 1.0;
    double log_Z = 0.0;
    std::vector<double> mu, v;
    CMat work;
};

Nats build_nats(const ChargeSet& q, const std::vector<double>& mu);

struct PotentialSolveError : std::runtime_error {
    PotentialSolveError(const std::string& what, double residual) : std::runtime_error(what), residual(residual) {}
    double residual;
};

// Newton iteration with Kubo-Mori covariance Jacobian and backtracking. Throws
// PotentialSolveError when the residual stalls above 1e-9.
std::vector<double> solve_potentials(const ChargeSet& q, const std::vector<double>& v);

double spectral_diameter(const CMat& Q);
// (1/N) sum_l 1 x ... x Q x ... x 1 on d^N <= 4096.
CMat averaged_charge(const CMat& Q, int N);

struct BandProjector {
    CMat P;
    Eigen::Index rank = 0;
    bool empty = false;
};

// Projector onto the eigenspaces of Qbar with eigenvalues in [v - w, v + w].
BandProjector band_projector(const CMat& Qbar, double v, double half_width);

// Span of eigenvectors of sum_j ((Qbar_j - v_j) / Sigma(Q_j))^2 with eigenvalue <= c_tot eta^2,
// c_tot the number of operators in the charge set.
struct AmcSubspace {
    CMat basis;          // d^N x dim M, orthonormal columns
    RVec deviations;     // full spectrum of the deviation operator
    std::vector<CMat> qbar;
    std::vector<double> v;
    int N = 1;
    double eta = 0.0;
    Eigen::Index d = 0;  // single-copy dimension

    Eigen::Index size() const { return basis.cols(); }
    CMat projector() const { return basis * basis.adjoint(); }
};

AmcSubspace amc_subspace(const ChargeSet& q, const std::vector<double>& v, int N, double eta);

struct AmcParams {
    double eps = 0.5, eta = 0.35, eta_p = 0.2, delta = 0.2, delta_p = 0.1;
    void validate(std::size_t charge_count) const;
};

struct AmcReport {
    double cond1_worst = 1.0;   // min over samples and j of Tr(omega Pi^eta_j), omega in M
    double cond1_margin = 0.0;  // cond1_worst - (1 - delta)
    std::size_t cond2_states = 0;
    double cond2_worst = 1.0;   // min of Tr(omega P) over states meeting the peaking hypothesis
    double cond2_margin = 0.0;  // cond2_worst - (1 - eps)
    bool cond2_vacuous = false;
    bool cond1_holds = true, cond2_holds = true;
};

struct Condition2 {
    bool hypothesis = false;  // Tr(omega Pi^{eta'}_j) >= 1 - delta' for every j
    double overlap = 0.0;     // Tr(omega P)
    bool holds = true;        // vacuous when the hypothesis fails
};

Condition2 amc_condition2(const AmcSubspace& M, const ChargeSet& q, const CMat& omega, const AmcParams& p);
AmcReport amc_conditions_check(const AmcSubspace& M, const ChargeSet& q, const AmcParams& p, std::size_t samples,
                               SeededRng& rng);

struct MicrocanonicalReduction {
    std::vector<double> D;                // D(Omega_l || gamma) per copy
    std::vector<double> trace_distance;   // ||Omega_l - gamma||_1 per copy
    double mean_D = 0.0;
    double max_trace_distance = 0.0;
    double pinsker_margin = 0.0;          // min over copies of D - ||.||_1^2 / 2
};

MicrocanonicalReduction microcanonical_reduction(const AmcSubspace& M, const DensityMatrix& gamma);

struct TypicalityResult {
    double mean = 0.0, se = 0.0;  // per-copy average trace distance to gamma over Haar draws in M
    double bound = 0.0;           // d / sqrt(dim M) + sqrt(2 mean_D)
};

TypicalityResult typicality_probe(const AmcSubspace& M, const DensityMatrix& gamma, double mean_D, std::size_t shots,
                                  SeededRng& rng);

double relative_entropy(const CMat& rho, const CMat& sigma);

// Classical Renyi divergence; D_1 is the KL limit and D_0 = -log sum_{p>0} q.
// Returns +inf when p is not absolutely continuous with respect to q and alpha >= 1.
double renyi_divergence(const std::vector<double>& p, const std::vector<double>& q, double alpha);
double petz_renyi(const CMat& rho, const CMat& sigma, double alpha);
double sandwiched_renyi(const CMat& rho, const CMat& sigma, double alpha);

// Block probabilities of rho and gamma in the eigenbasis of the work function, with
// eigenvalues closer than 1e-9 grouped.
std::pair<std::vector<double>, std::vector<double>> work_basis_distributions(const CMat& rho, const Nats& g);

// F_alpha = T D_alpha - T log Z with the classical D_alpha in the work-function basis.
double free_energy(const CMat& rho, const Nats& g, double alpha, double T = 1.0);
double free_energy_petz(const CMat& rho, const Nats& g, double alpha, double T = 1.0);
double free_energy_sandwiched(const CMat& rho, const Nats& g, double alpha, double T = 1.0);

struct PassivityWitness {
    CVec a, b;               // two orthonormal levels
    CMat rotation;           // 2x2 unitary on span{a, b}
    double energy_drop = 0.0;
};

struct PassivityResult {
    bool passive = true;
    double commutator = 0.0;
    std::optional<PassivityWitness> witness;
};

// rho^{(x)n} against W_tot = sum of n copies of W.
PassivityResult passivity_check(const CMat& rho, const CMat& W, int n);

// Lambda(rho) = Tr_R[U (rho x gamma_R) U^dag] with U in the commutant of every total charge.
struct NatoChannel {
    CMat U;
    CMat gamma_R;
    Eigen::Index dS = 0, dR = 0;
    bool trivial = false;

    CMat apply(const CMat& rho) const;
};

class NatoSampler {
public:
    // Charges of system and reservoir in matching order, and the common potentials.
    NatoSampler(const ChargeSet& system, const ChargeSet& reservoir, const std::vector<double>& mu);

    NatoChannel sample(SeededRng& rng) const;
    std::size_t commutant_dimension() const { return basis_.size(); }
    bool uses_pinching() const { return pinching_; }
    const Nats& system_nats() const { return sys_; }

private:
    CMat project(const CMat& G) const;

    Nats sys_, res_;
    Eigen::Index dS_, dR_;
    std::vector<CMat> totals_;
    std::vector<CMat> basis_;                   // orthonormal commutant basis (small joint dimension)
    std::vector<SpectralDecomposition> spec_;   // eigenbases for alternating pinching
    bool pinching_ = false;
};

NatoChannel sample_nato_channel(const ChargeSet& system, const ChargeSet& reservoir, const std::vector<double>& mu,
                                SeededRng& rng);

struct AuditReport {
    double worst_violation = -std::numeric_limits<double>::infinity();  // classical F_alpha
    double worst_petz = -std::numeric_limits<double>::infinity();       // alpha in [0, 2]
    double worst_sandwiched = -std::numeric_limits<double>::infinity(); // alpha >= 1/2
    double worst_fixed_point = 0.0;  // ||Lambda(gamma_S) - gamma_S||_1
    double worst_trace_error = 0.0;  // |Tr Lambda(rho) - 1|
};

AuditReport second_law_audit(const CMat& rho, const Nats& gamma_S, const std::vector<NatoChannel>& channels,
                             const std::vector<double>& alphas);

}  // namespace qtk
