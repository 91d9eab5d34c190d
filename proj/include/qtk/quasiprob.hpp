#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "qtk/linops.hpp"
#include "qtk/spinchain.hpp"

namespace qtk {

// H on the full 2^N space, W and V Hermitian, and the state rho. The spectral
// decomposition of H is computed once; U(t) = exp(-iHt), W(t) = U^dag W U.
class OtocSetting {
public:
    OtocSetting(HermitianOperator H, CMat W, CMat V, DensityMatrix rho);

    // Transverse/longitudinal Ising chain with W = sigma^z on the first site and
    // V = sigma^z on the last. rho defaults to 1/d.
    static OtocSetting ising(const IsingParams& p);
    static OtocSetting ising(const IsingParams& p, DensityMatrix rho);

    const HermitianOperator& H() const { return H_; }
    const CMat& W() const { return W_; }
    const CMat& V() const { return V_; }
    const DensityMatrix& rho() const { return rho_; }
    const SpectralDecomposition& spectrum() const { return spec_; }
    Eigen::Index dim() const { return W_.rows(); }

    CMat U(double t) const;
    CMat W_t(double t) const;

    // True when W^2 = V^2 = 1 within 1e-12, enabling projectors (1 +- O)/2.
    bool involutory() const { return involutory_; }
    bool diagonal_fast_path() const { return v_diag_ && rho_diag_; }

    std::vector<double> times;

private:
    HermitianOperator H_;
    CMat W_, V_;
    DensityMatrix rho_;
    SpectralDecomposition spec_;
    bool real_basis_ = false;
    RMat vr_;    // real eigenvectors when real_basis_
    CMat Wtil_;  // W in the eigenbasis of H
    bool involutory_ = false;
    bool v_diag_ = false, rho_diag_ = false;
};

// Sixteen coarse-grained values keyed by "abcd" = 8a + 4b + 2c + d, where the
// bits give the signs (-1)^bit of (w3, v2, w2, v1).
struct CoarseTable {
    std::array<cplx, 16> values{};

    static int index(int v1, int w2, int v2, int w3);
    static std::array<int, 4> signs(int index);  // {v1, w2, v2, w3}
    cplx& at(int v1, int w2, int v2, int w3) { return values[index(v1, w2, v2, w3)]; }
    cplx at(int v1, int w2, int v2, int w3) const { return values[index(v1, w2, v2, w3)]; }
    cplx sum() const;
};

cplx otoc(const OtocSetting& s, double t);
CoarseTable coarse_quasiprob(const OtocSetting& s, double t);
cplx reconstruct_otoc(const CoarseTable& table);
// The same table from the expectation values of the reduced words in W(t), V.
CoarseTable sixteen_term_expansion(const OtocSetting& s, double t);

// Orthonormal eigenbases of W and V with eigenvalue labels; the position within
// an eigenspace is the degeneracy label.
struct FineBases {
    CMat w_vectors, v_vectors;
    std::vector<double> w_values, v_values;

    void validate() const;
    // Computational product states; W and V must be diagonal.
    static FineBases computational(const CMat& W, const CMat& V);
};

// Values indexed (i, j, k, l) = ((v1,lambda), (w2,alpha), (v2,lambda), (w3,alpha)).
struct FineTable {
    Eigen::Index d = 0;
    std::vector<cplx> values;
    std::vector<double> w_values, v_values;

    cplx at(Eigen::Index i, Eigen::Index j, Eigen::Index k, Eigen::Index l) const;
    CoarseTable coarse() const;
    // Marginal over everything but (w3, alpha): a probability vector.
    std::vector<cplx> w3_marginal() const;
};

FineTable fine_quasiprob(const OtocSetting& s, double t, const FineBases& b);

// A(j; w1,a; v1,l; w2,a) = <w2|U|v1><v1|U^dag|w1><w1|U|j> sqrt(p_j), j over the eigenbasis of rho.
struct AmplitudeSet {
    Eigen::Index d = 0;
    std::vector<cplx> values;  // index ((j*d + w1)*d + v1)*d + w2
    cplx at(Eigen::Index j, Eigen::Index w1, Eigen::Index v1, Eigen::Index w2) const;
};

AmplitudeSet amplitudes(const OtocSetting& s, double t, const FineBases& b);
cplx amplitude(const OtocSetting& s, double t, const FineBases& b, Eigen::Index j, Eigen::Index w1, Eigen::Index v1,
               Eigen::Index w2);
FineTable quasiprob_from_amplitudes(const OtocSetting& s, double t, const FineBases& b);

// P(W, W') with W = w3 v2 and W' = w2 v1.
struct WorkDistribution {
    std::array<cplx, 4> values{};  // index 2*(W<0) + (W'<0)

    cplx& at(int W, int Wp) { return values[2 * (W < 0) + (Wp < 0)]; }
    cplx at(int W, int Wp) const { return values[2 * (W < 0) + (Wp < 0)]; }
    cplx sum() const;
};

WorkDistribution work_distribution(const CoarseTable& table);

struct JarzynskiMoment {
    cplx exact;              // sum W W' P(W, W')
    cplx finite_difference;  // central mixed second difference of <exp(-(b W + b' W'))>
};

JarzynskiMoment jarzynski_moment(const WorkDistribution& dist, double step = 1e-4);

// Time-ordered counterpart over (v1, w1, v2), index 4*(v1<0) + 2*(w1<0) + (v2<0).
struct TocTable {
    std::array<cplx, 8> values{};
    cplx at(int v1, int w1, int v2) const { return values[4 * (v1 < 0) + 2 * (w1 < 0) + (v2 < 0)]; }
    cplx sum() const;
};

TocTable toc_quasiprob(const OtocSetting& s, double t);
cplx toc_moment(const TocTable& table);
// <V^dag W(t)^dag W(t) V> from the trace.
cplx toc_correlator(const OtocSetting& s, double t);

// k-fold OTOC Tr(rho (W(t) V)^k) for k in {2, 3}.
cplx kfold_otoc(const OtocSetting& s, double t, int k);

// Values of Tr(P_{w_{k+1}} Pi_{v_k} ... P_{w_2} Pi_{v_1} rho); index bit 2l holds
// the sign of v_{l+1} and bit 2l+1 that of w_{l+2}.
struct KFoldTable {
    int k = 2;
    std::vector<cplx> values;
    cplx sum() const;
};

KFoldTable kfold_quasiprob(const OtocSetting& s, double t, int k);
cplx kfold_moment(const KFoldTable& table);

DensityMatrix thermal_state(const HermitianOperator& H, double T);

// Regulated table Tr(Pi^W_{w3} X_{v2} Pi^W_{w2} X_{v1}), X_v = U rho^{1/4} Pi_v rho^{1/4} U^dag.
// rho must be the thermal state of H at temperature T.
CoarseTable regulated_quasiprob(const OtocSetting& s, double T, double t);
cplx regulated_otoc(const OtocSetting& s, double T, double t);

// Weak-measurement detectors: outcomes x with probabilities p(x) and couplings g(x),
// Kraus operators M_x = sqrt(p(x)) 1 + g(x) Pi.
struct Detector {
    std::vector<double> x, p;
    std::vector<cplx> g;

    void validate() const;  // sum p = 1, sum x p = 0, |g| <= 0.1
    Detector rotated() const;  // g -> i g
    static Detector symmetric(double g);  // x = +-1, p = 1/2, g(x) = x g
};

// Joint outcome probabilities of one batch of weak-measurement trials.
struct WeakRun {
    std::vector<Detector> detectors;
    std::vector<double> probabilities;  // index over (prepared or final label, detector outcomes, strong outcome)
};

struct WeakStatistics {
    int weak_count = 2;  // 2: rho = 1/d two-weak protocol; 3: general rho
    double g = 0.0;
    std::vector<WeakRun> runs;
    std::array<double, 16> background{};  // strong-only statistics, two-weak protocol
    std::array<cplx, 16> signal{};        // detector-outcome correlators per entry
};

// Two-weak protocol for rho = 1/d: real and imaginary coupling batches plus the
// strong-measurement background. Requires rho proportional to the identity.
WeakStatistics weak_measurement_simulate(const OtocSetting& s, double t, const Detector& a, const Detector& b);
// Three weak measurements on general rho, with every coupling phase-cycled over {g, i g}.
WeakStatistics weak_measurement_simulate(const OtocSetting& s, double t, const Detector& a, const Detector& b,
                                         const Detector& c);
CoarseTable infer_quasiprob_from_weak(const WeakStatistics& stats);
// Correlator sum_xy x y P(x, y, v2 | w3) of a single two-weak batch, per table entry.
std::array<cplx, 16> weak_correlator(const OtocSetting& s, double t, const Detector& a, const Detector& b);

struct InterferenceEstimate {
    cplx z;
    double se_re = 0.0, se_im = 0.0;
    double p_x = 0.0, p_y = 0.0, p_abs2 = 0.0;  // the three measured probabilities
};

// <a| U |b> from ancilla interferometry at rotation angle pi/2. shots = 0 uses exact
// probabilities; otherwise each probability is a binomial estimate.
InterferenceEstimate interference_inner_product(const CMat& U, const CVec& a, const CVec& b, std::uint64_t shots,
                                                SeededRng& rng);

enum class RetrodictionMode { Conventional, Factored };

struct RetrodictionProblem {
    std::vector<CMat> observables;  // A, ..., K
    CMat rho_prime;                 // rho evolved to the intermediate time
    CVec f_prime;                   // final outcome state evolved back to that time
    bool antisymmetric = false;     // i (K...A - A...K) instead of K...A + A...K
};

struct RetrodictionResult {
    double gamma_weak = 0.0;
    double min_eigenvalue = 0.0, max_eigenvalue = 0.0;  // of the composite observable
    bool anomalous = false;
};

RetrodictionResult weak_value_retrodiction(const RetrodictionProblem& p, RetrodictionMode mode);

struct StateDecomposition {
    CMat coefficients;  // C(v2, w3) = <w3|U|v2><v2|rho U^dag|w3>, from fine sums
    CMat overlaps;      // <w3|U|v2>
    CMat rho_prime;
    std::size_t removed = 0;  // terms dropped for vanishing overlap
};

StateDecomposition state_decomposition(const OtocSetting& s, double t, const FineBases& b,
                                       double overlap_tol = 1e-10);

enum class BrownianIntegrator {
    EulerMaruyama,  // U += -(N/2) U dt - i dB U, polar projection every projection_interval steps
    Exponential,    // U <- exp(-i dB) U with a fourth-order Taylor series for the exponential
};

struct BrownianConfig {
    int N = 4;
    BrownianIntegrator integrator = BrownianIntegrator::Exponential;
    double dt = 5e-4;
    std::size_t shots = 2000;
    std::vector<double> times;
    int projection_interval = 100;
    double drift_tolerance = 1e-3;
    std::uint64_t seed = 1;
    int threads = 0;
};

struct BrownianPoint {
    double t = 0.0;
    double F = 0.0, se_F = 0.0;
    double G = 0.0, se_G = 0.0;
    std::array<double, 16> A{}, se_A{};
};

struct BrownianResult {
    std::vector<BrownianPoint> points;
    std::size_t shots_used = 0, shots_discarded = 0;
    double max_drift = 0.0;
};

BrownianResult brownian_average(const BrownianConfig& cfg);

}  // namespace qtk
