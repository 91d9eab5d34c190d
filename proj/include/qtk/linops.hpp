#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace qtk {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using RMat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

inline constexpr double kHermTol = 1e-12;

double max_asymmetry(const CMat& a);

// Dense complex Hermitian matrix. Construction validates Hermiticity.
class HermitianOperator {
public:
    HermitianOperator() = default;
    explicit HermitianOperator(CMat m, double tol = kHermTol);
    static HermitianOperator from_real(const RMat& m, double tol = kHermTol);

    const CMat& matrix() const { return m_; }
    Eigen::Index dim() const { return m_.rows(); }

private:
    CMat m_;
};

class DensityMatrix {
public:
    DensityMatrix() = default;
    explicit DensityMatrix(CMat m, double tol = 1e-10);

    static DensityMatrix maximally_mixed(Eigen::Index d);
    static DensityMatrix pure(const CVec& psi);

    const CMat& matrix() const { return m_; }
    Eigen::Index dim() const { return m_.rows(); }

private:
    CMat m_;
};

struct SpectralDecomposition {
    RVec values;   // ascending
    CMat vectors;  // columns

    CMat reconstruct() const;
    Eigen::Index dim() const { return values.size(); }
};

struct RealSpectrum {
    RVec values;
    RMat vectors;
};

SpectralDecomposition eigh(const HermitianOperator& a);
SpectralDecomposition eigh(const CMat& a);
// Real symmetric input; eigenvectors real. `vectors=false` skips them.
RealSpectrum eigh_real(const RMat& a, bool vectors = true);
RVec eigvalsh(const CMat& a);

CMat apply_function(const SpectralDecomposition& s, const std::function<double(double)>& f);
HermitianOperator func_hermitian(const HermitianOperator& a, const std::function<double(double)>& f);

CMat kron(const CMat& a, const CMat& b);
HermitianOperator tensor(const HermitianOperator& a, const HermitianOperator& b);
// Operator acting as `op` on site `site` of `n` sites of local dimension `d`.
CMat embed(const CMat& op, int site, int n, int d);

CMat partial_trace(const CMat& rho, const std::vector<int>& keep, const std::vector<int>& dims);
DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<int>& keep, const std::vector<int>& dims);

double trace_norm(const CMat& a);
double max_abs(const CMat& a);
double commutator_norm(const CMat& a, const CMat& b);

namespace pauli {
CMat I();
CMat X();
CMat Y();
CMat Z();
// 0..3 -> I, X, Y, Z
CMat by_index(int k);
}  // namespace pauli

// Counter-based seeding: (seed, stream) -> independent mt19937_64 state.
class SeededRng {
public:
    SeededRng(std::uint64_t seed, std::uint64_t stream = 0);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

    double uniform();
    double uniform(double lo, double hi);
    double normal();
    std::uint64_t next_u64() { return eng_(); }
    std::mt19937_64& engine() { return eng_; }

    SeededRng split(std::uint64_t sub) const;

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::mt19937_64 eng_;
    std::normal_distribution<double> nd_{0.0, 1.0};
};

std::uint64_t splitmix64(std::uint64_t x);

CVec haar_state(Eigen::Index dim, SeededRng& rng);
CVec haar_in_subspace(const CMat& basis, SeededRng& rng);
CMat haar_unitary(Eigen::Index dim, SeededRng& rng);
CMat random_hermitian(Eigen::Index dim, SeededRng& rng);
DensityMatrix random_density(Eigen::Index dim, SeededRng& rng);

}  // namespace qtk
