#include <cmath>
#include <stdexcept>

#include "qtk/linops.hpp"

namespace qtk {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

SeededRng::SeededRng(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream), eng_(splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL))) {}

double SeededRng::uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(eng_); }

double SeededRng::uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }

double SeededRng::normal() { return nd_(eng_); }

SeededRng SeededRng::split(std::uint64_t sub) const {
    return SeededRng(splitmix64(seed_ ^ splitmix64(stream_)), sub);
}

CVec haar_state(Eigen::Index dim, SeededRng& rng) {
    if (dim <= 0) throw std::invalid_argument("haar_state: dimension must be positive");
    CVec v(dim);
    for (Eigen::Index k = 0; k < dim; ++k) {
        double re = rng.normal();
        double im = rng.normal();
        v(k) = cplx(re, im);
    }
    return v / v.norm();
}

CVec haar_in_subspace(const CMat& basis, SeededRng& rng) {
    if (basis.cols() == 0) throw std::invalid_argument("haar_in_subspace: empty subspace");
    CMat g = basis.adjoint() * basis;
    if ((g - CMat::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff() > 1e-10)
        throw std::invalid_argument("haar_in_subspace: basis columns not orthonormal");
    CVec c = haar_state(basis.cols(), rng);
    CVec v = basis * c;
    return v / v.norm();
}

CMat haar_unitary(Eigen::Index dim, SeededRng& rng) {
    CMat z(dim, dim);
    for (Eigen::Index j = 0; j < dim; ++j)
        for (Eigen::Index i = 0; i < dim; ++i) {
            double re = rng.normal();
            double im = rng.normal();
            z(i, j) = cplx(re, im) / std::sqrt(2.0);
        }
    Eigen::HouseholderQR<CMat> qr(z);
    CMat q = qr.householderQ();
    CMat r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < dim; ++j) {
        cplx d = r(j, j);
        if (std::abs(d) > 0) q.col(j) *= d / std::abs(d);
    }
    return q;
}

CMat random_hermitian(Eigen::Index dim, SeededRng& rng) {
    CMat a(dim, dim);
    for (Eigen::Index j = 0; j < dim; ++j)
        for (Eigen::Index i = 0; i < dim; ++i) {
            double re = rng.normal();
            double im = rng.normal();
            a(i, j) = cplx(re, im);
        }
    return 0.5 * (a + a.adjoint());
}

DensityMatrix random_density(Eigen::Index dim, SeededRng& rng) {
    CMat g(dim, dim);
    for (Eigen::Index j = 0; j < dim; ++j)
        for (Eigen::Index i = 0; i < dim; ++i) {
            double re = rng.normal();
            double im = rng.normal();
            g(i, j) = cplx(re, im);
        }
    CMat r = g * g.adjoint();
    r /= r.trace().real();
    return DensityMatrix(0.5 * (r + r.adjoint()));
}

}  // namespace qtk
