#include "qtk/linops.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <lapacke.h>

namespace qtk {

double max_asymmetry(const CMat& a) {
    if (a.rows() != a.cols()) return INFINITY;
    return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

HermitianOperator::HermitianOperator(CMat m, double tol) : m_(std::move(m)) {
    if (m_.rows() == 0 || m_.rows() != m_.cols())
        throw std::invalid_argument("HermitianOperator: matrix must be square and nonempty");
    double asym = max_asymmetry(m_);
    double scale = std::max(1.0, m_.cwiseAbs().maxCoeff());
    if (asym > tol * scale) {
        std::ostringstream os;
        os << "HermitianOperator: max |A - A^dag| = " << asym << " exceeds tolerance";
        throw std::invalid_argument(os.str());
    }
    m_ = 0.5 * (m_ + m_.adjoint()).eval();
}

HermitianOperator HermitianOperator::from_real(const RMat& m, double tol) {
    return HermitianOperator(m.cast<cplx>(), tol);
}

DensityMatrix::DensityMatrix(CMat m, double tol) : m_(std::move(m)) {
    if (m_.rows() == 0 || m_.rows() != m_.cols())
        throw std::invalid_argument("DensityMatrix: matrix must be square and nonempty");
    double asym = max_asymmetry(m_);
    if (asym > 1e-12 * std::max(1.0, m_.cwiseAbs().maxCoeff()))
        throw std::invalid_argument("DensityMatrix: not Hermitian (max asymmetry " + std::to_string(asym) + ")");
    m_ = 0.5 * (m_ + m_.adjoint()).eval();
    double tr = m_.trace().real();
    if (std::abs(tr - 1.0) > 1e-12 * std::max<double>(1.0, static_cast<double>(m_.rows())))
        throw std::invalid_argument("DensityMatrix: trace " + std::to_string(tr) + " != 1");
    RVec ev = eigvalsh(m_);
    if (ev.minCoeff() < -tol)
        throw std::invalid_argument("DensityMatrix: negative eigenvalue " + std::to_string(ev.minCoeff()));
}

DensityMatrix DensityMatrix::maximally_mixed(Eigen::Index d) {
    return DensityMatrix(CMat::Identity(d, d) / static_cast<double>(d));
}

DensityMatrix DensityMatrix::pure(const CVec& psi) {
    CVec p = psi / psi.norm();
    return DensityMatrix(p * p.adjoint());
}

CMat SpectralDecomposition::reconstruct() const {
    return vectors * values.cast<cplx>().asDiagonal() * vectors.adjoint();
}

namespace {

// Largest-magnitude component made real and positive; first index wins ties.
template <class Mat>
void fix_phases(Mat& v) {
    for (Eigen::Index c = 0; c < v.cols(); ++c) {
        double best = 0.0;
        Eigen::Index arg = 0;
        for (Eigen::Index r = 0; r < v.rows(); ++r) {
            double m = std::abs(v(r, c));
            if (m > best * (1.0 + 1e-9) + 1e-15) {
                best = m;
                arg = r;
            }
        }
        auto z = v(arg, c);
        if (std::abs(z) == 0.0) continue;
        v.col(c) *= std::abs(z) / z;
        if constexpr (std::is_same_v<typename Mat::Scalar, cplx>) v(arg, c) = std::abs(v(arg, c));
    }
}

bool is_real(const CMat& a) { return a.imag().cwiseAbs().maxCoeff() == 0.0; }

}  // namespace

RealSpectrum eigh_real(const RMat& a, bool vectors) {
    const lapack_int n = static_cast<lapack_int>(a.rows());
    if (a.rows() != a.cols() || n == 0) throw std::invalid_argument("eigh_real: square nonempty matrix required");
    RealSpectrum s;
    RMat w = a;
    s.values.resize(n);
    lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, vectors ? 'V' : 'N', 'U', n, w.data(), n, s.values.data());
    if (info != 0) throw std::runtime_error("eigh_real: dsyevd failed, info=" + std::to_string(info));
    if (vectors) {
        fix_phases(w);
        s.vectors = std::move(w);
    }
    return s;
}

SpectralDecomposition eigh(const CMat& a) {
    if (a.rows() != a.cols() || a.rows() == 0) throw std::invalid_argument("eigh: square nonempty matrix required");
    double asym = max_asymmetry(a);
    if (asym > kHermTol * std::max(1.0, a.cwiseAbs().maxCoeff())) {
        std::ostringstream os;
        os << "eigh: input not Hermitian, max |A - A^dag| = " << asym;
        throw std::invalid_argument(os.str());
    }
    SpectralDecomposition s;
    if (is_real(a)) {
        RealSpectrum r = eigh_real(a.real());
        s.values = std::move(r.values);
        s.vectors = r.vectors.cast<cplx>();
        return s;
    }
    const lapack_int n = static_cast<lapack_int>(a.rows());
    CMat w = 0.5 * (a + a.adjoint());
    s.values.resize(n);
    lapack_int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'U', n,
                                     reinterpret_cast<lapack_complex_double*>(w.data()), n, s.values.data());
    if (info != 0) throw std::runtime_error("eigh: zheevd failed, info=" + std::to_string(info));
    fix_phases(w);
    s.vectors = std::move(w);
    return s;
}

SpectralDecomposition eigh(const HermitianOperator& a) { return eigh(a.matrix()); }

RVec eigvalsh(const CMat& a) {
    if (is_real(a)) return eigh_real(a.real(), false).values;
    const lapack_int n = static_cast<lapack_int>(a.rows());
    CMat w = 0.5 * (a + a.adjoint());
    RVec v(n);
    lapack_int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'N', 'U', n,
                                     reinterpret_cast<lapack_complex_double*>(w.data()), n, v.data());
    if (info != 0) throw std::runtime_error("eigvalsh: zheevd failed");
    return v;
}

CMat apply_function(const SpectralDecomposition& s, const std::function<double(double)>& f) {
    RVec fv(s.values.size());
    for (Eigen::Index k = 0; k < fv.size(); ++k) {
        double y = f(s.values(k));
        if (!std::isfinite(y)) {
            std::ostringstream os;
            os << "func_hermitian: function undefined at eigenvalue " << s.values(k);
            throw std::domain_error(os.str());
        }
        fv(k) = y;
    }
    return s.vectors * fv.cast<cplx>().asDiagonal() * s.vectors.adjoint();
}

HermitianOperator func_hermitian(const HermitianOperator& a, const std::function<double(double)>& f) {
    CMat r = apply_function(eigh(a), f);
    return HermitianOperator(0.5 * (r + r.adjoint()), 1e-8);
}

CMat kron(const CMat& a, const CMat& b) {
    CMat r(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            r.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return r;
}

HermitianOperator tensor(const HermitianOperator& a, const HermitianOperator& b) {
    return HermitianOperator(kron(a.matrix(), b.matrix()));
}

CMat embed(const CMat& op, int site, int n, int d) {
    if (site < 0 || site >= n) throw std::out_of_range("embed: site out of range");
    Eigen::Index left = 1, right = 1;
    for (int k = 0; k < site; ++k) left *= d;
    for (int k = site + 1; k < n; ++k) right *= d;
    return kron(kron(CMat::Identity(left, left), op), CMat::Identity(right, right));
}

CMat partial_trace(const CMat& rho, const std::vector<int>& keep, const std::vector<int>& dims) {
    const int n = static_cast<int>(dims.size());
    Eigen::Index total = 1;
    for (int d : dims) {
        if (d <= 0) throw std::invalid_argument("partial_trace: nonpositive dimension");
        total *= d;
    }
    if (total != rho.rows() || rho.rows() != rho.cols())
        throw std::invalid_argument("partial_trace: dims product does not match matrix dimension");
    std::vector<bool> kept(n, false);
    for (int k : keep) {
        if (k < 0 || k >= n) throw std::out_of_range("partial_trace: keep index " + std::to_string(k) + " out of range");
        if (kept[k]) throw std::invalid_argument("partial_trace: duplicate keep index");
        kept[k] = true;
    }
    // strides, site 0 most significant
    std::vector<Eigen::Index> stride(n);
    Eigen::Index s = 1;
    for (int k = n - 1; k >= 0; --k) {
        stride[k] = s;
        s *= dims[k];
    }
    std::vector<int> ks, ts;
    for (int k = 0; k < n; ++k) (kept[k] ? ks : ts).push_back(k);
    std::sort(ks.begin(), ks.end());
    Eigen::Index dk = 1, dt = 1;
    for (int k : ks) dk *= dims[k];
    for (int k : ts) dt *= dims[k];

    auto offsets = [&](const std::vector<int>& sites, Eigen::Index count) {
        std::vector<Eigen::Index> off(count, 0);
        for (Eigen::Index idx = 0; idx < count; ++idx) {
            Eigen::Index rem = idx, o = 0;
            for (int q = static_cast<int>(sites.size()) - 1; q >= 0; --q) {
                int site = sites[q];
                o += (rem % dims[site]) * stride[site];
                rem /= dims[site];
            }
            off[idx] = o;
        }
        return off;
    };
    auto ko = offsets(ks, dk);
    auto to = offsets(ts, dt);
    CMat out = CMat::Zero(dk, dk);
    for (Eigen::Index i = 0; i < dk; ++i)
        for (Eigen::Index j = 0; j < dk; ++j) {
            cplx acc = 0.0;
            for (Eigen::Index t = 0; t < dt; ++t) acc += rho(ko[i] + to[t], ko[j] + to[t]);
            out(i, j) = acc;
        }
    return out;
}

DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<int>& keep, const std::vector<int>& dims) {
    return DensityMatrix(partial_trace(rho.matrix(), keep, dims));
}

double trace_norm(const CMat& a) {
    CMat h = 0.5 * (a + a.adjoint());
    if ((a - h).cwiseAbs().maxCoeff() < 1e-13 * std::max(1.0, a.cwiseAbs().maxCoeff()))
        return eigvalsh(h).cwiseAbs().sum();
    Eigen::JacobiSVD<CMat> svd(a);
    return svd.singularValues().sum();
}

double max_abs(const CMat& a) { return a.size() ? a.cwiseAbs().maxCoeff() : 0.0; }

double commutator_norm(const CMat& a, const CMat& b) { return max_abs(a * b - b * a); }

namespace pauli {
CMat I() { return CMat::Identity(2, 2); }
CMat X() {
    CMat m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}
CMat Y() {
    CMat m(2, 2);
    m << 0, cplx(0, -1), cplx(0, 1), 0;
    return m;
}
CMat Z() {
    CMat m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}
CMat by_index(int k) {
    switch (k) {
        case 0: return I();
        case 1: return X();
        case 2: return Y();
        case 3: return Z();
    }
    throw std::out_of_range("pauli::by_index");
}
}  // namespace pauli

}  // namespace qtk
