#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>

#include "detail.hpp"
#include "qtk/quasiprob.hpp"

namespace qtk {

namespace detail {

CMat projector(const CMat& O, int sign) {
    CMat P = static_cast<double>(sign) * O;
    P.diagonal().array() += 1.0;
    return 0.5 * P;
}

CMat mul(const CMat& a, const CMat& b) {
    CMat c(a.rows(), b.cols());
    c.noalias() = a * b;
    return c;
}

cplx trace_product(const CMat& a, const CMat& b) { return (a.transpose().cwiseProduct(b)).sum(); }

CoarseTable coarse_diagonal(const CMat& X, const RVec& vdiag, const RVec& rdiag) {
    const Eigen::Index d = X.rows();
    // D[v] = sum_{a in S(v)} rho_a, E[v] = sum rho_a X_aa, Q[v2][v1] = sum_{a in S(v2), b in S(v1)} rho_b X_ba X_ab
    cplx D[2] = {0.0, 0.0}, E[2] = {0.0, 0.0}, Q[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
    for (Eigen::Index a = 0; a < d; ++a) {
        int ia = vdiag(a) < 0;
        D[ia] += rdiag(a);
        E[ia] += rdiag(a) * X(a, a);
        for (Eigen::Index b = 0; b < d; ++b) Q[ia][vdiag(b) < 0] += rdiag(b) * X(b, a) * X(a, b);
    }
    CoarseTable t;
    for (int k = 0; k < 16; ++k) {
        auto [v1, w2, v2, w3] = CoarseTable::signs(k);
        cplx val = double(w2 * w3) * Q[v2 < 0][v1 < 0];
        if (v1 == v2) val += D[v1 < 0] + double(w2 + w3) * E[v1 < 0];
        t.values[k] = 0.25 * val;
    }
    return t;
}

}  // namespace detail

using detail::mul;
using detail::projector;
using detail::trace_product;

namespace {

bool is_identity(const CMat& a, double tol) {
    return max_abs(a - CMat::Identity(a.rows(), a.cols())) <= tol;
}

bool is_diagonal(const CMat& a) {
    for (Eigen::Index j = 0; j < a.cols(); ++j)
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            if (i != j && a(i, j) != cplx(0.0)) return false;
    return true;
}

void require_involutory(const OtocSetting& s, const char* who) {
    if (!s.involutory())
        throw std::invalid_argument(std::string(who) + ": W and V must square to the identity");
}

}  // namespace

OtocSetting::OtocSetting(HermitianOperator H, CMat W, CMat V, DensityMatrix rho)
    : H_(std::move(H)), W_(std::move(W)), V_(std::move(V)), rho_(std::move(rho)) {
    const Eigen::Index d = H_.dim();
    if (W_.rows() != d || W_.cols() != d || V_.rows() != d || V_.cols() != d || rho_.dim() != d)
        throw std::invalid_argument("OtocSetting: H, W, V and rho must share one dimension");
    if (max_asymmetry(W_) > kHermTol * std::max(1.0, max_abs(W_)) ||
        max_asymmetry(V_) > kHermTol * std::max(1.0, max_abs(V_)))
        throw std::invalid_argument("OtocSetting: W and V must be Hermitian");
    spec_ = eigh(H_);
    real_basis_ = spec_.vectors.imag().cwiseAbs().maxCoeff() == 0.0;
    if (real_basis_) vr_ = spec_.vectors.real();
    Wtil_ = spec_.vectors.adjoint() * W_ * spec_.vectors;
    involutory_ = is_identity(W_ * W_, 1e-12) && is_identity(V_ * V_, 1e-12);
    v_diag_ = is_diagonal(V_);
    rho_diag_ = is_diagonal(rho_.matrix());
}

OtocSetting OtocSetting::ising(const IsingParams& p) {
    return ising(p, DensityMatrix::maximally_mixed(Eigen::Index(1) << p.N));
}

OtocSetting OtocSetting::ising(const IsingParams& p, DensityMatrix rho) {
    HermitianOperator H = build_ising(p);
    CMat W = embed(pauli::Z(), 0, p.N, 2);
    CMat V = embed(pauli::Z(), p.N - 1, p.N, 2);
    return OtocSetting(std::move(H), std::move(W), std::move(V), std::move(rho));
}

CMat OtocSetting::U(double t) const {
    CVec ph = (spec_.values.cast<cplx>() * cplx(0.0, -t)).array().exp();
    return spec_.vectors * ph.asDiagonal() * spec_.vectors.adjoint();
}

CMat OtocSetting::W_t(double t) const {
    const Eigen::Index d = dim();
    CMat M(d, d);
    for (Eigen::Index b = 0; b < d; ++b)
        for (Eigen::Index a = 0; a < d; ++a)
            M(a, b) = std::polar(1.0, (spec_.values(a) - spec_.values(b)) * t) * Wtil_(a, b);
    if (real_basis_) {
        RMat re = vr_ * M.real() * vr_.transpose();
        RMat im = vr_ * M.imag() * vr_.transpose();
        CMat out(d, d);
        out.real() = re;
        out.imag() = im;
        return out;
    }
    return spec_.vectors * M * spec_.vectors.adjoint();
}

int CoarseTable::index(int v1, int w2, int v2, int w3) {
    return 8 * (w3 < 0) + 4 * (v2 < 0) + 2 * (w2 < 0) + (v1 < 0);
}

std::array<int, 4> CoarseTable::signs(int index) {
    auto sg = [&](int bit) { return (index >> bit) & 1 ? -1 : 1; };
    return {sg(0), sg(1), sg(2), sg(3)};
}

cplx CoarseTable::sum() const {
    cplx s = 0.0;
    for (const cplx& v : values) s += v;
    return s;
}

cplx otoc(const OtocSetting& s, double t) {
    CMat X = s.W_t(t);
    if (s.diagonal_fast_path()) {
        const Eigen::Index d = s.dim();
        RVec v = s.V().diagonal().real();
        RVec r = s.rho().matrix().diagonal().real();
        cplx f = 0.0;
        for (Eigen::Index a = 0; a < d; ++a)
            for (Eigen::Index b = 0; b < d; ++b) f += r(a) * v(a) * v(b) * std::norm(X(b, a));
        return f;
    }
    // Tr(rho W(t)^dag V^dag W(t) V)
    CMat A = mul(s.rho().matrix(), X.adjoint());
    CMat B = mul(A, s.V().adjoint());
    CMat C = mul(X, s.V());
    return trace_product(B, C);
}

CoarseTable coarse_quasiprob(const OtocSetting& s, double t) {
    require_involutory(s, "coarse_quasiprob");
    CMat X = s.W_t(t);
    if (s.diagonal_fast_path())
        return detail::coarse_diagonal(X, s.V().diagonal().real(), s.rho().matrix().diagonal().real());
    CoarseTable table;
    CMat PiV[2] = {projector(s.V(), 1), projector(s.V(), -1)};
    CMat PW[2] = {projector(X, 1), projector(X, -1)};
    // Tr(P_w3 Pi_v2 P_w2 Pi_v1 rho) = Tr((Pi_v2 P_w2) (Pi_v1 rho P_w3))
    CMat C[2][2];
    for (int iv = 0; iv < 2; ++iv)
        for (int iw = 0; iw < 2; ++iw) C[iv][iw] = mul(PiV[iv], PW[iw]);
    for (int i1 = 0; i1 < 2; ++i1) {
        CMat left = mul(PiV[i1], s.rho().matrix());
        for (int i3 = 0; i3 < 2; ++i3) {
            CMat B = mul(left, PW[i3]);
            for (int i2 = 0; i2 < 2; ++i2)
                for (int j2 = 0; j2 < 2; ++j2)
                    table.at(i1 ? -1 : 1, j2 ? -1 : 1, i2 ? -1 : 1, i3 ? -1 : 1) = trace_product(C[i2][j2], B);
        }
    }
    return table;
}

cplx reconstruct_otoc(const CoarseTable& table) {
    cplx f = 0.0;
    for (int k = 0; k < 16; ++k) {
        auto [v1, w2, v2, w3] = CoarseTable::signs(k);
        f += double(v1 * w2 * v2 * w3) * table.values[k];
    }
    return f;
}

CoarseTable sixteen_term_expansion(const OtocSetting& s, double t) {
    require_involutory(s, "sixteen_term_expansion");
    CMat X = s.W_t(t);
    const CMat& V = s.V();
    const CMat& rho = s.rho().matrix();
    // Letters in operator order P_w3 Pi_v2 P_w2 Pi_v1; products collapse with W^2 = V^2 = 1.
    const char letters[4] = {'W', 'V', 'W', 'V'};
    std::map<std::string, cplx> cache;
    std::map<std::string, CMat> products;  // suffix -> suffix * rho
    const bool v_diag = is_diagonal(V);
    std::function<const CMat&(const std::string&)> product = [&](const std::string& word) -> const CMat& {
        auto it = products.find(word);
        if (it != products.end()) return it->second;
        CMat m;
        if (word.empty())
            m = rho;
        else if (word.front() == 'V' && v_diag)
            m = V.diagonal().asDiagonal() * product(word.substr(1));
        else
            m = mul(word.front() == 'W' ? X : V, product(word.substr(1)));
        return products.emplace(word, std::move(m)).first->second;
    };
    auto expect = [&](const std::string& word) {
        auto it = cache.find(word);
        if (it != cache.end()) return it->second;
        cplx val;
        if (word.empty()) {
            val = rho.trace();
        } else {
            // Tr(A M) without forming A M.
            const CMat& A = word.front() == 'W' ? X : V;
            val = (A.transpose().cwiseProduct(product(word.substr(1)))).sum();
        }
        cache.emplace(word, val);
        return val;
    };
    CoarseTable table;
    for (int k = 0; k < 16; ++k) {
        auto [v1, w2, v2, w3] = CoarseTable::signs(k);
        const int sg[4] = {w3, v2, w2, v1};
        cplx acc = 0.0;
        for (int mask = 0; mask < 16; ++mask) {
            std::string word;
            int coef = 1;
            for (int pos = 0; pos < 4; ++pos) {
                if (!(mask >> pos & 1)) continue;
                coef *= sg[pos];
                if (!word.empty() && word.back() == letters[pos])
                    word.pop_back();
                else
                    word.push_back(letters[pos]);
            }
            acc += double(coef) * expect(word);
        }
        table.values[k] = acc / 16.0;
    }
    return table;
}

void FineBases::validate() const {
    const Eigen::Index d = w_vectors.rows();
    if (w_vectors.cols() != d || v_vectors.rows() != d || v_vectors.cols() != d ||
        static_cast<Eigen::Index>(w_values.size()) != d || static_cast<Eigen::Index>(v_values.size()) != d)
        throw std::invalid_argument("FineBases: bases must be square with one label per vector");
    if (!is_identity(w_vectors.adjoint() * w_vectors, 1e-10) || !is_identity(v_vectors.adjoint() * v_vectors, 1e-10))
        throw std::invalid_argument("FineBases: bases must be orthonormal");
}

FineBases FineBases::computational(const CMat& W, const CMat& V) {
    if (!is_diagonal(W) || !is_diagonal(V))
        throw std::invalid_argument("FineBases::computational: W and V must be diagonal");
    FineBases b;
    const Eigen::Index d = W.rows();
    b.w_vectors = CMat::Identity(d, d);
    b.v_vectors = CMat::Identity(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        b.w_values.push_back(W(i, i).real());
        b.v_values.push_back(V(i, i).real());
    }
    return b;
}

cplx FineTable::at(Eigen::Index i, Eigen::Index j, Eigen::Index k, Eigen::Index l) const {
    return values[static_cast<std::size_t>(((i * d + j) * d + k) * d + l)];
}

namespace {

int label_sign(double v) {
    if (std::abs(std::abs(v) - 1.0) > 1e-10)
        throw std::invalid_argument("FineTable::coarse: eigenvalue labels must be +-1");
    return v > 0 ? 1 : -1;
}

}  // namespace

CoarseTable FineTable::coarse() const {
    CoarseTable t;
    std::size_t n = 0;
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j)
            for (Eigen::Index k = 0; k < d; ++k)
                for (Eigen::Index l = 0; l < d; ++l)
                    t.at(label_sign(v_values[i]), label_sign(w_values[j]), label_sign(v_values[k]),
                         label_sign(w_values[l])) += values[n++];
    return t;
}

std::vector<cplx> FineTable::w3_marginal() const {
    std::vector<cplx> m(static_cast<std::size_t>(d), 0.0);
    std::size_t n = 0;
    for (Eigen::Index i = 0; i < d * d * d; ++i)
        for (Eigen::Index l = 0; l < d; ++l) m[static_cast<std::size_t>(l)] += values[n++];
    return m;
}

namespace {

constexpr Eigen::Index kMaxFineDim = 32;

void check_fine(const OtocSetting& s, const FineBases& b, const char* who) {
    b.validate();
    if (b.w_vectors.rows() != s.dim()) throw std::invalid_argument(std::string(who) + ": basis dimension mismatch");
    if (s.dim() > kMaxFineDim)
        throw std::invalid_argument(std::string(who) + ": d^4 table limited to d <= 32");
}

}  // namespace

FineTable fine_quasiprob(const OtocSetting& s, double t, const FineBases& b) {
    check_fine(s, b, "fine_quasiprob");
    const Eigen::Index d = s.dim();
    CMat U = s.U(t);
    CMat M = b.w_vectors.adjoint() * U * b.v_vectors;                               // <w_l|U|v_k>
    CMat R = b.v_vectors.adjoint() * s.rho().matrix() * U.adjoint() * b.w_vectors;  // <v_i|rho U^dag|w_l>
    FineTable f;
    f.d = d;
    f.w_values = b.w_values;
    f.v_values = b.v_values;
    f.values.resize(static_cast<std::size_t>(d * d * d * d));
    std::size_t n = 0;
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j)
            for (Eigen::Index k = 0; k < d; ++k) {
                cplx head = std::conj(M(j, k)) * M(j, i);
                for (Eigen::Index l = 0; l < d; ++l) f.values[n++] = M(l, k) * head * R(i, l);
            }
    return f;
}

cplx AmplitudeSet::at(Eigen::Index j, Eigen::Index w1, Eigen::Index v1, Eigen::Index w2) const {
    return values[static_cast<std::size_t>(((j * d + w1) * d + v1) * d + w2)];
}

namespace {

struct AmplitudeFactors {
    CMat M;  // <w|U|v>
    CMat Q;  // <w|U|j> sqrt(p_j)
};

AmplitudeFactors amplitude_factors(const OtocSetting& s, double t, const FineBases& b) {
    CMat U = s.U(t);
    SpectralDecomposition r = eigh(s.rho().matrix());
    RVec sq = r.values.cwiseMax(0.0).cwiseSqrt();
    AmplitudeFactors f;
    f.M = b.w_vectors.adjoint() * U * b.v_vectors;
    f.Q = b.w_vectors.adjoint() * U * r.vectors * sq.cast<cplx>().asDiagonal();
    return f;
}

}  // namespace

AmplitudeSet amplitudes(const OtocSetting& s, double t, const FineBases& b) {
    check_fine(s, b, "amplitudes");
    const Eigen::Index d = s.dim();
    AmplitudeFactors f = amplitude_factors(s, t, b);
    AmplitudeSet a;
    a.d = d;
    a.values.resize(static_cast<std::size_t>(d * d * d * d));
    std::size_t n = 0;
    for (Eigen::Index j = 0; j < d; ++j)
        for (Eigen::Index w1 = 0; w1 < d; ++w1)
            for (Eigen::Index v1 = 0; v1 < d; ++v1) {
                cplx tail = std::conj(f.M(w1, v1)) * f.Q(w1, j);
                for (Eigen::Index w2 = 0; w2 < d; ++w2) a.values[n++] = f.M(w2, v1) * tail;
            }
    return a;
}

cplx amplitude(const OtocSetting& s, double t, const FineBases& b, Eigen::Index j, Eigen::Index w1, Eigen::Index v1,
               Eigen::Index w2) {
    check_fine(s, b, "amplitude");
    const Eigen::Index d = s.dim();
    if (j < 0 || w1 < 0 || v1 < 0 || w2 < 0 || j >= d || w1 >= d || v1 >= d || w2 >= d)
        throw std::out_of_range("amplitude: index out of range");
    AmplitudeFactors f = amplitude_factors(s, t, b);
    return f.M(w2, v1) * std::conj(f.M(w1, v1)) * f.Q(w1, j);
}

FineTable quasiprob_from_amplitudes(const OtocSetting& s, double t, const FineBases& b) {
    AmplitudeSet a = amplitudes(s, t, b);
    const Eigen::Index d = a.d;
    FineTable f;
    f.d = d;
    f.w_values = b.w_values;
    f.v_values = b.v_values;
    f.values.assign(static_cast<std::size_t>(d * d * d * d), 0.0);
    // A~(v1, w2, v2, w3) = sum_{j, w1} A(j; w1; v1; w2) A*(j; w3; v2; w2)
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j2 = 0; j2 < d; ++j2)
            for (Eigen::Index k = 0; k < d; ++k)
                for (Eigen::Index l = 0; l < d; ++l) {
                    cplx acc = 0.0;
                    for (Eigen::Index j = 0; j < d; ++j)
                        for (Eigen::Index w1 = 0; w1 < d; ++w1) acc += a.at(j, w1, i, j2) * std::conj(a.at(j, l, k, j2));
                    f.values[static_cast<std::size_t>(((i * d + j2) * d + k) * d + l)] = acc;
                }
    return f;
}

cplx WorkDistribution::sum() const { return values[0] + values[1] + values[2] + values[3]; }

WorkDistribution work_distribution(const CoarseTable& table) {
    WorkDistribution w;
    for (int k = 0; k < 16; ++k) {
        auto [v1, w2, v2, w3] = CoarseTable::signs(k);
        w.at(w3 * v2, w2 * v1) += table.values[k];
    }
    return w;
}

JarzynskiMoment jarzynski_moment(const WorkDistribution& dist, double step) {
    if (!(step > 0)) throw std::invalid_argument("jarzynski_moment: step must be positive");
    JarzynskiMoment m;
    auto G = [&](double b, double bp) {
        cplx g = 0.0;
        for (int W : {1, -1})
            for (int Wp : {1, -1}) g += dist.at(W, Wp) * std::exp(-(b * W + bp * Wp));
        return g;
    };
    for (int W : {1, -1})
        for (int Wp : {1, -1}) m.exact += double(W * Wp) * dist.at(W, Wp);
    const double h = step;
    m.finite_difference = (G(h, h) - G(h, -h) - G(-h, h) + G(-h, -h)) / (4.0 * h * h);
    return m;
}

cplx TocTable::sum() const {
    cplx s = 0.0;
    for (const cplx& v : values) s += v;
    return s;
}

TocTable toc_quasiprob(const OtocSetting& s, double t) {
    require_involutory(s, "toc_quasiprob");
    CMat X = s.W_t(t);
    TocTable table;
    for (int v1 : {1, -1}) {
        CMat B = mul(projector(s.V(), v1), s.rho().matrix());
        for (int w1 : {1, -1}) {
            CMat C = mul(projector(X, w1), B);
            for (int v2 : {1, -1})
                table.values[4 * (v1 < 0) + 2 * (w1 < 0) + (v2 < 0)] = trace_product(projector(s.V(), v2), C);
        }
    }
    return table;
}

cplx toc_moment(const TocTable& table) {
    cplx m = 0.0;
    for (int v1 : {1, -1})
        for (int w1 : {1, -1})
            for (int v2 : {1, -1}) m += double(v1 * v2 * w1 * w1) * table.at(v1, w1, v2);
    return m;
}

cplx toc_correlator(const OtocSetting& s, double t) {
    CMat X = s.W_t(t);
    CMat left = mul(s.V().adjoint(), mul(X.adjoint(), X));
    return trace_product(mul(left, s.V()), s.rho().matrix());
}

namespace {

void check_k(int k) {
    if (k != 2 && k != 3) throw std::invalid_argument("k-fold OTOC: k must be 2 or 3");
}

}  // namespace

cplx kfold_otoc(const OtocSetting& s, double t, int k) {
    check_k(k);
    CMat X = s.W_t(t);
    CMat WV = mul(X, s.V());
    CMat P = WV;
    for (int i = 1; i < k; ++i) P = mul(P, WV);
    return trace_product(s.rho().matrix(), P);
}

cplx KFoldTable::sum() const {
    cplx s = 0.0;
    for (const cplx& v : values) s += v;
    return s;
}

KFoldTable kfold_quasiprob(const OtocSetting& s, double t, int k) {
    check_k(k);
    require_involutory(s, "kfold_quasiprob");
    CMat X = s.W_t(t);
    CMat PiV[2] = {projector(s.V(), 1), projector(s.V(), -1)};
    CMat PW[2] = {projector(X, 1), projector(X, -1)};
    KFoldTable table;
    table.k = k;
    table.values.assign(std::size_t(1) << (2 * k), 0.0);
    // Left-multiply Pi_{v_{l+1}} then P_{w_{l+2}} onto rho, one level per factor pair.
    auto rec = [&](auto&& self, const CMat& m, int level, int idx) -> void {
        if (level == k) {
            table.values[static_cast<std::size_t>(idx)] = m.trace();
            return;
        }
        for (int iv = 0; iv < 2; ++iv) {
            CMat a = mul(PiV[iv], m);
            for (int iw = 0; iw < 2; ++iw)
                self(self, mul(PW[iw], a), level + 1, idx | (iv << (2 * level)) | (iw << (2 * level + 1)));
        }
    };
    rec(rec, s.rho().matrix(), 0, 0);
    return table;
}

cplx kfold_moment(const KFoldTable& table) {
    cplx m = 0.0;
    for (std::size_t idx = 0; idx < table.values.size(); ++idx) {
        int sign = 1;
        for (int b = 0; b < 2 * table.k; ++b)
            if (idx >> b & 1) sign = -sign;
        m += double(sign) * table.values[idx];
    }
    return m;
}

DensityMatrix thermal_state(const HermitianOperator& H, double T) {
    if (!(T > 0) || !std::isfinite(T)) throw std::invalid_argument("thermal_state: temperature must be positive and finite");
    SpectralDecomposition sp = eigh(H);
    const double e0 = sp.values(0);
    double Z = 0.0;
    for (Eigen::Index i = 0; i < sp.values.size(); ++i) Z += std::exp(-(sp.values(i) - e0) / T);
    return DensityMatrix(apply_function(sp, [&](double e) { return std::exp(-(e - e0) / T) / Z; }));
}

namespace {

// rho^{1/4} for the thermal state, after checking rho is that state.
CMat thermal_quarter_root(const OtocSetting& s, double T) {
    DensityMatrix th = thermal_state(s.H(), T);
    if (max_abs(th.matrix() - s.rho().matrix()) > 1e-10)
        throw std::invalid_argument("regulated OTOC: rho must be the thermal state at temperature T");
    const SpectralDecomposition& sp = s.spectrum();
    const double e0 = sp.values(0);
    double Z = 0.0;
    for (Eigen::Index i = 0; i < sp.values.size(); ++i) Z += std::exp(-(sp.values(i) - e0) / T);
    const double z4 = std::pow(Z, 0.25);
    return apply_function(sp, [&](double e) { return std::exp(-(e - e0) / (4.0 * T)) / z4; });
}

}  // namespace

CoarseTable regulated_quasiprob(const OtocSetting& s, double T, double t) {
    require_involutory(s, "regulated_quasiprob");
    CMat r = thermal_quarter_root(s, T);
    CMat U = s.U(t);
    CMat Xv[2], PW[2] = {projector(s.W(), 1), projector(s.W(), -1)};
    for (int iv = 0; iv < 2; ++iv) Xv[iv] = mul(mul(U, mul(r, mul(projector(s.V(), iv ? -1 : 1), r))), U.adjoint());
    CoarseTable table;
    for (int k = 0; k < 16; ++k) {
        auto [v1, w2, v2, w3] = CoarseTable::signs(k);
        CMat a = mul(PW[w3 < 0], Xv[v2 < 0]);
        CMat b = mul(PW[w2 < 0], Xv[v1 < 0]);
        table.values[k] = trace_product(a, b);
    }
    return table;
}

cplx regulated_otoc(const OtocSetting& s, double T, double t) {
    CMat r = thermal_quarter_root(s, T);
    CMat X = s.W_t(t);
    CMat a = mul(mul(r, X), mul(r, s.V()));
    return trace_product(a, a);
}

}  // namespace qtk
