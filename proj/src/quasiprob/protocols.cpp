#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "detail.hpp"
#include "qtk/quasiprob.hpp"

namespace qtk {

using detail::mul;
using detail::projector;

void Detector::validate() const {
    if (x.empty() || x.size() != p.size() || x.size() != g.size())
        throw std::invalid_argument("Detector: x, p and g must be nonempty and of equal length");
    double sp = 0.0, sxp = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(p[i] >= 0)) throw std::invalid_argument("Detector: probabilities must be nonnegative");
        if (std::abs(g[i]) > 0.1) throw std::invalid_argument("Detector: coupling |g| must not exceed 0.1");
        sp += p[i];
        sxp += x[i] * p[i];
    }
    if (std::abs(sp - 1.0) > 1e-12) throw std::invalid_argument("Detector: probabilities must sum to 1");
    if (std::abs(sxp) > 1e-12) throw std::invalid_argument("Detector: uncalibrated, sum x p(x) must vanish");
}

Detector Detector::rotated() const {
    Detector d = *this;
    for (cplx& c : d.g) c *= cplx(0.0, 1.0);
    return d;
}

Detector Detector::symmetric(double g) {
    Detector d;
    d.x = {1.0, -1.0};
    d.p = {0.5, 0.5};
    d.g = {cplx(g), cplx(-g)};
    d.validate();
    return d;
}

namespace {

// Kraus operator sqrt(p) 1 + g Pi for outcome i.
CMat kraus(const Detector& det, std::size_t i, const CMat& Pi) {
    CMat M = det.g[i] * Pi;
    M.diagonal().array() += std::sqrt(det.p[i]);
    return M;
}

// sum_x x sqrt(p(x)) g(x): the linear response of the detector.
cplx response(const Detector& det) {
    cplx r = 0.0;
    for (std::size_t i = 0; i < det.x.size(); ++i) r += det.x[i] * std::sqrt(det.p[i]) * det.g[i];
    return r;
}

CMat sandwich(const CMat& K, const CMat& rho) { return mul(mul(K, rho), K.adjoint()); }

double prob(const CMat& Pi, const CMat& sigma) { return detail::trace_product(Pi, sigma).real(); }

void require_mixed(const OtocSetting& s) {
    const Eigen::Index d = s.dim();
    if (max_abs(s.rho().matrix() - CMat::Identity(d, d) / double(d)) > 1e-12)
        throw std::invalid_argument("two-weak protocol: rho must be the maximally mixed state");
}

// One two-weak batch: prepare Pi^W_{w3}/d, U^dag, weak Pi_{v1} (a), U, weak Pi^W_{w2} (b),
// U^dag, strong V. probabilities[((iw3 * na + x) * nb + y) * 2 + iv2].
WeakRun two_weak_run(const OtocSetting& s, const CMat& U, const Detector& a, const Detector& b, int v1, int w2) {
    const Eigen::Index d = s.dim();
    CMat PiA = projector(s.V(), v1), PiB = projector(s.W(), w2);
    CMat PiV[2] = {projector(s.V(), 1), projector(s.V(), -1)};
    WeakRun run;
    run.detectors = {a, b};
    const std::size_t na = a.x.size(), nb = b.x.size();
    run.probabilities.assign(2 * na * nb * 2, 0.0);
    for (int iw3 = 0; iw3 < 2; ++iw3) {
        CMat sigma = projector(s.W(), iw3 ? -1 : 1) / double(d);
        CMat s1 = mul(mul(U.adjoint(), sigma), U);
        for (std::size_t x = 0; x < na; ++x) {
            CMat s2 = mul(mul(U, sandwich(kraus(a, x, PiA), s1)), U.adjoint());
            for (std::size_t y = 0; y < nb; ++y) {
                CMat s3 = mul(mul(U.adjoint(), sandwich(kraus(b, y, PiB), s2)), U);
                for (int iv2 = 0; iv2 < 2; ++iv2)
                    run.probabilities[((iw3 * na + x) * nb + y) * 2 + iv2] = prob(PiV[iv2], s3);
            }
        }
    }
    return run;
}

}  // namespace

WeakStatistics weak_measurement_simulate(const OtocSetting& s, double t, const Detector& a, const Detector& b) {
    require_mixed(s);
    if (!s.involutory()) throw std::invalid_argument("weak measurement: W and V must square to the identity");
    a.validate();
    b.validate();
    const cplx ra = response(a), rb = response(b);
    if (std::abs(ra.imag()) > 1e-15 || std::abs(rb - ra) > 1e-15)
        throw std::invalid_argument("two-weak protocol: detectors need one common real response");
    const Eigen::Index d = s.dim();
    CMat U = s.U(t);
    WeakStatistics st;
    st.weak_count = 2;
    st.g = std::abs(response(a)) / std::sqrt(2.0);
    // Runs ordered (v1, w2) major, coupling mode minor: mode 0 real, mode 1 with b rotated.
    for (int v1 : {1, -1})
        for (int w2 : {1, -1}) {
            st.runs.push_back(two_weak_run(s, U, a, b, v1, w2));
            st.runs.push_back(two_weak_run(s, U, a, b.rotated(), v1, w2));
        }
    // Strong-only batch: prepare Pi^W_{w3}/d, U^dag, measure V.
    for (int w3 : {1, -1}) {
        CMat sigma = mul(mul(U.adjoint(), projector(s.W(), w3)), U) / double(d);
        for (int v2 : {1, -1})
            for (int v1 : {1, -1})
                for (int w2 : {1, -1})
                    st.background[CoarseTable::index(v1, w2, v2, w3)] = prob(projector(s.V(), v2), sigma);
    }
    for (int k = 0; k < 16; ++k) {
        auto [v1, w2, v2, w3] = CoarseTable::signs(k);
        int r = 2 * (2 * (v1 < 0) + (w2 < 0));
        double I[2];
        for (int mode = 0; mode < 2; ++mode) {
            const WeakRun& run = st.runs[r + mode];
            const Detector &da = run.detectors[0], &db = run.detectors[1];
            const std::size_t na = da.x.size(), nb = db.x.size();
            double acc = 0.0;
            for (std::size_t x = 0; x < na; ++x)
                for (std::size_t y = 0; y < nb; ++y)
                    acc += da.x[x] * db.x[y] * run.probabilities[(((w3 < 0) * na + x) * nb + y) * 2 + (v2 < 0)];
            I[mode] = acc;
        }
        st.signal[k] = cplx(I[0], I[1]);
    }
    return st;
}

WeakStatistics weak_measurement_simulate(const OtocSetting& s, double t, const Detector& a, const Detector& b,
                                         const Detector& c) {
    if (!s.involutory()) throw std::invalid_argument("weak measurement: W and V must square to the identity");
    a.validate();
    b.validate();
    c.validate();
    const cplx ra = response(a), rb = response(b), rc = response(c);
    const double g0 = std::abs(ra);
    if (std::abs(ra.imag()) > 1e-15 || std::abs(rb - ra) > 1e-15 || std::abs(rc - ra) > 1e-15)
        throw std::invalid_argument("three-weak protocol: detectors need one common real response");
    CMat U = s.U(t);
    CMat PW[2] = {projector(s.W(), 1), projector(s.W(), -1)};
    WeakStatistics st;
    st.weak_count = 3;
    st.g = g0 / std::sqrt(2.0);
    const Detector base[3] = {a, b, c};
    // Runs ordered (v1, w2, v2) major, phase mask minor (bit i rotates detector i).
    for (int v1 : {1, -1})
        for (int w2 : {1, -1})
            for (int v2 : {1, -1}) {
                CMat Pi[3] = {projector(s.V(), v1), projector(s.W(), w2), projector(s.V(), v2)};
                for (int mask = 0; mask < 8; ++mask) {
                    WeakRun run;
                    for (int i = 0; i < 3; ++i) run.detectors.push_back(mask >> i & 1 ? base[i].rotated() : base[i]);
                    const Detector &da = run.detectors[0], &db = run.detectors[1], &dc = run.detectors[2];
                    const std::size_t na = da.x.size(), nb = db.x.size(), nc = dc.x.size();
                    run.probabilities.assign(2 * na * nb * nc, 0.0);
                    // rho, weak Pi_v1, U, weak Pi^W_w2, U^dag, weak Pi_v2, U, strong W.
                    for (std::size_t x = 0; x < na; ++x) {
                        CMat s1 = mul(mul(U, sandwich(kraus(da, x, Pi[0]), s.rho().matrix())), U.adjoint());
                        for (std::size_t y = 0; y < nb; ++y) {
                            CMat s2 = mul(mul(U.adjoint(), sandwich(kraus(db, y, Pi[1]), s1)), U);
                            for (std::size_t z = 0; z < nc; ++z) {
                                CMat s3 = mul(mul(U, sandwich(kraus(dc, z, Pi[2]), s2)), U.adjoint());
                                for (int iw3 = 0; iw3 < 2; ++iw3)
                                    run.probabilities[((iw3 * na + x) * nb + y) * nc + z] = prob(PW[iw3], s3);
                            }
                        }
                    }
                    st.runs.push_back(std::move(run));
                }
            }
    for (int k = 0; k < 16; ++k) {
        auto [v1, w2, v2, w3] = CoarseTable::signs(k);
        int r = 8 * (4 * (v1 < 0) + 2 * (w2 < 0) + (v2 < 0));
        cplx comb = 0.0;
        for (int mask = 0; mask < 8; ++mask) {
            const WeakRun& run = st.runs[r + mask];
            const Detector &da = run.detectors[0], &db = run.detectors[1], &dc = run.detectors[2];
            const std::size_t na = da.x.size(), nb = db.x.size(), nc = dc.x.size();
            double S = 0.0;
            for (std::size_t x = 0; x < na; ++x)
                for (std::size_t y = 0; y < nb; ++y)
                    for (std::size_t z = 0; z < nc; ++z)
                        S += da.x[x] * db.x[y] * dc.x[z] *
                             run.probabilities[(((w3 < 0) * na + x) * nb + y) * nc + z];
            // Per detector (S(g) - i S(ig)) / 2 keeps only the ket-side insertion.
            cplx w = 1.0;
            for (int i = 0; i < 3; ++i) w *= (mask >> i & 1) ? cplx(0.0, -0.5) : cplx(0.5, 0.0);
            comb += w * S;
        }
        st.signal[k] = comb;
    }
    return st;
}

CoarseTable infer_quasiprob_from_weak(const WeakStatistics& stats) {
    if (!(stats.g > 0)) throw std::invalid_argument("infer_quasiprob_from_weak: zero coupling carries no signal");
    CoarseTable t;
    if (stats.weak_count == 2) {
        const double scale = 4.0 * stats.g * stats.g;
        for (int k = 0; k < 16; ++k) {
            auto [v1, w2, v2, w3] = CoarseTable::signs(k);
            // Both insertions on the same side when v1 = v2 and w2 = w3.
            double T2 = (v1 == v2 && w2 == w3) ? stats.background[k] : 0.0;
            t.values[k] = cplx(stats.signal[k].real() / scale - T2, -stats.signal[k].imag() / scale);
        }
    } else if (stats.weak_count == 3) {
        const double g0 = std::sqrt(2.0) * stats.g;
        for (int k = 0; k < 16; ++k) t.values[k] = stats.signal[k] / (g0 * g0 * g0);
    } else {
        throw std::invalid_argument("infer_quasiprob_from_weak: weak_count must be 2 or 3");
    }
    return t;
}

std::array<cplx, 16> weak_correlator(const OtocSetting& s, double t, const Detector& a, const Detector& b) {
    require_mixed(s);
    if (!s.involutory()) throw std::invalid_argument("weak measurement: W and V must square to the identity");
    a.validate();
    b.validate();
    CMat U = s.U(t);
    std::array<cplx, 16> out{};
    const std::size_t na = a.x.size(), nb = b.x.size();
    for (int v1 : {1, -1})
        for (int w2 : {1, -1}) {
            WeakRun run = two_weak_run(s, U, a, b, v1, w2);
            for (int v2 : {1, -1})
                for (int w3 : {1, -1}) {
                    double acc = 0.0;
                    for (std::size_t x = 0; x < na; ++x)
                        for (std::size_t y = 0; y < nb; ++y)
                            acc += a.x[x] * b.x[y] * run.probabilities[(((w3 < 0) * na + x) * nb + y) * 2 + (v2 < 0)];
                    out[CoarseTable::index(v1, w2, v2, w3)] = acc;
                }
        }
    return out;
}

InterferenceEstimate interference_inner_product(const CMat& U, const CVec& a, const CVec& b, std::uint64_t shots,
                                                SeededRng& rng) {
    const Eigen::Index d = U.rows();
    if (U.cols() != d || a.size() != d || b.size() != d)
        throw std::invalid_argument("interference_inner_product: dimension mismatch");
    if (std::abs(a.norm() - 1.0) > 1e-10 || std::abs(b.norm() - 1.0) > 1e-10)
        throw std::invalid_argument("interference_inner_product: states must be normalized");
    // Ancilla (|0> U|b> + |1> |a>)/sqrt(2), rotated by exp(-i theta sigma/2) with theta = pi/2,
    // then ancilla 0 and system a are detected.
    CVec Ub = U * b;
    const double c = std::cos(std::numbers::pi / 4), sn = std::sin(std::numbers::pi / 4);
    const cplx r0 = a.dot(Ub) / std::sqrt(2.0), r1 = a.dot(a) / std::sqrt(2.0);
    // sigma^x rotation: <0|R|0> = c, <0|R|1> = -i s; sigma^y rotation: <0|R|1> = -s.
    double px = std::norm(c * r0 + cplx(0.0, -sn) * r1);
    double py = std::norm(c * r0 - sn * r1);
    double pa = std::norm(a.dot(Ub));
    InterferenceEstimate e;
    if (shots > 0) {
        auto draw = [&](double p) {
            std::binomial_distribution<std::uint64_t> bin(shots, std::clamp(p, 0.0, 1.0));
            return double(bin(rng.engine())) / double(shots);
        };
        px = draw(px);
        py = draw(py);
        pa = draw(pa);
        const double n = double(shots);
        auto var = [&](double p) { return p * (1.0 - p) / n; };
        e.se_im = std::sqrt(4.0 * var(px) + 0.25 * var(pa));
        e.se_re = std::sqrt(4.0 * var(py) + 0.25 * var(pa));
    }
    e.p_x = px;
    e.p_y = py;
    e.p_abs2 = pa;
    e.z = cplx(0.5 * (pa + 1.0) - 2.0 * py, 0.5 * (pa + 1.0) - 2.0 * px);
    return e;
}

namespace {

// sum over eigen-tuples of obs[order[0]], obs[order[1]], ... of
// <f|k> lambda_k <k| ... |a> lambda_a <a| start, applied in `order`.
cplx chain_sum(const std::vector<SpectralDecomposition>& sp, const std::vector<std::size_t>& order, const CVec& start,
               const CVec& f) {
    auto rec = [&](auto&& self, std::size_t level, const CVec& v) -> cplx {
        if (level == order.size()) return f.dot(v);
        const SpectralDecomposition& s = sp[order[level]];
        cplx acc = 0.0;
        for (Eigen::Index e = 0; e < s.dim(); ++e) {
            CVec basis = s.vectors.col(e);
            cplx amp = basis.dot(v) * s.values(e);
            if (amp == cplx(0.0)) continue;
            acc += self(self, level + 1, CVec(amp * basis));
        }
        return acc;
    };
    return rec(rec, 0, start);
}

}  // namespace

RetrodictionResult weak_value_retrodiction(const RetrodictionProblem& p, RetrodictionMode mode) {
    const Eigen::Index d = p.rho_prime.rows();
    if (p.observables.empty()) throw std::invalid_argument("retrodiction: at least one observable required");
    if (p.rho_prime.cols() != d || p.f_prime.size() != d)
        throw std::invalid_argument("retrodiction: dimension mismatch");
    for (const CMat& o : p.observables) {
        if (o.rows() != d || o.cols() != d) throw std::invalid_argument("retrodiction: dimension mismatch");
        if (max_asymmetry(o) > kHermTol * std::max(1.0, max_abs(o)))
            throw std::invalid_argument("retrodiction: observables must be Hermitian");
    }
    const double norm = p.f_prime.dot(p.rho_prime * p.f_prime).real();
    if (norm < 1e-12) throw std::invalid_argument("retrodiction: outcome probability below 1e-12");

    // K...A and A...K
    CMat fwd = p.observables.front(), bwd = p.observables.front();
    for (std::size_t i = 1; i < p.observables.size(); ++i) {
        fwd = mul(p.observables[i], fwd);
        bwd = mul(bwd, p.observables[i]);
    }
    CMat Gamma = p.antisymmetric ? CMat(cplx(0.0, 1.0) * (fwd - bwd)) : CMat(fwd + bwd);
    RVec ev = eigvalsh(0.5 * (Gamma + Gamma.adjoint()));

    RetrodictionResult r;
    r.min_eigenvalue = ev.minCoeff();
    r.max_eigenvalue = ev.maxCoeff();
    if (mode == RetrodictionMode::Conventional) {
        r.gamma_weak = p.f_prime.dot(Gamma * (p.rho_prime * p.f_prime)).real() / norm;
    } else {
        std::vector<SpectralDecomposition> sp;
        for (const CMat& o : p.observables) sp.push_back(eigh(o));
        std::vector<std::size_t> order(p.observables.size()), rev;
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        rev.assign(order.rbegin(), order.rend());
        CVec start = p.rho_prime * p.f_prime;
        cplx Xf = chain_sum(sp, order, start, p.f_prime);  // <f'|K...A rho'|f'>
        cplx Xb = chain_sum(sp, rev, start, p.f_prime);    // <f'|A...K rho'|f'>
        r.gamma_weak = (p.antisymmetric ? -Xf.imag() + Xb.imag() : Xf.real() + Xb.real()) / norm;
    }
    r.anomalous = r.gamma_weak < r.min_eigenvalue - 1e-12 || r.gamma_weak > r.max_eigenvalue + 1e-12;
    return r;
}

StateDecomposition state_decomposition(const OtocSetting& s, double t, const FineBases& b, double overlap_tol) {
    FineTable f = fine_quasiprob(s, t, b);
    const Eigen::Index d = f.d;
    CMat U = s.U(t);
    StateDecomposition out;
    out.coefficients = CMat::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j)
            for (Eigen::Index k = 0; k < d; ++k)
                for (Eigen::Index l = 0; l < d; ++l) out.coefficients(k, l) += f.at(i, j, k, l);
    out.overlaps = (b.w_vectors.adjoint() * U * b.v_vectors).transpose();  // (v2, w3) -> <w3|U|v2>
    out.rho_prime = CMat::Zero(d, d);
    CMat wU = b.w_vectors.adjoint() * U;  // row l: <w_l| U
    for (Eigen::Index k = 0; k < d; ++k)
        for (Eigen::Index l = 0; l < d; ++l) {
            cplx ov = out.overlaps(k, l);
            if (std::abs(ov) <= overlap_tol) {
                ++out.removed;
                continue;
            }
            out.rho_prime.noalias() += (out.coefficients(k, l) / ov) * b.v_vectors.col(k) * wU.row(l);
        }
    return out;
}

}  // namespace qtk
