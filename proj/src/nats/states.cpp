#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>

#include "qtk/nats.hpp"
#include "qtk/parallel.hpp"

namespace qtk {

namespace {

CMat hermitize(const CMat& a) { return 0.5 * (a + a.adjoint()); }

double expectation(const CMat& rho, const CMat& Q) { return (rho.cwiseProduct(Q.transpose())).sum().real(); }

struct Thermal {
    Nats nats;
    SpectralDecomposition spec;
    RVec p;  // Boltzmann weights in the eigenbasis of the exponent
};

Thermal thermal(const ChargeSet& q, const std::vector<double>& mu) {
    if (mu.size() != q.size()) throw std::invalid_argument("build_nats: one potential per charge required");
    const Eigen::Index d = q.dim();
    CMat K = CMat::Zero(d, d);
    for (std::size_t j = 0; j < q.size(); ++j) K += mu[j] * q.charges[j];
    K = hermitize(K);
    Thermal t;
    t.spec = eigh(K);
    const double lo = t.spec.values(0);
    t.p = (-(t.spec.values.array() - lo)).exp();
    const double s = t.p.sum();
    t.p /= s;
    Nats& n = t.nats;
    n.log_Z = -lo + std::log(s);
    n.Z = std::exp(n.log_Z);
    n.mu = mu;
    n.work = K;
    CMat g = t.spec.vectors * t.p.cast<cplx>().asDiagonal() * t.spec.vectors.adjoint();
    n.gamma = DensityMatrix(hermitize(g));
    for (const CMat& Q : q.charges) n.v.push_back(expectation(n.gamma.matrix(), Q));
    return t;
}

double residual_norm(const std::vector<double>& a, const std::vector<double>& b) {
    double r = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) r = std::max(r, std::abs(a[j] - b[j]));
    return r;
}

}  // namespace

void ChargeSet::validate() const {
    if (charges.empty()) throw std::invalid_argument("ChargeSet: at least one operator required");
    const Eigen::Index d = dim();
    if (d < 1) throw std::invalid_argument("ChargeSet: empty operator");
    for (const CMat& Q : charges) {
        if (Q.rows() != d || Q.cols() != d) throw std::invalid_argument("ChargeSet: operators must share one square dimension");
        if (max_abs(Q - Q.adjoint()) > 1e-10) throw std::invalid_argument("ChargeSet: operators must be Hermitian");
    }
    const Eigen::Index c = Eigen::Index(charges.size());
    RMat gram(c, c);
    for (Eigen::Index i = 0; i < c; ++i)
        for (Eigen::Index j = 0; j < c; ++j) gram(i, j) = expectation(charges[i], charges[j]);
    RVec ev = eigh_real(gram, false).values;
    if (ev(0) <= 1e-10 * std::max(1.0, ev(c - 1)))
        throw std::invalid_argument("ChargeSet: operators are linearly dependent");
}

ChargeSet ChargeSet::spin_half() { return ChargeSet{{pauli::X(), pauli::Y(), pauli::Z()}}; }

Nats build_nats(const ChargeSet& q, const std::vector<double>& mu) {
    q.validate();
    return thermal(q, mu).nats;
}

std::vector<double> solve_potentials(const ChargeSet& q, const std::vector<double>& v) {
    q.validate();
    const std::size_t c = q.size();
    if (v.size() != c) throw std::invalid_argument("solve_potentials: one target per charge required");
    std::vector<double> mu(c, 0.0), best_mu = mu;
    Thermal t = thermal(q, mu);
    double res = residual_norm(t.nats.v, v), best = res;
    const Eigen::Index d = q.dim();
    for (int it = 0; it < 200 && res > 1e-13; ++it) {
        // Kubo-Mori covariance in the eigenbasis of the exponent; d<Q_j>/dmu_k = -cov_jk.
        std::vector<CMat> qt;
        for (const CMat& Q : q.charges) qt.push_back(t.spec.vectors.adjoint() * Q * t.spec.vectors);
        RMat k(d, d);
        for (Eigen::Index a = 0; a < d; ++a)
            for (Eigen::Index b = 0; b < d; ++b) {
                double la = t.spec.values(a), lb = t.spec.values(b);
                if (std::abs(la - lb) < 1e-10)
                    k(a, b) = 0.5 * (t.p(a) + t.p(b));
                else
                    k(a, b) = (t.p(a) - t.p(b)) / (lb - la);
            }
        RMat cov(c, c);
        for (std::size_t i = 0; i < c; ++i)
            for (std::size_t j = i; j < c; ++j) {
                double s = 0.0;
                for (Eigen::Index a = 0; a < d; ++a)
                    for (Eigen::Index b = 0; b < d; ++b) s += (qt[i](a, b) * qt[j](b, a)).real() * k(a, b);
                cov(i, j) = cov(j, i) = s - t.nats.v[i] * t.nats.v[j];
            }
        RVec r(c);
        for (std::size_t j = 0; j < c; ++j) r(j) = t.nats.v[j] - v[j];
        RVec step = cov.completeOrthogonalDecomposition().solve(r);
        bool improved = false;
        for (double lambda = 1.0; lambda > 1e-10; lambda *= 0.5) {
            std::vector<double> trial(c);
            for (std::size_t j = 0; j < c; ++j) trial[j] = mu[j] + lambda * step(j);
            Thermal tt = thermal(q, trial);
            double rr = residual_norm(tt.nats.v, v);
            if (rr < res) {
                mu = trial;
                t = std::move(tt);
                res = rr;
                improved = true;
                break;
            }
        }
        if (res < best) {
            best = res;
            best_mu = mu;
        }
        if (!improved) break;
    }
    if (best > 1e-9) {
        std::ostringstream msg;
        msg << "solve_potentials: residual stalled at " << best << " (targets infeasible?)";
        throw PotentialSolveError(msg.str(), best);
    }
    return best_mu;
}

double spectral_diameter(const CMat& Q) {
    RVec ev = eigvalsh(hermitize(Q));
    return ev(ev.size() - 1) - ev(0);
}

CMat averaged_charge(const CMat& Q, int N) {
    if (N < 1) throw std::invalid_argument("averaged_charge: N >= 1 required");
    const int d = int(Q.rows());
    double total = std::pow(double(d), N);
    if (total > 4096) throw std::invalid_argument("averaged_charge: d^N exceeds 4096");
    const Eigen::Index D = Eigen::Index(std::llround(total));
    CMat out = CMat::Zero(D, D);
    for (int l = 0; l < N; ++l) out += embed(Q, l, N, d);
    return out / double(N);
}

BandProjector band_projector(const CMat& Qbar, double v, double half_width) {
    if (!(half_width > 0)) throw std::invalid_argument("band_projector: half-width must be positive");
    SpectralDecomposition s = eigh(hermitize(Qbar));
    const double tol = 1e-10 * std::max(1.0, s.values.cwiseAbs().maxCoeff());
    std::vector<Eigen::Index> keep;
    for (Eigen::Index k = 0; k < s.dim(); ++k)
        if (s.values(k) >= v - half_width - tol && s.values(k) <= v + half_width + tol) keep.push_back(k);
    BandProjector b;
    b.rank = Eigen::Index(keep.size());
    b.empty = keep.empty();
    CMat V(s.dim(), b.rank);
    for (Eigen::Index i = 0; i < b.rank; ++i) V.col(i) = s.vectors.col(keep[i]);
    b.P = V * V.adjoint();
    return b;
}

AmcSubspace amc_subspace(const ChargeSet& q, const std::vector<double>& v, int N, double eta) {
    q.validate();
    if (v.size() != q.size()) throw std::invalid_argument("amc_subspace: one target per charge required");
    if (!(eta > 0)) throw std::invalid_argument("amc_subspace: eta must be positive");
    AmcSubspace M;
    M.N = N;
    M.eta = eta;
    M.v = v;
    M.d = q.dim();
    CMat Dev;
    for (std::size_t j = 0; j < q.size(); ++j) {
        double sigma = spectral_diameter(q.charges[j]);
        if (!(sigma > 0)) throw std::invalid_argument("amc_subspace: charge with zero spectral diameter");
        CMat qb = averaged_charge(q.charges[j], N);
        CMat shifted = (qb - v[j] * CMat::Identity(qb.rows(), qb.cols())) / sigma;
        CMat sq = shifted * shifted;
        Dev = j == 0 ? sq : CMat(Dev + sq);
        M.qbar.push_back(std::move(qb));
    }
    SpectralDecomposition s = eigh(hermitize(Dev));
    M.deviations = s.values;
    const double cut = double(q.size()) * eta * eta * (1.0 + 1e-12) + 1e-12;
    Eigen::Index k = 0;
    while (k < s.dim() && s.values(k) <= cut) ++k;
    if (k == 0) {
        std::ostringstream msg;
        msg << "amc_subspace: empty subspace; smallest deviation eigenvalue " << s.values(0) << " exceeds " << cut;
        throw std::invalid_argument(msg.str());
    }
    M.basis = s.vectors.leftCols(k);
    return M;
}

void AmcParams::validate(std::size_t charge_count) const {
    if (!(eta > eta_p && eta_p > 0)) throw std::invalid_argument("AmcParams: eta > eta' > 0 required");
    if (!(eps > double(charge_count) * delta_p && delta_p > 0))
        throw std::invalid_argument("AmcParams: eps > (c+1) delta' > 0 required");
    if (!(delta > 0)) throw std::invalid_argument("AmcParams: delta > 0 required");
}

Condition2 amc_condition2(const AmcSubspace& M, const ChargeSet& q, const CMat& omega, const AmcParams& p) {
    p.validate(q.size());
    Condition2 c;
    c.hypothesis = true;
    for (std::size_t j = 0; j < q.size(); ++j) {
        BandProjector b = band_projector(M.qbar[j], M.v[j], p.eta_p * spectral_diameter(q.charges[j]));
        if (expectation(omega, b.P) < 1.0 - p.delta_p) {
            c.hypothesis = false;
            break;
        }
    }
    c.overlap = (M.basis.adjoint() * omega * M.basis).trace().real();
    c.holds = !c.hypothesis || c.overlap >= 1.0 - p.eps;
    return c;
}

AmcReport amc_conditions_check(const AmcSubspace& M, const ChargeSet& q, const AmcParams& p, std::size_t samples,
                               SeededRng& rng) {
    if (M.size() == 0) throw std::invalid_argument("amc_conditions_check: empty subspace");
    p.validate(q.size());
    std::vector<CMat> wide, narrow;
    for (std::size_t j = 0; j < q.size(); ++j) {
        double sigma = spectral_diameter(q.charges[j]);
        wide.push_back(band_projector(M.qbar[j], M.v[j], p.eta * sigma).P);
        narrow.push_back(band_projector(M.qbar[j], M.v[j], p.eta_p * sigma).P);
    }
    AmcReport r;
    auto cond1 = [&](const CVec& psi) {
        for (const CMat& P : wide) r.cond1_worst = std::min(r.cond1_worst, (psi.adjoint() * P * psi)(0).real());
    };
    for (std::size_t s = 0; s < samples; ++s) cond1(haar_in_subspace(M.basis, rng));
    for (Eigen::Index k = 0; k < M.size(); ++k) cond1(M.basis.col(k));
    r.cond1_margin = r.cond1_worst - (1.0 - p.delta);
    r.cond1_holds = r.cond1_margin >= -1e-12;

    // Peaked candidates: Haar states in the narrow a.m.c. subspace and joint band eigenvectors.
    std::vector<CVec> candidates;
    try {
        AmcSubspace Mn = amc_subspace(q, M.v, M.N, p.eta_p);
        for (std::size_t s = 0; s < samples; ++s) candidates.push_back(haar_in_subspace(Mn.basis, rng));
        for (Eigen::Index k = 0; k < Mn.size(); ++k) candidates.push_back(Mn.basis.col(k));
    } catch (const std::invalid_argument&) {
    }
    for (const CMat& P : narrow) {
        SpectralDecomposition s = eigh(hermitize(P));
        for (Eigen::Index k = 0; k < s.dim(); ++k)
            if (s.values(k) > 0.5) candidates.push_back(s.vectors.col(k));
    }
    for (const CVec& psi : candidates) {
        bool peaked = true;
        for (const CMat& P : narrow)
            if ((psi.adjoint() * P * psi)(0).real() < 1.0 - p.delta_p) {
                peaked = false;
                break;
            }
        if (!peaked) continue;
        ++r.cond2_states;
        r.cond2_worst = std::min(r.cond2_worst, (M.basis.adjoint() * psi).squaredNorm());
    }
    r.cond2_vacuous = r.cond2_states == 0;
    r.cond2_margin = r.cond2_worst - (1.0 - p.eps);
    r.cond2_holds = r.cond2_margin >= -1e-12;
    return r;
}

namespace {

std::vector<int> copy_dims(const AmcSubspace& M) { return std::vector<int>(std::size_t(M.N), int(M.d)); }

}  // namespace

MicrocanonicalReduction microcanonical_reduction(const AmcSubspace& M, const DensityMatrix& gamma) {
    if (M.size() == 0) throw std::invalid_argument("microcanonical_reduction: empty subspace");
    if (gamma.dim() != M.d) throw std::invalid_argument("microcanonical_reduction: gamma dimension mismatch");
    const CMat omega = M.projector() / double(M.size());
    const auto dims = copy_dims(M);
    MicrocanonicalReduction r;
    r.pinsker_margin = std::numeric_limits<double>::infinity();
    for (int l = 0; l < M.N; ++l) {
        CMat o = partial_trace(omega, {l}, dims);
        double D = relative_entropy(o, gamma.matrix());
        double td = trace_norm(o - gamma.matrix());
        r.D.push_back(D);
        r.trace_distance.push_back(td);
        r.mean_D += D / double(M.N);
        r.max_trace_distance = std::max(r.max_trace_distance, td);
        r.pinsker_margin = std::min(r.pinsker_margin, D - 0.5 * td * td);
    }
    return r;
}

TypicalityResult typicality_probe(const AmcSubspace& M, const DensityMatrix& gamma, double mean_D, std::size_t shots,
                                  SeededRng& rng) {
    if (shots < 100) throw std::invalid_argument("typicality_probe: at least 100 shots required");
    if (M.size() == 0) throw std::invalid_argument("typicality_probe: empty subspace");
    if (gamma.dim() != M.d) throw std::invalid_argument("typicality_probe: gamma dimension mismatch");
    const auto dims = copy_dims(M);
    const std::uint64_t base = rng.next_u64();
    std::vector<double> dist = parallel_map<double>(shots, default_threads(), [&](std::size_t s) {
        SeededRng r(base, s);
        CVec psi = haar_in_subspace(M.basis, r);
        CMat rho = psi * psi.adjoint();
        double acc = 0.0;
        for (int l = 0; l < M.N; ++l) acc += trace_norm(partial_trace(rho, {l}, dims) - gamma.matrix());
        return acc / double(M.N);
    });
    TypicalityResult t;
    for (double x : dist) t.mean += x;
    t.mean /= double(shots);
    double var = 0.0;
    for (double x : dist) var += (x - t.mean) * (x - t.mean);
    t.se = std::sqrt(var / double(shots - 1) / double(shots));
    t.bound = double(M.d) / std::sqrt(double(M.size())) + std::sqrt(2.0 * std::max(0.0, mean_D));
    return t;
}

}  // namespace qtk
