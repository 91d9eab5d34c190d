#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "qtk/nats.hpp"

namespace qtk {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Eigenvalues below this count as outside the support.
constexpr double kSupport = 1e-14;

CMat hermitize(const CMat& a) { return 0.5 * (a + a.adjoint()); }

double clamp_prob(double x) { return x < 0 ? 0.0 : x; }

// Returns +inf when sigma misses part of rho's support, where negative powers of sigma diverge.
bool support_contained(const SpectralDecomposition& r, const SpectralDecomposition& s) {
    for (Eigen::Index k = 0; k < s.dim(); ++k) {
        if (s.values(k) > kSupport) continue;
        const CVec& sk = s.vectors.col(k);
        double w = 0.0;
        for (Eigen::Index a = 0; a < r.dim(); ++a)
            if (r.values(a) > kSupport) w += r.values(a) * std::norm(r.vectors.col(a).dot(sk));
        if (w > 1e-12) return false;
    }
    return true;
}

}  // namespace

double relative_entropy(const CMat& rho, const CMat& sigma) {
    if (rho.rows() != sigma.rows()) throw std::invalid_argument("relative_entropy: dimension mismatch");
    SpectralDecomposition r = eigh(hermitize(rho)), s = eigh(hermitize(sigma));
    if (!support_contained(r, s)) return kInf;
    double a = 0.0;
    for (Eigen::Index k = 0; k < r.dim(); ++k)
        if (r.values(k) > kSupport) a += r.values(k) * std::log(r.values(k));
    CMat rs = s.vectors.adjoint() * hermitize(rho) * s.vectors;
    double b = 0.0;
    for (Eigen::Index k = 0; k < s.dim(); ++k)
        if (s.values(k) > kSupport) b += rs(k, k).real() * std::log(s.values(k));
    return a - b;
}

double renyi_divergence(const std::vector<double>& p, const std::vector<double>& q, double alpha) {
    if (p.size() != q.size() || p.empty()) throw std::invalid_argument("renyi_divergence: size mismatch");
    if (!(alpha >= 0)) throw std::invalid_argument("renyi_divergence: alpha >= 0 required");
    for (std::size_t k = 0; k < p.size(); ++k)
        if (p[k] < -1e-12 || q[k] < -1e-12) throw std::invalid_argument("renyi_divergence: negative probability");
    if (alpha == 0.0) {
        double s = 0.0;
        for (std::size_t k = 0; k < p.size(); ++k)
            if (p[k] > kSupport) s += clamp_prob(q[k]);
        return s > 0 ? -std::log(s) : kInf;
    }
    if (alpha == 1.0) {
        double s = 0.0;
        for (std::size_t k = 0; k < p.size(); ++k) {
            if (p[k] <= kSupport) continue;
            if (q[k] <= 0) return kInf;
            s += p[k] * std::log(p[k] / q[k]);
        }
        return s;
    }
    double s = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        if (p[k] <= kSupport) continue;
        if (q[k] <= 0) {
            if (alpha > 1) return kInf;
            continue;
        }
        s += std::pow(p[k], alpha) * std::pow(q[k], 1.0 - alpha);
    }
    if (s <= 0) return kInf;
    return std::log(s) / (alpha - 1.0);
}

double petz_renyi(const CMat& rho, const CMat& sigma, double alpha) {
    if (!(alpha >= 0)) throw std::invalid_argument("petz_renyi: alpha >= 0 required");
    if (alpha == 1.0) return relative_entropy(rho, sigma);
    SpectralDecomposition r = eigh(hermitize(rho)), s = eigh(hermitize(sigma));
    if (alpha > 1 && !support_contained(r, s)) return kInf;
    auto power = [](double e) {
        return [e](double x) { return x > kSupport ? (e == 0.0 ? 1.0 : std::pow(x, e)) : 0.0; };
    };
    CMat ra = apply_function(r, power(alpha)), sb = apply_function(s, power(1.0 - alpha));
    double t = (ra * sb).trace().real();
    if (t <= 0) return kInf;
    return std::log(t) / (alpha - 1.0);
}

double sandwiched_renyi(const CMat& rho, const CMat& sigma, double alpha) {
    if (!(alpha > 0)) throw std::invalid_argument("sandwiched_renyi: alpha > 0 required");
    if (alpha == 1.0) return relative_entropy(rho, sigma);
    SpectralDecomposition r = eigh(hermitize(rho)), s = eigh(hermitize(sigma));
    if (alpha > 1 && !support_contained(r, s)) return kInf;
    const double e = (1.0 - alpha) / (2.0 * alpha);
    CMat se = apply_function(s, [e](double x) { return x > kSupport ? std::pow(x, e) : 0.0; });
    SpectralDecomposition m = eigh(hermitize(se * hermitize(rho) * se));
    double t = 0.0;
    for (Eigen::Index k = 0; k < m.dim(); ++k)
        if (m.values(k) > kSupport) t += std::pow(m.values(k), alpha);
    if (t <= 0) return kInf;
    return std::log(t) / (alpha - 1.0);
}

std::pair<std::vector<double>, std::vector<double>> work_basis_distributions(const CMat& rho, const Nats& g) {
    if (rho.rows() != g.work.rows()) throw std::invalid_argument("work_basis_distributions: dimension mismatch");
    SpectralDecomposition w = eigh(g.work);
    CMat rr = w.vectors.adjoint() * rho * w.vectors;
    CMat gg = w.vectors.adjoint() * g.gamma.matrix() * w.vectors;
    std::vector<double> p, q;
    for (Eigen::Index k = 0; k < w.dim(); ++k) {
        if (k == 0 || w.values(k) - w.values(k - 1) > 1e-9) {
            p.push_back(0.0);
            q.push_back(0.0);
        }
        p.back() += rr(k, k).real();
        q.back() += gg(k, k).real();
    }
    return {p, q};
}

double free_energy(const CMat& rho, const Nats& g, double alpha, double T) {
    auto [p, q] = work_basis_distributions(rho, g);
    return T * renyi_divergence(p, q, alpha) - T * g.log_Z;
}

double free_energy_petz(const CMat& rho, const Nats& g, double alpha, double T) {
    return T * petz_renyi(rho, g.gamma.matrix(), alpha) - T * g.log_Z;
}

double free_energy_sandwiched(const CMat& rho, const Nats& g, double alpha, double T) {
    return T * sandwiched_renyi(rho, g.gamma.matrix(), alpha) - T * g.log_Z;
}

PassivityResult passivity_check(const CMat& rho, const CMat& W, int n) {
    if (n < 1 || n > 3) throw std::invalid_argument("passivity_check: 1 <= n <= 3 required");
    if (rho.rows() != W.rows()) throw std::invalid_argument("passivity_check: dimension mismatch");
    const int d = int(rho.rows());
    if (std::pow(double(d), n) > 512) throw std::invalid_argument("passivity_check: d^n exceeds 512");
    CMat rn = rho;
    for (int k = 1; k < n; ++k) rn = kron(rn, rho);
    rn = hermitize(rn);
    CMat wt = CMat::Zero(rn.rows(), rn.cols());
    for (int l = 0; l < n; ++l) wt += embed(W, l, n, d);
    wt = hermitize(wt);

    PassivityResult res;
    res.commutator = max_abs(rn * wt - wt * rn);
    // Joint basis: diagonalize rho within each degenerate block of W_tot.
    SpectralDecomposition ws = eigh(wt);
    CMat basis = ws.vectors;
    const Eigen::Index D = ws.dim();
    for (Eigen::Index a = 0; a < D;) {
        Eigen::Index b = a + 1;
        while (b < D && ws.values(b) - ws.values(a) <= 1e-9) ++b;
        if (b - a > 1) {
            CMat blk = basis.middleCols(a, b - a);
            SpectralDecomposition s = eigh(hermitize(blk.adjoint() * rn * blk));
            basis.middleCols(a, b - a) = blk * s.vectors;
        }
        a = b;
    }
    CMat r = basis.adjoint() * rn * basis;
    bool ordered = true;
    for (Eigen::Index k = 0; k < D; ++k)
        for (Eigen::Index l = 0; l < D; ++l)
            if (ws.values(k) < ws.values(l) - 1e-9 && r(k, k).real() < r(l, l).real() - 1e-12) ordered = false;
    res.passive = res.commutator <= 1e-10 && ordered;
    if (res.passive) return res;

    // Best two-level rotation: sort the 2x2 block's eigenvalues against the two energies.
    double best = 0.0;
    for (Eigen::Index k = 0; k < D; ++k)
        for (Eigen::Index l = 0; l < D; ++l) {
            double wk = ws.values(k), wl = ws.values(l);
            if (!(wk < wl - 1e-9)) continue;
            CMat blk(2, 2);
            blk << r(k, k), r(k, l), r(l, k), r(l, l);
            SpectralDecomposition s = eigh(hermitize(blk));
            double before = wk * r(k, k).real() + wl * r(l, l).real();
            double after = wk * s.values(1) + wl * s.values(0);
            double drop = before - after;
            if (drop > best) {
                best = drop;
                PassivityWitness w;
                w.a = basis.col(k);
                w.b = basis.col(l);
                CMat E(2, 2);
                E.col(0) = s.vectors.col(1);
                E.col(1) = s.vectors.col(0);
                w.rotation = E.adjoint();
                w.energy_drop = drop;
                res.witness = w;
            }
        }
    return res;
}

CMat NatoChannel::apply(const CMat& rho) const {
    if (rho.rows() != dS) throw std::invalid_argument("NatoChannel: input dimension mismatch");
    if (trivial) return rho;
    CMat joint = U * kron(rho, gamma_R) * U.adjoint();
    return partial_trace(joint, {0}, {int(dS), int(dR)});
}

NatoSampler::NatoSampler(const ChargeSet& system, const ChargeSet& reservoir, const std::vector<double>& mu)
    : sys_(build_nats(system, mu)), res_(build_nats(reservoir, mu)), dS_(system.dim()), dR_(reservoir.dim()) {
    if (system.size() != reservoir.size())
        throw std::invalid_argument("NatoSampler: system and reservoir need matching charge lists");
    const Eigen::Index d = dS_ * dR_;
    if (d > 256) throw std::invalid_argument("NatoSampler: joint dimension exceeds 256");
    const CMat IS = CMat::Identity(dS_, dS_), IR = CMat::Identity(dR_, dR_);
    for (std::size_t j = 0; j < system.size(); ++j)
        totals_.push_back(kron(system.charges[j], IR) + kron(IS, reservoir.charges[j]));

    if (d <= 32) {
        // Nullspace of X -> [C_j, X] for all j, from the Gram operator sum_j K_j^dag K_j on vec(X).
        const Eigen::Index dd = d * d;
        const CMat I = CMat::Identity(d, d);
        CMat L = CMat::Zero(dd, dd);
        for (const CMat& C : totals_) {
            CMat K = kron(C.transpose(), I) - kron(I, C);
            L.noalias() += K.adjoint() * K;
        }
        SpectralDecomposition s = eigh(hermitize(L));
        const double cut = 1e-9 * std::max(1.0, s.values(dd - 1));
        for (Eigen::Index k = 0; k < dd && s.values(k) <= cut; ++k)
            basis_.push_back(CMat::Map(s.vectors.col(k).data(), d, d));
    } else {
        pinching_ = true;
        for (const CMat& C : totals_) spec_.push_back(eigh(hermitize(C)));
    }
}

CMat NatoSampler::project(const CMat& G) const {
    if (!pinching_) {
        CMat out = CMat::Zero(G.rows(), G.cols());
        for (const CMat& B : basis_) out += (B.conjugate().cwiseProduct(G)).sum() * B;
        return hermitize(out);
    }
    // Alternating pinching onto each charge's eigenspaces converges to the joint commutant.
    CMat X = G;
    for (int it = 0; it < 10000; ++it) {
        double worst = 0.0;
        for (std::size_t j = 0; j < totals_.size(); ++j) {
            const SpectralDecomposition& s = spec_[j];
            CMat Y = s.vectors.adjoint() * X * s.vectors;
            for (Eigen::Index a = 0; a < s.dim(); ++a)
                for (Eigen::Index b = 0; b < s.dim(); ++b)
                    if (std::abs(s.values(a) - s.values(b)) > 1e-9) Y(a, b) = 0.0;
            X = s.vectors * Y * s.vectors.adjoint();
        }
        for (const CMat& C : totals_) worst = std::max(worst, max_abs(C * X - X * C));
        if (worst < 1e-12 * std::max(1.0, max_abs(X))) return hermitize(X);
    }
    throw std::runtime_error("NatoSampler: alternating pinching did not converge");
}

NatoChannel NatoSampler::sample(SeededRng& rng) const {
    NatoChannel ch;
    ch.dS = dS_;
    ch.dR = dR_;
    ch.gamma_R = res_.gamma.matrix();
    const Eigen::Index d = dS_ * dR_;
    CMat G = project(random_hermitian(d, rng));
    // Only multiples of the identity commute with everything: the channel is then the identity.
    CMat traceless = G - (G.trace() / double(d)) * CMat::Identity(d, d);
    ch.trivial = pinching_ ? max_abs(traceless) < 1e-10 : basis_.size() <= 1;
    if (ch.trivial) {
        ch.U = CMat::Identity(d, d);
        return ch;
    }
    SpectralDecomposition s = eigh(G);
    ch.U = s.vectors * (s.values.array() * cplx(0.0, 1.0)).exp().matrix().asDiagonal() * s.vectors.adjoint();
    return ch;
}

NatoChannel sample_nato_channel(const ChargeSet& system, const ChargeSet& reservoir, const std::vector<double>& mu,
                                SeededRng& rng) {
    return NatoSampler(system, reservoir, mu).sample(rng);
}

AuditReport second_law_audit(const CMat& rho, const Nats& gamma_S, const std::vector<NatoChannel>& channels,
                             const std::vector<double>& alphas) {
    AuditReport rep;
    const CMat& g = gamma_S.gamma.matrix();
    for (const NatoChannel& ch : channels) {
        CMat out = ch.apply(rho);
        rep.worst_trace_error = std::max(rep.worst_trace_error, std::abs(out.trace().real() - rho.trace().real()));
        rep.worst_fixed_point = std::max(rep.worst_fixed_point, trace_norm(ch.apply(g) - g));
        for (double a : alphas) {
            rep.worst_violation = std::max(rep.worst_violation, free_energy(out, gamma_S, a) - free_energy(rho, gamma_S, a));
            if (a <= 2.0)
                rep.worst_petz =
                    std::max(rep.worst_petz, free_energy_petz(out, gamma_S, a) - free_energy_petz(rho, gamma_S, a));
            if (a >= 0.5)
                rep.worst_sandwiched = std::max(
                    rep.worst_sandwiched, free_energy_sandwiched(out, gamma_S, a) - free_energy_sandwiched(rho, gamma_S, a));
        }
    }
    return rep;
}

}  // namespace qtk
