#include <cmath>
#include <stdexcept>

#include <Eigen/SVD>

#include "detail.hpp"
#include "qtk/parallel.hpp"
#include "qtk/quasiprob.hpp"

namespace qtk {

namespace {

using Mat4 = Eigen::Matrix4cd;

struct ShotSamples {
    bool kept = true;
    double max_drift = 0.0;
    std::vector<double> F, G;
    std::vector<std::array<double, 16>> A;
};

std::array<Mat4, 16> pair_paulis() {
    std::array<Mat4, 16> out;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) out[4 * a + b] = kron(pauli::by_index(a), pauli::by_index(b));
    return out;
}

// Rows of the 4-entry blocks a pair operator acts on: {r, r|bj, r|bi, r|bi|bj} for
// sites i < j, with site i the higher bit.
std::vector<std::array<Eigen::Index, 4>> pair_groups(int N, int i, int j) {
    const Eigen::Index bi = Eigen::Index(1) << (N - 1 - i), bj = Eigen::Index(1) << (N - 1 - j);
    std::vector<std::array<Eigen::Index, 4>> g;
    for (Eigen::Index r = 0; r < (Eigen::Index(1) << N); ++r)
        if (!(r & bi) && !(r & bj)) g.push_back({r, r | bj, r | bi, r | bi | bj});
    return g;
}

double unitarity_drift(const CMat& U) { return max_abs(U.adjoint() * U - CMat::Identity(U.rows(), U.cols())); }

// Unitary polar factor. Newton-Schulz steps U (3 - U^dag U) / 2 converge quadratically
// near the unitary group; the SVD covers anything farther away.
CMat polar(const CMat& U) {
    const Eigen::Index d = U.rows();
    CMat X = U, E(d, d);
    for (int it = 0; it < 20; ++it) {
        E.noalias() = X.adjoint() * X;
        E.diagonal().array() -= 1.0;
        double err = max_abs(E);
        if (err < 1e-14) return X;
        if (err > 0.5) break;
        X = X - 0.5 * (X * E);
    }
    Eigen::JacobiSVD<CMat> svd(U, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.matrixU() * svd.matrixV().adjoint();
}

}  // namespace

BrownianResult brownian_average(const BrownianConfig& cfg) {
    if (cfg.N < 2 || cfg.N > 6) throw std::invalid_argument("brownian_average: 2 <= N <= 6 required");
    if (!(cfg.dt > 0) || cfg.dt > 1e-3) throw std::invalid_argument("brownian_average: 0 < dt <= 1e-3 required");
    if (cfg.shots < 2) throw std::invalid_argument("brownian_average: at least two shots required");
    if (cfg.projection_interval < 1) throw std::invalid_argument("brownian_average: projection interval must be >= 1");
    const int N = cfg.N;
    const Eigen::Index d = Eigen::Index(1) << N;

    std::vector<std::size_t> sample_steps;
    for (double t : cfg.times) {
        double k = std::round(t / cfg.dt);
        if (t < 0 || std::abs(k * cfg.dt - t) > 1e-9 * std::max(1.0, t))
            throw std::invalid_argument("brownian_average: sample times must be nonnegative multiples of dt");
        if (!sample_steps.empty() && std::size_t(k) < sample_steps.back())
            throw std::invalid_argument("brownian_average: sample times must be ascending");
        sample_steps.push_back(std::size_t(k));
    }
    const std::size_t total_steps = sample_steps.empty() ? 0 : sample_steps.back();

    const auto paulis = pair_paulis();
    std::vector<std::vector<std::array<Eigen::Index, 4>>> groups;
    for (int i = 0; i < N; ++i)
        for (int j = i + 1; j < N; ++j) groups.push_back(pair_groups(N, i, j));
    const double sigma = std::sqrt(cfg.dt / (8.0 * (N - 1)));

    const CMat W = embed(pauli::Z(), 0, N, 2), V = embed(pauli::Z(), 1, N, 2);
    const RVec vdiag = V.diagonal().real();
    const RVec rdiag = RVec::Constant(d, 1.0 / double(d));

    auto shot = [&](std::size_t s) {
        SeededRng rng(cfg.seed, s);
        ShotSamples out;
        CMat U = CMat::Identity(d, d), next(d, d), G(d, d), acc(d, d);
        auto record = [&] {
            CMat X = U.adjoint() * W * U;
            CMat XV = X * V;
            out.F.push_back(detail::trace_product(XV, XV).real() / double(d));
            out.G.push_back(XV.trace().real() / double(d));
            CoarseTable t = detail::coarse_diagonal(X, vdiag, rdiag);
            std::array<double, 16> a{};
            for (int k = 0; k < 16; ++k) a[k] = t.values[k].real();
            out.A.push_back(a);
        };
        auto restore = [&] {
            double drift = unitarity_drift(U);
            out.max_drift = std::max(out.max_drift, drift);
            if (drift > cfg.drift_tolerance) out.kept = false;
            U = polar(U);
        };
        std::size_t next_sample = 0;
        while (next_sample < sample_steps.size() && sample_steps[next_sample] == 0) {
            record();
            ++next_sample;
        }
        for (std::size_t step = 1; step <= total_steps && out.kept; ++step) {
            // dB as a dense generator: the sum over pairs of local sigma^a sigma^b dB^{ab}.
            G.setZero();
            for (const auto& gs : groups) {
                Mat4 L = Mat4::Zero();
                for (const Mat4& P : paulis) L += (sigma * rng.normal()) * P;
                for (const auto& g : gs)
                    for (int a = 0; a < 4; ++a)
                        for (int b = 0; b < 4; ++b) G(g[a], g[b]) += L(a, b);
            }
            G *= cplx(0.0, -1.0);
            if (cfg.integrator == BrownianIntegrator::EulerMaruyama) {
                next.noalias() = G * U;
                next += (1.0 - 0.5 * N * cfg.dt) * U;
                U.swap(next);
            } else {
                // Horner form of sum_k (-i dB)^k / k! applied to U.
                acc = U;
                for (int k = 4; k >= 1; --k) {
                    next.noalias() = G * acc;
                    acc = U + next / double(k);
                }
                U.swap(acc);
            }
            bool sample = next_sample < sample_steps.size() && sample_steps[next_sample] == step;
            if (step % std::size_t(cfg.projection_interval) == 0 || sample) restore();
            while (out.kept && next_sample < sample_steps.size() && sample_steps[next_sample] == step) {
                record();
                ++next_sample;
            }
        }
        return out;
    };

    int threads = cfg.threads > 0 ? cfg.threads : default_threads();
    std::vector<ShotSamples> shots = parallel_map<ShotSamples>(cfg.shots, threads, shot);

    BrownianResult res;
    for (const ShotSamples& s : shots) {
        res.max_drift = std::max(res.max_drift, s.max_drift);
        if (s.kept)
            ++res.shots_used;
        else
            ++res.shots_discarded;
    }
    if (res.shots_used < 2) return res;
    const double n = double(res.shots_used);
    auto moments = [&](auto get, double& mean, double& se) {
        double m = 0.0;
        for (const ShotSamples& s : shots)
            if (s.kept) m += get(s);
        m /= n;
        double v = 0.0;
        for (const ShotSamples& s : shots)
            if (s.kept) v += (get(s) - m) * (get(s) - m);
        mean = m;
        se = std::sqrt(v / (n - 1.0) / n);
    };
    for (std::size_t k = 0; k < sample_steps.size(); ++k) {
        BrownianPoint p;
        p.t = cfg.times[k];
        moments([&](const ShotSamples& s) { return s.F[k]; }, p.F, p.se_F);
        moments([&](const ShotSamples& s) { return s.G[k]; }, p.G, p.se_G);
        for (int e = 0; e < 16; ++e) moments([&](const ShotSamples& s) { return s.A[k][e]; }, p.A[e], p.se_A[e]);
        res.points.push_back(p);
    }
    return res;
}

}  // namespace qtk
