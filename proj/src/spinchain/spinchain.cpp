#include "qtk/spinchain.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace qtk {

void HeisenbergParams::validate() const {
    if (N < 2 || N % 2 != 0) throw std::invalid_argument("HeisenbergParams: N must be even and >= 2, got " + std::to_string(N));
    if (N > 24) throw std::invalid_argument("HeisenbergParams: N too large for dense diagonalization");
    if (!(energy_unit > 0)) throw std::invalid_argument("HeisenbergParams: energy unit must be positive");
    if (!(h_goe < h_mbl)) throw std::invalid_argument("HeisenbergParams: need h_goe < h_mbl");
    if (alpha < 0.0 || alpha > 1.0) throw std::invalid_argument("HeisenbergParams: alpha outside [0,1]");
}

DisorderRealization DisorderRealization::sample(int N, std::uint64_t seed, std::uint64_t stream) {
    SeededRng rng(seed, stream);
    DisorderRealization r;
    r.seed = seed;
    r.stream = stream;
    r.fields.resize(N);
    for (auto& h : r.fields) h = rng.uniform(-1.0, 1.0);
    return r;
}

double rescale_factor(int N, double h) {
    if (N < 2) throw std::invalid_argument("rescale_factor: N >= 2 required");
    double n = N;
    return std::sqrt(3.0 * n - 2.0 + (n - 2.0) / (n - 1.0) + n * h * h / 3.0);
}

double rescale_factor(const HeisenbergParams& p) { return rescale_factor(p.N, p.h()); }

std::vector<std::uint32_t> half_filling_basis(int N) {
    std::vector<std::uint32_t> b;
    for (std::uint32_t s = 0; s < (1u << N); ++s)
        if (std::popcount(s) == N / 2) b.push_back(s);
    return b;
}

namespace {

void check_realization(const HeisenbergParams& p, const DisorderRealization& r) {
    p.validate();
    if (static_cast<int>(r.fields.size()) != p.N)
        throw std::invalid_argument("build_heisenberg: realization has " + std::to_string(r.fields.size()) +
                                    " fields, expected " + std::to_string(p.N));
    for (double h : r.fields)
        if (std::abs(h) > 1.0) throw std::invalid_argument("build_heisenberg: site field outside [-1,1]");
}

inline int spin(std::uint32_t s, int site, int N) { return (s >> (N - 1 - site)) & 1u ? -1 : 1; }

}  // namespace

RMat heisenberg_sector_matrix(const HeisenbergParams& p, const DisorderRealization& r) {
    check_realization(p, r);
    const int N = p.N;
    auto basis = half_filling_basis(N);
    const Eigen::Index dim = static_cast<Eigen::Index>(basis.size());
    std::vector<Eigen::Index> index(1u << N, -1);
    for (Eigen::Index k = 0; k < dim; ++k) index[basis[k]] = k;

    const double scale = p.energy_unit / rescale_factor(p);
    const double h = p.h();
    RMat H = RMat::Zero(dim, dim);
    for (Eigen::Index k = 0; k < dim; ++k) {
        std::uint32_t s = basis[k];
        double diag = 0.0;
        for (int j = 0; j < N; ++j) diag += h * r.fields[j] * spin(s, j, N);
        for (int j = 0; j + 1 < N; ++j) {
            int a = spin(s, j, N), b = spin(s, j + 1, N);
            diag += a * b;
            if (a != b) {
                std::uint32_t t = s ^ (1u << (N - 1 - j)) ^ (1u << (N - 2 - j));
                H(index[t], k) += 2.0;
            }
        }
        H(k, k) += diag;
    }
    return H * scale;
}

HermitianOperator build_heisenberg(const HeisenbergParams& p, const DisorderRealization& r) {
    return HermitianOperator::from_real(heisenberg_sector_matrix(p, r));
}

CMat heisenberg_full(const HeisenbergParams& p, const DisorderRealization& r) {
    check_realization(p, r);
    const int N = p.N;
    const Eigen::Index d = Eigen::Index(1) << N;
    CMat H = CMat::Zero(d, d);
    for (int j = 0; j + 1 < N; ++j)
        for (int a = 1; a <= 3; ++a)
            H += embed(pauli::by_index(a), j, N, 2) * embed(pauli::by_index(a), j + 1, N, 2);
    for (int j = 0; j < N; ++j) H += p.h() * r.fields[j] * embed(pauli::Z(), j, N, 2);
    return H * (p.energy_unit / rescale_factor(p));
}

RMat ising_matrix(const IsingParams& p) {
    if (p.N < 2) throw std::invalid_argument("build_ising: N >= 2 required");
    if (p.N > 14) throw std::invalid_argument("build_ising: N too large for dense matrices");
    const int N = p.N;
    const Eigen::Index d = Eigen::Index(1) << N;
    RMat H = RMat::Zero(d, d);
    for (Eigen::Index s = 0; s < d; ++s) {
        auto u = static_cast<std::uint32_t>(s);
        double diag = 0.0;
        for (int j = 0; j + 1 < N; ++j) diag -= p.J * spin(u, j, N) * spin(u, j + 1, N);
        for (int j = 0; j < N; ++j) {
            diag -= p.h * spin(u, j, N);
            H(s ^ (Eigen::Index(1) << (N - 1 - j)), s) -= p.g;
        }
        H(s, s) += diag;
    }
    return H;
}

HermitianOperator build_ising(const IsingParams& p) { return HermitianOperator::from_real(ising_matrix(p)); }

double dos_gaussian(double E, int N, double energy_unit, double dim) {
    if (!(energy_unit > 0)) throw std::invalid_argument("dos_gaussian: energy unit must be positive");
    double var = N * energy_unit * energy_unit;
    return dim * std::exp(-E * E / (2.0 * var)) / std::sqrt(2.0 * std::numbers::pi * var);
}

double mean_gap_gaussian(int N, double energy_unit, double dim) {
    return 2.0 * std::sqrt(std::numbers::pi * N) * energy_unit / dim;
}

double mean_gap_rescaled(double energy_unit, double dim) { return 2.0 * std::sqrt(std::numbers::pi) * energy_unit / dim; }

double cdf_poisson(double s) { return 1.0 - std::exp(-s); }
double cdf_goe(double s) { return 1.0 - std::exp(-std::numbers::pi * s * s / 4.0); }

double ks_distance(std::vector<double> x, double (*cdf)(double)) {
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double f = cdf(x[i]);
        d = std::max({d, (i + 1) / n - f, f - i / n});
    }
    return d;
}

GapStatistics gap_statistics(const RVec& eigenvalues, double window_fraction) {
    if (!(window_fraction > 0.0 && window_fraction <= 1.0))
        throw std::invalid_argument("gap_statistics: window fraction must lie in (0,1]");
    std::vector<double> ev(eigenvalues.data(), eigenvalues.data() + eigenvalues.size());
    std::sort(ev.begin(), ev.end());
    const std::size_t n = ev.size();
    const std::size_t drop = static_cast<std::size_t>(std::floor(n * (1.0 - window_fraction) / 2.0));
    const std::size_t lo = drop, hi = n - drop;  // [lo, hi)
    if (hi <= lo || hi - lo < 20)
        throw std::invalid_argument("gap_statistics: fewer than 20 levels in the window (" +
                                    std::to_string(hi > lo ? hi - lo : 0) + ")");
    GapStatistics g;
    g.window_lo = ev[lo];
    g.window_hi = ev[hi - 1];
    for (std::size_t k = lo + 1; k < hi; ++k) g.gaps.push_back(ev[k] - ev[k - 1]);
    double sum = 0.0;
    for (double x : g.gaps) sum += x;
    g.mean_gap = sum / g.gaps.size();
    if (!(g.mean_gap > 0)) throw std::invalid_argument("gap_statistics: window is fully degenerate");
    std::vector<double> s(g.gaps);
    for (double& x : s) x /= g.mean_gap;
    g.ks_poisson = ks_distance(s, cdf_poisson);
    g.ks_goe = ks_distance(s, cdf_goe);
    return g;
}

GapStatistics gap_statistics(const SpectralDecomposition& s, double window_fraction) {
    return gap_statistics(s.values, window_fraction);
}

RepulsionEstimate level_repulsion_scale(const std::vector<double>& gaps, int bins) {
    if (bins < 2) throw std::invalid_argument("level_repulsion_scale: need at least 2 bins");
    std::vector<double> pos;
    pos.reserve(gaps.size());
    double sum = 0.0;
    for (double g : gaps) {
        if (g < 0) throw std::invalid_argument("level_repulsion_scale: negative gap");
        sum += g;
        if (g > 0) pos.push_back(g);
    }
    if (pos.empty()) throw std::invalid_argument("level_repulsion_scale: no positive gaps");
    RepulsionEstimate r;
    r.mean_gap = sum / gaps.size();
    double gmin = *std::min_element(pos.begin(), pos.end());
    double gmax = *std::max_element(pos.begin(), pos.end());
    if (gmax <= gmin * (1.0 + 1e-12)) throw std::invalid_argument("level_repulsion_scale: degenerate histogram, all gaps equal");
    if (gmin >= r.mean_gap) throw std::invalid_argument("level_repulsion_scale: empty range below the mean gap");
    const double l0 = std::log(gmin), l1 = std::log(r.mean_gap), w = (l1 - l0) / bins;
    r.bin_edges.resize(bins + 1);
    for (int b = 0; b <= bins; ++b) r.bin_edges[b] = std::exp(l0 + b * w);
    std::vector<double> count(bins, 0.0);
    for (double g : pos) {
        if (g > r.mean_gap) continue;
        int b = static_cast<int>(std::floor((std::log(g) - l0) / w));
        b = std::clamp(b, 0, bins - 1);
        count[b] += 1.0;
    }
    // Bins holding a handful of gaps have huge density noise at the narrow low end;
    // only bins with at least kMinCount entries compete for the mode.
    constexpr double kMinCount = 100.0;
    const bool any_full = *std::max_element(count.begin(), count.end()) >= kMinCount;
    r.density.resize(bins);
    int best = -1;
    for (int b = 0; b < bins; ++b) {
        r.density[b] = count[b] / (r.bin_edges[b + 1] - r.bin_edges[b]);
        if (any_full && count[b] < kMinCount) continue;
        if (best < 0 || r.density[b] > r.density[best]) best = b;
    }
    r.delta_minus = std::sqrt(r.bin_edges[best] * r.bin_edges[best + 1]);
    return r;
}

}  // namespace qtk
