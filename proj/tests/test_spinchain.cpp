#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qtk/parallel.hpp"
#include "qtk/spinchain.hpp"

using namespace qtk;

namespace {

std::vector<double> sorted(const RVec& v) {
    std::vector<double> x(v.data(), v.data() + v.size());
    std::sort(x.begin(), x.end());
    return x;
}

}  // namespace

TEST_CASE("rescale factor") {
    CHECK(rescale_factor(12, 2.0) == doctest::Approx(std::sqrt(34.0 + 10.0 / 11.0 + 16.0)).epsilon(1e-14));
    CHECK(rescale_factor(12, 2.0) == doctest::Approx(7.1351).epsilon(1e-4));
    CHECK(rescale_factor(12, 20.0) == doctest::Approx(40.4340).epsilon(1e-5));
    CHECK(rescale_factor(8, 0.0) == doctest::Approx(std::sqrt(22.0 + 6.0 / 7.0)));
}

TEST_CASE("two-site singlet and triplet") {
    HeisenbergParams p;
    p.N = 2;
    p.alpha = 0.0;
    DisorderRealization r{{0.0, 0.0}, 0, 0};
    auto s = eigh(build_heisenberg(p, r));
    double q = rescale_factor(p);
    REQUIRE(s.dim() == 2);
    CHECK(s.values(0) == doctest::Approx(-3.0 / q));
    CHECK(s.values(1) == doctest::Approx(1.0 / q));
}

TEST_CASE("sector matrix equals filtered full-space operator") {
    HeisenbergParams p;
    p.N = 4;
    p.alpha = 0.3;
    auto r = DisorderRealization::sample(4, 17, 0);
    CMat full = heisenberg_full(p, r);
    CMat sz = CMat::Zero(16, 16);
    for (int j = 0; j < 4; ++j) sz += embed(pauli::Z(), j, 4, 2);
    CHECK(commutator_norm(full, sz) < 1e-12);

    auto basis = half_filling_basis(4);
    REQUIRE(basis.size() == 6);
    CMat filt(6, 6);
    for (int a = 0; a < 6; ++a)
        for (int b = 0; b < 6; ++b) filt(a, b) = full(basis[a], basis[b]);
    RMat sec = heisenberg_sector_matrix(p, r);
    CHECK(max_abs(filt - sec.cast<cplx>()) < 1e-12);
    auto e1 = sorted(eigvalsh(filt)), e2 = sorted(eigvalsh(sec.cast<cplx>()));
    for (int k = 0; k < 6; ++k) CHECK(std::abs(e1[k] - e2[k]) < 1e-12);
}

TEST_CASE("odd N rejected") {
    HeisenbergParams p;
    p.N = 5;
    CHECK_THROWS(build_heisenberg(p, DisorderRealization::sample(5, 1, 0)));
}

TEST_CASE("spin flip with field reversal preserves the spectrum") {
    HeisenbergParams p;
    p.N = 8;
    p.alpha = 0.6;
    auto r = DisorderRealization::sample(8, 3, 1);
    auto rf = r;
    for (auto& h : rf.fields) h = -h;
    auto a = sorted(eigh_real(heisenberg_sector_matrix(p, r), false).values);
    auto b = sorted(eigh_real(heisenberg_sector_matrix(p, rf), false).values);
    for (std::size_t k = 0; k < a.size(); ++k) CHECK(std::abs(a[k] - b[k]) < 1e-12);
}

TEST_CASE("rescaled spectral variance is energy_unit squared") {
    for (double h : {2.0, 20.0}) {
        HeisenbergParams p;
        p.N = 8;
        p.energy_unit = 1.7;
        p.h_goe = h;
        p.h_mbl = h + 1.0;
        double acc = 0.0;
        const int n = 200;
        for (int k = 0; k < n; ++k) {
            RMat H = heisenberg_sector_matrix(p, DisorderRealization::sample(8, 99, k));
            double d = static_cast<double>(H.rows());
            double m = H.trace() / d;
            acc += (H * H).trace() / d - m * m;
        }
        CHECK(acc / n == doctest::Approx(p.energy_unit * p.energy_unit).epsilon(0.05));
    }
}

TEST_CASE("ising spectra") {
    auto e = sorted(eigvalsh(build_ising({2, 1.0, 0.0, 0.0}).matrix()));
    CHECK(e == std::vector<double>{-1, -1, 1, 1});
    e = sorted(eigvalsh(build_ising({2, 0.0, 0.0, 1.0}).matrix()));
    CHECK(std::abs(e[0] + 2) < 1e-12);
    CHECK(std::abs(e[1]) < 1e-12);
    CHECK(std::abs(e[2]) < 1e-12);
    CHECK(std::abs(e[3] - 2) < 1e-12);

    // independent construction (Kronecker products) and solver (Eigen)
    const int N = 10;
    CMat H = CMat::Zero(1 << N, 1 << N);
    for (int j = 0; j + 1 < N; ++j) H -= embed(pauli::Z(), j, N, 2) * embed(pauli::Z(), j + 1, N, 2);
    for (int j = 0; j < N; ++j) H -= 0.5 * embed(pauli::Z(), j, N, 2) + 1.05 * embed(pauli::X(), j, N, 2);
    Eigen::SelfAdjointEigenSolver<RMat> es(H.real(), Eigen::EigenvaluesOnly);
    CHECK(std::abs(eigh_real(ising_matrix({N, 1.0, 0.5, 1.05}), false).values(0) - es.eigenvalues()(0)) < 1e-10);
}

TEST_CASE("gaussian dos") {
    const int N = 12;
    const double eu = 0.8, dim = 924;
    CHECK(dos_gaussian(0.0, N, eu, dim) == doctest::Approx(dim / (std::sqrt(2 * std::numbers::pi * N) * eu)));
    double i1 = 0, i2 = 0, h = 1e-3;
    for (double E = -40; E <= 40; E += h) {
        double m = dos_gaussian(E, N, eu, dim);
        i1 += m * h;
        i2 += m * m * h;
    }
    CHECK(std::abs(i1 - dim) < 1e-6 * dim);
    CHECK(dim / i2 == doctest::Approx(mean_gap_gaussian(N, eu, dim)).epsilon(1e-9));
    CHECK(mean_gap_rescaled(eu, dim) == doctest::Approx(mean_gap_gaussian(1, eu, dim)));
}

TEST_CASE("gap statistics on synthetic spectra") {
    SeededRng rng(4);
    RVec pois(400), goe(400);
    double a = 0, b = 0;
    for (int k = 0; k < 400; ++k) {
        pois(k) = a;
        goe(k) = b;
        a += -std::log(1.0 - rng.uniform());
        b += std::sqrt(-4.0 * std::log(1.0 - rng.uniform()) / std::numbers::pi);
    }
    auto gp = gap_statistics(pois);
    CHECK(gp.poisson_like());
    CHECK(gp.gaps.size() == 267);
    auto gg = gap_statistics(goe);
    CHECK_FALSE(gg.poisson_like());
    CHECK_THROWS(gap_statistics(RVec::LinSpaced(25, 0, 1)));
}

TEST_CASE("gap statistics classify small Heisenberg ensembles") {
    HeisenbergParams p;
    p.N = 10;
    int mbl = 0, eth = 0;
    const int n = 40;
    for (int k = 0; k < n; ++k) {
        auto r = DisorderRealization::sample(10, 5, k);
        mbl += gap_statistics(eigh_real(heisenberg_sector_matrix(p.at(1.0), r), false).values).poisson_like();
        eth += !gap_statistics(eigh_real(heisenberg_sector_matrix(p.at(0.0), r), false).values).poisson_like();
    }
    CHECK(mbl >= 0.95 * n);
    CHECK(eth >= 0.95 * n);
}

TEST_CASE("level repulsion scale on synthetic gaps") {
    SeededRng rng(8);
    std::vector<double> gaps;
    // Wigner surmise with unit mean: mode at sqrt(2/pi)
    for (int k = 0; k < 200000; ++k) gaps.push_back(std::sqrt(-4.0 * std::log(1.0 - rng.uniform()) / std::numbers::pi));
    auto est = level_repulsion_scale(gaps);
    CHECK(std::abs(est.delta_minus / (est.mean_gap * std::sqrt(2.0 / std::numbers::pi)) - 1.0) < 0.2);

    // gamma(3, theta) has mode 2 theta; mean 3 theta covers it
    gaps.clear();
    const double theta = 0.01;
    for (int k = 0; k < 200000; ++k)
        gaps.push_back(-theta * std::log((1 - rng.uniform()) * (1 - rng.uniform()) * (1 - rng.uniform())));
    est = level_repulsion_scale(gaps);
    double w = std::log(est.bin_edges[1] / est.bin_edges[0]);
    CHECK(std::abs(std::log(est.delta_minus / (2 * theta))) < 1.5 * w);

    CHECK_THROWS(level_repulsion_scale(std::vector<double>(100, 0.3)));
}

TEST_CASE("MBL repulsion scale sits far below the mean gap") {
    HeisenbergParams p;
    p.N = 8;
    p.alpha = 1.0;
    const int n = 20000;
    auto per = parallel_map<std::vector<double>>(n, default_threads(), [&](std::size_t k) {
        auto r = DisorderRealization::sample(8, 2024, k);
        return gap_statistics(eigh_real(heisenberg_sector_matrix(p, r), false).values).gaps;
    });
    std::vector<double> pooled;
    for (auto& g : per) pooled.insert(pooled.end(), g.begin(), g.end());
    auto est = level_repulsion_scale(pooled);
    MESSAGE("delta_minus / mean gap = " << est.delta_minus / est.mean_gap);
    CHECK(est.delta_minus / est.mean_gap < 0.1);
}
