#include "doctest.h"

#include <cmath>

#include "qtk/quasiprob.hpp"

using namespace qtk;

namespace {

double max_diff(const CoarseTable& a, const CoarseTable& b) {
    double m = 0.0;
    for (int k = 0; k < 16; ++k) m = std::max(m, std::abs(a.values[k] - b.values[k]));
    return m;
}

IsingParams chain(int N) {
    IsingParams p;
    p.N = N;
    return p;
}

OtocSetting random_state_setting(int N, std::uint64_t seed) {
    SeededRng rng(seed);
    return OtocSetting::ising(chain(N), random_density(Eigen::Index(1) << N, rng));
}

}  // namespace

TEST_CASE("two-qubit hand computation") {
    // H = sigma^x sigma^x: W(t) = cos 2t Z1 + sin 2t Y1 X2, and V = Z2 flips the second term, so F = cos 4t.
    CMat H = kron(pauli::X(), pauli::X());
    OtocSetting s(HermitianOperator(H), kron(pauli::Z(), pauli::I()), kron(pauli::I(), pauli::Z()),
                  DensityMatrix::maximally_mixed(4));
    for (double t : {0.0, 0.1, 0.37, 1.2}) {
        CHECK(std::abs(otoc(s, t) - std::cos(4 * t)) < 1e-12);
        CMat expect = std::cos(2 * t) * kron(pauli::Z(), pauli::I()) + std::sin(2 * t) * kron(pauli::Y(), pauli::X());
        CHECK(max_abs(s.W_t(t) - expect) < 1e-12);
    }
    // H on the first qubit only: the sites stay uncorrelated and A = (1 + w2 w3) delta(v1, v2) / 8.
    OtocSetting local(HermitianOperator(kron(pauli::X(), pauli::I())), kron(pauli::Z(), pauli::I()),
                      kron(pauli::I(), pauli::Z()), DensityMatrix::maximally_mixed(4));
    CoarseTable tab = coarse_quasiprob(local, 0.8);
    for (int k = 0; k < 16; ++k) {
        auto [v1, w2, v2, w3] = CoarseTable::signs(k);
        CHECK(std::abs(tab.values[k] - (v1 == v2 ? (1.0 + w2 * w3) / 8.0 : 0.0)) < 1e-14);
    }
}

TEST_CASE("coarse table at t = 0 for the mixed state") {
    OtocSetting s = OtocSetting::ising(chain(6));
    CoarseTable t = coarse_quasiprob(s, 0.0);
    for (int k = 0; k < 16; ++k) {
        auto [v1, w2, v2, w3] = CoarseTable::signs(k);
        CHECK(std::abs(t.values[k] - (1.0 + w2 * w3 + v1 * v2 + w2 * w3 * v1 * v2) / 16.0) < 1e-15);
    }
    CHECK(std::abs(reconstruct_otoc(t) - 1.0) < 1e-14);
}

TEST_CASE("index encoding") {
    CHECK(CoarseTable::index(1, 1, 1, 1) == 0);
    CHECK(CoarseTable::index(-1, 1, 1, 1) == 1);
    CHECK(CoarseTable::index(1, -1, 1, 1) == 2);
    CHECK(CoarseTable::index(1, 1, -1, 1) == 4);
    CHECK(CoarseTable::index(1, 1, 1, -1) == 8);
    for (int k = 0; k < 16; ++k) {
        auto [v1, w2, v2, w3] = CoarseTable::signs(k);
        CHECK(CoarseTable::index(v1, w2, v2, w3) == k);
    }
}

TEST_CASE("identities on the mixed state") {
    OtocSetting s = OtocSetting::ising(chain(6));
    for (double t : {0.3, 1.1, 2.5, 4.0, 7.5}) {
        CoarseTable tab = coarse_quasiprob(s, t);
        cplx F = otoc(s, t);
        CHECK(std::abs(tab.sum() - 1.0) < 1e-10);
        CHECK(std::abs(reconstruct_otoc(tab) - F) < 1e-10);
        CHECK(max_diff(tab, sixteen_term_expansion(s, t)) < 1e-10);
        for (const cplx& v : tab.values) CHECK(std::abs(v.imag()) < 1e-12);
        for (int k = 0; k < 16; ++k) {
            auto [v1, w2, v2, w3] = CoarseTable::signs(k);
            CHECK(std::abs(tab.at(v1, w3, v2, w2) - std::conj(tab.at(v1, w2, v2, w3))) < 1e-12);
            CHECK(std::abs(tab.at(v2, w3, v1, w2) - tab.at(v1, w2, v2, w3)) < 1e-12);
        }
        WorkDistribution P = work_distribution(tab);
        CHECK(std::abs(P.at(1, -1) - P.at(-1, 1)) < 1e-12);
        JarzynskiMoment m = jarzynski_moment(P);
        CHECK(std::abs(m.exact - F) < 1e-10);
        CHECK(std::abs(m.finite_difference - F) < 1e-6);
        CHECK(2.0 - 2.0 * F.real() >= -1e-10);
    }
}

TEST_CASE("identities on a general state take the dense path") {
    OtocSetting s = random_state_setting(5, 11);
    CHECK(!s.diagonal_fast_path());
    for (double t : {0.0, 0.6, 2.2}) {
        CoarseTable tab = coarse_quasiprob(s, t);
        cplx F = otoc(s, t);
        CHECK(std::abs(tab.sum() - 1.0) < 1e-10);
        CHECK(std::abs(reconstruct_otoc(tab) - F) < 1e-10);
        CHECK(max_diff(tab, sixteen_term_expansion(s, t)) < 1e-10);
        JarzynskiMoment m = jarzynski_moment(work_distribution(tab));
        CHECK(std::abs(m.exact - F) < 1e-10);
        CHECK(std::abs(m.finite_difference - F) < 1e-6);
    }
}

TEST_CASE("fast path agrees with the dense path") {
    // A V-diagonal state takes the fast path; the sixteen-term route never does.
    RVec p = RVec::LinSpaced(16, 0.2, 3.0);
    p /= p.sum();
    OtocSetting s = OtocSetting::ising(chain(4), DensityMatrix(CMat(p.cast<cplx>().asDiagonal())));
    CHECK(s.diagonal_fast_path());
    for (double t : {0.4, 1.7}) {
        CoarseTable tab = coarse_quasiprob(s, t);
        CHECK(max_diff(tab, sixteen_term_expansion(s, t)) < 1e-12);
        // rho commutes with V, so conjugation swaps w2 and w3.
        for (int k = 0; k < 16; ++k) {
            auto [v1, w2, v2, w3] = CoarseTable::signs(k);
            CHECK(std::abs(tab.at(v1, w3, v2, w2) - std::conj(tab.at(v1, w2, v2, w3))) < 1e-12);
        }
        CMat X = s.W_t(t);
        cplx direct = (s.rho().matrix() * X * s.V() * X * s.V()).trace();
        CHECK(std::abs(otoc(s, t) - direct) < 1e-12);
    }
}

TEST_CASE("non-involutory operators are rejected") {
    CMat W = 2.0 * kron(pauli::Z(), pauli::I());
    OtocSetting s(HermitianOperator(kron(pauli::X(), pauli::X())), W, kron(pauli::I(), pauli::Z()),
                  DensityMatrix::maximally_mixed(4));
    CHECK(!s.involutory());
    CHECK_THROWS_AS(coarse_quasiprob(s, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(sixteen_term_expansion(s, 0.1), std::invalid_argument);
    CHECK_NOTHROW(otoc(s, 0.1));
}

TEST_CASE("fine table sums to the coarse table") {
    for (bool mixed : {true, false}) {
        OtocSetting s = mixed ? OtocSetting::ising(chain(4)) : random_state_setting(4, 3);
        FineBases b = FineBases::computational(s.W(), s.V());
        FineTable f = fine_quasiprob(s, 0.7, b);
        CHECK(max_diff(f.coarse(), coarse_quasiprob(s, 0.7)) < 1e-10);
        std::vector<cplx> m = f.w3_marginal();
        cplx total = 0.0;
        for (const cplx& v : m) {
            CHECK(v.real() >= -1e-12);
            CHECK(std::abs(v.imag()) < 1e-12);
            total += v;
        }
        CHECK(std::abs(total - 1.0) < 1e-10);
    }
}

TEST_CASE("fine entries with equal V labels are nonnegative for V-diagonal states") {
    RVec p = RVec::LinSpaced(8, 1.0, 8.0);
    p /= p.sum();
    OtocSetting s = OtocSetting::ising(chain(3), DensityMatrix(CMat(p.cast<cplx>().asDiagonal())));
    FineTable f = fine_quasiprob(s, 1.3, FineBases::computational(s.W(), s.V()));
    for (Eigen::Index i = 0; i < 8; ++i)
        for (Eigen::Index j = 0; j < 8; ++j)
            for (Eigen::Index l = 0; l < 8; ++l) {
                cplx v = f.at(i, j, i, l);
                CHECK(v.real() >= -1e-15);
                CHECK(std::abs(v.imag()) < 1e-15);
            }
}

TEST_CASE("fine table at t = 0 in a shared eigenbasis is real") {
    OtocSetting s = random_state_setting(3, 8);
    // Real rho, so real matrix elements in the computational basis.
    CMat r = s.rho().matrix().real().cast<cplx>();
    OtocSetting real_s(s.H(), s.W(), s.V(), DensityMatrix(r));
    FineTable f = fine_quasiprob(real_s, 0.0, FineBases::computational(s.W(), s.V()));
    for (const cplx& v : f.values) CHECK(std::abs(v.imag()) < 1e-15);
}

TEST_CASE("bad fine bases are rejected") {
    OtocSetting s = OtocSetting::ising(chain(3));
    FineBases b = FineBases::computational(s.W(), s.V());
    b.w_vectors(0, 1) = 0.3;
    CHECK_THROWS_AS(fine_quasiprob(s, 0.2, b), std::invalid_argument);
}

TEST_CASE("amplitudes reproduce the fine table") {
    OtocSetting s = random_state_setting(3, 21);
    FineBases b = FineBases::computational(s.W(), s.V());
    const double t = 0.9;
    AmplitudeSet a = amplitudes(s, t, b);
    double norm = 0.0;
    for (const cplx& v : a.values) norm += std::norm(v);
    CHECK(std::abs(norm - 1.0) < 1e-12);
    CHECK(std::abs(amplitude(s, t, b, 2, 5, 1, 7) - a.at(2, 5, 1, 7)) < 1e-15);
    FineTable direct = fine_quasiprob(s, t, b), viaA = quasiprob_from_amplitudes(s, t, b);
    double m = 0.0;
    for (std::size_t n = 0; n < direct.values.size(); ++n) m = std::max(m, std::abs(direct.values[n] - viaA.values[n]));
    CHECK(m < 1e-10);
}

TEST_CASE("pure state amplitudes vanish off its eigenvector") {
    CVec psi = CVec::Zero(8);
    psi(3) = 1.0;
    OtocSetting s = OtocSetting::ising(chain(3), DensityMatrix::pure(psi));
    FineBases b = FineBases::computational(s.W(), s.V());
    AmplitudeSet a = amplitudes(s, 0.5, b);
    // Eigenvalues of rho ascend, so the occupied eigenvector is the last.
    double off = 0.0, on = 0.0;
    for (Eigen::Index j = 0; j < 8; ++j)
        for (Eigen::Index w1 = 0; w1 < 8; ++w1)
            for (Eigen::Index v1 = 0; v1 < 8; ++v1)
                for (Eigen::Index w2 = 0; w2 < 8; ++w2) (j == 7 ? on : off) += std::norm(a.at(j, w1, v1, w2));
    CHECK(off < 1e-24);
    CHECK(std::abs(on - 1.0) < 1e-12);
}

TEST_CASE("jarzynski difference is exact for the Pauli case") {
    WorkDistribution P;
    P.at(1, 1) = 0.4;
    P.at(1, -1) = cplx(0.1, 0.05);
    P.at(-1, 1) = cplx(0.1, -0.05);
    P.at(-1, -1) = 0.4;
    JarzynskiMoment m = jarzynski_moment(P);
    CHECK(std::abs(m.exact - 0.6) < 1e-15);
    CHECK(std::abs(m.finite_difference - m.exact) < 1e-6);
}

TEST_CASE("time-ordered table") {
    RVec p = RVec::LinSpaced(16, 0.5, 2.0);
    p /= p.sum();
    OtocSetting s = OtocSetting::ising(chain(4), DensityMatrix(CMat(p.cast<cplx>().asDiagonal())));
    for (double t : {0.0, 0.8, 3.0}) {
        TocTable tab = toc_quasiprob(s, t);
        for (const cplx& v : tab.values) {
            CHECK(v.real() >= -1e-12);
            CHECK(std::abs(v.imag()) < 1e-12);
        }
        CHECK(std::abs(tab.sum() - 1.0) < 1e-10);
        CHECK(std::abs(toc_moment(tab) - toc_correlator(s, t)) < 1e-10);
        CHECK(std::abs(toc_correlator(s, t) - 1.0) < 1e-10);
    }
    OtocSetting g = random_state_setting(4, 2);
    TocTable tab = toc_quasiprob(g, 1.4);
    CHECK(std::abs(toc_moment(tab) - toc_correlator(g, 1.4)) < 1e-10);
}

TEST_CASE("k-fold correlators") {
    OtocSetting s = OtocSetting::ising(chain(6));
    for (double t : {0.0, 1.0, 2.5}) {
        CHECK(std::abs(kfold_otoc(s, t, 2) - otoc(s, t)) < 1e-10);
        KFoldTable k2 = kfold_quasiprob(s, t, 2);
        CHECK(k2.values.size() == 16);
        CHECK(std::abs(kfold_moment(k2) - kfold_otoc(s, t, 2)) < 1e-10);
        KFoldTable k3 = kfold_quasiprob(s, t, 3);
        CHECK(k3.values.size() == 64);
        CHECK(std::abs(k3.sum() - 1.0) < 1e-10);
        CHECK(std::abs(kfold_moment(k3) - kfold_otoc(s, t, 3)) < 1e-8);
    }
    // At t = 0, (W V)^2 = 1: even folds give 1 and the three-fold one reduces to <W V> = 0.
    CHECK(std::abs(kfold_otoc(s, 0.0, 2) - 1.0) < 1e-12);
    CHECK(std::abs(kfold_otoc(s, 0.0, 3)) < 1e-12);
    // k = 2 table entries sit on the coarse table: bits (v1, w2, v2, w3) in the same order.
    CoarseTable c = coarse_quasiprob(s, 1.0);
    KFoldTable k2 = kfold_quasiprob(s, 1.0, 2);
    for (int k = 0; k < 16; ++k) CHECK(std::abs(k2.values[k] - c.values[k]) < 1e-12);
    CHECK_THROWS_AS(kfold_otoc(s, 1.0, 4), std::invalid_argument);
    CHECK_THROWS_AS(kfold_quasiprob(s, 1.0, 1), std::invalid_argument);
}

TEST_CASE("regulated table") {
    const IsingParams p = chain(4);
    HermitianOperator H = build_ising(p);
    SUBCASE("finite temperature") {
        const double T = 1.0;
        OtocSetting s = OtocSetting::ising(p, thermal_state(H, T));
        for (double t : {0.0, 0.9, 2.0}) {
            CoarseTable r = regulated_quasiprob(s, T, t);
            CHECK(std::abs(reconstruct_otoc(r) - regulated_otoc(s, T, t)) < 1e-12);
            for (int k = 0; k < 16; ++k) {
                auto [v1, w2, v2, w3] = CoarseTable::signs(k);
                CHECK(std::abs(r.at(v2, w3, v1, w2) - r.at(v1, w2, v2, w3)) < 1e-13);
            }
        }
    }
    SUBCASE("high temperature limit") {
        OtocSetting mixed = OtocSetting::ising(p);
        double prev = 1.0;
        for (double T : {1e3, 1e4, 1e6}) {
            OtocSetting s = OtocSetting::ising(p, thermal_state(H, T));
            double err = max_diff(regulated_quasiprob(s, T, 1.3), coarse_quasiprob(mixed, 1.3));
            CHECK(err < prev);
            prev = err;
        }
        CHECK(prev < 1e-6);
    }
    SUBCASE("non-thermal state") {
        OtocSetting s = OtocSetting::ising(p);
        CHECK_THROWS_AS(regulated_quasiprob(s, 1.0, 0.5), std::invalid_argument);
        CHECK_THROWS_AS(thermal_state(H, 0.0), std::invalid_argument);
    }
}

TEST_CASE("two-weak protocol recovers the table") {
    OtocSetting s = OtocSetting::ising(chain(3));
    const double t = 1.1;
    CoarseTable exact = coarse_quasiprob(s, t);
    Detector det = Detector::symmetric(1e-2);
    WeakStatistics st = weak_measurement_simulate(s, t, det, det);
    CHECK(max_diff(infer_quasiprob_from_weak(st), exact) < 5e-2);
    CHECK(max_diff(infer_quasiprob_from_weak(st), exact) < 1e-10);
    // A pi/2 coupling phase on either detector turns the correlator into -4 g^2 Im A.
    const double g2 = 1e-4;
    std::array<cplx, 16> re = weak_correlator(s, t, det, det);
    std::array<cplx, 16> im_b = weak_correlator(s, t, det, det.rotated());
    std::array<cplx, 16> im_a = weak_correlator(s, t, det.rotated(), det);
    for (int k = 0; k < 16; ++k) {
        auto [v1, w2, v2, w3] = CoarseTable::signs(k);
        double T2 = (v1 == v2 && w2 == w3) ? st.background[k] : 0.0;
        CHECK(std::abs(re[k].real() - 4 * g2 * (exact.values[k].real() + T2)) < 1e-15);
        CHECK(std::abs(im_b[k].real() + 4 * g2 * exact.values[k].imag()) < 1e-15);
        CHECK(std::abs(im_a[k].real() + 4 * g2 * exact.values[k].imag()) < 1e-15);
    }
}

TEST_CASE("zero coupling leaves only the background") {
    OtocSetting s = OtocSetting::ising(chain(3));
    Detector det = Detector::symmetric(0.0);
    WeakStatistics st = weak_measurement_simulate(s, 0.5, det, det);
    for (const cplx& v : st.signal) CHECK(v == cplx(0.0));
    double bg = 0.0;
    for (double v : st.background) bg += v;
    CHECK(bg > 0.0);
    CHECK_THROWS_AS(infer_quasiprob_from_weak(st), std::invalid_argument);
}

TEST_CASE("uncalibrated or strong detectors are rejected") {
    OtocSetting s = OtocSetting::ising(chain(3));
    Detector bad = Detector::symmetric(1e-2);
    bad.p = {0.6, 0.4};
    CHECK_THROWS_AS(weak_measurement_simulate(s, 0.5, bad, bad), std::invalid_argument);
    Detector strong;
    strong.x = {1, -1};
    strong.p = {0.5, 0.5};
    strong.g = {0.2, -0.2};
    CHECK_THROWS_AS(strong.validate(), std::invalid_argument);
    OtocSetting general = random_state_setting(3, 1);
    Detector det = Detector::symmetric(1e-2);
    CHECK_THROWS_AS(weak_measurement_simulate(general, 0.5, det, det), std::invalid_argument);
}

TEST_CASE("three-weak protocol on a general state") {
    OtocSetting s = random_state_setting(3, 17);
    const double t = 0.8;
    Detector det = Detector::symmetric(1e-2);
    WeakStatistics st = weak_measurement_simulate(s, t, det, det, det);
    CHECK(st.runs.size() == 64);
    CoarseTable inferred = infer_quasiprob_from_weak(st), exact = coarse_quasiprob(s, t);
    CHECK(max_diff(inferred, exact) < 5e-2);
    CHECK(max_diff(inferred, exact) < 1e-8);
}

TEST_CASE("interference inner product") {
    SeededRng rng(44);
    CMat U = haar_unitary(8, rng);
    CVec a = haar_state(8, rng), b = haar_state(8, rng);
    cplx z = a.dot(U * b);
    InterferenceEstimate exact = interference_inner_product(U, a, b, 0, rng);
    CHECK(std::abs(exact.z - z) < 1e-10);
    InterferenceEstimate e = interference_inner_product(U, a, b, 1000000, rng);
    CHECK(e.se_re > 0.0);
    CHECK(std::abs(e.z.real() - z.real()) < 3 * e.se_re);
    CHECK(std::abs(e.z.imag() - z.imag()) < 3 * e.se_im);
    CMat I = CMat::Identity(8, 8);
    CHECK(std::abs(interference_inner_product(I, a, a, 0, rng).z - 1.0) < 1e-12);
    CVec e0 = CVec::Unit(8, 0), e1 = CVec::Unit(8, 1);
    CHECK(std::abs(interference_inner_product(I, e0, e1, 0, rng).z) < 1e-12);
}

TEST_CASE("retrodiction methods agree") {
    SeededRng rng(2024);
    const int N = 4;
    const Eigen::Index d = 16;
    int anomalous = 0;
    for (int inst = 0; inst < 50; ++inst) {
        RetrodictionProblem p;
        for (int k = 0; k < 3; ++k) {
            int site = int(rng.uniform() * N) % N, pa = 1 + int(rng.uniform() * 3) % 3;
            p.observables.push_back(embed(pauli::by_index(pa), site, N, 2));
        }
        p.rho_prime = random_density(d, rng).matrix();
        p.f_prime = haar_state(d, rng);
        p.antisymmetric = inst % 2 == 1;
        RetrodictionResult c = weak_value_retrodiction(p, RetrodictionMode::Conventional);
        RetrodictionResult f = weak_value_retrodiction(p, RetrodictionMode::Factored);
        CHECK(std::abs(c.gamma_weak - f.gamma_weak) < 1e-9);
        anomalous += c.anomalous;
    }
    MESSAGE("anomalous instances: " << anomalous);
}

TEST_CASE("retrodiction special cases") {
    SeededRng rng(9);
    CVec psi = haar_state(4, rng);
    RetrodictionProblem p;
    p.observables = {CMat::Identity(4, 4), CMat::Identity(4, 4)};
    p.rho_prime = DensityMatrix::pure(psi).matrix();
    p.f_prime = psi;
    CHECK(weak_value_retrodiction(p, RetrodictionMode::Factored).gamma_weak == doctest::Approx(2.0));
    CMat A = random_hermitian(4, rng);
    p.observables = {A};
    double expect = 2.0 * psi.dot(A * psi).real();
    CHECK(weak_value_retrodiction(p, RetrodictionMode::Conventional).gamma_weak == doctest::Approx(expect));
    CHECK(weak_value_retrodiction(p, RetrodictionMode::Factored).gamma_weak == doctest::Approx(expect));
    CVec orth = CVec::Zero(4);
    orth(0) = 1.0;
    p.rho_prime = DensityMatrix::pure(CVec::Unit(4, 1)).matrix();
    p.f_prime = orth;
    CHECK_THROWS_AS(weak_value_retrodiction(p, RetrodictionMode::Conventional), std::invalid_argument);
}

TEST_CASE("state decomposition") {
    OtocSetting s = random_state_setting(3, 77);
    FineBases b = FineBases::computational(s.W(), s.V());
    StateDecomposition dec = state_decomposition(s, 1.0, b);
    CHECK(dec.removed == 0);
    CHECK(max_abs(dec.rho_prime - s.rho().matrix()) < 1e-9);
    CMat U = s.U(1.0);
    for (Eigen::Index k = 0; k < 8; ++k)
        for (Eigen::Index l = 0; l < 8; ++l) {
            cplx expect = U(l, k) * (s.rho().matrix() * U.adjoint())(k, l);
            CHECK(std::abs(dec.coefficients(k, l) - expect) < 1e-12);
        }
    // t = 0: U = 1 and W, V share the computational basis, so only diagonal terms remain.
    StateDecomposition d0 = state_decomposition(s, 0.0, b);
    CHECK(d0.removed == 8 * 7);
    CMat diag = s.rho().matrix().diagonal().asDiagonal();
    CHECK(max_abs(d0.rho_prime - diag) < 1e-12);
    CHECK(std::abs(d0.rho_prime.trace() - 1.0) < 1e-12);
}

TEST_CASE("brownian circuit short run") {
    BrownianConfig cfg;
    cfg.shots = 64;
    cfg.dt = 1e-3;
    cfg.times = {0.0, 0.5, 1.0};
    BrownianResult r = brownian_average(cfg);
    CHECK(r.shots_used == 64);
    CHECK(r.max_drift < 1e-5);
    REQUIRE(r.points.size() == 3);
    for (int k = 0; k < 16; ++k) {
        auto [v1, w2, v2, w3] = CoarseTable::signs(k);
        CHECK(r.points[0].A[k] == doctest::Approx(w2 * w3 == 1 && v1 * v2 == 1 ? 0.25 : 0.0));
    }
    for (const BrownianPoint& p : r.points) {
        double s = 0.0;
        for (double a : p.A) s += a;
        CHECK(s == doctest::Approx(1.0));
        for (int k = 0; k < 16; ++k) {
            auto [v1, w2, v2, w3] = CoarseTable::signs(k);
            // Per shot the table obeys the sixteen-term form with G and F, so the means do too.
            double model =
                (1.0 + w2 * w3 + v1 * v2 + (w2 + w3) * (v1 + v2) * p.G + w2 * w3 * v1 * v2 * p.F) / 16.0;
            CHECK(std::abs(p.A[k] - model) < 1e-12);
        }
    }
    BrownianConfig again = cfg;
    again.threads = 1;
    BrownianResult r1 = brownian_average(again);
    CHECK(r1.points[2].F == r.points[2].F);
    CHECK_THROWS_AS(brownian_average([] {
                        BrownianConfig c;
                        c.dt = 1e-2;
                        return c;
                    }()),
                    std::invalid_argument);
}

TEST_CASE("euler-maruyama drift is caught and counted") {
    BrownianConfig cfg;
    cfg.integrator = BrownianIntegrator::EulerMaruyama;
    cfg.shots = 4;
    cfg.times = {0.1};
    BrownianResult r = brownian_average(cfg);
    CHECK(r.max_drift > cfg.drift_tolerance);
    CHECK(r.shots_discarded == 4);
    CHECK(r.points.empty());
    cfg.drift_tolerance = 1.0;
    CHECK(brownian_average(cfg).shots_used == 4);
}
