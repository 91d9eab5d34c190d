#include "qtk/engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "qtk/parallel.hpp"

namespace qtk {

namespace {

double trace_product(const CMat& a, const CMat& b) { return (a.cwiseProduct(b.transpose())).sum().real(); }

CMat diag_in_basis(const CMat& vectors, const RVec& pops) {
    return vectors * pops.cast<cplx>().asDiagonal() * vectors.adjoint();
}

// e^{-i H dt} for real symmetric H
CMat step_propagator(const RealSpectrum& s, double dt) {
    CVec ph(s.values.size());
    for (Eigen::Index k = 0; k < ph.size(); ++k) ph(k) = std::polar(1.0, -s.values(k) * dt);
    CMat v = s.vectors.cast<cplx>();
    return v * ph.asDiagonal() * v.adjoint();
}

bool proportional_to_identity(const CMat& rho) {
    const double d = static_cast<double>(rho.rows());
    return max_abs(rho - CMat::Identity(rho.rows(), rho.cols()) / d) < 1e-15;
}

}  // namespace

void CycleConfig::validate() const {
    if (!(Wb >= 0)) throw std::invalid_argument("CycleConfig: Wb must be >= 0");
    if (!(beta_h >= 0)) throw std::invalid_argument("CycleConfig: beta_h must be >= 0");
    if (!(beta_c >= beta_h)) throw std::invalid_argument("CycleConfig: need beta_c >= beta_h");
    if (!(v >= 0)) throw std::invalid_argument("CycleConfig: speed must be >= 0");
    if (!(dt_times_gap > 0)) throw std::invalid_argument("CycleConfig: timestep must be positive");
}

CycleRecord make_record(double E0, double Etau, double Etau1, double Etau2) {
    CycleRecord c;
    c.E0 = E0;
    c.Etau = Etau;
    c.Etau1 = Etau1;
    c.Etau2 = Etau2;
    c.W1 = E0 - Etau;
    c.Q2 = Etau1 - Etau;
    c.W3 = Etau1 - Etau2;
    c.Q4 = E0 - Etau2;
    c.Wtot = c.W1 + c.W3;
    return c;
}

RVec gibbs_weights(const RVec& e, double beta) {
    if (e.size() == 0) throw std::invalid_argument("gibbs_weights: empty spectrum");
    if (beta < 0) throw std::invalid_argument("gibbs_weights: negative beta");
    const double emin = e.minCoeff();
    RVec w(e.size());
    if (std::isinf(beta)) {
        for (Eigen::Index k = 0; k < e.size(); ++k) w(k) = (e(k) == emin) ? 1.0 : 0.0;
    } else {
        for (Eigen::Index k = 0; k < e.size(); ++k) w(k) = std::exp(-beta * (e(k) - emin));
    }
    return w / w.sum();
}

DensityMatrix initial_state(const HermitianOperator& H_goe, double beta_h) {
    auto s = eigh(H_goe);
    return DensityMatrix(diag_in_basis(s.vectors, gibbs_weights(s.values, beta_h)));
}

DensityMatrix adiabatic_stroke(const DensityMatrix& rho, const SpectralDecomposition& start,
                               const SpectralDecomposition& end) {
    if (start.dim() != end.dim() || start.dim() != rho.dim())
        throw std::invalid_argument("adiabatic_stroke: dimension mismatch (" + std::to_string(start.dim()) + ", " +
                                    std::to_string(end.dim()) + ", rho " + std::to_string(rho.dim()) + ")");
    CMat U = end.vectors * start.vectors.adjoint();
    CMat r = U * rho.matrix() * U.adjoint();
    return DensityMatrix(0.5 * (r + r.adjoint()));
}

std::vector<std::pair<int, int>> gap_chains(const RVec& e, double Wb) {
    std::vector<std::pair<int, int>> chains;
    const int n = static_cast<int>(e.size());
    int first = 0;
    for (int k = 1; k <= n; ++k) {
        if (k == n || !(e(k) - e(k - 1) < Wb)) {
            if (k - 1 > first) chains.emplace_back(first, k - 1);
            first = k;
        }
    }
    return chains;
}

RVec cold_redistribute(const RVec& pops, const RVec& e, double Wb, double beta_c) {
    if (pops.size() != e.size()) throw std::invalid_argument("cold_redistribute: size mismatch");
    RVec out = pops;
    for (auto [a, b] : gap_chains(e, Wb)) {
        const int len = b - a + 1;
        double mass = pops.segment(a, len).sum();
        out.segment(a, len) = gibbs_weights(e.segment(a, len), beta_c) * mass;
    }
    return out;
}

BathResult cold_thermalize(const DensityMatrix& rho, const SpectralDecomposition& mbl, double Wb, double beta_c) {
    if (rho.dim() != mbl.dim()) throw std::invalid_argument("cold_thermalize: dimension mismatch");
    if (!(Wb >= 0)) throw std::invalid_argument("cold_thermalize: Wb must be >= 0");
    const CMat& V = mbl.vectors;
    RVec pops = (V.adjoint() * rho.matrix() * V).diagonal().real();
    double before = trace_product(rho.matrix(), mbl.reconstruct());
    RVec after = cold_redistribute(pops, mbl.values, Wb, beta_c);
    CMat r = diag_in_basis(V, after);
    return {DensityMatrix(0.5 * (r + r.adjoint())), after.dot(mbl.values) - before};
}

BathResult hot_thermalize(const DensityMatrix& rho, const HermitianOperator& H_goe, double beta_h) {
    if (rho.dim() != H_goe.dim()) throw std::invalid_argument("hot_thermalize: dimension mismatch");
    double before = trace_product(rho.matrix(), H_goe.matrix());
    DensityMatrix g = initial_state(H_goe, beta_h);
    return {g, trace_product(g.matrix(), H_goe.matrix()) - before};
}

CycleRecord run_cycle_levels(const RVec& hot_side, const RVec& cold_side, const CycleConfig& cfg) {
    cfg.validate();
    if (hot_side.size() != cold_side.size()) throw std::invalid_argument("run_cycle_levels: spectra differ in size");
    RVec p0 = gibbs_weights(hot_side, cfg.beta_h);
    RVec p1 = cold_redistribute(p0, cold_side, cfg.Wb, cfg.beta_c);
    return make_record(p0.dot(hot_side), p0.dot(cold_side), p1.dot(cold_side), p1.dot(hot_side));
}

CycleRecord run_cycle_dense(const HermitianOperator& H_goe, const HermitianOperator& H_mbl, const CycleConfig& cfg) {
    cfg.validate();
    auto sg = eigh(H_goe), sm = eigh(H_mbl);
    DensityMatrix rho0 = initial_state(H_goe, cfg.beta_h);
    double E0 = trace_product(rho0.matrix(), H_goe.matrix());
    DensityMatrix rho1 = adiabatic_stroke(rho0, sg, sm);
    double Etau = trace_product(rho1.matrix(), H_mbl.matrix());
    BathResult cold = cold_thermalize(rho1, sm, cfg.Wb, cfg.beta_c);
    double Etau1 = trace_product(cold.rho.matrix(), H_mbl.matrix());
    DensityMatrix rho3 = adiabatic_stroke(cold.rho, sm, sg);
    double Etau2 = trace_product(rho3.matrix(), H_goe.matrix());
    return make_record(E0, Etau, Etau1, Etau2);
}

DiabaticStroke diabatic_stroke(const DensityMatrix& rho, const HeisenbergParams& params,
                               const DisorderRealization& r, double alpha_from, double alpha_to, double v, double dt,
                               std::size_t max_steps) {
    if (!(v > 0)) throw std::invalid_argument("diabatic_stroke: speed must be positive");
    if (!(dt > 0)) throw std::invalid_argument("diabatic_stroke: timestep must be positive");
    const double span = std::abs(alpha_to - alpha_from);
    const double dir = alpha_to >= alpha_from ? 1.0 : -1.0;
    const double tau = span * params.energy_unit / v;
    double ratio = tau / dt;
    double K = std::floor(ratio);
    if (ratio - K > 1.0 - 1e-9) K += 1.0;
    double partial = std::max(0.0, tau - K * dt);
    if (partial < 1e-12 * dt) partial = 0.0;
    const double needed = K + (partial > 0 ? 1 : 0);
    if (needed > static_cast<double>(max_steps))
        throw std::runtime_error("diabatic_stroke: " + std::to_string(static_cast<long double>(needed)) +
                                 " steps required, cap is " + std::to_string(max_steps));
    DiabaticStroke out{rho, static_cast<std::size_t>(needed), 0.0};
    if (proportional_to_identity(rho.matrix())) return out;

    const Eigen::Index d = rho.dim();
    CMat U = CMat::Identity(d, d);
    auto alpha_at = [&](double k) {
        double a = alpha_from + dir * k * v * dt / params.energy_unit;
        return std::clamp(a, std::min(alpha_from, alpha_to), std::max(alpha_from, alpha_to));
    };
    const auto steps = static_cast<std::size_t>(K);
    for (std::size_t k = 0; k <= steps; ++k) {
        double len = k < steps ? dt : partial;
        if (len == 0.0) continue;
        RMat H = heisenberg_sector_matrix(params.at(alpha_at(static_cast<double>(k))), r);
        if (H.rows() != d) throw std::invalid_argument("diabatic_stroke: state dimension does not match the chain sector");
        U = step_propagator(eigh_real(H), len) * U;
    }
    out.unitarity_error = max_abs(U.adjoint() * U - CMat::Identity(d, d));
    if (out.unitarity_error > 1e-8)
        throw std::runtime_error("diabatic_stroke: propagator unitarity error " + std::to_string(out.unitarity_error));
    CMat rr = U * rho.matrix() * U.adjoint();
    out.rho = DensityMatrix(0.5 * (rr + rr.adjoint()));
    return out;
}

CycleRecord run_cycle(const DisorderRealization& r, const HeisenbergParams& params, const CycleConfig& cfg) {
    cfg.validate();
    RMat hg = heisenberg_sector_matrix(params.at(0.0), r);
    RMat hm = heisenberg_sector_matrix(params.at(1.0), r);
    if (cfg.v == 0.0) return run_cycle_levels(eigh_real(hg, false).values, eigh_real(hm, false).values, cfg);

    HermitianOperator Hg = HermitianOperator::from_real(hg), Hm = HermitianOperator::from_real(hm);
    const double gap = mean_gap_rescaled(params.energy_unit, static_cast<double>(hg.rows()));
    const double dt = cfg.dt_times_gap / gap;
    DensityMatrix rho0 = initial_state(Hg, cfg.beta_h);
    double E0 = trace_product(rho0.matrix(), Hg.matrix());
    auto s1 = diabatic_stroke(rho0, params, r, 0.0, 1.0, cfg.v, dt, cfg.max_steps);
    double Etau = trace_product(s1.rho.matrix(), Hm.matrix());
    auto cold = cold_thermalize(s1.rho, eigh(Hm), cfg.Wb, cfg.beta_c);
    double Etau1 = trace_product(cold.rho.matrix(), Hm.matrix());
    auto s3 = diabatic_stroke(cold.rho, params, r, 1.0, 0.0, cfg.v, dt, cfg.max_steps);
    double Etau2 = trace_product(s3.rho.matrix(), Hg.matrix());
    return make_record(E0, Etau, Etau1, Etau2);
}

double speed_for_steps(int K, double energy_unit, double dt) { return energy_unit / (K * dt); }

std::vector<CycleRecord> diabatic_cycles_nested(const DisorderRealization& r, const HeisenbergParams& params,
                                                const CycleConfig& cfg, const std::vector<int>& steps, double dt) {
    cfg.validate();
    if (steps.empty()) return {};
    const int kmax = *std::max_element(steps.begin(), steps.end());
    for (int K : steps)
        if (K <= 0 || kmax % K != 0)
            throw std::invalid_argument("diabatic_cycles_nested: step counts must be positive divisors of the largest");
    if (static_cast<std::size_t>(kmax) > cfg.max_steps)
        throw std::runtime_error("diabatic_cycles_nested: " + std::to_string(kmax) + " steps required, cap is " +
                                 std::to_string(cfg.max_steps));

    RMat hg = heisenberg_sector_matrix(params.at(0.0), r);
    RMat hm = heisenberg_sector_matrix(params.at(1.0), r);
    const Eigen::Index d = hg.rows();
    auto sg = eigh_real(hg), sm = eigh_real(hm);
    RVec p0 = gibbs_weights(sg.values, cfg.beta_h);
    CMat Vg = sg.vectors.cast<cplx>(), Vm = sm.vectors.cast<cplx>();
    CMat rho0 = diag_in_basis(Vg, p0);
    const bool mixed = proportional_to_identity(rho0);

    const std::size_t n = steps.size();
    std::vector<CMat> U1(n, CMat::Identity(d, d)), U3(n, CMat::Identity(d, d));
    // Stroke 1 applies H(j/kmax) for j = 0, s, 2s, ... (s = kmax/K) in time order, so
    // left-multiply while ascending in j. Stroke 3 visits j = kmax, kmax - s, ..., s;
    // its later factors sit on the left, so right-multiply while ascending.
    for (int j = 0; j <= kmax; ++j) {
        bool used = false;
        for (std::size_t q = 0; q < n; ++q) {
            int s = kmax / steps[q];
            if (j % s == 0 && ((j < kmax && !mixed) || j > 0)) used = true;
        }
        if (!used) continue;
        CMat P = step_propagator(eigh_real(heisenberg_sector_matrix(params.at(double(j) / kmax), r)), dt);
        for (std::size_t q = 0; q < n; ++q) {
            int s = kmax / steps[q];
            if (j % s != 0) continue;
            if (j < kmax && !mixed) U1[q] = P * U1[q];
            if (j > 0) U3[q] = U3[q] * P;
        }
    }

    const double E0 = p0.dot(sg.values);
    std::vector<CycleRecord> out;
    out.reserve(n);
    for (std::size_t q = 0; q < n; ++q) {
        for (const CMat* U : {&U1[q], &U3[q]}) {
            double err = max_abs(U->adjoint() * *U - CMat::Identity(d, d));
            if (err > 1e-8) throw std::runtime_error("diabatic_cycles_nested: unitarity error " + std::to_string(err));
        }
        RVec pm(d);
        if (mixed) {
            pm.setConstant(1.0 / static_cast<double>(d));
        } else {
            CMat rho1 = U1[q] * rho0 * U1[q].adjoint();
            pm = (Vm.adjoint() * rho1 * Vm).diagonal().real();
        }
        const double Etau = pm.dot(sm.values);
        RVec pc = cold_redistribute(pm, sm.values, cfg.Wb, cfg.beta_c);
        CMat M = U3[q] * Vm;
        RVec hdiag = (M.adjoint() * hg.cast<cplx>() * M).diagonal().real();
        out.push_back(make_record(E0, Etau, pc.dot(sm.values), pc.dot(hdiag)));
    }
    return out;
}

std::pair<double, double> qubit_toy(const QubitToyParams& p) {
    if (!(p.delta_mbl >= 0 && p.delta_mbl <= p.delta_goe && p.delta_goe > 0))
        throw std::invalid_argument("qubit_toy: need 0 <= delta_mbl <= delta_goe, delta_goe > 0");
    return {(p.delta_goe - p.delta_mbl) / 2.0, 1.0 - p.delta_mbl / p.delta_goe};
}

CycleRecord qubit_toy_cycle(const QubitToyParams& p) {
    qubit_toy(p);
    RVec hot(2), cold(2);
    hot << -p.delta_goe / 2, p.delta_goe / 2;
    cold << -p.delta_mbl / 2, p.delta_mbl / 2;
    CycleConfig cfg;
    cfg.Wb = std::numeric_limits<double>::infinity();  // the cold bath bridges the MBL gap
    cfg.beta_c = kInfBeta;
    cfg.beta_h = 0.0;
    return run_cycle_levels(hot, cold, cfg);
}

EnsembleStats summarize(const std::vector<CycleRecord>& recs) {
    const std::size_t n = recs.size();
    if (n < 2) throw std::invalid_argument("summarize: at least 2 records required");
    EnsembleStats s;
    s.count = n;
    auto moment = [&](auto field) {
        double m = 0;
        for (auto& r : recs) m += field(r);
        m /= n;
        double v = 0;
        for (auto& r : recs) v += (field(r) - m) * (field(r) - m);
        v /= (n - 1);
        return Moment{m, std::sqrt(v / n)};
    };
    s.W1 = moment([](const CycleRecord& r) { return r.W1; });
    s.W3 = moment([](const CycleRecord& r) { return r.W3; });
    s.Q2 = moment([](const CycleRecord& r) { return r.Q2; });
    s.Q4 = moment([](const CycleRecord& r) { return r.Q4; });
    s.Wtot = moment([](const CycleRecord& r) { return r.Wtot; });
    if (s.Q4.mean != 0.0) {
        const double a = s.Wtot.mean, b = s.Q4.mean;
        double cov = 0;
        for (auto& r : recs) cov += (r.Wtot - a) * (r.Q4 - b);
        cov /= (n - 1);
        const double va = s.Wtot.se * s.Wtot.se * n, vb = s.Q4.se * s.Q4.se * n;
        s.eta = a / b;
        double var = (va / (b * b) + a * a * vb / (b * b * b * b) - 2 * a * cov / (b * b * b)) / n;
        s.se_eta = std::sqrt(std::max(0.0, var));
    }
    return s;
}

SweepResult ensemble_sweep(const HeisenbergParams& params, const std::vector<double>& wb_over_gap, double beta_c,
                           double beta_h, std::size_t count, std::uint64_t seed, int threads) {
    params.validate();
    if (count < 2) throw std::invalid_argument("ensemble_sweep: count must be >= 2");
    const std::size_t dim = half_filling_basis(params.N).size();
    SweepResult res;
    res.mean_gap = mean_gap_rescaled(params.energy_unit, static_cast<double>(dim));
    std::vector<CycleConfig> cfgs;
    for (double f : wb_over_gap) {
        CycleConfig c;
        c.Wb = f * res.mean_gap;
        c.beta_c = beta_c;
        c.beta_h = beta_h;
        c.validate();
        cfgs.push_back(c);
    }
    auto per = parallel_map<std::vector<CycleRecord>>(count, threads, [&](std::size_t i) {
        auto r = DisorderRealization::sample(params.N, seed, i);
        RVec eg = eigh_real(heisenberg_sector_matrix(params.at(0.0), r), false).values;
        RVec em = eigh_real(heisenberg_sector_matrix(params.at(1.0), r), false).values;
        std::vector<CycleRecord> out;
        for (auto& c : cfgs) out.push_back(run_cycle_levels(eg, em, c));
        return out;
    });
    for (std::size_t g = 0; g < cfgs.size(); ++g) {
        std::vector<CycleRecord> recs;
        recs.reserve(count);
        for (auto& p : per) recs.push_back(p[g]);
        res.points.push_back({wb_over_gap[g], cfgs[g].Wb, summarize(recs)});
    }
    return res;
}

WorstCase worst_case_rate(const std::vector<CycleRecord>& recs) {
    if (recs.empty()) throw std::invalid_argument("worst_case_rate: empty ensemble");
    WorstCase w;
    for (auto& r : recs) w.negatives += r.Wtot < 0;
    const double n = static_cast<double>(recs.size());
    w.rate = w.negatives / n;
    w.se = std::sqrt(w.rate * (1 - w.rate) / n);
    return w;
}

}  // namespace qtk
