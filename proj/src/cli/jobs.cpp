#include <cmath>
#include <stdexcept>

#include "qtk/cli.hpp"
#include "qtk/engine.hpp"
#include "qtk/nats.hpp"
#include "qtk/parallel.hpp"
#include "qtk/quasiprob.hpp"

namespace qtk::cli {

namespace {

// Repulsion-estimate realizations draw from streams far above the ensemble's.
constexpr std::uint64_t kRepulsionStream = std::uint64_t(1) << 40;

std::string num(double x) { return format_double(x); }

std::vector<double> time_grid(double t_max, double t_step) {
    if (!(t_step > 0) || !(t_max >= 0)) throw ConfigError("t_step must be positive and t_max nonnegative");
    const long long n = std::llround(t_max / t_step);
    if (std::abs(double(n) * t_step - t_max) > 1e-9 * std::max(1.0, t_max))
        throw ConfigError("t_max must be a multiple of t_step");
    std::vector<double> t;
    for (long long k = 0; k <= n; ++k) t.push_back(double(k) * t_step);
    return t;
}

HeisenbergParams chain_params(const JobConfig& c) {
    HeisenbergParams p;
    p.N = int(c.integer("N"));
    p.energy_unit = c.number("energy_unit");
    p.h_goe = c.number("h_goe");
    p.h_mbl = c.number("h_mbl");
    p.validate();
    return p;
}

std::size_t count(const JobConfig& c, const std::string& key, long long min) {
    long long n = c.integer(key);
    if (n < min) throw ConfigError(key + " must be >= " + std::to_string(min));
    return std::size_t(n);
}

CsvTable engine_sweep(const JobConfig& c, int threads) {
    HeisenbergParams p = chain_params(c);
    SweepResult r = ensemble_sweep(p, c.numbers("wb_over_delta"), c.number("beta_c"), c.number("beta_h"),
                                   count(c, "realizations", 2), c.u64("seed"), threads);
    CsvTable t{{"wb", "mean_wtot", "se_wtot", "eta", "se_eta"}, {}};
    for (const SweepPoint& s : r.points) {
        // An undefined efficiency (vanishing heat intake) is written as nan.
        std::string eta = s.stats.eta ? num(*s.stats.eta) : "nan", se = s.stats.eta ? num(s.stats.se_eta) : "nan";
        t.rows.push_back({num(s.Wb), num(s.stats.Wtot.mean), num(s.stats.Wtot.se), eta, se});
    }
    return t;
}

CsvTable engine_diabatic(const JobConfig& c, int threads) {
    HeisenbergParams p = chain_params(c);
    const std::uint64_t seed = c.u64("seed");
    const std::size_t n = count(c, "realizations", 2), nrep = count(c, "repulsion_realizations", 1);
    std::vector<int> steps;
    for (long long k : c.integers("steps")) {
        if (k <= 0) throw ConfigError("steps must be positive");
        steps.push_back(int(k));
    }
    const double gap = mean_gap_rescaled(p.energy_unit, double(half_filling_basis(p.N).size()));
    const double dt = c.number("dt_times_gap") / gap;
    if (!(dt > 0)) throw ConfigError("dt_times_gap must be positive");
    CycleConfig cfg;
    cfg.Wb = c.number("wb_over_delta") * gap;
    cfg.beta_c = c.number("beta_c");
    cfg.beta_h = c.number("beta_h");
    cfg.validate();

    auto gap_lists = parallel_map<std::vector<double>>(nrep, threads, [&](std::size_t i) {
        auto r = DisorderRealization::sample(p.N, seed, kRepulsionStream + i);
        RVec e = eigh_real(heisenberg_sector_matrix(p.at(1.0), r), false).values;
        std::vector<double> g;
        for (Eigen::Index k = 1; k < e.size(); ++k) g.push_back(e(k) - e(k - 1));
        return g;
    });
    std::vector<double> gaps;
    for (auto& g : gap_lists) gaps.insert(gaps.end(), g.begin(), g.end());
    const double dminus = level_repulsion_scale(gaps).delta_minus;
    const double vstar = cfg.Wb * cfg.Wb * cfg.Wb / dminus;

    struct PerRealization {
        CycleRecord adiabatic;
        std::vector<CycleRecord> diabatic;
    };
    auto per = parallel_map<PerRealization>(n, threads, [&](std::size_t i) {
        auto r = DisorderRealization::sample(p.N, seed, i);
        PerRealization out;
        out.adiabatic = run_cycle(r, p, cfg);
        out.diabatic = diabatic_cycles_nested(r, p, cfg, steps, dt);
        return out;
    });

    CsvTable t{{"steps", "v", "v_over_vstar", "mean_wtot", "se_wtot"}, {}};
    std::vector<CycleRecord> recs;
    for (auto& x : per) recs.push_back(x.adiabatic);
    EnsembleStats a = summarize(recs);
    t.rows.push_back({"0", num(0.0), num(0.0), num(a.Wtot.mean), num(a.Wtot.se)});
    for (std::size_t q = 0; q < steps.size(); ++q) {
        recs.clear();
        for (auto& x : per) recs.push_back(x.diabatic[q]);
        EnsembleStats s = summarize(recs);
        double v = speed_for_steps(steps[q], p.energy_unit, dt);
        t.rows.push_back({std::to_string(steps[q]), num(v), num(v / vstar), num(s.Wtot.mean), num(s.Wtot.se)});
    }
    return t;
}

CsvTable gapstats(const JobConfig& c, int threads) {
    HeisenbergParams p;
    p.N = int(c.integer("N"));
    p.energy_unit = c.number("energy_unit");
    // Fixed field: alpha = 0 pins h() to h_goe, h_mbl only has to exceed it.
    p.h_goe = c.number("h");
    p.h_mbl = p.h_goe + 1.0;
    p.alpha = 0.0;
    p.validate();
    const double frac = c.number("window_fraction");
    const std::uint64_t seed = c.u64("seed");
    auto stats = parallel_map<GapStatistics>(count(c, "realizations", 1), threads, [&](std::size_t i) {
        auto r = DisorderRealization::sample(p.N, seed, i);
        return gap_statistics(eigh_real(heisenberg_sector_matrix(p, r), false).values, frac);
    });
    CsvTable t{{"realization", "mean_gap", "ks_poisson", "ks_goe", "poisson_like"}, {}};
    for (std::size_t i = 0; i < stats.size(); ++i)
        t.rows.push_back({std::to_string(i), num(stats[i].mean_gap), num(stats[i].ks_poisson), num(stats[i].ks_goe),
                          stats[i].poisson_like() ? "1" : "0"});
    return t;
}

std::string abcd(int k) {
    std::string s = "0000";
    for (int b = 0; b < 4; ++b) s[b] = (k >> (3 - b)) & 1 ? '1' : '0';
    return s;
}

CsvTable otoc_job(const JobConfig& c, int threads) {
    IsingParams p;
    p.N = int(c.integer("N"));
    p.J = c.number("J");
    p.h = c.number("h");
    p.g = c.number("g");
    OtocSetting s = OtocSetting::ising(p);
    std::vector<double> ts = time_grid(c.number("t_max"), c.number("t_step"));
    auto rows = parallel_map<std::vector<std::string>>(ts.size(), threads, [&](std::size_t i) {
        CoarseTable a = coarse_quasiprob(s, ts[i]);
        cplx F = reconstruct_otoc(a);
        std::vector<std::string> row{num(ts[i]), num(F.real()), num(F.imag())};
        for (int k = 0; k < 16; ++k) {
            row.push_back(num(a.values[k].real()));
            row.push_back(num(a.values[k].imag()));
        }
        return row;
    });
    CsvTable t{{"t", "re_F", "im_F"}, std::move(rows)};
    for (int k = 0; k < 16; ++k) {
        t.header.push_back("re_A" + abcd(k));
        t.header.push_back("im_A" + abcd(k));
    }
    return t;
}

CsvTable brownian_job(const JobConfig& c, int threads) {
    BrownianConfig b;
    b.N = int(c.integer("N"));
    b.dt = c.number("dt");
    b.times = time_grid(c.number("t_max"), c.number("t_step"));
    b.shots = count(c, "shots", 2);
    b.projection_interval = int(c.integer("projection_interval"));
    b.seed = c.u64("seed");
    b.threads = threads;
    const std::string& integ = c.string("integrator");
    if (integ == "exponential")
        b.integrator = BrownianIntegrator::Exponential;
    else if (integ == "euler-maruyama")
        b.integrator = BrownianIntegrator::EulerMaruyama;
    else
        throw ConfigError("integrator must be 'exponential' or 'euler-maruyama', got '" + integ + "'");
    BrownianResult r = brownian_average(b);
    if (r.shots_used < 2) throw std::runtime_error("brownian: fewer than two shots stayed within the drift tolerance");
    CsvTable t{{"t", "shots", "F", "se_F", "G", "se_G"}, {}};
    for (int k = 0; k < 16; ++k) {
        t.header.push_back("A" + abcd(k));
        t.header.push_back("se_A" + abcd(k));
    }
    for (const BrownianPoint& p : r.points) {
        std::vector<std::string> row{num(p.t), std::to_string(r.shots_used), num(p.F), num(p.se_F), num(p.G), num(p.se_G)};
        for (int k = 0; k < 16; ++k) {
            row.push_back(num(p.A[k]));
            row.push_back(num(p.se_A[k]));
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

ChargeSet spin_copies(int n) {
    ChargeSet q;
    for (const CMat& s : {pauli::X(), pauli::Y(), pauli::Z()}) {
        CMat total = CMat::Zero(Eigen::Index(1) << n, Eigen::Index(1) << n);
        for (int l = 0; l < n; ++l) total += embed(s, l, n, 2);
        q.charges.push_back(total);
    }
    return q;
}

CsvTable nats_audit(const JobConfig& c, int threads) {
    const int lo = int(c.integer("N_min")), hi = int(c.integer("N_max"));
    if (lo < 2 || hi > 6 || lo > hi) throw ConfigError("need 2 <= N_min <= N_max <= 6");
    std::vector<double> v = c.numbers("v"), alphas = c.numbers("alphas");
    const double eta = c.number("eta");
    const std::string& scaling = c.string("eta_scaling");
    if (scaling != "sqrt" && scaling != "fixed") throw ConfigError("eta_scaling must be 'sqrt' or 'fixed'");
    const std::size_t nch = count(c, "channels", 1);
    const std::uint64_t seed = c.u64("seed");
    ChargeSet q = ChargeSet::spin_half();
    if (v.size() != q.size()) throw ConfigError("v needs one entry per charge (sigma^x, sigma^y, sigma^z)");
    std::vector<double> mu = solve_potentials(q, v);
    Nats g = build_nats(q, mu);
    SeededRng state_rng(seed, 0);
    const CMat rho = random_density(2, state_rng).matrix();

    CsvTable t{{"N", "dim_M", "mean_D", "max_trace_distance", "pinsker_margin", "worst_F_violation"}, {}};
    for (int N = lo; N <= hi; ++N) {
        double e = scaling == "sqrt" ? eta * std::sqrt(2.0 / N) : eta;
        AmcSubspace M = amc_subspace(q, v, N, e);
        MicrocanonicalReduction r = microcanonical_reduction(M, g.gamma);
        // Channels couple one copy to the other N - 1 copies acting as reservoir.
        NatoSampler sampler(q, spin_copies(N - 1), mu);
        auto chans = parallel_map<NatoChannel>(nch, threads, [&](std::size_t k) {
            SeededRng rng(seed, (std::uint64_t(N) << 32) + k + 1);
            return sampler.sample(rng);
        });
        AuditReport a = second_law_audit(rho, g, chans, alphas);
        t.rows.push_back({std::to_string(N), std::to_string(M.size()), num(r.mean_D), num(r.max_trace_distance),
                          num(r.pinsker_margin), num(a.worst_violation)});
    }
    return t;
}

}  // namespace

CsvTable run_job(const JobConfig& cfg, int threads) {
    if (threads <= 0) threads = default_threads();
    const std::string& s = cfg.subcommand;
    if (s == "engine-sweep") return engine_sweep(cfg, threads);
    if (s == "engine-diabatic") return engine_diabatic(cfg, threads);
    if (s == "gapstats") return gapstats(cfg, threads);
    if (s == "otoc") return otoc_job(cfg, threads);
    if (s == "brownian") return brownian_job(cfg, threads);
    if (s == "nats-audit") return nats_audit(cfg, threads);
    throw ConfigError("unknown subcommand '" + s + "'");
}

}  // namespace qtk::cli
