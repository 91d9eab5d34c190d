#include <cmath>
#include <numbers>

#include "doctest.h"
#include "qtk/analytics.hpp"
#include "qtk/engine.hpp"

using namespace qtk;

namespace {

AnalyticInputs cold(double wb_over_gap, double gap = 0.01) {
    AnalyticInputs in;
    in.mean_gap = gap;
    in.Wb = wb_over_gap * gap;
    return in;
}

bool same_decade(double a, double b, double decades = 1.0) { return std::abs(std::log10(a / b)) <= decades; }

}  // namespace

TEST_CASE("heat and work predictions at zero cold temperature") {
    auto in = cold(1.0 / 16);
    const double Wb = in.Wb, d = in.mean_gap;
    CHECK(predict_q2(in).value == doctest::Approx(-Wb * Wb / (2 * d)).epsilon(1e-14));
    CHECK(predict_q4(in).value == doctest::Approx(Wb + Wb * Wb / (2 * d)).epsilon(1e-14));
    CHECK(predict_wtot(in).value == doctest::Approx(Wb).epsilon(1e-14));
    CHECK(predict_eta(in)->value == doctest::Approx(1 - Wb / (2 * d)).epsilon(1e-14));
    CHECK(predict_q2(in).in_regime);
    CHECK_FALSE(predict_q2(in).order_only);

    auto zero = cold(0.0);
    CHECK(predict_q2(zero).value == 0.0);
    CHECK(predict_wtot(zero).value == 0.0);
    CHECK_FALSE(predict_eta(zero).has_value());
}

TEST_CASE("predictions at finite cold temperature") {
    auto in = cold(0.1);
    in.beta_c = 40.0 / in.Wb;
    const double Wb = in.Wb, d = in.mean_gap, T = 1 / in.beta_c, l2 = std::log(2.0);
    CHECK(predict_q2(in).value == doctest::Approx((-Wb * Wb / 2 + std::numbers::pi * std::numbers::pi * T * T / 6) / d));
    CHECK(predict_q4(in).value == doctest::Approx(Wb - 2 * l2 * T + Wb * Wb / (2 * d) + 4 * l2 * Wb * T / d));
    CHECK(predict_wtot(in).value == doctest::Approx(Wb - 2 * l2 * T + 4 * l2 * Wb * T / d));
    CHECK(predict_eta(in)->value == doctest::Approx(1 - (Wb / (2 * d) + l2 * T / d - 2 * l2 * (Wb / d) * T / d)));

    // first law at retained orders: the residue is the O(T_C^2) term of Q2
    double residue = predict_wtot(in).value - predict_q2(in).value - predict_q4(in).value;
    CHECK(residue == doctest::Approx(-std::numbers::pi * std::numbers::pi * T * T / (6 * d)));
    in.beta_c = kInfBeta;
    CHECK(std::abs(predict_wtot(in).value - predict_q2(in).value - predict_q4(in).value) < 1e-16);
}

TEST_CASE("hot-bath factor and regime flags") {
    auto in = cold(1.0 / 8);
    in.beta_h = 0.1;
    in.N = 12;
    double g = std::exp(-12 * 0.01 / 4);
    CHECK(predict_q2(in).value == doctest::Approx(-in.Wb * in.Wb / (2 * in.mean_gap) * g));

    CHECK(regime(in).valid());
    in.Wb = 2 * in.mean_gap;
    CHECK(regime(in).wide_bath);
    CHECK_FALSE(predict_q4(in).in_regime);
    in.Wb = in.mean_gap / 8;
    in.beta_c = 0.5 / in.Wb;
    CHECK(regime(in).warm_cold_bath);
}

TEST_CASE("limits of the efficiency and power") {
    for (double x : {1e-2, 1e-4, 1e-6}) {
        auto in = cold(x);
        CHECK(std::abs(predict_eta(in)->value - 1.0) < x);
        CHECK(predict_wtot(in).value == doctest::Approx(x * in.mean_gap));
    }
    auto a = cold(0.2), b = cold(0.2);
    CHECK(predict_q4(a).value == predict_q4(b).value);
}

TEST_CASE("diabatic costs") {
    auto in = cold(0.1);
    in.delta_minus = 0.05 * in.mean_gap;
    in.v = 1e-6;
    auto c = diabatic_costs(in);
    CHECK(c.W_APT == 0.0);  // beta_H = 0
    CHECK(c.W_LZ == 0.0);
    CHECK(c.fracLZ_floor == doctest::Approx(in.Wb / 3));

    in.beta_h = 0.05;
    double expect = 1 / std::sqrt(12.0) * in.v * in.v * 0.05 / in.mean_gap *
                    std::log(in.mean_gap * in.mean_gap / in.v) * std::exp(-12 * 0.05 * 0.05 / 4);
    CHECK(diabatic_costs(in).W_APT == doctest::Approx(expect));

    // adiabatic limit
    double prev = diabatic_costs(in).fracLZ_transitions;
    for (double v : {1e-7, 1e-8, 1e-9}) {
        in.v = v;
        auto cv = diabatic_costs(in);
        CHECK(cv.fracLZ_transitions == doctest::Approx(prev / 100));
        CHECK(cv.W_APT < 1e-12);
        prev = cv.fracLZ_transitions;
    }
    in.v = 0.0;
    auto c0 = diabatic_costs(in);
    CHECK(c0.W_APT == 0.0);
    CHECK(c0.W_fracLZ == 0.0);

    // at v = Wb^3 / delta_minus the cost is of order Wb
    in.beta_h = 0.0;
    in.v = std::pow(in.Wb, 3) / in.delta_minus;
    auto cs = diabatic_costs(in);
    CHECK(cs.W_fracLZ / in.Wb == doctest::Approx(std::pow(3.0, 5) / 80 + 1.0 / 3));
    CHECK(same_decade(cs.W_fracLZ, in.Wb));
}

TEST_CASE("speed window at illustrative localization lengths") {
    AnalyticInputs in;
    in.xi_gt = 12;
    in.xi_lt = 1;
    // <delta> ~ E / 2^xi, dropping the subdominant sqrt(xi), and Wb ~ <delta>/10
    in.mean_gap = std::pow(2.0, -12);
    in.Wb = in.mean_gap / 10;
    auto w = speed_window(in);
    CHECK(same_decade(w.lower_shallow, 1e-11));
    CHECK(same_decade(w.lower_deep, 1e-25));
    CHECK(same_decade(w.upper_fraclz, 1e-5));
    CHECK(same_decade(w.upper_apt, 1e-7));
    CHECK(w.v_min == w.lower_shallow);
    CHECK(w.v_max == std::min(w.upper_apt, w.upper_fraclz));
    CHECK_FALSE(w.empty());
    CHECK(w.lower_deep < w.upper_fraclz);
}

TEST_CASE("repulsion scale, subengine gap and macroscopic power") {
    CHECK(repulsion_scale(0, 1, 2.5) == 2.5);
    CHECK(repulsion_scale(4, 2, 1.0) == doctest::Approx(std::exp(-2.0) / 16));
    CHECK(subengine_gap(12, 1.0) == doctest::Approx(std::sqrt(12.0) / 4096));
    CHECK(macro_power(200, 12, 1.0) == doctest::Approx(2 * macro_power(100, 12, 1.0)));
    CHECK(macro_power(100, 12, 1.0) == doctest::Approx(100 * subengine_gap(12, 1.0)));
}

TEST_CASE("cold-bath time bounds") {
    AnalyticInputs in;
    in.mean_gap = std::pow(2.0, -12);
    in.Wb = in.mean_gap / 10;
    auto b = cold_time_bounds(in);
    double target = 10 * std::exp(24.0) * std::pow(2.0, 36);
    CHECK(b.markov == doctest::Approx(target).epsilon(1e-9));
    CHECK(same_decade(b.markov, 1e22));
    CHECK(b.L == 12.0);
    double dm = repulsion_scale(12, 1, 1);
    CHECK(b.high_order == doctest::Approx(in.Wb * std::pow(1 / std::pow(dm, 12), 2.0 / 11)));
    CHECK(b.high_order < b.markov);

    in.Wb = in.mean_gap / 40;
    CHECK(cold_time_bounds(in).L == doctest::Approx(40.0));
}

TEST_CASE("heat predictions against a small ensemble") {
    HeisenbergParams p;
    p.N = 8;
    auto sweep = ensemble_sweep(p, {1.0 / 16}, kInfBeta, 0.0, 400, 5, 1);
    const auto& pt = sweep.points[0];
    AnalyticInputs in;
    in.mean_gap = sweep.mean_gap;
    in.Wb = pt.Wb;
    in.N = 8;
    double q2 = pt.stats.Q2.mean, q4 = pt.stats.Q4.mean;
    MESSAGE("Q2/pred " << q2 / predict_q2(in).value << ", Q4/pred " << q4 / predict_q4(in).value);
    CHECK(q2 < 0);
    CHECK(q2 / predict_q2(in).value > 0.5);
    CHECK(q2 / predict_q2(in).value < 2.0);
    CHECK(std::abs(q4 / predict_q4(in).value - 1) < 0.3);
}
