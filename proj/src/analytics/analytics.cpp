#include "qtk/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qtk {

namespace {

constexpr double kLn2 = std::numbers::ln2;

// 1/beta, 0 for an infinitely cold bath
double temp(double beta) { return std::isinf(beta) ? 0.0 : 1.0 / beta; }

double hot_factor(const AnalyticInputs& in) {
    double b = in.beta_h * in.energy_unit;
    return std::exp(-in.N * b * b / 4.0);
}

double delta_minus(const AnalyticInputs& in) {
    return in.delta_minus > 0 ? in.delta_minus : repulsion_scale(in.xi_gt, in.xi_lt, in.energy_unit);
}

void check(const AnalyticInputs& in) {
    if (!(in.mean_gap > 0)) throw std::invalid_argument("analytics: mean gap must be positive");
    if (!(in.Wb >= 0)) throw std::invalid_argument("analytics: Wb must be nonnegative");
    if (!(in.beta_c >= 0) || !(in.beta_h >= 0)) throw std::invalid_argument("analytics: negative beta");
}

Estimate exact(double v, const AnalyticInputs& in) { return {v, false, regime(in).valid()}; }

}  // namespace

Regime regime(const AnalyticInputs& in) {
    Regime r;
    r.wide_bath = in.Wb / in.mean_gap >= 1.0;
    r.warm_cold_bath = in.beta_c * in.Wb <= 1.0;
    return r;
}

Estimate predict_q2(const AnalyticInputs& in) {
    check(in);
    double Tc = temp(in.beta_c);
    double q = (-in.Wb * in.Wb / 2 + std::numbers::pi * std::numbers::pi / 6 * Tc * Tc) * hot_factor(in) / in.mean_gap;
    return exact(q, in);
}

Estimate predict_q4(const AnalyticInputs& in) {
    check(in);
    double Tc = temp(in.beta_c);
    double q = in.Wb - 2 * kLn2 * Tc + in.Wb * in.Wb / (2 * in.mean_gap) * hot_factor(in) +
               4 * kLn2 * in.Wb * Tc / in.mean_gap;
    return exact(q, in);
}

Estimate predict_wtot(const AnalyticInputs& in) {
    check(in);
    double Tc = temp(in.beta_c);
    return exact(in.Wb - 2 * kLn2 * Tc + 4 * kLn2 * in.Wb * Tc / in.mean_gap, in);
}

std::optional<Estimate> predict_eta(const AnalyticInputs& in) {
    check(in);
    if (in.Wb == 0.0) return std::nullopt;
    double Tc = temp(in.beta_c);
    double x = in.Wb / in.mean_gap;
    double phi = x / 2 * hot_factor(in) + kLn2 * Tc / in.mean_gap - 2 * kLn2 * x * Tc / in.mean_gap;
    return exact(1.0 - phi, in);
}

DiabaticCosts diabatic_costs(const AnalyticInputs& in) {
    check(in);
    DiabaticCosts c;
    if (in.v < 0) throw std::invalid_argument("diabatic_costs: negative speed");
    if (in.v == 0.0) return c;
    const double v2 = in.v * in.v;
    c.W_APT = v2 * in.beta_h / (std::sqrt(static_cast<double>(in.N)) * in.energy_unit * in.mean_gap) *
              std::log(in.mean_gap * in.mean_gap / in.v) * hot_factor(in);
    if (in.Wb > 0) {
        double dm = delta_minus(in);
        c.fracLZ_transitions = v2 * dm * dm / (80 * std::pow(in.eps, 5) * std::pow(in.Wb, 5));
        c.fracLZ_floor = in.eps * in.Wb;
    }
    c.W_fracLZ = c.fracLZ_transitions + c.fracLZ_floor;
    return c;
}

SpeedWindow speed_window(const AnalyticInputs& in) {
    check(in);
    const double E2 = in.energy_unit * in.energy_unit;
    auto lower = [&](double xi_t) { return E2 * std::exp(-3 * in.xi_gt / xi_t) * std::pow(2.0, -2.5 * in.xi_gt); };
    SpeedWindow w;
    w.lower_shallow = lower(in.xi_gt);
    w.lower_deep = lower(in.xi_lt);
    w.upper_apt = in.mean_gap * in.mean_gap;
    w.upper_fraclz = std::pow(in.Wb, 3) / delta_minus(in);
    w.v_min = std::max(w.lower_shallow, w.lower_deep);
    w.v_max = std::min(w.upper_apt, w.upper_fraclz);
    return w;
}

double repulsion_scale(double L, double xi, double energy_unit) {
    if (!(xi > 0) || L < 0) throw std::invalid_argument("repulsion_scale: need L >= 0, xi > 0");
    return energy_unit * std::exp(-L / xi) * std::pow(2.0, -L);
}

double subengine_gap(double xi_gt, double energy_unit) {
    return energy_unit * std::sqrt(xi_gt) * std::pow(2.0, -xi_gt);
}

double macro_power(double N_macro, double xi_gt, double energy_unit) {
    return N_macro * subengine_gap(xi_gt, energy_unit);
}

ColdTimeBounds cold_time_bounds(const AnalyticInputs& in) {
    check(in);
    if (!(in.Wb > 0)) throw std::invalid_argument("cold_time_bounds: need Wb > 0");
    const double dm = delta_minus(in);
    ColdTimeBounds b;
    b.markov = in.energy_unit * in.energy_unit / (in.Wb * dm * dm);
    b.L = std::max(in.mean_gap / in.Wb, in.xi_gt);
    if (!(b.L > 1)) throw std::invalid_argument("cold_time_bounds: need L > 1");
    // logs avoid overflow of delta_minus^L
    double log_tau = std::log(in.Wb) + 2.0 / (b.L - 1) * (std::log(in.energy_unit) - b.L * std::log(dm));
    b.high_order = std::exp(log_tau);
    return b;
}

}  // namespace qtk
