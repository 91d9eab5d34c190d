#pragma once

#include <limits>
#include <optional>

namespace qtk {

struct AnalyticInputs {
    double mean_gap = 1.0;  // <delta>
    double Wb = 0.0;
    double beta_c = std::numeric_limits<double>::infinity();
    double beta_h = 0.0;
    double energy_unit = 1.0;
    int N = 12;
    double v = 0.0;
    double delta_minus = 0.0;  // 0 -> repulsion_scale(xi_gt, xi_lt, energy_unit)
    double xi_gt = 12.0;       // shallow localization length (subengine size)
    double xi_lt = 1.0;        // deep localization length
    double eps = 1.0 / 3.0;    // lower cutoff eps*Wb on working gaps for frac-LZ costs
};

// Flags for inputs outside T_C << Wb << <delta>. Predictions are still evaluated.
struct Regime {
    bool wide_bath = false;       // Wb / <delta> >= 1
    bool warm_cold_bath = false;  // beta_c * Wb <= 1
    bool valid() const { return !wide_bath && !warm_cold_bath; }
};

Regime regime(const AnalyticInputs& in);

struct Estimate {
    double value = 0.0;
    bool order_only = false;  // a scaling relation: compare logarithms, not values
    bool in_regime = true;
};

Estimate predict_q2(const AnalyticInputs& in);
Estimate predict_q4(const AnalyticInputs& in);
Estimate predict_wtot(const AnalyticInputs& in);
// 1 - phi' with the cold-bath corrections; empty when Wb = 0.
std::optional<Estimate> predict_eta(const AnalyticInputs& in);

struct DiabaticCosts {
    double W_APT = 0.0;
    double W_LZ = 0.0;
    double W_fracLZ = 0.0;
    double fracLZ_transitions = 0.0;  // v-dependent part of W_fracLZ
    double fracLZ_floor = 0.0;        // eps*Wb from gaps below the cutoff
};

// All costs vanish at v = 0. Order-of-magnitude estimates.
DiabaticCosts diabatic_costs(const AnalyticInputs& in);

struct SpeedWindow {
    double lower_shallow = 0.0;  // xi(t) = xi_gt
    double lower_deep = 0.0;     // xi(t) = xi_lt
    double upper_apt = 0.0;      // <delta>^2
    double upper_fraclz = 0.0;   // Wb^3 / delta_minus
    double v_min = 0.0, v_max = 0.0;
    bool empty() const { return !(v_min < v_max); }
};

SpeedWindow speed_window(const AnalyticInputs& in);

double repulsion_scale(double L, double xi, double energy_unit);
double subengine_gap(double xi_gt, double energy_unit);
double macro_power(double N_macro, double xi_gt, double energy_unit);

struct ColdTimeBounds {
    double markov = 0.0;      // E^2 / (Wb delta_minus^2)
    double high_order = 0.0;  // Wb (E / delta_minus^L)^(2/(L-1))
    double L = 0.0;           // max(<delta>/Wb, xi_gt)
};

ColdTimeBounds cold_time_bounds(const AnalyticInputs& in);

}  // namespace qtk
