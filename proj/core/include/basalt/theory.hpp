#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace basalt {

/// Mean-field model parameters. n may be an equivalent network size.
struct TheoryParams {
    double n = 1000;
    double f = 0.1;
    double v = 100;
    double tau = 1;
    double rho = 1;
    double k = 50;

    double correct() const { return (1.0 - f) * n; }  // Q
    double b_max() const { return f * n; }

    /// Throws DomainError unless 0 < f < 1, n > 0, v > 0, tau > 0, rho >= 0.
    void validate() const;
};

struct OdePoint {
    double t = 0.0;
    double c = 0.0;
    double B = 0.0;
};

/// dc/dt = (1/tau) * 2 C^2 v (1 - c/Q) - rho c / v, with C = c / (b_max + c).
double dc_dt(const TheoryParams& tp, double c);

/// dB/dt = B(1-B)(rho/v - 2v(1-B)(B-f) / (tau f (1-f) n)).
double dB_dt(const TheoryParams& tp, double B);

inline double byzantine_probability(const TheoryParams& tp, double c) { return tp.b_max() / (tp.b_max() + c); }

/// Classical RK4 with fixed step dt from c(0) = c0 to t_end. Every `stride`-th
/// point is kept, plus the last one. Throws DomainError if c0 lies outside
/// [0, Q] and StepSizeError if an intermediate state leaves it.
std::vector<OdePoint> ode_trajectory(const TheoryParams& tp, double c0, double t_end, double dt = 0.01,
                                     std::size_t stride = 1);

/// B after integrating until |dc/dt| < tol or t_max is reached.
double ode_steady_state(const TheoryParams& tp, double c0, double dt = 0.01, double t_max = 1e5, double tol = 1e-12);

struct Equilibria {
    double stable = 0.0;    // B1
    double unstable = 0.0;  // B2
};

/// Roots of dB/dt = 0 other than 0 and 1:
/// B = 1/2 (1 + f -/+ sqrt((1-f)^2 - 2 rho tau f (1-f) n / v^2)).
/// nullopt when the discriminant is negative (collapse).
std::optional<Equilibria> equilibrium(const TheoryParams& tp);

/// (1 / (1 + (1-f0) I / (f n)))^v
double join_isolation_prob(double f0, double bootstrap_size, double f, double n, double v);

/// (f n / (f n + c))^(v - k)
double reset_isolation_prob(double c, double f, double n, double v, double k);

/// Lower bound on the number of new correct ids learnt by a slot between two resets:
/// k v c0 (1-f)(Q-c0) / (Q tau rho (f n + c0) + k v c0 (1-f)).
double delta_c_bound(double c0, const TheoryParams& tp);

/// Q / (1 - f)
double equivalent_network_size(double correct, double f);

/// Stable equilibrium for an attacker of power f facing n_equiv (1 - f) correct nodes.
std::optional<double> equilibrium_from_power(double f, double n_equiv, double v, double rho, double tau = 1.0);

} // namespace basalt
