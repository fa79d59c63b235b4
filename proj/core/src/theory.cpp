#include "basalt/theory.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "basalt/error.hpp"

namespace basalt {

void TheoryParams::validate() const {
    if (!(f > 0.0 && f < 1.0)) throw DomainError("f must lie in (0, 1)");
    if (!(n > 0.0)) throw DomainError("n must be > 0");
    if (!(v > 0.0)) throw DomainError("v must be > 0");
    if (!(tau > 0.0)) throw DomainError("tau must be > 0");
    if (!(rho >= 0.0)) throw DomainError("rho must be >= 0");
}

double dc_dt(const TheoryParams& tp, double c) {
    const double C = c / (tp.b_max() + c);
    return 2.0 * C * C * tp.v * (1.0 - c / tp.correct()) / tp.tau - tp.rho * c / tp.v;
}

double dB_dt(const TheoryParams& tp, double B) {
    const double gain = tp.rho / tp.v;
    const double loss = 2.0 * tp.v * (1.0 - B) * (B - tp.f) / (tp.tau * tp.f * (1.0 - tp.f) * tp.n);
    return B * (1.0 - B) * (gain - loss);
}

std::vector<OdePoint> ode_trajectory(const TheoryParams& tp, double c0, double t_end, double dt, std::size_t stride) {
    tp.validate();
    const double q = tp.correct();
    if (!(c0 >= 0.0 && c0 <= q)) throw DomainError("c0 must lie in [0, Q]");
    if (!(dt > 0.0)) throw StepSizeError("dt must be > 0");
    if (stride == 0) stride = 1;
    const double slack = 1e-9 * q;
    auto inside = [&](double c) { return c >= -slack && c <= q + slack; };

    std::vector<OdePoint> out;
    double c = c0;
    out.push_back({0.0, c, byzantine_probability(tp, c)});
    const auto steps = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
    for (std::size_t i = 1; i <= steps; ++i) {
        const double h = std::min(dt, t_end - static_cast<double>(i - 1) * dt);
        const double k1 = dc_dt(tp, c);
        const double c2 = c + 0.5 * h * k1;
        const double k2 = dc_dt(tp, c2);
        const double c3 = c + 0.5 * h * k2;
        const double k3 = dc_dt(tp, c3);
        const double c4 = c + h * k3;
        const double k4 = dc_dt(tp, c4);
        c += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!inside(c2) || !inside(c3) || !inside(c4) || !inside(c) || !std::isfinite(c)) {
            throw StepSizeError("dt = " + std::to_string(dt) + " drives c outside [0, Q] at t = " +
                                std::to_string(static_cast<double>(i) * dt));
        }
        c = std::clamp(c, 0.0, q);
        if (i % stride == 0 || i == steps) {
            const double t = std::min(static_cast<double>(i) * dt, t_end);
            out.push_back({t, c, byzantine_probability(tp, c)});
        }
    }
    return out;
}

double ode_steady_state(const TheoryParams& tp, double c0, double dt, double t_max, double tol) {
    tp.validate();
    const double q = tp.correct();
    if (!(c0 >= 0.0 && c0 <= q)) throw DomainError("c0 must lie in [0, Q]");
    double c = c0;
    for (double t = 0.0; t < t_max; t += dt) {
        const double k1 = dc_dt(tp, c);
        if (std::abs(k1) < tol * q) break;
        const double k2 = dc_dt(tp, c + 0.5 * dt * k1);
        const double k3 = dc_dt(tp, c + 0.5 * dt * k2);
        const double k4 = dc_dt(tp, c + dt * k3);
        c += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!(c >= -1e-9 * q && c <= q * (1.0 + 1e-9))) throw StepSizeError("integration left [0, Q]");
        c = std::clamp(c, 0.0, q);
    }
    return byzantine_probability(tp, c);
}

std::optional<Equilibria> equilibrium(const TheoryParams& tp) {
    tp.validate();
    const double f = tp.f;
    const double disc = (1.0 - f) * (1.0 - f) - 2.0 * tp.rho * tp.tau * f * (1.0 - f) * tp.n / (tp.v * tp.v);
    if (disc < 0.0) return std::nullopt;
    const double root = std::sqrt(disc);
    return Equilibria{0.5 * (1.0 + f - root), 0.5 * (1.0 + f + root)};
}

double join_isolation_prob(double f0, double bootstrap_size, double f, double n, double v) {
    if (!(f0 >= 0.0 && f0 <= 1.0)) throw DomainError("f0 must lie in [0, 1]");
    if (!(bootstrap_size >= 0.0) || !(n > 0.0) || !(v >= 0.0)) throw DomainError("I, n, v must be non-negative");
    if (!(f >= 0.0 && f < 1.0)) throw DomainError("f must lie in [0, 1)");
    if (v == 0.0) return 1.0;
    const double honest = (1.0 - f0) * bootstrap_size;
    if (f == 0.0) return honest > 0.0 ? 0.0 : 1.0;
    if (std::isinf(bootstrap_size)) return f0 < 1.0 ? 0.0 : 1.0;
    return std::pow(1.0 / (1.0 + honest / (f * n)), v);
}

double reset_isolation_prob(double c, double f, double n, double v, double k) {
    if (!(c >= 0.0)) throw DomainError("c must be >= 0");
    if (!(f >= 0.0 && f < 1.0)) throw DomainError("f must lie in [0, 1)");
    if (!(k >= 0.0 && k <= v)) throw DomainError("k must lie in [0, v]");
    const double b = f * n;
    if (v - k == 0.0) return 1.0;
    if (b + c == 0.0) return 1.0;
    return std::pow(b / (b + c), v - k);
}

double delta_c_bound(double c0, const TheoryParams& tp) {
    tp.validate();
    const double q = tp.correct();
    if (!(c0 >= 0.0)) throw DomainError("c0 must be >= 0");
    if (c0 > q) throw DomainError("c0 exceeds Q");
    const double gain = tp.k * tp.v * c0 * (1.0 - tp.f);
    const double denom = q * tp.tau * tp.rho * (tp.b_max() + c0) + gain;
    if (denom == 0.0) return 0.0;
    return gain * (q - c0) / denom;
}

double equivalent_network_size(double correct, double f) {
    if (!(f >= 0.0 && f < 1.0)) throw DomainError("f must lie in [0, 1)");
    return correct / (1.0 - f);
}

std::optional<double> equilibrium_from_power(double f, double n_equiv, double v, double rho, double tau) {
    if (f == 0.0) return 0.0;
    TheoryParams tp;
    tp.f = f;
    tp.n = n_equiv;
    tp.v = v;
    tp.rho = rho;
    tp.tau = tau;
    const auto eq = equilibrium(tp);
    if (!eq) return std::nullopt;
    return eq->stable;
}

} // namespace basalt
