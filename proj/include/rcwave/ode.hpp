#pragma once

// Small fixed-dimension ODE integrators: Dormand-Prince 5(4) with step-size
// control and classical RK4.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "rcwave/errors.hpp"

namespace rcwave::ode {

template <std::size_t N>
using State = std::array<double, N>;

template <std::size_t N>
State<N> axpy(const State<N>& y, double h, const State<N>& k) {
    State<N> out;
    for (std::size_t i = 0; i < N; ++i)
        out[i] = y[i] + h * k[i];
    return out;
}

template <std::size_t N, class Rhs>
State<N> rk4_step(Rhs&& f, double t, const State<N>& y, double h) {
    const auto k1 = f(t, y);
    const auto k2 = f(t + 0.5 * h, axpy(y, 0.5 * h, k1));
    const auto k3 = f(t + 0.5 * h, axpy(y, 0.5 * h, k2));
    const auto k4 = f(t + h, axpy(y, h, k3));
    State<N> out;
    for (std::size_t i = 0; i < N; ++i)
        out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
}

struct Tolerance {
    double rtol = 1e-12;
    double atol = 1e-14;
    double h_min = 1e-14;
    double h_init = 1e-4;
    double h_max = std::numeric_limits<double>::infinity();
    std::size_t max_steps = 10'000'000;
};

template <std::size_t N>
struct Sample {
    double t;
    State<N> y;
    State<N> dy; // f(t, y), kept for Hermite interpolation
};

/// Adaptive Dormand-Prince 5(4). Returns every accepted step including t0.
/// Integration stops early at the first accepted step where `stop(t, y)`
/// returns true.
template <std::size_t N, class Rhs, class Stop>
std::vector<Sample<N>> dopri5(Rhs&& f, double t0, const State<N>& y0, double t1, const Tolerance& tol,
                              Stop&& stop) {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                            b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    std::vector<Sample<N>> out;
    double t = t0;
    State<N> y = y0;
    State<N> k1 = f(t, y);
    out.push_back({t, y, k1});
    if (!(t1 > t0))
        return out;

    double h = std::min(tol.h_init, t1 - t0);
    std::size_t steps = 0;
    while (t < t1) {
        if (++steps > tol.max_steps)
            throw IntegrationFailure("dopri5: step limit exceeded", t, h);
        h = std::min(h, tol.h_max);
        if (t + h > t1)
            h = t1 - t;
        State<N> tmp, k2, k3, k4, k5, k6, k7, y5;
        for (std::size_t i = 0; i < N; ++i)
            tmp[i] = y[i] + h * a21 * k1[i];
        k2 = f(t + c2 * h, tmp);
        for (std::size_t i = 0; i < N; ++i)
            tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        k3 = f(t + c3 * h, tmp);
        for (std::size_t i = 0; i < N; ++i)
            tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        k4 = f(t + c4 * h, tmp);
        for (std::size_t i = 0; i < N; ++i)
            tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        k5 = f(t + c5 * h, tmp);
        for (std::size_t i = 0; i < N; ++i)
            tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
        k6 = f(t + h, tmp);
        for (std::size_t i = 0; i < N; ++i)
            y5[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        k7 = f(t + h, y5);

        double err = 0.0;
        bool finite = true;
        for (std::size_t i = 0; i < N; ++i) {
            const double ei =
                h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
            const double sc = tol.atol + tol.rtol * std::max(std::fabs(y[i]), std::fabs(y5[i]));
            err = std::max(err, std::fabs(ei) / sc);
            finite = finite && std::isfinite(y5[i]);
        }
        if (!finite)
            err = 1e10;

        if (err <= 1.0) {
            t = (t1 - (t + h) < 1e-15 * std::max(1.0, std::fabs(t1))) ? t1 : t + h;
            y = y5;
            k1 = k7;
            out.push_back({t, y, k1});
            if (stop(t, y))
                break;
        }
        const double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
        h *= fac;
        if (h < tol.h_min && t < t1)
            throw IntegrationFailure("dopri5: step size underflow", t, h);
    }
    return out;
}

template <std::size_t N, class Rhs>
std::vector<Sample<N>> dopri5(Rhs&& f, double t0, const State<N>& y0, double t1, const Tolerance& tol) {
    return dopri5<N>(std::forward<Rhs>(f), t0, y0, t1, tol, [](double, const State<N>&) { return false; });
}

/// Cubic Hermite interpolation between two samples.
template <std::size_t N>
State<N> hermite(const Sample<N>& s0, const Sample<N>& s1, double t) {
    const double h = s1.t - s0.t;
    const double th = (t - s0.t) / h;
    const double h00 = (1 + 2 * th) * (1 - th) * (1 - th);
    const double h10 = th * (1 - th) * (1 - th);
    const double h01 = th * th * (3 - 2 * th);
    const double h11 = th * th * (th - 1);
    State<N> out;
    for (std::size_t i = 0; i < N; ++i)
        out[i] = h00 * s0.y[i] + h10 * h * s0.dy[i] + h01 * s1.y[i] + h11 * h * s1.dy[i];
    return out;
}

/// Index of the sample interval containing t (clamped to the ends).
template <std::size_t N>
std::size_t locate(const std::vector<Sample<N>>& s, double t) {
    auto it = std::upper_bound(s.begin(), s.end(), t, [](double v, const Sample<N>& x) { return v < x.t; });
    std::size_t k = static_cast<std::size_t>(it - s.begin());
    if (k == 0)
        return 0;
    return std::min(k - 1, s.size() >= 2 ? s.size() - 2 : 0);
}

} // namespace rcwave::ode
