#pragma once

// Rarefaction/compression characters alpha, beta: gradient and momentum-flux
// forms, Riccati coefficients and right-hand sides, derivatives of h along the
// two characteristic families, and the weighted variables.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "rcwave/errors.hpp"
#include "rcwave/gas.hpp"

namespace rcwave {

inline constexpr double kSonicGuard = 1e-12;

/// Throws CharacterUndefined at the origin or near a sonic point.
inline void require_characters_defined(double r, double h, double u) {
    if (!(r > 0.0))
        throw CharacterUndefined("characters undefined at origin (r = " + std::to_string(r) + ")");
    const double scale = std::max({std::fabs(u), h, 1.0});
    if (std::fabs(u - h) < kSonicGuard * scale || std::fabs(u + h) < kSonicGuard * scale)
        throw CharacterUndefined("characters undefined at sonic point");
}

inline bool characters_defined(double r, double h, double u) noexcept {
    if (!(r > 0.0) || !std::isfinite(h) || !std::isfinite(u))
        return false;
    const double scale = std::max({std::fabs(u), h, 1.0});
    return std::fabs(u - h) >= kSonicGuard * scale && std::fabs(u + h) >= kSonicGuard * scale;
}

struct CharacterPair {
    double alpha;
    double beta;
};

inline CharacterPair characters_from_gradients(double r, double h, double u, double h_r, double u_r,
                                               const GasParams& gas) {
    require_characters_defined(r, h, u);
    const double k = gas.riemann_factor();
    const double geo = gas.m / r * h * u;
    return {u_r + k * h_r + geo / (u + h), u_r - k * h_r - geo / (u - h)};
}

/// Characters from directional derivatives of the momentum flux Q = r^m rho u.
/// `q(r, t)` must be evaluable at (r -+ c_i delta, t -+ delta).
template <class Flux>
CharacterPair characters_from_momentum_flux(double r, double t, double rho, double u,
                                            const GasParams& gas, Flux&& q, double delta) {
    const double h = sound_speed(rho, gas);
    require_characters_defined(r, h, u);
    if (!(delta > 0.0))
        throw std::invalid_argument("characters_from_momentum_flux: delta must be positive");
    const double c1 = u - h;
    const double c2 = u + h;
    const double d1q = (q(r + c1 * delta, t + delta) - q(r - c1 * delta, t - delta)) / (2.0 * delta);
    const double d2q = (q(r + c2 * delta, t + delta) - q(r - c2 * delta, t - delta)) / (2.0 * delta);
    const double rm_rho = std::pow(r, gas.m) * rho;
    return {-d1q / (rm_rho * c2), -d2q / (rm_rho * c1)};
}

struct RiccatiCoeffs {
    double A1;
    double B1;
    double A2;
    double B2;
    double d1; // B1 - A1, closed form
    double d2; // B2 - A2, closed form
};

inline RiccatiCoeffs riccati_coeffs(double r, double h, double u, const GasParams& gas) {
    require_characters_defined(r, h, u);
    const double g = gas.gamma;
    const double m = gas.m;
    const double c1 = u - h;
    const double c2 = u + h;
    const double u2 = u * u;
    const double h2 = h * h;
    const double core = (g - 1.0) * u2 / 2.0 - h2;

    RiccatiCoeffs c{};
    c.A1 = m * c2 / (2.0 * r * c1 * c1) * core;
    c.A2 = m * c1 / (2.0 * r * c2 * c2) * core;
    c.B1 = m / (r * c1 * c1) *
           ((g - 1.0) * u2 * u / 4.0 - h2 * h / 2.0 - (g - 1.0) * u2 * h / 4.0 + u * h2 / 2.0 +
            h * u * c1 / c2 * (h + (g - 1.0) * u / 2.0));
    c.B2 = m / (r * c2 * c2) *
           ((g - 1.0) * u2 * u / 4.0 + h2 * h / 2.0 + (g - 1.0) * u2 * h / 4.0 + u * h2 / 2.0 +
            h * u * c2 / c1 * (h - (g - 1.0) * u / 2.0));
    c.d1 = (3.0 - g) * m * u2 * h2 / (r * c1 * c1 * c2);
    c.d2 = (3.0 - g) * m * u2 * h2 / (r * c2 * c2 * c1);
    return c;
}

struct RiccatiRates {
    double d1_beta;  // derivative of beta along dr/dt = c1
    double d2_alpha; // derivative of alpha along dr/dt = c2
};

inline RiccatiRates riccati_rhs(double alpha, double beta, const RiccatiCoeffs& c,
                                const GasParams& gas) {
    const double g = gas.gamma;
    const double cross = (3.0 - g) / 4.0 * alpha * beta;
    return {-(1.0 + g) / 4.0 * beta * beta - cross + c.A1 * alpha - c.B1 * beta,
            -(g + 1.0) / 4.0 * alpha * alpha - cross + c.A2 * beta - c.B2 * alpha};
}

struct SoundSpeedRates {
    double d1_h;
    double d2_h;
};

inline SoundSpeedRates dh_along_characteristics(double r, double h, double u, double alpha,
                                                double beta, const GasParams& gas) {
    if (h == 0.0)
        return {0.0, 0.0};
    require_characters_defined(r, h, u);
    const double k = (gas.gamma - 1.0) / 2.0;
    const double geo = gas.m / r * u * u * h;
    return {-k * geo / (u + h) - k * h * alpha, -k * geo / (u - h) - k * h * beta};
}

/// Weight exponents: the weighted character is h^(-lambda) times the plain one.
namespace weights {
inline double tilde(const GasParams& gas) { return (3.0 - gas.gamma) / (2.0 * (gas.gamma - 1.0)); }
inline double hat(const GasParams& gas) { return 2.0 / (gas.gamma - 1.0); }
} // namespace weights

struct WeightedRates {
    double d1_beta_w;  // derivative of h^(-lambda) beta along c1
    double d2_alpha_w; // derivative of h^(-lambda) alpha along c2
};

/// Right-hand sides for the weighted pair (h^(-lambda) alpha, h^(-lambda) beta).
/// `alpha_w`, `beta_w` are the weighted values themselves.
inline WeightedRates weighted_rhs(double lambda, double alpha_w, double beta_w, double h, double r,
                                  double u, const RiccatiCoeffs& c, const GasParams& gas) {
    if (!(h > 0.0))
        throw DomainError("weighted_rhs: vacuum (h = 0)");
    if (!(lambda >= 0.0))
        throw std::invalid_argument("weighted_rhs: lambda must be nonnegative");
    require_characters_defined(r, h, u);
    const double g = gas.gamma;
    const double hl = std::pow(h, lambda);
    const double cross = ((g - 3.0) / 4.0 + (g - 1.0) * lambda / 2.0) * hl * alpha_w * beta_w;
    const double geo = (g - 1.0) / 2.0 * lambda * gas.m / r * u * u;
    return {-(1.0 + g) / 4.0 * hl * beta_w * beta_w + cross + c.A1 * alpha_w - c.B1 * beta_w +
                geo / (u + h) * beta_w,
            -(1.0 + g) / 4.0 * hl * alpha_w * alpha_w + cross + c.A2 * beta_w - c.B2 * alpha_w +
                geo / (u - h) * alpha_w};
}

/// Finite-difference weights (Fornberg) for the first derivative at x0
/// using the nodes x[0..n).
template <std::size_t N>
std::array<double, N> fd_weights_d1(double x0, const std::array<double, N>& x) {
    // c[j][k]: weight of node j for derivative k, k in {0, 1}
    std::array<std::array<double, 2>, N> c{};
    double c1 = 1.0;
    double c4 = x[0] - x0;
    c[0][0] = 1.0;
    for (std::size_t i = 1; i < N; ++i) {
        const std::size_t mn = std::min<std::size_t>(i, 1);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = x[i] - x0;
        for (std::size_t j = 0; j < i; ++j) {
            const double c3 = x[i] - x[j];
            c2 *= c3;
            if (j == i - 1) {
                for (std::size_t k = mn; k >= 1; --k)
                    c[i][k] = c1 * (static_cast<double>(k) * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (std::size_t k = mn; k >= 1; --k)
                c[j][k] = (c4 * c[j][k] - static_cast<double>(k) * c[j][k - 1]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::array<double, N> w{};
    for (std::size_t j = 0; j < N; ++j)
        w[j] = c[j][1];
    return w;
}

/// d/dr of samples f on grid r: 5-point stencil in the interior,
/// 3-point one-sided at the two outermost nodes on each side.
inline std::vector<double> radial_derivative(const std::vector<double>& r, const std::vector<double>& f) {
    const std::size_t n = r.size();
    if (n < 3 || f.size() != n)
        throw std::invalid_argument("radial_derivative: need >= 3 matching samples");
    std::vector<double> d(n);
    auto three = [&](std::size_t i, std::size_t s) {
        const auto w = fd_weights_d1<3>(r[i], {r[s], r[s + 1], r[s + 2]});
        return w[0] * f[s] + w[1] * f[s + 1] + w[2] * f[s + 2];
    };
    if (n < 5) {
        for (std::size_t i = 0; i < n; ++i)
            d[i] = three(i, std::min<std::size_t>(i == 0 ? 0 : i - 1, n - 3));
        return d;
    }
    d[0] = three(0, 0);
    d[1] = three(1, 0);
    d[n - 2] = three(n - 2, n - 3);
    d[n - 1] = three(n - 1, n - 3);
    for (std::size_t i = 2; i + 2 < n; ++i) {
        const auto w = fd_weights_d1<5>(r[i], {r[i - 2], r[i - 1], r[i], r[i + 1], r[i + 2]});
        double s = 0.0;
        for (std::size_t k = 0; k < 5; ++k)
            s += w[k] * f[i - 2 + k];
        d[i] = s;
    }
    return d;
}

/// Characters on a grid snapshot plus weighted variants. Cells where the
/// characters are undefined carry NaN and defined[i] = false.
struct CharacterField {
    double t = 0.0;
    std::vector<double> r;
    std::vector<double> alpha, beta;
    std::vector<double> alpha_tilde, beta_tilde;
    std::vector<double> alpha_hat, beta_hat;
    std::vector<char> defined;

    std::size_t size() const { return r.size(); }

    /// alpha_bar = exp(-C_b t) alpha_hat; same for beta.
    std::pair<double, double> bar(std::size_t i, double C_b) const {
        const double e = std::exp(-C_b * t);
        return {e * alpha_hat[i], e * beta_hat[i]};
    }
};

inline CharacterField compute_character_field(const FlowField& field, const GasParams& gas) {
    const std::size_t n = field.size();
    std::vector<double> hv(n), uv(n);
    for (std::size_t i = 0; i < n; ++i) {
        hv[i] = field.states[i].h;
        uv[i] = field.states[i].u;
    }
    const auto hr = radial_derivative(field.r, hv);
    const auto ur = radial_derivative(field.r, uv);
    const double lt = weights::tilde(gas);
    const double lh = weights::hat(gas);
    const double nan = std::nan("");

    CharacterField cf;
    cf.t = field.t;
    cf.r = field.r;
    cf.alpha.assign(n, nan);
    cf.beta.assign(n, nan);
    cf.alpha_tilde.assign(n, nan);
    cf.beta_tilde.assign(n, nan);
    cf.alpha_hat.assign(n, nan);
    cf.beta_hat.assign(n, nan);
    cf.defined.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        if (!characters_defined(field.r[i], hv[i], uv[i]))
            continue;
        const auto [a, b] = characters_from_gradients(field.r[i], hv[i], uv[i], hr[i], ur[i], gas);
        cf.alpha[i] = a;
        cf.beta[i] = b;
        cf.defined[i] = 1;
        if (hv[i] > 0.0) {
            const double wt = std::pow(hv[i], -lt);
            const double wh = std::pow(hv[i], -lh);
            cf.alpha_tilde[i] = wt * a;
            cf.beta_tilde[i] = wt * b;
            cf.alpha_hat[i] = wh * a;
            cf.beta_hat[i] = wh * b;
        }
    }
    return cf;
}

} // namespace rcwave
