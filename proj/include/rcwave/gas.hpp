#pragma once

// Isentropic gamma-law gas with radial symmetry: thermodynamic primitives,
// Riemann variables, wave speeds and the gridded flow snapshot.

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "rcwave/errors.hpp"

namespace rcwave {

/// Gas constants and symmetry index. m = 1 cylindrical, m = 2 spherical.
struct GasParams {
    double gamma = 2.0;
    double K = 1.0;
    int m = 1;

    /// Throws std::invalid_argument unless 1 < gamma < 3, K > 0, m in {1, 2}.
    void validate() const {
        if (!(gamma > 1.0 && gamma < 3.0))
            throw std::invalid_argument("gamma out of (1,3)");
        if (!(K > 0.0))
            throw std::invalid_argument("pressure constant K must be positive");
        if (m != 1 && m != 2)
            throw std::invalid_argument("symmetry index m must be 1 or 2");
    }

    static GasParams make(double gamma, double K, int m) {
        GasParams p{gamma, K, m};
        p.validate();
        return p;
    }

    /// 2/(gamma-1), the sound-speed factor in the Riemann variables.
    double riemann_factor() const { return 2.0 / (gamma - 1.0); }
};

inline double pressure(double rho, const GasParams& gas) {
    return gas.K * std::pow(rho, gas.gamma);
}

/// h = sqrt(K gamma) rho^((gamma-1)/2).
inline double sound_speed(double rho, const GasParams& gas) {
    if (rho < 0.0 || std::isnan(rho))
        throw DomainError("sound_speed: negative density");
    if (rho == 0.0)
        return 0.0;
    return std::sqrt(gas.K * gas.gamma) * std::pow(rho, 0.5 * (gas.gamma - 1.0));
}

inline double rho_from_sound_speed(double h, const GasParams& gas) {
    if (h < 0.0 || std::isnan(h))
        throw DomainError("rho_from_sound_speed: negative sound speed");
    if (h == 0.0)
        return 0.0;
    return std::pow(h * h / (gas.K * gas.gamma), 1.0 / (gas.gamma - 1.0));
}

struct RiemannPair {
    double w;
    double z;
};

inline RiemannPair riemann_variables(double h, double u, const GasParams& gas) {
    if (h < 0.0)
        throw DomainError("riemann_variables: negative sound speed");
    const double s = gas.riemann_factor() * h;
    return {u + s, u - s};
}

struct WaveSpeeds {
    double c1;
    double c2;
};

inline WaveSpeeds wave_speeds(double h, double u) {
    if (h < 0.0)
        throw DomainError("wave_speeds: negative sound speed");
    return {u - h, u + h};
}

/// One radial cell: primitive state plus the derived quantities.
struct CellState {
    double rho = 0.0;
    double u = 0.0;
    double h = 0.0;
    double w = 0.0;
    double z = 0.0;
    double c1 = 0.0;
    double c2 = 0.0;

    static CellState from_primitive(double rho, double u, const GasParams& gas) {
        CellState s;
        s.rho = rho;
        s.u = u;
        s.h = sound_speed(rho, gas);
        const auto [w, z] = riemann_variables(s.h, u, gas);
        s.w = w;
        s.z = z;
        s.c1 = u - s.h;
        s.c2 = u + s.h;
        return s;
    }
};

/// Snapshot of (rho, u) on a strictly increasing radial grid at time t.
struct FlowField {
    double t = 0.0;
    std::vector<double> r;
    std::vector<CellState> states;

    std::size_t size() const { return r.size(); }

    static FlowField from_primitive(double t, std::vector<double> r, const std::vector<double>& rho,
                                    const std::vector<double>& u, const GasParams& gas) {
        if (rho.size() != r.size() || u.size() != r.size())
            throw std::invalid_argument("FlowField: column sizes differ");
        FlowField f;
        f.t = t;
        f.r = std::move(r);
        f.states.reserve(f.r.size());
        for (std::size_t i = 0; i < f.r.size(); ++i)
            f.states.push_back(CellState::from_primitive(rho[i], u[i], gas));
        f.validate();
        return f;
    }

    void validate() const {
        if (r.size() < 3)
            throw std::invalid_argument("FlowField: need at least 3 cells");
        if (states.size() != r.size())
            throw std::invalid_argument("FlowField: one state per radius required");
        if (!(t >= 0.0))
            throw std::invalid_argument("FlowField: negative time");
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (r[i] < 0.0)
                throw std::invalid_argument("FlowField: negative radius");
            if (i > 0 && !(r[i] > r[i - 1]))
                throw std::invalid_argument("FlowField: grid not strictly increasing at index " +
                                            std::to_string(i));
            if (states[i].rho < 0.0)
                throw std::invalid_argument("FlowField: negative density at index " +
                                            std::to_string(i));
        }
    }
};

/// Uniform grid of cell centres covering [lo, hi] with n cells.
inline std::vector<double> uniform_centers(double lo, double hi, std::size_t n) {
    if (n < 3 || !(hi > lo))
        throw std::invalid_argument("uniform_centers: need n >= 3 and hi > lo");
    std::vector<double> r(n);
    const double dr = (hi - lo) / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
        r[i] = lo + (static_cast<double>(i) + 0.5) * dr;
    return r;
}

} // namespace rcwave
