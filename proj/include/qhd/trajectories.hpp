#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "qhd/core.hpp"
#include "qhd/wavefield.hpp"

namespace qhd {

// Density floor below which the velocity field is treated as singular
// (interference null); see complex_velocity.
inline constexpr double kDensityGuard = 1e-30;

struct TrajectoryPoint {
    double z;        // m
    double x;        // m
    double v_x;      // m/s
    double rho;      // dimensionless
    double Q;        // J
    double omega_q;  // 1/s
    double E;        // J, kinetic (transverse + longitudinal)
};

struct Trajectory {
    double seed_x0 = 0.0;
    std::vector<TrajectoryPoint> points;
    bool failed = false;
    double fail_x = 0.0;
    double fail_z = 0.0;
    std::string failure;
};

enum class Seeding { uniform_across_slits, per_slit_gaussian };
enum class Integrator { euler, rk4 };

struct EnsembleConfig {
    std::size_t n_trajectories = 100;
    Seeding seeding = Seeding::uniform_across_slits;
    double z_start = 0.0;
    double z_end = 0.0;
    Integrator integrator = Integrator::rk4;
    double dz = 0.0;
    std::size_t record_every = 1;  // every k-th step lands in points

    void validate() const {
        if (n_trajectories < 1)
            throw DomainError("EnsembleConfig: need n_trajectories >= 1");
        if (!(z_start >= 0.0) || !(z_end > z_start))
            throw DomainError("EnsembleConfig: need z_end > z_start >= 0");
        if (!(dz > 0.0)) throw DomainError("EnsembleConfig: need dz > 0");
        if (record_every < 1)
            throw DomainError("EnsembleConfig: need record_every >= 1");
    }
};

namespace detail {

// Inverse error function: Winitzki initial guess polished by Newton steps on
// std::erf. Full double accuracy for |y| away from +-1, which is all the
// quantile seeding needs.
inline double erfinv(double y) {
    if (!(y > -1.0 && y < 1.0)) throw DomainError("erfinv: need -1 < y < 1");
    if (y == 0.0) return 0.0;
    const double a = 0.147;
    const double ln1my2 = std::log1p(-y * y);
    const double t = 2.0 / (std::numbers::pi * a) + 0.5 * ln1my2;
    double x = std::copysign(std::sqrt(std::sqrt(t * t - ln1my2 / a) - t), y);
    const double spi2 = std::sqrt(std::numbers::pi) / 2.0;
    for (int it = 0; it < 3; ++it)
        x -= (std::erf(x) - y) * spi2 * std::exp(x * x);
    return x;
}

}  // namespace detail

// (Re U, -Im U) of the complex velocity U = -i (hbar/m) grad(psi)/psi, i.e.
// the current and osmotic velocities at a point of the analytic field.
inline std::pair<double, double> complex_velocity(double x, double z,
                                                  const PhysicalParams& p,
                                                  const GratingConfig& g) {
    const WaveDerivatives d = evaluate_derivatives(x, z, p, g);
    const double rho = std::norm(d.psi);
    if (!(rho > kDensityGuard))
        throw SingularPointError(x, z, "complex_velocity: density below guard (interference null)");
    const Complex L = d.dpsi_dx / d.psi;
    const double f = p.hbar / p.mass;
    return {f * L.imag(), f * L.real()};
}

namespace detail {

// All per-point diagnostics from one derivative evaluation.
inline TrajectoryPoint diagnose(double x, double z, const PhysicalParams& p,
                                const GratingConfig& g) {
    const WaveDerivatives d = evaluate_derivatives(x, z, p, g);
    const double rho = std::norm(d.psi);
    if (!(rho > kDensityGuard))
        throw SingularPointError(x, z, "trajectory hit an interference null");
    const Complex L = d.dpsi_dx / d.psi;
    const Complex L2 = d.d2psi_dx2 / d.psi;
    const double f = p.hbar / p.mass;
    TrajectoryPoint tp;
    tp.z = z;
    tp.x = x;
    tp.v_x = f * L.imag();
    tp.rho = rho;
    // R''/R = Re(L2 - L^2) + (Re L)^2, from log-derivative algebra.
    const double rpp_over_r = (L2 - L * L).real() + L.real() * L.real();
    tp.Q = -(p.hbar * p.hbar / (2.0 * p.mass)) * rpp_over_r;
    tp.omega_q = f * (L.real() * L.real());
    tp.E = 0.5 * p.mass * (tp.v_x * tp.v_x + p.v_z * p.v_z);
    return tp;
}

inline double slope(double x, double z, const PhysicalParams& p,
                    const GratingConfig& g) {
    return complex_velocity(x, z, p, g).first / p.v_z;
}

}  // namespace detail

// One integration step of dx/dz = v_x/v_z. Euler is the literal increment
// rule x += v_x * dt with dt = dz/v_z; RK4 is the default scheme.
inline TrajectoryPoint step(const TrajectoryPoint& pt, double dz,
                            Integrator integrator, const PhysicalParams& p,
                            const GratingConfig& g) {
    if (!(dz > 0.0)) throw DomainError("step: need dz > 0");
    const double x = pt.x;
    const double z = pt.z;
    double xn;
    if (integrator == Integrator::euler) {
        xn = x + detail::slope(x, z, p, g) * dz;
    } else {
        const double h2 = 0.5 * dz;
        const double k1 = detail::slope(x, z, p, g);
        const double k2 = detail::slope(x + h2 * k1, z + h2, p, g);
        const double k3 = detail::slope(x + h2 * k2, z + h2, p, g);
        const double k4 = detail::slope(x + dz * k3, z + dz, p, g);
        xn = x + (dz / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return detail::diagnose(xn, z + dz, p, g);
}

// Seed positions for an ensemble; ascending in x.
inline std::vector<double> seed_positions(const EnsembleConfig& cfg,
                                          const GratingConfig& g) {
    cfg.validate();
    g.validate();
    std::vector<double> seeds;
    seeds.reserve(cfg.n_trajectories);
    const std::size_t n = cfg.n_trajectories;
    if (cfg.seeding == Seeding::uniform_across_slits) {
        // Evenly spaced across the grating footprint plus a 2b margin,
        // constructed as exact +- pairs so a symmetric ensemble maps onto
        // itself under reflection without rounding slack.
        const double r = g.half_extent() + 2.0 * g.slit_width;
        seeds.resize(n);
        if (n == 1) {
            seeds[0] = 0.0;
        } else {
            const double step = 2.0 * r / static_cast<double>(n - 1);
            for (std::size_t j = 0; j < n / 2; ++j) {
                const double v = -r + static_cast<double>(j) * step;
                seeds[j] = v;
                seeds[n - 1 - j] = -v;
            }
            if (n % 2 == 1) seeds[n / 2] = 0.0;
        }
    } else {
        // Quantiles of each slit's Gaussian amplitude exp(-x^2/2b^2),
        // i.e. a normal with sigma = b: x = x_n + sqrt(2) b erfinv(2q-1).
        const std::size_t base = n / g.n_slits;
        std::size_t extra = n % g.n_slits;
        for (std::size_t s = 0; s < g.n_slits; ++s) {
            std::size_t m = base + (s < extra ? 1 : 0);
            const double xc = g.slit_center(s);
            for (std::size_t j = 0; j < m; ++j) {
                const double q =
                    (static_cast<double>(j) + 0.5) / static_cast<double>(m);
                seeds.push_back(xc + std::numbers::sqrt2 * g.slit_width *
                                         detail::erfinv(2.0 * q - 1.0));
            }
        }
        std::sort(seeds.begin(), seeds.end());
    }
    return seeds;
}

// Integrate one trajectory; singular points mark it failed but keep the
// points accumulated so far.
inline Trajectory integrate_one(double x0, const EnsembleConfig& cfg,
                                const PhysicalParams& p,
                                const GratingConfig& g) {
    Trajectory tr;
    tr.seed_x0 = x0;
    const double span = cfg.z_end - cfg.z_start;
    std::size_t n_steps = static_cast<std::size_t>(std::llround(span / cfg.dz));
    if (n_steps < 1 ||
        std::abs(static_cast<double>(n_steps) * cfg.dz - span) > 1e-9 * span)
        n_steps = static_cast<std::size_t>(std::ceil(span / cfg.dz));
    const double h = span / static_cast<double>(n_steps);
    try {
        TrajectoryPoint pt = detail::diagnose(x0, cfg.z_start, p, g);
        tr.points.push_back(pt);
        for (std::size_t k = 1; k <= n_steps; ++k) {
            pt = step(pt, h, cfg.integrator, p, g);
            // Pin z to the shared ladder so ensembles compare bit-equal z.
            pt.z = cfg.z_start + static_cast<double>(k) * h;
            if (k % cfg.record_every == 0 || k == n_steps) tr.points.push_back(pt);
        }
    } catch (const SingularPointError& e) {
        tr.failed = true;
        tr.fail_x = e.x();
        tr.fail_z = e.z();
        tr.failure = e.what();
    }
    return tr;
}

inline std::vector<Trajectory> integrate_ensemble(const EnsembleConfig& cfg,
                                                  const PhysicalParams& p,
                                                  const GratingConfig& g) {
    const std::vector<double> seeds = seed_positions(cfg, g);
    std::vector<Trajectory> out;
    out.reserve(seeds.size());
    std::size_t n_failed = 0;
    for (double x0 : seeds) {
        out.push_back(integrate_one(x0, cfg, p, g));
        if (out.back().failed) ++n_failed;
    }
    if (n_failed == out.size())
        throw EnsembleError("integrate_ensemble: every trajectory hit a singular point");
    return out;
}

}  // namespace qhd
