#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "qhd/core.hpp"
#include "qhd/grid.hpp"
#include "qhd/wavefield.hpp"

namespace qhd {

// A derived grid quantity together with the nodes where it could be computed.
struct MaskedGrid {
    RealGrid values;
    BoolGrid valid;
};

// Hydrodynamic decomposition of a sampled complex field. S is the unwrapped
// action (J*s); v_x the current velocity, u_x the osmotic velocity, Q the
// quantum potential (amplitude route), P1/P2 the pressure pair. `mask` marks
// nodes where the centered x-stencils were applied: above the density
// threshold, not adjacent to a below-threshold node, and not on the x border.
struct MadelungFields {
    GridSpec grid;
    PhysicalParams params;
    double eps_rho = 0.0;
    double rho_max = 0.0;
    RealGrid rho;
    RealGrid R;
    RealGrid S;
    RealGrid v_x;
    RealGrid u_x;
    RealGrid Q;
    RealGrid P1;
    RealGrid P2;
    BoolGrid mask;
};

namespace detail {

inline double wrap_to_pi(double d) {
    return d - 2.0 * std::numbers::pi * std::round(d / (2.0 * std::numbers::pi));
}

// Nodes where a centered x-stencil over `valid` inputs exists.
inline BoolGrid stencil_mask_x(const BoolGrid& valid) {
    BoolGrid out(valid.spec, 0);
    for (std::size_t i = 1; i + 1 < valid.spec.nx; ++i)
        for (std::size_t j = 0; j < valid.spec.nz; ++j)
            out.at(i, j) = valid.at(i - 1, j) && valid.at(i, j) && valid.at(i + 1, j);
    return out;
}

// Unwrap arg(psi) along each x-line outward from the column nearest x = 0,
// then stitch slices together by phase continuity at that column. Runs of
// valid nodes not connected to the anchor restart from the principal value
// (interference nulls make the offset across a gap genuinely ambiguous).
// Below-threshold nodes are filled with the principal value.
inline RealGrid unwrap_phase(const ComplexField& field, const BoolGrid& valid) {
    const GridSpec& g = field.grid;
    RealGrid phi(g, 0.0);

    std::size_t i0 = 0;
    for (std::size_t i = 1; i < g.nx; ++i)
        if (std::abs(g.x(i)) < std::abs(g.x(i0))) i0 = i;

    auto principal = [&](std::size_t i, std::size_t j) {
        return std::arg(field.at(i, j));
    };

    for (std::size_t j = 0; j < g.nz; ++j) {
        const double a0 = principal(i0, j);
        double anchor = a0;
        if (j > 0 && valid.at(i0, j) && valid.at(i0, j - 1))
            anchor = phi.at(i0, j - 1) + wrap_to_pi(a0 - principal(i0, j - 1));
        phi.at(i0, j) = anchor;

        for (std::size_t i = i0 + 1; i < g.nx; ++i) {
            const double a = principal(i, j);
            if (valid.at(i, j) && valid.at(i - 1, j))
                phi.at(i, j) = phi.at(i - 1, j) + wrap_to_pi(a - principal(i - 1, j));
            else
                phi.at(i, j) = a;
        }
        for (std::size_t i = i0; i-- > 0;) {
            const double a = principal(i, j);
            if (valid.at(i, j) && valid.at(i + 1, j))
                phi.at(i, j) = phi.at(i + 1, j) + wrap_to_pi(a - principal(i + 1, j));
            else
                phi.at(i, j) = a;
        }
    }
    return phi;
}

}  // namespace detail

// Q = -(hbar^2/2m) (Laplacian R)/R, with the x-stencil applied to ln R:
// R''/R = (ln R)'' + ((ln R)')^2. Centered differences of the log are exact
// on Gaussian amplitudes and make the two quantum-potential routes agree at
// rounding level instead of at stencil-truncation level.
inline MaskedGrid quantum_potential_from_R(const RealGrid& R,
                                           const BoolGrid& valid,
                                           const PhysicalParams& p) {
    MaskedGrid out{RealGrid(R.spec, 0.0), detail::stencil_mask_x(valid)};
    const double inv2h = 1.0 / (2.0 * R.spec.dx());
    const double invh2 = 1.0 / (R.spec.dx() * R.spec.dx());
    const double c = -p.hbar * p.hbar / (2.0 * p.mass);
    std::vector<double> ln(R.spec.nx);
    for (std::size_t j = 0; j < R.spec.nz; ++j) {
        for (std::size_t i = 0; i < R.spec.nx; ++i)
            ln[i] = valid.at(i, j) ? std::log(R.at(i, j)) : 0.0;
        for (std::size_t i = 1; i + 1 < R.spec.nx; ++i) {
            if (!out.valid.at(i, j)) continue;
            const double l1 = (ln[i + 1] - ln[i - 1]) * inv2h;
            const double l2 = (ln[i + 1] - 2.0 * ln[i] + ln[i - 1]) * invh2;
            out.values.at(i, j) = c * (l2 + l1 * l1);
        }
    }
    return out;
}

// Q = (hbar^2/8m)(grad rho/rho)^2 - (hbar^2/4m)(Laplacian rho)/rho, same
// log-space stencils: grad rho/rho = (ln rho)', Lap rho/rho = (ln rho)'' +
// ((ln rho)')^2.
inline MaskedGrid quantum_potential_from_rho(const RealGrid& rho,
                                             const BoolGrid& valid,
                                             const PhysicalParams& p) {
    MaskedGrid out{RealGrid(rho.spec, 0.0), detail::stencil_mask_x(valid)};
    const double inv2h = 1.0 / (2.0 * rho.spec.dx());
    const double invh2 = 1.0 / (rho.spec.dx() * rho.spec.dx());
    const double c8 = p.hbar * p.hbar / (8.0 * p.mass);
    const double c4 = p.hbar * p.hbar / (4.0 * p.mass);
    std::vector<double> ln(rho.spec.nx);
    for (std::size_t j = 0; j < rho.spec.nz; ++j) {
        for (std::size_t i = 0; i < rho.spec.nx; ++i)
            ln[i] = valid.at(i, j) ? std::log(rho.at(i, j)) : 0.0;
        for (std::size_t i = 1; i + 1 < rho.spec.nx; ++i) {
            if (!out.valid.at(i, j)) continue;
            const double m1 = (ln[i + 1] - ln[i - 1]) * inv2h;
            const double m2 = (ln[i + 1] - 2.0 * ln[i] + ln[i - 1]) * invh2;
            out.values.at(i, j) = c8 * m1 * m1 - c4 * (m2 + m1 * m1);
        }
    }
    return out;
}

// P1 = -(hbar^2/4m^2) Lap rho_M, P2 = (hbar^2/8m^2)(grad rho_M)^2/rho_M,
// rho_M = m*rho. Log stencils as above; the constant ln m drops out.
inline std::pair<MaskedGrid, MaskedGrid> pressures(const RealGrid& rho,
                                                   const BoolGrid& valid,
                                                   const PhysicalParams& p) {
    MaskedGrid p1{RealGrid(rho.spec, 0.0), detail::stencil_mask_x(valid)};
    MaskedGrid p2{RealGrid(rho.spec, 0.0), p1.valid};
    const double inv2h = 1.0 / (2.0 * rho.spec.dx());
    const double invh2 = 1.0 / (rho.spec.dx() * rho.spec.dx());
    const double c4 = p.hbar * p.hbar / (4.0 * p.mass * p.mass);
    const double c8 = p.hbar * p.hbar / (8.0 * p.mass * p.mass);
    std::vector<double> ln(rho.spec.nx);
    for (std::size_t j = 0; j < rho.spec.nz; ++j) {
        for (std::size_t i = 0; i < rho.spec.nx; ++i)
            ln[i] = valid.at(i, j) ? std::log(rho.at(i, j)) : 0.0;
        for (std::size_t i = 1; i + 1 < rho.spec.nx; ++i) {
            if (!p1.valid.at(i, j)) continue;
            const double rho_m = p.mass * rho.at(i, j);
            const double m1 = (ln[i + 1] - ln[i - 1]) * inv2h;
            const double m2 = (ln[i + 1] - 2.0 * ln[i] + ln[i - 1]) * invh2;
            p1.values.at(i, j) = -c4 * rho_m * (m2 + m1 * m1);
            p2.values.at(i, j) = c8 * rho_m * m1 * m1;
        }
    }
    return {std::move(p1), std::move(p2)};
}

// v = (1/m) dS/dx, centered difference of the unwrapped action.
inline MaskedGrid current_velocity(const RealGrid& S, const BoolGrid& valid,
                                   const PhysicalParams& p) {
    MaskedGrid out{RealGrid(S.spec, 0.0), detail::stencil_mask_x(valid)};
    const double f = 1.0 / (2.0 * S.spec.dx() * p.mass);
    for (std::size_t i = 1; i + 1 < S.spec.nx; ++i)
        for (std::size_t j = 0; j < S.spec.nz; ++j)
            if (out.valid.at(i, j))
                out.values.at(i, j) = (S.at(i + 1, j) - S.at(i - 1, j)) * f;
    return out;
}

// u = (hbar/m) d(ln R)/dx, centered difference of ln R.
inline MaskedGrid osmotic_velocity(const RealGrid& R, const BoolGrid& valid,
                                   const PhysicalParams& p) {
    MaskedGrid out{RealGrid(R.spec, 0.0), detail::stencil_mask_x(valid)};
    const double f = p.hbar / (p.mass * 2.0 * R.spec.dx());
    for (std::size_t i = 1; i + 1 < R.spec.nx; ++i)
        for (std::size_t j = 0; j < R.spec.nz; ++j)
            if (out.valid.at(i, j))
                out.values.at(i, j) =
                    (std::log(R.at(i + 1, j)) - std::log(R.at(i - 1, j))) * f;
    return out;
}

inline MadelungFields decompose(const ComplexField& field,
                                double eps_rho = 1e-12) {
    if (!(eps_rho > 0.0 && eps_rho < 1.0))
        throw DomainError("decompose: need 0 < eps_rho < 1");
    field.grid.validate();
    field.params.validate();

    MadelungFields out;
    out.grid = field.grid;
    out.params = field.params;
    out.eps_rho = eps_rho;
    out.rho = RealGrid(field.grid, 0.0);
    out.R = RealGrid(field.grid, 0.0);

    for (std::size_t n = 0; n < field.psi.size(); ++n) {
        const double r = std::abs(field.psi[n]);
        out.R.v[n] = r;
        out.rho.v[n] = r * r;  // rho defined as R^2, exact
        if (out.rho.v[n] > out.rho_max) out.rho_max = out.rho.v[n];
    }
    if (!(out.rho_max > 0.0))
        throw DegenerateFieldError("decompose: field is identically zero");

    BoolGrid raw(field.grid, 0);
    const double thresh = eps_rho * out.rho_max;
    bool any = false;
    for (std::size_t n = 0; n < raw.v.size(); ++n) {
        raw.v[n] = out.rho.v[n] >= thresh;
        any = any || raw.v[n];
    }
    if (!any)
        throw DegenerateFieldError("decompose: every node below density threshold");

    RealGrid phi = detail::unwrap_phase(field, raw);
    out.S = RealGrid(field.grid, 0.0);
    for (std::size_t n = 0; n < phi.v.size(); ++n)
        out.S.v[n] = field.params.hbar * phi.v[n];

    MaskedGrid v = current_velocity(out.S, raw, field.params);
    MaskedGrid u = osmotic_velocity(out.R, raw, field.params);
    MaskedGrid q = quantum_potential_from_R(out.R, raw, field.params);
    auto [p1, p2] = pressures(out.rho, raw, field.params);

    out.v_x = std::move(v.values);
    out.u_x = std::move(u.values);
    out.Q = std::move(q.values);
    out.P1 = std::move(p1.values);
    out.P2 = std::move(p2.values);
    out.mask = std::move(q.valid);
    return out;
}

// [d(rho)/dt + d(rho v_x)/dx] / rho with d/dt = v_z d/dz; units 1/s.
// Needs interior z-slices for the centered z-derivative.
inline MaskedGrid continuity_residual(const MadelungFields& f,
                                      const PhysicalParams& p) {
    const GridSpec& g = f.grid;
    if (g.nz < 3)
        throw InsufficientDataError("continuity_residual: need at least 3 z-slices");
    MaskedGrid out{RealGrid(g, 0.0), BoolGrid(g, 0)};
    const double inv2dx = 1.0 / (2.0 * g.dx());
    const double inv2dz = 1.0 / (2.0 * g.dz());
    for (std::size_t i = 1; i + 1 < g.nx; ++i) {
        for (std::size_t j = 1; j + 1 < g.nz; ++j) {
            if (!(f.mask.at(i, j) && f.mask.at(i - 1, j) && f.mask.at(i + 1, j) &&
                  f.mask.at(i, j - 1) && f.mask.at(i, j + 1)))
                continue;
            const double drho_dt =
                p.v_z * (f.rho.at(i, j + 1) - f.rho.at(i, j - 1)) * inv2dz;
            const double dflux_dx = (f.rho.at(i + 1, j) * f.v_x.at(i + 1, j) -
                                     f.rho.at(i - 1, j) * f.v_x.at(i - 1, j)) *
                                    inv2dx;
            out.values.at(i, j) = (drho_dt + dflux_dx) / f.rho.at(i, j);
            out.valid.at(i, j) = 1;
        }
    }
    return out;
}

// dS/dt + (grad S)^2/2m + Q per node (units J). The longitudinal action
// hbar k z - (hbar^2 k^2/2m)(z/v_z) is linear in z, so its centered z-stencil
// contribution is its exact derivative; it is added in closed form
// (m v_z^2/2) instead of being added to the stored S first, which would
// cancel away most of the transverse part's precision. For an exact free
// solution the result is the constant hbar^2 k^2 / 2m.
inline MaskedGrid hj_residual(const MadelungFields& f, const PhysicalParams& p) {
    const GridSpec& g = f.grid;
    if (g.nz < 3)
        throw InsufficientDataError("hj_residual: need at least 3 z-slices");
    MaskedGrid out{RealGrid(g, 0.0), BoolGrid(g, 0)};
    const double inv2dz = 1.0 / (2.0 * g.dz());
    const double longitudinal = 0.5 * p.mass * p.v_z * p.v_z;
    for (std::size_t i = 1; i + 1 < g.nx; ++i) {
        for (std::size_t j = 1; j + 1 < g.nz; ++j) {
            if (!(f.mask.at(i, j) && f.mask.at(i, j - 1) && f.mask.at(i, j + 1)))
                continue;
            const double ds_dt =
                p.v_z * (f.S.at(i, j + 1) - f.S.at(i, j - 1)) * inv2dz;
            const double vx = f.v_x.at(i, j);
            out.values.at(i, j) =
                ds_dt + longitudinal + 0.5 * p.mass * vx * vx + f.Q.at(i, j);
            out.valid.at(i, j) = 1;
        }
    }
    return out;
}

// exp{-(i/2) Int_0^t g(tau) f(tau) dtau} by trapezoid over uniform samples of
// f on [0, t]. Unit modulus by construction.
inline Complex phase_correction(const std::vector<double>& f_samples,
                                const ViscosityModel& model, double t) {
    if (f_samples.empty())
        throw DomainError("phase_correction: empty sample sequence");
    if (!(t >= 0.0)) throw DomainError("phase_correction: t must be >= 0");
    if (t == 0.0) return {1.0, 0.0};
    if (f_samples.size() < 2)
        throw DomainError("phase_correction: need at least 2 samples for t > 0");
    model.validate();
    const std::size_t n = f_samples.size();
    const double dt = t / static_cast<double>(n - 1);
    double integral = 0.0;
    for (std::size_t j = 0; j + 1 < n; ++j) {
        const double ta = static_cast<double>(j) * dt;
        const double tb = static_cast<double>(j + 1) * dt;
        integral += 0.5 * dt *
                    (model.g(ta) * f_samples[j] + model.g(tb) * f_samples[j + 1]);
    }
    return std::polar(1.0, -0.5 * integral);
}

}  // namespace qhd
