#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "qhd/core.hpp"
#include "qhd/trajectories.hpp"
#include "qhd/wavefield.hpp"

namespace qhd {

namespace detail {

inline Complex log_derivative(const WaveDerivatives& d, double x, double z) {
    const double rho = std::norm(d.psi);
    if (!(rho > kDensityGuard))
        throw SingularPointError(x, z, "velocity statistics: density below guard");
    return d.dpsi_dx / d.psi;
}

}  // namespace detail

// Kinetic-energy variance via the squared complex velocity:
//   Var = (m/2) (U_x^2 + v_z^2),  U_x = -i (hbar/m) psi_x / psi.
// With include_longitudinal=false the v_z^2 term is dropped.
inline Complex variance_complex_velocity(const WaveDerivatives& d,
                                         const PhysicalParams& p, double x,
                                         double z,
                                         bool include_longitudinal = true) {
    const Complex L = detail::log_derivative(d, x, z);
    const Complex Ux = Complex(0.0, -1.0) * (p.hbar / p.mass) * L;
    Complex v2 = Ux * Ux;
    if (include_longitudinal) v2 += p.v_z * p.v_z;
    return 0.5 * p.mass * v2;
}

inline Complex variance_complex_velocity(double x, double z,
                                         const PhysicalParams& p,
                                         const GratingConfig& g,
                                         bool include_longitudinal = true) {
    return variance_complex_velocity(evaluate_derivatives(x, z, p, g), p, x, z,
                                     include_longitudinal);
}

// Same quantity assembled from the operator expansion
//   Var = -(hbar^2/2m) (psi_xx/psi - k^2) + i (hbar/2) dU_x/dx,
//   dU_x/dx = -i (hbar/m) (psi_xx/psi - (psi_x/psi)^2).
// The longitudinal plane-wave part enters as +hbar^2 k^2 / 2m.
inline Complex variance_from_operator_expansion(
    const WaveDerivatives& d, const PhysicalParams& p, double x, double z,
    bool include_longitudinal = true) {
    const Complex L = detail::log_derivative(d, x, z);
    const Complex L2 = d.d2psi_dx2 / d.psi;
    const double c = p.hbar * p.hbar / (2.0 * p.mass);
    const Complex dUx_dx = Complex(0.0, -1.0) * (p.hbar / p.mass) * (L2 - L * L);
    Complex var = -c * L2 + Complex(0.0, 0.5 * p.hbar) * dUx_dx;
    if (include_longitudinal) {
        const double k = p.k();
        var += c * (k * k);
    }
    return var;
}

inline Complex variance_from_operator_expansion(
    double x, double z, const PhysicalParams& p, const GratingConfig& g,
    bool include_longitudinal = true) {
    return variance_from_operator_expansion(evaluate_derivatives(x, z, p, g),
                                            p, x, z, include_longitudinal);
}

// Quantum frequency: omega_Q = (hbar/m) [Re(psi_x/psi)]^2 = m u_x^2 / hbar.
inline double omega_q(const WaveDerivatives& d, const PhysicalParams& p,
                      double x, double z) {
    const double lr = detail::log_derivative(d, x, z).real();
    return (p.hbar / p.mass) * lr * lr;
}

inline double omega_q(double x, double z, const PhysicalParams& p,
                      const GratingConfig& g) {
    return omega_q(evaluate_derivatives(x, z, p, g), p, x, z);
}

struct ReVarRecord {
    double x = 0.0;
    double z = 0.0;
    double E = 0.0;        // J
    double omega_q = 0.0;  // 1/s
    double re_var = 0.0;   // J, = E - (hbar/2) omega_q
    bool violation = false;
};

struct ReVarScan {
    std::vector<ReVarRecord> records;
    std::size_t n_checked = 0;
    std::size_t n_violations = 0;
    double min_re_var = 0.0;
    double min_omega_q = 0.0;
    double eps_rho = 0.0;  // validity threshold used, relative to peak rho
};

// Scan Re Var = E - (hbar/2) omega_Q over a grid, at nodes with
// rho >= eps_rho * max rho. E is the kinetic energy (m/2)(v_x^2 + v_z^2);
// with include_longitudinal=false the v_z^2 part is dropped, which is the
// variant that exhibits genuine negative values near interference nulls.
inline ReVarScan scan_re_var(const GridSpec& spec, const PhysicalParams& p,
                             const GratingConfig& g, double eps_rho = 1e-6,
                             bool include_longitudinal = true) {
    spec.validate();
    p.validate();
    g.validate();
    if (!(eps_rho > 0.0 && eps_rho < 1.0))
        throw DomainError("scan_re_var: need 0 < eps_rho < 1");

    std::vector<double> rho(spec.size());
    double rho_max = 0.0;
    for (std::size_t i = 0; i < spec.nx; ++i)
        for (std::size_t j = 0; j < spec.nz; ++j) {
            const double r = density(spec.x(i), spec.z(j), p, g);
            rho[i * spec.nz + j] = r;
            if (r > rho_max) rho_max = r;
        }
    if (!(rho_max > 0.0))
        throw DegenerateFieldError("scan_re_var: field vanishes on the grid");

    ReVarScan scan;
    scan.eps_rho = eps_rho;
    const double thresh = eps_rho * rho_max;
    const double f = p.hbar / p.mass;
    bool first = true;
    for (std::size_t i = 0; i < spec.nx; ++i)
        for (std::size_t j = 0; j < spec.nz; ++j) {
            if (rho[i * spec.nz + j] < thresh) continue;
            const double x = spec.x(i);
            const double z = spec.z(j);
            const WaveDerivatives d = evaluate_derivatives(x, z, p, g);
            const Complex L = d.dpsi_dx / d.psi;
            ReVarRecord r;
            r.x = x;
            r.z = z;
            const double vx = f * L.imag();
            r.E = 0.5 * p.mass *
                  (vx * vx + (include_longitudinal ? p.v_z * p.v_z : 0.0));
            r.omega_q = f * (L.real() * L.real());
            r.re_var = r.E - 0.5 * p.hbar * r.omega_q;
            r.violation = r.re_var < 0.0;
            ++scan.n_checked;
            if (r.violation) ++scan.n_violations;
            if (first || r.re_var < scan.min_re_var) scan.min_re_var = r.re_var;
            if (first || r.omega_q < scan.min_omega_q)
                scan.min_omega_q = r.omega_q;
            first = false;
            scan.records.push_back(r);
        }
    if (scan.n_checked == 0)
        throw DegenerateFieldError("scan_re_var: no node above threshold");
    return scan;
}

struct PairwisePoint {
    double z = 0.0;
    double dE = 0.0;      // J
    double domega = 0.0;  // 1/s
    double dEdt = 0.0;    // J s
    double dpdr = 0.0;    // J s
    bool indeterminate = false;
    bool satisfied = false;
};

struct PairwiseReport {
    std::vector<PairwisePoint> points;
    std::size_t n_determinate = 0;
    std::size_t n_indeterminate = 0;
    std::size_t n_satisfied = 0;
    double fraction_satisfied = 0.0;  // over determinate points
};

// Frequency threshold below which a pair is reported indeterminate rather
// than dividing by a vanishing frequency split.
inline constexpr double kOmegaSplitGuard = 1e-20;

// Pairwise exchange bounds along two trajectories sharing the same z ladder:
//   dt = 1/|omega_b - omega_a|, dE dt >= hbar/2 and dp dr >= hbar/2 with
//   dp = m |v_xb - v_xa| and dr = |v_a| dt.
inline PairwiseReport pairwise_uncertainty(const Trajectory& a,
                                           const Trajectory& b,
                                           const PhysicalParams& p) {
    const std::size_t n = std::min(a.points.size(), b.points.size());
    if (n == 0)
        throw InsufficientDataError("pairwise_uncertainty: empty trajectory");
    PairwiseReport rep;
    rep.points.reserve(n);
    const double half_hbar = 0.5 * p.hbar;
    for (std::size_t k = 0; k < n; ++k) {
        const TrajectoryPoint& pa = a.points[k];
        const TrajectoryPoint& pb = b.points[k];
        if (pa.z != pb.z)
            throw DomainError("pairwise_uncertainty: trajectories do not share z samples");
        PairwisePoint q;
        q.z = pa.z;
        q.dE = pb.E - pa.E;
        q.domega = pb.omega_q - pa.omega_q;
        if (std::abs(q.domega) < kOmegaSplitGuard) {
            q.indeterminate = true;
            ++rep.n_indeterminate;
        } else {
            const double dt = 1.0 / std::abs(q.domega);
            q.dEdt = std::abs(q.dE) * dt;
            const double dp = p.mass * std::abs(pb.v_x - pa.v_x);
            const double speed_a = std::hypot(pa.v_x, p.v_z);
            q.dpdr = dp * speed_a * dt;
            q.satisfied = q.dEdt >= half_hbar && q.dpdr >= half_hbar;
            ++rep.n_determinate;
            if (q.satisfied) ++rep.n_satisfied;
        }
        rep.points.push_back(q);
    }
    if (rep.n_determinate > 0)
        rep.fraction_satisfied = static_cast<double>(rep.n_satisfied) /
                                 static_cast<double>(rep.n_determinate);
    return rep;
}

}  // namespace qhd
