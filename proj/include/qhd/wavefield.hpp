#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

#include "qhd/core.hpp"
#include "qhd/grid.hpp"

namespace qhd {

using Complex = std::complex<double>;

struct WaveGradient {
    Complex dpsi_dx;  // 1/m
    Complex dpsi_dz;  // 1/m
};

// Everything the hydrodynamic routines need at one point.
struct WaveDerivatives {
    Complex psi;
    Complex dpsi_dx;
    Complex dpsi_dz;
    Complex d2psi_dx2;
};

namespace detail {

// Shared per-z factors of the multi-slit Gaussian superposition
//   psi(x,z) = 1/(N sqrt(A)) * sum_n exp(-(x - x_n)^2 / (2 b^2 A)),
// A = 1 + i*xi, xi = lambda z / (2 pi b^2). Principal square root: xi >= 0
// keeps A in the right half-plane, so the branch is unambiguous.
struct SlitSumFactors {
    Complex A;
    Complex pref;     // 1 / (N sqrt(A))
    Complex inv_b2A;  // 1 / (b^2 A)
    double half_b2;   // b^2 / 2
    double xi_prime;  // d(xi)/dz

    SlitSumFactors(const PhysicalParams& p, const GratingConfig& g, double z) {
        const double b2 = g.slit_width * g.slit_width;
        const double xi = fresnel_parameter(p.lambda, g.slit_width, z);
        A = Complex(1.0, xi);
        pref = 1.0 / (static_cast<double>(g.n_slits) * std::sqrt(A));
        inv_b2A = 1.0 / (b2 * A);
        half_b2 = 0.5 * b2;
        xi_prime = p.lambda / (2.0 * std::numbers::pi * b2);
    }
};

// Accumulated per-slit sums. Slits are visited in mirror pairs (n, N-1-n) so
// that x -> -x maps every intermediate to its exact negation/copy: slit
// centers are exact FP negatives, IEEE ops commute with negation, and
// addition order is identical. This makes psi even and dpsi_dx odd bit-exactly
// on the centered grating.
struct SlitSums {
    Complex s0{};   // sum exp(E)
    Complex sx{};   // sum exp(E) * (-(x-x_n)/(b^2 A))
    Complex sxx{};  // sum exp(E) * (((x-x_n)/(b^2 A))^2 - 1/(b^2 A))
    Complex sz{};   // sum exp(E) * (x-x_n)^2 / (2 b^2 A^2)
};

inline void accumulate_slit(const SlitSumFactors& f, double u, SlitSums& acc) {
    // u = x - x_n. Terms below the exp underflow threshold contribute exact
    // zeros; skip them (the mirror image skips identically).
    const Complex e = -0.5 * u * u * f.inv_b2A;
    if (e.real() < -746.0) return;
    const Complex t = std::exp(e);
    const Complex g = u * f.inv_b2A;
    acc.s0 += t;
    acc.sx += t * (-g);
    acc.sxx += t * (g * g - f.inv_b2A);
    acc.sz += t * (f.half_b2 * (g * g));
}

inline SlitSums slit_sums(const SlitSumFactors& f, const GratingConfig& g,
                          double x) {
    SlitSums total{};
    const std::size_t n = g.n_slits;
    auto fold = [&](const SlitSums& s) {
        total.s0 += s.s0;
        total.sx += s.sx;
        total.sxx += s.sxx;
        total.sz += s.sz;
    };
    for (std::size_t p = 0; p < n / 2; ++p) {
        SlitSums pair{};
        accumulate_slit(f, x - g.slit_center(p), pair);
        accumulate_slit(f, x - g.slit_center(n - 1 - p), pair);
        fold(pair);
    }
    if (n % 2 == 1) {
        SlitSums mid{};
        accumulate_slit(f, x - g.slit_center(n / 2), mid);
        fold(mid);
    }
    return total;
}

inline void check_point(double z) {
    if (!(z >= 0.0)) throw DomainError("wavefield: z must be >= 0");
}

}  // namespace detail

inline Complex evaluate_psi(double x, double z, const PhysicalParams& p,
                            const GratingConfig& g) {
    // Same accumulation path as evaluate_field/evaluate_derivatives, so a
    // point call and a grid node agree bit for bit.
    detail::check_point(z);
    const detail::SlitSumFactors f(p, g, z);
    return f.pref * detail::slit_sums(f, g, x).s0;
}

inline WaveDerivatives evaluate_derivatives(double x, double z,
                                            const PhysicalParams& p,
                                            const GratingConfig& g) {
    detail::check_point(z);
    const detail::SlitSumFactors f(p, g, z);
    const detail::SlitSums s = detail::slit_sums(f, g, x);
    WaveDerivatives d;
    d.psi = f.pref * s.s0;
    d.dpsi_dx = f.pref * s.sx;
    d.d2psi_dx2 = f.pref * s.sxx;
    d.dpsi_dz = Complex(0.0, f.xi_prime) * (f.pref * (s.sz - s.s0 / (2.0 * f.A)));
    return d;
}

inline WaveGradient evaluate_grad_psi(double x, double z,
                                      const PhysicalParams& p,
                                      const GratingConfig& g) {
    const WaveDerivatives d = evaluate_derivatives(x, z, p, g);
    return {d.dpsi_dx, d.dpsi_dz};
}

inline double density(double x, double z, const PhysicalParams& p,
                      const GratingConfig& g) {
    return std::norm(evaluate_psi(x, z, p, g));
}

// A wavefunction sampled on a grid plus the beam parameters needed to read
// hydrodynamic fields off it. For synthetic (non-grating) fields the grating
// member is left default-constructed with n_slits == 0.
struct ComplexField {
    GridSpec grid;
    PhysicalParams params;
    GratingConfig grating{};
    std::vector<Complex> psi;  // x-major, psi[i*nz + j]

    Complex at(std::size_t i, std::size_t j) const {
        return psi[i * grid.nz + j];
    }
};

inline ComplexField evaluate_field(const GridSpec& spec,
                                   const PhysicalParams& p,
                                   const GratingConfig& g) {
    spec.validate();
    p.validate();
    g.validate();
    ComplexField fld;
    fld.grid = spec;
    fld.params = p;
    fld.grating = g;
    fld.psi.resize(spec.size());
    for (std::size_t j = 0; j < spec.nz; ++j) {
        const detail::SlitSumFactors f(p, g, spec.z(j));
        for (std::size_t i = 0; i < spec.nx; ++i) {
            const detail::SlitSums s = detail::slit_sums(f, g, spec.x(i));
            fld.psi[i * spec.nz + j] = f.pref * s.s0;
        }
    }
    return fld;
}

// Sample an arbitrary psi(x,z) on a grid; used for synthetic test fields.
inline ComplexField sample_field(const GridSpec& spec, const PhysicalParams& p,
                                 const std::function<Complex(double, double)>& fn) {
    spec.validate();
    ComplexField fld;
    fld.grid = spec;
    fld.params = p;
    fld.psi.resize(spec.size());
    for (std::size_t i = 0; i < spec.nx; ++i)
        for (std::size_t j = 0; j < spec.nz; ++j)
            fld.psi[i * spec.nz + j] = fn(spec.x(i), spec.z(j));
    return fld;
}

// Trapezoid of |psi|^2 over x at slice j.
inline double transverse_norm(const ComplexField& f, std::size_t j) {
    const std::size_t nx = f.grid.nx;
    if (nx < 2) throw InsufficientDataError("transverse_norm: need nx >= 2");
    double s = 0.5 * (std::norm(f.at(0, j)) + std::norm(f.at(nx - 1, j)));
    for (std::size_t i = 1; i + 1 < nx; ++i) s += std::norm(f.at(i, j));
    return s * f.grid.dx();
}

}  // namespace qhd
