#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "qhd/core.hpp"
#include "qhd/wavefield.hpp"

// Reference propagators used to cross-check the closed-form field: a
// periodic split-free spectral propagator (exact free-particle kernel in k
// space) and an adaptive Fresnel quadrature. Both start from the aperture
// field at z = 0 and know nothing about the closed-form solution at z > 0.
namespace qhd::oracle {

namespace detail {

// Iterative radix-2 complex FFT, in place. sign = -1 forward, +1 inverse
// (inverse includes the 1/n scaling). Twiddles come straight from
// std::polar per butterfly, keeping the transform platform-deterministic.
inline void fft_radix2(std::vector<Complex>& a, int sign) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang =
            static_cast<double>(sign) * 2.0 * std::numbers::pi /
            static_cast<double>(len);
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t j = 0; j < len / 2; ++j) {
                const Complex w = std::polar(1.0, ang * static_cast<double>(j));
                const Complex u = a[i + j];
                const Complex v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
            }
        }
    }
    if (sign > 0) {
        const double inv = 1.0 / static_cast<double>(n);
        for (Complex& c : a) c *= inv;
    }
}

}  // namespace detail

struct SpectralDomain {
    std::size_t n_points = 0;
    double half_width = 0.0;  // m; domain is [-half_width, half_width)
    PhysicalParams params;
    GratingConfig grating;
    std::vector<Complex> initial;  // aperture field sampled on the nodes

    double dx() const { return 2.0 * half_width / static_cast<double>(n_points); }
    double x(std::size_t i) const {
        return -half_width + static_cast<double>(i) * dx();
    }
};

// Gaussian beam half-width sqrt(1 + xi^2) * b at distance z.
inline double diffraction_spread(double z, const PhysicalParams& p,
                                 const GratingConfig& g) {
    const double xi = fresnel_parameter(p.lambda, g.slit_width, z);
    return g.slit_width * std::sqrt(1.0 + xi * xi);
}

// Build the periodic domain and sample the z = 0 aperture field on it.
// half_width = 0 picks a default wide enough for propagation up to z_max;
// an explicit half_width below 3 x (grating extent + spread) is rejected.
inline SpectralDomain make_spectral_domain(const PhysicalParams& p,
                                           const GratingConfig& g,
                                           double z_max,
                                           std::size_t n_points = 1u << 16,
                                           double half_width = 0.0) {
    p.validate();
    g.validate();
    if (!(z_max >= 0.0)) throw DomainError("make_spectral_domain: need z_max >= 0");
    if (n_points < 16 || (n_points & (n_points - 1)) != 0)
        throw DomainError("make_spectral_domain: n_points must be a power of two >= 16");
    const double extent = g.half_extent();
    const double spread = diffraction_spread(z_max, p, g);
    const double floor_hw = 3.0 * (extent + spread);
    if (half_width == 0.0) {
        half_width = std::max({floor_hw, 8.0 * extent, extent + 5.5 * spread});
    } else if (half_width < floor_hw) {
        throw DomainError("make_spectral_domain: half_width below 3 x (extent + spread)");
    }
    SpectralDomain dom;
    dom.n_points = n_points;
    dom.half_width = half_width;
    dom.params = p;
    dom.grating = g;
    dom.initial.resize(n_points);
    for (std::size_t i = 0; i < n_points; ++i)
        dom.initial[i] = evaluate_psi(dom.x(i), 0.0, p, g);
    return dom;
}

inline double discrete_norm(const std::vector<Complex>& psi, double dx) {
    double s = 0.0;
    for (const Complex& c : psi) s += std::norm(c);
    return s * dx;
}

// Propagate the aperture field to z with the exact free kernel
// exp(-i hbar k^2 t / 2m), t = z / v_z, applied in k space. Throws
// DomainTooSmallError if more than 1e-8 of the squared norm sits within
// the outer 5% of the periodic window (wrap-around imminent).
inline std::vector<Complex> spectral_propagate(const SpectralDomain& dom,
                                               double z,
                                               const PhysicalParams& p) {
    if (!(z >= 0.0)) throw DomainError("spectral_propagate: need z >= 0");
    if (dom.initial.size() != dom.n_points || dom.n_points == 0)
        throw DomainError("spectral_propagate: domain not initialised");
    std::vector<Complex> psi = dom.initial;
    if (z > 0.0) {
        const double t = z / p.v_z;
        const double dk =
            2.0 * std::numbers::pi / (2.0 * dom.half_width);
        const double c = 0.5 * p.hbar * t / p.mass;
        detail::fft_radix2(psi, -1);
        const std::size_t n = dom.n_points;
        for (std::size_t j = 0; j < n; ++j) {
            const double m = (j < n / 2)
                                 ? static_cast<double>(j)
                                 : static_cast<double>(j) - static_cast<double>(n);
            const double k = m * dk;
            psi[j] *= std::polar(1.0, -c * k * k);
        }
        detail::fft_radix2(psi, +1);
    }
    double edge = 0.0, total = 0.0;
    const double cut = 0.95 * dom.half_width;
    for (std::size_t i = 0; i < dom.n_points; ++i) {
        const double w = std::norm(psi[i]);
        total += w;
        if (std::abs(dom.x(i)) >= cut) edge += w;
    }
    if (!(total > 0.0))
        throw DomainError("spectral_propagate: field vanished");
    if (edge / total >= 1e-8)
        throw DomainTooSmallError("spectral_propagate: wavepacket reached the window edge");
    return psi;
}

// Independent point evaluation of the Fresnel integral
//   psi(x, z) = 1/sqrt(2 pi i xi) Integral exp(i (x/b - s)^2 / (2 xi)) psi0(b s) ds
// in slit-width units, by adaptive Gauss-Kronrod quadrature. Throws
// ToleranceError when the error estimate exceeds 1e-8.
inline Complex fresnel_quadrature(double x, double z, const PhysicalParams& p,
                                  const GratingConfig& g) {
    p.validate();
    g.validate();
    if (!(z > 0.0)) throw DomainError("fresnel_quadrature: need z > 0");
    const double b = g.slit_width;
    const double xi = fresnel_parameter(p.lambda, b, z);
    const double chi = x / b;
    const double n = static_cast<double>(g.n_slits);
    std::vector<double> centers(g.n_slits);
    for (std::size_t s = 0; s < g.n_slits; ++s)
        centers[s] = g.slit_center(s) / b;
    const auto integrand = [&](double s) -> Complex {
        double a = 0.0;
        for (double c : centers) {
            const double u = s - c;
            const double e = -0.5 * u * u;
            if (e > -700.0) a += std::exp(e);
        }
        const double u = chi - s;
        return std::polar(a / n, 0.5 * u * u / xi);
    };
    const double lo = centers.front() - 13.0;
    const double hi = centers.back() + 13.0;
    double err = 0.0;
    const Complex integral =
        boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
            integrand, lo, hi, 14, 1e-12, &err);
    if (!(err <= 1e-8))
        throw ToleranceError(err, "fresnel_quadrature: quadrature did not converge");
    const Complex pref =
        std::polar(1.0, -0.25 * std::numbers::pi) /
        std::sqrt(2.0 * std::numbers::pi * xi);
    return pref * integral;
}

}  // namespace qhd::oracle
