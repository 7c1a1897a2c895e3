#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "qhd/oracle.hpp"

using namespace qhd;

namespace {
const PhysicalParams params = PhysicalParams::from_wavelength(5e-12, 100.0);
const GratingConfig comb9{9, 25e-9, 250e-9};
const GratingConfig single1{1, 25e-9, 250e-9};
const double zt = talbot_length(250e-9, 5e-12);
}  // namespace

TEST_CASE("fft matches the direct transform") {
    const std::size_t n = 16;
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    std::vector<Complex> a(n);
    for (Complex& c : a) c = Complex(d(rng), d(rng));

    std::vector<Complex> fast = a;
    oracle::detail::fft_radix2(fast, -1);

    for (std::size_t k = 0; k < n; ++k) {
        Complex direct = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            direct += a[j] * std::polar(1.0, -2.0 * std::numbers::pi *
                                                 double(j) * double(k) /
                                                 double(n));
        CHECK(std::abs(fast[k] - direct) < 1e-13);
    }
}

TEST_CASE("fft roundtrip recovers the input") {
    const std::size_t n = 1024;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    std::vector<Complex> a(n);
    for (Complex& c : a) c = Complex(d(rng), d(rng));

    std::vector<Complex> b = a;
    oracle::detail::fft_radix2(b, -1);
    oracle::detail::fft_radix2(b, +1);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(b[i] - a[i]) < 1e-13);
}

TEST_CASE("spectral domain construction is validated") {
    CHECK_THROWS_AS(oracle::make_spectral_domain(params, comb9, zt, 1000),
                    DomainError);
    CHECK_THROWS_AS(oracle::make_spectral_domain(params, comb9, zt, 8),
                    DomainError);
    CHECK_THROWS_AS(oracle::make_spectral_domain(params, comb9, -1.0),
                    DomainError);
    const double spread = oracle::diffraction_spread(zt, params, comb9);
    CHECK_THROWS_AS(
        oracle::make_spectral_domain(params, comb9, zt, 1u << 12,
                                     2.0 * (comb9.half_extent() + spread)),
        DomainError);

    const oracle::SpectralDomain dom =
        oracle::make_spectral_domain(params, comb9, zt, 1u << 12);
    CHECK(dom.n_points == (1u << 12));
    CHECK(dom.half_width >= 3.0 * (comb9.half_extent() + spread));
    for (std::size_t i : {std::size_t(0), std::size_t(17), std::size_t(4095)})
        CHECK(dom.initial[i] == evaluate_psi(dom.x(i), 0.0, params, comb9));
}

TEST_CASE("propagating to z = 0 returns the aperture field") {
    const oracle::SpectralDomain dom =
        oracle::make_spectral_domain(params, single1, zt, 1u << 12);
    const std::vector<Complex> out = oracle::spectral_propagate(dom, 0.0, params);
    REQUIRE(out.size() == dom.initial.size());
    for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == dom.initial[i]);
}

TEST_CASE("spectral propagation reproduces the single-slit closed form") {
    const oracle::SpectralDomain dom =
        oracle::make_spectral_domain(params, single1, zt, 1u << 14);
    const double n0 = oracle::discrete_norm(dom.initial, dom.dx());
    for (double z : {0.5 * zt, zt}) {
        const std::vector<Complex> psi =
            oracle::spectral_propagate(dom, z, params);
        double peak = 0.0, worst = 0.0;
        for (std::size_t i = 0; i < psi.size(); ++i) {
            const double rho_a = density(dom.x(i), z, params, single1);
            peak = std::max(peak, rho_a);
            worst = std::max(worst, std::abs(std::norm(psi[i]) - rho_a));
        }
        CHECK(worst <= 1e-7 * peak);
        const double nz = oracle::discrete_norm(psi, dom.dx());
        CHECK(std::abs(nz - n0) <= 1e-12 * n0);
    }
}

TEST_CASE("spectral propagation reproduces the interference carpet") {
    const oracle::SpectralDomain dom =
        oracle::make_spectral_domain(params, comb9, zt);
    const std::vector<Complex> psi =
        oracle::spectral_propagate(dom, 0.5 * zt, params);
    double peak = 0.0, worst = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i) {
        const double rho_a = density(dom.x(i), 0.5 * zt, params, comb9);
        peak = std::max(peak, rho_a);
        worst = std::max(worst, std::abs(std::norm(psi[i]) - rho_a));
    }
    CHECK(worst <= 1e-7 * peak);
    const double drift = std::abs(oracle::discrete_norm(psi, dom.dx()) -
                                  oracle::discrete_norm(dom.initial, dom.dx()));
    CHECK(drift <= 1e-12 * oracle::discrete_norm(dom.initial, dom.dx()));

    // Same inputs, same bits: the propagator has no hidden state.
    const std::vector<Complex> again =
        oracle::spectral_propagate(dom, 0.5 * zt, params);
    for (std::size_t i = 0; i < psi.size(); ++i) CHECK(again[i] == psi[i]);
}

TEST_CASE("a too-narrow window is detected when the packet spreads") {
    const oracle::SpectralDomain dom =
        oracle::make_spectral_domain(params, single1, zt / 50.0, 1u << 12);
    CHECK_THROWS_AS(oracle::spectral_propagate(dom, zt, params),
                    DomainTooSmallError);
}

TEST_CASE("quadrature propagator matches the single-slit closed form") {
    const double z = 0.3 * zt;
    for (double x : {0.0, 25e-9, 75e-9, 2.5e-7, -6.0e-7}) {
        const Complex q = oracle::fresnel_quadrature(x, z, params, single1);
        const Complex a = evaluate_psi(x, z, params, single1);
        CHECK(std::abs(q - a) < 1e-8);
    }
}

TEST_CASE("quadrature propagator matches the multi-slit closed form") {
    const double z = 0.7 * zt;
    for (double x : {0.0, 1.3e-7, -5.2e-7, 9.9e-7}) {
        const Complex q = oracle::fresnel_quadrature(x, z, params, comb9);
        const Complex a = evaluate_psi(x, z, params, comb9);
        CHECK(std::abs(q - a) < 1e-8);
    }
}

TEST_CASE("quadrature propagator input validation") {
    CHECK_THROWS_AS(oracle::fresnel_quadrature(0.0, 0.0, params, single1),
                    DomainError);
    CHECK_THROWS_AS(oracle::fresnel_quadrature(0.0, -1e-3, params, single1),
                    DomainError);
}

TEST_CASE("quadrature failure is reported, not swallowed") {
    // Essentially zero propagation distance: the chirp oscillates ~1e8 rad
    // over the slit, far beyond any fixed subdivision depth.
    try {
        (void)oracle::fresnel_quadrature(0.0, 7.85e-10, params, single1);
        FAIL("expected ToleranceError");
    } catch (const ToleranceError& e) {
        CHECK(e.achieved() > 1e-8);
    }
}

TEST_CASE("discrete norm is a plain quadrature") {
    const std::vector<Complex> v{{1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}};
    CHECK(oracle::discrete_norm(v, 0.5) == 2.0);
}
