#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "qhd/core.hpp"
#include "qhd/grid.hpp"

using namespace qhd;

TEST_CASE("mass follows from wavelength and speed") {
    CHECK(derive_mass(5e-12, 100.0) ==
          Catch::Approx(1.3252140291880161e-24).epsilon(1e-14));
    CHECK(derive_mass(5e-12, 200.0) ==
          Catch::Approx(6.6260701459400805e-25).epsilon(1e-14));
    CHECK_THROWS_AS(derive_mass(0.0, 100.0), DomainError);
    CHECK_THROWS_AS(derive_mass(5e-12, -1.0), DomainError);
}

TEST_CASE("physical parameter bundle is self-consistent") {
    const PhysicalParams p = PhysicalParams::from_wavelength(5e-12, 100.0);
    CHECK(p.hbar == 1.054571817e-34);
    CHECK(p.k() == Catch::Approx(1256637061435.9172).epsilon(1e-14));
    CHECK(p.momentum() == Catch::Approx(p.hbar * p.k()).epsilon(1e-12));
    CHECK_NOTHROW(p.validate());

    PhysicalParams broken = p;
    broken.mass *= 1.5;  // no longer matches lambda
    CHECK_THROWS_AS(broken.validate(), DomainError);
}

TEST_CASE("self-imaging distance") {
    CHECK(std::abs(talbot_length(250e-9, 5e-12) / 0.025 - 1.0) < 1e-15);
    CHECK(talbot_length(100e-9, 5e-12) == Catch::Approx(0.004).epsilon(1e-14));
    CHECK_THROWS_AS(talbot_length(-1e-9, 5e-12), DomainError);
    CHECK_THROWS_AS(talbot_length(250e-9, 0.0), DomainError);
}

TEST_CASE("self-imaging distance is scale-homogeneous") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> scale(0.1, 10.0);
    std::uniform_real_distribution<double> pitch(50e-9, 2e-6);
    std::uniform_real_distribution<double> lam(1e-12, 1e-10);
    for (int it = 0; it < 200; ++it) {
        const double s = scale(rng);
        const double d = pitch(rng);
        const double l = lam(rng);
        const double a = talbot_length(s * d, s * s * l);
        const double c = talbot_length(d, l);
        CHECK(a == Catch::Approx(c).epsilon(1e-12));
    }
}

TEST_CASE("dimensionless propagation parameter") {
    CHECK(fresnel_parameter(5e-12, 25e-9, 0.025) ==
          Catch::Approx(31.83098861837907).epsilon(1e-14));
    CHECK(fresnel_parameter(5e-12, 25e-9, 0.15) ==
          Catch::Approx(190.9859317102744).epsilon(1e-14));
    CHECK(fresnel_parameter(5e-12, 25e-9, 0.0) == 0.0);
    CHECK_THROWS_AS(fresnel_parameter(5e-12, 25e-9, -1e-6), DomainError);

    const PhysicalParams p = PhysicalParams::from_wavelength(5e-12, 100.0);
    const GratingConfig g{9, 25e-9, 250e-9};
    CHECK(fresnel_parameter(0.025, p, g) ==
          fresnel_parameter(5e-12, 25e-9, 0.025));
}

TEST_CASE("grating geometry") {
    const GratingConfig g{9, 25e-9, 250e-9};
    CHECK_NOTHROW(g.validate());
    CHECK(g.slit_center(4) == 0.0);
    CHECK(g.slit_center(0) == Catch::Approx(-1e-6));
    CHECK(g.slit_center(8) == Catch::Approx(1e-6));
    CHECK(g.slit_center(0) == -g.slit_center(8));  // exact mirror pair
    CHECK(g.half_extent() == Catch::Approx(1e-6));

    const GratingConfig single{1, 25e-9, 250e-9};
    CHECK(single.slit_center(0) == 0.0);

    CHECK_THROWS_AS((GratingConfig{0, 25e-9, 250e-9}.validate()), DomainError);
    CHECK_THROWS_AS((GratingConfig{9, 0.0, 250e-9}.validate()), DomainError);
    CHECK_THROWS_AS((GratingConfig{9, 25e-9, 20e-9}.validate()), DomainError);
}

TEST_CASE("grid spacing and bounds") {
    GridSpec s{-1.0, 1.0, 5, 0.0, 2.0, 3};
    CHECK_NOTHROW(s.validate());
    CHECK(s.dx() == Catch::Approx(0.5));
    CHECK(s.dz() == Catch::Approx(1.0));
    CHECK(s.x(0) == -1.0);
    CHECK(s.z(2) == Catch::Approx(2.0));
    CHECK(s.size() == 15);

    CHECK_THROWS_AS((GridSpec{1.0, -1.0, 5, 0.0, 2.0, 3}.validate()), DomainError);
    CHECK_THROWS_AS((GridSpec{-1.0, 1.0, 1, 0.0, 2.0, 3}.validate()), DomainError);
    CHECK_THROWS_AS((GridSpec{-1.0, 1.0, 5, -0.1, 2.0, 3}.validate()), DomainError);
    CHECK_THROWS_AS((GridSpec{-1.0, 1.0, 5, 2.0, 1.0, 3}.validate()), DomainError);
}

TEST_CASE("sinusoidal viscosity modulation") {
    const PhysicalParams p = PhysicalParams::from_wavelength(5e-12, 100.0);
    const double omega = 2.0 * std::numbers::pi * 1e3;
    const ViscosityModel m = ViscosityModel::sine(p, omega);
    CHECK(m.amplitude == Catch::Approx(p.hbar / (2.0 * p.mass)).epsilon(1e-15));
    CHECK(sample_viscosity(m, 0.0) == 0.0);
    CHECK_THROWS_AS(sample_viscosity(m, -1e-9), DomainError);

    // Trapezoid statistics over one exact period.
    const std::size_t n = 4096;
    const double dt = m.period() / static_cast<double>(n);
    double mean = 0.0, var = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        mean += m.nu(static_cast<double>(i) * dt);
    mean /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = m.nu(static_cast<double>(i) * dt) - mean;
        var += d * d;
    }
    var /= static_cast<double>(n);
    CHECK(std::abs(mean) < 1e-12 * m.amplitude);
    CHECK(var == Catch::Approx(0.5 * m.amplitude * m.amplitude).epsilon(1e-10));
    CHECK(var > 0.4 * m.amplitude * m.amplitude);
}

TEST_CASE("multi-mode viscosity modulation is deterministic and zero-mean") {
    const PhysicalParams p = PhysicalParams::from_wavelength(5e-12, 100.0);
    const double omega = 2.0 * std::numbers::pi * 500.0;
    const ViscosityModel a = ViscosityModel::multimode(p, omega, 5, 1234);
    const ViscosityModel b = ViscosityModel::multimode(p, omega, 5, 1234);
    const ViscosityModel c = ViscosityModel::multimode(p, omega, 5, 99);

    bool identical = true, differs = false;
    double mean = 0.0;
    const std::size_t n = 8192;
    const double dt = a.period() / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) * dt;
        identical = identical && (a.nu(t) == b.nu(t));
        differs = differs || (a.nu(t) != c.nu(t));
        mean += a.nu(t);
    }
    mean /= static_cast<double>(n);
    CHECK(identical);
    CHECK(differs);
    CHECK(std::abs(mean) < 1e-10 * a.amplitude);
    CHECK(a.mode_amp.size() == 5);
    CHECK_THROWS_AS(ViscosityModel::multimode(p, omega, 0, 1), DomainError);
}

TEST_CASE("vectorized viscosity sampling matches scalar calls") {
    const PhysicalParams p = PhysicalParams::from_wavelength(5e-12, 100.0);
    const ViscosityModel m = ViscosityModel::sine(p, 1e4, 0.3);
    const std::vector<double> ts = {0.0, 1e-5, 2e-4, 7e-4};
    const std::vector<double> vs = sample_viscosity(m, ts);
    REQUIRE(vs.size() == ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i)
        CHECK(vs[i] == sample_viscosity(m, ts[i]));
}
