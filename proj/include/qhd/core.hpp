#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "qhd/errors.hpp"

namespace qhd {

// CODATA 2018 reduced Planck constant, J*s.
inline constexpr double kHbar = 1.054571817e-34;

// 2*pi/lambda. Free so grating/oracle code can use it without a params object.
inline double wavenumber(double lambda) {
    if (!(lambda > 0.0)) throw DomainError("wavenumber: lambda must be positive");
    return 2.0 * std::numbers::pi / lambda;
}

// Mass consistent with a given de Broglie wavelength at longitudinal speed v_z:
// m = 2*pi*hbar / (lambda * v_z).
inline double derive_mass(double lambda, double v_z) {
    if (!(lambda > 0.0)) throw DomainError("derive_mass: lambda must be positive");
    if (!(v_z > 0.0)) throw DomainError("derive_mass: v_z must be positive");
    return 2.0 * std::numbers::pi * kHbar / (lambda * v_z);
}

// Beam parameters. All SI. The de Broglie relation lambda = 2*pi*hbar/(m*v_z)
// is an invariant of the struct, enforced on construction.
struct PhysicalParams {
    double hbar = kHbar;
    double mass = 0.0;    // kg
    double lambda = 0.0;  // m
    double v_z = 0.0;     // m/s

    static PhysicalParams from_wavelength(double lambda, double v_z) {
        PhysicalParams p;
        p.lambda = lambda;
        p.v_z = v_z;
        p.mass = derive_mass(lambda, v_z);
        p.validate();
        return p;
    }

    double k() const { return 2.0 * std::numbers::pi / lambda; }
    double momentum() const { return mass * v_z; }

    void validate() const {
        if (!(hbar > 0.0)) throw DomainError("PhysicalParams: hbar must be positive");
        if (!(mass > 0.0)) throw DomainError("PhysicalParams: mass must be positive");
        if (!(lambda > 0.0)) throw DomainError("PhysicalParams: lambda must be positive");
        if (!(v_z > 0.0)) throw DomainError("PhysicalParams: v_z must be positive");
        const double lam = 2.0 * std::numbers::pi * hbar / (mass * v_z);
        if (std::abs(lam - lambda) > 1e-12 * lambda)
            throw DomainError("PhysicalParams: lambda, mass, v_z violate the de Broglie relation");
    }
};

// Grating geometry: n_slits Gaussian apertures of 1/e half-width slit_width,
// centered on a comb of spacing pitch, symmetric about x = 0.
struct GratingConfig {
    std::size_t n_slits = 0;
    double slit_width = 0.0;  // b, m
    double pitch = 0.0;       // d, m

    void validate() const {
        if (n_slits < 1) throw DomainError("GratingConfig: need n_slits >= 1");
        if (!(slit_width > 0.0)) throw DomainError("GratingConfig: slit_width must be positive");
        if (!(pitch > slit_width))
            throw DomainError("GratingConfig: need pitch > slit_width");
    }

    // x_n = (n - (N-1)/2) * d; the comb is mirror-symmetric about 0 and the
    // centers of the pair (n, N-1-n) are exact negatives in floating point.
    double slit_center(std::size_t n) const {
        const double off = static_cast<double>(n) -
                           0.5 * static_cast<double>(n_slits - 1);
        return off * pitch;
    }

    double half_extent() const {
        return 0.5 * static_cast<double>(n_slits - 1) * pitch;
    }
};

// Grating period in units of z: z_T = 2 d^2 / lambda.
inline double talbot_length(double pitch, double lambda) {
    if (!(pitch > 0.0)) throw DomainError("talbot_length: pitch must be positive");
    if (!(lambda > 0.0)) throw DomainError("talbot_length: lambda must be positive");
    return 2.0 * pitch * pitch / lambda;
}

// Dimensionless spreading parameter xi = lambda*z / (2*pi*b^2)
// (equivalently hbar*t/(m*b^2) with t = z/v_z).
inline double fresnel_parameter(double lambda, double slit_width, double z) {
    if (!(lambda > 0.0)) throw DomainError("fresnel_parameter: lambda must be positive");
    if (!(slit_width > 0.0)) throw DomainError("fresnel_parameter: slit_width must be positive");
    if (!(z >= 0.0)) throw DomainError("fresnel_parameter: z must be >= 0");
    return lambda * z / (2.0 * std::numbers::pi * slit_width * slit_width);
}

inline double fresnel_parameter(double z, const PhysicalParams& p,
                                const GratingConfig& g) {
    if (!(z >= 0.0)) throw DomainError("fresnel_parameter: z must be >= 0");
    return fresnel_parameter(p.lambda, g.slit_width, z);
}

// Time-dependent effective viscosity nu(t) = amplitude * g(t) with a zero-mean
// periodic modulation g. The physically distinguished amplitude is hbar/(2m).
struct ViscosityModel {
    enum class Waveform { sine, multimode };

    double amplitude = 0.0;  // m^2/s
    Waveform waveform = Waveform::sine;
    double omega = 0.0;      // rad/s, fundamental
    double phase = 0.0;      // rad, sine only
    std::uint64_t seed = 0;            // multimode only
    std::vector<double> mode_amp;      // multimode: amplitude of harmonic m+1
    std::vector<double> mode_phase;    // multimode: phase of harmonic m+1

    static ViscosityModel sine(const PhysicalParams& p, double omega, double phase = 0.0) {
        ViscosityModel m;
        m.amplitude = p.hbar / (2.0 * p.mass);
        m.waveform = Waveform::sine;
        m.omega = omega;
        m.phase = phase;
        m.validate();
        return m;
    }

    // Harmonics 1..n_modes of omega with seeded random amplitudes and phases;
    // commensurate by construction, so 2*pi/omega stays an exact period.
    static ViscosityModel multimode(const PhysicalParams& p, double omega,
                                    std::size_t n_modes, std::uint64_t seed) {
        if (n_modes < 1) throw DomainError("ViscosityModel: need n_modes >= 1");
        ViscosityModel m;
        m.amplitude = p.hbar / (2.0 * p.mass);
        m.waveform = Waveform::multimode;
        m.omega = omega;
        m.seed = seed;
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> amp(0.2, 1.0);
        std::uniform_real_distribution<double> ph(0.0, 2.0 * std::numbers::pi);
        for (std::size_t i = 0; i < n_modes; ++i) {
            m.mode_amp.push_back(amp(rng));
            m.mode_phase.push_back(ph(rng));
        }
        m.validate();
        return m;
    }

    void validate() const {
        if (!(amplitude > 0.0)) throw DomainError("ViscosityModel: amplitude must be positive");
        if (!(omega > 0.0)) throw DomainError("ViscosityModel: omega must be positive");
        if (waveform == Waveform::multimode &&
            (mode_amp.empty() || mode_amp.size() != mode_phase.size()))
            throw DomainError("ViscosityModel: multimode needs a populated mode table");
    }

    // All harmonics are commensurate, so this is the exact period of g.
    double period() const { return 2.0 * std::numbers::pi / omega; }

    // Dimensionless modulation, zero mean over one period by construction.
    double g(double t) const {
        if (waveform == Waveform::sine) return std::sin(omega * t + phase);
        double s = 0.0;
        for (std::size_t m = 0; m < mode_amp.size(); ++m)
            s += mode_amp[m] *
                 std::sin(static_cast<double>(m + 1) * omega * t + mode_phase[m]);
        return s;
    }

    double nu(double t) const { return amplitude * g(t); }
};

inline double sample_viscosity(const ViscosityModel& model, double t) {
    if (!(t >= 0.0)) throw DomainError("sample_viscosity: t must be >= 0");
    model.validate();
    return model.nu(t);
}

inline std::vector<double> sample_viscosity(const ViscosityModel& model,
                                            const std::vector<double>& times) {
    model.validate();
    std::vector<double> out;
    out.reserve(times.size());
    for (double t : times) {
        if (!(t >= 0.0)) throw DomainError("sample_viscosity: t must be >= 0");
        out.push_back(model.nu(t));
    }
    return out;
}

}  // namespace qhd
