#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qhd/core.hpp"
#include "qhd/grid.hpp"
#include "qhd/trajectories.hpp"

namespace qhd {

// Full effective run configuration. The JSON file carries only the physics
// block (plus the optional viscosity model); grid, ensemble and output
// settings have derived defaults and are adjusted through CLI flags.
struct RunConfig {
    PhysicalParams params;
    GratingConfig grating;
    std::optional<ViscosityModel> viscosity;
    GridSpec grid;
    EnsembleConfig ensemble;
    double gamma = 0.5;      // PGM intensity exponent
    double eps_rho = 1e-12;  // decomposition validity threshold

    double talbot() const {
        return talbot_length(grating.pitch, params.lambda);
    }

    // Default grid and ensemble spans scale with the configured grating.
    void derive_defaults() {
        const double d = grating.pitch;
        const double zt = talbot();
        grid.x_min = -4.5 * d;
        grid.x_max = 4.5 * d;
        grid.nx = 1800;
        grid.z_min = 0.0;
        grid.z_max = 6.0 * zt;
        grid.nz = 600;
        ensemble.n_trajectories = 100;
        ensemble.seeding = Seeding::uniform_across_slits;
        ensemble.z_start = 0.0;
        ensemble.z_end = 6.0 * zt;
        ensemble.integrator = Integrator::rk4;
        ensemble.dz = zt / 2000.0;
        ensemble.record_every = 20;
    }

    void validate() const {
        params.validate();
        grating.validate();
        if (viscosity) viscosity->validate();
        grid.validate();
        ensemble.validate();
        if (!(gamma > 0.0)) throw ConfigError("gamma must be positive");
        if (!(eps_rho > 0.0 && eps_rho < 1.0))
            throw ConfigError("eps_rho must lie in (0, 1)");
    }

    static RunConfig defaults();
    static RunConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& obj,
                                const std::vector<std::string>& allowed,
                                const std::string& where) {
    for (const auto& item : obj.items()) {
        bool ok = false;
        for (const std::string& k : allowed)
            if (item.key() == k) {
                ok = true;
                break;
            }
        if (!ok)
            throw ConfigError("unknown configuration key \"" + item.key() +
                              "\" in " + where);
    }
}

inline double require_number(const nlohmann::json& obj, const std::string& key,
                             const std::string& where) {
    if (!obj.contains(key))
        throw ConfigError("missing required key \"" + key + "\" in " + where);
    if (!obj[key].is_number())
        throw ConfigError("key \"" + key + "\" in " + where +
                          " must be a number");
    return obj[key].get<double>();
}

}  // namespace detail

inline RunConfig RunConfig::defaults() {
    RunConfig c;
    c.params = PhysicalParams::from_wavelength(5e-12, 100.0);
    c.grating = GratingConfig{9, 25e-9, 250e-9};
    c.derive_defaults();
    c.validate();
    return c;
}

inline RunConfig RunConfig::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("configuration root must be a JSON object");
    detail::reject_unknown_keys(j,
                                {"lambda_m", "v_z_mps", "n_slits",
                                 "slit_width_m", "pitch_m", "viscosity"},
                                "configuration root");
    RunConfig c;
    const double lambda = detail::require_number(j, "lambda_m", "configuration root");
    const double v_z = detail::require_number(j, "v_z_mps", "configuration root");
    const double n_slits = detail::require_number(j, "n_slits", "configuration root");
    const double slit_width =
        detail::require_number(j, "slit_width_m", "configuration root");
    const double pitch = detail::require_number(j, "pitch_m", "configuration root");
    if (!(n_slits >= 1.0) || n_slits != std::floor(n_slits))
        throw ConfigError("n_slits must be a positive integer");
    try {
        c.params = PhysicalParams::from_wavelength(lambda, v_z);
        c.grating =
            GratingConfig{static_cast<std::size_t>(n_slits), slit_width, pitch};
        c.grating.validate();
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    if (j.contains("viscosity")) {
        const nlohmann::json& v = j["viscosity"];
        if (!v.is_object()) throw ConfigError("\"viscosity\" must be an object");
        detail::reject_unknown_keys(
            v, {"waveform", "omega_rad_s", "phase_rad", "n_modes", "seed"},
            "viscosity");
        if (!v.contains("waveform") || !v["waveform"].is_string())
            throw ConfigError("viscosity needs a string \"waveform\"");
        const std::string wf = v["waveform"].get<std::string>();
        const double omega = detail::require_number(v, "omega_rad_s", "viscosity");
        try {
            if (wf == "sin") {
                double phase = 0.0;
                if (v.contains("phase_rad"))
                    phase = detail::require_number(v, "phase_rad", "viscosity");
                if (v.contains("n_modes") || v.contains("seed"))
                    throw ConfigError("n_modes/seed apply only to waveform \"multimode\"");
                c.viscosity = ViscosityModel::sine(c.params, omega, phase);
            } else if (wf == "multimode") {
                if (v.contains("phase_rad"))
                    throw ConfigError("phase_rad applies only to waveform \"sin\"");
                double n_modes = 4.0;
                if (v.contains("n_modes"))
                    n_modes = detail::require_number(v, "n_modes", "viscosity");
                if (!(n_modes >= 1.0) || n_modes != std::floor(n_modes))
                    throw ConfigError("n_modes must be a positive integer");
                double seed = 0.0;
                if (v.contains("seed"))
                    seed = detail::require_number(v, "seed", "viscosity");
                c.viscosity = ViscosityModel::multimode(
                    c.params, omega, static_cast<std::size_t>(n_modes),
                    static_cast<std::uint64_t>(seed));
            } else {
                throw ConfigError("unknown waveform \"" + wf + "\"");
            }
        } catch (const DomainError& e) {
            throw ConfigError(e.what());
        }
    }
    c.derive_defaults();
    c.validate();
    return c;
}

inline nlohmann::json RunConfig::to_json() const {
    nlohmann::json j;
    j["lambda_m"] = params.lambda;
    j["v_z_mps"] = params.v_z;
    j["n_slits"] = grating.n_slits;
    j["slit_width_m"] = grating.slit_width;
    j["pitch_m"] = grating.pitch;
    if (viscosity) {
        nlohmann::json v;
        v["omega_rad_s"] = viscosity->omega;
        if (viscosity->waveform == ViscosityModel::Waveform::sine) {
            v["waveform"] = "sin";
            v["phase_rad"] = viscosity->phase;
        } else {
            v["waveform"] = "multimode";
            v["n_modes"] = viscosity->mode_amp.size();
            v["seed"] = viscosity->seed;
        }
        j["viscosity"] = v;
    }
    j["derived"] = {{"mass_kg", params.mass},
                    {"talbot_length_m", talbot()},
                    {"hbar_Js", params.hbar}};
    j["grid"] = {{"x_min_m", grid.x_min}, {"x_max_m", grid.x_max},
                 {"nx", grid.nx},         {"z_min_m", grid.z_min},
                 {"z_max_m", grid.z_max}, {"nz", grid.nz}};
    j["ensemble"] = {
        {"n_trajectories", ensemble.n_trajectories},
        {"seeding", ensemble.seeding == Seeding::uniform_across_slits
                        ? "uniform-across-slits"
                        : "per-slit-gaussian"},
        {"z_start_m", ensemble.z_start},
        {"z_end_m", ensemble.z_end},
        {"integrator",
         ensemble.integrator == Integrator::euler ? "euler" : "rk4"},
        {"dz_m", ensemble.dz},
        {"record_every", ensemble.record_every}};
    j["output"] = {{"gamma", gamma}, {"eps_rho", eps_rho}};
    return j;
}

}  // namespace qhd
