#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qhd/config.hpp"
#include "qhd/io.hpp"
#include "qhd/madelung.hpp"
#include "qhd/oracle.hpp"
#include "qhd/trajectories.hpp"
#include "qhd/uncertainty.hpp"
#include "qhd/verify.hpp"
#include "qhd/wavefield.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir = "out";
    bool quick = false;
    std::vector<std::string> formats;  // subset of csv, pgm, json; empty = all

    std::optional<double> lambda, vz, slit_width, pitch;
    std::optional<std::size_t> n_slits;
    std::optional<double> x_min, x_max, z_min, z_max;
    std::optional<std::size_t> nx, nz;
    std::optional<std::size_t> n_traj, record_every;
    std::optional<double> dz, z_start, z_end;
    std::optional<std::string> seeding, integrator;
    std::optional<double> gamma, eps_rho;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--config", o.config_path, "JSON configuration file");
    cmd->add_option("--out", o.out_dir, "output directory (default: out)");
    cmd->add_flag("--quick", o.quick, "reduced-scale grids and ensembles");
    cmd->add_option("--format", o.formats,
                    "artifact formats to write: csv, pgm, json (repeatable; default all)")
        ->check(CLI::IsMember({"csv", "pgm", "json"}));

    cmd->add_option("--lambda", o.lambda, "de Broglie wavelength (m)");
    cmd->add_option("--vz", o.vz, "longitudinal speed (m/s)");
    cmd->add_option("--n-slits", o.n_slits, "number of slits");
    cmd->add_option("--slit-width", o.slit_width, "slit Gaussian width b (m)");
    cmd->add_option("--pitch", o.pitch, "slit pitch d (m)");

    cmd->add_option("--x-min", o.x_min, "grid x minimum (m)");
    cmd->add_option("--x-max", o.x_max, "grid x maximum (m)");
    cmd->add_option("--z-min", o.z_min, "grid z minimum (m)");
    cmd->add_option("--z-max", o.z_max, "grid z maximum (m)");
    cmd->add_option("--nx", o.nx, "grid nodes along x");
    cmd->add_option("--nz", o.nz, "grid nodes along z");

    cmd->add_option("--n-traj", o.n_traj, "trajectories in the ensemble");
    cmd->add_option("--seeding", o.seeding,
                    "seed rule: uniform-across-slits | per-slit-gaussian")
        ->check(CLI::IsMember({"uniform-across-slits", "per-slit-gaussian"}));
    cmd->add_option("--integrator", o.integrator, "euler | rk4")
        ->check(CLI::IsMember({"euler", "rk4"}));
    cmd->add_option("--dz", o.dz, "integration step (m)");
    cmd->add_option("--z-start", o.z_start, "trajectory start z (m)");
    cmd->add_option("--z-end", o.z_end, "trajectory end z (m)");
    cmd->add_option("--record-every", o.record_every,
                    "record every k-th integration step");

    cmd->add_option("--gamma", o.gamma, "PGM intensity exponent");
    cmd->add_option("--eps-rho", o.eps_rho,
                    "relative density threshold for derived fields");
}

// File config (or built-in defaults), physics flags folded into the JSON so
// derived grid/ensemble defaults follow the final physics, then the
// remaining flags applied on top. Flags win over the file everywhere.
qhd::RunConfig build_config(const CommonOpts& o) {
    nlohmann::json j;
    if (!o.config_path.empty()) {
        std::ifstream in(o.config_path);
        if (!in) throw qhd::ConfigError("cannot open config file: " + o.config_path);
        try {
            in >> j;
        } catch (const nlohmann::json::parse_error& e) {
            throw qhd::ConfigError(std::string("config parse error: ") + e.what());
        }
    } else {
        j = {{"lambda_m", 5e-12},
             {"v_z_mps", 100.0},
             {"n_slits", 9},
             {"slit_width_m", 25e-9},
             {"pitch_m", 250e-9}};
    }
    if (o.lambda) j["lambda_m"] = *o.lambda;
    if (o.vz) j["v_z_mps"] = *o.vz;
    if (o.n_slits) j["n_slits"] = *o.n_slits;
    if (o.slit_width) j["slit_width_m"] = *o.slit_width;
    if (o.pitch) j["pitch_m"] = *o.pitch;

    qhd::RunConfig cfg = qhd::RunConfig::from_json(j);

    if (o.x_min) cfg.grid.x_min = *o.x_min;
    if (o.x_max) cfg.grid.x_max = *o.x_max;
    if (o.z_min) cfg.grid.z_min = *o.z_min;
    if (o.z_max) cfg.grid.z_max = *o.z_max;
    if (o.nx) cfg.grid.nx = *o.nx;
    if (o.nz) cfg.grid.nz = *o.nz;

    if (o.n_traj) cfg.ensemble.n_trajectories = *o.n_traj;
    if (o.seeding)
        cfg.ensemble.seeding = (*o.seeding == "per-slit-gaussian")
                                   ? qhd::Seeding::per_slit_gaussian
                                   : qhd::Seeding::uniform_across_slits;
    if (o.integrator)
        cfg.ensemble.integrator = (*o.integrator == "euler")
                                      ? qhd::Integrator::euler
                                      : qhd::Integrator::rk4;
    if (o.dz) cfg.ensemble.dz = *o.dz;
    if (o.z_start) cfg.ensemble.z_start = *o.z_start;
    if (o.z_end) cfg.ensemble.z_end = *o.z_end;
    if (o.record_every) cfg.ensemble.record_every = *o.record_every;

    if (o.gamma) cfg.gamma = *o.gamma;
    if (o.eps_rho) cfg.eps_rho = *o.eps_rho;

    if (o.quick) {
        cfg.grid.nx = std::min<std::size_t>(cfg.grid.nx, 600);
        cfg.grid.nz = std::min<std::size_t>(cfg.grid.nz, 200);
        cfg.ensemble.n_trajectories =
            std::min<std::size_t>(cfg.ensemble.n_trajectories, 40);
        cfg.ensemble.dz = std::max(
            cfg.ensemble.dz,
            (cfg.ensemble.z_end - cfg.ensemble.z_start) / 3000.0);
    }
    try {
        cfg.validate();
    } catch (const qhd::Error& e) {
        throw qhd::ConfigError(e.what());
    }
    return cfg;
}

bool format_enabled(const CommonOpts& o, const std::string& fmt) {
    if (o.formats.empty()) return true;
    return std::find(o.formats.begin(), o.formats.end(), fmt) != o.formats.end();
}

// Writes the selected artifacts plus a manifest with checksums and stamps.
void emit(const CommonOpts& o, const std::string& command,
          const std::map<std::string, std::pair<std::string, std::string>>& files,
          const nlohmann::json& stamps, const qhd::RunConfig& cfg,
          double seconds) {
    namespace fs = std::filesystem;
    fs::create_directories(o.out_dir);
    nlohmann::json manifest;
    manifest["command"] = command;
    manifest["seconds"] = seconds;
    manifest["config"] = cfg.to_json();
    manifest["quick"] = o.quick;
    manifest["stamps"] = stamps;
    nlohmann::json flist = nlohmann::json::array();
    for (const auto& [name, fmt_content] : files) {
        const auto& [fmt, content] = fmt_content;
        if (!format_enabled(o, fmt)) continue;
        const fs::path path = fs::path(o.out_dir) / name;
        qhd::io::atomic_write(path, content);
        flist.push_back({{"path", name},
                         {"bytes", content.size()},
                         {"fnv1a64", qhd::io::hex64(qhd::io::fnv1a64(content))}});
        std::printf("wrote %s (%zu bytes)\n", path.c_str(), content.size());
    }
    manifest["files"] = flist;
    const fs::path mpath = fs::path(o.out_dir) / "manifest.json";
    qhd::io::atomic_write(mpath, manifest.dump(2) + "\n");
    std::printf("wrote %s\n", mpath.c_str());
}

double elapsed_since(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
}

int cmd_carpet(const CommonOpts& o) {
    const auto t0 = std::chrono::steady_clock::now();
    const qhd::RunConfig cfg = build_config(o);
    const qhd::ComplexField field =
        qhd::evaluate_field(cfg.grid, cfg.params, cfg.grating);

    // Structural stamps: z=0 maxima and left-right density symmetry.
    std::vector<double> peak_x;
    for (std::size_t i = 1; i + 1 < cfg.grid.nx; ++i) {
        const double r = std::norm(field.at(i, 0));
        if (r > std::norm(field.at(i - 1, 0)) && r > std::norm(field.at(i + 1, 0)))
            peak_x.push_back(cfg.grid.x(i));
    }
    double rho_peak = 0.0;
    for (const auto& c : field.psi) rho_peak = std::max(rho_peak, std::norm(c));
    double asym = 0.0;
    for (std::size_t i = 0; i < cfg.grid.nx / 2; ++i)
        for (std::size_t j = 0; j < cfg.grid.nz; ++j)
            asym = std::max(asym, std::abs(std::norm(field.at(i, j)) -
                                           std::norm(field.at(cfg.grid.nx - 1 - i, j))) /
                                      rho_peak);
    nlohmann::json stamps = {{"z0_peak_count", peak_x.size()},
                             {"z0_peak_x_m", peak_x},
                             {"mirror_asymmetry_rel_peak", asym},
                             {"rho_peak", rho_peak},
                             {"pgm_gamma", cfg.gamma}};

    std::map<std::string, std::pair<std::string, std::string>> files;
    files["carpet.pgm"] = {"pgm", qhd::io::density_pgm(field, cfg.gamma)};
    files["carpet.csv"] = {"csv", qhd::io::field_csv(field)};
    emit(o, "carpet", files, stamps, cfg, elapsed_since(t0));
    return 0;
}

int cmd_trajectories(const CommonOpts& o) {
    const auto t0 = std::chrono::steady_clock::now();
    const qhd::RunConfig cfg = build_config(o);
    const std::vector<qhd::Trajectory> ens =
        qhd::integrate_ensemble(cfg.ensemble, cfg.params, cfg.grating);

    std::size_t n_failed = 0;
    std::size_t min_len = ens.front().points.size();
    for (const auto& tr : ens) {
        if (tr.failed) ++n_failed;
        min_len = std::min(min_len, tr.points.size());
    }
    std::size_t crossings = 0;
    for (std::size_t k = 0; k < min_len; ++k)
        for (std::size_t i = 0; i + 1 < ens.size(); ++i)
            if (!(ens[i].points[k].x < ens[i + 1].points[k].x)) ++crossings;

    // Integrator cross-check: same seeds under the other scheme.
    qhd::EnsembleConfig other = cfg.ensemble;
    other.integrator = cfg.ensemble.integrator == qhd::Integrator::rk4
                           ? qhd::Integrator::euler
                           : qhd::Integrator::rk4;
    const std::vector<qhd::Trajectory> alt =
        qhd::integrate_ensemble(other, cfg.params, cfg.grating);
    double divergence = 0.0;
    for (std::size_t i = 0; i < ens.size(); ++i)
        if (!ens[i].failed && !alt[i].failed)
            divergence = std::max(divergence,
                                  std::abs(ens[i].points.back().x -
                                           alt[i].points.back().x));

    nlohmann::json stamps = {
        {"n_trajectories", ens.size()},
        {"n_failed", n_failed},
        {"non_crossing_violations", crossings},
        {"euler_vs_rk4_max_endpoint_divergence_m", divergence}};

    std::map<std::string, std::pair<std::string, std::string>> files;
    files["trajectories.csv"] = {"csv", qhd::io::trajectories_csv(ens)};
    emit(o, "trajectories", files, stamps, cfg, elapsed_since(t0));
    return 0;
}

int cmd_fields(const CommonOpts& o, const std::vector<std::string>& quants) {
    const auto t0 = std::chrono::steady_clock::now();
    const qhd::RunConfig cfg = build_config(o);
    const qhd::ComplexField field =
        qhd::evaluate_field(cfg.grid, cfg.params, cfg.grating);
    const qhd::MadelungFields m = qhd::decompose(field, cfg.eps_rho);

    qhd::BoolGrid all(cfg.grid, 1);
    qhd::BoolGrid raw(cfg.grid, 0);
    for (std::size_t n = 0; n < raw.v.size(); ++n)
        raw.v[n] = m.rho.v[n] >= m.eps_rho * m.rho_max;

    std::vector<std::string> selected = quants;
    if (selected.empty())
        selected = {"rho", "S", "vx", "ux", "Q", "P1", "P2"};

    std::map<std::string, std::pair<std::string, std::string>> files;
    for (const std::string& q : selected) {
        const qhd::RealGrid* values = nullptr;
        const qhd::BoolGrid* valid = &m.mask;
        if (q == "rho") {
            values = &m.rho;
            valid = &all;
        } else if (q == "S") {
            values = &m.S;
            valid = &raw;
        } else if (q == "vx") {
            values = &m.v_x;
        } else if (q == "ux") {
            values = &m.u_x;
        } else if (q == "Q") {
            values = &m.Q;
        } else if (q == "P1") {
            values = &m.P1;
        } else if (q == "P2") {
            values = &m.P2;
        } else {
            throw qhd::ConfigError("unknown field quantity \"" + q + "\"");
        }
        files["field_" + q + ".csv"] = {
            "csv", qhd::io::masked_csv(cfg.grid, {*values, *valid}, q)};
    }

    // Route-equivalence stamps on this grid.
    const qhd::MaskedGrid q_rho =
        qhd::quantum_potential_from_rho(m.rho, raw, cfg.params);
    double q_agree = 0.0, p_ident = 0.0, q_scale = 0.0;
    for (std::size_t n = 0; n < m.Q.v.size(); ++n)
        if (m.mask.v[n]) q_scale = std::max(q_scale, std::abs(m.Q.v[n]));
    for (std::size_t n = 0; n < m.Q.v.size(); ++n) {
        if (!(m.mask.v[n] && q_rho.valid.v[n])) continue;
        const double den = std::max(
            {std::abs(m.Q.v[n]), std::abs(q_rho.values.v[n]), 1e-3 * q_scale});
        q_agree = std::max(q_agree, std::abs(m.Q.v[n] - q_rho.values.v[n]) / den);
        const double ident = (m.P1.v[n] + m.P2.v[n]) / m.rho.v[n];
        p_ident = std::max(p_ident, std::abs(ident - m.Q.v[n]) / den);
    }
    nlohmann::json stamps = {{"quantities", selected},
                             {"q_route_agreement_rel", q_agree},
                             {"pressure_identity_rel", p_ident},
                             {"eps_rho", cfg.eps_rho},
                             {"rho_max", m.rho_max}};
    emit(o, "fields", files, stamps, cfg, elapsed_since(t0));
    return 0;
}

int cmd_uncertainty(const CommonOpts& o, bool transverse_only) {
    const auto t0 = std::chrono::steady_clock::now();
    const qhd::RunConfig cfg = build_config(o);
    const qhd::ReVarScan scan = qhd::scan_re_var(
        cfg.grid, cfg.params, cfg.grating, 1e-6, !transverse_only);

    qhd::EnsembleConfig pc = cfg.ensemble;
    pc.record_every = 1;
    const double d = cfg.grating.pitch;
    const qhd::Trajectory ta =
        qhd::integrate_one(0.24 * d, pc, cfg.params, cfg.grating);
    const qhd::Trajectory tb =
        qhd::integrate_one(0.26 * d, pc, cfg.params, cfg.grating);
    const qhd::PairwiseReport pw = qhd::pairwise_uncertainty(ta, tb, cfg.params);

    nlohmann::json stamps = {
        {"longitudinal_included", !transverse_only},
        {"scan_nodes_checked", scan.n_checked},
        {"scan_violations", scan.n_violations},
        {"min_re_var_J", scan.min_re_var},
        {"pair_seeds_m", {ta.seed_x0, tb.seed_x0}},
        {"pair_n_determinate", pw.n_determinate},
        {"pair_n_indeterminate", pw.n_indeterminate},
        {"pair_fraction_satisfied", pw.fraction_satisfied}};

    std::map<std::string, std::pair<std::string, std::string>> files;
    files["re_var.csv"] = {"csv", qhd::io::re_var_csv(scan.records)};
    files["pairwise.csv"] = {"csv", qhd::io::pairwise_csv(pw)};
    files["uncertainty.json"] = {"json", stamps.dump(2) + "\n"};
    emit(o, "uncertainty", files, stamps, cfg, elapsed_since(t0));
    return 0;
}

int cmd_verify(const CommonOpts& o, double tol_scale, std::string report_path) {
    const qhd::RunConfig cfg = build_config(o);
    const qhd::verify::Report rep =
        qhd::verify::run_verification(cfg, o.quick, tol_scale);
    for (const qhd::verify::Check& c : rep.checks)
        std::printf("[%s] %d %-28s measured=%.3e tolerance=%.3e\n",
                    c.passed ? "PASS" : "FAIL", c.criterion, c.name.c_str(),
                    c.measured, c.tolerance);
    std::printf("%s: %zu checks in %.1f s\n",
                rep.all_passed ? "VERIFY PASSED" : "VERIFY FAILED",
                rep.checks.size(), rep.seconds);

    namespace fs = std::filesystem;
    fs::create_directories(o.out_dir);
    if (report_path.empty())
        report_path = (fs::path(o.out_dir) / "verify_report.json").string();
    if (format_enabled(o, "json")) {
        qhd::io::atomic_write(report_path,
                              qhd::verify::report_json(rep, cfg, o.quick, tol_scale)
                                      .dump(2) +
                                  "\n");
        std::printf("wrote %s\n", report_path.c_str());
    }
    return rep.all_passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"near-field matter-wave interference toolkit"};
    app.require_subcommand(1);

    CommonOpts o_carpet, o_traj, o_fields, o_unc, o_verify;
    std::vector<std::string> quantities;
    bool transverse_only = false;
    double tol_scale = 1.0;
    std::string report_path;

    CLI::App* c_carpet = app.add_subcommand("carpet", "density carpet image + CSV");
    add_common(c_carpet, o_carpet);
    CLI::App* c_traj = app.add_subcommand("trajectories", "trajectory ensemble CSV");
    add_common(c_traj, o_traj);
    CLI::App* c_fields =
        app.add_subcommand("fields", "hydrodynamic field CSVs");
    add_common(c_fields, o_fields);
    c_fields->add_option("--quantity", quantities,
                         "rho, S, vx, ux, Q, P1, P2 (repeatable; default all)")
        ->check(CLI::IsMember({"rho", "S", "vx", "ux", "Q", "P1", "P2"}));
    CLI::App* c_unc =
        app.add_subcommand("uncertainty", "grid scan + pairwise trajectory bounds");
    add_common(c_unc, o_unc);
    c_unc->add_flag("--transverse-only", transverse_only,
                    "drop the longitudinal momentum from E");
    CLI::App* c_verify = app.add_subcommand("verify", "run the verification suite");
    add_common(c_verify, o_verify);
    c_verify->add_option("--tolerance-scale", tol_scale,
                         "multiply all tolerances (demonstration/debug only)");
    c_verify->add_option("--report", report_path, "verification report path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (c_carpet->parsed()) return cmd_carpet(o_carpet);
        if (c_traj->parsed()) return cmd_trajectories(o_traj);
        if (c_fields->parsed()) return cmd_fields(o_fields, quantities);
        if (c_unc->parsed()) return cmd_uncertainty(o_unc, transverse_only);
        if (c_verify->parsed()) return cmd_verify(o_verify, tol_scale, report_path);
    } catch (const qhd::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const qhd::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
