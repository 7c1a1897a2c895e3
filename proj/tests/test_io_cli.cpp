#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include <json.hpp>

#include "qhd/config.hpp"
#include "qhd/io.hpp"
#include "qhd/oracle.hpp"

using namespace qhd;
namespace fs = std::filesystem;

namespace {

const PhysicalParams params = PhysicalParams::from_wavelength(5e-12, 100.0);
const GratingConfig single1{1, 25e-9, 250e-9};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::path("qhd_test_scratch") / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

#define QHD_STR2(x) #x
#define QHD_STR(x) QHD_STR2(x)

int run_cli(const std::string& args) {
    const std::string cmd = std::string("\"") + QHD_STR(QHD_CLI_PATH) + "\" " +
                            args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    REQUIRE(rc != -1);
    return WEXITSTATUS(rc);
}

}  // namespace

TEST_CASE("seventeen significant digits round-trip any double") {
    for (double v : {0.0, -0.0, 1.0 / 3.0, 6.62607015e-34, 1e308, -2.5e-8,
                     0.025, 3.141592653589793, -1.3252140291880161e-24}) {
        const std::string s = io::fmt17(v);
        CHECK(std::strtod(s.c_str(), nullptr) == v);
    }
}

TEST_CASE("checksum reference vectors") {
    CHECK(io::fnv1a64("") == 0xcbf29ce484222325ull);
    CHECK(io::fnv1a64("a") == 0xaf63dc4c8601ec8cull);
    CHECK(io::fnv1a64("hello") == 0xa430d84680aabd0bull);
    CHECK(io::hex64(0) == "0000000000000000");
    CHECK(io::hex64(0xcbf29ce484222325ull) == "cbf29ce484222325");
}

TEST_CASE("atomic writes replace, never append, and leave no droppings") {
    const fs::path dir = scratch("atomic");
    const fs::path f = dir / "data.txt";
    io::atomic_write(f, "first\n");
    CHECK(slurp(f) == "first\n");
    io::atomic_write(f, "x");
    CHECK(slurp(f) == "x");
    CHECK_FALSE(fs::exists(dir / "data.txt.tmp"));
    CHECK_THROWS_AS(io::atomic_write(dir / "no_such_dir" / "f", "x"), Error);
}

TEST_CASE("field csv layout") {
    const GridSpec spec{-1e-7, 1e-7, 3, 0.0, 1e-3, 2};
    const ComplexField f = evaluate_field(spec, params, single1);
    const std::string csv = io::field_csv(f);
    CHECK(csv.substr(0, 19) == "x_m,z_m,re,im,rho\n-");
    std::size_t lines = 0;
    for (char c : csv)
        if (c == '\n') ++lines;
    CHECK(lines == 1 + 3 * 2);
    // x-major: the first data row is the (x_min, z_min) node.
    const std::string first = csv.substr(18, csv.find('\n', 18) - 18);
    CHECK(first.substr(0, 6) == "-1e-07");
}

TEST_CASE("masked csv keeps rows for masked-out nodes") {
    const GridSpec spec{0.0, 1.0, 2, 0.0, 1.0, 2};
    MaskedGrid mg{RealGrid(spec, 7.5), BoolGrid(spec, 1)};
    mg.valid.at(1, 0) = 0;
    const std::string csv = io::masked_csv(spec, mg, "val");
    CHECK(csv == "x_m,z_m,val\n"
                 "0,0,7.5\n"
                 "0,1,7.5\n"
                 "1,0,\n"
                 "1,1,7.5\n");
}

TEST_CASE("trajectory csv layout") {
    Trajectory tr;
    tr.points.push_back({0.0, 1e-8, 0.0, 0.5, 0.0, 0.0, 0.0});
    const std::string csv = io::trajectories_csv({tr, tr});
    CHECK(csv.find("traj_id,z_m,x_m,vx_mps,rho,Q_J,omega_q_per_s\n") == 0);
    CHECK(csv.find("0,0,1e-08,0,0.5,0,0\n") != std::string::npos);
    CHECK(csv.find("1,0,1e-08,0,0.5,0,0\n") != std::string::npos);
}

TEST_CASE("scan and pairwise csv layouts") {
    ReVarRecord r;
    r.x = 1.0;
    r.z = 2.0;
    r.violation = true;
    const std::string rc = io::re_var_csv({r});
    CHECK(rc == "x_m,z_m,E_J,omega_q,re_var_J,violation\n1,2,0,0,0,1\n");

    PairwiseReport rep;
    PairwisePoint det;
    det.z = 0.5;
    det.dEdt = 1.0;
    det.dpdr = 2.0;
    det.satisfied = true;
    PairwisePoint ind;
    ind.z = 1.5;
    ind.indeterminate = true;
    rep.points = {det, ind};
    const std::string pc = io::pairwise_csv(rep);
    CHECK(pc == "z_m,dE_J,domega,dEdt_Js,dpdr_Js,satisfied\n"
                "0.5,0,0,1,2,1\n"
                "1.5,0,0,,,\n");
}

TEST_CASE("density image format") {
    const GridSpec spec{-1e-7, 1e-7, 16, 0.0, 1e-3, 4};
    const ComplexField f = evaluate_field(spec, params, single1);
    const std::string pgm = io::density_pgm(f);
    const std::string header = "P5\n16 4\n65535\n";
    REQUIRE(pgm.substr(0, header.size()) == header);
    CHECK(pgm.size() == header.size() + 2 * 16 * 4);
    int peak = 0;
    for (std::size_t n = header.size(); n + 1 < pgm.size(); n += 2) {
        const int v = (static_cast<unsigned char>(pgm[n]) << 8) |
                      static_cast<unsigned char>(pgm[n + 1]);
        peak = std::max(peak, v);
    }
    CHECK(peak == 65535);
    CHECK_THROWS_AS(io::density_pgm(f, 0.0), DomainError);
    CHECK_THROWS_AS(io::density_pgm(f, -1.0), DomainError);
}

TEST_CASE("default run configuration") {
    const RunConfig c = RunConfig::defaults();
    CHECK(c.grating.n_slits == 9);
    CHECK(c.talbot() == Catch::Approx(0.025).epsilon(1e-15));
    CHECK(c.grid.x_min == -1.125e-6);
    CHECK(c.grid.x_max == 1.125e-6);
    CHECK(c.grid.nx == 1800);
    CHECK(c.grid.z_min == 0.0);
    CHECK(c.grid.z_max == Catch::Approx(0.15).epsilon(1e-15));
    CHECK(c.grid.nz == 600);
    CHECK(c.ensemble.n_trajectories == 100);
    CHECK(c.ensemble.integrator == Integrator::rk4);
    CHECK(c.ensemble.dz == Catch::Approx(1.25e-5).epsilon(1e-15));
    CHECK(c.ensemble.record_every == 20);
    CHECK(c.gamma == 0.5);
    CHECK(c.eps_rho == 1e-12);
    CHECK_FALSE(c.viscosity.has_value());
}

TEST_CASE("configuration parsing accepts exactly the physics schema") {
    using nlohmann::json;
    const json good = {{"lambda_m", 5e-12},
                       {"v_z_mps", 100.0},
                       {"n_slits", 5},
                       {"slit_width_m", 25e-9},
                       {"pitch_m", 250e-9}};
    const RunConfig c = RunConfig::from_json(good);
    CHECK(c.grating.n_slits == 5);
    CHECK(c.params.lambda == 5e-12);
    CHECK(c.grid.nx == 1800);

    json j = good;
    j["frequency_hz"] = 42.0;
    CHECK_THROWS_AS(RunConfig::from_json(j), ConfigError);

    j = good;
    j.erase("pitch_m");
    CHECK_THROWS_AS(RunConfig::from_json(j), ConfigError);

    j = good;
    j["n_slits"] = 2.5;
    CHECK_THROWS_AS(RunConfig::from_json(j), ConfigError);

    j = good;
    j["n_slits"] = "9";
    CHECK_THROWS_AS(RunConfig::from_json(j), ConfigError);

    j = good;
    j["pitch_m"] = 10e-9;  // narrower than the slit width
    CHECK_THROWS_AS(RunConfig::from_json(j), ConfigError);

    j = good;
    j["v_z_mps"] = -100.0;
    CHECK_THROWS_AS(RunConfig::from_json(j), ConfigError);

    CHECK_THROWS_AS(RunConfig::from_json(json::array()), ConfigError);
}

TEST_CASE("viscosity configuration block") {
    using nlohmann::json;
    json j = {{"lambda_m", 5e-12},   {"v_z_mps", 100.0},
              {"n_slits", 9},        {"slit_width_m", 25e-9},
              {"pitch_m", 250e-9},   {"viscosity",
                                      {{"waveform", "sin"},
                                       {"omega_rad_s", 6283.185307179586},
                                       {"phase_rad", 0.5}}}};
    const RunConfig c = RunConfig::from_json(j);
    REQUIRE(c.viscosity.has_value());
    CHECK(c.viscosity->waveform == ViscosityModel::Waveform::sine);
    CHECK(c.viscosity->phase == 0.5);
    CHECK(c.viscosity->amplitude ==
          Catch::Approx(params.hbar / (2.0 * params.mass)).epsilon(1e-15));

    j["viscosity"] = {{"waveform", "multimode"}, {"omega_rad_s", 1e4}};
    const RunConfig cm = RunConfig::from_json(j);
    REQUIRE(cm.viscosity.has_value());
    CHECK(cm.viscosity->mode_amp.size() == 4);
    const RunConfig cm2 = RunConfig::from_json(j);
    CHECK(cm2.viscosity->mode_amp == cm.viscosity->mode_amp);

    j["viscosity"] = {{"waveform", "triangle"}, {"omega_rad_s", 1e4}};
    CHECK_THROWS_AS(RunConfig::from_json(j), ConfigError);
    j["viscosity"] = {{"waveform", "multimode"},
                      {"omega_rad_s", 1e4},
                      {"phase_rad", 0.1}};
    CHECK_THROWS_AS(RunConfig::from_json(j), ConfigError);
    j["viscosity"] = {{"waveform", "sin"}, {"omega_rad_s", 1e4}, {"seed", 3}};
    CHECK_THROWS_AS(RunConfig::from_json(j), ConfigError);
    j["viscosity"] = {{"waveform", "sin"},
                      {"omega_rad_s", 1e4},
                      {"colour", "blue"}};
    CHECK_THROWS_AS(RunConfig::from_json(j), ConfigError);
    j["viscosity"] = "sin";
    CHECK_THROWS_AS(RunConfig::from_json(j), ConfigError);
}

TEST_CASE("configuration echo for the manifest") {
    const RunConfig c = RunConfig::defaults();
    const nlohmann::json j = c.to_json();
    CHECK(j["n_slits"] == 9);
    CHECK(j["derived"]["talbot_length_m"].get<double>() ==
          Catch::Approx(0.025).epsilon(1e-15));
    CHECK(j["grid"]["nx"] == 1800);
    CHECK(j["ensemble"]["integrator"] == "rk4");
    CHECK(j["ensemble"]["seeding"] == "uniform-across-slits");
    CHECK(j["output"]["eps_rho"] == 1e-12);
    CHECK_FALSE(j.contains("viscosity"));
}

TEST_CASE("cli: help and argument errors") {
    CHECK(run_cli("--help") == 0);
    CHECK(run_cli("carpet --help") == 0);
    CHECK(run_cli("frobnicate") == 2);
    CHECK(run_cli("") == 2);  // a subcommand is required
    CHECK(run_cli("carpet --format webp") == 2);
}

TEST_CASE("cli: carpet artifacts are complete, checksummed and reproducible") {
    const fs::path d1 = scratch("carpet1");
    const fs::path d2 = scratch("carpet2");
    REQUIRE(run_cli("carpet --quick --out " + d1.string()) == 0);
    REQUIRE(run_cli("carpet --quick --out " + d2.string()) == 0);

    for (const char* f : {"manifest.json", "carpet.pgm", "carpet.csv"})
        CHECK(fs::exists(d1 / f));

    const nlohmann::json manifest = nlohmann::json::parse(slurp(d1 / "manifest.json"));
    CHECK(manifest["command"] == "carpet");
    CHECK(manifest["quick"] == true);
    CHECK(manifest["config"]["n_slits"] == 9);
    CHECK(manifest["stamps"].contains("z0_peak_count"));
    REQUIRE(manifest["files"].is_array());
    REQUIRE(manifest["files"].size() == 2);
    for (const auto& entry : manifest["files"]) {
        const std::string content = slurp(d1 / entry["path"].get<std::string>());
        CHECK(entry["bytes"].get<std::size_t>() == content.size());
        CHECK(entry["fnv1a64"].get<std::string>() ==
              io::hex64(io::fnv1a64(content)));
    }

    CHECK(slurp(d1 / "carpet.csv") == slurp(d2 / "carpet.csv"));
    CHECK(slurp(d1 / "carpet.pgm") == slurp(d2 / "carpet.pgm"));
}

TEST_CASE("cli: config file routing and validation") {
    const fs::path dir = scratch("config");
    const fs::path good = dir / "good.json";
    const fs::path bad = dir / "bad.json";
    io::atomic_write(good, R"({"lambda_m":5e-12,"v_z_mps":100.0,"n_slits":5,
        "slit_width_m":2.5e-8,"pitch_m":2.5e-7,
        "viscosity":{"waveform":"sin","omega_rad_s":6283.185307179586}})");
    io::atomic_write(bad, R"({"lambda_m":5e-12,"v_z_mps":100.0,"n_slits":5,
        "slit_width_m":2.5e-8,"pitch_m":2.5e-7,"tilt_deg":3})");

    const fs::path out = dir / "out";
    REQUIRE(run_cli("trajectories --config " + good.string() + " --out " +
                    out.string() +
                    " --n-traj 6 --z-end 0.0125 --dz 2.5e-5 --record-every 100") == 0);
    CHECK(fs::exists(out / "trajectories.csv"));
    const nlohmann::json manifest =
        nlohmann::json::parse(slurp(out / "manifest.json"));
    CHECK(manifest["config"]["n_slits"] == 5);
    CHECK(manifest["config"]["viscosity"]["waveform"] == "sin");
    CHECK(manifest["stamps"]["non_crossing_violations"] == 0);

    CHECK(run_cli("carpet --config " + bad.string()) == 2);
    CHECK(run_cli("carpet --config " + (dir / "absent.json").string()) == 2);
}

TEST_CASE("cli: field exports honour the quantity selection") {
    const fs::path dir = scratch("fields");
    REQUIRE(run_cli("fields --quantity Q --quantity rho --nx 121 --nz 11 --out " +
                    dir.string()) == 0);
    CHECK(fs::exists(dir / "field_Q.csv"));
    CHECK(fs::exists(dir / "field_rho.csv"));
    CHECK_FALSE(fs::exists(dir / "field_S.csv"));
    const std::string q = slurp(dir / "field_Q.csv");
    CHECK(q.substr(0, 10) == "x_m,z_m,Q\n");
}

TEST_CASE("cli: uncertainty run reports the scan and the example pair") {
    const fs::path dir = scratch("uncertainty");
    REQUIRE(run_cli("uncertainty --quick --out " + dir.string()) == 0);
    CHECK(fs::exists(dir / "re_var.csv"));
    const std::string pw = slurp(dir / "pairwise.csv");
    CHECK(pw.substr(0, 42) == "z_m,dE_J,domega,dEdt_Js,dpdr_Js,satisfied\n");
    const nlohmann::json u =
        nlohmann::json::parse(slurp(dir / "uncertainty.json"));
    CHECK(u["longitudinal_included"] == true);
    CHECK(u["scan_violations"] == 0);
    // The exchange bound holds only partially for this interior pair; the
    // fraction is pinned as a regression band.
    const double frac = u["pair_fraction_satisfied"].get<double>();
    CHECK(frac > 0.25);
    CHECK(frac < 0.45);
}

TEST_CASE("cli: absurd tolerance scaling turns verification into failure") {
    const fs::path dir = scratch("verify_fail");
    CHECK(run_cli("verify --quick --tolerance-scale 1e-12 --out " +
                  dir.string()) == 1);
    CHECK(fs::exists(dir / "verify_report.json"));
    const nlohmann::json rep = nlohmann::json::parse(slurp(dir / "verify_report.json"));
    CHECK(rep["all_passed"] == false);
    CHECK(rep["tolerance_scale"] == 1e-12);
}
