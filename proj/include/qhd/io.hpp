#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "qhd/errors.hpp"
#include "qhd/grid.hpp"
#include "qhd/madelung.hpp"
#include "qhd/trajectories.hpp"
#include "qhd/uncertainty.hpp"

namespace qhd::io {

// Shortest round-trip decimal form of a double (up to 17 significant digits).
inline std::string fmt17(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, res.ptr};
}

// FNV-1a 64-bit checksum; stable across platforms by construction.
inline std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// Write via a temp file + rename so readers never observe a partial file.
inline void atomic_write(const std::filesystem::path& path,
                         std::string_view content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open for writing: " + tmp.string());
        out.write(content.data(),
                  static_cast<std::streamsize>(content.size()));
        if (!out) throw Error("write failed: " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw Error("rename failed: " + path.string() + ": " + ec.message());
}

// x_m,z_m,re,im,rho rows in x-major order.
inline std::string field_csv(const ComplexField& field) {
    std::string s = "x_m,z_m,re,im,rho\n";
    const GridSpec& sp = field.grid;
    for (std::size_t i = 0; i < sp.nx; ++i)
        for (std::size_t j = 0; j < sp.nz; ++j) {
            const Complex v = field.at(i, j);
            s += fmt17(sp.x(i));
            s += ',';
            s += fmt17(sp.z(j));
            s += ',';
            s += fmt17(v.real());
            s += ',';
            s += fmt17(v.imag());
            s += ',';
            s += fmt17(std::norm(v));
            s += '\n';
        }
    return s;
}

// x_m,z_m,<name> rows; masked-out nodes keep the row with an empty cell.
inline std::string masked_csv(const GridSpec& sp, const MaskedGrid& mg,
                              std::string_view name) {
    std::string s = "x_m,z_m,";
    s += name;
    s += '\n';
    for (std::size_t i = 0; i < sp.nx; ++i)
        for (std::size_t j = 0; j < sp.nz; ++j) {
            s += fmt17(sp.x(i));
            s += ',';
            s += fmt17(sp.z(j));
            s += ',';
            if (mg.valid.at(i, j)) s += fmt17(mg.values.at(i, j));
            s += '\n';
        }
    return s;
}

// traj_id,z_m,x_m,vx_mps,rho,Q_J,omega_q_per_s rows.
inline std::string trajectories_csv(const std::vector<Trajectory>& trs) {
    std::string s = "traj_id,z_m,x_m,vx_mps,rho,Q_J,omega_q_per_s\n";
    for (std::size_t id = 0; id < trs.size(); ++id)
        for (const TrajectoryPoint& pt : trs[id].points) {
            s += std::to_string(id);
            s += ',';
            s += fmt17(pt.z);
            s += ',';
            s += fmt17(pt.x);
            s += ',';
            s += fmt17(pt.v_x);
            s += ',';
            s += fmt17(pt.rho);
            s += ',';
            s += fmt17(pt.Q);
            s += ',';
            s += fmt17(pt.omega_q);
            s += '\n';
        }
    return s;
}

// x_m,z_m,E_J,omega_q,re_var_J,violation rows from a grid scan.
inline std::string re_var_csv(const std::vector<ReVarRecord>& records) {
    std::string s = "x_m,z_m,E_J,omega_q,re_var_J,violation\n";
    for (const ReVarRecord& r : records) {
        s += fmt17(r.x);
        s += ',';
        s += fmt17(r.z);
        s += ',';
        s += fmt17(r.E);
        s += ',';
        s += fmt17(r.omega_q);
        s += ',';
        s += fmt17(r.re_var);
        s += ',';
        s += r.violation ? '1' : '0';
        s += '\n';
    }
    return s;
}

// z_m,dE_J,domega,dEdt_Js,dpdr_Js,satisfied rows; indeterminate points keep
// the row with empty product cells.
inline std::string pairwise_csv(const PairwiseReport& rep) {
    std::string s = "z_m,dE_J,domega,dEdt_Js,dpdr_Js,satisfied\n";
    for (const PairwisePoint& q : rep.points) {
        s += fmt17(q.z);
        s += ',';
        s += fmt17(q.dE);
        s += ',';
        s += fmt17(q.domega);
        s += ',';
        if (!q.indeterminate) {
            s += fmt17(q.dEdt);
            s += ',';
            s += fmt17(q.dpdr);
            s += ',';
            s += q.satisfied ? '1' : '0';
        } else {
            s += ",,";
        }
        s += '\n';
    }
    return s;
}

// 16-bit binary PGM (big-endian per the format), one row per z slice,
// x left to right, intensity round(65535 * (rho/rho_max)^gamma).
inline std::string density_pgm(const ComplexField& field, double gamma = 0.5) {
    if (!(gamma > 0.0)) throw DomainError("density_pgm: need gamma > 0");
    const GridSpec& sp = field.grid;
    double rho_max = 0.0;
    for (const Complex& c : field.psi) rho_max = std::max(rho_max, std::norm(c));
    std::string s = "P5\n" + std::to_string(sp.nx) + " " +
                    std::to_string(sp.nz) + "\n65535\n";
    s.reserve(s.size() + 2 * sp.nx * sp.nz);
    for (std::size_t j = 0; j < sp.nz; ++j)
        for (std::size_t i = 0; i < sp.nx; ++i) {
            double v = 0.0;
            if (rho_max > 0.0) {
                v = std::norm(field.at(i, j)) / rho_max;
                v = std::pow(std::clamp(v, 0.0, 1.0), gamma);
            }
            const auto pix =
                static_cast<std::uint16_t>(std::lround(65535.0 * v));
            s += static_cast<char>(pix >> 8);
            s += static_cast<char>(pix & 0xff);
        }
    return s;
}

}  // namespace qhd::io
