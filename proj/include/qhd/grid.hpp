#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "qhd/errors.hpp"

namespace qhd {

// Rectangular grid: x transverse (fast-varying index is z), z longitudinal.
// Nodes are x_i = x_min + i*dx, z_j = z_min + j*dz, endpoints included.
struct GridSpec {
    double x_min = 0.0;
    double x_max = 0.0;
    std::size_t nx = 0;
    double z_min = 0.0;
    double z_max = 0.0;
    std::size_t nz = 0;

    void validate() const {
        if (nx < 2 || nz < 1)
            throw DomainError("GridSpec: need nx >= 2 and nz >= 1");
        if (!(x_max > x_min))
            throw DomainError("GridSpec: need x_max > x_min");
        if (!(z_min >= 0.0) || !(z_max >= z_min))
            throw DomainError("GridSpec: need z_max >= z_min >= 0");
        if (nz > 1 && !(z_max > z_min))
            throw DomainError("GridSpec: need z_max > z_min when nz > 1");
    }

    double dx() const { return (x_max - x_min) / static_cast<double>(nx - 1); }
    double dz() const {
        return nz > 1 ? (z_max - z_min) / static_cast<double>(nz - 1) : 0.0;
    }
    double x(std::size_t i) const { return x_min + static_cast<double>(i) * dx(); }
    double z(std::size_t j) const { return z_min + static_cast<double>(j) * dz(); }
    std::size_t size() const { return nx * nz; }

    bool operator==(const GridSpec&) const = default;
};

// Dense node values in x-major layout: v[i*nz + j] belongs to (x_i, z_j).
template <typename T>
struct Grid2D {
    GridSpec spec;
    std::vector<T> v;

    Grid2D() = default;
    explicit Grid2D(const GridSpec& s, T fill = T{}) : spec(s), v(s.size(), fill) {
        spec.validate();
    }

    T& at(std::size_t i, std::size_t j) { return v[i * spec.nz + j]; }
    const T& at(std::size_t i, std::size_t j) const { return v[i * spec.nz + j]; }
};

using RealGrid = Grid2D<double>;
using BoolGrid = Grid2D<std::uint8_t>;

}  // namespace qhd
