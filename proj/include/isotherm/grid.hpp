#pragma once

#include "isotherm/types.hpp"

#include <json.hpp>

#include <array>
#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace isotherm {

/// Uniform node grid: node i along axis a sits at origin[a] + i * spacing[a],
/// i = 0..extents[a] (extents counts cells, so there are extents + 1 nodes).
/// Flat storage is row-major over (x, y, z): the last axis varies fastest.
struct GridSpec {
    int dim = 2;
    std::array<double, 3> origin{0.0, 0.0, 0.0};
    std::array<double, 3> spacing{1.0, 1.0, 1.0};
    std::array<int, 3> extents{2, 2, 2};

    /// Box grid with equal spacing h covering [lo, hi] (rounded outward).
    static GridSpec covering(const Point& lo, const Point& hi, double h);

    void validate() const;

    int nodes(int axis) const { return axis < dim ? extents[static_cast<std::size_t>(axis)] + 1 : 1; }
    std::size_t node_count() const;
    double h() const { return spacing[0]; }
    double cell_volume() const;

    std::size_t stride(int axis) const;
    std::size_t flat(const std::array<int, 3>& idx) const;
    std::array<int, 3> unflatten(std::size_t flat_index) const;
    Point position(const std::array<int, 3>& idx) const;
    Point position(std::size_t flat_index) const { return position(unflatten(flat_index)); }
    Point lower() const;
    Point upper() const;
    bool contains(const Point& x, double slack = 0.0) const;
    bool on_box_boundary(const std::array<int, 3>& idx) const;

    bool operator==(const GridSpec& other) const;

    nlohmann::json to_json() const;
    static GridSpec from_json(const nlohmann::json& j);
};

/// Nodal scalar field on a grid.
struct GridField {
    GridSpec grid;
    std::vector<double> values;

    GridField() = default;
    GridField(GridSpec g, double fill) : grid(g), values(g.node_count(), fill) {}

    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }

    /// Multilinear interpolation; throws a geometry error outside the grid.
    double interpolate(const Point& x) const;
};

/// Writes `<stem>.bin` (raw little-endian float64, row-major) and
/// `<stem>.json` ({origin, spacing, extents, field_name, ...}).
void dump_field(const GridField& field, const std::string& field_name, const std::filesystem::path& stem);
GridField load_field(const std::filesystem::path& stem);

}  // namespace isotherm
