#include "isotherm/grid.hpp"

#include "isotherm/error.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace isotherm {

GridSpec GridSpec::covering(const Point& lo, const Point& hi, double h)
{
    if (lo.size() != hi.size() || lo.size() < 1 || lo.size() > 3) fail(ErrorKind::configuration, "covering: bad box");
    if (!(h > 0.0)) fail(ErrorKind::configuration, "covering: spacing must be > 0");
    GridSpec g;
    g.dim = static_cast<int>(lo.size());
    for (int a = 0; a < g.dim; ++a) {
        // Snap to multiples of h so grids with the same h share nodes.
        const double l = std::floor(lo[a] / h - 1e-9) * h;
        const double u = std::ceil(hi[a] / h + 1e-9) * h;
        g.origin[static_cast<std::size_t>(a)] = l;
        g.spacing[static_cast<std::size_t>(a)] = h;
        g.extents[static_cast<std::size_t>(a)] = std::max(2, static_cast<int>(std::lround((u - l) / h)));
    }
    return g;
}

void GridSpec::validate() const
{
    if (dim < 1 || dim > 3) fail(ErrorKind::configuration, "grid dim must be 1, 2 or 3");
    for (int a = 0; a < dim; ++a) {
        const auto i = static_cast<std::size_t>(a);
        if (!(spacing[i] > 0.0)) fail(ErrorKind::configuration, "grid spacing must be > 0");
        if (extents[i] < 2) fail(ErrorKind::configuration, "grid extents must be >= 2");
        if (!std::isfinite(origin[i])) fail(ErrorKind::configuration, "grid origin must be finite");
    }
}

std::size_t GridSpec::node_count() const
{
    std::size_t n = 1;
    for (int a = 0; a < dim; ++a) n *= static_cast<std::size_t>(nodes(a));
    return n;
}

double GridSpec::cell_volume() const
{
    double v = 1.0;
    for (int a = 0; a < dim; ++a) v *= spacing[static_cast<std::size_t>(a)];
    return v;
}

std::size_t GridSpec::stride(int axis) const
{
    std::size_t s = 1;
    for (int a = dim - 1; a > axis; --a) s *= static_cast<std::size_t>(nodes(a));
    return s;
}

std::size_t GridSpec::flat(const std::array<int, 3>& idx) const
{
    std::size_t f = 0;
    for (int a = 0; a < dim; ++a) f = f * static_cast<std::size_t>(nodes(a)) + static_cast<std::size_t>(idx[static_cast<std::size_t>(a)]);
    return f;
}

std::array<int, 3> GridSpec::unflatten(std::size_t flat_index) const
{
    std::array<int, 3> idx{0, 0, 0};
    for (int a = dim - 1; a >= 0; --a) {
        const auto n = static_cast<std::size_t>(nodes(a));
        idx[static_cast<std::size_t>(a)] = static_cast<int>(flat_index % n);
        flat_index /= n;
    }
    return idx;
}

Point GridSpec::position(const std::array<int, 3>& idx) const
{
    Point p(dim);
    for (int a = 0; a < dim; ++a) {
        const auto i = static_cast<std::size_t>(a);
        p[a] = origin[i] + idx[i] * spacing[i];
    }
    return p;
}

Point GridSpec::lower() const
{
    Point p(dim);
    for (int a = 0; a < dim; ++a) p[a] = origin[static_cast<std::size_t>(a)];
    return p;
}

Point GridSpec::upper() const
{
    Point p(dim);
    for (int a = 0; a < dim; ++a) {
        const auto i = static_cast<std::size_t>(a);
        p[a] = origin[i] + extents[i] * spacing[i];
    }
    return p;
}

bool GridSpec::contains(const Point& x, double slack) const
{
    if (x.size() != dim) return false;
    const Point lo = lower();
    const Point hi = upper();
    for (int a = 0; a < dim; ++a)
        if (x[a] < lo[a] - slack || x[a] > hi[a] + slack) return false;
    return true;
}

bool GridSpec::on_box_boundary(const std::array<int, 3>& idx) const
{
    for (int a = 0; a < dim; ++a) {
        const auto i = static_cast<std::size_t>(a);
        if (idx[i] == 0 || idx[i] == extents[i]) return true;
    }
    return false;
}

bool GridSpec::operator==(const GridSpec& other) const
{
    if (dim != other.dim) return false;
    for (int a = 0; a < dim; ++a) {
        const auto i = static_cast<std::size_t>(a);
        if (origin[i] != other.origin[i] || spacing[i] != other.spacing[i] || extents[i] != other.extents[i])
            return false;
    }
    return true;
}

nlohmann::json GridSpec::to_json() const
{
    nlohmann::json o = nlohmann::json::array(), s = nlohmann::json::array(), e = nlohmann::json::array();
    for (int a = 0; a < dim; ++a) {
        const auto i = static_cast<std::size_t>(a);
        o.push_back(origin[i]);
        s.push_back(spacing[i]);
        e.push_back(extents[i]);
    }
    return {{"origin", o}, {"spacing", s}, {"extents", e}};
}

GridSpec GridSpec::from_json(const nlohmann::json& j)
{
    GridSpec g;
    if (!j.is_object()) fail(ErrorKind::schema, "grid must be an object");
    for (const char* key : {"origin", "spacing", "extents"})
        if (!j.contains(key) || !j.at(key).is_array()) fail(ErrorKind::schema, std::string("grid.") + key + " must be an array");
    const auto& o = j.at("origin");
    g.dim = static_cast<int>(o.size());
    if (g.dim < 1 || g.dim > 3) fail(ErrorKind::schema, "grid.origin must have 1 to 3 entries");
    const auto& s = j.at("spacing");
    const auto& e = j.at("extents");
    if (e.size() != o.size()) fail(ErrorKind::schema, "grid.extents length must match grid.origin");
    if (s.size() != o.size() && s.size() != 1) fail(ErrorKind::schema, "grid.spacing length must match grid.origin");
    for (int a = 0; a < g.dim; ++a) {
        const auto i = static_cast<std::size_t>(a);
        g.origin[i] = o.at(i).get<double>();
        g.spacing[i] = s.size() == 1 ? s.at(0).get<double>() : s.at(i).get<double>();
        g.extents[i] = e.at(i).get<int>();
    }
    g.validate();
    return g;
}

double GridField::interpolate(const Point& x) const
{
    const GridSpec& g = grid;
    if (!g.contains(x, 1e-12 * g.h())) fail(ErrorKind::geometry, "interpolation point outside grid");
    std::array<int, 3> base{0, 0, 0};
    std::array<double, 3> frac{0.0, 0.0, 0.0};
    for (int a = 0; a < g.dim; ++a) {
        const auto i = static_cast<std::size_t>(a);
        double s = (x[a] - g.origin[i]) / g.spacing[i];
        int k = static_cast<int>(std::floor(s));
        k = std::clamp(k, 0, g.extents[i] - 1);
        base[i] = k;
        frac[i] = std::clamp(s - k, 0.0, 1.0);
    }
    double sum = 0.0;
    const int corners = 1 << g.dim;
    for (int c = 0; c < corners; ++c) {
        double w = 1.0;
        std::array<int, 3> idx = base;
        for (int a = 0; a < g.dim; ++a) {
            const auto i = static_cast<std::size_t>(a);
            if (c & (1 << a)) {
                idx[i] += 1;
                w *= frac[i];
            } else {
                w *= 1.0 - frac[i];
            }
        }
        if (w != 0.0) sum += w * values[g.flat(idx)];
    }
    return sum;
}

void dump_field(const GridField& field, const std::string& field_name, const std::filesystem::path& stem)
{
    auto bin = stem;
    bin += ".bin";
    auto meta = stem;
    meta += ".json";
    if (!stem.parent_path().empty()) std::filesystem::create_directories(stem.parent_path());
    std::ofstream out(bin, std::ios::binary);
    if (!out) fail(ErrorKind::io, "cannot write " + bin.string());
    static_assert(sizeof(double) == 8);
    for (double v : field.values) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        unsigned char bytes[8];
        for (int k = 0; k < 8; ++k) bytes[k] = static_cast<unsigned char>(bits >> (8 * k));
        out.write(reinterpret_cast<const char*>(bytes), 8);
    }
    nlohmann::json header = field.grid.to_json();
    header["field_name"] = field_name;
    header["dtype"] = "float64";
    header["byte_order"] = "little";
    header["layout"] = "row-major, last axis fastest";
    std::ofstream m(meta);
    if (!m) fail(ErrorKind::io, "cannot write " + meta.string());
    m << header.dump(2) << '\n';
}

GridField load_field(const std::filesystem::path& stem)
{
    auto bin = stem;
    bin += ".bin";
    auto meta = stem;
    meta += ".json";
    std::ifstream m(meta);
    if (!m) fail(ErrorKind::io, "cannot read " + meta.string());
    nlohmann::json header = nlohmann::json::parse(m);
    GridField f(GridSpec::from_json(header), 0.0);
    std::ifstream in(bin, std::ios::binary);
    if (!in) fail(ErrorKind::io, "cannot read " + bin.string());
    for (double& v : f.values) {
        unsigned char bytes[8];
        if (!in.read(reinterpret_cast<char*>(bytes), 8)) fail(ErrorKind::io, "truncated " + bin.string());
        std::uint64_t bits = 0;
        for (int k = 0; k < 8; ++k) bits |= static_cast<std::uint64_t>(bytes[k]) << (8 * k);
        std::memcpy(&v, &bits, 8);
    }
    return f;
}

}  // namespace isotherm
