#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <system_error>
#include <vector>

#include "euler2d/errors.hpp"
#include "euler2d/vec2.hpp"

namespace euler2d {

/// Locale-independent shortest formatting that round-trips the exact double.
inline std::string fmt_double(double v) {
    std::array<char, 40> buf{};
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

inline double parse_double(const std::string& s) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc())
        throw DataError("parse_double: cannot parse '" + s + "'");
    return v;
}

/// Uniform node-sampled rectangular grid. Node (i,j) sits at
/// origin + (i dx, j dy); every node carries quadrature weight dx*dy
/// (midpoint rule with the node at the cell center).
struct GridSpec {
    Vec2 origin{0.0, 0.0};
    Vec2 spacing{1.0, 1.0};
    int nx = 0;
    int ny = 0;

    std::size_t size() const { return static_cast<std::size_t>(nx) * ny; }
    double cell_area() const { return spacing.x * spacing.y; }
    Vec2 node(int i, int j) const {
        return {origin.x + spacing.x * i, origin.y + spacing.y * j};
    }
    std::size_t index(int i, int j) const {
        return static_cast<std::size_t>(j) * nx + i;
    }
    bool same_as(const GridSpec& o, double tol = 1e-12) const {
        return nx == o.nx && ny == o.ny &&
               std::abs(origin.x - o.origin.x) <= tol && std::abs(origin.y - o.origin.y) <= tol &&
               std::abs(spacing.x - o.spacing.x) <= tol && std::abs(spacing.y - o.spacing.y) <= tol;
    }

    /// Centered square grid covering [-L, L)^2 with n nodes per side
    /// (FFT-style sampling: node i at -L + i * 2L/n).
    static GridSpec centered_square(double half_width, int n) {
        GridSpec g;
        const double h = 2.0 * half_width / n;
        g.origin = {-half_width, -half_width};
        g.spacing = {h, h};
        g.nx = g.ny = n;
        return g;
    }
};

/// Grid field with NC components per node (NC = 1 scalar, NC = 2 vector),
/// stored interleaved, x-fastest ("row-major" over constant-y rows).
template <int NC>
struct Field {
    static_assert(NC == 1 || NC == 2);
    GridSpec spec;
    std::vector<double> data;
    double time = 0.0;
    bool margin_warning = false; // set by producers when coverage is suspect

    Field() = default;
    explicit Field(const GridSpec& s, double t = 0.0)
        : spec(s), data(s.size() * NC, 0.0), time(t) {}

    double& at(int i, int j, int c = 0) { return data[NC * spec.index(i, j) + c]; }
    double at(int i, int j, int c = 0) const { return data[NC * spec.index(i, j) + c]; }

    Vec2 vec_at(int i, int j) const
        requires(NC == 2)
    {
        const std::size_t p = 2 * spec.index(i, j);
        return {data[p], data[p + 1]};
    }
    void set_vec(int i, int j, const Vec2& v)
        requires(NC == 2)
    {
        const std::size_t p = 2 * spec.index(i, j);
        data[p] = v.x;
        data[p + 1] = v.y;
    }

    /// Pointwise Euclidean magnitude (absolute value for scalars).
    double magnitude(std::size_t node) const {
        if constexpr (NC == 1) return std::abs(data[node]);
        const double a = data[2 * node], b = data[2 * node + 1];
        return std::sqrt(a * a + b * b);
    }

    double max_abs() const {
        double m = 0.0;
        for (std::size_t n = 0; n < spec.size(); ++n) m = std::max(m, magnitude(n));
        return m;
    }

    bool all_finite() const {
        for (double v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

using ScalarField = Field<1>;
using VectorField = Field<2>;

// ---------------------------------------------------------------------------
// Grid snapshot files: '# t=<t> nx=<n> ny=<n> x0=<> y0=<> dx=<> dy=<>' header,
// then one value (or pair) per line, row-major.
// ---------------------------------------------------------------------------

template <int NC>
void write_field(const Field<NC>& f, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw DataError("write_field: cannot open " + path);
    os << "# t=" << fmt_double(f.time) << " nx=" << f.spec.nx << " ny=" << f.spec.ny
       << " x0=" << fmt_double(f.spec.origin.x) << " y0=" << fmt_double(f.spec.origin.y)
       << " dx=" << fmt_double(f.spec.spacing.x) << " dy=" << fmt_double(f.spec.spacing.y)
       << "\n";
    for (std::size_t n = 0; n < f.spec.size(); ++n) {
        if constexpr (NC == 1) {
            os << fmt_double(f.data[n]) << "\n";
        } else {
            os << fmt_double(f.data[2 * n]) << " " << fmt_double(f.data[2 * n + 1]) << "\n";
        }
    }
}

namespace detail {
inline double header_value(const std::string& header, const std::string& key) {
    const std::string tag = key + "=";
    auto pos = header.find(tag);
    if (pos == std::string::npos)
        throw DataError("grid snapshot header missing '" + key + "'");
    pos += tag.size();
    auto end = header.find_first_of(" \t\r\n", pos);
    return parse_double(header.substr(pos, end == std::string::npos ? end : end - pos));
}
} // namespace detail

template <int NC>
Field<NC> read_field(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw DataError("read_field: cannot open " + path);
    std::string header;
    std::getline(is, header);
    if (header.empty() || header[0] != '#')
        throw DataError("read_field: missing header in " + path);
    GridSpec spec;
    spec.nx = static_cast<int>(detail::header_value(header, "nx"));
    spec.ny = static_cast<int>(detail::header_value(header, "ny"));
    spec.origin = {detail::header_value(header, "x0"), detail::header_value(header, "y0")};
    spec.spacing = {detail::header_value(header, "dx"), detail::header_value(header, "dy")};
    Field<NC> f(spec, detail::header_value(header, "t"));
    std::string a, b;
    for (std::size_t n = 0; n < spec.size(); ++n) {
        if constexpr (NC == 1) {
            if (!(is >> a)) throw DataError("read_field: truncated data in " + path);
            f.data[n] = parse_double(a);
        } else {
            if (!(is >> a >> b)) throw DataError("read_field: truncated data in " + path);
            f.data[2 * n] = parse_double(a);
            f.data[2 * n + 1] = parse_double(b);
        }
    }
    return f;
}

} // namespace euler2d
