#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "qlh/residual.hpp"
#include "qlh/linear.hpp"

namespace qlh {

static_assert(std::endian::native == std::endian::little,
              "field files are little-endian; big-endian hosts need byte swapping");

enum class FieldKind : std::uint32_t {
    real_scalar = 0,
    complex_scalar = 1,
    vector = 2,
    sym_tensor = 3,
};

inline constexpr std::uint32_t kScalarTagFloat64 = 1;

/// Binary field snapshot. Layout (little-endian):
///   magic "QLH1" | u32 dim | u32 points[dim] | f64 extent[dim] | f64 time
///   | u32 kind | u32 scalar_tag (1 = float64) | u32 component_count
///   | payload: component_count planes, each row-major with axis order x,y,z
///     (z fastest).
/// The header fully determines the payload length. Origins are run
/// configuration, not part of the exchange format.
struct FieldFile {
    int dim = 0;
    std::array<int, 3> points{1, 1, 1};
    std::array<double, 3> extent{1, 1, 1};
    double time = 0.0;
    FieldKind kind = FieldKind::real_scalar;
    std::vector<std::vector<double>> components;

    GridSpec grid(const std::array<double, 3>& origin = {0, 0, 0}) const {
        return make_grid(dim, extent, points, origin);
    }
};

namespace detail {

template <typename T>
void put(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T take(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    return v;
}

inline void write_field_file(const std::filesystem::path& path, const GridSpec& g,
                             FieldKind kind, double time,
                             const std::vector<const RealField*>& comps) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    os.write("QLH1", 4);
    put<std::uint32_t>(os, g.dim());
    for (int a = 0; a < g.dim(); ++a) put<std::uint32_t>(os, g.points(a));
    for (int a = 0; a < g.dim(); ++a) put<double>(os, g.extent(a));
    put<double>(os, time);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(kind));
    put<std::uint32_t>(os, kScalarTagFloat64);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(comps.size()));
    for (const RealField* c : comps)
        os.write(reinterpret_cast<const char*>(c->data()),
                 static_cast<std::streamsize>(c->size() * sizeof(double)));
    if (!os) throw std::runtime_error("short write to " + path.string());
}

}  // namespace detail

inline void write_field(const std::filesystem::path& path, const RealField& f,
                        double time = 0.0) {
    detail::write_field_file(path, f.grid(), FieldKind::real_scalar, time, {&f});
}

inline void write_field(const std::filesystem::path& path, const ComplexField& f,
                        double time = 0.0) {
    RealField re(f.grid()), im(f.grid());
    for (std::size_t i = 0; i < f.size(); ++i) {
        re[i] = f[i].real();
        im[i] = f[i].imag();
    }
    detail::write_field_file(path, f.grid(), FieldKind::complex_scalar, time, {&re, &im});
}

inline void write_field(const std::filesystem::path& path, const VectorField& f,
                        double time = 0.0) {
    std::vector<const RealField*> comps;
    for (int a = 0; a < f.components(); ++a) comps.push_back(&f.comp(a));
    detail::write_field_file(path, f.grid(), FieldKind::vector, time, comps);
}

inline void write_field(const std::filesystem::path& path, const SymTensorField& f,
                        double time = 0.0) {
    std::vector<const RealField*> comps;
    for (int s = 0; s < f.components(); ++s) comps.push_back(&f.comp_flat(s));
    detail::write_field_file(path, f.grid(), FieldKind::sym_tensor, time, comps);
}

inline FieldFile read_field(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path.string());
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "QLH1", 4) != 0)
        throw std::runtime_error(path.string() + ": not a QLH1 field file");
    FieldFile f;
    f.dim = static_cast<int>(detail::take<std::uint32_t>(is));
    if (f.dim < 1 || f.dim > 3) throw std::runtime_error(path.string() + ": bad dim");
    std::size_t npts = 1;
    for (int a = 0; a < f.dim; ++a) {
        f.points[a] = static_cast<int>(detail::take<std::uint32_t>(is));
        npts *= static_cast<std::size_t>(f.points[a]);
    }
    for (int a = 0; a < f.dim; ++a) f.extent[a] = detail::take<double>(is);
    f.time = detail::take<double>(is);
    f.kind = static_cast<FieldKind>(detail::take<std::uint32_t>(is));
    const std::uint32_t tag = detail::take<std::uint32_t>(is);
    if (tag != kScalarTagFloat64)
        throw std::runtime_error(path.string() + ": unsupported scalar tag");
    const std::uint32_t ncomp = detail::take<std::uint32_t>(is);
    f.components.assign(ncomp, std::vector<double>(npts));
    for (auto& c : f.components)
        is.read(reinterpret_cast<char*>(c.data()),
                static_cast<std::streamsize>(npts * sizeof(double)));
    if (!is) throw std::runtime_error(path.string() + ": truncated payload");
    return f;
}

// ---- CSV emission ----

inline std::string csv_number(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

/// Residual-report series. The first six columns are the exchange contract;
/// whole-box norms and the mask fraction follow.
inline std::string residual_reports_csv(const std::vector<ResidualReport>& reports) {
    std::ostringstream os;
    os << "t,L2_abs,Linf_abs,L2_rel,convention,c0,"
          "L2_abs_unmasked,Linf_abs_unmasked,L2_rel_unmasked,mask_fraction\n";
    for (const auto& r : reports) {
        os << csv_number(r.t) << ',' << csv_number(r.masked.l2) << ','
           << csv_number(r.masked.linf) << ',' << csv_number(r.masked.rel) << ','
           << r.convention << ',' << csv_number(r.c0) << ',' << csv_number(r.unmasked.l2)
           << ',' << csv_number(r.unmasked.linf) << ',' << csv_number(r.unmasked.rel) << ','
           << csv_number(r.mask_fraction) << '\n';
    }
    return os.str();
}

inline std::string dispersion_csv(const std::vector<DispersionPoint>& points) {
    std::ostringstream os;
    os << "k,omega_measured,omega_analytic,rel_error\n";
    for (const auto& p : points)
        os << csv_number(p.k) << ',' << csv_number(p.omega_measured) << ','
           << csv_number(p.omega_analytic) << ',' << csv_number(p.rel_error) << '\n';
    return os.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);  // binary: no newline translation
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    os << text;
}

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

}  // namespace qlh
