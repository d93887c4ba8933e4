#include "phasecur/io.hpp"

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace phasecur::io {

namespace {

static_assert(std::endian::native == std::endian::little, "PSF1 writer assumes a little-endian host");

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
    std::ofstream out(path, mode | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot open " + path.string() + " for writing");
    return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw Error(ErrorCode::Io, "write to " + path.string() + " failed");
}

void row(std::string& line, double v) {
    if (!line.empty()) line += ',';
    line += format_double(v);
}

template <class T>
void put(std::ofstream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::ifstream& in, const std::filesystem::path& path) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw Error(ErrorCode::Io, "truncated PSF1 file " + path.string());
    return v;
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, r.ptr);
}

void write_slice_csv(const std::filesystem::path& path, const PhaseSpaceSlice& f) {
    auto out = open_out(path);
    out << "q1,q2,q3,p1,p2,p3,re,im\n";
    for (std::size_t iq = 0; iq < f.q_count(); ++iq) {
        const Vec3 q = f.q_point(iq);
        for (std::size_t ip = 0; ip < f.p_count(); ++ip) {
            const Vec3 p = f.p_point(ip);
            const cplx v = f.at(iq, ip);
            std::string line;
            for (double x : {q[0], q[1], q[2], p[0], p[1], p[2], v.real(), v.imag()}) row(line, x);
            out << line << '\n';
        }
    }
    finish(out, path);
}

void write_current_csv(const std::filesystem::path& path, const CurrentField& j, bool with_imag) {
    with_imag = with_imag || j.max_imag() > 0.0;
    auto out = open_out(path);
    out << "q1,q2,q3,j1,j2,j3" << (with_imag ? ",im_j1,im_j2,im_j3" : "") << '\n';
    const Grid3& g = j.grid();
    auto emit = [&](std::size_t i) {
        const Vec3 q = g.point(i);
        const CVec3 v = j.at(i);
        std::string line;
        for (double x : {q[0], q[1], q[2], v[0].real(), v[1].real(), v[2].real()}) row(line, x);
        if (with_imag)
            for (int a = 0; a < 3; ++a) row(line, v[a].imag());
        out << line << '\n';
    };
    if (j.sites.empty()) {
        for (std::size_t i = 0; i < g.size(); ++i) emit(i);
    } else {
        for (std::size_t i : j.sites) emit(i);
    }
    finish(out, path);
}

void write_kinetic_csv(const std::filesystem::path& path, const KineticField& k) {
    auto out = open_out(path);
    out << "q1,q2,q3,K\n";
    const Grid3& g = k.grid();
    for (std::size_t i = 0; i < g.size(); ++i) {
        const Vec3 q = g.point(i);
        std::string line;
        for (double x : {q[0], q[1], q[2], k.K[i].real()}) row(line, x);
        out << line << '\n';
    }
    finish(out, path);
}

void write_slice_binary(const std::filesystem::path& path, const PhaseSpaceSlice& f) {
    auto out = open_out(path, std::ios::out | std::ios::binary);
    out.write("PSF1", 4);
    for (int a = 0; a < 3; ++a) put(out, static_cast<std::uint32_t>(f.q_index[a].size()));
    for (int a = 0; a < 3; ++a) put(out, static_cast<std::uint32_t>(f.p_index[a].size()));
    for (int a = 0; a < 3; ++a)
        for (auto i : f.q_index[a]) put(out, f.q_grid.coord(a, i));
    for (int a = 0; a < 3; ++a)
        for (auto i : f.p_index[a]) put(out, f.p_grid.coord(a, i));
    for (const auto& v : f.values) {
        put(out, v.real());
        put(out, v.imag());
    }
    finish(out, path);
}

SliceDump read_slice_binary(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "PSF1", 4) != 0) throw Error(ErrorCode::Io, path.string() + " is not a PSF1 file");
    std::array<std::uint32_t, 6> dims{};
    for (auto& d : dims) d = get<std::uint32_t>(in, path);
    SliceDump s;
    std::size_t total = 1;
    for (int a = 0; a < 6; ++a) {
        auto& axis = a < 3 ? s.q_axes[a] : s.p_axes[a - 3];
        axis.resize(dims[a]);
        for (auto& x : axis) x = get<double>(in, path);
        total *= dims[a];
    }
    s.values.resize(total);
    for (auto& v : s.values) {
        const double re = get<double>(in, path);
        const double im = get<double>(in, path);
        v = {re, im};
    }
    return s;
}

}  // namespace phasecur::io
