#include "wkl/io.hpp"

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace wkl {

namespace {

template <class T>
void put_le(std::ofstream& out, T x) {
    static_assert(sizeof(T) == 8);
    std::uint64_t u;
    std::memcpy(&u, &x, 8);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(u >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}

template <class T>
T get_le(std::ifstream& in) {
    unsigned char b[8];
    if (!in.read(reinterpret_cast<char*>(b), 8)) throw std::runtime_error("snapshot: truncated file");
    std::uint64_t u = 0;
    for (int i = 0; i < 8; ++i) u |= std::uint64_t(b[i]) << (8 * i);
    T x;
    std::memcpy(&x, &u, 8);
    return x;
}

std::ofstream open_out(const std::filesystem::path& path, bool binary) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

}  // namespace

void write_snapshot(const std::filesystem::path& path, const Field& f) {
    auto out = open_out(path, true);
    const auto& g = f.grid();
    put_le<std::int64_t>(out, g.d);
    put_le<std::int64_t>(out, g.n);
    put_le<double>(out, g.vmax);
    for (double x : f.values()) put_le<double>(out, x);
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

Field read_snapshot(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    const auto d = get_le<std::int64_t>(in);
    const auto n = get_le<std::int64_t>(in);
    const auto vmax = get_le<double>(in);
    auto grid = build_velocity_grid(static_cast<int>(d), static_cast<int>(n), vmax);
    Field f(grid);
    for (std::size_t a = 0; a < f.size(); ++a) f[a] = get_le<double>(in);
    if (in.peek() != std::char_traits<char>::eof()) throw std::runtime_error("snapshot: trailing bytes");
    return f;
}

std::string format_double(double x) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

void write_series_csv(const std::filesystem::path& path, const InvariantSeries& s) {
    auto out = open_out(path, false);
    out << "t,mass,px,py";
    if (s.d == 3) out << ",pz";
    out << ",energy,entropy_H,entropy_B,dissipation,dropped_mass\n";
    for (std::size_t k = 0; k < s.size(); ++k) {
        out << format_double(s.times[k]) << ',' << format_double(s.mass[k]);
        for (int c = 0; c < s.d; ++c) out << ',' << format_double(s.momentum[k][c]);
        out << ',' << format_double(s.energy[k]) << ',' << format_double(s.entropy_H[k]) << ','
            << format_double(s.entropy_B[k]) << ',' << format_double(s.dissipation[k]) << ','
            << format_double(s.dropped_mass[k]) << '\n';
    }
}

void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& j) {
    auto out = open_out(path, false);
    out << j.dump(2) << '\n';
}

}  // namespace wkl
