#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"
#include "wkl/grid.hpp"
#include "wkl/sim.hpp"

namespace wkl {

// Flat binary: int64 d, int64 n, float64 vmax (little endian), then the node values in row-major order.
void write_snapshot(const std::filesystem::path& path, const Field& f);
Field read_snapshot(const std::filesystem::path& path);

// t,mass,px,py[,pz],energy,entropy_H,entropy_B,dissipation,dropped_mass
void write_series_csv(const std::filesystem::path& path, const InvariantSeries& s);

// Pretty-printed with a trailing newline; doubles are written in shortest round-trip form.
void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& j);

// Shortest decimal form that round-trips, for CSV output.
std::string format_double(double x);

}  // namespace wkl
