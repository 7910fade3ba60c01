#pragma once

#include <filesystem>
#include <string>

#include "sbmlab/grid.hpp"

namespace sbm {

// Binary field snapshot: little-endian throughout.
//   bytes 0..3   magic "SBMF"
//   bytes 4..7   u32 schema version (1)
//   bytes 8..11  u32 N
//   bytes 12..19 f64 L
//   bytes 20..27 f64 t
//   then N f64 cell values
struct FieldDump {
    GridFunction field;
    double t = 0.0;
};

void write_field_dump(const std::filesystem::path& path, const GridFunction& f, double t);
FieldDump read_field_dump(const std::filesystem::path& path);

}  // namespace sbm
