#include "sbmlab/fieldio.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace sbm {

static_assert(std::endian::native == std::endian::little,
              "field dumps are little-endian; byte-swapping is not implemented");

namespace {
constexpr char kMagic[4] = {'S', 'B', 'M', 'F'};
constexpr std::uint32_t kSchemaVersion = 1;
}  // namespace

void write_field_dump(const std::filesystem::path& path, const GridFunction& f, double t) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_field_dump: cannot open " + path.string());
    const std::uint32_t n = static_cast<std::uint32_t>(f.spec.points);
    out.write(kMagic, 4);
    out.write(reinterpret_cast<const char*>(&kSchemaVersion), 4);
    out.write(reinterpret_cast<const char*>(&n), 4);
    out.write(reinterpret_cast<const char*>(&f.spec.half_width), 8);
    out.write(reinterpret_cast<const char*>(&t), 8);
    out.write(reinterpret_cast<const char*>(f.values.data()),
              static_cast<std::streamsize>(f.values.size() * sizeof(double)));
    if (!out) throw std::runtime_error("write_field_dump: write failed for " + path.string());
}

FieldDump read_field_dump(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_field_dump: cannot open " + path.string());
    char magic[4];
    std::uint32_t version = 0, n = 0;
    double half_width = 0.0, t = 0.0;
    in.read(magic, 4);
    in.read(reinterpret_cast<char*>(&version), 4);
    in.read(reinterpret_cast<char*>(&n), 4);
    in.read(reinterpret_cast<char*>(&half_width), 8);
    in.read(reinterpret_cast<char*>(&t), 8);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("read_field_dump: bad header in " + path.string());
    if (version != kSchemaVersion)
        throw std::runtime_error("read_field_dump: unsupported schema version");
    std::vector<double> values(n);
    in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) throw std::runtime_error("read_field_dump: truncated file " + path.string());
    FieldDump dump;
    dump.field = GridFunction(make_grid(half_width, static_cast<int>(n)), std::move(values));
    dump.t = t;
    return dump;
}

}  // namespace sbm
