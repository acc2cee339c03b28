#include "fraqhom/field_io.hpp"

#include "fraqhom/errors.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace fraqhom::io {

static_assert(std::endian::native == std::endian::little, "binary field format assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'F', 'R', 'Q', 'H'};
constexpr std::size_t kHeaderBytes = 32;

template <typename T>
void put(char* dst, T v) {
  std::memcpy(dst, &v, sizeof(T));
}

template <typename T>
T get(const char* src) {
  T v;
  std::memcpy(&v, src, sizeof(T));
  return v;
}

struct Decoded {
  Grid grid;
  std::vector<std::vector<double>> components;
};

Decoded read_any(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InvalidArgument("cannot open " + path.string());
  char header[kHeaderBytes];
  if (!is.read(header, kHeaderBytes)) throw InvalidArgument(path.string() + ": truncated header");
  if (std::memcmp(header, kMagic, 4) != 0) throw InvalidArgument(path.string() + ": bad magic");
  if (get<std::uint32_t>(header + 4) != kFormatVersion)
    throw InvalidArgument(path.string() + ": unsupported version");
  const auto dim = static_cast<int>(get<std::uint32_t>(header + 8));
  const auto n = static_cast<int>(get<std::uint32_t>(header + 12));
  const double L = get<double>(header + 16);
  const auto ncomp = get<std::uint32_t>(header + 24);
  Decoded out{build_grid(dim, L, n), {}};
  for (std::uint32_t c = 0; c < ncomp; ++c) {
    std::vector<double> values(out.grid.size());
    if (!is.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(double))))
      throw InvalidArgument(path.string() + ": truncated payload");
    out.components.push_back(std::move(values));
  }
  return out;
}

void write_file(const std::filesystem::path& path, const Grid& grid, std::span<const std::span<const double>> comps) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InvalidArgument("cannot write " + path.string());
  write_binary(os, grid, comps);
}

} // namespace

void write_binary(std::ostream& os, const Grid& grid, std::span<const std::span<const double>> components) {
  char header[kHeaderBytes] = {};
  std::memcpy(header, kMagic, 4);
  put<std::uint32_t>(header + 4, kFormatVersion);
  put<std::uint32_t>(header + 8, static_cast<std::uint32_t>(grid.dim()));
  put<std::uint32_t>(header + 12, static_cast<std::uint32_t>(grid.points_per_axis()));
  put<double>(header + 16, grid.half_width());
  put<std::uint32_t>(header + 24, static_cast<std::uint32_t>(components.size()));
  os.write(header, kHeaderBytes);
  for (auto c : components) {
    if (c.size() != grid.size()) throw InvalidArgument("write_binary: component size does not match grid");
    os.write(reinterpret_cast<const char*>(c.data()), static_cast<std::streamsize>(c.size() * sizeof(double)));
  }
}

void write_binary(const std::filesystem::path& path, const ScalarField& u) {
  const std::span<const double> comps[] = {u.values()};
  write_file(path, u.grid(), comps);
}

void write_binary(const std::filesystem::path& path, const VectorField& g) {
  std::vector<std::span<const double>> comps;
  for (int j = 0; j < g.components(); ++j) comps.push_back(g.component(j).values());
  write_file(path, g.grid(), comps);
}

ScalarField read_scalar_binary(const std::filesystem::path& path) {
  auto d = read_any(path);
  if (d.components.size() != 1) throw InvalidArgument(path.string() + ": expected a scalar field");
  return ScalarField(d.grid, std::move(d.components[0]));
}

VectorField read_vector_binary(const std::filesystem::path& path) {
  auto d = read_any(path);
  if (static_cast<int>(d.components.size()) != d.grid.dim())
    throw InvalidArgument(path.string() + ": component count does not match dimension");
  VectorField g(d.grid);
  for (int j = 0; j < g.components(); ++j)
    g.component(j) = ScalarField(d.grid, std::move(d.components[static_cast<std::size_t>(j)]));
  return g;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

void write_coords(std::ostream& os, const Grid& grid, std::size_t i) {
  const Point p = grid.point(i);
  os << i << ',' << format_double(p[0]);
  if (grid.dim() == 2) os << ',' << format_double(p[1]);
}

} // namespace

void write_csv(std::ostream& os, const ScalarField& u) {
  os << (u.grid().dim() == 1 ? "index,x,value\n" : "index,x,y,value\n");
  for (std::size_t i = 0; i < u.size(); ++i) {
    write_coords(os, u.grid(), i);
    os << ',' << format_double(u[i]) << '\n';
  }
}

void write_csv(std::ostream& os, const VectorField& g) {
  os << (g.grid().dim() == 1 ? "index,x" : "index,x,y");
  for (int j = 0; j < g.components(); ++j) os << ",value_" << j;
  os << '\n';
  for (std::size_t i = 0; i < g.grid().size(); ++i) {
    write_coords(os, g.grid(), i);
    for (int j = 0; j < g.components(); ++j) os << ',' << format_double(g.component(j)[i]);
    os << '\n';
  }
}

void write_csv(const std::filesystem::path& path, const ScalarField& u) {
  std::ofstream os(path);
  if (!os) throw InvalidArgument("cannot write " + path.string());
  write_csv(os, u);
}

void write_mask_csv(std::ostream& os, const OmegaMask& mask) {
  os << "index,inside\n";
  for (std::size_t i = 0; i < mask.grid().size(); ++i) os << i << ',' << (mask.contains(i) ? 1 : 0) << '\n';
}

ScalarField read_scalar_csv(std::istream& is, const Grid& grid) {
  std::string line;
  if (!std::getline(is, line)) throw InvalidArgument("read_scalar_csv: missing header");
  const std::size_t expected_cols = grid.dim() == 1 ? 3 : 4;
  ScalarField u(grid);
  std::vector<std::uint8_t> seen(grid.size(), 0);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cols.push_back(cell);
    if (cols.size() != expected_cols) throw InvalidArgument("read_scalar_csv: bad row '" + line + "'");
    const auto i = std::stoull(cols[0]);
    if (i >= grid.size()) throw InvalidArgument("read_scalar_csv: index out of range");
    u[i] = std::stod(cols.back());
    seen[i] = 1;
  }
  for (auto s : seen)
    if (!s) throw InvalidArgument("read_scalar_csv: missing grid points");
  return u;
}

} // namespace fraqhom::io
