#pragma once

// Field serialisation.
//
// Binary layout: a 32-byte little-endian header
//   bytes  0-3   magic "FRQH"
//   bytes  4-7   uint32 version (1)
//   bytes  8-11  uint32 dim
//   bytes 12-15  uint32 N (points per axis)
//   bytes 16-23  float64 L (half width)
//   bytes 24-27  uint32 component count (1 for scalar fields)
//   bytes 28-31  reserved, zero
// followed by component-major, row-major float64 values.
//
// CSV: header `index,x[,y],value` (vector fields: value_0, value_1); masks
// use `index,inside`.

#include "fraqhom/lattice.hpp"

#include <filesystem>
#include <iosfwd>

namespace fraqhom::io {

inline constexpr std::uint32_t kFormatVersion = 1;

void write_binary(const std::filesystem::path& path, const ScalarField& u);
void write_binary(const std::filesystem::path& path, const VectorField& g);
void write_binary(std::ostream& os, const Grid& grid, std::span<const std::span<const double>> components);
ScalarField read_scalar_binary(const std::filesystem::path& path);
VectorField read_vector_binary(const std::filesystem::path& path);

void write_csv(std::ostream& os, const ScalarField& u);
void write_csv(std::ostream& os, const VectorField& g);
void write_csv(const std::filesystem::path& path, const ScalarField& u);
void write_mask_csv(std::ostream& os, const OmegaMask& mask);
/// Reads `index,x[,y],value` back onto a grid; every grid point must appear.
ScalarField read_scalar_csv(std::istream& is, const Grid& grid);

/// Full-precision decimal used by every CSV writer in the project.
std::string format_double(double v);

} // namespace fraqhom::io
