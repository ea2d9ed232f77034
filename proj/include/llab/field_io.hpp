/// @file field_io.hpp
/// @brief CSV and "LLAB1" binary dumps of scalar fields, plus atomic file writes.
#pragma once

#include <iosfwd>
#include <string>

#include "llab/grid.hpp"

namespace llab {

/// One row per node per level: x1[,x2],t,value.
void write_csv(std::ostream& out, const ScalarField& f);
std::string to_csv(const ScalarField& f);

/// Binary layout, all little-endian:
///   "LLAB1" | u32 dim | u64 nx | u64 ny | f64 h | f64 origin_x | f64 origin_y |
///   f64 tau | f64 t0 | u64 steps | f64 values[nx*ny*(steps+1)]
std::string to_binary(const ScalarField& f);
ScalarField from_binary(const std::string& bytes);

ScalarField read_binary_file(const std::string& path);

/// Write to a sibling temporary file and rename it over `path`.
void write_file_atomic(const std::string& path, const std::string& contents);

std::string read_file(const std::string& path);

}  // namespace llab
