#pragma once

#include <string>

#include "tvlevel/grid.hpp"

namespace tvlevel {

/// Writes via a temporary file in the same directory followed by a rename.
void atomic_write(const std::string& path, const std::string& contents);

/// PGM (P2/P5, maxval 255 or 65535). Values are mapped affinely between the
/// stored integer levels and the declared [lo, hi] range; the range is never
/// inferred from the data.
void write_pgm(const std::string& path, const ScalarField& f, double lo, double hi,
               int maxval = 65535, bool ascii = false);
ScalarField read_pgm(const std::string& path, double lo, double hi, double delta = 1.0);

/// Mask PGM with the fixed code set {0 = outside, 128 = boundary, 255 = interior}.
void write_mask_pgm(const std::string& path, const GridGeometry& g, bool ascii = false);
GridGeometry read_mask_pgm(const std::string& path, double delta = 1.0);

/// PBM (P1); 1 marks a member cell.
void write_pbm(const std::string& path, const BinarySet& e);
BinarySet read_pbm(const std::string& path, double delta = 1.0);

/// CSV with header line `width,height,delta,lo,hi`, one metadata row, then
/// height rows of width values (full precision; lossless round trip).
void write_csv(const std::string& path, const ScalarField& f, double lo, double hi);
struct CsvField {
  ScalarField field;
  double lo = 0.0, hi = 1.0;
};
CsvField read_csv(const std::string& path);

}  // namespace tvlevel
