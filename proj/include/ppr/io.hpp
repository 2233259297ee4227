#pragma once

#include <filesystem>
#include <iosfwd>

#include "ppr/forward_model.hpp"

namespace ppr::io {

/// FileMatrix CSV: header line "M,N", then M lines of N comma-separated
/// "re:im" entries.
CMat read_matrix_csv(std::istream& in);
CMat read_matrix_csv(const std::filesystem::path& path);
void write_matrix_csv(std::ostream& out, const CMat& a);

ForwardModel load_file_model(const std::filesystem::path& path, double background);

/// Grayscale PGM (P2 or P5, 8 or 16 bit), scaled to [0, 1] by maxval.
RMat read_pgm(std::istream& in);
RMat read_pgm(const std::filesystem::path& path);
/// Binary P5, 8 bit; values clipped to [0, 1].
void write_pgm(const std::filesystem::path& path, const RMat& image);

}  // namespace ppr::io
