#ifndef PHDAE_IO_HPP
#define PHDAE_IO_HPP

#include <string>

#include "phdae/staircase.hpp"
#include "phdae/types.hpp"

namespace phdae {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Matrix Market coordinate format (real general), entries sorted
/// column-major, 17 significant digits.
void write_matrix_market(const std::string& path, const SpMat& M);
/// Matrix Market array format (real general, column-major).
void write_matrix_market_dense(const std::string& path, const Mat& M);

/// Reads either coordinate or array format.
SpMat read_matrix_market(const std::string& path);
Mat read_matrix_market_dense(const std::string& path);

/// Writes every block as a Matrix Market file plus manifest.json
/// {version, n1..n4, m, files: {block-name: file-name}}. Deterministic
/// bytes for identical systems.
void save_model(const StaircaseSystem& sys, const std::string& dir);

/// Inverse of save_model; verifies block dimensions against the
/// manifest and names the offending block on mismatch.
StaircaseSystem load_model(const std::string& dir);

}  // namespace phdae

#endif
