// types.hpp - domain value types for the linear mixture model R = E*A + N,
// plus the 2D<->3D reshape operator that moves abundances between their
// matrix form (one column per pixel) and per-endmember spatial maps.
//
// Conventions, used everywhere in this library:
//   R is bands x pixels, one column per pixel, pixels in row-major spatial
//   order; E is bands x endmembers; A is endmembers x pixels.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace pnmf {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

// Observed (or synthetic) hyperspectral image in matrix form.
// Noisy cubes may carry small negative entries; `allow_negative` records
// whether that is expected for this cube.
struct SpectralCube {
  int rows = 0;  // spatial
  int cols = 0;  // spatial
  Matrix data;   // bands x (rows*cols)
  bool allow_negative = false;

  int bands() const { return static_cast<int>(data.rows()); }
  int pixels() const { return static_cast<int>(data.cols()); }

  void validate() const {
    if (rows < 1 || cols < 1) throw std::invalid_argument("cube: spatial dims must be >= 1");
    if (data.cols() != static_cast<Eigen::Index>(rows) * cols)
      throw std::invalid_argument("cube: pixel count does not match rows*cols");
    if (data.rows() < 1) throw std::invalid_argument("cube: needs at least one band");
    if (!all_finite(data)) throw std::invalid_argument("cube: non-finite entries");
    if (!allow_negative && data.minCoeff() < 0.0)
      throw std::invalid_argument("cube: negative entries in a cube not flagged as noisy");
  }
};

// Endmember spectra, one column per material (ENC: entrywise >= 0).
struct EndmemberMatrix {
  Matrix data;  // bands x count

  int bands() const { return static_cast<int>(data.rows()); }
  int count() const { return static_cast<int>(data.cols()); }

  void validate() const {
    if (data.size() == 0) throw std::invalid_argument("endmembers: empty matrix");
    if (!all_finite(data)) throw std::invalid_argument("endmembers: non-finite entries");
    if (data.minCoeff() < 0.0) throw std::invalid_argument("endmembers: negative entry violates ENC");
    for (int j = 0; j < count(); ++j)
      if (data.col(j).maxCoeff() <= 0.0)
        throw std::invalid_argument("endmembers: all-zero column " + std::to_string(j));
  }
};

// Abundances, one column per pixel (ANC: entrywise >= 0). When `simplex`
// is set the columns are additionally claimed to lie on the probability
// simplex (ASC) and validate() checks the column sums.
struct AbundanceMatrix {
  Matrix data;  // count x pixels
  bool simplex = false;

  int count() const { return static_cast<int>(data.rows()); }
  int pixels() const { return static_cast<int>(data.cols()); }

  static constexpr double kSimplexTol = 1e-6;

  void validate() const {
    if (data.size() == 0) throw std::invalid_argument("abundances: empty matrix");
    if (!all_finite(data)) throw std::invalid_argument("abundances: non-finite entries");
    if (data.minCoeff() < 0.0) throw std::invalid_argument("abundances: negative entry violates ANC");
    if (simplex) {
      for (int j = 0; j < pixels(); ++j)
        if (std::abs(data.col(j).sum() - 1.0) > kSimplexTol)
          throw std::invalid_argument("abundances: column " + std::to_string(j) +
                                      " off the simplex");
    }
  }
};

// Which spectral bands to keep when preprocessing a cube.
struct BandMask {
  std::vector<bool> keep;

  int kept() const {
    int n = 0;
    for (bool k : keep) n += k ? 1 : 0;
    return n;
  }
  void validate() const {
    if (kept() < 1) throw std::invalid_argument("band mask: must keep at least one band");
  }
};

// A stack of per-endmember spatial maps; the image-domain form of an
// abundance matrix.
struct MapStack {
  int rows = 0;
  int cols = 0;
  std::vector<Matrix> maps;  // each rows x cols

  int count() const { return static_cast<int>(maps.size()); }
};

// T(.): abundance matrix -> stack of spatial maps.
// Map p at (i, j) is a.data(p, i*cols + j).
inline MapStack reshape_to_maps(const AbundanceMatrix& a, int rows, int cols) {
  if (a.pixels() != rows * cols)
    throw std::invalid_argument("reshape: pixels != rows*cols");
  MapStack s;
  s.rows = rows;
  s.cols = cols;
  s.maps.reserve(a.count());
  for (int p = 0; p < a.count(); ++p) {
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) m(i, j) = a.data(p, i * cols + j);
    s.maps.push_back(std::move(m));
  }
  return s;
}

// Inverse of reshape_to_maps; lossless.
inline AbundanceMatrix reshape_to_matrix(const MapStack& s) {
  AbundanceMatrix a;
  a.data.resize(s.count(), static_cast<Eigen::Index>(s.rows) * s.cols);
  for (int p = 0; p < s.count(); ++p) {
    const Matrix& m = s.maps[p];
    if (m.rows() != s.rows || m.cols() != s.cols)
      throw std::invalid_argument("reshape: inconsistent map shape in stack");
    for (int i = 0; i < s.rows; ++i)
      for (int j = 0; j < s.cols; ++j) a.data(p, i * s.cols + j) = m(i, j);
  }
  return a;
}

// Drop masked-out bands; pixel count and spatial dims are preserved.
inline SpectralCube apply_band_mask(const SpectralCube& cube, const BandMask& mask) {
  if (static_cast<int>(mask.keep.size()) != cube.bands())
    throw std::invalid_argument("band mask: length does not match band count");
  mask.validate();
  SpectralCube out;
  out.rows = cube.rows;
  out.cols = cube.cols;
  out.allow_negative = cube.allow_negative;
  out.data.resize(mask.kept(), cube.pixels());
  int r = 0;
  for (int b = 0; b < cube.bands(); ++b)
    if (mask.keep[b]) out.data.row(r++) = cube.data.row(b);
  return out;
}

}  // namespace pnmf
