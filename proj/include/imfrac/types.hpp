#pragma once

#include <complex>
#include <cstdint>

#include <Eigen/Dense>

namespace imfrac {

using cplx = std::complex<double>;

using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;
using IVec = Eigen::VectorXi;
using CMat = Eigen::MatrixXcd;
using RMat = Eigen::MatrixXd;

// Row-major storage so that a fixed first index selects a contiguous run;
// used for angle-by-sample grids where whole rows are scanned and FFT'd.
using CMatRM = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MaskMat = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr double pi = 3.14159265358979323846;
inline constexpr cplx jc{0.0, 1.0};

inline double deg2rad(double d) { return d * pi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / pi; }

// x mod m mapped into [0, m); works for negative x.
inline int wrap_index(int x, int m) {
  int r = x % m;
  return r < 0 ? r + m : r;
}

}  // namespace imfrac
