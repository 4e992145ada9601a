#pragma once

#include <optional>
#include <string>

#include "imfrac/types.hpp"

namespace imfrac {

// Orthonormal eigenbasis of the centered discrete Fourier transform built
// from the commuting tridiagonal-plus-corners matrix (Dickinson–Steiglitz).
// Column p is a discrete Hermite–Gaussian-like vector with index k[p]; it is
// an eigenvector of the unitary DFT with eigenvalue (-j)^{k[p]}. For even n
// the index set is {0, .., n-2, n}; for odd n it is {0, .., n-1}.
struct DfrftBasis {
  int n = 0;
  RMat v;   // n x n, orthonormal columns, ordered by ascending index
  IVec k;   // Hermite index per column
};

// Builds the basis by solving the commuting matrix separately on the even-
// and odd-symmetric subspaces, which keeps nearly degenerate pairs apart and
// makes every column exactly parity-symmetric. Throws if the construction
// fails its internal verification (orthonormality, DFT eigen-residuals).
DfrftBasis dfrft_basis(int n);

// e^{-j k[p] alpha} per column; angle pi/2 reproduces the DFT eigenvalues.
CVec fractional_eigenvalues(const DfrftBasis& b, double alpha);

// rho = V^T x (eigen coefficients) and x = V rho. Real basis times complex
// vector, done as two real matrix-vector products.
CVec basis_analysis(const DfrftBasis& b, const CVec& x);
CVec basis_synthesis(const DfrftBasis& b, const CVec& rho);

// Discrete fractional Fourier transform: V diag(e^{-j k alpha}) V^T x.
// Unitary for every angle; alpha = pi/2 is the unitary DFT.
CVec dfrft(const DfrftBasis& b, double alpha, const CVec& x);

// Binary cache ("DFEB"). Load refuses size or header mismatches.
void save_basis(const DfrftBasis& b, const std::string& path);
DfrftBasis load_basis(const std::string& path);
DfrftBasis load_basis(const std::string& path, int expected_n);

// Loads from <dir>/dfeb_<n>.bin when present (recomputing on corruption),
// otherwise computes and stores. Directory resolution: explicit argument,
// else $IMFRAC_CACHE_DIR, else compute without touching disk.
DfrftBasis cached_basis(int n, std::optional<std::string> cache_dir = std::nullopt);

}  // namespace imfrac
