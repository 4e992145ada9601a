#include "imfrac/eigenbasis.hpp"

#include <cstdlib>
#include <filesystem>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "imfrac/fft.hpp"
#include "imfrac/io.hpp"

namespace imfrac {

namespace {

// Tridiagonal-plus-corners matrix that commutes with the DFT:
// diag 2cos(2 pi n / N), ones on the cyclic off-diagonals.
RMat commutor(int n) {
  RMat s = RMat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    s(i, i) = 2.0 * std::cos(2.0 * pi * i / n);
    const int j = (i + 1) % n;
    s(i, j) = 1.0;
    s(j, i) = 1.0;
  }
  return s;
}

void fix_sign(Eigen::Ref<RVec> v) {
  const double tol = 1e-12 * v.cwiseAbs().maxCoeff();
  for (int i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > tol) {
      if (v[i] < 0) v = -v;
      return;
    }
  }
}

void verify(const DfrftBasis& b) {
  const double ortho = (b.v.transpose() * b.v - RMat::Identity(b.n, b.n))
                           .cwiseAbs()
                           .maxCoeff();
  if (ortho > 1e-10)
    throw std::runtime_error("dfrft_basis: columns not orthonormal");

  // Each column must reproduce its assigned DFT eigenvalue (-j)^k. This
  // catches any mixing of nearly degenerate modes or index misassignment.
  static const cplx pow_mj[4] = {{1, 0}, {0, -1}, {-1, 0}, {0, 1}};
  const double root_n = std::sqrt(static_cast<double>(b.n));
  for (int p = 0; p < b.n; ++p) {
    CVec col = b.v.col(p).cast<cplx>();
    CVec fv = fft::forward(col) / root_n;
    const double resid = (fv - pow_mj[b.k[p] % 4] * col).norm();
    if (resid > 1e-8)
      throw std::runtime_error("dfrft_basis: DFT eigen-residual too large");
  }
}

}  // namespace

DfrftBasis dfrft_basis(int n) {
  if (n < 2) throw std::invalid_argument("dfrft_basis: n must be >= 2");

  const RMat s = commutor(n);
  const bool even = (n % 2 == 0);
  const int half = n / 2;
  const int ne = even ? half + 1 : (n + 1) / 2;  // even-symmetric modes
  const int no = n - ne;                         // odd-symmetric modes

  // Orthonormal bases of the even/odd symmetric subspaces (v[i] = ±v[n-i]).
  RMat u = RMat::Zero(n, ne);
  RMat w = RMat::Zero(n, no);
  const double r = 1.0 / std::sqrt(2.0);
  u(0, 0) = 1.0;
  for (int i = 1; i <= (even ? half - 1 : (n - 1) / 2); ++i) {
    u(i, i) = r;
    u(n - i, i) = r;
    w(i, i - 1) = r;
    w(n - i, i - 1) = -r;
  }
  if (even) u(half, ne - 1) = 1.0;

  // Within each parity block the projected matrix has simple spectrum, so
  // the solver cannot mix modes that are nearly degenerate in the full matrix.
  Eigen::SelfAdjointEigenSolver<RMat> es(u.transpose() * s * u);
  Eigen::SelfAdjointEigenSolver<RMat> os(w.transpose() * s * w);
  if (es.info() != Eigen::Success || os.info() != Eigen::Success)
    throw std::runtime_error("dfrft_basis: eigensolver failed");

  DfrftBasis b;
  b.n = n;
  b.v.resize(n, n);
  b.k.resize(n);

  // Largest commutor eigenvalue = smoothest mode; descending order yields
  // Hermite indices 0,2,4,... on the even block and 1,3,5,... on the odd one.
  // For even n the last even mode takes index n (index n-1 does not occur).
  for (int i = 0; i < ne; ++i) {
    const int idx = (even && i == ne - 1) ? n : 2 * i;
    const int col = (even && idx == n) ? n - 1 : idx;
    b.v.col(col) = u * es.eigenvectors().col(ne - 1 - i);
    b.k[col] = idx;
  }
  for (int i = 0; i < no; ++i) {
    const int idx = 2 * i + 1;
    b.v.col(idx) = w * os.eigenvectors().col(no - 1 - i);
    b.k[idx] = idx;
  }

  for (int p = 0; p < n; ++p) fix_sign(b.v.col(p));

  verify(b);
  return b;
}

CVec fractional_eigenvalues(const DfrftBasis& b, double alpha) {
  CVec lam(b.n);
  for (int p = 0; p < b.n; ++p)
    lam[p] = std::polar(1.0, -alpha * b.k[p]);
  return lam;
}

CVec basis_analysis(const DfrftBasis& b, const CVec& x) {
  if (x.size() != b.n) throw std::invalid_argument("basis_analysis: size mismatch");
  const RVec re = b.v.transpose() * x.real();
  const RVec im = b.v.transpose() * x.imag();
  return re + jc * im;
}

CVec basis_synthesis(const DfrftBasis& b, const CVec& rho) {
  if (rho.size() != b.n) throw std::invalid_argument("basis_synthesis: size mismatch");
  const RVec re = b.v * rho.real();
  const RVec im = b.v * rho.imag();
  return re + jc * im;
}

CVec dfrft(const DfrftBasis& b, double alpha, const CVec& x) {
  CVec rho = basis_analysis(b, x);
  rho.array() *= fractional_eigenvalues(b, alpha).array();
  return basis_synthesis(b, rho);
}

namespace {
constexpr char kMagic[4] = {'D', 'F', 'E', 'B'};
constexpr std::uint32_t kVersion = 1;
}  // namespace

void save_basis(const DfrftBasis& b, const std::string& path) {
  io::atomic_write(path, [&](std::ostream& os) {
    io::write_magic(os, kMagic);
    io::write_pod(os, kVersion);
    io::write_pod(os, static_cast<std::uint32_t>(b.n));
    io::write_bytes(os, b.v.data(), sizeof(double) * b.n * b.n);
    for (int p = 0; p < b.n; ++p)
      io::write_pod(os, static_cast<std::int32_t>(b.k[p]));
  });
}

DfrftBasis load_basis(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_basis: cannot open " + path);
  io::expect_magic(is, kMagic, "basis file");
  if (io::read_pod<std::uint32_t>(is) != kVersion)
    throw std::runtime_error("load_basis: unsupported version");
  const auto n = static_cast<int>(io::read_pod<std::uint32_t>(is));
  if (n < 2 || n > (1 << 20)) throw std::runtime_error("load_basis: bad size");
  DfrftBasis b;
  b.n = n;
  b.v.resize(n, n);
  b.k.resize(n);
  io::read_bytes(is, b.v.data(), sizeof(double) * n * n);
  for (int p = 0; p < n; ++p) b.k[p] = io::read_pod<std::int32_t>(is);
  return b;
}

DfrftBasis load_basis(const std::string& path, int expected_n) {
  DfrftBasis b = load_basis(path);
  if (b.n != expected_n)
    throw std::runtime_error("load_basis: file holds size " + std::to_string(b.n) +
                             ", requested " + std::to_string(expected_n));
  return b;
}

DfrftBasis cached_basis(int n, std::optional<std::string> cache_dir) {
  std::string dir;
  if (cache_dir) {
    dir = *cache_dir;
  } else if (const char* env = std::getenv("IMFRAC_CACHE_DIR")) {
    dir = env;
  }
  if (dir.empty()) return dfrft_basis(n);

  const std::filesystem::path path =
      std::filesystem::path(dir) / ("dfeb_" + std::to_string(n) + ".bin");
  if (std::filesystem::exists(path)) {
    try {
      return load_basis(path.string(), n);
    } catch (const std::exception&) {
      // fall through and rebuild
    }
  }
  DfrftBasis b = dfrft_basis(n);
  save_basis(b, path.string());
  return b;
}

}  // namespace imfrac
