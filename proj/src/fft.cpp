#include "imfrac/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace imfrac::fft {

namespace {

struct PlanKey {
  int n, sign, howmany, istride, idist;
  auto operator<=>(const PlanKey&) const = default;
};

std::map<PlanKey, fftw_plan> g_plans;
std::mutex g_mutex;

// FFTW_UNALIGNED makes the plan independent of buffer alignment, so a cached
// plan can be replayed on arbitrary arrays with fftw_execute_dft. ESTIMATE
// keeps planning deterministic and cheap.
fftw_plan plan_for(const PlanKey& key) {
  std::lock_guard lock(g_mutex);
  if (auto it = g_plans.find(key); it != g_plans.end()) return it->second;

  const size_t span =
      static_cast<size_t>(key.idist) * (key.howmany - 1) +
      static_cast<size_t>(key.istride) * (key.n - 1) + 1;
  std::vector<cplx> a(span), b(span);
  int n = key.n;
  fftw_plan plan = fftw_plan_many_dft(
      1, &n, key.howmany,
      reinterpret_cast<fftw_complex*>(a.data()), nullptr, key.istride, key.idist,
      reinterpret_cast<fftw_complex*>(b.data()), nullptr, key.istride, key.idist,
      key.sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (!plan) throw std::runtime_error("fftw planning failed");
  g_plans.emplace(key, plan);
  return plan;
}

void execute(const PlanKey& key, const cplx* in, cplx* out) {
  if (in == out) throw std::invalid_argument("fft: in-place transform not supported");
  fftw_execute_dft(plan_for(key),
                   reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
}

}  // namespace

void transform(const cplx* in, cplx* out, int n, int sign) {
  execute({n, sign, 1, 1, n}, in, out);
}

void transform_many(const cplx* in, cplx* out, int n, int howmany, int istride,
                    int idist, int sign) {
  execute({n, sign, howmany, istride, idist}, in, out);
}

CVec forward(const CVec& x) {
  CVec y(x.size());
  transform(x.data(), y.data(), static_cast<int>(x.size()), kForward);
  return y;
}

CVec inverse(const CVec& x) {
  CVec y(x.size());
  transform(x.data(), y.data(), static_cast<int>(x.size()), kInverse);
  return y;
}

CVec inverse_scaled(const CVec& x) { return inverse(x) / static_cast<double>(x.size()); }

CVec unitary(const CVec& x) { return forward(x) / std::sqrt(static_cast<double>(x.size())); }

}  // namespace imfrac::fft
