#pragma once

#include "imfrac/types.hpp"

namespace imfrac::fft {

inline constexpr int kForward = -1;  // kernel e^{-j 2 pi n k / N}
inline constexpr int kInverse = +1;  // unnormalized adjoint

// Out-of-place 1-D complex transform, unnormalized. `in` and `out` must not
// alias. Plans are cached per (n, sign, layout) for the process lifetime and
// created alignment-agnostic, so any buffer may be used.
void transform(const cplx* in, cplx* out, int n, int sign);

// Batch of `howmany` transforms of length `n`. Element k of batch b lives at
// offset b*idist + k*istride, identically for input and output.
void transform_many(const cplx* in, cplx* out, int n, int howmany, int istride,
                    int idist, int sign);

CVec forward(const CVec& x);
CVec inverse(const CVec& x);          // unnormalized; inverse(forward(x)) == n*x
CVec inverse_scaled(const CVec& x);   // true inverse, 1/n applied
CVec unitary(const CVec& x);          // forward / sqrt(n)

}  // namespace imfrac::fft
