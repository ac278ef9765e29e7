#pragma once

#include <complex>

namespace graphcorr {

using Cplx = std::complex<double>;

// Default tolerance for residuals of verified identities.
inline constexpr double kTol = 1e-10;
// Tighter tolerance for identities that are exact up to rounding.
inline constexpr double kTightTol = 1e-12;
// Eigenvalue cutoff when ranking Gram matrices.
inline constexpr double kRankTol = 1e-8;

}  // namespace graphcorr
