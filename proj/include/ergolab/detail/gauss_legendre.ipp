#pragma once

namespace ergolab {
namespace detail {

inline constexpr double kGLNodes16[16] = {
    -0.98940093499164994, -0.9445750230732326, -0.86563120238783176,
    -0.755404408355003, -0.61787624440264377, -0.45801677765722737,
    -0.28160355077925892, -0.095012509837637454, 0.095012509837637454,
    0.28160355077925892, 0.45801677765722737, 0.61787624440264377,
    0.755404408355003, 0.86563120238783176, 0.9445750230732326,
    0.98940093499164994};
inline constexpr double kGLWeights16[16] = {
    0.027152459411754037, 0.062253523938647706, 0.095158511682492591,
    0.12462897125553403, 0.14959598881657676, 0.16915651939500262,
    0.18260341504492361, 0.18945061045506859, 0.18945061045506859,
    0.18260341504492361, 0.16915651939500262, 0.14959598881657676,
    0.12462897125553403, 0.095158511682492591, 0.062253523938647706,
    0.027152459411754037};

}  // namespace detail

template <class F>
double gauss_legendre(F&& g, double a, double b, int pieces) {
  const double width = (b - a) / pieces;
  double total = 0.0;
  for (int k = 0; k < pieces; ++k) {
    const double mid = a + (k + 0.5) * width;
    const double half = 0.5 * width;
    double s = 0.0;
    for (int i = 0; i < 16; ++i) s += detail::kGLWeights16[i] * g(mid + half * detail::kGLNodes16[i]);
    total += s * half;
  }
  return total;
}

}  // namespace ergolab
