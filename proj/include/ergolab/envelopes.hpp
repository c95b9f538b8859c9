#pragma once

namespace ergolab {

/// t^{-1} (K<1), t^{-1}(log t)² (K=1, needs t>1), t^{-1/(2K-1)} (K>1).
double xi_k(double K, double t);

/// t^{-1/2} (d<4), t^{-1/2}(log t)^{1/2} (d=4, needs t>1), t^{-1/(d-2)} (d>4).
double gamma_d(int d, double t);

/// t^{-1} (d≤3), t^{-1}log(t+1) (d=4), t^{-2/(d-2)} (d≥5).
double rate_t5(int d, double t);

/// Renormalized d=4 constant vol/(8π²).
double limit_t6_d4(double volume);

/// Rate table for the degenerate diffusion on [0,1] with coefficient
/// {x(1-x)}^l, in the five (l, p) regimes.
double example51_envelope(double l, double p, double t);

/// Which of the five regimes (1..5) applies; throws outside l>2, p≥2.
int example51_case(double l, double p);

}  // namespace ergolab
