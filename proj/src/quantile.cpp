#include "ergolab/quantile.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ergolab/errors.hpp"
#include "ergolab/laws.hpp"

namespace ergolab {

PiecewiseQuantile::PiecewiseQuantile(std::vector<QuantilePiece> pieces) : pieces_(std::move(pieces)) {
  if (pieces_.empty()) throw DomainError("quantile needs at least one piece");
}

double PiecewiseQuantile::operator()(double u) const {
  auto it = std::upper_bound(pieces_.begin(), pieces_.end(), u,
                             [](double v, const QuantilePiece& q) { return v < q.u1; });
  if (it == pieces_.end()) --it;
  const auto& q = *it;
  if (q.u1 <= q.u0) return q.x0;
  return q.x0 + (u - q.u0) / (q.u1 - q.u0) * (q.x1 - q.x0);
}

double PiecewiseQuantile::min_gap() const {
  double g = std::numeric_limits<double>::infinity();
  for (const auto& q : pieces_)
    if (q.u1 > q.u0) g = std::min(g, q.u1 - q.u0);
  return g;
}

PiecewiseQuantile PiecewiseQuantile::from_atoms(const std::vector<double>& x, const std::vector<double>& w) {
  std::vector<QuantilePiece> out;
  out.reserve(x.size());
  double total = 0.0;
  for (double v : w) total += v;
  double u = 0.0, acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (w[i] <= 0.0) continue;
    acc += w[i];
    const double next = (i + 1 == x.size()) ? 1.0 : std::min(1.0, acc / total);
    out.push_back({u, next, x[i], x[i]});
    u = next;
  }
  out.back().u1 = 1.0;
  return PiecewiseQuantile(std::move(out));
}

PiecewiseQuantile PiecewiseQuantile::from_cells(double lo, double width, const std::vector<double>& m) {
  std::vector<QuantilePiece> out;
  double total = 0.0;
  for (double v : m) total += v;
  double u = 0.0, acc = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i] <= 0.0) continue;
    acc += m[i];
    const double next = std::min(1.0, acc / total);
    out.push_back({u, next, lo + width * double(i), lo + width * double(i + 1)});
    u = next;
  }
  out.back().u1 = 1.0;
  return PiecewiseQuantile(std::move(out));
}

double abs_linear_power_integral(double a, double b, double w, double p) {
  if (w <= 0.0) return 0.0;
  if (p == 2.0) return a * a * w + a * b * w * w + b * b * w * w * w / 3.0;
  const double end = a + b * w;
  if (p == 1.0 && a * end >= 0.0) return std::abs(a + 0.5 * b * w) * w;
  if (a * end < 0.0) {
    // sign change at s* = -a/b: two pieces that vanish at the root
    const double r = -a / b;
    const double ab = std::abs(b);
    return std::pow(ab, p) * (std::pow(r, p + 1) + std::pow(w - r, p + 1)) / (p + 1);
  }
  return gauss_legendre([&](double s) { return std::pow(std::abs(a + b * s), p); }, 0.0, w);
}

namespace {

// Walks the merged breakpoints of two piecewise-linear functions on [0,1].
// f and g are given as pieces with u-ranges; g may be shifted.
double merged_cost(const std::vector<QuantilePiece>& A, const std::vector<QuantilePiece>& B, double p) {
  std::size_t i = 0, j = 0;
  double u = 0.0, total = 0.0;
  while (i < A.size() && j < B.size()) {
    const auto& a = A[i];
    const auto& b = B[j];
    const double end = std::min(a.u1, b.u1);
    if (end > u) {
      auto value = [](const QuantilePiece& q, double v) {
        return q.u1 > q.u0 ? q.x0 + (v - q.u0) / (q.u1 - q.u0) * (q.x1 - q.x0) : q.x0;
      };
      auto slope = [](const QuantilePiece& q) { return q.u1 > q.u0 ? (q.x1 - q.x0) / (q.u1 - q.u0) : 0.0; };
      const double alpha = value(a, u) - value(b, u);
      const double beta = slope(a) - slope(b);
      total += abs_linear_power_integral(alpha, beta, end - u, p);
      u = end;
    }
    if (a.u1 <= end) ++i;
    if (b.u1 <= end) ++j;
  }
  return total;
}

}  // namespace

double quantile_cost(const PiecewiseQuantile& q1, const PiecewiseQuantile& q2, double p) {
  return merged_cost(q1.pieces(), q2.pieces(), p);
}

double lifted_quantile_cost(const PiecewiseQuantile& q1, const PiecewiseQuantile& q2, double theta, double p) {
  // express s -> Q̃2(s + θ) on s ∈ [0,1] as pieces
  const double shift = std::floor(theta);
  const double frac = theta - shift;
  std::vector<QuantilePiece> B;
  B.reserve(2 * q2.pieces().size() + 2);
  for (int wrap = 0; wrap < 2; ++wrap) {
    for (const auto& q : q2.pieces()) {
      // piece occupies s ∈ [q.u0 + wrap - frac, q.u1 + wrap - frac]
      double s0 = q.u0 + wrap - frac, s1 = q.u1 + wrap - frac;
      if (s1 <= 0.0 || s0 >= 1.0) continue;
      double x0 = q.x0 + wrap + shift, x1 = q.x1 + wrap + shift;
      const double len = q.u1 - q.u0;
      if (s0 < 0.0) {
        x0 += (x1 - x0) * (-s0) / len;
        s0 = 0.0;
      }
      if (s1 > 1.0) {
        x1 -= (x1 - x0) * (s1 - 1.0) / (s1 - s0);
        s1 = 1.0;
      }
      if (s1 > s0) B.push_back({s0, s1, x0, x1});
    }
  }
  if (B.empty()) throw DomainError("lifted quantile is empty");
  B.back().u1 = 1.0;
  return merged_cost(q1.pieces(), B, p);
}

}  // namespace ergolab
