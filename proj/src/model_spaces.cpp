#include "ergolab/model_spaces.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ergolab/errors.hpp"
#include "ergolab/laws.hpp"

namespace ergolab {

namespace {

double wrap(double x, double L) {
  double r = std::fmod(x, L);
  if (r < 0.0) r += L;
  if (r >= L) r = 0.0;  // fmod of tiny negatives can round up to L
  return r;
}

void require_finite(double x) {
  if (!std::isfinite(x)) throw DomainError("non-finite coordinate");
}

}  // namespace

Space Space::circle(double circumference) {
  if (!(circumference > 0.0) || !std::isfinite(circumference)) throw DomainError("circle circumference must be positive");
  Space s;
  s.kind_ = SpaceKind::Circle;
  s.extent_ = circumference;
  s.law_ = std::make_shared<UniformLaw>(circumference);
  return s;
}

Space Space::torus(int dimension, double side) {
  if (dimension < 1) throw DomainError("torus dimension must be >= 1");
  if (!(side > 0.0) || !std::isfinite(side)) throw DomainError("torus side must be positive");
  Space s;
  s.kind_ = SpaceKind::Torus;
  s.dim_ = dimension;
  s.extent_ = side;
  if (dimension == 1) s.law_ = std::make_shared<UniformLaw>(side);
  return s;
}

Space Space::interval(double length, Boundary boundary) {
  if (!(length > 0.0) || !std::isfinite(length)) throw DomainError("interval length must be positive");
  if (boundary == Boundary::None) throw DomainError("interval needs a Neumann or Dirichlet boundary");
  Space s;
  s.kind_ = SpaceKind::Interval;
  s.boundary_ = boundary;
  s.extent_ = length;
  s.law_ = std::make_shared<UniformLaw>(length);
  return s;
}

Space Space::confined_line(double theta, double tau) {
  if (!(theta > 0.0) || !(tau > 0.5)) throw DomainError("confined line needs theta > 0 and tau > 1/2");
  Space s;
  s.kind_ = SpaceKind::ConfinedLine;
  s.theta_ = theta;
  s.tau_ = tau;
  s.law_ = std::make_shared<ConfinedLineLaw>(theta, tau);
  return s;
}

double Space::canonical1(double x) const {
  require_finite(x);
  switch (kind_) {
    case SpaceKind::Circle:
    case SpaceKind::Torus:
      return wrap(x, extent_);
    case SpaceKind::Interval:
      if (x < 0.0 || x > extent_) throw DomainError("point outside the interval");
      return x;
    case SpaceKind::ConfinedLine:
      return x;
  }
  return x;
}

Point Space::canonical(const Point& x) const {
  if (static_cast<int>(x.size()) != dim_) throw DomainError("point dimension mismatch");
  Point out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = canonical1(x[i]);
  return out;
}

void Space::check_point(const Point& x) const {
  if (static_cast<int>(x.size()) != dim_) throw DomainError("point dimension mismatch");
  for (double c : x) {
    require_finite(c);
    if (periodic() && (c < 0.0 || c >= extent_)) throw DomainError("point outside the fundamental domain");
    if (kind_ == SpaceKind::Interval && (c < 0.0 || c > extent_)) throw DomainError("point outside the interval");
  }
}

double Space::metric1(double x, double y) const {
  const double d = std::abs(x - y);
  return periodic() ? std::min(d, extent_ - d) : d;
}

double Space::metric(const Point& x, const Point& y) const {
  check_point(x);
  check_point(y);
  if (dim_ == 1) return metric1(x[0], y[0]);
  double s = 0.0;
  for (int i = 0; i < dim_; ++i) {
    const double d = metric1(x[i], y[i]);
    s += d * d;
  }
  return std::sqrt(s);
}

double Space::volume() const {
  switch (kind_) {
    case SpaceKind::Circle:
    case SpaceKind::Interval:
      return extent_;
    case SpaceKind::Torus:
      return std::pow(extent_, dim_);
    case SpaceKind::ConfinedLine:
      return 1.0;
  }
  return 1.0;
}

std::shared_ptr<const SmoothLaw1D> Space::invariant_law() const { return law_; }

Point Space::sample_invariant(RngStream& rng) const {
  Point x(dim_);
  if (kind_ == SpaceKind::ConfinedLine) {
    x[0] = law_->sample(rng);
    return x;
  }
  for (int i = 0; i < dim_; ++i) {
    x[i] = rng.uniform() * extent_;
    if (x[i] >= extent_) x[i] = 0.0;
  }
  return x;
}

std::string Space::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case SpaceKind::Circle: os << "circle(L=" << extent_ << ")"; break;
    case SpaceKind::Torus: os << "torus(d=" << dim_ << ", L=" << extent_ << ")"; break;
    case SpaceKind::Interval:
      os << "interval(l=" << extent_ << ", " << (boundary_ == Boundary::Dirichlet ? "dirichlet" : "neumann") << ")";
      break;
    case SpaceKind::ConfinedLine: os << "confined_line(theta=" << theta_ << ", tau=" << tau_ << ")"; break;
  }
  return os.str();
}

nlohmann::json Space::to_json() const {
  switch (kind_) {
    case SpaceKind::Circle: return {{"kind", "circle"}, {"circumference", extent_}};
    case SpaceKind::Torus: return {{"kind", "torus"}, {"dimension", dim_}, {"side", extent_}};
    case SpaceKind::Interval:
      return {{"kind", "interval"},
              {"length", extent_},
              {"boundary", boundary_ == Boundary::Dirichlet ? "dirichlet" : "neumann"}};
    case SpaceKind::ConfinedLine: return {{"kind", "confined_line"}, {"theta", theta_}, {"tau", tau_}};
  }
  return {};
}

Space Space::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) throw SchemaError("space: missing string field 'kind'");
  const std::string kind = j["kind"];
  auto allow = [&](std::initializer_list<const char*> keys) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (it.key() == "kind") continue;
      if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return it.key() == k; }))
        throw SchemaError("space: unknown key '" + it.key() + "' for kind " + kind);
    }
  };
  auto num = [&](const char* key) -> double {
    if (!j.contains(key) || !j[key].is_number()) throw SchemaError(std::string("space: missing numeric field '") + key + "'");
    return j[key].get<double>();
  };
  try {
    if (kind == "circle") {
      allow({"circumference"});
      return circle(num("circumference"));
    }
    if (kind == "torus") {
      allow({"dimension", "side"});
      if (!j.contains("dimension") || !j["dimension"].is_number_integer()) throw SchemaError("space: torus needs integer 'dimension'");
      return torus(j["dimension"].get<int>(), num("side"));
    }
    if (kind == "interval") {
      allow({"length", "boundary"});
      if (!j.contains("boundary") || !j["boundary"].is_string()) throw SchemaError("space: interval needs string 'boundary'");
      const std::string b = j["boundary"];
      if (b != "neumann" && b != "dirichlet") throw SchemaError("space: boundary must be 'neumann' or 'dirichlet'");
      return interval(num("length"), b == "dirichlet" ? Boundary::Dirichlet : Boundary::Neumann);
    }
    if (kind == "confined_line") {
      allow({"theta", "tau"});
      return confined_line(num("theta"), num("tau"));
    }
  } catch (const DomainError& e) {
    throw SchemaError(std::string("space: ") + e.what());
  }
  throw SchemaError("space: unknown kind '" + kind + "'");
}

bool Space::operator==(const Space& o) const {
  return kind_ == o.kind_ && boundary_ == o.boundary_ && dim_ == o.dim_ && extent_ == o.extent_ &&
         theta_ == o.theta_ && tau_ == o.tau_;
}

double metric(const Space& space, const Point& x, const Point& y) { return space.metric(x, y); }

double mu_ball(const Space& space, double r) {
  if (!(r >= 0.0)) throw DomainError("ball radius must be nonnegative");
  const double L = space.extent();
  switch (space.kind()) {
    case SpaceKind::Circle:
    case SpaceKind::Interval:
      return std::min(2.0 * r / L, 1.0);
    case SpaceKind::Torus:
      return std::min(std::pow(2.0 * r / L, space.dimension()), 1.0);
    case SpaceKind::ConfinedLine:
      break;
  }
  throw UnsupportedError("mu_ball is not available on the confined line");
}

double psi_inverse(const Space& space, double s) {
  if (!(s >= 0.0 && s <= 1.0)) throw DomainError("psi_inverse needs s in [0,1]");
  const double L = space.extent();
  switch (space.kind()) {
    case SpaceKind::Circle:
    case SpaceKind::Interval:
      return 0.5 * s * L;
    case SpaceKind::Torus:
      return 0.5 * L * std::pow(s, 1.0 / space.dimension());
    case SpaceKind::ConfinedLine:
      break;
  }
  throw UnsupportedError("psi_inverse is not available on the confined line");
}

Point sample_invariant(const Space& space, RngStream& rng) { return space.sample_invariant(rng); }

}  // namespace ergolab
