#include "ergolab/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

#include <toml.hpp>

#include "ergolab/errors.hpp"

namespace ergolab {

namespace {

using json = nlohmann::json;

enum class Type { Number, Integer, Bool, String, NumberList, IntegerList, Space, NumberOrList };

struct Field {
  const char* name;
  Type type;
  json fallback;  // null: optional without default
  std::function<void(const json&)> check = {};
};

[[noreturn]] void fail(const std::string& key, const std::string& msg) { throw SchemaError(key + ": " + msg); }

std::function<void(const json&)> positive(const char* key) {
  return [key](const json& v) {
    if (!(v.get<double>() > 0.0)) fail(key, "must be positive");
  };
}
std::function<void(const json&)> at_least(const char* key, double lo) {
  return [key, lo](const json& v) {
    if (!(v.get<double>() >= lo)) {
      std::ostringstream o;
      o << lo;
      fail(key, "must be at least " + o.str());
    }
  };
}
std::function<void(const json&)> fraction(const char* key) {
  return [key](const json& v) {
    const double x = v.get<double>();
    if (!(x > 0.0 && x < 1.0)) fail(key, "must lie in (0, 1)");
  };
}
std::function<void(const json&)> increasing_times(const char* key) {
  return [key](const json& v) {
    if (v.empty()) fail(key, "must not be empty");
    double prev = 0.0;
    for (const auto& x : v) {
      if (!(x.get<double>() > prev)) fail(key, "must be positive and strictly increasing");
      prev = x.get<double>();
    }
  };
}
std::function<void(const json&)> one_of(const char* key, std::vector<std::string> options) {
  return [key, options](const json& v) {
    for (const auto& o : options)
      if (v.get<std::string>() == o) return;
    std::string all;
    for (const auto& o : options) all += (all.empty() ? "" : ", ") + o;
    fail(key, "must be one of " + all);
  };
}

json default_circle() { return Space::circle(2.0 * std::numbers::pi).to_json(); }

std::vector<Field> schema_for(const std::string& kind) {
  std::vector<Field> f{{"experiment", Type::String, json()},
                       {"seed", Type::Integer, json(kDefaultSeed), at_least("seed", 0)},
                       {"output", Type::String, json("ergolab-out")}};
  auto add = [&](std::initializer_list<Field> more) { f.insert(f.end(), more.begin(), more.end()); };
  const Field h{"h", Type::Number, json(1e-3), positive("h")};
  if (kind == "moment") {
    add({{"space", Type::Space, default_circle()},
         {"dynamics", Type::String, json("auto"), one_of("dynamics", {"auto", "degenerate"})},
         {"l", Type::Number, json(3.0), positive("l")},
         {"p", Type::Number, json(2.0), at_least("p", 1.0)},
         {"q", Type::Number, json(2.0), positive("q")},
         {"t_list", Type::NumberList, json::array({200.0}), increasing_times("t_list")},
         {"replicas", Type::Integer, json(400), at_least("replicas", 1)},
         h,
         {"n_max", Type::Integer, json(256), at_least("n_max", 1)},
         {"x0", Type::NumberOrList, json()},
         {"tolerance", Type::Number, json(0.15), fraction("tolerance")},
         {"rate_tolerance", Type::Number, json(0.15), positive("rate_tolerance")},
         {"min_r_squared", Type::Number, json(0.98), fraction("min_r_squared")}});
  } else if (kind == "qsd") {
    add({{"ell", Type::Number, json(std::numbers::pi), positive("ell")},
         {"x0", Type::Number, json()},
         {"t_list", Type::NumberList, json::array({4.0, 6.0}), increasing_times("t_list")},
         {"replicas", Type::Integer, json(100000), at_least("replicas", 1)},
         {"min_survivors", Type::Integer, json(200), at_least("min_survivors", 1)},
         {"path_survivors", Type::Integer, json(4000), at_least("path_survivors", 0)},
         h,
         {"coarse_step", Type::Number, json(0.1), positive("coarse_step")},
         {"bins", Type::Integer, json(16384), at_least("bins", 16)},
         {"n_max", Type::Integer, json(256), at_least("n_max", 1)},
         {"tolerance", Type::Number, json(0.25), fraction("tolerance")},
         {"presize", Type::Bool, json(true)}});
  } else if (kind == "limit-law") {
    add({{"space", Type::Space, default_circle()},
         {"t", Type::Number, json(200.0), positive("t")},
         {"replicas", Type::Integer, json(800), at_least("replicas", 2)},
         {"n_modes", Type::Integer, json(64), at_least("n_modes", 1)},
         h,
         {"alpha", Type::Number, json(0.01), fraction("alpha")},
         {"xi_diagnostic", Type::Bool, json(false)}});
  } else if (kind == "clt") {
    add({{"space", Type::Space, default_circle()},
         {"f_coeffs", Type::NumberList, json::array({0.0, 1.0}),
          [](const json& v) {
            if (v.empty()) fail("f_coeffs", "must not be empty");
          }},
         {"t", Type::Number, json(200.0), positive("t")},
         {"replicas", Type::Integer, json(800), at_least("replicas", 1)},
         h});
  } else if (kind == "lb-consistency") {
    add({{"space", Type::Space, default_circle()},
         {"t", Type::Number, json(10.0), positive("t")},
         {"n_list", Type::IntegerList, json::array({10, 100, 1000}),
          [](const json& v) {
            if (v.empty()) fail("n_list", "must not be empty");
            for (const auto& n : v)
              if (n.get<long long>() < 1) fail("n_list", "entries must be at least 1");
          }},
         {"replicas", Type::Integer, json(200), at_least("replicas", 1)},
         h,
         {"p", Type::Number, json(2.0), at_least("p", 1.0)}});
  } else if (kind == "bounds-audit") {
    add({{"space", Type::Space, default_circle()},
         {"pairs", Type::Integer, json(100), at_least("pairs", 1)},
         {"cells", Type::Integer, json(256), at_least("cells", 8)},
         {"p", Type::Number, json(2.0), at_least("p", 1.0)}});
  } else if (kind == "rate-table") {
    add({{"table", Type::String, json(), one_of("table", {"xi_k", "gamma_d", "t5", "cv51"})},
         {"t_list", Type::NumberList, json(), increasing_times("t_list")},
         {"K", Type::Number, json(), positive("K")},
         {"d", Type::Integer, json(), at_least("d", 1)},
         {"l", Type::Number, json(), positive("l")},
         {"p", Type::Number, json(), positive("p")}});
  } else {
    std::string all;
    for (const auto& k : experiment_kinds()) all += (all.empty() ? "" : ", ") + k;
    fail("experiment", "unknown kind '" + kind + "' (expected one of " + all + ")");
  }
  return f;
}

bool is_number(const json& v) { return v.is_number() && !v.is_boolean(); }

void check_type(const Field& f, const json& v) {
  auto number_list = [&] {
    if (!v.is_array()) return false;
    for (const auto& x : v)
      if (!is_number(x)) return false;
    return true;
  };
  bool ok = false;
  switch (f.type) {
    case Type::Number: ok = is_number(v) && std::isfinite(v.get<double>()); break;
    case Type::Integer: ok = v.is_number_integer(); break;
    case Type::Bool: ok = v.is_boolean(); break;
    case Type::String: ok = v.is_string(); break;
    case Type::NumberList: ok = number_list(); break;
    case Type::IntegerList:
      ok = v.is_array() && std::all_of(v.begin(), v.end(), [](const json& x) { return x.is_number_integer(); });
      break;
    case Type::Space: ok = v.is_object(); break;
    case Type::NumberOrList: ok = is_number(v) || number_list(); break;
  }
  if (!ok) {
    static const char* names[] = {"a number", "an integer", "a boolean", "a string", "a list of numbers",
                                  "a list of integers", "a table", "a number or a list of numbers"};
    fail(f.name, std::string("must be ") + names[static_cast<int>(f.type)]);
  }
}

Point point_of(const json& v) {
  if (v.is_array()) return v.get<std::vector<double>>();
  return Point{v.get<double>()};
}

void require_rate_params(const json& v) {
  const std::string table = v.at("table");
  auto need = [&](const char* key) {
    if (!v.contains(key)) fail(key, "required for table " + table);
  };
  if (table == "xi_k") need("K");
  if (table == "gamma_d" || table == "t5") need("d");
  if (table == "cv51") {
    need("l");
    need("p");
  }
}

}  // namespace

const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds{"moment",         "qsd",          "limit-law", "clt",
                                              "lb-consistency", "bounds-audit", "rate-table"};
  return kinds;
}

ExperimentConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw SchemaError("config must be a table/object");
  if (!doc.contains("experiment") || !doc["experiment"].is_string()) fail("experiment", "missing string field");
  const std::string kind = doc["experiment"];
  const auto fields = schema_for(kind);
  for (auto it = doc.begin(); it != doc.end(); ++it)
    if (std::none_of(fields.begin(), fields.end(), [&](const Field& f) { return it.key() == f.name; }))
      fail(it.key(), "unknown key for experiment '" + kind + "'");

  ExperimentConfig cfg;
  cfg.kind = kind;
  cfg.values = json::object();
  for (const auto& f : fields) {
    json v = doc.contains(f.name) ? doc[f.name] : f.fallback;
    if (v.is_null()) continue;
    check_type(f, v);
    if (f.type == Type::Number && v.is_number_integer()) v = v.get<double>();
    if (f.type == Type::NumberList) v = v.get<std::vector<double>>();
    if (f.type == Type::Space) v = Space::from_json(v).to_json();
    if (f.check) f.check(v);
    cfg.values[f.name] = v;
  }
  if (kind == "rate-table") {
    if (!cfg.values.contains("table")) fail("table", "missing");
    if (!cfg.values.contains("t_list")) fail("t_list", "missing");
    require_rate_params(cfg.values);
  }
  if (kind == "moment" && cfg.values.contains("x0")) {
    const Space s = Space::from_json(cfg.values["space"]);
    const Point x = point_of(cfg.values["x0"]);
    if (int(x.size()) != s.dimension()) fail("x0", "dimension does not match the space");
    try {
      s.check_point(s.canonical(x));
    } catch (const DomainError& e) {
      fail("x0", e.what());
    }
  }
  if (kind == "qsd" && cfg.values.contains("x0")) {
    const double x = cfg.values["x0"], ell = cfg.values["ell"];
    if (!(x > 0.0 && x < ell)) fail("x0", "must lie inside (0, ell)");
  }
  cfg.output_dir = cfg.values["output"].get<std::string>();
  return cfg;
}

MomentSpec ExperimentConfig::moment() const {
  MomentSpec s;
  const auto& v = values;
  s.space = Space::from_json(v["space"]);
  s.dynamics = v["dynamics"] == "degenerate" ? Dynamics::Degenerate : Dynamics::Auto;
  s.l = v["l"];
  s.p = v["p"];
  s.q = v["q"];
  s.t_list = v["t_list"].get<std::vector<double>>();
  s.replicas = v["replicas"];
  s.h = v["h"];
  s.n_max = v["n_max"];
  s.seed = v["seed"];
  if (v.contains("x0")) s.x0 = s.space.canonical(point_of(v["x0"]));
  s.tolerance = v["tolerance"];
  s.rate_tolerance = v["rate_tolerance"];
  s.min_r_squared = v["min_r_squared"];
  return s;
}

QsdSpec ExperimentConfig::qsd() const {
  QsdSpec s;
  const auto& v = values;
  s.ell = v["ell"];
  if (v.contains("x0")) s.x0 = v["x0"].get<double>();
  s.t_list = v["t_list"].get<std::vector<double>>();
  s.replicas = v["replicas"];
  s.min_survivors = v["min_survivors"];
  s.path_survivors = v["path_survivors"];
  s.h = v["h"];
  s.coarse_step = v["coarse_step"];
  s.bins = v["bins"];
  s.n_max = v["n_max"];
  s.seed = v["seed"];
  s.tolerance = v["tolerance"];
  s.presize = v["presize"];
  return s;
}

LimitLawSpec ExperimentConfig::limit_law() const {
  LimitLawSpec s;
  const auto& v = values;
  s.space = Space::from_json(v["space"]);
  s.t = v["t"];
  s.replicas = v["replicas"];
  s.n_modes = v["n_modes"];
  s.h = v["h"];
  s.seed = v["seed"];
  s.alpha = v["alpha"];
  s.xi_diagnostic = v["xi_diagnostic"];
  return s;
}

CltSpec ExperimentConfig::clt() const {
  CltSpec s;
  const auto& v = values;
  s.space = Space::from_json(v["space"]);
  s.f_coeffs = v["f_coeffs"].get<std::vector<double>>();
  s.t = v["t"];
  s.replicas = v["replicas"];
  s.h = v["h"];
  s.seed = v["seed"];
  return s;
}

LbSpec ExperimentConfig::lb() const {
  LbSpec s;
  const auto& v = values;
  s.space = Space::from_json(v["space"]);
  s.t = v["t"];
  s.n_list = v["n_list"].get<std::vector<std::size_t>>();
  s.replicas = v["replicas"];
  s.h = v["h"];
  s.p = v["p"];
  s.seed = v["seed"];
  return s;
}

BoundsAuditSpec ExperimentConfig::bounds_audit() const {
  BoundsAuditSpec s;
  const auto& v = values;
  s.space = Space::from_json(v["space"]);
  s.pairs = v["pairs"];
  s.cells = v["cells"];
  s.p = v["p"];
  s.seed = v["seed"];
  return s;
}

namespace {

json node_to_json(const toml::node& n) {
  if (const auto* t = n.as_table()) {
    json o = json::object();
    for (auto&& [k, v] : *t) o[std::string(k.str())] = node_to_json(v);
    return o;
  }
  if (const auto* a = n.as_array()) {
    json o = json::array();
    for (const auto& v : *a) o.push_back(node_to_json(v));
    return o;
  }
  if (const auto* v = n.as_integer()) return v->get();
  if (const auto* v = n.as_floating_point()) return v->get();
  if (const auto* v = n.as_boolean()) return v->get();
  if (const auto* v = n.as_string()) return v->get();
  throw SchemaError("dates and times are not valid config values");
}

}  // namespace

json toml_to_json(const std::string& text) {
  try {
    return node_to_json(toml::parse(text));
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "TOML parse error at line " << e.source().begin.line << ": " << e.description();
    throw SchemaError(msg.str());
  }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot read config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const auto ext = path.extension().string();
  json doc;
  if (ext == ".toml") {
    doc = toml_to_json(buf.str());
  } else if (ext == ".json") {
    try {
      doc = json::parse(buf.str());
    } catch (const json::parse_error& e) {
      throw SchemaError(std::string("JSON parse error: ") + e.what());
    }
    // a manifest carries the canonical config it was produced from
    if (doc.is_object() && doc.contains("config_hash") && doc.contains("config")) doc = doc["config"];
  } else {
    throw SchemaError("config extension must be .toml or .json");
  }
  return parse_config(doc);
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char out[17];
  std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
  return out;
}

}  // namespace ergolab
