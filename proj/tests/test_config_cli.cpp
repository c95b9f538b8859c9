#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "ergolab/cli_runner.hpp"
#include "ergolab/config.hpp"
#include "ergolab/errors.hpp"

using namespace ergolab;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("ergolab-test-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

int cli(std::vector<std::string> args, std::string* out_text = nullptr, std::string* err_text = nullptr) {
  args.insert(args.begin(), "ergolab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(int(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str();
  if (err_text) *err_text = err.str();
  return code;
}

// the run finished and wrote artifacts; tiny runs may fail their rate checks
bool completed(int code) { return code == kExitOk || code == kExitFail; }

fs::path configs_dir() {
  const char* env = std::getenv("ERGOLAB_CONFIGS");
  return env ? fs::path(env) : fs::path("configs");
}

json quick_moment(const fs::path& out) {
  return {{"experiment", "moment"}, {"seed", 3},       {"output", out.string()}, {"t_list", {5.0, 10.0, 20.0}},
          {"replicas", 12},         {"h", 0.01}};
}

}  // namespace

TEST_CASE("defaults are filled in and the canonical form is stable") {
  const auto cfg = parse_config({{"experiment", "moment"}});
  CHECK(cfg.kind == "moment");
  CHECK(cfg.seed() == kDefaultSeed);
  CHECK(cfg.values["replicas"] == 400);
  CHECK(cfg.values["space"]["kind"] == "circle");
  const auto spec = cfg.moment();
  CHECK(spec.space.extent() == doctest::Approx(2.0 * std::numbers::pi));
  CHECK(spec.t_list == std::vector<double>{200.0});
  CHECK(parse_config(cfg.values).values == cfg.values);
  // integers given for real-valued fields are normalized
  CHECK(parse_config({{"experiment", "moment"}, {"p", 2}}).values["p"].is_number_float());
}

TEST_CASE("schema violations raise SchemaError") {
  auto bad = [](json doc) { CHECK_THROWS_AS(parse_config(doc), SchemaError); };
  bad({{"experiment", "moment"}, {"replicas", 0}});
  bad({{"experiment", "moment"}, {"replicas", 2.5}});
  bad({{"experiment", "moment"}, {"colour", "red"}});
  bad({{"experiment", "moment"}, {"t_list", {10.0, 5.0}}});
  bad({{"experiment", "moment"}, {"t_list", json::array()}});
  bad({{"experiment", "moment"}, {"h", -1.0}});
  bad({{"experiment", "moment"}, {"p", 0.5}});
  bad({{"experiment", "moment"}, {"dynamics", "ballistic"}});
  bad({{"experiment", "moment"}, {"space", {{"kind", "sphere"}}}});
  bad({{"experiment", "moment"}, {"space", {{"kind", "circle"}, {"circumference", 1.0}, {"radius", 1.0}}}});
  bad({{"experiment", "moment"}, {"x0", {0.1, 0.2}}});
  bad({{"experiment", "qsd"}, {"x0", 5.0}});
  bad({{"experiment", "limit-law"}, {"replicas", 1}});
  bad({{"experiment", "rate-table"}, {"table", "xi_k"}, {"t_list", {1.0}}});
  bad({{"experiment", "teleport"}});
  bad({{"seed", 1}});
  bad(json::array());
}

TEST_CASE("TOML maps onto the same document as JSON") {
  const auto j = toml_to_json(R"(
experiment = "clt"
f_coeffs = [0.0, 1.0]
replicas = 10
[space]
kind = "interval"
length = 3.0
boundary = "neumann"
)");
  CHECK(j["experiment"] == "clt");
  CHECK(j["replicas"] == 10);
  CHECK(j["space"]["boundary"] == "neumann");
  const auto cfg = parse_config(j);
  CHECK(cfg.clt().space == Space::interval(3.0, Boundary::Neumann));
  CHECK_THROWS_AS(toml_to_json("experiment = "), SchemaError);
  CHECK_THROWS_AS(toml_to_json("when = 1979-05-27"), SchemaError);
}

TEST_CASE("config files are detected by extension") {
  const auto dir = scratch_dir("ext");
  write(dir / "a.toml", "experiment = \"bounds-audit\"\npairs = 3\n");
  write(dir / "a.json", R"({"experiment": "bounds-audit", "pairs": 3})");
  write(dir / "a.yaml", "experiment: bounds-audit\n");
  CHECK(load_config(dir / "a.toml").values == load_config(dir / "a.json").values);
  CHECK_THROWS_AS(load_config(dir / "a.yaml"), SchemaError);
  CHECK_THROWS_AS(load_config(dir / "missing.toml"), SchemaError);
}

TEST_CASE("FNV-1a reference values") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
  CHECK(fnv1a_hex("foobar") == "85944171f73967e8");
}

TEST_CASE("rate tables") {
  const std::vector<double> ts{4.0, 16.0, 64.0};
  const auto xi = rate_table({"xi_k", 1.5}, ts);
  CHECK(xi[0] == doctest::Approx(0.5));
  CHECK(xi[1] == doctest::Approx(0.25));
  CHECK(xi[2] == doctest::Approx(0.125));
  CHECK(rate_table({"t5", 0.0, 4}, {std::numbers::e - 1.0})[0] == doctest::Approx(0.582).epsilon(1e-3));
  CHECK(rate_table({"cv51", 0.0, 0, 6.0, 4.0}, {16.0})[0] == doctest::Approx(0.3299).epsilon(1e-3));
  CHECK(rate_table_csv({"xi_k", 1.5}, ts) == "t,value\n4,0.5\n16,0.25\n64,0.125\n");
  std::string out;
  CHECK(cli({"rate-table", "--table", "xi_k", "--K", "1.5", "--t", "4,16,64"}, &out) == kExitOk);
  CHECK(out == "t,value\n4,0.5\n16,0.25\n64,0.125\n");
  CHECK(cli({"rate-table", "--table", "nope", "--t", "1"}) == kExitSchema);
}

TEST_CASE("replicas = 0 exits with the schema code") {
  const auto dir = scratch_dir("zero");
  write(dir / "zero.toml", "experiment = \"moment\"\nreplicas = 0\n");
  std::string err;
  CHECK(cli({"run", (dir / "zero.toml").string()}, nullptr, &err) == kExitSchema);
  CHECK(err.find("replicas") != std::string::npos);
  CHECK(cli({"validate", (dir / "zero.toml").string()}) == kExitSchema);
  CHECK_FALSE(fs::exists(dir / "ergolab-out"));
  // the installed binary reports the same code to the shell
  if (const char* bin = std::getenv("ERGOLAB_CLI")) {
    const std::string cmd = std::string(bin) + " run " + (dir / "zero.toml").string() + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    CHECK(WEXITSTATUS(status) == kExitSchema);
  }
}

TEST_CASE("same config and seed give a byte-identical report") {
  const auto dir = scratch_dir("determinism");
  write(dir / "a.json", quick_moment(dir / "a").dump());
  write(dir / "b.json", quick_moment(dir / "b").dump());
  CHECK(completed(cli({"run", "-q", (dir / "a.json").string()})));
  CHECK(completed(cli({"run", "-q", (dir / "b.json").string()})));
  CHECK(slurp(dir / "a" / "report.json") == slurp(dir / "b" / "report.json"));
  CHECK(slurp(dir / "a" / "series.csv") == slurp(dir / "b" / "series.csv"));
  for (const char* f : {"report.json", "series.csv", "series.dat", "manifest.json"}) CHECK(fs::exists(dir / "a" / f));
  // a seed override changes the numbers
  CHECK(completed(cli({"run", "-q", "--seed", "4", "-o", (dir / "c").string(), (dir / "a.json").string()})));
  CHECK(slurp(dir / "a" / "report.json") != slurp(dir / "c" / "report.json"));
}

TEST_CASE("manifest records the run and re-runs to the same report") {
  const auto dir = scratch_dir("manifest");
  write(dir / "cfg.json", quick_moment(dir / "first").dump());
  REQUIRE(completed(cli({"run", "-q", (dir / "cfg.json").string()})));
  const auto manifest = json::parse(slurp(dir / "first" / "manifest.json"));
  const auto cfg = load_config(dir / "cfg.json");
  CHECK(manifest["config_hash"] == fnv1a_hex(cfg.values.dump()));
  CHECK(manifest["seed"] == 3);
  CHECK(manifest["version"] == ERGOLAB_VERSION);
  CHECK(manifest.contains("timestamp"));
  CHECK(manifest["runtime_seconds"].get<double>() >= 0.0);
  REQUIRE(completed(cli({"run", "-q", "-o", (dir / "second").string(), (dir / "first" / "manifest.json").string()})));
  CHECK(slurp(dir / "first" / "report.json") == slurp(dir / "second" / "report.json"));
}

TEST_CASE("report and CSV layout") {
  const auto dir = scratch_dir("layout");
  write(dir / "cfg.json", quick_moment(dir / "out").dump());
  std::string out;
  REQUIRE(completed(cli({"run", (dir / "cfg.json").string()}, &out)));
  CHECK(out.find("verdict:") != std::string::npos);
  const auto csv = slurp(dir / "out" / "series.csv");
  CHECK(csv.rfind("t,estimate,ci_low,ci_high,target,ratio,verdict\n", 0) == 0);
  const auto report = json::parse(slurp(dir / "out" / "report.json"));
  CHECK(report["kind"] == "moment");
  CHECK(report["rows"].size() == 3);
  CHECK_FALSE(report.contains("runtime_seconds"));
  CHECK(report["fit"]["r_squared"].get<double>() <= 1.0);
}

TEST_CASE("bundled circle config targets the circle constant") {
  auto cfg = load_config(configs_dir() / "circle-limit.toml");
  CHECK(cfg.values["replicas"] == 400);
  CHECK(cfg.values["t_list"] == json({100.0, 200.0}));
  // a reduced run of the same config
  const auto dir = scratch_dir("bundled");
  auto doc = cfg.values;
  doc["replicas"] = 4;
  doc["h"] = 0.01;
  doc["t_list"] = {10.0, 20.0};
  doc["output"] = (dir / "out").string();
  write(dir / "cfg.json", doc.dump());
  REQUIRE(completed(cli({"run", "-q", (dir / "cfg.json").string()})));
  std::istringstream csv(slurp(dir / "out" / "series.csv"));
  std::string line;
  std::getline(csv, line);
  int rows = 0;
  while (std::getline(csv, line)) {
    std::vector<std::string> cols;
    std::stringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cols.push_back(c);
    REQUIRE(cols.size() == 7);
    CHECK(std::stod(cols[4]) == doctest::Approx(2.0 * std::pow(std::numbers::pi, 4) / 45.0).epsilon(1e-7));
    ++rows;
  }
  CHECK(rows == 2);
}

TEST_CASE("every bundled config validates") {
  int n = 0;
  for (const auto& e : fs::directory_iterator(configs_dir())) {
    CAPTURE(e.path().string());
    CHECK(cli({"validate", e.path().string()}) == kExitOk);
    ++n;
  }
  CHECK(n >= 8);
}

TEST_CASE("list-experiments and usage errors") {
  std::string out;
  CHECK(cli({"list-experiments"}, &out) == kExitOk);
  for (const auto& k : experiment_kinds()) CHECK(out.find(k) != std::string::npos);
  CHECK(cli({}) == kExitSchema);
  CHECK(cli({"run"}) == kExitSchema);
}

TEST_CASE("compute failures exit with code 3") {
  const auto dir = scratch_dir("compute");
  // t/(N h) is not an integer: the experiment rejects it after validation
  write(dir / "lb.json", json{{"experiment", "lb-consistency"},
                              {"t", 1.0},
                              {"n_list", {3}},
                              {"replicas", 2},
                              {"h", 0.01},
                              {"output", (dir / "out").string()}}
                             .dump());
  CHECK(cli({"run", (dir / "lb.json").string()}) == kExitCompute);
}

TEST_CASE("a failing verdict exits with code 1") {
  const auto dir = scratch_dir("fail");
  write(dir / "ks.json", json{{"experiment", "limit-law"},
                              {"t", 50.0},
                              {"replicas", 300},
                              {"n_modes", 1},
                              {"h", 0.01},
                              {"seed", 17},
                              {"output", (dir / "out").string()}}
                             .dump());
  CHECK(cli({"run", "-q", (dir / "ks.json").string()}) == kExitFail);
}
