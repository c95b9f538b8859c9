#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ergolab/experiment_harness.hpp"

namespace ergolab {

/// Seed used when a config does not name one.
inline constexpr std::uint64_t kDefaultSeed = 20240607;

/// Experiment kinds accepted in the `experiment` field.
const std::vector<std::string>& experiment_kinds();

/// A validated configuration. `values` holds every field with defaults
/// filled in, so it is also the canonical form hashed into the manifest.
struct ExperimentConfig {
  std::string kind;
  nlohmann::json values;
  std::filesystem::path output_dir;

  std::uint64_t seed() const { return values.at("seed").get<std::uint64_t>(); }

  MomentSpec moment() const;
  QsdSpec qsd() const;
  LimitLawSpec limit_law() const;
  CltSpec clt() const;
  LbSpec lb() const;
  BoundsAuditSpec bounds_audit() const;
};

/// Validates a JSON document against the schema of its experiment kind.
/// Unknown keys, wrong types and out-of-range values throw SchemaError.
ExperimentConfig parse_config(const nlohmann::json& doc);

/// Reads TOML (.toml) or JSON (.json) by extension. A manifest written by
/// `run` is accepted as well and yields the configuration it recorded.
ExperimentConfig load_config(const std::filesystem::path& path);

/// TOML text to JSON (tables, arrays, strings, numbers, booleans).
nlohmann::json toml_to_json(const std::string& text);

/// 64-bit FNV-1a of a byte string, as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace ergolab
