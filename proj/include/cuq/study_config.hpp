#pragma once

#include <cstdint>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "cuq/input_model.hpp"
#include "cuq/uq_pipeline.hpp"

namespace cuq {

enum class SurrogateKind { GpTrain, GridFile };
enum class TrueModelKind { Shaft, PlateSynthetic, GridFile };

struct SurrogateConfig {
  SurrogateKind kind = SurrogateKind::GpTrain;
  GpTrainingPlan plan;  // gp_train
  std::string path;     // grid_file

  bool operator==(const SurrogateConfig& o) const;
};

struct TrueModelConfig {
  TrueModelKind kind = TrueModelKind::Shaft;
  std::string path;  // grid_file

  bool operator==(const TrueModelConfig&) const = default;
};

struct McsConfig {
  std::size_t n_samples = 100000;
  std::uint64_t seed = 0;

  bool operator==(const McsConfig&) const = default;
};

/// Output file names, relative to the output directory.
struct OutputConfig {
  std::string report = "report.json";
  std::string sobol_csv = "sobol.csv";
  std::string cdf_csv;       // empty: not written
  std::string pce;           // empty: not written
  std::string training_csv;  // empty: not written

  bool operator==(const OutputConfig&) const = default;
};

struct StudyConfig {
  std::vector<DistributionSpec> inputs;
  SurrogateConfig surrogate;
  std::optional<TrueModelConfig> true_model;
  PceConfig pce;
  std::optional<McsConfig> mcs;
  OutputConfig outputs;
  /// Directory that relative grid-file paths are resolved against.
  std::filesystem::path base_dir;

  bool operator==(const StudyConfig& o) const;
};

/// Throws ConfigError naming the offending key.
StudyConfig parse_config(const nlohmann::json& json, const std::filesystem::path& base_dir = {});
StudyConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const StudyConfig& config);

/// Checks cross-field constraints and referenced files. Throws ConfigError.
void validate_config(const StudyConfig& config);

/// Replaces design, GP-training and MCS seeds with seed, seed+1, seed+2.
void apply_seed_override(StudyConfig& config, std::uint64_t seed);

std::filesystem::path resolve_path(const StudyConfig& config, const std::string& path);

}  // namespace cuq
