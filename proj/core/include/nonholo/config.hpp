#pragma once

// Experiment configuration files.
//
// Grammar (one statement per line, UTF-8):
//   # comment                      everything after '#' is ignored
//   [section]                      starts a section
//   key = value                    scalar: number, true/false, bare word or "quoted string"
//   key = [v1, v2, ...]            array of scalars
// Sections: system, initial, noise, integration, ensemble, fp, output.
// Unknown sections or keys and repeated keys are errors.

#include <array>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "nonholo/algebra.hpp"

namespace nonholo::config {

struct SystemConfig {
  /// suslov_det, suslov_type1, suslov_type2, rolling_det, rolling_type1,
  /// rolling_type2, chart_type1, chart_type2
  std::string kind = "suslov_det";
  /// Three principal moments or nine row-major entries.
  std::vector<double> inertia{1.0, 1.0, 1.0};
  double mass = 1.0;
  Vec3 axis{0.0, 0.0, 1.0};
  std::string potential = "zero";  ///< zero, linear, quadratic
  Vec3 chi{};
  double epsilon = 0.0;
  std::string alpha = "constant";  ///< constant, skew (type II: shifted)
  double radius = 1.0;

  friend bool operator==(const SystemConfig&, const SystemConfig&) = default;
};

struct InitialConfig {
  Vec3 omega{};
  Vec3 gamma{0.0, 0.0, 1.0};
  /// Noise state: scalar for Suslov type I (defaults to a . Omega), three
  /// values for Suslov type II and rolling type I, p values for rolling type II.
  std::vector<double> n;
  /// Chart systems: configuration q and free velocities u.
  std::vector<double> q;
  std::vector<double> u;

  friend bool operator==(const InitialConfig&, const InitialConfig&) = default;
};

struct NoiseConfig {
  std::string kind = "off";  ///< off, additive, ou, cross
  std::vector<double> sigma{0.0};
  double theta = 0.0;
  std::string cross = "gamma";  ///< chi, gamma, momentum
  Vec3 g{};
  Vec3 eta{};

  friend bool operator==(const NoiseConfig&, const NoiseConfig&) = default;
};

struct IntegrationConfig {
  double dt = 1e-3;
  double t_final = 1.0;
  std::uint64_t seed = 1;
  std::size_t stride = 1;

  std::size_t n_steps() const;
  friend bool operator==(const IntegrationConfig&, const IntegrationConfig&) = default;
};

struct EnsembleConfig {
  std::size_t n_paths = 100;
  std::size_t threads = 1;
  std::string policy = "record";  ///< record, abort

  friend bool operator==(const EnsembleConfig&, const EnsembleConfig&) = default;
};

struct FpConfig {
  std::array<double, 3> lo{-3.0, -3.0, -3.0};
  std::array<double, 3> hi{3.0, 3.0, 3.0};
  std::array<std::size_t, 3> cells{32, 32, 32};
  /// 0 selects the largest stable step.
  double dt_fp = 0.0;

  friend bool operator==(const FpConfig&, const FpConfig&) = default;
};

struct OutputConfig {
  std::string directory = "out";
  std::string format = "csv";  ///< csv, json
  std::vector<std::string> fields{"energy", "gamma_norm", "constraint"};
  /// Trajectory read by the invariants subcommand; defaults to <directory>/trajectory.csv.
  std::string input;

  friend bool operator==(const OutputConfig&, const OutputConfig&) = default;
};

struct ExperimentConfig {
  SystemConfig system;
  InitialConfig initial;
  NoiseConfig noise;
  IntegrationConfig integration;
  EnsembleConfig ensemble;
  FpConfig fp;
  OutputConfig output;
  /// Sections that appeared in the source text (system is always present).
  std::set<std::string> sections{"system"};

  bool has(std::string_view section) const { return sections.count(std::string(section)) > 0; }
  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Throws ParseError{line} for malformed text and ValidationError{key} for
/// values that violate model invariants.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);

/// Checks physical parameters and cross-field consistency.
void validate(const ExperimentConfig& cfg);

/// Text that parses back to an equal config.
std::string serialize(const ExperimentConfig& cfg);

}  // namespace nonholo::config
