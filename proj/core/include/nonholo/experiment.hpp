#pragma once

// Experiment orchestration behind the command-line tool.
//
// Output files (all numbers at 17 significant digits):
//   trajectory.csv / trajectory.json   simulate
//   stats.csv                          ensemble
//   density.csv, density.bin           fokker-planck, compare-fp-mc
//   invariants.csv                     invariants
//   order.csv                          order-study
//   report.json                        every subcommand
//   error.json                         numerical failures
//
// Trajectory columns: t, state columns, invariant columns. State columns are
//   om1,om2,om3,ga1,ga2,ga3                 Suslov and rolling systems
//   y1,y2,y3                                rolling systems (reconstructed)
//   n  |  n1,n2,n3  |  n1..np               noise state, when present
//   q1,q2,q3,u1,u2,n                        chart systems
//
// density.bin layout (little-endian): 8-byte magic "NHFPDEN1", then for each
// of the three axes {f64 lo, f64 hi, u64 cells}, then the density as f64 in
// grid order (first axis slowest).

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nonholo/config.hpp"
#include "nonholo/errors.hpp"
#include "nonholo/grid.hpp"
#include "nonholo/sde.hpp"

namespace nonholo::experiment {

enum class Subcommand { Simulate, Ensemble, FokkerPlanck, Invariants, CompareFpMc, OrderStudy };

std::optional<Subcommand> parse_subcommand(std::string_view name);
std::string_view to_string(Subcommand cmd);

/// A configured system ready to integrate.
struct Model {
  sde::StratonovichField field;
  std::vector<double> x0;
  /// Names of the state vector entries, in state order.
  std::vector<std::string> state_columns;
  /// Derived columns written after om/ga (the rolling Y), with their values.
  std::vector<std::string> derived_columns;
  std::function<std::vector<double>(std::span<const double> state)> derived;
  /// Named invariant at a state; nullopt when undefined for this system.
  std::function<std::optional<double>(std::span<const double> state, std::string_view name)> invariant;

  /// Column names of a trajectory file row: t, state (with derived columns
  /// inserted after the first six for rolling systems), then `fields`.
  std::vector<std::string> columns(const std::vector<std::string>& fields) const;
  /// Values of one row, matching columns().
  std::vector<double> row(double t, std::span<const double> state, const std::vector<std::string>& fields) const;
};

Model build_model(const config::ExperimentConfig& cfg);

struct RunOptions {
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  /// Receives one-line summaries; may be null.
  std::ostream* log = nullptr;
};

/// Runs a subcommand and writes its files. Throws nonholo::Error on failure.
void run(Subcommand cmd, const config::ExperimentConfig& cfg, const RunOptions& options);

/// Writes error.json describing a failure into `dir` (created if needed).
void write_error_report(const std::string& dir, Subcommand cmd, const Error& error);

void write_trajectory_csv(const std::string& path, const Model& model, const sde::Trajectory& traj,
                          const std::vector<std::string>& fields);
void write_trajectory_json(const std::string& path, const Model& model, const sde::Trajectory& traj,
                           const std::vector<std::string>& fields);

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};
/// Reads a numeric CSV file with a header line. Throws ParseError.
Table read_csv(const std::string& path);

void write_density_csv(const std::string& path, const Grid3& grid);
void write_density_binary(const std::string& path, const Grid3& grid);
Grid3 read_density_binary(const std::string& path);

/// Round-trip decimal formatting (%.17g).
std::string format_double(double v);

}  // namespace nonholo::experiment
