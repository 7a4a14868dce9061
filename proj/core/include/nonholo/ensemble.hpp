#pragma once

// Monte Carlo ensembles of Stratonovich paths.
//
// Path k is driven by wiener_path(derive_seed(master, k), ...). Paths are
// processed in fixed blocks of kBlockSize; each block accumulates its
// moments sequentially and blocks are merged in index order, so every
// statistic is bit-identical for any number of worker threads.

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nonholo/errors.hpp"
#include "nonholo/grid.hpp"
#include "nonholo/sde.hpp"

namespace nonholo::ensemble {

inline constexpr std::size_t kBlockSize = 64;

/// mix64(master + (k + 1) * 0x9E3779B97F4A7C15), the k-th SplitMix64 output
/// for key `master`. Injective in k.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t k);

/// Key of the initial-state stream of path k.
std::uint64_t initial_seed(std::uint64_t master, std::uint64_t k);

enum class FailurePolicy { AbortAll, RecordAndContinue };

struct Functional {
  std::string name;
  std::function<double(std::span<const double> state)> eval;
};

struct EnsembleSpec {
  const sde::StratonovichField* field = nullptr;
  std::vector<double> x0;
  /// Optional random initial state. Path k draws from
  /// CounterRng(initial_seed(master, k)), a stream disjoint from its Wiener path.
  std::function<void(sde::CounterRng& rng, std::span<double> x)> initial;
  std::size_t n_paths = 1;
  std::uint64_t master_seed = 0;
  double dt = 1e-3;
  std::size_t n_steps = 1;
  std::size_t stride = 1;
  FailurePolicy policy = FailurePolicy::RecordAndContinue;
  /// 0 picks std::thread::hardware_concurrency().
  std::size_t threads = 1;
  /// Keep every trajectory (otherwise only final states are kept).
  bool retain = false;
  std::vector<Functional> functionals;
};

struct FunctionalSeries {
  std::string name;
  std::vector<double> times;
  std::vector<double> mean;
  std::vector<double> variance;  ///< unbiased sample variance, 0 for a single path
  std::vector<double> min;
  std::vector<double> max;
  std::size_t count = 0;
};

struct PathFailure {
  std::size_t index = 0;
  ErrorCode code = ErrorCode::NonFiniteState;
  std::string message;
};

struct EnsembleResult {
  std::vector<double> times;
  std::vector<FunctionalSeries> series;
  /// Final states of the completed paths in path order, dim values each.
  std::vector<double> final_states;
  std::vector<std::size_t> completed;
  std::vector<sde::Trajectory> trajectories;  ///< completed paths, if retained
  std::vector<PathFailure> failures;
  std::size_t dim = 0;
};

/// Throws EmptyEnsemble for n_paths == 0. Under AbortAll the first failure
/// (lowest path index) is rethrown with the path index attached.
EnsembleResult run_ensemble(const EnsembleSpec& spec);

/// Exact sample moments of a functional over stored trajectories sharing a
/// time grid. Throws EmptyEnsemble or DimensionMismatch.
FunctionalSeries functional_stats(std::span<const sde::Trajectory> trajectories, const Functional& functional);

/// Density histogram of selected coordinates of states stored back to back
/// (dim values each). Throws EmptyEnsemble or CoverageLow.
Grid3 histogram(std::span<const double> states, std::size_t dim, const std::array<std::size_t, 3>& coords,
                const std::array<Axis, 3>& axes);

/// Moment accumulator (Welford) with Chan's pairwise merge.
struct Moments {
  double n = 0.0;
  double mean = 0.0;
  double m2 = 0.0;
  double min = 0.0;
  double max = 0.0;

  void add(double x);
  void merge(const Moments& other);
  double variance() const { return n > 1.0 ? m2 / (n - 1.0) : 0.0; }
};

}  // namespace nonholo::ensemble
