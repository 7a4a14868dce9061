#pragma once

// Stratonovich SDE integration: counter-based Wiener paths, the stochastic
// Heun predictor-corrector scheme, and strong-order convergence studies.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace nonholo::sde {

using State = std::vector<double>;

/// Right-hand side of dx = a(x) dt + b(x) o dW with m Wiener channels.
///
/// The evaluator fills drift (d values) and diffusion (d*m values, row-major,
/// diffusion[i*m + c] is the coefficient of channel c in component i) in one
/// call, so models can share intermediate work between the two.
class StratonovichField {
 public:
  using Evaluator =
      std::function<void(std::span<const double> x, std::span<double> drift, std::span<double> diffusion)>;

  StratonovichField(std::size_t dim, std::size_t channels, Evaluator eval, std::string tag = {});

  std::size_t dim() const { return dim_; }
  std::size_t channels() const { return channels_; }
  const std::string& tag() const { return tag_; }

  void evaluate(std::span<const double> x, std::span<double> drift, std::span<double> diffusion) const {
    eval_(x, drift, diffusion);
  }

  State drift(std::span<const double> x) const;
  State diffusion(std::span<const double> x) const;

 private:
  std::size_t dim_;
  std::size_t channels_;
  Evaluator eval_;
  std::string tag_;
};

/// SplitMix64 used as a counter-based generator: output k is
/// mix64(key + k * 0x9E3779B97F4A7C15). Gaussians use the Marsaglia polar
/// method, consuming uniforms in counter order. Streams are bit-identical
/// across platforms with IEEE-754 doubles.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key, std::uint64_t counter = 0) : key_(key), counter_(counter) {}

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double gaussian();

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// SplitMix64 finalizer (a bijection on 64-bit words).
std::uint64_t mix64(std::uint64_t z);

struct WienerPath {
  double dt = 0.0;
  std::size_t n_steps = 0;
  std::size_t channels = 1;
  std::uint64_t seed = 0;
  /// n_steps * channels increments, step-major.
  std::vector<double> increments;

  std::span<const double> step(std::size_t k) const {
    return std::span<const double>(increments).subspan(k * channels, channels);
  }
  /// W(t_k) - W(0) for one channel.
  double cumulative(std::size_t k, std::size_t channel = 0) const;
  /// Coarser path on the same Brownian motion by summing `factor` increments.
  WienerPath coarsen(std::size_t factor) const;
};

/// Increments dW_k ~ Normal(0, dt), i.i.d. per step and channel.
/// Throws InvalidStep when dt <= 0 or n_steps == 0.
WienerPath wiener_path(std::uint64_t seed, std::size_t n_steps, double dt, std::size_t channels = 1);

struct Trajectory {
  std::size_t dim = 0;
  double dt = 0.0;
  std::uint64_t seed = 0;
  std::string tag;
  std::vector<double> times;
  std::vector<double> states;  // times.size() * dim, sample-major

  std::size_t size() const { return times.size(); }
  std::span<const double> state(std::size_t i) const {
    return std::span<const double>(states).subspan(i * dim, dim);
  }
  std::span<const double> back() const { return state(size() - 1); }
};

/// Reusable scratch space for the stochastic Heun scheme
///   x~ = x + a(x) dt + b(x) dW
///   x' = x + (a(x) + a(x~)) dt / 2 + (b(x) + b(x~)) dW / 2
/// which converges to the Stratonovich solution.
class HeunStepper {
 public:
  explicit HeunStepper(const StratonovichField& field);

  /// Advances x in place. Throws NonFiniteState if the result is not finite.
  void step(std::span<double> x, double dt, std::span<const double> dW);

 private:
  const StratonovichField& field_;
  std::vector<double> a0_, b0_, a1_, b1_, predictor_;
};

State heun_step(const StratonovichField& field, std::span<const double> x, double dt, std::span<const double> dW);

struct IntegrateOptions {
  /// Store every stride-th state (the initial state is always stored).
  std::size_t stride = 1;
};

/// Runs heun_step over every increment of the path. Errors raised while
/// stepping are rethrown with the failing step index attached.
Trajectory integrate(const StratonovichField& field, std::span<const double> x0, const WienerPath& path,
                     IntegrateOptions options = {});

/// Integrates in place without recording anything.
void integrate_final(const StratonovichField& field, std::span<double> x, const WienerPath& path);

/// Pathwise reference x(T) computed from the finest Wiener path.
using ReferenceSolution = std::function<State(std::span<const double> x0, const WienerPath& fine)>;

struct OrderStudyOptions {
  double t_final = 1.0;
  std::vector<double> dts;
  std::size_t n_paths = 100;
  std::uint64_t seed = 1;
  /// The reference path uses min(dts) / refine as its step.
  std::size_t refine = 16;
};

struct OrderStudy {
  std::vector<double> dts;
  std::vector<double> errors;  // mean |x_N - x(T)| over paths
  double slope = 0.0;
};

/// Least-squares slope of log(error) against log(dt). Every dt must be an
/// integer multiple of the reference step.
OrderStudy estimate_strong_order(const StratonovichField& field, std::span<const double> x0,
                                 const ReferenceSolution& reference, const OrderStudyOptions& options);

double least_squares_slope(std::span<const double> x, std::span<const double> y);

/// Test problems with pathwise reference solutions.
struct ReferenceProblem {
  std::string name;
  StratonovichField field;
  State x0;
  ReferenceSolution reference;
  OrderStudyOptions options;
};

/// Logistic ODE dx = x(1 - x) dt; closed-form reference.
ReferenceProblem deterministic_reference();
/// Ornstein-Uhlenbeck dx = -x dt + sigma dW; variation-of-constants sum on the fine path.
ReferenceProblem additive_reference();
/// Geometric dx = mu x dt + sigma x o dW; x(T) = x0 exp(mu T + sigma W(T)).
ReferenceProblem multiplicative_reference();

}  // namespace nonholo::sde
