#include "nonholo/sde.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "nonholo/errors.hpp"

namespace nonholo::sde {

StratonovichField::StratonovichField(std::size_t dim, std::size_t channels, Evaluator eval, std::string tag)
    : dim_(dim), channels_(channels), eval_(std::move(eval)), tag_(std::move(tag)) {
  if (dim_ == 0) throw Error(ErrorCode::DimensionMismatch, "field dimension must be positive");
  if (channels_ == 0) throw Error(ErrorCode::DimensionMismatch, "field needs at least one channel");
}

State StratonovichField::drift(std::span<const double> x) const {
  State a(dim_), b(dim_ * channels_);
  eval_(x, a, b);
  return a;
}

State StratonovichField::diffusion(std::span<const double> x) const {
  State a(dim_), b(dim_ * channels_);
  eval_(x, a, b);
  return b;
}

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t CounterRng::next_u64() {
  ++counter_;
  return mix64(key_ + counter_ * 0x9E3779B97F4A7C15ULL);
}

double CounterRng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double CounterRng::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  has_spare_ = true;
  return u * f;
}

double WienerPath::cumulative(std::size_t k, std::size_t channel) const {
  double w = 0.0;
  for (std::size_t i = 0; i < k; ++i) w += increments[i * channels + channel];
  return w;
}

WienerPath WienerPath::coarsen(std::size_t factor) const {
  if (factor == 0 || n_steps % factor != 0) {
    throw Error(ErrorCode::InvalidStep, "coarsening factor must divide the number of steps");
  }
  WienerPath out;
  out.dt = dt * static_cast<double>(factor);
  out.n_steps = n_steps / factor;
  out.channels = channels;
  out.seed = seed;
  out.increments.assign(out.n_steps * channels, 0.0);
  for (std::size_t k = 0; k < out.n_steps; ++k) {
    for (std::size_t j = 0; j < factor; ++j) {
      for (std::size_t c = 0; c < channels; ++c) {
        out.increments[k * channels + c] += increments[(k * factor + j) * channels + c];
      }
    }
  }
  return out;
}

WienerPath wiener_path(std::uint64_t seed, std::size_t n_steps, double dt, std::size_t channels) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(ErrorCode::InvalidStep, "dt must be positive");
  if (n_steps == 0) throw Error(ErrorCode::InvalidStep, "n_steps must be at least 1");
  if (channels == 0) throw Error(ErrorCode::DimensionMismatch, "channels must be at least 1");
  WienerPath path;
  path.dt = dt;
  path.n_steps = n_steps;
  path.channels = channels;
  path.seed = seed;
  path.increments.resize(n_steps * channels);
  CounterRng rng(seed);
  const double scale = std::sqrt(dt);
  for (auto& dw : path.increments) dw = scale * rng.gaussian();
  return path;
}

HeunStepper::HeunStepper(const StratonovichField& field)
    : field_(field),
      a0_(field.dim()),
      b0_(field.dim() * field.channels()),
      a1_(field.dim()),
      b1_(field.dim() * field.channels()),
      predictor_(field.dim()) {}

void HeunStepper::step(std::span<double> x, double dt, std::span<const double> dW) {
  const std::size_t d = field_.dim();
  const std::size_t m = field_.channels();
  if (x.size() != d || dW.size() != m) {
    throw Error(ErrorCode::DimensionMismatch, "state or increment size does not match the field");
  }
  field_.evaluate(x, a0_, b0_);
  for (std::size_t i = 0; i < d; ++i) {
    double noise = 0.0;
    for (std::size_t c = 0; c < m; ++c) noise += b0_[i * m + c] * dW[c];
    predictor_[i] = x[i] + a0_[i] * dt + noise;
  }
  field_.evaluate(predictor_, a1_, b1_);
  for (std::size_t i = 0; i < d; ++i) {
    double noise = 0.0;
    for (std::size_t c = 0; c < m; ++c) noise += (b0_[i * m + c] + b1_[i * m + c]) * dW[c];
    x[i] += 0.5 * (a0_[i] + a1_[i]) * dt + 0.5 * noise;
    if (!std::isfinite(x[i])) {
      throw Error(ErrorCode::NonFiniteState, "component " + std::to_string(i) + " became non-finite");
    }
  }
}

State heun_step(const StratonovichField& field, std::span<const double> x, double dt, std::span<const double> dW) {
  State out(x.begin(), x.end());
  HeunStepper stepper(field);
  stepper.step(out, dt, dW);
  return out;
}

namespace {

[[noreturn]] void rethrow_at_step(const Error& e, std::size_t k) {
  throw Error(e.code(), "at step " + std::to_string(k) + ": " + e.what());
}

}  // namespace

Trajectory integrate(const StratonovichField& field, std::span<const double> x0, const WienerPath& path,
                     IntegrateOptions options) {
  if (x0.size() != field.dim()) throw Error(ErrorCode::DimensionMismatch, "initial state has wrong size");
  if (path.channels != field.channels()) {
    throw Error(ErrorCode::DimensionMismatch, "Wiener path channel count does not match the field");
  }
  const std::size_t stride = options.stride == 0 ? 1 : options.stride;
  Trajectory traj;
  traj.dim = field.dim();
  traj.dt = path.dt;
  traj.seed = path.seed;
  traj.tag = field.tag();
  const std::size_t n_samples = path.n_steps / stride + 1;
  traj.times.reserve(n_samples);
  traj.states.reserve(n_samples * traj.dim);

  State x(x0.begin(), x0.end());
  traj.times.push_back(0.0);
  traj.states.insert(traj.states.end(), x.begin(), x.end());

  HeunStepper stepper(field);
  for (std::size_t k = 0; k < path.n_steps; ++k) {
    try {
      stepper.step(x, path.dt, path.step(k));
    } catch (const Error& e) {
      rethrow_at_step(e, k);
    }
    if ((k + 1) % stride == 0) {
      traj.times.push_back(static_cast<double>(k + 1) * path.dt);
      traj.states.insert(traj.states.end(), x.begin(), x.end());
    }
  }
  return traj;
}

void integrate_final(const StratonovichField& field, std::span<double> x, const WienerPath& path) {
  HeunStepper stepper(field);
  for (std::size_t k = 0; k < path.n_steps; ++k) {
    try {
      stepper.step(x, path.dt, path.step(k));
    } catch (const Error& e) {
      rethrow_at_step(e, k);
    }
  }
}

double least_squares_slope(std::span<const double> x, std::span<const double> y) {
  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

OrderStudy estimate_strong_order(const StratonovichField& field, std::span<const double> x0,
                                 const ReferenceSolution& reference, const OrderStudyOptions& options) {
  if (options.dts.size() < 2) throw Error(ErrorCode::InvalidStep, "order study needs at least two step sizes");
  double dt_min = options.dts.front();
  for (double dt : options.dts) {
    if (!(dt > 0.0)) throw Error(ErrorCode::InvalidStep, "step sizes must be positive");
    dt_min = std::min(dt_min, dt);
  }
  const double fine_dt = dt_min / static_cast<double>(options.refine);
  const auto n_fine = static_cast<std::size_t>(std::llround(options.t_final / fine_dt));

  std::vector<std::size_t> factors;
  for (double dt : options.dts) {
    const double ratio = dt / fine_dt;
    const auto f = static_cast<std::size_t>(std::llround(ratio));
    if (std::abs(ratio - static_cast<double>(f)) > 1e-9 * ratio || n_fine % f != 0) {
      throw Error(ErrorCode::InvalidStep, "dt " + std::to_string(dt) + " is not commensurate with the reference step");
    }
    factors.push_back(f);
  }

  OrderStudy study;
  study.dts = options.dts;
  study.errors.assign(options.dts.size(), 0.0);
  for (std::size_t p = 0; p < options.n_paths; ++p) {
    const WienerPath fine = wiener_path(mix64(options.seed + p), n_fine, fine_dt, field.channels());
    const State exact = reference(x0, fine);
    for (std::size_t i = 0; i < factors.size(); ++i) {
      const WienerPath coarse = fine.coarsen(factors[i]);
      State x(x0.begin(), x0.end());
      integrate_final(field, x, coarse);
      double err2 = 0.0;
      for (std::size_t j = 0; j < x.size(); ++j) err2 += (x[j] - exact[j]) * (x[j] - exact[j]);
      study.errors[i] += std::sqrt(err2);
    }
  }
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < study.errors.size(); ++i) {
    study.errors[i] /= static_cast<double>(options.n_paths);
    lx.push_back(std::log(study.dts[i]));
    ly.push_back(std::log(study.errors[i]));
  }
  study.slope = least_squares_slope(lx, ly);
  return study;
}

ReferenceProblem deterministic_reference() {
  StratonovichField field(
      1, 1,
      [](std::span<const double> x, std::span<double> a, std::span<double> b) {
        a[0] = x[0] * (1.0 - x[0]);
        b[0] = 0.0;
      },
      "logistic");
  ReferenceSolution exact = [](std::span<const double> x0, const WienerPath& fine) {
    const double t = fine.dt * static_cast<double>(fine.n_steps);
    const double e = std::exp(t);
    return State{x0[0] * e / (1.0 - x0[0] + x0[0] * e)};
  };
  OrderStudyOptions opt;
  opt.t_final = 2.0;
  opt.dts = {0.2, 0.1, 0.05, 0.025};
  opt.n_paths = 1;
  opt.refine = 1;
  return {"deterministic", std::move(field), State{0.1}, std::move(exact), opt};
}

ReferenceProblem additive_reference() {
  constexpr double sigma = 0.5;
  StratonovichField field(
      1, 1,
      [](std::span<const double> x, std::span<double> a, std::span<double> b) {
        a[0] = -x[0];
        b[0] = sigma;
      },
      "ornstein-uhlenbeck");
  ReferenceSolution exact = [](std::span<const double> x0, const WienerPath& fine) {
    const double t_final = fine.dt * static_cast<double>(fine.n_steps);
    double noise = 0.0;
    for (std::size_t k = 0; k < fine.n_steps; ++k) {
      const double t_mid = (static_cast<double>(k) + 0.5) * fine.dt;
      noise += std::exp(-(t_final - t_mid)) * fine.increments[k];
    }
    return State{std::exp(-t_final) * x0[0] + sigma * noise};
  };
  OrderStudyOptions opt;
  opt.t_final = 1.0;
  opt.dts = {1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128};
  opt.n_paths = 400;
  opt.refine = 64;
  return {"additive", std::move(field), State{1.0}, std::move(exact), opt};
}

ReferenceProblem multiplicative_reference() {
  constexpr double mu = 0.5;
  constexpr double sigma = 0.8;
  StratonovichField field(
      1, 1,
      [](std::span<const double> x, std::span<double> a, std::span<double> b) {
        a[0] = mu * x[0];
        b[0] = sigma * x[0];
      },
      "geometric");
  ReferenceSolution exact = [](std::span<const double> x0, const WienerPath& fine) {
    const double t = fine.dt * static_cast<double>(fine.n_steps);
    const double w = fine.cumulative(fine.n_steps);
    return State{x0[0] * std::exp(mu * t + sigma * w)};
  };
  OrderStudyOptions opt;
  opt.t_final = 1.0;
  opt.dts = {1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128};
  opt.n_paths = 400;
  opt.refine = 16;
  return {"multiplicative", std::move(field), State{1.0}, std::move(exact), opt};
}

}  // namespace nonholo::sde
