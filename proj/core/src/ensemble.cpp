#include "nonholo/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <thread>

namespace nonholo::ensemble {

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t k) {
  return sde::CounterRng(master, k).next_u64();
}

std::uint64_t initial_seed(std::uint64_t master, std::uint64_t k) {
  return sde::mix64(derive_seed(master, k) ^ 0xD1B54A32D192ED03ULL);
}

void Moments::add(double x) {
  if (n == 0.0) {
    min = max = x;
  } else {
    min = std::min(min, x);
    max = std::max(max, x);
  }
  n += 1.0;
  const double delta = x - mean;
  mean += delta / n;
  m2 += delta * (x - mean);
}

void Moments::merge(const Moments& other) {
  if (other.n == 0.0) return;
  if (n == 0.0) {
    *this = other;
    return;
  }
  const double total = n + other.n;
  const double delta = other.mean - mean;
  mean += delta * other.n / total;
  m2 += other.m2 + delta * delta * n * other.n / total;
  min = std::min(min, other.min);
  max = std::max(max, other.max);
  n = total;
}

namespace {

struct PathOutcome {
  std::size_t index = 0;
  bool ok = false;
  PathFailure failure;
  std::vector<double> values;  // functional-major: values[f * n_samples + s]
  std::vector<double> final_state;
  sde::Trajectory trajectory;
};

struct BlockResult {
  std::vector<Moments> moments;  // [f * n_samples + s]
  std::vector<PathOutcome> paths;
};

std::size_t sample_count(const EnsembleSpec& spec) { return spec.n_steps / spec.stride + 1; }

PathOutcome run_path(const EnsembleSpec& spec, std::size_t k) {
  const sde::StratonovichField& field = *spec.field;
  const std::size_t ns = sample_count(spec);
  const std::size_t nf = spec.functionals.size();
  PathOutcome out;
  out.index = k;
  out.values.resize(nf * ns);
  const std::uint64_t seed = derive_seed(spec.master_seed, k);
  try {
    const sde::WienerPath path = sde::wiener_path(seed, spec.n_steps, spec.dt, field.channels());
    std::vector<double> x = spec.x0;
    if (spec.initial) {
      sde::CounterRng rng(initial_seed(spec.master_seed, k));
      spec.initial(rng, x);
    }
    sde::HeunStepper stepper(field);
    if (spec.retain) {
      out.trajectory.dim = field.dim();
      out.trajectory.dt = spec.dt;
      out.trajectory.seed = seed;
      out.trajectory.tag = field.tag();
    }
    std::size_t sample = 0;
    auto record = [&](std::size_t step) {
      for (std::size_t f = 0; f < nf; ++f) out.values[f * ns + sample] = spec.functionals[f].eval(x);
      if (spec.retain) {
        out.trajectory.times.push_back(static_cast<double>(step) * spec.dt);
        out.trajectory.states.insert(out.trajectory.states.end(), x.begin(), x.end());
      }
      ++sample;
    };
    record(0);
    for (std::size_t s = 0; s < spec.n_steps; ++s) {
      try {
        stepper.step(x, spec.dt, path.step(s));
      } catch (const Error& e) {
        throw Error(e.code(), std::string(e.what()) + " at step " + std::to_string(s));
      }
      if ((s + 1) % spec.stride == 0) record(s + 1);
    }
    out.final_state = std::move(x);
    out.ok = true;
  } catch (const Error& e) {
    out.failure = {k, e.code(), e.what()};
  }
  return out;
}

// Under AbortAll a block stops at its first failure. Blocks are handed out in
// index order and every started block finishes, so the lowest failing path
// index does not depend on scheduling.
BlockResult run_block(const EnsembleSpec& spec, std::size_t block) {
  const std::size_t ns = sample_count(spec);
  const std::size_t nf = spec.functionals.size();
  BlockResult r;
  r.moments.resize(nf * ns);
  const std::size_t begin = block * kBlockSize;
  const std::size_t end = std::min(spec.n_paths, begin + kBlockSize);
  for (std::size_t k = begin; k < end; ++k) {
    PathOutcome p = run_path(spec, k);
    if (p.ok) {
      for (std::size_t i = 0; i < nf * ns; ++i) r.moments[i].add(p.values[i]);
      p.values.clear();
    } else if (spec.policy == FailurePolicy::AbortAll) {
      r.paths.push_back(std::move(p));
      break;
    }
    r.paths.push_back(std::move(p));
  }
  return r;
}

}  // namespace

EnsembleResult run_ensemble(const EnsembleSpec& spec) {
  if (spec.field == nullptr) throw ValidationError("field", "ensemble needs a field");
  if (spec.n_paths == 0) throw Error(ErrorCode::EmptyEnsemble, "n_paths must be at least 1");
  if (spec.x0.size() != spec.field->dim()) throw Error(ErrorCode::DimensionMismatch, "x0 has the wrong size");
  if (!(spec.dt > 0.0) || spec.n_steps == 0) throw Error(ErrorCode::InvalidStep, "dt > 0 and n_steps >= 1 needed");
  if (spec.stride == 0) throw ValidationError("stride", "must be at least 1");

  const std::size_t ns = sample_count(spec);
  const std::size_t nf = spec.functionals.size();
  const std::size_t n_blocks = (spec.n_paths + kBlockSize - 1) / kBlockSize;
  std::size_t threads = spec.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : spec.threads;
  threads = std::min(threads, n_blocks);

  EnsembleResult result;
  result.dim = spec.field->dim();
  for (std::size_t s = 0; s < ns; ++s) result.times.push_back(static_cast<double>(s * spec.stride) * spec.dt);
  std::vector<Moments> total(nf * ns);

  std::atomic<std::size_t> next_block{0};
  std::atomic<bool> abort{false};
  std::mutex mutex;
  std::map<std::size_t, BlockResult> pending;
  std::size_t next_merge = 0;

  auto merge_ready = [&]() {
    // Caller holds the mutex. Blocks are folded strictly in index order.
    for (auto it = pending.find(next_merge); it != pending.end(); it = pending.find(next_merge)) {
      BlockResult& b = it->second;
      for (std::size_t i = 0; i < nf * ns; ++i) total[i].merge(b.moments[i]);
      for (PathOutcome& p : b.paths) {
        if (p.ok) {
          result.completed.push_back(p.index);
          result.final_states.insert(result.final_states.end(), p.final_state.begin(), p.final_state.end());
          if (spec.retain) result.trajectories.push_back(std::move(p.trajectory));
        } else {
          result.failures.push_back(std::move(p.failure));
        }
      }
      pending.erase(it);
      ++next_merge;
    }
  };

  auto worker = [&]() {
    for (;;) {
      if (abort.load()) return;
      const std::size_t block = next_block.fetch_add(1);
      if (block >= n_blocks) return;
      BlockResult r = run_block(spec, block);
      const bool failed = std::any_of(r.paths.begin(), r.paths.end(), [](const PathOutcome& p) { return !p.ok; });
      std::lock_guard lock(mutex);
      pending.emplace(block, std::move(r));
      merge_ready();
      if (failed && spec.policy == FailurePolicy::AbortAll) abort.store(true);
    }
  };

  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  if (!result.failures.empty() && spec.policy == FailurePolicy::AbortAll) {
    const PathFailure& f = result.failures.front();
    throw Error(f.code, "path " + std::to_string(f.index) + ": " + f.message);
  }
  if (result.completed.empty()) {
    throw Error(ErrorCode::EmptyEnsemble, "every path failed; first failure: " + result.failures.front().message);
  }

  for (std::size_t f = 0; f < nf; ++f) {
    FunctionalSeries s;
    s.name = spec.functionals[f].name;
    s.times = result.times;
    s.count = result.completed.size();
    for (std::size_t i = 0; i < ns; ++i) {
      const Moments& m = total[f * ns + i];
      s.mean.push_back(m.mean);
      s.variance.push_back(m.variance());
      s.min.push_back(m.min);
      s.max.push_back(m.max);
    }
    result.series.push_back(std::move(s));
  }
  return result;
}

FunctionalSeries functional_stats(std::span<const sde::Trajectory> trajectories, const Functional& functional) {
  if (trajectories.empty()) throw Error(ErrorCode::EmptyEnsemble, "no trajectories");
  const sde::Trajectory& first = trajectories.front();
  for (const auto& t : trajectories) {
    if (t.times != first.times || t.dim != first.dim) {
      throw Error(ErrorCode::DimensionMismatch, "trajectories do not share a time grid");
    }
  }
  FunctionalSeries s;
  s.name = functional.name;
  s.times = first.times;
  s.count = trajectories.size();
  for (std::size_t i = 0; i < first.size(); ++i) {
    Moments m;
    for (const auto& t : trajectories) m.add(functional.eval(t.state(i)));
    s.mean.push_back(m.mean);
    s.variance.push_back(m.variance());
    s.min.push_back(m.min);
    s.max.push_back(m.max);
  }
  return s;
}

Grid3 histogram(std::span<const double> states, std::size_t dim, const std::array<std::size_t, 3>& coords,
                const std::array<Axis, 3>& axes) {
  if (dim == 0 || states.empty()) throw Error(ErrorCode::EmptyEnsemble, "no states to bin");
  for (std::size_t c : coords) {
    if (c >= dim) throw Error(ErrorCode::DimensionMismatch, "histogram coordinate outside the state");
  }
  const std::size_t n = states.size() / dim;
  std::vector<std::array<double, 3>> points(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t d = 0; d < 3; ++d) points[i][d] = states[i * dim + coords[d]];
  }
  return nonholo::histogram(points, axes);
}

}  // namespace nonholo::ensemble
