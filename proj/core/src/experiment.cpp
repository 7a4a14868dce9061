#include "nonholo/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fmt/format.h>
#include <fstream>
#include <memory>
#include <nlohmann/json.hpp>
#include <ostream>
#include <sstream>

#include "nonholo/ensemble.hpp"
#include "nonholo/fokker_planck.hpp"
#include "nonholo/lda_local.hpp"
#include "nonholo/rolling.hpp"
#include "nonholo/suslov.hpp"

namespace nonholo::experiment {

namespace fs = std::filesystem;
using config::ExperimentConfig;
using json = nlohmann::ordered_json;

namespace {

constexpr int kSchemaVersion = 1;

struct SubcommandName {
  Subcommand cmd;
  std::string_view name;
};

constexpr SubcommandName kSubcommands[] = {
    {Subcommand::Simulate, "simulate"},         {Subcommand::Ensemble, "ensemble"},
    {Subcommand::FokkerPlanck, "fokker-planck"}, {Subcommand::Invariants, "invariants"},
    {Subcommand::CompareFpMc, "compare-fp-mc"}, {Subcommand::OrderStudy, "order-study"},
};

}  // namespace

std::optional<Subcommand> parse_subcommand(std::string_view name) {
  for (const auto& s : kSubcommands) {
    if (s.name == name) return s.cmd;
  }
  return std::nullopt;
}

std::string_view to_string(Subcommand cmd) {
  for (const auto& s : kSubcommands) {
    if (s.cmd == cmd) return s.name;
  }
  return "unknown";
}

std::string format_double(double v) { return fmt::format("{:.17g}", v); }

std::vector<std::string> Model::columns(const std::vector<std::string>& fields) const {
  std::vector<std::string> cols{"t"};
  const std::size_t split = derived_columns.empty() ? state_columns.size() : 6;
  cols.insert(cols.end(), state_columns.begin(), state_columns.begin() + split);
  cols.insert(cols.end(), derived_columns.begin(), derived_columns.end());
  cols.insert(cols.end(), state_columns.begin() + split, state_columns.end());
  cols.insert(cols.end(), fields.begin(), fields.end());
  return cols;
}

std::vector<double> Model::row(double t, std::span<const double> state, const std::vector<std::string>& fields) const {
  std::vector<double> r{t};
  const std::size_t split = derived_columns.empty() ? state.size() : 6;
  r.insert(r.end(), state.begin(), state.begin() + split);
  if (!derived_columns.empty()) {
    const auto d = derived(state);
    r.insert(r.end(), d.begin(), d.end());
  }
  r.insert(r.end(), state.begin() + split, state.end());
  for (const auto& f : fields) {
    const auto v = invariant(state, f);
    r.push_back(v ? *v : std::nan(""));
  }
  return r;
}

namespace {

InertiaTensor make_inertia(const std::vector<double>& v) {
  if (v.size() == 3) return InertiaTensor::diagonal(v[0], v[1], v[2]);
  Mat3 m;
  for (std::size_t i = 0; i < 9; ++i) m.m[i] = v[i];
  return InertiaTensor(m);
}

suslov::Potential make_potential(const config::SystemConfig& sys) {
  if (sys.potential == "linear") return suslov::Potential::linear(sys.chi);
  if (sys.potential == "quadratic") return suslov::Potential::quadratic_ct(sys.epsilon);
  return suslov::Potential::zero();
}

Vec3 to_vec3(const std::vector<double>& v) { return {v.at(0), v.at(1), v.at(2)}; }

std::vector<std::string> numbered(const std::string& prefix, std::size_t n) {
  std::vector<std::string> names;
  for (std::size_t i = 1; i <= n; ++i) names.push_back(prefix + std::to_string(i));
  return names;
}

std::vector<std::string> body_columns() { return {"om1", "om2", "om3", "ga1", "ga2", "ga3"}; }

std::vector<double> body_state(const config::InitialConfig& ini) {
  return {ini.omega.x, ini.omega.y, ini.omega.z, ini.gamma.x, ini.gamma.y, ini.gamma.z};
}

suslov::SuslovParams make_suslov_params(const ExperimentConfig& cfg) {
  suslov::SuslovParams params;
  params.inertia = make_inertia(cfg.system.inertia);
  params.axis = cfg.system.axis;
  params.potential = make_potential(cfg.system);
  return params;
}

Model suslov_model(const ExperimentConfig& cfg) {
  const suslov::SuslovParams params = make_suslov_params(cfg);
  const auto& nz = cfg.noise;
  const auto& kind = cfg.system.kind;

  std::vector<double> x0 = body_state(cfg.initial);
  std::vector<std::string> cols = body_columns();
  suslov::ConstraintType type = suslov::ConstraintType::Deterministic;
  std::optional<sde::StratonovichField> field;
  if (kind == "suslov_det") {
    field = suslov::det_field(params);
  } else if (kind == "suslov_type1") {
    type = suslov::ConstraintType::I;
    const double n0 = cfg.initial.n.empty() ? dot(params.axis, cfg.initial.omega) : cfg.initial.n[0];
    x0.push_back(n0);
    cols.push_back("n");
    suslov::ScalarNoise noise = suslov::ScalarNoise::constant();
    if (nz.kind == "additive") noise = suslov::ScalarNoise::ornstein_uhlenbeck(0.0, nz.sigma.at(0));
    if (nz.kind == "ou") noise = suslov::ScalarNoise::ornstein_uhlenbeck(nz.theta, nz.sigma.at(0));
    field = suslov::type1_field(params, std::move(noise));
  } else {
    type = suslov::ConstraintType::II;
    const Vec3 n0 = to_vec3(cfg.initial.n);
    x0.insert(x0.end(), {n0.x, n0.y, n0.z});
    const auto ncols = numbered("n", 3);
    cols.insert(cols.end(), ncols.begin(), ncols.end());
    suslov::VectorNoise noise = suslov::VectorNoise::constant();
    if (nz.kind == "additive") noise = suslov::VectorNoise::ornstein_uhlenbeck(0.0, to_vec3(nz.sigma));
    if (nz.kind == "ou") noise = suslov::VectorNoise::ornstein_uhlenbeck(nz.theta, to_vec3(nz.sigma));
    if (nz.kind == "cross") {
      const suslov::CrossKind ck = nz.cross == "chi"     ? suslov::CrossKind::Chi
                                   : nz.cross == "gamma" ? suslov::CrossKind::Gamma
                                                         : suslov::CrossKind::Momentum;
      noise = suslov::cross_noise(ck, nz.g, nz.eta, params);
    }
    field = suslov::type2_field(params, std::move(noise), suslov::noise_floor_for(n0));
  }
  return Model{std::move(*field), std::move(x0), std::move(cols), {}, {},
               [params, type](std::span<const double> state, std::string_view name) {
                 return suslov::invariant_by_name(suslov::invariants_report(params, state, type), name);
               }};
}

Model rolling_model(const ExperimentConfig& cfg) {
  rolling::RollingParams params;
  params.inertia = make_inertia(cfg.system.inertia);
  params.mass = cfg.system.mass;
  params.potential = make_potential(cfg.system);
  const double r = cfg.system.radius;
  params.alpha = cfg.system.alpha == "skew" ? rolling::skew_alpha(r) : rolling::constant_alpha(r);
  const auto& kind = cfg.system.kind;
  const auto& nz = cfg.noise;

  std::vector<double> x0 = body_state(cfg.initial);
  std::vector<std::string> cols = body_columns();
  std::optional<sde::StratonovichField> field;
  std::function<Vec3(std::span<const double>)> y_of;
  std::function<Vec3(std::span<const double>)> residual;
  auto noise_model = [&](std::size_t size) {
    if (nz.kind == "additive") return rolling::NoiseModel::additive(nz.sigma);
    if (nz.kind == "ou") return rolling::NoiseModel::ornstein_uhlenbeck(nz.theta, nz.sigma);
    return rolling::NoiseModel::additive(std::vector<double>(size, 0.0));
  };
  if (kind == "rolling_det") {
    field = rolling::det_field(params);
    y_of = [params](std::span<const double> s) { return params.alpha(load3(s, 3)) * load3(s, 0); };
  } else if (kind == "rolling_type1") {
    const std::vector<double> n0 = cfg.initial.n.empty() ? std::vector<double>(3, 0.0) : cfg.initial.n;
    x0.insert(x0.end(), n0.begin(), n0.end());
    const auto ncols = numbered("n", 3);
    cols.insert(cols.end(), ncols.begin(), ncols.end());
    field = rolling::type1_field(params, noise_model(3));
    y_of = [params](std::span<const double> s) { return rolling::reconstruct_y_type1(params, s); };
  } else {
    const std::vector<double> n0 = cfg.initial.n.empty() ? std::vector<double>(1, 0.0) : cfg.initial.n;
    params.noise_dim = n0.size();
    if (cfg.system.alpha == "shifted") {
      params.alpha_tilde = rolling::shifted_alpha(r);
    } else {
      const rolling::AlphaFn a = params.alpha;
      params.alpha_tilde = [a](const Vec3& g, std::span<const double>) { return a(g); };
    }
    x0.insert(x0.end(), n0.begin(), n0.end());
    const auto ncols = numbered("n", n0.size());
    cols.insert(cols.end(), ncols.begin(), ncols.end());
    field = rolling::type2_field(params, noise_model(n0.size()));
    y_of = [params](std::span<const double> s) { return rolling::reconstruct_y_type2(params, s); };
  }
  auto derived = [y_of](std::span<const double> s) {
    const Vec3 y = y_of(s);
    return std::vector<double>{y.x, y.y, y.z};
  };
  auto invariant = [params, y_of](std::span<const double> s, std::string_view name) -> std::optional<double> {
    const Vec3 om = load3(s, 0), ga = load3(s, 3);
    if (name == "energy") return rolling::energy(params, om, y_of(s), ga);
    if (name == "gamma_norm") return dot(ga, ga);
    if (name == "lagrange") return dot(params.inertia.apply(om), ga);
    // Y is reconstructed from the constraint, so the residual is zero by construction.
    if (name == "constraint") return 0.0;
    return std::nullopt;
  };
  return Model{std::move(*field), std::move(x0), std::move(cols), {"y1", "y2", "y3"}, derived, invariant};
}

Model chart_model(const ExperimentConfig& cfg) {
  const bool affine = cfg.system.kind == "chart_type1";
  const auto kind = affine ? lda::ConstraintKind::Affine : lda::ConstraintKind::Ideal;
  const auto& nz = cfg.noise;
  const double theta = nz.kind == "ou" ? nz.theta : 0.0;
  const double sigma = nz.kind == "off" ? 0.0 : nz.sigma.at(0);
  auto sys = std::make_shared<const lda::ChartSystem>(lda::nonholonomic_particle(kind, theta, sigma));
  const auto& ini = cfg.initial;
  std::vector<double> x0 = ini.q.empty() ? std::vector<double>(3, 0.0) : ini.q;
  const std::vector<double> u = ini.u.empty() ? std::vector<double>(2, 0.0) : ini.u;
  x0.insert(x0.end(), u.begin(), u.end());
  x0.push_back(ini.n.empty() ? 0.0 : ini.n[0]);
  std::vector<std::string> cols{"q1", "q2", "q3", "u1", "u2", "n"};
  auto field = affine ? lda::type1_field(sys) : lda::type2_field(sys);
  auto invariant = [sys, kind](std::span<const double> s, std::string_view name) -> std::optional<double> {
    const auto q = s.subspan(0, 3), u = s.subspan(3, 2), n = s.subspan(5, 1);
    const auto v = lda::constrained_velocity(*sys, kind, q, u, n);
    if (name == "energy") return lda::energy(*sys, q, v);
    if (name == "constraint") return lda::constraint_residual(*sys, kind, q, v, n).at(0);
    return std::nullopt;
  };
  return Model{std::move(field), std::move(x0), std::move(cols), {}, {}, invariant};
}

}  // namespace

Model build_model(const ExperimentConfig& cfg) {
  config::validate(cfg);
  const auto& kind = cfg.system.kind;
  if (kind.rfind("suslov", 0) == 0) return suslov_model(cfg);
  if (kind.rfind("rolling", 0) == 0) return rolling_model(cfg);
  return chart_model(cfg);
}

namespace {

std::ofstream open_out(const std::string& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path + "'");
  return out;
}

void write_json(const std::string& path, const json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

void write_csv_row(std::ostream& out, const std::vector<double>& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out << ',';
    out << format_double(row[i]);
  }
  out << '\n';
}

void write_csv_header(std::ostream& out, const std::vector<std::string>& cols) {
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
}

void check_fields(const Model& model, const std::vector<std::string>& fields, const std::string& kind) {
  for (const auto& f : fields) {
    if (!model.invariant(model.x0, f)) {
      throw ValidationError("output.fields", "invariant '" + f + "' is not defined for " + kind);
    }
  }
}

}  // namespace

void write_trajectory_csv(const std::string& path, const Model& model, const sde::Trajectory& traj,
                          const std::vector<std::string>& fields) {
  auto out = open_out(path);
  write_csv_header(out, model.columns(fields));
  for (std::size_t i = 0; i < traj.size(); ++i) write_csv_row(out, model.row(traj.times[i], traj.state(i), fields));
}

void write_trajectory_json(const std::string& path, const Model& model, const sde::Trajectory& traj,
                           const std::vector<std::string>& fields) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["tag"] = traj.tag;
  j["seed"] = traj.seed;
  j["dt"] = traj.dt;
  j["columns"] = model.columns(fields);
  json rows = json::array();
  for (std::size_t i = 0; i < traj.size(); ++i) rows.push_back(model.row(traj.times[i], traj.state(i), fields));
  j["rows"] = std::move(rows);
  write_json(path, j);
}

Table read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  Table table;
  std::string line;
  std::size_t line_no = 0;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(item);
    return out;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (table.columns.empty()) {
      table.columns = split(line);
      continue;
    }
    const auto items = split(line);
    if (items.size() != table.columns.size()) throw ParseError(line_no, "row width differs from the header");
    std::vector<double> row;
    for (const auto& s : items) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(s, &used));
        if (used != s.size()) throw std::invalid_argument(s);
      } catch (const std::exception&) {
        throw ParseError(line_no, "not a number: '" + s + "'");
      }
    }
    table.rows.push_back(std::move(row));
  }
  if (table.columns.empty()) throw ParseError(1, "empty CSV file");
  return table;
}

void write_density_csv(const std::string& path, const Grid3& grid) {
  auto out = open_out(path);
  out << "x1,x2,x3,p\n";
  for (std::size_t c = 0; c < grid.size(); ++c) {
    const auto x = grid.center(c);
    write_csv_row(out, {x[0], x[1], x[2], grid.density()[c]});
  }
}

namespace {
constexpr char kDensityMagic[8] = {'N', 'H', 'F', 'P', 'D', 'E', 'N', '1'};
}

void write_density_binary(const std::string& path, const Grid3& grid) {
  auto out = open_out(path, true);
  out.write(kDensityMagic, 8);
  for (const Axis& a : grid.axes()) {
    const std::uint64_t cells = a.cells;
    out.write(reinterpret_cast<const char*>(&a.lo), 8);
    out.write(reinterpret_cast<const char*>(&a.hi), 8);
    out.write(reinterpret_cast<const char*>(&cells), 8);
  }
  out.write(reinterpret_cast<const char*>(grid.density().data()),
            static_cast<std::streamsize>(grid.size() * sizeof(double)));
}

Grid3 read_density_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kDensityMagic, 8) != 0) throw Error(ErrorCode::Io, "not a density file");
  std::array<Axis, 3> axes;
  for (Axis& a : axes) {
    std::uint64_t cells = 0;
    in.read(reinterpret_cast<char*>(&a.lo), 8);
    in.read(reinterpret_cast<char*>(&a.hi), 8);
    in.read(reinterpret_cast<char*>(&cells), 8);
    a.cells = cells;
  }
  if (!in) throw Error(ErrorCode::Io, "truncated density header");
  Grid3 grid(axes);
  in.read(reinterpret_cast<char*>(grid.density().data()), static_cast<std::streamsize>(grid.size() * sizeof(double)));
  if (!in) throw Error(ErrorCode::Io, "truncated density data");
  return grid;
}

void write_error_report(const std::string& dir, Subcommand cmd, const Error& error) {
  fs::create_directories(dir);
  json j;
  j["schema_version"] = kSchemaVersion;
  j["subcommand"] = std::string(to_string(cmd));
  j["code"] = std::string(nonholo::to_string(error.code()));
  j["message"] = error.what();
  j["exit_code"] = error.is_numerical() ? 2 : 1;
  write_json((fs::path(dir) / "error.json").string(), j);
}

namespace {

struct Context {
  const ExperimentConfig& cfg;
  std::string dir;
  std::uint64_t seed;
  std::size_t threads;
  std::ostream* log;

  std::string path(const std::string& name) const { return (fs::path(dir) / name).string(); }
  void say(const std::string& line) const {
    if (log) *log << line << '\n';
  }
};

json report_header(const Context& ctx, Subcommand cmd) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["subcommand"] = std::string(to_string(cmd));
  j["system"] = ctx.cfg.system.kind;
  j["seed"] = ctx.seed;
  return j;
}

void require(const ExperimentConfig& cfg, std::initializer_list<const char*> sections, Subcommand cmd) {
  for (const char* s : sections) {
    if (!cfg.has(s)) {
      throw ValidationError(s, fmt::format("section [{}] is required by {}", s, to_string(cmd)));
    }
  }
}

void run_simulate(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  const Model model = build_model(cfg);
  check_fields(model, cfg.output.fields, cfg.system.kind);
  const auto& in = cfg.integration;
  const auto path = sde::wiener_path(ctx.seed, in.n_steps(), in.dt, model.field.channels());
  const auto traj = sde::integrate(model.field, model.x0, path, {in.stride});
  if (cfg.output.format == "json") {
    write_trajectory_json(ctx.path("trajectory.json"), model, traj, cfg.output.fields);
  } else {
    write_trajectory_csv(ctx.path("trajectory.csv"), model, traj, cfg.output.fields);
  }
  json j = report_header(ctx, Subcommand::Simulate);
  j["dt"] = in.dt;
  j["n_steps"] = in.n_steps();
  j["samples"] = traj.size();
  json drift = json::object();
  for (const auto& f : cfg.output.fields) {
    const double f0 = *model.invariant(traj.state(0), f);
    double worst = 0.0;
    for (std::size_t i = 0; i < traj.size(); ++i) worst = std::max(worst, std::abs(*model.invariant(traj.state(i), f) - f0));
    drift[f] = worst;
  }
  j["max_invariant_drift"] = drift;
  write_json(ctx.path("report.json"), j);
  ctx.say(fmt::format("simulate: {} samples written to {}", traj.size(), ctx.dir));
}

void run_ensemble_cmd(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  const Model model = build_model(cfg);
  check_fields(model, cfg.output.fields, cfg.system.kind);
  ensemble::EnsembleSpec spec;
  spec.field = &model.field;
  spec.x0 = model.x0;
  spec.n_paths = cfg.ensemble.n_paths;
  spec.master_seed = ctx.seed;
  spec.dt = cfg.integration.dt;
  spec.n_steps = cfg.integration.n_steps();
  spec.stride = cfg.integration.stride;
  spec.threads = ctx.threads;
  spec.policy = cfg.ensemble.policy == "abort" ? ensemble::FailurePolicy::AbortAll
                                               : ensemble::FailurePolicy::RecordAndContinue;
  for (const auto& f : cfg.output.fields) {
    spec.functionals.push_back({f, [&model, f](std::span<const double> s) { return *model.invariant(s, f); }});
  }
  const auto result = ensemble::run_ensemble(spec);

  auto out = open_out(ctx.path("stats.csv"));
  std::vector<std::string> cols{"t"};
  for (const auto& f : cfg.output.fields) {
    for (const char* s : {"_mean", "_var", "_min", "_max"}) cols.push_back(f + s);
  }
  write_csv_header(out, cols);
  for (std::size_t i = 0; i < result.times.size(); ++i) {
    std::vector<double> row{result.times[i]};
    for (const auto& s : result.series) row.insert(row.end(), {s.mean[i], s.variance[i], s.min[i], s.max[i]});
    write_csv_row(out, row);
  }

  json j = report_header(ctx, Subcommand::Ensemble);
  j["n_paths"] = cfg.ensemble.n_paths;
  j["completed"] = result.completed.size();
  json failures = json::array();
  for (const auto& f : result.failures) {
    failures.push_back({{"path", f.index}, {"code", std::string(nonholo::to_string(f.code))}, {"message", f.message}});
  }
  j["failures"] = failures;
  write_json(ctx.path("report.json"), j);
  ctx.say(fmt::format("ensemble: {} of {} paths completed", result.completed.size(), cfg.ensemble.n_paths));
}

struct FpOutcome {
  Grid3 density;
  fp::SolveStats stats;
};

std::array<Axis, 3> fp_axes(const config::FpConfig& fc) {
  std::array<Axis, 3> axes;
  for (std::size_t d = 0; d < 3; ++d) axes[d] = {fc.lo[d], fc.hi[d], fc.cells[d]};
  return axes;
}

FpOutcome solve_fp(const Context& ctx, const Model& model) {
  const auto& cfg = ctx.cfg;
  if (cfg.system.kind != "suslov_type1") {
    throw ValidationError("system.kind", "the Fokker-Planck solver supports the reduced suslov_type1 system");
  }
  const auto red = fp::suslov_type1_reduction(make_suslov_params(cfg));
  const auto axes = fp_axes(cfg.fp);
  const auto gen = fp::assemble_generator(model.field, red, axes);
  Grid3 density = point_mass(axes, {model.x0[0], model.x0[1], model.x0[6]});
  const double dt_fp = cfg.fp.dt_fp > 0.0 ? cfg.fp.dt_fp : std::min(fp::max_stable_dt(gen), cfg.integration.t_final);
  const auto stats = fp::fp_solve(density, gen, cfg.integration.t_final, dt_fp);
  return {std::move(density), stats};
}

json stats_json(const fp::SolveStats& s) {
  return {{"steps", s.steps}, {"dt_fp", s.dt}, {"max_mass_defect", s.max_mass_defect}, {"min_density", s.min_density}};
}

void run_fokker_planck(const Context& ctx) {
  const Model model = build_model(ctx.cfg);
  const auto out = solve_fp(ctx, model);
  write_density_csv(ctx.path("density.csv"), out.density);
  write_density_binary(ctx.path("density.bin"), out.density);
  json j = report_header(ctx, Subcommand::FokkerPlanck);
  j["fp"] = stats_json(out.stats);
  j["mass"] = out.density.mass();
  write_json(ctx.path("report.json"), j);
  ctx.say(fmt::format("fokker-planck: {} steps of {:.6g}", out.stats.steps, out.stats.dt));
}

void run_compare(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  const Model model = build_model(cfg);
  const auto out = solve_fp(ctx, model);
  ensemble::EnsembleSpec spec;
  spec.field = &model.field;
  spec.x0 = model.x0;
  spec.n_paths = cfg.ensemble.n_paths;
  spec.master_seed = ctx.seed;
  spec.dt = cfg.integration.dt;
  spec.n_steps = cfg.integration.n_steps();
  spec.stride = spec.n_steps;
  spec.threads = ctx.threads;
  // Monte Carlo paths start from the same density as the solver: uniform
  // over the grid cell holding the initial point.
  const Grid3& grid = out.density;
  const auto cell = grid.multi_index(*grid.locate({model.x0[0], model.x0[1], model.x0[6]}));
  const auto red = fp::suslov_type1_reduction(make_suslov_params(cfg));
  spec.initial = [&grid, cell, red](sde::CounterRng& rng, std::span<double> x) {
    std::array<double, 3> g{};
    for (std::size_t d = 0; d < 3; ++d) g[d] = grid.axis(d).face(cell[d]) + rng.uniform() * grid.axis(d).width();
    red.lift(g, x);
  };
  const auto result = ensemble::run_ensemble(spec);
  const Grid3 mc = ensemble::histogram(result.final_states, result.dim, {0, 1, 6}, out.density.axes());
  const double l1 = l1_distance(out.density, mc);
  write_density_csv(ctx.path("density.csv"), out.density);
  write_density_binary(ctx.path("density.bin"), out.density);
  json j = report_header(ctx, Subcommand::CompareFpMc);
  j["l1_distance"] = l1;
  j["cells"] = cfg.fp.cells;
  j["n_paths"] = cfg.ensemble.n_paths;
  j["completed"] = result.completed.size();
  j["fp"] = stats_json(out.stats);
  write_json(ctx.path("report.json"), j);
  ctx.say(fmt::format("compare-fp-mc: l1={} cells={}x{}x{} paths={}", format_double(l1), cfg.fp.cells[0],
                      cfg.fp.cells[1], cfg.fp.cells[2], result.completed.size()));
}

void run_invariants(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  const Model model = build_model(cfg);
  check_fields(model, cfg.output.fields, cfg.system.kind);
  const std::string input = cfg.output.input.empty() ? ctx.path("trajectory.csv") : cfg.output.input;
  const Table table = read_csv(input);
  std::vector<std::size_t> index;
  for (const auto& name : model.state_columns) {
    const auto it = std::find(table.columns.begin(), table.columns.end(), name);
    if (it == table.columns.end()) throw Error(ErrorCode::DimensionMismatch, "trajectory lacks column '" + name + "'");
    index.push_back(static_cast<std::size_t>(it - table.columns.begin()));
  }
  auto out = open_out(ctx.path("invariants.csv"));
  std::vector<std::string> cols{"t"};
  cols.insert(cols.end(), cfg.output.fields.begin(), cfg.output.fields.end());
  write_csv_header(out, cols);
  std::vector<double> state(index.size());
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < index.size(); ++i) state[i] = row[index[i]];
    std::vector<double> r{row.at(0)};
    for (const auto& f : cfg.output.fields) r.push_back(*model.invariant(state, f));
    write_csv_row(out, r);
  }
  json j = report_header(ctx, Subcommand::Invariants);
  j["input"] = input;
  j["rows"] = table.rows.size();
  write_json(ctx.path("report.json"), j);
  ctx.say(fmt::format("invariants: {} rows", table.rows.size()));
}

void run_order_study(const Context& ctx) {
  auto out = open_out(ctx.path("order.csv"));
  out << "problem,dt,error\n";
  json j = report_header(ctx, Subcommand::OrderStudy);
  json slopes = json::object();
  for (auto make : {sde::deterministic_reference, sde::additive_reference, sde::multiplicative_reference}) {
    sde::ReferenceProblem p = make();
    p.options.seed = ctx.seed;
    const auto study = sde::estimate_strong_order(p.field, p.x0, p.reference, p.options);
    for (std::size_t i = 0; i < study.dts.size(); ++i) {
      out << p.name << ',' << format_double(study.dts[i]) << ',' << format_double(study.errors[i]) << '\n';
    }
    slopes[p.name] = study.slope;
    ctx.say(fmt::format("order-study: {} slope={:.4f}", p.name, study.slope));
  }
  j["slopes"] = slopes;
  write_json(ctx.path("report.json"), j);
}

}  // namespace

void run(Subcommand cmd, const ExperimentConfig& cfg, const RunOptions& options) {
  Context ctx{cfg, options.out_dir.value_or(cfg.output.directory), options.seed.value_or(cfg.integration.seed),
              options.threads.value_or(cfg.ensemble.threads), options.log};
  switch (cmd) {
    case Subcommand::Simulate: require(cfg, {"initial", "integration"}, cmd); break;
    case Subcommand::Ensemble: require(cfg, {"initial", "integration", "ensemble"}, cmd); break;
    case Subcommand::FokkerPlanck: require(cfg, {"initial", "integration", "fp"}, cmd); break;
    case Subcommand::CompareFpMc: require(cfg, {"initial", "integration", "ensemble", "fp"}, cmd); break;
    case Subcommand::Invariants: require(cfg, {"initial"}, cmd); break;
    case Subcommand::OrderStudy: break;
  }
  fs::create_directories(ctx.dir);
  switch (cmd) {
    case Subcommand::Simulate: run_simulate(ctx); break;
    case Subcommand::Ensemble: run_ensemble_cmd(ctx); break;
    case Subcommand::FokkerPlanck: run_fokker_planck(ctx); break;
    case Subcommand::Invariants: run_invariants(ctx); break;
    case Subcommand::CompareFpMc: run_compare(ctx); break;
    case Subcommand::OrderStudy: run_order_study(ctx); break;
  }
}

}  // namespace nonholo::experiment
