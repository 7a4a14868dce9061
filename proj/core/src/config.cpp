#include "nonholo/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <type_traits>

#include "nonholo/errors.hpp"

namespace nonholo::config {

std::size_t IntegrationConfig::n_steps() const {
  return static_cast<std::size_t>(std::llround(t_final / dt));
}

namespace {

struct Entry {
  std::vector<std::string> items;
  bool is_array = false;
  std::size_t line = 0;
};

using Table = std::map<std::string, std::map<std::string, Entry>>;

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool valid_name(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.')) return false;
  }
  return true;
}

std::string scalar_token(std::string_view tok, std::size_t line) {
  tok = trim(tok);
  if (tok.empty()) throw ParseError(line, "empty value");
  if (tok.front() == '"') {
    if (tok.size() < 2 || tok.back() != '"') throw ParseError(line, "unterminated string");
    const std::string_view inner = tok.substr(1, tok.size() - 2);
    if (inner.find('"') != std::string_view::npos) throw ParseError(line, "stray quote in string");
    return std::string(inner);
  }
  for (char c : tok) {
    if (c == '"' || c == '[' || c == ']' || c == ',' || c == ' ' || c == '\t') {
      throw ParseError(line, fmt::format("unexpected character '{}' in value", c));
    }
  }
  return std::string(tok);
}

const std::set<std::string>& known_sections() {
  static const std::set<std::string> s{"system", "initial", "noise", "integration", "ensemble", "fp", "output"};
  return s;
}

Table tokenize(std::string_view text) {
  Table table;
  std::string section;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    // '#' starts a comment unless it sits inside a quoted string.
    bool in_string = false;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (raw[i] == '"') in_string = !in_string;
      if (raw[i] == '#' && !in_string) {
        raw = raw.substr(0, i);
        break;
      }
    }
    const std::string_view line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(line_no, "section header must end with ']'");
      const std::string name(trim(line.substr(1, line.size() - 2)));
      if (!known_sections().count(name)) throw ParseError(line_no, "unknown section [" + name + "]");
      if (table.count(name)) throw ParseError(line_no, "section [" + name + "] appears twice");
      table[name];
      section = name;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, "expected 'key = value'");
    if (section.empty()) throw ParseError(line_no, "key outside of any section");
    const std::string key(trim(line.substr(0, eq)));
    if (!valid_name(key)) throw ParseError(line_no, "invalid key '" + key + "'");
    const std::string_view value = trim(line.substr(eq + 1));
    Entry entry;
    entry.line = line_no;
    if (!value.empty() && value.front() == '[') {
      if (value.back() != ']') throw ParseError(line_no, "array must end with ']'");
      entry.is_array = true;
      const std::string_view inner = trim(value.substr(1, value.size() - 2));
      if (!inner.empty()) {
        std::size_t start = 0;
        for (;;) {
          const auto comma = inner.find(',', start);
          entry.items.push_back(scalar_token(inner.substr(start, comma == std::string_view::npos
                                                                    ? std::string_view::npos
                                                                    : comma - start),
                                             line_no));
          if (comma == std::string_view::npos) break;
          start = comma + 1;
        }
      }
    } else {
      entry.items.push_back(scalar_token(value, line_no));
    }
    auto& sec = table[section];
    if (sec.count(key)) throw ParseError(line_no, "key '" + key + "' repeated in [" + section + "]");
    sec.emplace(key, std::move(entry));
  }
  return table;
}

double to_double(const std::string& s, std::size_t line) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ParseError(line, "expected a number, got '" + s + "'");
  if (!std::isfinite(v)) throw ParseError(line, "non-finite number '" + s + "'");
  return v;
}

std::uint64_t to_u64(const std::string& s, std::size_t line) {
  std::uint64_t v = 0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ParseError(line, "expected a non-negative integer, got '" + s + "'");
  return v;
}

class Reader {
 public:
  Reader(Table& table, std::string section) : table_(table), section_(std::move(section)) {}

  template <class F>
  void with(const std::string& key, F&& f) {
    auto sec = table_.find(section_);
    if (sec == table_.end()) return;
    auto it = sec->second.find(key);
    if (it == sec->second.end()) return;
    f(it->second);
    sec->second.erase(it);
  }

  void number(const std::string& key, double& out) {
    with(key, [&](const Entry& e) { out = to_double(scalar(e), e.line); });
  }
  template <class T>
  void integer(const std::string& key, T& out) {
    with(key, [&](const Entry& e) { out = static_cast<T>(to_u64(scalar(e), e.line)); });
  }
  void word(const std::string& key, std::string& out) {
    with(key, [&](const Entry& e) { out = scalar(e); });
  }
  void numbers(const std::string& key, std::vector<double>& out) {
    with(key, [&](const Entry& e) {
      out.clear();
      for (const auto& s : e.items) out.push_back(to_double(s, e.line));
    });
  }
  void words(const std::string& key, std::vector<std::string>& out) {
    with(key, [&](const Entry& e) { out = e.items; });
  }
  void vec3(const std::string& key, Vec3& out) {
    std::vector<double> v;
    bool seen = false;
    with(key, [&](const Entry& e) {
      seen = true;
      if (e.items.size() != 3) throw ParseError(e.line, "'" + key + "' needs three values");
      for (const auto& s : e.items) v.push_back(to_double(s, e.line));
    });
    if (seen) out = {v[0], v[1], v[2]};
  }
  template <class T>
  void triple(const std::string& key, std::array<T, 3>& out) {
    with(key, [&](const Entry& e) {
      if (e.items.size() == 1) {
        out.fill(convert<T>(e.items[0], e.line));
      } else if (e.items.size() == 3) {
        for (std::size_t i = 0; i < 3; ++i) out[i] = convert<T>(e.items[i], e.line);
      } else {
        throw ParseError(e.line, "'" + key + "' needs one or three values");
      }
    });
  }

  void finish() {
    auto sec = table_.find(section_);
    if (sec == table_.end() || sec->second.empty()) return;
    const auto& [key, entry] = *sec->second.begin();
    throw ParseError(entry.line, "unknown key '" + key + "' in [" + section_ + "]");
  }

 private:
  template <class T>
  static T convert(const std::string& s, std::size_t line) {
    if constexpr (std::is_same_v<T, double>) {
      return to_double(s, line);
    } else {
      return static_cast<T>(to_u64(s, line));
    }
  }
  static const std::string& scalar(const Entry& e) {
    if (e.is_array) {
      if (e.items.size() != 1) throw ParseError(e.line, "expected a single value");
    }
    return e.items.at(0);
  }

  Table& table_;
  std::string section_;
};

bool one_of(const std::string& v, std::initializer_list<const char*> options) {
  for (const char* o : options) {
    if (v == o) return true;
  }
  return false;
}

bool is_chart(const std::string& kind) { return kind.rfind("chart", 0) == 0; }

}  // namespace

void validate(const ExperimentConfig& cfg) {
  const SystemConfig& sys = cfg.system;
  if (!one_of(sys.kind, {"suslov_det", "suslov_type1", "suslov_type2", "rolling_det", "rolling_type1",
                         "rolling_type2", "chart_type1", "chart_type2"})) {
    throw ValidationError("system.kind", "unknown system kind '" + sys.kind + "'");
  }
  if (sys.inertia.size() != 3 && sys.inertia.size() != 9) {
    throw ValidationError("system.inertia", "needs three principal moments or nine entries");
  }
  try {
    if (sys.inertia.size() == 3) {
      (void)InertiaTensor::diagonal(sys.inertia[0], sys.inertia[1], sys.inertia[2]);
    } else {
      Mat3 m;
      for (std::size_t i = 0; i < 9; ++i) m.m[i] = sys.inertia[i];
      (void)InertiaTensor(m);
    }
  } catch (const Error&) {
    throw ValidationError("system.inertia", "must be symmetric positive definite");
  }
  if (!(sys.mass > 0.0)) throw ValidationError("system.mass", "must be positive");
  if (!(norm(sys.axis) > 0.0)) throw ValidationError("system.axis", "must be non-zero");
  if (!one_of(sys.potential, {"zero", "linear", "quadratic"})) {
    throw ValidationError("system.potential", "must be zero, linear or quadratic");
  }
  if (!one_of(sys.alpha, {"constant", "skew", "shifted"})) {
    throw ValidationError("system.alpha", "must be constant, skew or shifted");
  }
  if (sys.alpha == "shifted" && sys.kind != "rolling_type2") {
    throw ValidationError("system.alpha", "shifted alpha depends on the noise and needs rolling_type2");
  }

  const InitialConfig& ini = cfg.initial;
  const NoiseConfig& nz = cfg.noise;
  if (!is_chart(sys.kind) && std::abs(dot(ini.gamma, ini.gamma) - 1.0) > 1e-9) {
    throw ValidationError("initial.gamma", "must be a unit vector");
  }
  std::size_t sigma_size = 1;
  if (sys.kind == "suslov_det" && std::abs(dot(sys.axis, ini.omega)) > 1e-9) {
    throw ValidationError("initial.omega", "must satisfy a . Omega = 0");
  }
  if (sys.kind == "suslov_type1") {
    if (ini.n.size() > 1) throw ValidationError("initial.n", "Suslov type I noise is a scalar");
    if (ini.n.size() == 1 && std::abs(dot(sys.axis, ini.omega) - ini.n[0]) > 1e-9) {
      throw ValidationError("initial.omega", "must satisfy a . Omega = N");
    }
  }
  if (sys.kind == "suslov_type2") {
    if (ini.n.size() != 3) throw ValidationError("initial.n", "Suslov type II noise needs three values");
    const Vec3 n{ini.n[0], ini.n[1], ini.n[2]};
    if (!(norm(n) > 0.0)) throw ValidationError("initial.n", "must be non-zero");
    if (std::abs(dot(n, ini.omega)) > 1e-9) throw ValidationError("initial.omega", "must satisfy N . Omega = 0");
    sigma_size = 3;
  }
  if (sys.kind == "rolling_type1") {
    if (!ini.n.empty() && ini.n.size() != 3) throw ValidationError("initial.n", "rolling type I noise needs three values");
    sigma_size = 3;
  }
  if (sys.kind == "rolling_type2") {
    sigma_size = std::max<std::size_t>(1, ini.n.size());
  }
  if (is_chart(sys.kind)) {
    if (!ini.q.empty() && ini.q.size() != 3) throw ValidationError("initial.q", "needs three values");
    if (!ini.u.empty() && ini.u.size() != 2) throw ValidationError("initial.u", "needs two values");
    if (ini.n.size() > 1) throw ValidationError("initial.n", "chart noise is a scalar");
  }

  if (!one_of(nz.kind, {"off", "additive", "ou", "cross"})) {
    throw ValidationError("noise.kind", "must be off, additive, ou or cross");
  }
  if (nz.kind == "cross" && sys.kind != "suslov_type2") {
    throw ValidationError("noise.kind", "cross noise is defined for suslov_type2 only");
  }
  if (!one_of(nz.cross, {"chi", "gamma", "momentum"})) {
    throw ValidationError("noise.cross", "must be chi, gamma or momentum");
  }
  if (nz.kind == "cross" && nz.cross == "chi" && sys.potential != "linear") {
    throw ValidationError("noise.cross", "chi cross noise needs a linear potential");
  }
  if ((nz.kind == "additive" || nz.kind == "ou") && nz.sigma.size() != sigma_size) {
    throw ValidationError("noise.sigma", fmt::format("needs {} value(s) for {}", sigma_size, sys.kind));
  }
  if (!(nz.theta >= 0.0)) throw ValidationError("noise.theta", "must be non-negative");

  const IntegrationConfig& in = cfg.integration;
  if (!(in.dt > 0.0)) throw ValidationError("integration.dt", "must be positive");
  if (!(in.t_final > 0.0)) throw ValidationError("integration.t_final", "must be positive");
  if (in.n_steps() == 0) throw ValidationError("integration.t_final", "shorter than one step");
  if (std::abs(static_cast<double>(in.n_steps()) * in.dt - in.t_final) > 1e-9 * in.t_final) {
    throw ValidationError("integration.t_final", "must be an integer multiple of dt");
  }
  if (in.stride == 0) throw ValidationError("integration.stride", "must be at least 1");

  if (cfg.ensemble.n_paths == 0) throw ValidationError("ensemble.n_paths", "must be at least 1");
  if (!one_of(cfg.ensemble.policy, {"record", "abort"})) {
    throw ValidationError("ensemble.policy", "must be record or abort");
  }

  for (std::size_t d = 0; d < 3; ++d) {
    if (!(cfg.fp.hi[d] > cfg.fp.lo[d])) throw ValidationError("fp.hi", "must exceed fp.lo on every axis");
    if (cfg.fp.cells[d] == 0) throw ValidationError("fp.cells", "must be at least 1");
  }
  if (!(cfg.fp.dt_fp >= 0.0)) throw ValidationError("fp.dt_fp", "must be non-negative");

  if (!one_of(cfg.output.format, {"csv", "json"})) throw ValidationError("output.format", "must be csv or json");
  for (const auto& f : cfg.output.fields) {
    if (!one_of(f, {"energy", "gamma_norm", "constraint", "lagrange", "momentum_square", "kharlamova",
                    "clebsch_tisserand"})) {
      throw ValidationError("output.fields", "unknown invariant '" + f + "'");
    }
  }
}

ExperimentConfig parse_config(std::string_view text) {
  Table table = tokenize(text);
  if (!table.count("system")) throw ParseError(1, "missing [system] section");
  std::map<std::string, std::size_t> lines;
  for (const auto& [sec, entries] : table) {
    for (const auto& [key, e] : entries) lines[sec + "." + key] = e.line;
  }

  ExperimentConfig cfg;
  for (const auto& [sec, entries] : table) cfg.sections.insert(sec);

  Reader sys(table, "system");
  sys.word("kind", cfg.system.kind);
  sys.numbers("inertia", cfg.system.inertia);
  sys.number("mass", cfg.system.mass);
  sys.vec3("axis", cfg.system.axis);
  sys.word("potential", cfg.system.potential);
  sys.vec3("chi", cfg.system.chi);
  sys.number("epsilon", cfg.system.epsilon);
  sys.word("alpha", cfg.system.alpha);
  sys.number("radius", cfg.system.radius);
  sys.finish();

  Reader ini(table, "initial");
  ini.vec3("omega", cfg.initial.omega);
  ini.vec3("gamma", cfg.initial.gamma);
  ini.numbers("n", cfg.initial.n);
  ini.numbers("q", cfg.initial.q);
  ini.numbers("u", cfg.initial.u);
  ini.finish();

  Reader nz(table, "noise");
  nz.word("kind", cfg.noise.kind);
  nz.numbers("sigma", cfg.noise.sigma);
  nz.number("theta", cfg.noise.theta);
  nz.word("cross", cfg.noise.cross);
  nz.vec3("g", cfg.noise.g);
  nz.vec3("eta", cfg.noise.eta);
  nz.finish();

  Reader in(table, "integration");
  in.number("dt", cfg.integration.dt);
  in.number("t_final", cfg.integration.t_final);
  in.integer("seed", cfg.integration.seed);
  in.integer("stride", cfg.integration.stride);
  in.finish();

  Reader en(table, "ensemble");
  en.integer("n_paths", cfg.ensemble.n_paths);
  en.integer("threads", cfg.ensemble.threads);
  en.word("policy", cfg.ensemble.policy);
  en.finish();

  Reader fp(table, "fp");
  fp.triple("lo", cfg.fp.lo);
  fp.triple("hi", cfg.fp.hi);
  fp.triple("cells", cfg.fp.cells);
  fp.number("dt_fp", cfg.fp.dt_fp);
  fp.finish();

  Reader out(table, "output");
  out.word("directory", cfg.output.directory);
  out.word("format", cfg.output.format);
  out.words("fields", cfg.output.fields);
  out.word("input", cfg.output.input);
  out.finish();

  try {
    validate(cfg);
  } catch (const ValidationError& e) {
    const auto it = lines.find(e.key());
    const std::string where = it != lines.end() ? fmt::format("line {}: ", it->second) : std::string();
    throw ValidationError(e.key(), where + e.what());
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

namespace {

std::string num(double v) { return fmt::format("{:.17g}", v); }

std::string quoted(const std::string& s) {
  return valid_name(s) ? s : "\"" + s + "\"";
}

std::string array(const std::vector<double>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + num(v[i]);
  return s + "]";
}

std::string array(const Vec3& v) { return array(std::vector<double>{v.x, v.y, v.z}); }

}  // namespace

std::string serialize(const ExperimentConfig& cfg) {
  std::string s;
  auto line = [&](const std::string& k, const std::string& v) { s += k + " = " + v + "\n"; };
  s += "[system]\n";
  line("kind", cfg.system.kind);
  line("inertia", array(cfg.system.inertia));
  line("mass", num(cfg.system.mass));
  line("axis", array(cfg.system.axis));
  line("potential", cfg.system.potential);
  line("chi", array(cfg.system.chi));
  line("epsilon", num(cfg.system.epsilon));
  line("alpha", cfg.system.alpha);
  line("radius", num(cfg.system.radius));
  if (cfg.has("initial")) {
    s += "\n[initial]\n";
    line("omega", array(cfg.initial.omega));
    line("gamma", array(cfg.initial.gamma));
    line("n", array(cfg.initial.n));
    line("q", array(cfg.initial.q));
    line("u", array(cfg.initial.u));
  }
  if (cfg.has("noise")) {
    s += "\n[noise]\n";
    line("kind", cfg.noise.kind);
    line("sigma", array(cfg.noise.sigma));
    line("theta", num(cfg.noise.theta));
    line("cross", cfg.noise.cross);
    line("g", array(cfg.noise.g));
    line("eta", array(cfg.noise.eta));
  }
  if (cfg.has("integration")) {
    s += "\n[integration]\n";
    line("dt", num(cfg.integration.dt));
    line("t_final", num(cfg.integration.t_final));
    line("seed", std::to_string(cfg.integration.seed));
    line("stride", std::to_string(cfg.integration.stride));
  }
  if (cfg.has("ensemble")) {
    s += "\n[ensemble]\n";
    line("n_paths", std::to_string(cfg.ensemble.n_paths));
    line("threads", std::to_string(cfg.ensemble.threads));
    line("policy", cfg.ensemble.policy);
  }
  if (cfg.has("fp")) {
    s += "\n[fp]\n";
    line("lo", array(std::vector<double>(cfg.fp.lo.begin(), cfg.fp.lo.end())));
    line("hi", array(std::vector<double>(cfg.fp.hi.begin(), cfg.fp.hi.end())));
    line("cells", fmt::format("[{}, {}, {}]", cfg.fp.cells[0], cfg.fp.cells[1], cfg.fp.cells[2]));
    line("dt_fp", num(cfg.fp.dt_fp));
  }
  if (cfg.has("output")) {
    s += "\n[output]\n";
    line("directory", quoted(cfg.output.directory));
    line("format", cfg.output.format);
    std::string f = "[";
    for (std::size_t i = 0; i < cfg.output.fields.size(); ++i) f += (i ? ", " : "") + cfg.output.fields[i];
    line("fields", f + "]");
    if (!cfg.output.input.empty()) line("input", quoted(cfg.output.input));
  }
  return s;
}

}  // namespace nonholo::config
