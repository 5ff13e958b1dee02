#pragma once

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "kinchem/common.hpp"
#include "kinchem/diagnostics.hpp"
#include "kinchem/initial_data.hpp"
#include "kinchem/velocity.hpp"

// Run configuration as a JSON document with sections model, grid, time,
// initial and output. Unknown keys are rejected so a typo can never fall
// back silently to a default; errors carry the line of the offending key.

namespace kinchem {

using json = nlohmann::ordered_json;

struct ModelSection {
  double chi0 = 1.0;
  double R = 1.0;
  double alpha = 0.0;
  VelocityKind velocity = VelocityKind::Ball;
  friend bool operator==(const ModelSection&, const ModelSection&) = default;
};

struct GridSection {
  int nr = 256;
  int n_speed = 8;
  int n_angle = 64;
  double r_max = 8.0;
  friend bool operator==(const GridSection&, const GridSection&) = default;
};

struct TimeSection {
  double t_end = 5.0;
  double cfl = 0.5;
  double dt = 0.0;            // 0: derived from cfl
  double output_every = 0.05;
  friend bool operator==(const TimeSection&, const TimeSection&) = default;
};

struct OutputSection {
  std::string csv = "diagnostics.csv";
  std::string manifest = "manifest.json";
  int checkpoint_every = 0;   // in output samples; 0 disables checkpoints
  std::vector<NormSpec> norms = default_norms();
  double growth_factor = 1e3;
  bool virial = true;
  bool stop_on_blowup = true;
  friend bool operator==(const OutputSection& a, const OutputSection& b) {
    if (a.norms.size() != b.norms.size()) return false;
    for (std::size_t i = 0; i < a.norms.size(); ++i)
      if (a.norms[i].p != b.norms[i].p || a.norms[i].q != b.norms[i].q) return false;
    return a.csv == b.csv && a.manifest == b.manifest && a.checkpoint_every == b.checkpoint_every &&
           a.growth_factor == b.growth_factor && a.virial == b.virial && a.stop_on_blowup == b.stop_on_blowup;
  }
};

struct RunConfig {
  ModelSection model;
  GridSection grid;
  TimeSection time;
  InitialSpec initial;
  OutputSection output;
  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Configuration error anchored at a line of the source text (0 if unknown).
class ConfigError : public InvalidArgument {
public:
  ConfigError(const std::string& source, int line, const std::string& msg)
      : InvalidArgument(source + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " + msg),
        line_(line) {}
  int line() const { return line_; }

private:
  int line_;
};

namespace detail {

inline int line_of_offset(const std::string& text, std::size_t off) {
  off = std::min(off, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(off), '\n'));
}

/// Line of `"key"` inside the object that follows `"section"` (first
/// occurrence), or of the section itself when key is empty.
inline int locate_key(const std::string& text, const std::string& section, const std::string& key) {
  std::size_t from = 0;
  if (!section.empty()) {
    const auto s = text.find("\"" + section + "\"");
    if (s == std::string::npos) return 0;
    if (key.empty()) return line_of_offset(text, s);
    from = s;
  }
  const auto k = text.find("\"" + key + "\"", from);
  return k == std::string::npos ? 0 : line_of_offset(text, k);
}

class Reader {
public:
  Reader(const std::string& text, std::string source) : text_(text), source_(std::move(source)) {}

  [[noreturn]] void fail(const std::string& section, const std::string& key, const std::string& msg) const {
    const std::string where = section.empty() ? key : (key.empty() ? section : section + "." + key);
    throw ConfigError(source_, locate_key(text_, section, key), (where.empty() ? "" : where + ": ") + msg);
  }

  void check_keys(const json& obj, const std::string& section, std::initializer_list<const char*> allowed) const {
    if (!obj.is_object()) fail(section, "", "expected an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [k, v] : obj.items())
      if (!ok.count(k)) fail(section, k, "unknown key '" + k + "'");
  }

  double real(const json& obj, const std::string& section, const char* key, double def) const {
    if (!obj.contains(key)) return def;
    const auto& v = obj.at(key);
    if (!v.is_number()) fail(section, key, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(section, key, "must be finite");
    return x;
  }

  int integer(const json& obj, const std::string& section, const char* key, int def) const {
    if (!obj.contains(key)) return def;
    const auto& v = obj.at(key);
    if (!v.is_number_integer()) fail(section, key, "expected an integer");
    const auto x = v.get<long long>();
    if (x < 0 || x > 1'000'000'000) fail(section, key, "out of range");
    return static_cast<int>(x);
  }

  bool boolean(const json& obj, const std::string& section, const char* key, bool def) const {
    if (!obj.contains(key)) return def;
    const auto& v = obj.at(key);
    if (!v.is_boolean()) fail(section, key, "expected true or false");
    return v.get<bool>();
  }

  std::string string(const json& obj, const std::string& section, const char* key, const std::string& def) const {
    if (!obj.contains(key)) return def;
    const auto& v = obj.at(key);
    if (!v.is_string()) fail(section, key, "expected a string");
    return v.get<std::string>();
  }

  template <class F>
  auto enumeration(const json& obj, const std::string& section, const char* key, F parse,
                   decltype(parse(std::string_view{})) def) const {
    if (!obj.contains(key)) return def;
    const std::string s = string(obj, section, key, "");
    try {
      return parse(s);
    } catch (const InvalidArgument& e) {
      fail(section, key, e.what());
    }
  }

private:
  const std::string& text_;
  std::string source_;
};

}  // namespace detail

/// Semantic checks; the reader anchors the message at the offending key.
inline void validate(const RunConfig& c, const detail::Reader& rd) {
  const auto& m = c.model;
  if (!(m.chi0 > 0.0)) rd.fail("model", "chi0", "must be positive");
  if (!(m.R > 0.0)) rd.fail("model", "R", "must be positive");
  if (!(m.alpha >= 0.0)) rd.fail("model", "alpha", "must be nonnegative");
  const auto& g = c.grid;
  if (g.nr < 4) rd.fail("grid", "nr", "must be at least 4");
  if (m.velocity == VelocityKind::Ball && g.n_speed < 4) rd.fail("grid", "n_speed", "must be at least 4");
  if (g.n_angle < 4 || g.n_angle % 4 != 0) rd.fail("grid", "n_angle", "must be a positive multiple of 4");
  if (!(g.r_max > 0.0)) rd.fail("grid", "r_max", "must be positive");
  const auto& t = c.time;
  if (!(t.t_end > 0.0)) rd.fail("time", "t_end", "must be positive");
  if (!(t.cfl > 0.0 && t.cfl <= 1.0)) rd.fail("time", "cfl", "must lie in (0, 1]");
  if (!(t.dt >= 0.0)) rd.fail("time", "dt", "must be nonnegative (0 derives dt from cfl)");
  if (!(t.output_every > 0.0)) rd.fail("time", "output_every", "must be positive");
  if (t.output_every > t.t_end) rd.fail("time", "output_every", "exceeds t_end");
  const double n_out = t.t_end / t.output_every;
  if (std::abs(n_out - std::round(n_out)) > 1e-9 * n_out)
    rd.fail("time", "output_every", "must divide t_end into an integer number of samples");
  const auto& in = c.initial;
  if (!(in.mass >= 0.0)) rd.fail("initial", "mass", "must be nonnegative");
  switch (in.family) {
    case InitialFamily::Empty: break;
    case InitialFamily::UniformDisk:
      if (!(in.radius > 0.0)) rd.fail("initial", "radius", "must be positive");
      // a finite second moment on the grid requires the support to fit
      if (in.radius > g.r_max) rd.fail("initial", "radius", "support exceeds grid.r_max");
      break;
    case InitialFamily::RadialGaussian:
      if (!(in.sigma > 0.0)) rd.fail("initial", "sigma", "must be positive");
      if (8.0 * in.sigma > g.r_max) rd.fail("initial", "sigma", "8 sigma exceeds grid.r_max");
      break;
    case InitialFamily::ComparisonDominated:
      if (m.velocity != VelocityKind::Ball) rd.fail("model", "velocity", "comparison-dominated data need the ball");
      if (!(in.gamma > 0.0 && in.gamma < 1.0)) rd.fail("initial", "gamma", "must lie in (0, 1)");
      if (!(in.k0 > 0.0)) rd.fail("initial", "k0", "must be positive");
      if (!(in.r_supp > 0.0) || in.r_supp > g.r_max) rd.fail("initial", "r_supp", "must lie in (0, grid.r_max]");
      if (!(in.cap_factor >= 1.0)) rd.fail("initial", "cap_factor", "must be at least 1");
      break;
  }
  if (in.profile == VelocityProfile::Beam && !(in.beam_width > 0.0))
    rd.fail("initial", "beam_width", "must be positive");
  const auto& o = c.output;
  if (o.csv.empty()) rd.fail("output", "csv", "must not be empty");
  if (o.manifest.empty()) rd.fail("output", "manifest", "must not be empty");
  if (!(o.growth_factor > 1.0)) rd.fail("output", "growth_factor", "must exceed 1");
  for (const auto& n : o.norms) {
    std::string why;
    if (!admissible_exponents(n.p, n.q, &why)) rd.fail("output", "norms", why);
  }
}

inline RunConfig parse_config(const std::string& text, const std::string& source = "config") {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(source, detail::line_of_offset(text, e.byte > 0 ? e.byte - 1 : 0),
                      std::string("malformed JSON: ") + e.what());
  }
  const detail::Reader rd(text, source);
  rd.check_keys(doc, "", {"model", "grid", "time", "initial", "output"});
  RunConfig c;
  const json empty = json::object();
  auto section = [&](const char* name) -> const json& {
    if (!doc.contains(name)) return empty;
    return doc.at(name);
  };

  const json& m = section("model");
  rd.check_keys(m, "model", {"chi0", "R", "alpha", "velocity"});
  c.model.chi0 = rd.real(m, "model", "chi0", c.model.chi0);
  c.model.R = rd.real(m, "model", "R", c.model.R);
  c.model.alpha = rd.real(m, "model", "alpha", c.model.alpha);
  c.model.velocity = rd.enumeration(m, "model", "velocity", velocity_kind_from_string, c.model.velocity);

  const json& g = section("grid");
  rd.check_keys(g, "grid", {"nr", "n_speed", "n_angle", "r_max"});
  c.grid.nr = rd.integer(g, "grid", "nr", c.grid.nr);
  c.grid.n_speed = rd.integer(g, "grid", "n_speed", c.grid.n_speed);
  c.grid.n_angle = rd.integer(g, "grid", "n_angle", c.grid.n_angle);
  c.grid.r_max = rd.real(g, "grid", "r_max", c.grid.r_max);

  const json& t = section("time");
  rd.check_keys(t, "time", {"t_end", "cfl", "dt", "output_every"});
  c.time.t_end = rd.real(t, "time", "t_end", c.time.t_end);
  c.time.cfl = rd.real(t, "time", "cfl", c.time.cfl);
  c.time.dt = rd.real(t, "time", "dt", c.time.dt);
  c.time.output_every = rd.real(t, "time", "output_every", c.time.output_every);

  const json& in = section("initial");
  rd.check_keys(in, "initial",
                {"family", "mass", "radius", "sigma", "gamma", "k0", "r_supp", "cap_factor", "profile", "beam_angle",
                 "beam_width"});
  auto& s = c.initial;
  s.family = rd.enumeration(in, "initial", "family", initial_family_from_string, s.family);
  s.mass = rd.real(in, "initial", "mass", s.mass);
  s.radius = rd.real(in, "initial", "radius", s.radius);
  s.sigma = rd.real(in, "initial", "sigma", s.sigma);
  s.gamma = rd.real(in, "initial", "gamma", s.gamma);
  s.k0 = rd.real(in, "initial", "k0", s.k0);
  s.r_supp = rd.real(in, "initial", "r_supp", s.r_supp);
  s.cap_factor = rd.real(in, "initial", "cap_factor", s.cap_factor);
  s.profile = rd.enumeration(in, "initial", "profile", velocity_profile_from_string, s.profile);
  s.beam_angle = rd.real(in, "initial", "beam_angle", s.beam_angle);
  s.beam_width = rd.real(in, "initial", "beam_width", s.beam_width);

  const json& o = section("output");
  rd.check_keys(o, "output", {"csv", "manifest", "checkpoint_every", "norms", "growth_factor", "virial", "stop_on_blowup"});
  c.output.csv = rd.string(o, "output", "csv", c.output.csv);
  c.output.manifest = rd.string(o, "output", "manifest", c.output.manifest);
  c.output.checkpoint_every = rd.integer(o, "output", "checkpoint_every", c.output.checkpoint_every);
  c.output.growth_factor = rd.real(o, "output", "growth_factor", c.output.growth_factor);
  c.output.virial = rd.boolean(o, "output", "virial", c.output.virial);
  c.output.stop_on_blowup = rd.boolean(o, "output", "stop_on_blowup", c.output.stop_on_blowup);
  if (o.contains("norms")) {
    const auto& arr = o.at("norms");
    if (!arr.is_array() || arr.empty()) rd.fail("output", "norms", "expected a nonempty array of [p, q] pairs");
    c.output.norms.clear();
    for (const auto& pq : arr) {
      if (!pq.is_array() || pq.size() != 2 || !pq[0].is_number() || !pq[1].is_number())
        rd.fail("output", "norms", "each entry must be a [p, q] pair of numbers");
      c.output.norms.push_back({pq[0].get<double>(), pq[1].get<double>()});
    }
  }
  validate(c, rd);
  return c;
}

inline json config_to_json(const RunConfig& c) {
  json j;
  j["model"] = {{"chi0", c.model.chi0},
                {"R", c.model.R},
                {"alpha", c.model.alpha},
                {"velocity", std::string(to_string(c.model.velocity))}};
  j["grid"] = {{"nr", c.grid.nr}, {"n_speed", c.grid.n_speed}, {"n_angle", c.grid.n_angle}, {"r_max", c.grid.r_max}};
  j["time"] = {{"t_end", c.time.t_end}, {"cfl", c.time.cfl}, {"dt", c.time.dt}, {"output_every", c.time.output_every}};
  const auto& s = c.initial;
  j["initial"] = {{"family", std::string(to_string(s.family))},
                  {"mass", s.mass},
                  {"radius", s.radius},
                  {"sigma", s.sigma},
                  {"gamma", s.gamma},
                  {"k0", s.k0},
                  {"r_supp", s.r_supp},
                  {"cap_factor", s.cap_factor},
                  {"profile", std::string(to_string(s.profile))},
                  {"beam_angle", s.beam_angle},
                  {"beam_width", s.beam_width}};
  json norms = json::array();
  for (const auto& n : c.output.norms) norms.push_back({n.p, n.q});
  j["output"] = {{"csv", c.output.csv},
                 {"manifest", c.output.manifest},
                 {"checkpoint_every", c.output.checkpoint_every},
                 {"norms", norms},
                 {"growth_factor", c.output.growth_factor},
                 {"virial", c.output.virial},
                 {"stop_on_blowup", c.output.stop_on_blowup}};
  return j;
}

/// Pretty-printed JSON; doubles are written in shortest round-trip form.
inline std::string emit_config(const RunConfig& c) { return config_to_json(c).dump(2) + "\n"; }

inline RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError(path, 0, "cannot open config file");
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str(), path);
}

}  // namespace kinchem
