#pragma once

#include <charconv>
#include <fstream>
#include <istream>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>

#include "kinchem/common.hpp"
#include "kinchem/diagnostics.hpp"
#include "kinchem/kinsolver.hpp"

// Text checkpoints: a key/value header describing grids, parameters and
// time, then one value per line in row-major (r, w, phi) order with 17
// significant digits, so parse(emit(s)) reproduces s bit for bit.

namespace kinchem {

inline constexpr const char* checkpoint_magic = "kinchem-checkpoint 1";

struct Checkpoint {
  PhaseState state;
  ModelParams model;
};

inline void emit_checkpoint(std::ostream& os, const PhaseState& s, const ModelParams& model) {
  const PhaseGrid& G = *s.grid;
  const VelocitySet& V = G.velocities();
  os << checkpoint_magic << '\n';
  os << "t " << format_double(s.t) << '\n';
  os << "nr " << G.nr() << '\n';
  os << "r_max " << format_double(G.r_max()) << '\n';
  os << "velocity " << to_string(V.kind()) << '\n';
  os << "R " << format_double(V.radius()) << '\n';
  os << "n_speed " << V.n_speed() << '\n';
  os << "n_angle " << V.n_angle() << '\n';
  os << "angle_offset " << format_double(V.angle_offset()) << '\n';
  os << "chi0 " << format_double(model.chi0) << '\n';
  os << "alpha " << format_double(model.alpha) << '\n';
  os << "values " << s.g.size() << '\n';
  for (double x : s.g) os << format_double(x) << '\n';
}

inline std::string emit_checkpoint(const PhaseState& s, const ModelParams& model) {
  std::ostringstream os;
  emit_checkpoint(os, s, model);
  return os.str();
}

namespace detail {

inline double parse_double_exact(const std::string& tok, int line) {
  double x = 0.0;
  const char* b = tok.data();
  const char* e = b + tok.size();
  auto [ptr, ec] = std::from_chars(b, e, x);
  if (ec != std::errc() || ptr != e) {
    // from_chars does not accept nan/inf spellings produced by printf
    if (tok == "nan" || tok == "-nan") return std::numeric_limits<double>::quiet_NaN();
    if (tok == "inf") return std::numeric_limits<double>::infinity();
    if (tok == "-inf") return -std::numeric_limits<double>::infinity();
    throw InvalidArgument("checkpoint line " + std::to_string(line) + ": malformed number '" + tok + "'");
  }
  return x;
}

}  // namespace detail

inline Checkpoint parse_checkpoint(std::istream& is) {
  std::string line;
  int lineno = 0;
  auto next = [&]() {
    if (!std::getline(is, line)) throw InvalidArgument("checkpoint truncated after line " + std::to_string(lineno));
    ++lineno;
    return line;
  };
  if (next() != checkpoint_magic) throw InvalidArgument("checkpoint line 1: missing header '" + std::string(checkpoint_magic) + "'");
  auto field = [&](const char* key) {
    next();
    std::istringstream ls(line);
    std::string k, v, extra;
    ls >> k >> v;
    if (k != key || v.empty() || (ls >> extra))
      throw InvalidArgument("checkpoint line " + std::to_string(lineno) + ": expected '" + key + " <value>'");
    return v;
  };
  auto integer = [&](const char* key) {
    const std::string v = field(key);
    long long n = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
    if (ec != std::errc() || ptr != v.data() + v.size() || n < 0)
      throw InvalidArgument("checkpoint line " + std::to_string(lineno) + ": malformed integer for '" + key + "'");
    return n;
  };
  auto real = [&](const char* key) { return detail::parse_double_exact(field(key), lineno); };

  const double t = real("t");
  const int nr = static_cast<int>(integer("nr"));
  const double r_max = real("r_max");
  const VelocityKind kind = velocity_kind_from_string(field("velocity"));
  const double R = real("R");
  const int ns = static_cast<int>(integer("n_speed"));
  const int na = static_cast<int>(integer("n_angle"));
  const double offset = real("angle_offset");
  ModelParams model;
  model.chi0 = real("chi0");
  model.alpha = real("alpha");
  const auto n = static_cast<std::size_t>(integer("values"));

  auto grid = std::make_shared<const PhaseGrid>(nr, r_max, VelocitySet::make(kind, R, ns, na, offset));
  if (n != grid->size())
    throw InvalidArgument("checkpoint: value count " + std::to_string(n) + " does not match grid size " +
                          std::to_string(grid->size()));
  PhaseState s(grid);
  s.t = t;
  for (std::size_t i = 0; i < n; ++i) s.g[i] = detail::parse_double_exact(next(), lineno);
  return {std::move(s), model};
}

inline Checkpoint parse_checkpoint(const std::string& text) {
  std::istringstream is(text);
  return parse_checkpoint(is);
}

inline void save_checkpoint(const std::string& path, const PhaseState& s, const ModelParams& model) {
  std::ofstream os(path);
  if (!os) throw InvalidArgument("cannot write checkpoint '" + path + "'");
  emit_checkpoint(os, s, model);
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw InvalidArgument("cannot read checkpoint '" + path + "'");
  return parse_checkpoint(is);
}

}  // namespace kinchem
