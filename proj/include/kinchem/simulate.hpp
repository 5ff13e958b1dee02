#pragma once

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "kinchem/checkpoint.hpp"
#include "kinchem/comparison.hpp"
#include "kinchem/config.hpp"
#include "kinchem/diagnostics.hpp"
#include "kinchem/initial_data.hpp"
#include "kinchem/kinsolver.hpp"
#include "kinchem/thresholds.hpp"

namespace kinchem {

#ifndef KINCHEM_VERSION
#define KINCHEM_VERSION "unknown"
#endif

inline constexpr const char* manifest_schema = "kinchem/1";

enum ExitCode : int { ExitGlobal = 0, ExitUsage = 1, ExitBlowup = 2, ExitNumerical = 3 };

struct SimulationResult {
  int exit_code = ExitGlobal;
  std::string error;
  DetectorVerdict verdict;
  bool virial_tracked = false;
  VirialReport virial;
  std::vector<DiagnosticsRecord> series;
  std::string csv;                    // CSV bytes as written
  double dt = 0.0;
  long long steps = 0;
  double outflow = 0.0;               // cumulative mass leaving r_max
  double max_mass_drift_rate = 0.0;   // max_t |M(t) + outflow(t) - M0| / (M0 t)
  double max_excess = nan_value;
  double wall_seconds = 0.0;
  std::vector<std::string> checkpoints;
};

/// Step size: the largest dt = output_every / n (n integer) not exceeding
/// the requested dt, or 2 cfl transport_dt_max when none is requested (the
/// Strang composition takes two half transport steps).
inline double simulation_dt(const RunConfig& c, const PhaseGrid& G) {
  const double dt_max = 2.0 * transport_dt_max(G);
  double target = c.time.dt > 0.0 ? c.time.dt : c.time.cfl * dt_max;
  if (target > dt_max * (1.0 + 1e-12)) throw CflViolation(target, dt_max);
  const double n = std::ceil(c.time.output_every / target * (1.0 - 1e-12));
  return c.time.output_every / std::max(1.0, n);
}

inline std::shared_ptr<const PhaseGrid> make_grid(const RunConfig& c) {
  return std::make_shared<const PhaseGrid>(
      c.grid.nr, c.grid.r_max, VelocitySet::make(c.model.velocity, c.model.R, c.grid.n_speed, c.grid.n_angle));
}

/// Runs the kinetic solver described by c. Files (CSV, manifest and
/// checkpoints) are written under out_dir unless it is empty; the CSV bytes
/// are always returned in the result.
inline SimulationResult run_simulation(const RunConfig& c, const std::string& out_dir = "") {
  const auto start = std::chrono::steady_clock::now();
  SimulationResult res;
  const auto grid = make_grid(c);
  const PhaseGrid& G = *grid;
  const ModelParams model{c.model.chi0, c.model.alpha};
  PhaseState s = make_initial_state(grid, c.initial);
  res.dt = simulation_dt(c, G);
  const long long sub = std::llround(c.time.output_every / res.dt);
  const long long n_out = std::llround(c.time.t_end / c.time.output_every);

  const bool track_excess = c.initial.family == InitialFamily::ComparisonDominated;
  const Supersolution sup{c.initial.k0, c.initial.gamma};
  const ThresholdModel tm = kinetic_model(c.model.velocity);
  const bool use_virial = c.output.virial && c.model.alpha == 0.0;

  DetectorParams dp;
  dp.growth_factor = c.output.growth_factor;
  dp.t_end = c.time.t_end;
  dp.virial = use_virial;
  dp.vp = {tm, c.model.chi0, c.model.R, G.dr()};

  std::ostringstream csv;
  write_csv_header(csv, c.output.norms);
  namespace fs = std::filesystem;
  if (!out_dir.empty()) fs::create_directories(out_dir);

  const double M0 = total_mass(s);
  auto sample = [&](long long idx) {
    DiagnosticsRecord rec = make_record(s, c.output.norms);
    rec.t = static_cast<double>(idx) * c.time.output_every;
    if (track_excess) {
      rec.excess = comparison_excess(s, sup);
      res.max_excess = std::isnan(res.max_excess) ? rec.excess : std::max(res.max_excess, rec.excess);
    }
    if (rec.t > 0.0 && M0 > 0.0)
      res.max_mass_drift_rate = std::max(res.max_mass_drift_rate, std::abs(rec.M + res.outflow - M0) / (M0 * rec.t));
    write_csv_row(csv, rec);
    res.series.push_back(std::move(rec));
    if (!out_dir.empty() && c.output.checkpoint_every > 0 && idx % c.output.checkpoint_every == 0) {
      const std::string name = "checkpoint_" + std::to_string(idx) + ".txt";
      save_checkpoint((fs::path(out_dir) / name).string(), s, model);
      res.checkpoints.push_back(name);
    }
  };
  auto finite_state = [&]() {
    for (double x : s.g)
      if (!std::isfinite(x) || x < 0.0) return false;
    return true;
  };

  try {
    sample(0);
    res.verdict = blowup_detector(res.series, dp);
    for (long long idx = 1; idx <= n_out; ++idx) {
      if (res.verdict.verdict == Verdict::BlowupSuspected && c.output.stop_on_blowup) break;
      for (long long n = 0; n < sub; ++n) {
        res.outflow += strang_step(s, model, res.dt).outflow;
        ++res.steps;
      }
      s.t = static_cast<double>(idx) * c.time.output_every;
      if (!finite_state()) throw NumericalError("non-finite or negative density at t = " + std::to_string(s.t));
      sample(idx);
      res.verdict = blowup_detector(res.series, dp);
    }
    res.exit_code = res.verdict.verdict == Verdict::BlowupSuspected ? ExitBlowup : ExitGlobal;
  } catch (const NumericalError& e) {
    res.exit_code = ExitNumerical;
    res.error = e.what();
  }
  if (use_virial) {
    res.virial_tracked = true;
    res.virial = virial_tracker(res.series, dp.vp);
  }
  res.csv = csv.str();
  res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (!out_dir.empty()) {
    std::ofstream(fs::path(out_dir) / c.output.csv) << res.csv;
  }
  return res;
}

inline json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

inline json threshold_summary(const RunConfig& c, double M) {
  const ThresholdModel tm = kinetic_model(c.model.velocity);
  const double mc = critical_mass(tm, c.model.chi0, c.model.R);
  json j = {{"model", std::string(to_string(tm))},
            {"critical_mass", mc},
            {"mass", M},
            {"mass_margin", M - mc},
            {"delta", delta(tm, M, c.model.chi0, c.model.R)}};
  return j;
}

inline json manifest_json(const RunConfig& c, const SimulationResult& r) {
  json j;
  j["schema"] = manifest_schema;
  j["code_version"] = KINCHEM_VERSION;
  j["config"] = config_to_json(c);
  j["wall_clock_seconds"] = r.wall_seconds;
  j["exit_code"] = r.exit_code;
  if (!r.error.empty()) j["error"] = r.error;
  j["verdict"] = {{"verdict", std::string(to_string(r.verdict.verdict))},
                  {"advisory", true},
                  {"reason", r.verdict.reason},
                  {"time", number_or_null(r.verdict.time)},
                  {"projected_vanishing_time", number_or_null(r.verdict.projected_vanishing_time)},
                  {"max_norm_ratio", r.verdict.max_norm_ratio}};
  if (r.virial_tracked) {
    j["virial"] = {{"holds", r.virial.holds},
                   {"first_violation_time", number_or_null(r.virial.first_violation_time)},
                   {"max_excess", number_or_null(r.virial.max_excess)},
                   {"tolerance", r.virial.tolerance},
                   {"delta", r.virial.delta},
                   {"mu0", r.virial.mu0},
                   {"I0", r.virial.I0},
                   {"projected_vanishing_time", number_or_null(r.virial.projected_vanishing_time)},
                   {"message", r.virial.message}};
  }
  const double M0 = r.series.empty() ? 0.0 : r.series.front().M;
  j["thresholds"] = threshold_summary(c, M0);
  if (c.model.alpha > 0.0 && c.model.velocity == VelocityKind::Ball && !r.series.empty()) {
    const auto& r0 = r.series.front();
    const double mu0 = r0.dIdt + c.model.chi0 * omega_of(ThresholdModel::BallKinetic, c.model.R) * r0.K;
    const auto a = alpha_blowup_criterion(r0.I, mu0, r0.M, c.model.chi0, c.model.R, c.model.alpha, kernel_constant());
    j["thresholds"]["alpha_criterion"] = {{"applicable", a.applicable},
                                          {"message", a.message},
                                          {"sharp_satisfied", a.sharp.satisfied},
                                          {"sharp_margin", number_or_null(a.sharp.margin)},
                                          {"simplified_satisfied", a.simplified.satisfied},
                                          {"simplified_margin", number_or_null(a.simplified.margin)}};
  }
  j["run"] = {{"dt", r.dt},
              {"steps", r.steps},
              {"samples", r.series.size()},
              {"t_final", r.series.empty() ? 0.0 : r.series.back().t},
              {"outflow", r.outflow},
              {"max_mass_drift_rate", r.max_mass_drift_rate},
              {"max_excess", number_or_null(r.max_excess)}};
  j["artifacts"] = {{"csv", c.output.csv}, {"checkpoints", r.checkpoints}};
  return j;
}

inline void write_manifest(const std::string& out_dir, const RunConfig& c, const SimulationResult& r) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  std::ofstream os(fs::path(out_dir) / c.output.manifest);
  if (!os) throw InvalidArgument("cannot write manifest in '" + out_dir + "'");
  os << manifest_json(c, r).dump(2) << '\n';
}

}  // namespace kinchem
