#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kinchem/battery.hpp"
#include "kinchem/kinchem.hpp"

namespace fs = std::filesystem;
using namespace kinchem;

namespace {

struct Globals {
  std::size_t threads = 1;
  std::uint64_t seed = 1;
  std::string out;
};

void emit(const json& j, const std::string& out_dir, const std::string& name) {
  std::cout << j.dump(2) << '\n';
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    std::ofstream(fs::path(out_dir) / name) << j.dump(2) << '\n';
  }
}

json criterion_json(const CriterionResult& c) {
  return {{"satisfied", c.satisfied}, {"lhs", number_or_null(c.lhs)}, {"rhs", number_or_null(c.rhs)},
          {"margin", number_or_null(c.margin)}};
}

int cmd_simulate(const std::string& config_path, const Globals& g) {
  RunConfig cfg;
  try {
    cfg = load_config(config_path);
  } catch (const InvalidArgument& e) {
    std::cerr << "kinchem: " << e.what() << '\n';
    return ExitUsage;
  }
  const std::string out = g.out.empty() ? "kinchem-out" : g.out;
  SimulationResult r;
  try {
    r = run_simulation(cfg, out);
    write_manifest(out, cfg, r);
  } catch (const CflViolation& e) {
    std::cerr << "kinchem: " << config_path << ": time.dt: " << e.what() << '\n';
    return ExitUsage;
  } catch (const InvalidArgument& e) {
    std::cerr << "kinchem: " << config_path << ": " << e.what() << '\n';
    return ExitUsage;
  }
  std::cout << to_string(r.verdict.verdict) << " (advisory): " << r.verdict.reason << '\n';
  if (!r.error.empty()) std::cerr << "kinchem: numerical failure: " << r.error << '\n';
  std::cout << "wrote " << (fs::path(out) / cfg.output.csv).string() << " and "
            << (fs::path(out) / cfg.output.manifest).string() << '\n';
  return r.exit_code;
}

int cmd_thresholds(double chi0, double R, double alpha, const std::string& model_name, double mass, double I0,
                   double mu0, const Globals& g) {
  ThresholdModel model;
  if (model_name == "ball")
    model = ThresholdModel::BallKinetic;
  else if (model_name == "sphere")
    model = ThresholdModel::SphereKinetic;
  else if (model_name == "parabolic")
    model = ThresholdModel::ParabolicUniformF;
  else
    model = threshold_model_from_string(model_name);
  const double mc = critical_mass(model, chi0, R);
  json j;
  j["schema"] = manifest_schema;
  j["model"] = std::string(to_string(model));
  j["chi0"] = chi0;
  j["R"] = R;
  j["alpha"] = alpha;
  j["M_critical"] = mc;
  j["omega"] = omega_of(model, R);
  j["critical_masses"] = {{"ball", critical_mass(ThresholdModel::BallKinetic, chi0, R)},
                          {"sphere", critical_mass(ThresholdModel::SphereKinetic, chi0, R)},
                          {"parabolic", critical_mass(ThresholdModel::ParabolicUniformF, chi0, R)}};
  json matched = json::array();
  for (Equilibrium F : {Equilibrium::UniformBall, Equilibrium::SphereDelta}) {
    const auto kind = F == Equilibrium::UniformBall ? VelocityKind::Ball : VelocityKind::Sphere;
    const auto v = VelocitySet::make(kind, R, 8, 32);
    const auto pp = parabolic_params(F, chi0, v);
    const double m2 = equilibrium_second_moment(F, R);
    matched.push_back({{"F", std::string(to_string(F))},
                       {"D", pp.D},
                       {"chi_tilde", pp.chi_tilde},
                       {"kinetic_sharp", kinetic_sharp_threshold(m2, first_moment_coefficient(v), chi0)},
                       {"parabolic", parabolic_threshold(pp.D, pp.chi_tilde)}});
  }
  j["matched_thresholds"] = matched;
  const auto vb = VelocitySet::ball(R, 8, 32);
  j["small_mass"] = {{"gamma", 0.5}, {"bound", small_mass_bound(0.5, chi0, vb)}};
  const auto gs = gamma_star();
  j["small_mass_optimal"] = {{"gamma_star", gs.gamma}, {"bound", 4.0 * pi * gs.ratio / (chi0 * vb.measure())}};
  if (mass >= 0.0) {
    j["mass"] = mass;
    j["delta"] = delta(model, mass, chi0, R);
    j["mass_margin"] = mass - mc;
    j["supercritical"] = mass > mc;
  }
  if (alpha > 0.0 && mass >= 0.0 && I0 >= 0.0) {
    const auto a = alpha_blowup_criterion(I0, mu0, mass, chi0, R, alpha, kernel_constant());
    j["alpha_criterion"] = {{"applicable", a.applicable}, {"message", a.message},   {"delta", a.delta},
                            {"eta", a.eta},               {"A", a.A},               {"I0_bound", number_or_null(a.I0_bound)},
                            {"sharp", criterion_json(a.sharp)}, {"simplified", criterion_json(a.simplified)},
                            {"kernel_constant", kernel_constant()}};
  }
  emit(j, g.out, "thresholds.json");
  return 0;
}

int cmd_verify(const Globals& g) {
  const auto checks = run_battery(g.seed);
  json arr = json::array();
  bool all = true;
  for (const auto& c : checks) {
    all = all && c.passed;
    arr.push_back({{"name", c.name}, {"passed", c.passed}, {"value", number_or_null(c.value)},
                   {"tolerance", c.tolerance}, {"detail", c.detail}});
  }
  json j = {{"schema", manifest_schema}, {"seed", g.seed}, {"all_passed", all}, {"checks", arr}};
  emit(j, g.out, "verify_lemmas.json");
  return all ? ExitGlobal : ExitNumerical;
}

int cmd_limit_study(LimitStudyConfig c, const std::string& F_name, const Globals& g) {
  c.F = equilibrium_from_string(F_name);
  c.kind = c.F == Equilibrium::UniformBall ? VelocityKind::Ball : VelocityKind::Sphere;
  const auto rep = limit_study(c);
  const std::string out = g.out.empty() ? "limit-study-out" : g.out;
  fs::create_directories(out);
  {
    std::ofstream csv(fs::path(out) / "limit_study.csv");
    csv << "epsilon,e\n";
    for (std::size_t n = 0; n < rep.epsilons.size(); ++n)
      csv << format_double(rep.epsilons[n]) << ',' << format_double(rep.errors[n]) << '\n';
  }
  const bool halved = rep.errors.size() >= 2 && rep.errors.back() < 0.5 * rep.errors.front();
  json j = {{"schema", manifest_schema},
            {"F", std::string(to_string(c.F))},
            {"mass", c.mass},
            {"sigma", c.sigma},
            {"t_end", c.t_end},
            {"epsilons", rep.epsilons},
            {"errors", rep.errors},
            {"kinetic_mass", rep.kinetic_mass},
            {"parabolic_mass", rep.parabolic_mass},
            {"monotone", rep.monotone},
            {"halved", halved},
            {"verdict", rep.monotone && halved ? "converging" : "not converging"},
            {"csv", "limit_study.csv"}};
  emit(j, out, "limit_study.json");
  return 0;
}

int cmd_gamma_star(double tol, const Globals& g) {
  const auto gs = gamma_star(tol);
  json j = {{"schema", manifest_schema},
            {"gamma_star", gs.gamma},
            {"omega", omega_gamma(gs.gamma)},
            {"ratio", gs.ratio},
            {"value", gs.value},
            {"iterations", gs.iterations}};
  emit(j, g.out, "gamma_star.json");
  return 0;
}

/// Thresholds of both equilibria plus a parabolic run checking the exact
/// second-moment law dI/dt = 2 D M - chi~ M^2 / (4 pi).
int cmd_compare_parabolic(double chi0, double R, double mass, double sigma, double t_end, int nr, double r_max,
                          const Globals& g) {
  json j;
  j["schema"] = manifest_schema;
  j["kinetic_ball_critical"] = critical_mass(ThresholdModel::BallKinetic, chi0, R);
  j["parabolic_critical"] = critical_mass(ThresholdModel::ParabolicUniformF, chi0, R);
  j["ratio"] = critical_mass(ThresholdModel::BallKinetic, chi0, R) /
               critical_mass(ThresholdModel::ParabolicUniformF, chi0, R);
  const auto v = VelocitySet::ball(R, 8, 32);
  const auto pp = parabolic_params(Equilibrium::UniformBall, chi0, v);
  RadialDensity rho = radial_gaussian_density(nr, r_max / nr, mass, sigma);
  const double I0 = second_moment(rho), M0 = rho.mass();
  const double outflow = parabolic_run(rho, pp, t_end);
  const double rate = (second_moment(rho) - I0) / t_end;
  const double exact = 2.0 * pp.D * M0 - pp.chi_tilde * M0 * M0 / (4.0 * pi);
  j["run"] = {{"D", pp.D},
              {"chi_tilde", pp.chi_tilde},
              {"mass", M0},
              {"t_end", t_end},
              {"outflow", outflow},
              {"mass_change", rho.mass() + outflow - M0},
              {"dIdt_measured", rate},
              {"dIdt_exact", exact},
              {"threshold_parabolic", parabolic_threshold(pp.D, pp.chi_tilde)}};
  emit(j, g.out, "compare_parabolic.json");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kinchem: radially symmetric kinetic chemotaxis simulator"};
  app.set_version_flag("--version", std::string(KINCHEM_VERSION));
  app.require_subcommand(1);
  Globals g;
  app.add_option("--threads", g.threads, "worker threads")->check(CLI::Range(1, 256));
  app.add_option("--seed", g.seed, "seed for randomized test batteries");
  app.add_option("--out", g.out, "output directory");

  std::string config;
  auto* sim = app.add_subcommand("simulate", "run a configured simulation (exit 0 global-looking, 2 blow-up suspected)");
  sim->fallthrough();
  sim->add_option("--config", config, "JSON run configuration")->required();

  double chi0 = 1.0, R = 1.0, alpha = 0.0, mass = -1.0, I0 = -1.0, mu0 = 0.0;
  std::string model = "ball";
  auto* thr = app.add_subcommand("thresholds", "critical masses and blow-up criteria as JSON");
  thr->fallthrough();
  thr->add_option("--chi0", chi0)->check(CLI::PositiveNumber);
  thr->add_option("--R", R)->check(CLI::PositiveNumber);
  thr->add_option("--alpha", alpha)->check(CLI::NonNegativeNumber);
  thr->add_option("--model", model, "ball, sphere or parabolic");
  thr->add_option("--mass", mass, "total mass (enables delta and margins)");
  thr->add_option("--I0", I0, "initial second moment (alpha > 0 criterion)");
  thr->add_option("--mu0", mu0, "initial dI/dt + chi0 omega K (alpha > 0 criterion)");

  auto* ver = app.add_subcommand("verify-lemmas", "run the oracle battery and emit a pass/fail report");
  ver->fallthrough();

  LimitStudyConfig lc;
  std::string F = "uniform-ball";
  auto* lim = app.add_subcommand("limit-study", "drift-diffusion convergence study");
  lim->fallthrough();
  lim->add_option("--epsilons", lc.epsilons, "comma-separated epsilons")->delimiter(',');
  lim->add_option("--F", F, "equilibrium: uniform-ball or sphere-delta");
  lim->add_option("--nr", lc.nr)->check(CLI::Range(4, 100000));
  lim->add_option("--r-max", lc.r_max)->check(CLI::PositiveNumber);
  lim->add_option("--n-speed", lc.n_speed)->check(CLI::Range(1, 1024));
  lim->add_option("--n-angle", lc.n_angle)->check(CLI::Range(4, 4096));
  lim->add_option("--chi0", lc.chi0)->check(CLI::PositiveNumber);
  lim->add_option("--mass", lc.mass)->check(CLI::NonNegativeNumber);
  lim->add_option("--sigma", lc.sigma)->check(CLI::PositiveNumber);
  lim->add_option("--t-end", lc.t_end)->check(CLI::PositiveNumber);

  double tol = 1e-6;
  auto* gam = app.add_subcommand("gamma-star", "optimal exponent of the small-mass bound");
  gam->fallthrough();
  gam->add_option("--tol", tol)->check(CLI::PositiveNumber);

  double cp_chi0 = 1.0, cp_R = 1.0, cp_mass = 4.0, cp_sigma = 0.5, cp_t = 0.5, cp_rmax = 6.0;
  int cp_nr = 256;
  auto* cmp = app.add_subcommand("compare-parabolic", "kinetic vs parabolic thresholds and the parabolic virial law");
  cmp->fallthrough();
  cmp->add_option("--chi0", cp_chi0)->check(CLI::PositiveNumber);
  cmp->add_option("--R", cp_R)->check(CLI::PositiveNumber);
  cmp->add_option("--mass", cp_mass)->check(CLI::NonNegativeNumber);
  cmp->add_option("--sigma", cp_sigma)->check(CLI::PositiveNumber);
  cmp->add_option("--t-end", cp_t)->check(CLI::PositiveNumber);
  cmp->add_option("--nr", cp_nr)->check(CLI::Range(4, 100000));
  cmp->add_option("--r-max", cp_rmax)->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    if (code == 0) return 0;
    std::cerr << app.help();
    return ExitUsage;
  }
  set_threads(g.threads);
  try {
    if (sim->parsed()) return cmd_simulate(config, g);
    if (thr->parsed()) return cmd_thresholds(chi0, R, alpha, model, mass, I0, mu0, g);
    if (ver->parsed()) return cmd_verify(g);
    if (lim->parsed()) return cmd_limit_study(lc, F, g);
    if (gam->parsed()) return cmd_gamma_star(tol, g);
    if (cmp->parsed()) return cmd_compare_parabolic(cp_chi0, cp_R, cp_mass, cp_sigma, cp_t, cp_nr, cp_rmax, g);
  } catch (const InvalidArgument& e) {
    std::cerr << "kinchem: " << e.what() << '\n';
    return ExitUsage;
  } catch (const NumericalError& e) {
    std::cerr << "kinchem: numerical failure: " << e.what() << '\n';
    return ExitNumerical;
  }
  std::cerr << app.help();
  return ExitUsage;
}
