#pragma once

// One runner per single-run command. A runner is pure: it maps a resolved RunConfig to the
// file contents it would write, a JSON summary, and warnings. Persisting them is the job of
// the run record, so sweeps and tests can call runners without touching the filesystem.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "pjj/harness/config.hpp"
#include "pjj/harness/format.hpp"
#include "pjj/pjj.hpp"

namespace pjj::harness {

struct OutputFile {
  std::string name;
  std::string content;
};

struct RunOutput {
  std::vector<OutputFile> files;
  /// Tabular result merged by sweeps (long format, one row per sample).
  std::optional<CsvTable> primary;
  json summary = json::object();
  std::vector<std::string> warnings;
  int exit_code = 0;

  const OutputFile* file(const std::string& name) const {
    for (const auto& f : files) if (f.name == name) return &f;
    return nullptr;
  }
};

namespace detail {

inline numerics::OdeOptions ode_from(const RunConfig& rc) {
  numerics::OdeOptions o;
  o.stepper = rc.flag("adaptive") ? numerics::Stepper::dormand_prince : numerics::Stepper::rk4_fixed;
  o.dt = rc.number("dt");
  o.output_dt = rc.number("output_dt");
  o.rtol = rc.number("rtol");
  o.atol = rc.number("atol");
  for (const char* k : {"dt", "output_dt", "rtol", "atol"}) {
    if (!(rc.number(k) > 0.0)) throw ConfigError(rc.command + "." + k, std::nullopt, "must be > 0");
  }
  return o;
}

inline json steps_json(const numerics::StepStats& s) {
  return {{"accepted", s.accepted}, {"rejected", s.rejected}, {"rhs_evals", s.rhs_evals}};
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

/// The rate-based parameter block shared by quantum and fluctuations.
struct RateParams {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double G = 1.0;
  double Delta0 = 0.0;
  int n_total = 1;
};

inline RateParams rate_params(const RunConfig& rc) {
  RateParams r;
  r.n_total = static_cast<int>(rc.integer("nt"));
  r.G = rc.number("g_coupling");
  r.Delta0 = rc.number("delta0");
  if (r.n_total < 1) throw ConfigError(rc.command + ".nt", std::nullopt, "must be >= 1");
  if (!(r.G > 0.0)) throw ConfigError(rc.command + ".g_coupling", std::nullopt, "must be > 0");
  const bool rates = rc.has("lambda1") || rc.has("lambda2");
  if (rc.has("g")) {
    if (rates) throw ConfigError(rc.command + ".g", std::nullopt, "give either g or lambda1/lambda2, not both");
    // Equal Kerr rates 2Gg/N_T reproduce g = N_T (lambda1 + lambda2) / 4G.
    r.lambda1 = r.lambda2 = 2.0 * r.G * rc.number("g") / r.n_total;
  } else {
    r.lambda1 = rc.has("lambda1") ? rc.number("lambda1") : 0.0;
    r.lambda2 = rc.has("lambda2") ? rc.number("lambda2") : 0.0;
  }
  return r;
}

inline beam::EffectiveParams effective_from(const RateParams& r) {
  beam::EffectiveParams e;
  e.lambda1 = r.lambda1;
  e.lambda2 = r.lambda2;
  e.G = r.G;
  e.Delta0 = r.Delta0;
  e.N_T = r.n_total;
  return e;
}

} // namespace detail

inline RunOutput run_simulate(const RunConfig& rc) {
  RunOutput out;
  const double z0 = rc.number("z0"), phi0 = rc.number("phi0"), kappa = rc.number("kappa");
  const double G = rc.number("g_coupling"), N_T = rc.number("nt");
  if (kappa < 0.0) throw ConfigError("simulate.kappa", std::nullopt, "must be >= 0");

  double g = 0.0;
  mean_field::Detuning detuning = mean_field::Detuning::constant(0.0);
  const bool rates = rc.has("lambda1") || rc.has("lambda2") || rc.has("delta0");
  if (rates) {
    for (const char* k : {"g", "delta"}) {
      if (rc.has(k)) {
        throw ConfigError(std::string("simulate.") + k, std::nullopt,
                          "derived from lambda1/lambda2/delta0; give one parameterization only");
      }
    }
    if (!(G > 0.0)) throw ConfigError("simulate.g_coupling", std::nullopt, "must be > 0");
    detail::RateParams r;
    r.lambda1 = rc.has("lambda1") ? rc.number("lambda1") : 0.0;
    r.lambda2 = rc.has("lambda2") ? rc.number("lambda2") : 0.0;
    r.G = G;
    r.Delta0 = rc.has("delta0") ? rc.number("delta0") : 0.0;
    const auto e = [&] {
      auto e = detail::effective_from(r);
      e.N_T = N_T;
      return e;
    }();
    g = N_T * (e.lambda1 + e.lambda2) / (4.0 * G);
    detuning = mean_field::Detuning::from_effective(e);
  } else {
    if (!rc.has("g")) throw ConfigError("simulate.g", std::nullopt, "missing mandatory field 'g' (or lambda1/lambda2)");
    g = rc.number("g");
    detuning = mean_field::Detuning::constant(rc.has("delta") ? rc.number("delta") : 0.0);
  }

  mean_field::IntegrateOptions opts;
  opts.ode = detail::ode_from(rc);
  const double t_end = rc.number("t_end");

  CsvTable csv({"t", "z", "phi_mod2pi", "phi_unwrapped", "N", "energy", "current"});
  json diag;
  std::vector<double> times, zs;
  const bool conservative = kappa == 0.0;
  if (conservative) {
    const double Delta = detuning.at(0.0, 0.0);
    const auto traj = mean_field::integrate({z0, phi0}, g, Delta, t_end, opts);
    for (std::size_t i = 0; i < traj.size(); ++i) {
      const auto& s = traj.states[i];
      csv.add({traj.times[i], s.z, mean_field::wrap_phase(s.phi), s.phi, 1.0, traj.diagnostics.energy[i],
               mean_field::tunneling_current(s, G, N_T)});
    }
    diag = {{"max_energy_drift", traj.diagnostics.max_energy_drift},
            {"energy_within_tol", traj.diagnostics.energy_within_tol},
            {"energy_tol", opts.energy_tol},
            {"steps", detail::steps_json(traj.diagnostics.steps)}};
    if (traj.diagnostics.guard) diag["guard"] = {{"t", traj.diagnostics.guard->time}, {"z", traj.diagnostics.guard->z}};
    if (!traj.diagnostics.energy_within_tol) {
      out.warnings.push_back("energy drift " + format_number(traj.diagnostics.max_energy_drift) + " exceeds " +
                             format_number(opts.energy_tol));
    }
    times = traj.times;
    for (const auto& s : traj.states) zs.push_back(s.z);
    out.summary["Delta"] = Delta;
    try {
      const auto st = mean_field::detect_self_trapping(traj, g);
      out.summary["self_trapping"] = {{"mean_z", st.mean_z}, {"variance_z", st.variance_z}, {"z_s", st.z_s},
                                      {"periods", st.periods}, {"is_mst", st.is_mst},
                                      {"mst_type", mean_field::to_string(st.type)}};
    } catch (const DomainError& e) {
      out.summary["self_trapping"] = {{"error", e.what()}};
    }
  } else {
    mean_field::DampedParams p{g, kappa, detuning};
    const auto traj = mean_field::integrate_damped({z0, phi0, 1.0}, p, t_end, opts);
    double max_rel_N = 0.0;
    for (std::size_t i = 0; i < traj.size(); ++i) {
      const auto& s = traj.states[i];
      const double root = std::sqrt(std::max(0.0, s.N * s.N - s.z * s.z));
      csv.add({traj.times[i], s.z, mean_field::wrap_phase(s.phi), s.phi, s.N, traj.diagnostics.energy[i],
               G * N_T * root * std::sin(s.phi)});
      const double exact = std::exp(-kappa * traj.times[i]);
      max_rel_N = std::max(max_rel_N, std::abs(s.N - exact) / exact);
    }
    diag = {{"max_relative_N_error", max_rel_N}, {"steps", detail::steps_json(traj.diagnostics.steps)}};
    if (traj.diagnostics.guard) diag["guard"] = {{"t", traj.diagnostics.guard->time}, {"z", traj.diagnostics.guard->z}};
    times = traj.times;
    for (const auto& s : traj.states) zs.push_back(s.z);
    out.summary["time_dependent_detuning"] = detuning.time_dependent();
    // First sample from which |z| stays below 0.01 to the end of the run.
    std::optional<double> settled;
    for (std::size_t i = zs.size(); i-- > 0;) {
      if (std::abs(zs[i]) >= 0.01) break;
      settled = times[i];
    }
    out.summary["settle_time_abs_z_below_0.01"] = settled ? json(*settled) : json(nullptr);
  }
  out.summary["g"] = g;
  out.summary["kappa"] = kappa;
  out.summary["z0"] = z0;
  out.summary["phi0"] = phi0;
  out.summary["critical_g"] = std::isfinite(mean_field::critical_g(z0, phi0)) ? json(mean_field::critical_g(z0, phi0)) : json(nullptr);
  if (std::abs(z0) < 1.0) out.summary["stationary_g_s"] = mean_field::stationary_g_s(z0);
  out.summary["samples"] = times.size();
  out.summary["final_z"] = zs.empty() ? json(nullptr) : json(zs.back());
  out.summary["diagnostics"] = diag;
  out.files.push_back({"simulate.csv", csv.str()});
  out.primary = std::move(csv);
  return out;
}

inline json fixed_points_json(double g, double Delta) {
  json list = json::array();
  for (const auto& fp : phase_space::fixed_points(g, Delta)) {
    list.push_back({{"z_s", fp.z_s}, {"phi_s", fp.phi_s}, {"kind", phase_space::to_string(fp.kind)}, {"energy", fp.energy}});
  }
  json j = {{"g", g}, {"delta", Delta}, {"fixed_points", list}};
  if (Delta == 0.0) j["separatrix_energy"] = phase_space::separatrix_energy(g);
  else j["note"] = "Delta != 0: roots found numerically; the classification extends the symmetric (Delta = 0) analysis";
  return j;
}

inline RunOutput run_phase_portrait(const RunConfig& rc) {
  RunOutput out;
  const double g = rc.number("g"), Delta = rc.number("delta");
  const auto grid = phase_space::energy_grid(g, Delta, static_cast<int>(rc.integer("nz")), static_cast<int>(rc.integer("nphi")));
  CsvTable csv({"z", "phi", "energy"});
  for (std::size_t i = 0; i < grid.z_axis.size(); ++i) {
    for (std::size_t j = 0; j < grid.phi_axis.size(); ++j) csv.add({grid.z_axis[i], grid.phi_axis[j], grid.at(i, j)});
  }
  const json fps = fixed_points_json(g, Delta);
  out.files.push_back({"portrait.csv", csv.str()});
  out.files.push_back({"fixed_points.json", detail::dump(fps)});
  out.summary = fps;
  out.summary["grid"] = {{"nz", grid.z_axis.size()}, {"nphi", grid.phi_axis.size()}};
  if (Delta != 0.0) out.warnings.push_back(fps.at("note").get<std::string>());
  out.primary = std::move(csv);
  return out;
}

inline RunOutput run_coherence(const RunConfig& rc) {
  RunOutput out;
  const double g = rc.number("g"), theta0 = rc.number("theta0"), phi0 = rc.number("phi0");
  if (!(theta0 >= 0.0 && theta0 <= pi)) throw ConfigError("coherence.theta0", std::nullopt, "must lie in [0, pi]");
  coherence::SpinIntegrateOptions opts;
  opts.ode = detail::ode_from(rc);
  const auto traj = coherence::integrate_cartesian(coherence::to_spin({theta0, phi0}), g, rc.number("t_end"), opts);
  CsvTable csv({"t", "theta", "phi", "jx", "jy", "jz", "visibility"});
  double sum_vis = 0.0;
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const auto& u = traj.states[i];
    const auto b = coherence::to_bloch(u);
    const double vis = coherence::fringe_visibility(u);
    csv.add({traj.times[i], b.theta, b.phi, u.jx, u.jy, u.jz, vis});
    sum_vis += vis;
  }
  out.summary = {{"g", g},
                 {"theta0", theta0},
                 {"phi0", phi0},
                 {"samples", traj.times.size()},
                 {"mean_visibility", traj.times.empty() ? 0.0 : sum_vis / traj.times.size()},
                 {"max_norm_drift", traj.max_norm_drift},
                 {"renormalizations", traj.renormalizations.size()},
                 {"steps", detail::steps_json(traj.steps)}};
  if (!traj.renormalizations.empty()) {
    out.warnings.push_back("spin vector renormalized " + std::to_string(traj.renormalizations.size()) + " times");
  }
  out.files.push_back({"coherence.csv", csv.str()});
  out.primary = std::move(csv);
  return out;
}

inline RunOutput run_quantum(const RunConfig& rc) {
  RunOutput out;
  const auto r = detail::rate_params(rc);
  const auto p = quantum::AngularHamiltonianParams::from_rates(r.lambda1, r.lambda2, r.G, r.Delta0, r.n_total);
  const double theta0 = rc.number("theta0"), phi0 = rc.number("phi0");
  if (!(theta0 >= 0.0 && theta0 <= pi)) throw ConfigError("quantum.theta0", std::nullopt, "must lie in [0, pi]");
  const auto trace = quantum::visibility_trace(theta0, phi0, p, rc.number("t_end"), static_cast<int>(rc.integer("samples")));
  CsvTable csv({"t", "jx", "jy", "jz", "visibility", "delta_n"});
  double trailing = 0.0;
  std::size_t trailing_n = 0;
  double min_vis = 1.0;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto& s = trace[i];
    csv.add({s.t, s.jx, s.jy, s.jz, s.visibility, s.delta_n});
    min_vis = std::min(min_vis, s.visibility);
    if (2 * i >= trace.size()) {
      trailing += s.visibility;
      ++trailing_n;
    }
  }
  const auto n0 = p.n0();
  out.summary = {{"nt", r.n_total},
                 {"lambda1", r.lambda1},
                 {"lambda2", r.lambda2},
                 {"g_coupling", r.G},
                 {"delta0", r.Delta0},
                 {"g", p.nonlinearity()},
                 {"lambda_sum", p.lambda_sum},
                 {"bias", p.bias},
                 {"n0", n0 ? json(*n0) : json(nullptr)},
                 {"samples", trace.size()},
                 {"min_visibility", min_vis},
                 {"trailing_half_mean_visibility", trailing_n ? trailing / trailing_n : 0.0}};
  out.files.push_back({"quantum.csv", csv.str()});
  out.primary = std::move(csv);
  return out;
}

inline json fluctuation_json(const quantum::FluctuationReport& f) {
  return {{"E_c", f.E_c},
          {"E_j", f.E_j},
          {"E_c_prime", f.E_c_prime},
          {"delta_n_analytic", f.delta_n_analytic},
          {"delta_phi_analytic", f.delta_phi_analytic},
          {"uncertainty_product", f.delta_n_analytic * f.delta_phi_analytic},
          {"delta_n_exact", f.delta_n_exact},
          {"delta_n_rabi", f.delta_n_rabi},
          {"delta_n_josephson", std::isfinite(f.delta_n_josephson) ? json(f.delta_n_josephson) : json(nullptr)},
          {"g", f.g}};
}

inline RunOutput run_fluctuations(const RunConfig& rc) {
  RunOutput out;
  const auto r = detail::rate_params(rc);
  const auto f = quantum::fluctuation_report(detail::effective_from(r));
  out.summary = fluctuation_json(f);
  out.summary["nt"] = r.n_total;
  out.summary["regime"] = mean_field::to_string(mean_field::classify_regime(f.g, r.n_total).regime);
  out.files.push_back({"fluctuations.json", detail::dump(out.summary)});
  CsvTable row({"E_c", "E_j", "E_c_prime", "delta_n_analytic", "delta_phi_analytic", "delta_n_exact", "delta_n_rabi", "g"});
  row.add({f.E_c, f.E_j, f.E_c_prime, f.delta_n_analytic, f.delta_phi_analytic, f.delta_n_exact, f.delta_n_rabi, f.g});
  out.primary = std::move(row);
  return out;
}

namespace detail {

inline beam::PhysicalBeam physical_beam(const json& j) {
  beam::PhysicalBeam b;
  b.mu = j.at("mu").get<double>();
  b.length = j.at("L").get<double>();
  b.rigidity_ratio = j.at("K").get<double>();
  b.linear_modulus = j.at("linear_modulus").get<double>();
  if (j.contains("omega0")) b.omega0 = j.at("omega0").get<double>();
  b.coupling = j.at("G0").get<double>();
  b.damping = j.at("kappa0").get<double>();
  return b;
}

inline json audit_json(const beam::ResonatorAudit& a) {
  return {{"zeta", a.mode.zeta},
          {"effective_mass", a.mode.effective_mass},
          {"mode_frequency", a.mode.frequency},
          {"omega0", a.mode.omega0},
          {"n11", a.mode.n11},
          {"n11_scaled", a.mode.n11_scaled},
          {"lambda0", a.mode.duffing_lambda0},
          {"duffing_coefficient", a.mode.duffing_coefficient},
          {"x0", a.zero_point},
          {"lambda_tilde", a.lambda_tilde},
          {"lambda", a.lambda}};
}

} // namespace detail

inline RunOutput run_beam_params(const RunConfig& rc) {
  RunOutput out;
  const auto b1 = detail::physical_beam(rc.beam1);
  const auto b2 = detail::physical_beam(rc.beam2);
  beam::EffectiveOptions opts;
  const std::string conv = rc.text("convention");
  if (conv == "quarter_lambda") opts.convention = beam::QuarticConvention::quarter_lambda;
  else if (conv == "full_lambda") opts.convention = beam::QuarticConvention::full_lambda;
  else throw ConfigError("beam-params.convention", std::nullopt, "expected quarter_lambda or full_lambda");
  opts.rwa_warn = rc.number("rwa_warn");
  opts.rwa_reject = rc.number("rwa_reject");
  const auto e = beam::to_effective(b1, b2, rc.number("nt"), opts);
  const auto d = beam::to_dimensionless(e);
  json ratios = json::object();
  for (const auto& r : e.rwa_ratios) ratios[r.name] = r.value;
  const auto regime = mean_field::classify_regime(d);
  out.summary = {{"physical", {{"beam1", rc.beam1}, {"beam2", rc.beam2}, {"nt", e.N_T}, {"convention", conv}}},
                 {"resonators", {{"beam1", detail::audit_json(*e.beam1)}, {"beam2", detail::audit_json(*e.beam2)}}},
                 {"effective",
                  {{"lambda1", e.lambda1}, {"lambda2", e.lambda2}, {"G_tilde", e.G_tilde}, {"G", e.G},
                   {"Delta0", e.Delta0}, {"kappa1", e.kappa1}, {"kappa2", e.kappa2}}},
                 {"dimensionless", {{"g", d.g}, {"Delta", d.Delta}, {"kappa", d.kappa}, {"N_T", d.N_T}}},
                 {"regime", {{"name", mean_field::to_string(regime.regime)}, {"boundary", regime.boundary}}},
                 {"rwa_ratios", ratios},
                 {"warnings", e.warnings}};
  out.warnings = e.warnings;
  out.files.push_back({"beam_params.json", detail::dump(out.summary)});
  return out;
}

/// Runner for any single-run command.
inline RunOutput run_single(const RunConfig& rc) {
  if (rc.command == "simulate") return run_simulate(rc);
  if (rc.command == "phase-portrait") return run_phase_portrait(rc);
  if (rc.command == "coherence") return run_coherence(rc);
  if (rc.command == "quantum") return run_quantum(rc);
  if (rc.command == "fluctuations") return run_fluctuations(rc);
  if (rc.command == "beam-params") return run_beam_params(rc);
  throw ConfigError("command", std::nullopt, "'" + rc.command + "' is not a single-run command");
}

} // namespace pjj::harness
