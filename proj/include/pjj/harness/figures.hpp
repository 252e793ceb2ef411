#pragma once

// Figure bundles: the published parameter sets, run through the same runners as the CLI,
// with a manifest of checks. Quantitative anchors are asserted and decide the exit code;
// qualitative waveform features are measured and reported only.

#include <cmath>
#include <string>
#include <vector>

#include "pjj/harness/commands.hpp"
#include "pjj/harness/sweep.hpp"

namespace pjj::harness {

struct FigureCheck {
  std::string name;
  double measured = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  std::string relation = "abs_diff"; ///< abs_diff, less, greater or equal_label
  std::string detail;
  bool passed = false;
};

class FigureManifest {
public:
  explicit FigureManifest(std::string id) : id_(std::move(id)) {}

  void close_to(std::string name, double measured, double expected, double tol) {
    push({std::move(name), measured, expected, tol, "abs_diff", {}, std::abs(measured - expected) <= tol});
  }
  void less(std::string name, double measured, double bound) {
    push({std::move(name), measured, bound, 0.0, "less", {}, measured < bound});
  }
  void greater(std::string name, double measured, double bound) {
    push({std::move(name), measured, bound, 0.0, "greater", {}, measured > bound});
  }
  void label(std::string name, const std::string& measured, const std::string& expected) {
    FigureCheck c{std::move(name), 0.0, 0.0, 0.0, "equal_label", measured + " (expected " + expected + ")", measured == expected};
    push(std::move(c));
  }
  void feature(std::string name, json value) { features_[name] = std::move(value); }
  void parameters(json p) { parameters_ = std::move(p); }

  bool all_passed() const {
    for (const auto& c : checks_) if (!c.passed) return false;
    return true;
  }
  std::vector<std::string> failures() const {
    std::vector<std::string> out;
    for (const auto& c : checks_) {
      if (!c.passed) out.push_back(c.name + ": " + (c.relation == "equal_label" ? c.detail : "measured " + format_number(c.measured)));
    }
    return out;
  }

  json to_json() const {
    json checks = json::array();
    for (const auto& c : checks_) {
      json j = {{"name", c.name}, {"relation", c.relation}, {"passed", c.passed}};
      if (c.relation == "equal_label") j["detail"] = c.detail;
      else {
        j["measured"] = c.measured;
        j["expected"] = c.expected;
        if (c.relation == "abs_diff") j["tolerance"] = c.tolerance;
      }
      checks.push_back(std::move(j));
    }
    return {{"figure", id_}, {"parameters", parameters_}, {"checks", checks}, {"reported_features", features_},
            {"all_checks_passed", all_passed()}};
  }

private:
  void push(FigureCheck c) { checks_.push_back(std::move(c)); }

  std::string id_;
  std::vector<FigureCheck> checks_;
  json features_ = json::object();
  json parameters_ = json::object();
};

namespace detail {

inline RunConfig single(const std::string& command, json overrides) {
  const CommandSchema& s = *find_schema(command);
  RunConfig rc;
  rc.command = command;
  for (const auto& p : s.params) if (!p.fallback.is_null()) rc.params[p.key] = p.fallback;
  for (auto& [k, v] : overrides.items()) rc.params[k] = v;
  return rc;
}

inline std::string join_tables(const std::vector<SweepItem>& items, const std::string& column) {
  std::string csv = merge_long(items);
  const auto nl = csv.find('\n');
  return column + csv.substr(5, nl - 5) + csv.substr(nl);
}

inline void require_ok(const std::vector<SweepItem>& items) {
  for (const auto& it : items) {
    if (!it.ok) throw SolverError("figure run at value " + format_number(it.value) + " failed: " + it.message);
  }
}

} // namespace detail

/// Energy landscapes at g in {0.9, 1.8, 2.5}, Delta = 0.
inline RunOutput figure2() {
  FigureManifest m("fig2");
  const std::vector<double> gs{0.9, 1.8, 2.5};
  m.parameters({{"g", gs}, {"delta", 0.0}, {"nz", 201}, {"nphi", 201}});
  const auto items = sweep_values("phase-portrait", detail::single("phase-portrait", {{"g", 1.0}}).params, "g", gs, 1);
  detail::require_ok(items);
  json fps = json::array();
  for (const auto& it : items) fps.push_back(it.output.summary);

  auto points = [](double g) { return phase_space::fixed_points(g, 0.0); };
  const auto p09 = points(0.9);
  m.close_to("g=0.9 fixed point count", static_cast<double>(p09.size()), 2.0, 0.0);
  if (p09.size() == 2) {
    m.label("g=0.9 (0,0) kind", phase_space::to_string(p09[0].kind), "Minimum");
    m.close_to("g=0.9 (0,0) energy", p09[0].energy, -1.0, 1e-8);
    m.label("g=0.9 (0,pi) kind", phase_space::to_string(p09[1].kind), "Maximum");
    m.close_to("g=0.9 (0,pi) energy", p09[1].energy, 1.0, 1e-8);
  }
  for (double g : {1.8, 2.5}) {
    const auto p = points(g);
    const std::string tag = "g=" + format_number(g);
    m.close_to(tag + " fixed point count", static_cast<double>(p.size()), 4.0, 0.0);
    if (p.size() != 4) continue;
    m.label(tag + " (0,pi) kind", phase_space::to_string(p[1].kind), "Saddle");
    const double zs = std::sqrt(1.0 - 1.0 / (g * g));
    const double es = 0.5 * g * zs * zs + std::sqrt(1.0 - zs * zs);
    for (int k : {2, 3}) {
      const std::string side = p[k].z_s > 0 ? "+" : "-";
      m.label(tag + " pi-phase " + side + "z_s kind", phase_space::to_string(p[k].kind), "Maximum");
      m.close_to(tag + " pi-phase " + side + "z_s location", std::abs(p[k].z_s), zs, 1e-8);
      m.close_to(tag + " pi-phase " + side + "z_s energy", p[k].energy, es, 1e-8);
    }
  }
  const auto p25 = points(2.5);
  if (p25.size() == 4) {
    m.close_to("g=2.5 |z_s| = 0.91652", std::abs(p25[3].z_s), 0.91652, 1e-5);
    m.close_to("g=2.5 maximum energy 1.45", p25[3].energy, 1.45, 1e-8);
  }
  m.close_to("count at g=1 (no pi-phase pair yet)", static_cast<double>(points(1.0).size()), 2.0, 0.0);
  m.close_to("count just above g=1", static_cast<double>(points(1.0 + 1e-9).size()), 4.0, 0.0);

  RunOutput out;
  out.files.push_back({"fig2_portraits.csv", detail::join_tables(items, "g")});
  out.files.push_back({"fig2_fixed_points.json", detail::dump(fps)});
  out.summary = m.to_json();
  out.files.push_back({"manifest.json", detail::dump(out.summary)});
  out.warnings = m.failures();
  out.exit_code = m.all_passed() ? 0 : 2;
  return out;
}

/// Six-panel g scan from (z0, phi0) = (0.3, pi) across the self-trapping thresholds.
inline RunOutput figure3() {
  FigureManifest m("fig3");
  const double z0 = 0.3, phi0 = pi;
  const std::vector<double> gs{0.9, 1.0, 1.02357, 1.04, 1.04828, 1.056};
  m.parameters({{"g", gs}, {"z0", z0}, {"phi0", phi0}, {"delta", 0.0}, {"t_end", 200.0}});
  const auto base = detail::single("simulate", {{"z0", z0}, {"phi0", phi0}, {"delta", 0.0}, {"t_end", 200.0}});
  const auto items = sweep_values("simulate", base.params, "g", gs, 0);
  detail::require_ok(items);

  const double g_cr = mean_field::critical_g(z0, phi0);
  const double g_s = mean_field::stationary_g_s(z0);
  m.close_to("g_cr(0.3, pi) = 1.02357", g_cr, 1.02357, 1e-5);
  m.close_to("g_s(0.3) = 1.04828", g_s, 1.04828, 1e-5);
  m.close_to("H_J(0.3, pi) at g_cr equals the separatrix energy", mean_field::hamiltonian({z0, phi0}, g_cr, 0.0),
             phase_space::separatrix_energy(g_cr), 1e-12);

  auto st = [&](std::size_t i) { return items[i].output.summary.at("self_trapping"); };
  for (std::size_t i = 0; i < gs.size(); ++i) {
    const auto s = st(i);
    const std::string tag = "g=" + format_number(gs[i]);
    const bool asserted = i <= 1 || i == 3 || i == 5;
    if (!s.contains("mean_z")) {
      // The separatrix panel (g = g_cr) has no asserted verdict; a failed analysis there is only reported.
      if (asserted) m.label(tag + " self-trapping analysis", "error: " + s.at("error").get<std::string>(), "ok");
      else m.feature(tag, s);
      continue;
    }
    m.feature(tag, s);
    const double mean = s.at("mean_z").get<double>();
    const std::string type = s.at("mst_type").get<std::string>();
    if (i <= 1) {
      m.less(tag + " |<z>| < 0.02", std::abs(mean), 0.02);
    } else if (i == 3) {
      m.label(tag + " classification", type, "TypeI");
    } else if (i == 5) {
      m.label(tag + " classification", type, "TypeII");
      m.greater(tag + " |<z>| > z_s", std::abs(mean), s.at("z_s").get<double>());
    }
  }
  // The sweep value 1.04828 is the rounded caption value; the stationarity check uses g_s itself.
  {
    auto rc = base;
    rc.params["g"] = g_s;
    const auto r = run_simulate(rc);
    m.less("g=g_s variance of z over the trailing half < 1e-4",
           r.summary.at("self_trapping").at("variance_z").get<double>(), 1e-4);
  }

  RunOutput out;
  out.files.push_back({"fig3_trajectories.csv", detail::join_tables(items, "g")});
  out.files.push_back({"fig3_summary.csv", sweep_summary_csv(items)});
  out.summary = m.to_json();
  out.files.push_back({"manifest.json", detail::dump(out.summary)});
  out.warnings = m.failures();
  out.exit_code = m.all_passed() ? 0 : 2;
  return out;
}

/// Damped runs at g in {0.9, 1.023, 1.04828}, kappa = 0.001, from (0.3, pi).
inline RunOutput figure4() {
  FigureManifest m("fig4");
  const double kappa = 0.001, t_end = 5000.0;
  const std::vector<double> gs{0.9, 1.023, 1.04828};
  m.parameters({{"g", gs}, {"kappa", kappa}, {"z0", 0.3}, {"phi0", pi}, {"t_end", t_end}, {"output_dt", 0.1}});
  const auto base = detail::single("simulate", {{"z0", 0.3}, {"phi0", pi}, {"delta", 0.0}, {"kappa", kappa},
                                                {"t_end", t_end}, {"output_dt", 0.1}});
  const auto items = sweep_values("simulate", base.params, "g", gs, 0);
  detail::require_ok(items);
  for (std::size_t i = 0; i < gs.size(); ++i) {
    const auto& s = items[i].output.summary;
    const std::string tag = "g=" + format_number(gs[i]);
    m.less(tag + " max |N - exp(-kappa t)| / exp(-kappa t) < 1e-9",
           s.at("diagnostics").at("max_relative_N_error").get<double>(), 1e-9);
    m.feature(tag + " time after which |z| < 0.01", s.at("settle_time_abs_z_below_0.01"));
    m.feature(tag + " final z", s.at("final_z"));
  }
  const auto& settled = items.back().output.summary.at("settle_time_abs_z_below_0.01");
  m.less("g=1.04828 |z| falls and stays below 0.01 before t = 5000", settled.is_null() ? INFINITY : settled.get<double>(), t_end);

  RunOutput out;
  out.files.push_back({"fig4_trajectories.csv", detail::join_tables(items, "g")});
  out.summary = m.to_json();
  out.files.push_back({"manifest.json", detail::dump(out.summary)});
  out.warnings = m.failures();
  out.exit_code = m.all_passed() ? 0 : 2;
  return out;
}

/// Exact visibility traces for g in {0.3, 1, 6} from (pi/2, pi) and (pi/2, 0), with the
/// semiclassical trace alongside. N_T is a reported parameter.
inline RunOutput figure5(int n_total = 40) {
  FigureManifest m("fig5");
  const double t_end = 100.0;
  const int samples = 2001;
  const std::vector<double> gs{0.3, 1.0, 6.0};
  const std::vector<std::pair<std::string, double>> starts{{"pi", pi}, {"0", 0.0}};
  m.parameters({{"g", gs}, {"theta0", 0.5 * pi}, {"phi0", {pi, 0.0}}, {"nt", n_total}, {"t_end", t_end},
                {"samples", samples}});
  CsvTable quantum_csv({"g", "phi0", "t", "jx", "jy", "jz", "visibility", "delta_n"});
  CsvTable semi_csv({"g", "phi0", "t", "visibility"});
  for (double g : gs) {
    for (const auto& [tag0, phi0] : starts) {
      const auto p = quantum::AngularHamiltonianParams::from_nonlinearity(g, 1.0, n_total);
      const auto trace = quantum::visibility_trace(0.5 * pi, phi0, p, t_end, samples);
      double trailing = 0.0, trailing_max = 0.0, first_below = -1.0;
      std::size_t n = 0;
      for (std::size_t i = 0; i < trace.size(); ++i) {
        const auto& s = trace[i];
        quantum_csv.add({g, phi0, s.t, s.jx, s.jy, s.jz, s.visibility, s.delta_n});
        if (first_below < 0.0 && s.visibility < 0.2) first_below = s.t;
        if (2 * i >= trace.size()) {
          trailing += s.visibility;
          trailing_max = std::max(trailing_max, s.visibility);
          ++n;
        }
      }
      const std::string tag = "g=" + format_number(g) + " from (pi/2," + tag0 + ")";
      const double trailing_mean = trailing / n;
      m.feature(tag, {{"trailing_half_mean_visibility", trailing_mean},
                      {"trailing_half_max_visibility", trailing_max},
                      {"first_time_below_0.2", first_below < 0.0 ? json(nullptr) : json(first_below)}});
      if (g == 0.3 && tag0 == "pi") m.less(tag + ": visibility decays below 0.2 and stays (trailing-half max)", trailing_max, 0.2);
      if (g == 6.0 && tag0 == "0") m.greater(tag + ": trailing-half mean visibility > 0.5", trailing_mean, 0.5);

      coherence::SpinIntegrateOptions so;
      so.ode.output_dt = t_end / (samples - 1);
      const auto sc = coherence::integrate_cartesian(coherence::to_spin({0.5 * pi, phi0}), g, t_end, so);
      for (std::size_t i = 0; i < sc.times.size(); ++i) semi_csv.add({g, phi0, sc.times[i], coherence::fringe_visibility(sc.states[i])});
    }
  }

  RunOutput out;
  out.files.push_back({"fig5_quantum.csv", quantum_csv.str()});
  out.files.push_back({"fig5_semiclassical.csv", semi_csv.str()});
  out.summary = m.to_json();
  out.files.push_back({"manifest.json", detail::dump(out.summary)});
  out.warnings = m.failures();
  out.exit_code = m.all_passed() ? 0 : 2;
  return out;
}

inline RunOutput run_reproduce_figure(const RunConfig& rc) {
  const std::string id = rc.text("id");
  if (id == "fig2") return figure2();
  if (id == "fig3") return figure3();
  if (id == "fig4") return figure4();
  if (id == "fig5") return figure5(static_cast<int>(rc.integer("nt")));
  throw ConfigError("reproduce-figure.id", std::nullopt, "unknown figure '" + id + "' (fig2, fig3, fig4, fig5)");
}

/// Any command, including sweeps and figure bundles.
inline RunOutput run_any(const RunConfig& rc) {
  if (rc.command == "sweep") return run_sweep(rc);
  if (rc.command == "reproduce-figure") return run_reproduce_figure(rc);
  return run_single(rc);
}

} // namespace pjj::harness
