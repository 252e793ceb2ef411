#pragma once

// Run configuration: command schemas, TOML/JSON ingestion with line-aware diagnostics, and
// resolution to a fully specified, re-executable RunConfig.
//
// File layout (TOML shown; JSON uses the same nesting):
//
//   command = "simulate"
//   [simulate]
//   g = 1.04
//   phi0 = "pi"
//
// beam-params additionally reads [beam1] and [beam2]; sweep reads the [<base>] section of its
// base command.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>
#include <toml.hpp>

#include "pjj/constants.hpp"
#include "pjj/error.hpp"

namespace pjj::harness {

using json = nlohmann::json;

class ConfigError : public ParameterError {
public:
  ConfigError(std::string field, std::optional<int> line, const std::string& what)
      : ParameterError(compose(field, line, what)), field_(std::move(field)), line_(line) {}

  const std::string& field() const { return field_; }
  std::optional<int> line() const { return line_; }

private:
  static std::string compose(const std::string& field, std::optional<int> line, const std::string& what) {
    std::string s = "config error";
    if (!field.empty()) s += " in '" + field + "'";
    if (line) s += " (line " + std::to_string(*line) + ")";
    return s + ": " + what;
  }

  std::string field_;
  std::optional<int> line_;
};

enum class ParamType { Number, Integer, Boolean, String, NumberList };

inline const char* to_string(ParamType t) {
  switch (t) {
  case ParamType::Number: return "number";
  case ParamType::Integer: return "integer";
  case ParamType::Boolean: return "boolean";
  case ParamType::String: return "string";
  case ParamType::NumberList: return "list of numbers";
  }
  return "?";
}

struct ParamSpec {
  std::string key;
  ParamType type = ParamType::Number;
  json fallback;          ///< default; null means optional-without-default unless `required`
  bool required = false;
  std::string help;
};

struct CommandSchema {
  std::string name;
  std::vector<ParamSpec> params;

  const ParamSpec* find(const std::string& key) const {
    for (const auto& p : params) if (p.key == key) return &p;
    return nullptr;
  }
};

namespace detail {

inline ParamSpec req(std::string key, ParamType t, std::string help) { return {std::move(key), t, json(), true, std::move(help)}; }
inline ParamSpec opt(std::string key, ParamType t, std::string help) { return {std::move(key), t, json(), false, std::move(help)}; }
inline ParamSpec def(std::string key, ParamType t, json v, std::string help) {
  return {std::move(key), t, std::move(v), false, std::move(help)};
}

inline std::vector<ParamSpec> integrator_params(double t_end) {
  using T = ParamType;
  return {
      def("t_end", T::Number, t_end, "rescaled end time 2Gt"),
      def("output_dt", T::Number, 0.01, "sample spacing of the output grid"),
      def("adaptive", T::Boolean, true, "Dormand-Prince 5(4); false selects fixed-step RK4"),
      def("dt", T::Number, 1e-3, "RK4 step when adaptive = false"),
      def("rtol", T::Number, 1e-10, "relative tolerance (adaptive)"),
      def("atol", T::Number, 1e-10, "absolute tolerance (adaptive)"),
  };
}

inline void append(std::vector<ParamSpec>& a, const std::vector<ParamSpec>& b) { a.insert(a.end(), b.begin(), b.end()); }

} // namespace detail

inline const std::vector<CommandSchema>& command_schemas() {
  using T = ParamType;
  using detail::def;
  using detail::opt;
  using detail::req;
  static const std::vector<CommandSchema> schemas = [] {
    std::vector<CommandSchema> s;

    CommandSchema sim{"simulate",
                      {opt("g", T::Number, "nonlinearity g (derived when lambda1/lambda2 are given)"),
                       opt("delta", T::Number, "rescaled detuning Delta (default 0)"),
                       def("kappa", T::Number, 0.0, "rescaled damping kappa; > 0 selects the damped equations"),
                       def("z0", T::Number, 0.3, "initial imbalance"),
                       def("phi0", T::Number, pi, "initial phase"),
                       def("g_coupling", T::Number, 1.0, "coupling rate G (rad/s), scales the current column"),
                       def("nt", T::Number, 1.0, "total phonon number N_T, scales the current column"),
                       opt("lambda1", T::Number, "Kerr rate of resonator 1; with lambda2 gives g and Delta_kappa(t)"),
                       opt("lambda2", T::Number, "Kerr rate of resonator 2"),
                       opt("delta0", T::Number, "bare detuning omega02 - omega01 (rad/s), with lambda1/lambda2")}};
    detail::append(sim.params, detail::integrator_params(200.0));
    s.push_back(sim);

    s.push_back({"phase-portrait",
                 {req("g", T::Number, "nonlinearity g"), def("delta", T::Number, 0.0, "rescaled detuning"),
                  def("nz", T::Integer, 201, "grid points in z"), def("nphi", T::Integer, 201, "grid points in phi")}});

    CommandSchema coh{"coherence",
                      {req("g", T::Number, "nonlinearity g"), def("theta0", T::Number, 0.5 * pi, "initial polar angle"),
                       def("phi0", T::Number, 0.0, "initial azimuth")}};
    detail::append(coh.params, detail::integrator_params(200.0));
    s.push_back(coh);

    const std::vector<ParamSpec> rates = {
        def("nt", T::Integer, 40, "total phonon number N_T"),
        opt("g", T::Number, "nonlinearity g; sets lambda1 = lambda2 = 2 G g / N_T"),
        opt("lambda1", T::Number, "Kerr rate of resonator 1 (rad/s)"),
        opt("lambda2", T::Number, "Kerr rate of resonator 2 (rad/s)"),
        def("g_coupling", T::Number, 1.0, "coupling rate G (rad/s)"),
        def("delta0", T::Number, 0.0, "bare detuning (rad/s)"),
    };
    CommandSchema q{"quantum", rates};
    detail::append(q.params, {def("theta0", T::Number, 0.5 * pi, "coherent-state polar angle"),
                              def("phi0", T::Number, 0.0, "coherent-state azimuth"),
                              def("t_end", T::Number, 50.0, "rescaled end time 2Gt"),
                              def("samples", T::Integer, 501, "number of uniformly spaced samples")});
    s.push_back(q);
    s.push_back({"fluctuations", rates});

    s.push_back({"beam-params",
                 {req("nt", T::Number, "total phonon number N_T"),
                  def("convention", T::String, "quarter_lambda", "quartic energy convention: quarter_lambda or full_lambda"),
                  def("rwa_warn", T::Number, 0.01, "RWA ratio warning threshold"),
                  def("rwa_reject", T::Number, 0.1, "RWA ratio rejection threshold")}});

    s.push_back({"sweep",
                 {req("base", T::String, "command run for every value"), req("axis", T::String, "parameter swept"),
                  req("values", T::NumberList, "values of the swept parameter"),
                  def("threads", T::Integer, 0, "worker threads; 0 uses all hardware threads")}});

    s.push_back({"reproduce-figure",
                 {req("id", T::String, "fig2, fig3, fig4 or fig5"),
                  def("nt", T::Integer, 40, "phonon number of the exact visibility traces (fig5)")}});
    return s;
  }();
  return schemas;
}

inline const CommandSchema* find_schema(const std::string& name) {
  for (const auto& s : command_schemas()) if (s.name == name) return &s;
  return nullptr;
}

inline const CommandSchema& beam_schema() {
  using T = ParamType;
  using detail::def;
  using detail::opt;
  using detail::req;
  static const CommandSchema s{"beam",
                               {req("mu", T::Number, "linear mass density (kg/m)"), req("L", T::Number, "length (m)"),
                                req("K", T::Number, "rigidity ratio (m)"),
                                req("linear_modulus", T::Number, "I = E A (N)"),
                                opt("omega0", T::Number, "fundamental frequency (rad/s)"),
                                def("G0", T::Number, 0.0, "coupling constant (N/m)"),
                                def("kappa0", T::Number, 0.0, "damping rate (rad/s)")}};
  return s;
}

/// Parsed configuration text with the source line of every key, addressed as "section.key".
struct ConfigDocument {
  json data = json::object();
  std::map<std::string, int> lines;
  std::string origin;

  std::optional<int> line_of(const std::string& path) const {
    auto it = lines.find(path);
    if (it == lines.end()) return std::nullopt;
    return it->second;
  }
};

namespace detail {

inline std::string join_path(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

inline json toml_to_json(const toml::node& node, const std::string& path, std::map<std::string, int>& lines) {
  if (const auto* t = node.as_table()) {
    json obj = json::object();
    for (const auto& [k, v] : *t) {
      const std::string key(k.str());
      const std::string p = join_path(path, key);
      lines[p] = static_cast<int>(k.source().begin.line);
      obj[key] = toml_to_json(v, p, lines);
    }
    return obj;
  }
  if (const auto* a = node.as_array()) {
    json arr = json::array();
    for (const auto& v : *a) arr.push_back(toml_to_json(v, path, lines));
    return arr;
  }
  if (const auto* v = node.as_string()) return v->get();
  if (const auto* v = node.as_integer()) return v->get();
  if (const auto* v = node.as_floating_point()) return v->get();
  if (const auto* v = node.as_boolean()) return v->get();
  throw ConfigError(path, static_cast<int>(node.source().begin.line), "unsupported TOML value type (dates are not accepted)");
}

// Minimal JSON tokenizer that records the line of every object key. It runs after a
// successful nlohmann parse, so it can assume well-formed input.
inline void scan_json_lines(const std::string& text, std::map<std::string, int>& lines) {
  struct Frame {
    bool object;
    std::string path;
    std::string pending_key;
  };
  std::vector<Frame> stack;
  int line = 1;
  std::string last_string;
  int last_string_line = 1;
  bool have_string = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '\n') {
      ++line;
      continue;
    }
    if (c == '"') {
      std::string s;
      const int start = line;
      for (++i; i < text.size() && text[i] != '"'; ++i) {
        if (text[i] == '\\' && i + 1 < text.size()) {
          s += text[++i];
          continue;
        }
        if (text[i] == '\n') ++line;
        s += text[i];
      }
      last_string = s;
      last_string_line = start;
      have_string = true;
      continue;
    }
    if (c == ':' && have_string && !stack.empty() && stack.back().object) {
      stack.back().pending_key = last_string;
      lines[join_path(stack.back().path, last_string)] = last_string_line;
      have_string = false;
      continue;
    }
    if (c == '{' || c == '[') {
      std::string path;
      if (!stack.empty()) path = stack.back().object ? join_path(stack.back().path, stack.back().pending_key) : stack.back().path;
      stack.push_back({c == '{', path, {}});
    } else if (c == '}' || c == ']') {
      if (!stack.empty()) stack.pop_back();
    }
    if (c != ' ' && c != '\t' && c != '\r') have_string = have_string && c == ' ';
  }
}

inline int line_at_offset(const std::string& text, std::size_t offset) {
  int line = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) line += text[i] == '\n';
  return line;
}

} // namespace detail

inline ConfigDocument parse_toml_config(const std::string& text, const std::string& origin = "<toml>") {
  ConfigDocument doc;
  doc.origin = origin;
  try {
    const toml::table tbl = toml::parse(text, origin);
    doc.data = detail::toml_to_json(tbl, "", doc.lines);
  } catch (const toml::parse_error& e) {
    throw ConfigError("", static_cast<int>(e.source().begin.line), std::string(e.description()));
  }
  return doc;
}

inline ConfigDocument parse_json_config(const std::string& text, const std::string& origin = "<json>") {
  ConfigDocument doc;
  doc.origin = origin;
  try {
    doc.data = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", detail::line_at_offset(text, e.byte), e.what());
  }
  if (!doc.data.is_object()) throw ConfigError("", 1, "top level must be an object");
  detail::scan_json_lines(text, doc.lines);
  return doc;
}

/// JSON when the extension is .json or the first non-blank character is '{'; TOML otherwise.
inline ConfigDocument load_config_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("", std::nullopt, "cannot read config file " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  const std::string text = ss.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  const bool is_json = path.extension() == ".json" || (first != std::string::npos && text[first] == '{');
  return is_json ? parse_json_config(text, path.string()) : parse_toml_config(text, path.string());
}

/// Numbers may be written as literals or as multiples of pi: "pi", "-pi/2", "0.5*pi", "2pi".
inline std::optional<double> parse_number_expr(std::string s) {
  std::erase_if(s, [](char c) { return c == ' ' || c == '\t'; });
  if (s.empty()) return std::nullopt;
  auto number = [](const std::string& t) -> std::optional<double> {
    if (t.empty()) return std::nullopt;
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size()) return std::nullopt;
    return v;
  };
  const auto p = s.find("pi");
  if (p == std::string::npos) return number(s);
  std::string coef = s.substr(0, p);
  std::string rest = s.substr(p + 2);
  if (!coef.empty() && coef.back() == '*') coef.pop_back();
  double c = 1.0;
  if (coef == "-") c = -1.0;
  else if (coef == "+" || coef.empty()) c = 1.0;
  else if (auto v = number(coef)) c = *v;
  else return std::nullopt;
  double d = 1.0;
  if (!rest.empty()) {
    if (rest.front() != '/') return std::nullopt;
    auto v = number(rest.substr(1));
    if (!v || *v == 0.0) return std::nullopt;
    d = *v;
  }
  return c * pi / d;
}

namespace detail {

inline json coerce(const ParamSpec& spec, const json& v, const std::string& field, std::optional<int> line) {
  auto bad = [&](const std::string& why) { return ConfigError(field, line, "expected " + std::string(to_string(spec.type)) + ": " + why); };
  auto as_number = [&](const json& x) -> double {
    if (x.is_number()) return x.get<double>();
    if (x.is_string()) {
      if (auto d = parse_number_expr(x.get<std::string>())) return *d;
      throw bad("cannot parse '" + x.get<std::string>() + "'");
    }
    throw bad("got " + std::string(x.type_name()));
  };
  switch (spec.type) {
  case ParamType::Number: return as_number(v);
  case ParamType::Integer: {
    if (v.is_number_integer()) return v.get<long long>();
    const double d = as_number(v);
    if (d != std::floor(d) || std::abs(d) > 9e15) throw bad("value is not integral");
    return static_cast<long long>(d);
  }
  case ParamType::Boolean:
    if (v.is_boolean()) return v;
    if (v.is_string()) {
      const auto s = v.get<std::string>();
      if (s == "true" || s == "1" || s == "yes") return true;
      if (s == "false" || s == "0" || s == "no") return false;
    }
    throw bad("got " + std::string(v.type_name()));
  case ParamType::String:
    if (v.is_string()) return v;
    throw bad("got " + std::string(v.type_name()));
  case ParamType::NumberList: {
    json out = json::array();
    if (v.is_array()) {
      for (const auto& x : v) out.push_back(as_number(x));
    } else if (v.is_string()) {
      std::stringstream ss(v.get<std::string>());
      std::string item;
      while (std::getline(ss, item, ',')) {
        if (item.find_first_not_of(" \t") == std::string::npos) continue;
        out.push_back(as_number(item));
      }
    } else {
      throw bad("got " + std::string(v.type_name()));
    }
    return out;
  }
  }
  throw bad("unknown type");
}

inline json resolve_section(const CommandSchema& schema, const json& raw, const std::string& section,
                            const ConfigDocument& doc) {
  if (!raw.is_object()) throw ConfigError(section, doc.line_of(section), "section must be a table/object");
  for (const auto& [k, v] : raw.items()) {
    if (!schema.find(k)) {
      throw ConfigError(section + "." + k, doc.line_of(section + "." + k), "unknown key for " + schema.name);
    }
  }
  json out = json::object();
  for (const auto& p : schema.params) {
    const std::string field = section + "." + p.key;
    if (raw.contains(p.key)) {
      out[p.key] = coerce(p, raw.at(p.key), field, doc.line_of(field));
    } else if (p.required) {
      throw ConfigError(field, doc.line_of(section), "missing mandatory field '" + p.key + "'");
    } else if (!p.fallback.is_null()) {
      out[p.key] = p.fallback;
    }
  }
  return out;
}

} // namespace detail

/// A fully resolved run: every default filled in, every value typed. `to_json()` is itself a
/// valid config document that re-executes the same computation.
struct RunConfig {
  std::string command;
  json params = json::object();
  json beam1;       ///< beam-params only
  json beam2;       ///< beam-params only
  json base_params; ///< sweep only: parameters of the base command

  json to_json() const {
    json j = json::object();
    j["command"] = command;
    j[command] = params;
    if (command == "beam-params") {
      j["beam1"] = beam1;
      j["beam2"] = beam2;
    }
    if (command == "sweep") j[params.at("base").get<std::string>()] = base_params;
    return j;
  }

  double number(const std::string& key) const { return params.at(key).get<double>(); }
  long long integer(const std::string& key) const { return params.at(key).get<long long>(); }
  bool flag(const std::string& key) const { return params.at(key).get<bool>(); }
  std::string text(const std::string& key) const { return params.at(key).get<std::string>(); }
  bool has(const std::string& key) const { return params.contains(key); }
};

inline RunConfig resolve_config(const ConfigDocument& doc) {
  const json& d = doc.data;
  if (!d.contains("command")) throw ConfigError("command", std::nullopt, "missing mandatory field 'command'");
  if (!d.at("command").is_string()) throw ConfigError("command", doc.line_of("command"), "expected string");
  RunConfig rc;
  rc.command = d.at("command").get<std::string>();
  const CommandSchema* schema = find_schema(rc.command);
  if (!schema) throw ConfigError("command", doc.line_of("command"), "unknown command '" + rc.command + "'");

  std::vector<std::string> allowed = {"command", rc.command};
  if (rc.command == "beam-params") {
    allowed.push_back("beam1");
    allowed.push_back("beam2");
  }
  const json empty = json::object();
  rc.params = detail::resolve_section(*schema, d.contains(rc.command) ? d.at(rc.command) : empty, rc.command, doc);

  if (rc.command == "sweep") {
    const std::string base = rc.text("base");
    const CommandSchema* bs = find_schema(base);
    if (!bs || base == "sweep" || base == "reproduce-figure" || base == "beam-params") {
      throw ConfigError("sweep.base", doc.line_of("sweep.base"), "'" + base + "' cannot be swept");
    }
    const ParamSpec* axis = bs->find(rc.text("axis"));
    if (!axis || (axis->type != ParamType::Number && axis->type != ParamType::Integer)) {
      throw ConfigError("sweep.axis", doc.line_of("sweep.axis"),
                        "'" + rc.text("axis") + "' is not a numeric parameter of " + base);
    }
    allowed.push_back(base);
    // The swept key may be absent from the base section even when it is mandatory there.
    json base_raw = d.contains(base) ? d.at(base) : empty;
    const bool had_axis = base_raw.contains(axis->key);
    if (!had_axis) {
      base_raw[axis->key] = rc.params.at("values").empty() ? json(0.0) : rc.params.at("values").front();
    }
    rc.base_params = detail::resolve_section(*bs, base_raw, base, doc);
    if (!had_axis) rc.base_params.erase(axis->key);
  }
  if (rc.command == "beam-params") {
    for (const char* b : {"beam1", "beam2"}) {
      if (!d.contains(b)) throw ConfigError(b, std::nullopt, std::string("missing mandatory section '") + b + "'");
      (b[4] == '1' ? rc.beam1 : rc.beam2) = detail::resolve_section(beam_schema(), d.at(b), b, doc);
    }
  }
  for (const auto& [k, v] : d.items()) {
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
      throw ConfigError(k, doc.line_of(k), "unknown top-level key for command " + rc.command);
    }
  }
  return rc;
}

} // namespace pjj::harness
