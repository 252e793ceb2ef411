// pjj: command-line front end. Every subcommand resolves to a RunConfig, runs it, and writes
// its datasets plus run.json into --out (default $PJJ_OUTPUT_DIR, else ./pjj-output).
//
// Exit codes: 0 success, 1 error, 2 failed figure assertion.

#include <cstdio>
#include <exception>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pjj/harness/config.hpp"
#include "pjj/harness/record.hpp"
#include "pjj/version.hpp"

namespace {

using pjj::harness::ConfigDocument;
using pjj::harness::json;

std::string flag_name(const std::string& key) {
  std::string s = key;
  for (char& c : s) if (c == '_') c = '-';
  return "--" + s;
}

struct Invocation {
  std::string config_path;
  std::string out_dir;
  std::map<std::string, std::string> values; ///< schema key -> raw flag text
  std::vector<std::string> sets;             ///< sweep --set key=value
  std::string figure_id;
};

void add_schema_flags(CLI::App* sub, const pjj::harness::CommandSchema& schema, Invocation& inv) {
  for (const auto& p : schema.params) {
    std::string help = p.help;
    if (!p.fallback.is_null()) help += " [default " + p.fallback.dump() + "]";
    if (p.required) help += " (required)";
    if (p.type == pjj::harness::ParamType::Boolean) {
      sub->add_flag(flag_name(p.key) + "{true}", inv.values[p.key], help);
    } else {
      sub->add_option(flag_name(p.key), inv.values[p.key], help);
    }
  }
}

ConfigDocument build_document(const std::string& command, CLI::App* sub, const Invocation& inv) {
  ConfigDocument doc;
  if (!inv.config_path.empty()) doc = pjj::harness::unwrap_record(pjj::harness::load_config_file(inv.config_path));
  if (command.empty()) return doc;
  if (doc.data.contains("command") && doc.data.at("command") != command) {
    throw pjj::harness::ConfigError("command", doc.line_of("command"),
                                    "config is for '" + doc.data.at("command").get<std::string>() +
                                        "' but the subcommand is '" + command + "'");
  }
  doc.data["command"] = command;
  if (!doc.data.contains(command)) doc.data[command] = json::object();
  const auto* schema = pjj::harness::find_schema(command);
  for (const auto& p : schema->params) {
    if (sub->count(flag_name(p.key)) > 0) doc.data[command][p.key] = inv.values.at(p.key);
  }
  if (command == "simulate" && sub->count("--dt") > 0 && sub->count("--adaptive") == 0) {
    doc.data[command]["adaptive"] = false;
  }
  if (command == "reproduce-figure" && !inv.figure_id.empty()) doc.data[command]["id"] = inv.figure_id;
  if (command == "sweep") {
    const json& sw = doc.data.at("sweep");
    if (!inv.sets.empty() && !sw.contains("base")) {
      throw pjj::harness::ConfigError("sweep.base", std::nullopt, "--set needs --base");
    }
    for (const auto& kv : inv.sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos || eq == 0) {
        throw pjj::harness::ConfigError("--set", std::nullopt, "expected key=value, got '" + kv + "'");
      }
      std::string key = kv.substr(0, eq);
      for (char& c : key) if (c == '-') c = '_';
      doc.data[sw.at("base").get<std::string>()][key] = kv.substr(eq + 1);
    }
  }
  return doc;
}

void report(const pjj::harness::RunRecord& rec, const std::filesystem::path& dir) {
  std::cout << "pjj " << rec.version << ": " << rec.config.at("command").get<std::string>() << " -> " << dir.string()
            << " (" << rec.files.size() << " files, " << pjj::harness::format_number(rec.wall_time_s) << " s)\n";
  for (const auto& f : rec.files) std::cout << "  " << f.at("name").get<std::string>() << "\n";
  for (const auto& w : rec.warnings) std::cerr << "warning: " << w << "\n";
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phonon Josephson junction simulator"};
  app.set_version_flag("--version", std::string(pjj::version));
  app.require_subcommand(0, 1);

  Invocation inv;
  app.add_option("--config", inv.config_path, "TOML or JSON config (or a run.json record) to run");
  app.add_option("--out", inv.out_dir, "output directory [default $PJJ_OUTPUT_DIR or ./pjj-output]");

  std::map<std::string, CLI::App*> subs;
  for (const auto& schema : pjj::harness::command_schemas()) {
    CLI::App* sub = app.add_subcommand(schema.name, "run " + schema.name);
    sub->add_option("--config", inv.config_path, "TOML or JSON config; flags override its values");
    sub->add_option("--out", inv.out_dir, "output directory");
    add_schema_flags(sub, schema, inv);
    if (schema.name == "sweep") {
      sub->add_option("--set", inv.sets, "base-command parameter, key=value (repeatable)");
    }
    if (schema.name == "reproduce-figure") sub->add_option("figure", inv.figure_id, "fig2, fig3, fig4 or fig5");
    subs[schema.name] = sub;
  }
  CLI::App* run = app.add_subcommand("run", "run the command named in a config file or run record");
  run->add_option("--config", inv.config_path, "TOML or JSON config, or run.json")->required();
  run->add_option("--out", inv.out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    std::string command;
    CLI::App* sub = nullptr;
    for (const auto& [name, s] : subs) {
      if (s->parsed()) {
        command = name;
        sub = s;
      }
    }
    if (!sub && inv.config_path.empty()) {
      std::cout << app.help();
      return 1;
    }
    const ConfigDocument doc = build_document(command, sub, inv);
    const auto rc = pjj::harness::resolve_config(doc);
    const std::filesystem::path dir = inv.out_dir.empty() ? pjj::harness::default_output_path() : std::filesystem::path(inv.out_dir);
    const auto rec = pjj::harness::execute(rc, dir);
    report(rec, dir);
    if (rec.exit_code == 2) std::cerr << "figure assertions failed; see manifest.json\n";
    return rec.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
