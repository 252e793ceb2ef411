#pragma once

// Parameter sweeps. Each value is an isolated run of the base command; results are stored
// by value index, so the merged dataset does not depend on thread count or scheduling.

#include <algorithm>
#include <atomic>
#include <exception>
#include <string>
#include <thread>
#include <vector>

#include "pjj/harness/commands.hpp"

namespace pjj::harness {

struct SweepItem {
  double value = 0.0;
  bool ok = false;
  std::string message;
  RunOutput output;
};

inline unsigned resolve_threads(long long requested, std::size_t jobs) {
  unsigned n = requested > 0 ? static_cast<unsigned>(requested) : std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(n, jobs)));
}

inline std::vector<SweepItem> sweep_values(const std::string& base, const json& base_params, const std::string& axis,
                                           const std::vector<double>& values, long long threads = 0) {
  const CommandSchema* schema = find_schema(base);
  if (!schema) throw ConfigError("sweep.base", std::nullopt, "unknown command '" + base + "'");
  const ParamSpec* spec = schema->find(axis);
  if (!spec || (spec->type != ParamType::Number && spec->type != ParamType::Integer)) {
    throw ConfigError("sweep.axis", std::nullopt, "'" + axis + "' is not a numeric parameter of " + base);
  }
  std::vector<SweepItem> items(values.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < values.size(); i = next++) {
      SweepItem& item = items[i];
      item.value = values[i];
      try {
        RunConfig rc;
        rc.command = base;
        rc.params = base_params;
        rc.params[axis] = detail::coerce(*spec, values[i], "sweep.values", std::nullopt);
        item.output = run_single(rc);
        item.ok = true;
      } catch (const std::exception& e) {
        item.message = e.what();
      }
    }
  };
  const unsigned n = resolve_threads(threads, values.size());
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n);
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return items;
}

/// Long-format merge: the swept value prepended to every primary-table row.
inline std::string merge_long(const std::vector<SweepItem>& items) {
  std::vector<std::string> header;
  for (const auto& it : items) {
    if (it.ok && it.output.primary) {
      header = it.output.primary->header();
      break;
    }
  }
  if (header.empty()) return "value\n";
  std::string out = "value";
  for (const auto& h : header) out += "," + h;
  out += '\n';
  for (const auto& it : items) {
    if (!it.ok || !it.output.primary) continue;
    const std::string prefix = format_number(it.value) + ",";
    const std::string& body = it.output.primary->body();
    std::size_t start = 0;
    while (start < body.size()) {
      const std::size_t end = body.find('\n', start);
      out += prefix;
      out.append(body, start, end - start + 1);
      start = end + 1;
    }
  }
  return out;
}

inline std::string sweep_summary_csv(const std::vector<SweepItem>& items) {
  CsvTable t({"value", "status", "mean_z", "variance_z", "is_mst", "mst_type", "message"});
  for (const auto& it : items) {
    std::vector<std::string> row{format_number(it.value), it.ok ? "ok" : "error", "", "", "", "", it.message};
    if (it.ok && it.output.summary.contains("self_trapping")) {
      const auto& st = it.output.summary.at("self_trapping");
      if (st.contains("mean_z")) {
        row[2] = format_number(st.at("mean_z").get<double>());
        row[3] = format_number(st.at("variance_z").get<double>());
        row[4] = st.at("is_mst").get<bool>() ? "true" : "false";
        row[5] = st.at("mst_type").get<std::string>();
      } else {
        row[6] = st.at("error").get<std::string>();
      }
    }
    if (it.ok && row[6].empty() && !it.output.warnings.empty()) row[6] = it.output.warnings.front();
    t.add(row);
  }
  return t.str();
}

inline RunOutput run_sweep(const RunConfig& rc) {
  const std::string base = rc.text("base");
  const std::string axis = rc.text("axis");
  std::vector<double> values;
  for (const auto& v : rc.params.at("values")) values.push_back(v.get<double>());
  const auto items = sweep_values(base, rc.base_params, axis, values, rc.integer("threads"));

  RunOutput out;
  out.files.push_back({"sweep.csv", merge_long(items)});
  out.files.push_back({"summary.csv", sweep_summary_csv(items)});
  json runs = json::array();
  std::size_t failed = 0;
  for (const auto& it : items) {
    json r = {{"value", it.value}, {"status", it.ok ? "ok" : "error"}};
    if (it.ok) r["summary"] = it.output.summary;
    else r["message"] = it.message;
    if (!it.ok) {
      ++failed;
      out.warnings.push_back("value " + format_number(it.value) + " failed: " + it.message);
    }
    runs.push_back(std::move(r));
  }
  out.summary = {{"base", base}, {"axis", axis}, {"count", items.size()}, {"failed", failed}, {"runs", runs}};
  out.exit_code = failed ? 1 : 0;
  return out;
}

} // namespace pjj::harness
