#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "ptchain/entanglement.hpp"
#include "ptchain/fits.hpp"

namespace ptchain {

using json = nlohmann::json;

struct Tolerances {
  double tol_zero = 1e-8;
  double tol_real = 1e-8;
  double tol_edge = 1e-6;
  double tol_pair = 1e-8;
  double tol_biorth = 1e-9;
  double tol_crit = 1e-9;
  double tol_sym = 1e-8;
  double tol_zak = 1e-6;

  SpectrumTolerances spectrum() const { return {tol_real, tol_edge, tol_pair}; }
};

// Subsystem sizes: explicit list, integer range, or `count` unique log-spaced values in [1, fraction * cells].
struct EllGrid {
  enum Kind { List, Range, Log } kind = Log;
  std::vector<int> list;
  int min = 1, max = 1, step = 1;
  int count = 24;
  double max_fraction = 0.5;
};

struct SizeGrid {
  std::vector<int> list;
  int min = 64, max = 512, step = 32;
  bool use_list = false;
};

struct TaskConfig {
  std::string kind;
  EllGrid ells;
  std::vector<Prescription> prescriptions;
  std::optional<Prescription> prescription;
  std::string fit;  // "pbc" | "obc" | "" (by boundary)
  TrimPolicy trim;
  bool trim_given = false;
  SizeGrid sizes;
  std::optional<int> delta_L;  // nullopt = scan
  int n_k = 4096;
  int realizations = 1;
  int ell = 1;
  bool fit_ensemble = true;
};

struct ExperimentConfig {
  std::string model_type = "chain";
  ChainSpec chain;
  InterfaceSpec interface;
  std::optional<double> disorder_bound;
  TaskConfig task;
  std::string out_dir = ".";
  std::string prefix;
  std::uint64_t seed = 0;
  Tolerances tol;
  int jobs = 1;
  json source;  // canonical form used for hashing
};

inline const std::vector<std::string>& task_kinds() {
  static const std::vector<std::string> k = {"spectrum", "entropy-scan", "cc-fit",  "casimir",  "winding",
                                             "zak",      "interface",    "disorder", "density", "symmetry-check"};
  return k;
}

namespace cfg {

[[noreturn]] inline void fail(const std::string& m) { throw Error(ErrorCode::ConfigError, m); }

inline void only_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) fail(where + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) fail("unknown key '" + it.key() + "' in " + where);
}

inline double num(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) fail("missing '" + key + "' in " + where);
  if (!j[key].is_number()) fail("'" + key + "' in " + where + " must be a number");
  const double x = j[key].get<double>();
  if (!std::isfinite(x)) fail("'" + key + "' in " + where + " must be finite");
  return x;
}

inline double num_or(const json& j, const std::string& key, double d, const std::string& where) {
  return j.contains(key) ? num(j, key, where) : d;
}

inline int integer(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) fail("missing '" + key + "' in " + where);
  if (!j[key].is_number_integer()) fail("'" + key + "' in " + where + " must be an integer");
  const auto x = j[key].get<long long>();
  if (x < INT32_MIN || x > INT32_MAX) fail("'" + key + "' in " + where + " out of range");
  return int(x);
}

inline int int_or(const json& j, const std::string& key, int d, const std::string& where) {
  return j.contains(key) ? integer(j, key, where) : d;
}

inline std::string str(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) fail("missing '" + key + "' in " + where);
  if (!j[key].is_string()) fail("'" + key + "' in " + where + " must be a string");
  return j[key].get<std::string>();
}

inline Prescription parse_prescription(const std::string& s) {
  if (s == "Principal") return Prescription::Principal;
  if (s == "BranchCut") return Prescription::BranchCut;
  if (s == "AbsoluteValue") return Prescription::AbsoluteValue;
  if (s == "Regularized") return Prescription::Regularized;
  fail("unknown prescription '" + s + "'");
}

inline EllGrid parse_ells(const json& t) {
  EllGrid g;
  if (t.contains("ells") && t.contains("ell_grid")) fail("give either 'ells' or 'ell_grid'");
  if (t.contains("ells")) {
    if (!t["ells"].is_array() || t["ells"].empty()) fail("'ells' must be a non-empty array");
    g.kind = EllGrid::List;
    for (const auto& x : t["ells"]) {
      if (!x.is_number_integer() || x.get<long long>() < 1) fail("'ells' entries must be positive integers");
      g.list.push_back(x.get<int>());
    }
    return g;
  }
  if (!t.contains("ell_grid")) return g;
  const json& e = t["ell_grid"];
  const std::string w = "task.ell_grid";
  const std::string kind = str(e, "kind", w);
  if (kind == "log") {
    only_keys(e, w, {"kind", "count", "max_fraction"});
    g.kind = EllGrid::Log;
    g.count = int_or(e, "count", 24, w);
    g.max_fraction = num_or(e, "max_fraction", 0.5, w);
    if (g.count < 2) fail("ell_grid.count must be >= 2");
    if (!(g.max_fraction > 0 && g.max_fraction <= 1)) fail("ell_grid.max_fraction must be in (0, 1]");
  } else if (kind == "range") {
    only_keys(e, w, {"kind", "min", "max", "step"});
    g.kind = EllGrid::Range;
    g.min = int_or(e, "min", 1, w);
    g.max = integer(e, "max", w);
    g.step = int_or(e, "step", 1, w);
    if (g.min < 1 || g.max < g.min || g.step < 1) fail("invalid ell range");
  } else {
    fail("ell_grid.kind must be 'log' or 'range'");
  }
  return g;
}

inline TrimPolicy parse_trim(const json& j) {
  const std::string w = "task.trim";
  only_keys(j, w, {"kind", "count", "threshold"});
  const std::string k = str(j, "kind", w);
  if (k == "none") return TrimPolicy::none();
  if (k == "fixed") {
    const int c = integer(j, "count", w);
    if (c < 0) fail("trim.count must be >= 0");
    return TrimPolicy::fixed(c);
  }
  if (k == "until_sse") return TrimPolicy::until_sse(num_or(j, "threshold", 1e-4, w));
  if (k == "until_rmse") return TrimPolicy::until_rmse(num_or(j, "threshold", 1e-4, w));
  fail("trim.kind must be none, fixed, until_sse or until_rmse");
}

}  // namespace cfg

inline std::vector<int> log_spaced_unique(int max, int count) {
  std::vector<int> out;
  if (max < 1) return out;
  count = std::min(count, max);
  for (int i = 0; i < count; ++i) {
    const double g = std::exp(std::log(double(max)) * i / (count - 1 > 0 ? count - 1 : 1));
    int v = int(std::lround(g));
    if (!out.empty()) v = std::max(v, out.back() + 1);
    out.push_back(v);
  }
  // keep the top at max by pulling down any overshoot
  for (int i = int(out.size()) - 1; i >= 0; --i) {
    const int cap = max - (int(out.size()) - 1 - i);
    if (out[i] > cap) out[i] = cap;
  }
  return out;
}

inline std::vector<int> resolve_ells(const EllGrid& g, int cells) {
  std::vector<int> out;
  switch (g.kind) {
    case EllGrid::List: out = g.list; break;
    case EllGrid::Range:
      for (int l = g.min; l <= g.max; l += g.step) out.push_back(l);
      break;
    case EllGrid::Log: out = log_spaced_unique(int(std::floor(g.max_fraction * cells)), g.count); break;
  }
  for (int l : out)
    if (l < 1 || l > cells) cfg::fail("subsystem size " + std::to_string(l) + " outside [1, cells]");
  if (out.empty()) cfg::fail("empty subsystem list");
  return out;
}

inline std::vector<int> resolve_sizes(const SizeGrid& g) {
  if (g.use_list) return g.list;
  std::vector<int> out;
  for (int L = g.min; L <= g.max; L += g.step) out.push_back(L);
  return out;
}

inline ExperimentConfig parse_config(const json& j) {
  using namespace cfg;
  ExperimentConfig c;
  only_keys(j, "config", {"model", "task", "output", "seed", "tolerances", "jobs"});
  if (!j.contains("model")) fail("missing 'model'");
  if (!j.contains("task")) fail("missing 'task'");
  c.source = j;

  const json& m = j["model"];
  c.model_type = m.contains("type") ? str(m, "type", "model") : "chain";
  if (c.model_type == "chain") {
    only_keys(m, "model", {"type", "alpha", "v", "w", "u", "cells", "boundary", "detuning", "disorder"});
    c.chain.alpha = integer(m, "alpha", "model");
    c.chain.v = num(m, "v", "model");
    c.chain.w = num(m, "w", "model");
    c.chain.u = num(m, "u", "model");
    c.chain.cells = integer(m, "cells", "model");
    c.chain.detuning = num_or(m, "detuning", 0.0, "model");
    const std::string b = m.contains("boundary") ? str(m, "boundary", "model") : "PBC";
    if (b == "PBC")
      c.chain.boundary = Boundary::PBC;
    else if (b == "OBC")
      c.chain.boundary = Boundary::OBC;
    else
      fail("model.boundary must be PBC or OBC");
    if (c.chain.alpha < 1) fail("model.alpha must be >= 1");
    if (c.chain.cells < 1) fail("model.cells must be positive");
    if (c.chain.cells < c.chain.alpha + 1) fail("model.cells must be >= alpha + 1");
    if (c.chain.u < 0 || c.chain.detuning < 0 || c.chain.u < c.chain.detuning)
      fail("need u >= 0, detuning >= 0, u >= detuning");
    if (m.contains("disorder")) {
      only_keys(m["disorder"], "model.disorder", {"bound"});
      const double bound = num(m["disorder"], "bound", "model.disorder");
      if (!(bound > 0 && bound < std::min(std::abs(c.chain.v), c.chain.u)))
        fail("model.disorder.bound must lie in (0, min(v, u))");
      c.disorder_bound = bound;
    }
  } else if (c.model_type == "interface") {
    only_keys(m, "model", {"type", "v1", "v2", "w", "u", "cells_left", "cells_right"});
    c.interface.v1 = num(m, "v1", "model");
    c.interface.v2 = num(m, "v2", "model");
    c.interface.w = num(m, "w", "model");
    c.interface.u = num(m, "u", "model");
    c.interface.cells_left = int_or(m, "cells_left", 20, "model");
    c.interface.cells_right = int_or(m, "cells_right", 20, "model");
    if (c.interface.cells_left < 2 || c.interface.cells_right < 2) fail("interface needs >= 2 cells per side");
    if (!(c.interface.u > 0)) fail("interface u must be positive");
  } else {
    fail("model.type must be 'chain' or 'interface'");
  }

  const json& t = j["task"];
  const std::string tk = str(t, "kind", "task");
  c.task.kind = tk;
  const auto& kinds = task_kinds();
  if (std::find(kinds.begin(), kinds.end(), tk) == kinds.end()) fail("unknown task kind '" + tk + "'");
  std::set<std::string> allowed = {"kind"};
  if (tk == "entropy-scan") allowed = {"kind", "ells", "ell_grid", "prescriptions"};
  if (tk == "cc-fit") allowed = {"kind", "ells", "ell_grid", "prescription", "fit", "trim"};
  if (tk == "casimir") allowed = {"kind", "sizes", "size_grid", "delta_L"};
  if (tk == "winding" || tk == "zak") allowed = {"kind", "n_k"};
  if (tk == "disorder") allowed = {"kind", "realizations", "ells", "ell_grid", "fit"};
  if (tk == "symmetry-check") allowed = {"kind", "ell"};
  only_keys(t, "task", allowed);

  const bool needs_chain = tk != "interface" && tk != "density" && tk != "spectrum";
  if (needs_chain && c.model_type != "chain") fail("task '" + tk + "' needs a chain model");
  if (tk == "interface" && c.model_type != "interface") fail("task 'interface' needs an interface model");
  if (c.disorder_bound && tk != "disorder" && tk != "spectrum" && tk != "density" && tk != "entropy-scan" &&
      tk != "symmetry-check")
    fail("disorder is not supported by task '" + tk + "'");
  if (tk == "disorder" && !c.disorder_bound) fail("task 'disorder' needs model.disorder");

  c.task.ells = parse_ells(t);
  if (t.contains("prescriptions")) {
    if (!t["prescriptions"].is_array() || t["prescriptions"].empty()) fail("'prescriptions' must be a non-empty array");
    for (const auto& p : t["prescriptions"]) {
      if (!p.is_string()) fail("prescriptions must be strings");
      c.task.prescriptions.push_back(parse_prescription(p.get<std::string>()));
    }
  }
  if (t.contains("prescription")) c.task.prescription = parse_prescription(str(t, "prescription", "task"));
  if (t.contains("fit")) {
    if (tk == "disorder") {
      if (!t["fit"].is_boolean()) fail("task.fit must be a boolean for disorder");
      c.task.fit_ensemble = t["fit"].get<bool>();
    } else {
      c.task.fit = str(t, "fit", "task");
      if (c.task.fit != "pbc" && c.task.fit != "obc") fail("task.fit must be 'pbc' or 'obc'");
    }
  }
  if (t.contains("trim")) {
    c.task.trim = parse_trim(t["trim"]);
    c.task.trim_given = true;
  }
  if (t.contains("sizes") && t.contains("size_grid")) fail("give either 'sizes' or 'size_grid'");
  if (t.contains("sizes")) {
    if (!t["sizes"].is_array()) fail("'sizes' must be an array");
    c.task.sizes.use_list = true;
    for (const auto& x : t["sizes"]) {
      if (!x.is_number_integer() || x.get<long long>() < 2) fail("sizes must be integers >= 2");
      c.task.sizes.list.push_back(x.get<int>());
    }
  }
  if (t.contains("size_grid")) {
    const json& g = t["size_grid"];
    only_keys(g, "task.size_grid", {"min", "max", "step"});
    c.task.sizes.min = integer(g, "min", "task.size_grid");
    c.task.sizes.max = integer(g, "max", "task.size_grid");
    c.task.sizes.step = int_or(g, "step", 32, "task.size_grid");
    if (c.task.sizes.min < 2 || c.task.sizes.max < c.task.sizes.min || c.task.sizes.step < 1)
      fail("invalid size_grid");
  }
  if (t.contains("delta_L")) {
    if (t["delta_L"].is_string()) {
      if (t["delta_L"].get<std::string>() != "scan") fail("delta_L must be an integer or \"scan\"");
    } else {
      c.task.delta_L = integer(t, "delta_L", "task");
      if (std::abs(*c.task.delta_L) > 4) fail("delta_L must lie in [-4, 4]");
    }
  }
  c.task.n_k = int_or(t, "n_k", 4096, "task");
  if (c.task.n_k < 8) fail("task.n_k must be >= 8");
  c.task.realizations = int_or(t, "realizations", 1, "task");
  if (c.task.realizations < 1) fail("task.realizations must be >= 1");
  c.task.ell = int_or(t, "ell", 1, "task");

  if (j.contains("output")) {
    const json& o = j["output"];
    only_keys(o, "output", {"dir", "prefix"});
    if (o.contains("dir")) c.out_dir = str(o, "dir", "output");
    if (o.contains("prefix")) c.prefix = str(o, "prefix", "output");
  }
  if (c.prefix.empty()) c.prefix = tk;
  if (c.prefix.find('/') != std::string::npos) fail("output.prefix must not contain '/'");
  if (j.contains("seed")) {
    const auto& sd = j["seed"];
    if (!sd.is_number_unsigned() && !(sd.is_number_integer() && sd.get<std::int64_t>() >= 0))
      fail("seed must be a non-negative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("jobs")) {
    c.jobs = integer(j, "jobs", "config");
    if (c.jobs < 1) fail("jobs must be >= 1");
  }
  if (j.contains("tolerances")) {
    const json& tj = j["tolerances"];
    only_keys(tj, "tolerances",
              {"tol_zero", "tol_real", "tol_edge", "tol_pair", "tol_biorth", "tol_crit", "tol_sym", "tol_zak"});
    auto pos = [&](const char* k, double& dst) {
      if (tj.contains(k)) {
        dst = num(tj, k, "tolerances");
        if (!(dst > 0)) fail(std::string(k) + " must be positive");
      }
    };
    pos("tol_zero", c.tol.tol_zero);
    pos("tol_real", c.tol.tol_real);
    pos("tol_edge", c.tol.tol_edge);
    pos("tol_pair", c.tol.tol_pair);
    pos("tol_biorth", c.tol.tol_biorth);
    pos("tol_crit", c.tol.tol_crit);
    pos("tol_sym", c.tol.tol_sym);
    pos("tol_zak", c.tol.tol_zak);
  }

  // semantic checks that need the resolved model
  if (c.model_type == "chain") {
    if (tk == "entropy-scan" || tk == "cc-fit" || tk == "disorder") resolve_ells(c.task.ells, c.chain.cells);
    if (tk == "symmetry-check" && (c.task.ell < 1 || c.task.ell > c.chain.cells))
      fail("task.ell outside [1, cells]");
    if (tk == "casimir") {
      const auto sizes = resolve_sizes(c.task.sizes);
      if (sizes.size() < 4) fail("casimir needs at least 4 sizes");
      for (int L : sizes)
        if (L < c.chain.alpha + 1) fail("casimir size smaller than alpha + 1");
    }
  }
  return c;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("parse error: ") + e.what());
  }
}

// FNV-1a 64 over the canonical (sorted-key) dump.
inline std::string config_hash(const json& j) {
  const std::string s = j.dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  std::ostringstream o;
  o << std::hex;
  o.width(16);
  o.fill('0');
  o << h;
  return o.str();
}

}  // namespace ptchain
