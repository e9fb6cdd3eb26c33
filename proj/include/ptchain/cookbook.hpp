#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "ptchain/config.hpp"

namespace ptchain {

// Bundled experiment configs. Sizes are the desk-scale defaults; `scale` divides every
// length (cells, ell ranges, Casimir sizes) by k.
namespace cookbook_detail {

inline json chain(int alpha, double v, double w, double u, int cells, const char* bc, double det = 0.0) {
  json m{{"type", "chain"}, {"alpha", alpha}, {"v", v},        {"w", w},
         {"u", u},          {"cells", cells}, {"boundary", bc}};
  if (det != 0.0) m["detuning"] = det;
  return m;
}

inline json iface(double v1, double v2, double w, double u) {
  return json{{"type", "interface"}, {"v1", v1}, {"v2", v2}, {"w", w}, {"u", u}, {"cells_left", 20}, {"cells_right", 20}};
}

inline json log_grid(double max_fraction = 0.5) {
  return json{{"kind", "log"}, {"count", 24}, {"max_fraction", max_fraction}};
}

// L = 10^4 with ell capped at L/20: the PBC form holds at every ell, so the short end fixes the fit
inline json cc_pbc(json model, json trim = json{{"kind", "none"}}) {
  return json{{"model", model},
              {"task", {{"kind", "cc-fit"}, {"ell_grid", log_grid(0.05)}, {"prescription", "BranchCut"}, {"fit", "pbc"}, {"trim", trim}}}};
}

inline json cc_obc(int alpha, double v, double w) {
  return json{{"model", chain(alpha, v, w, 1.0, 200, "OBC")},
              {"task",
               {{"kind", "cc-fit"},
                {"ell_grid", {{"kind", "range"}, {"min", 1}, {"max", 100}}},
                {"prescription", "Regularized"},
                {"fit", "obc"},
                {"trim", {{"kind", "until_rmse"}, {"threshold", 1e-4}}}}}};
}

inline json casimir_obc(int alpha, double v, double w, int dL) {
  return json{{"model", chain(alpha, v, w, 1.0, 64, "OBC")},
              {"task", {{"kind", "casimir"}, {"size_grid", {{"min", 64}, {"max", 512}, {"step", 32}}}, {"delta_L", dL}}}};
}

inline json density(json model) { return json{{"model", model}, {"task", {{"kind", "density"}}}}; }

inline const std::map<std::string, json>& table() {
  static const std::map<std::string, json> t = [] {
    std::map<std::string, json> m;
    // PBC entanglement at the QCPs
    m["fig2a"] = cc_pbc(chain(1, 2, 1, 1, 10000, "PBC", 1e-12));
    m["fig2b"] = cc_pbc(chain(1, 1, 2, 1, 10000, "PBC", 1e-12));
    m["fig2c"] = cc_pbc(chain(2, 1, 2, 1, 10000, "PBC", 1e-12), json{{"kind", "until_sse"}, {"threshold", 1e-4}});
    m["fig2d"] = json{{"model", chain(1, 1, 2, 1, 64, "PBC", 1e-12)},
                      {"task", {{"kind", "casimir"}, {"size_grid", {{"min", 64}, {"max", 512}, {"step", 32}}}}}};
    // disorder at the topological QCP
    m["fig4a"] = json{{"model",
                       {{"type", "chain"},
                        {"alpha", 1},
                        {"v", 1.0},
                        {"w", 2.0},
                        {"u", 1.0},
                        {"detuning", 1e-10},
                        {"cells", 200},
                        {"boundary", "PBC"},
                        {"disorder", {{"bound", 0.999}}}}},
                      {"task", {{"kind", "disorder"}, {"realizations", 100}, {"ell_grid", log_grid()}}},
                      {"seed", 20240},
                      {"jobs", 4}};
    // principal branch against the branch-cut rule at the topological QCP
    m["sm-s1"] = json{{"model", chain(1, 1, 2, 1, 2000, "PBC", 1e-12)},
                      {"task", {{"kind", "entropy-scan"}, {"ell_grid", log_grid()}, {"prescriptions", {"Principal", "BranchCut"}}}}};
    // small gap, quartet onset, absolute value against branch cut
    m["sm-s2"] = json{{"model", chain(1, 2, 1, 1, 2000, "PBC", 1e-7)},
                      {"task",
                       {{"kind", "entropy-scan"},
                        {"ell_grid", {{"kind", "range"}, {"min", 1}, {"max", 80}}},
                        {"prescriptions", {"BranchCut", "AbsoluteValue"}}}}};
    // OBC densities
    m["sm-s3a"] = density(chain(1, 2, 1, 1, 100, "OBC"));
    m["sm-s3c"] = density(chain(1, 1, 2, 1, 100, "OBC"));
    m["sm-s3e"] = density(chain(1, 9, 10, 1, 100, "OBC"));
    // OBC Casimir with integer length shifts
    m["sm-s4a"] = casimir_obc(1, 2, 1, 2);
    m["sm-s4b"] = casimir_obc(1, 1, 2, -1);
    m["sm-s4c"] = casimir_obc(2, 2, 1, 1);
    m["sm-s4d"] = casimir_obc(2, 1, 2, -2);
    // OBC Calabrese-Cardy, L = 200
    m["sm-s5a"] = cc_obc(1, 2, 1);
    m["sm-s5b"] = cc_obc(1, 10, 9);
    m["sm-s5c"] = cc_obc(1, 1, 2);
    m["sm-s5d"] = cc_obc(1, 9, 10);
    m["sm-s5e"] = cc_obc(2, 2, 1);
    m["sm-s5f"] = cc_obc(2, 1, 2);
    // interface densities, (v1, v2, w, u)
    m["sm-s6a"] = density(iface(100, 0.5, 1, 0.5));
    m["sm-s6b"] = density(iface(1.5, 0.5, 1, 0.5));
    m["sm-s6d"] = density(iface(1.1, 0.5, 1, 0.5));
    // bare names pick a representative panel
    m["sm-s3"] = m["sm-s3a"];
    m["sm-s4"] = m["sm-s4b"];
    m["sm-s5"] = m["sm-s5a"];
    m["sm-s6"] = m["sm-s6b"];
    for (auto& [name, cfg] : m) cfg["output"] = json{{"dir", "out/" + name}, {"prefix", name}};
    return m;
  }();
  return t;
}

inline int scaled(int x, int k, int floor_at) { return std::max(floor_at, int(std::lround(double(x) / k))); }

}  // namespace cookbook_detail

inline std::vector<std::string> cookbook_names() {
  std::vector<std::string> out;
  for (const auto& [k, v] : cookbook_detail::table()) out.push_back(k);
  return out;
}

inline json figure_cookbook(const std::string& name, int scale = 1) {
  using namespace cookbook_detail;
  const auto& t = table();
  const auto it = t.find(name);
  if (it == t.end()) throw Error(ErrorCode::UnknownFigure, "no bundled config named '" + name + "'");
  if (scale < 1) throw Error(ErrorCode::ConfigError, "scale must be >= 1");
  json c = it->second;
  if (scale == 1) return c;
  json& m = c["model"];
  json& task = c["task"];
  if (m["type"] == "chain") {
    const int alpha = m["alpha"].get<int>();
    m["cells"] = scaled(m["cells"].get<int>(), scale, alpha + 1);
    if (task.contains("ell_grid") && task["ell_grid"]["kind"] == "range") {
      json& g = task["ell_grid"];
      g["max"] = scaled(g["max"].get<int>(), scale, g.value("min", 1));
    }
    if (task.contains("size_grid")) {
      json& g = task["size_grid"];
      g["min"] = scaled(g["min"].get<int>(), scale, alpha + 1);
      g["step"] = scaled(g["step"].get<int>(), scale, 1);
      g["max"] = scaled(g["max"].get<int>(), scale, g["min"].get<int>() + 3 * g["step"].get<int>());
    }
  } else {
    m["cells_left"] = scaled(m["cells_left"].get<int>(), scale, 4);
    m["cells_right"] = scaled(m["cells_right"].get<int>(), scale, 4);
  }
  return c;
}

}  // namespace ptchain
