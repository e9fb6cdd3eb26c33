#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "ptchain/config.hpp"
#include "ptchain/edge.hpp"
#include "ptchain/entanglement.hpp"
#include "ptchain/fits.hpp"
#include "ptchain/topology.hpp"

namespace ptchain {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr int kSchemaVersion = 1;

enum ExitCode { kExitOk = 0, kExitConfig = 2, kExitNumerical = 3, kExitIo = 4 };

inline std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// Minimal CSV builder; every value goes through fmt17 or is an integer.
class Csv {
 public:
  explicit Csv(std::vector<std::string> header) : cols_(header.size()) { row(header); }

  void row(const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }
  template <class... T>
  void add(const T&... v) {
    row({cell(v)...});
  }
  std::string str() const { return out_.str(); }

 private:
  static std::string cell(double x) { return fmt17(x); }
  static std::string cell(int x) { return std::to_string(x); }
  static std::string cell(long long x) { return std::to_string(x); }
  static std::string cell(std::uint64_t x) { return std::to_string(x); }
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(const char* s) { return s; }
  size_t cols_;
  std::ostringstream out_;
};

struct TaskOutput {
  std::vector<std::pair<std::string, std::string>> files;  // suffix, content
  json summary = json::object();
};

inline json complex_json(cd z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

inline json fit_json(const FitResult& f) {
  return json{{"slope", f.slope},          {"s0", f.s0},       {"delta_ell", f.delta_ell},
              {"eps_bulk", f.eps_bulk},    {"b", f.b},         {"A", f.A},
              {"delta_L", f.delta_L},      {"stderrs", f.stderrs}, {"sse", f.sse},
              {"rmse", f.rmse},            {"trim_count", f.trim_count}, {"n_points", f.n_points},
              {"trimmed_below", f.trimmed_below}};
}

namespace runner_detail {

inline ChainSpec chain_for_run(const ExperimentConfig& c) {
  ChainSpec s = c.chain;
  if (c.disorder_bound && c.task.kind != "disorder") s.disorder = make_disorder(s.cells, c.seed, *c.disorder_bound);
  validate(s);
  return s;
}

inline ProfileOptions profile_options(const ExperimentConfig& c, int jobs) {
  ProfileOptions o;
  o.tol = c.tol.spectrum();
  o.tol_zero = c.tol.tol_zero;
  o.tol_biorth = c.tol.tol_biorth;
  o.jobs = jobs;
  return o;
}

inline std::string entropy_csv(const std::vector<ProfileRow>& rows) {
  Csv csv({"ell", "re_S", "im_S", "n_edge_pairs", "n_quartets", "n_residual"});
  for (const auto& r : rows) csv.add(r.ell, r.S.value.real(), r.S.value.imag(), r.n_edge_pairs, r.n_quartets, r.n_residual);
  return csv.str();
}

inline json profile_summary(const std::vector<ProfileRow>& rows) {
  json j;
  int onset = 0;
  double im_min = 0, im_max = 0;
  bool first = true;
  for (const auto& r : rows) {
    if (!onset && r.n_quartets > 0) onset = r.ell;
    if (r.ell < 2) continue;
    const double im = r.S.value.imag();
    if (first) im_min = im_max = im, first = false;
    im_min = std::min(im_min, im);
    im_max = std::max(im_max, im);
  }
  j["rows"] = rows.size();
  j["quartet_onset_ell"] = onset;
  j["im_S_min_beyond_first"] = im_min;
  j["im_S_max_beyond_first"] = im_max;
  return j;
}

inline TaskOutput task_spectrum(const ExperimentConfig& c) {
  TaskOutput out;
  MatrixXcd H;
  if (c.model_type == "chain") {
    const ChainSpec s = chain_for_run(c);
    H = build_real_space(s);
    const auto pt = classify_pt(s, c.tol.tol_crit);
    out.summary["pt_class"] = pt_class_name(pt.pt_class);
    out.summary["min_abs_vk"] = pt.min_abs_vk;
  } else {
    H = build_interface(c.interface);
  }
  Eigen::ComplexEigenSolver<MatrixXcd> es(H, false);
  const VectorXcd e = es.eigenvalues();
  const auto order = spectral_order(e);
  Csv csv({"index", "re_E", "im_E"});
  double max_im = 0;
  for (size_t i = 0; i < order.size(); ++i) {
    const cd z = e[order[i]];
    csv.add(int(i), z.real(), z.imag());
    max_im = std::max(max_im, std::abs(z.imag()));
  }
  out.files.push_back({"spectrum.csv", csv.str()});
  out.summary["dimension"] = e.size();
  out.summary["max_abs_im_E"] = max_im;
  try {
    const auto occ = select_half_filling(e, c.tol.tol_zero);
    cd tot = 0;
    for (int k = 0; k < e.size(); ++k) tot += occ.weights[k] * e[k];
    out.summary["ground_state_energy"] = complex_json(tot);
    out.summary["half_weight_modes"] = occ.half_weight_modes;
  } catch (const Error& err) {
    out.summary["ground_state_energy"] = nullptr;
    out.summary["filling_error"] = err.name();
  }
  return out;
}

inline TaskOutput task_entropy_scan(const ExperimentConfig& c, int jobs) {
  TaskOutput out;
  const ChainSpec s = chain_for_run(c);
  const auto ells = resolve_ells(c.task.ells, s.cells);
  auto ps = c.task.prescriptions;
  if (ps.empty()) ps.push_back(Prescription::BranchCut);
  json per = json::object();
  for (Prescription p : ps) {
    const auto rows = entropy_profile(s, ells, p, profile_options(c, jobs));
    out.files.push_back({std::string("entropy_") + prescription_name(p) + ".csv", entropy_csv(rows)});
    per[prescription_name(p)] = profile_summary(rows);
  }
  out.summary["prescriptions"] = per;
  return out;
}

inline TaskOutput task_cc_fit(const ExperimentConfig& c, int jobs) {
  TaskOutput out;
  const ChainSpec s = chain_for_run(c);
  const auto ells = resolve_ells(c.task.ells, s.cells);
  const bool obc = c.task.fit.empty() ? s.boundary == Boundary::OBC : c.task.fit == "obc";
  const Prescription p =
      c.task.prescription.value_or(s.boundary == Boundary::OBC ? Prescription::Regularized : Prescription::BranchCut);
  const auto rows = entropy_profile(s, ells, p, profile_options(c, jobs));
  std::vector<double> x, y;
  for (const auto& r : rows) x.push_back(r.ell), y.push_back(r.S.value.real());
  const TrimPolicy trim = c.task.trim_given ? c.task.trim : (obc ? TrimPolicy::until_rmse(1e-4) : TrimPolicy::none());
  const FitResult f = obc ? cc_fit_obc(x, y, s.cells, trim) : cc_fit_pbc(x, y, s.cells, trim);
  out.files.push_back({std::string("entropy_") + prescription_name(p) + ".csv", entropy_csv(rows)});
  out.summary["prescription"] = prescription_name(p);
  out.summary["form"] = obc ? "obc" : "pbc";
  out.summary["fit"] = fit_json(f);
  out.summary["central_charge"] = (obc ? 6.0 : 3.0) * f.slope;
  out.summary["profile"] = profile_summary(rows);
  return out;
}

inline TaskOutput task_casimir(const ExperimentConfig& c, int jobs) {
  TaskOutput out;
  const auto sizes = resolve_sizes(c.task.sizes);
  std::vector<cd> e0(sizes.size());
  parallel_for(int(sizes.size()), jobs, [&](int i) {
    ChainSpec s = c.chain;
    s.cells = sizes[i];
    e0[i] = ground_state_energy(s, c.tol.tol_zero);
  });
  Csv csv({"L", "re_E0", "im_E0"});
  std::vector<double> Ls, re;
  for (size_t i = 0; i < sizes.size(); ++i) {
    csv.add(sizes[i], e0[i].real(), e0[i].imag());
    Ls.push_back(sizes[i]);
    re.push_back(e0[i].real());
  }
  const FitResult f = casimir_fit(Ls, re, c.chain.boundary, c.task.delta_L);
  out.files.push_back({"casimir.csv", csv.str()});
  out.summary["fit"] = fit_json(f);
  out.summary["boundary"] = boundary_name(c.chain.boundary);
  out.summary["delta_L_scanned"] = !c.task.delta_L.has_value() && c.chain.boundary == Boundary::OBC;
  return out;
}

inline TaskOutput task_winding(const ExperimentConfig& c) {
  TaskOutput out;
  const ChainSpec s = chain_for_run(c);
  const auto pt = classify_pt(s, c.tol.tol_crit);
  out.summary["pt_class"] = pt_class_name(pt.pt_class);
  out.summary["min_abs_vk"] = pt.min_abs_vk;
  out.summary["winding"] = winding_number(s, c.task.n_k);
  const auto roots = continuum_edge_roots(s.alpha, s.v, s.w);
  out.summary["normalizable_edge_roots"] = roots.normalizable_count;
  return out;
}

inline TaskOutput task_zak(const ExperimentConfig& c) {
  TaskOutput out;
  const ChainSpec s = chain_for_run(c);
  const auto pt = classify_pt(s, c.tol.tol_crit);
  if (pt.pt_class == PtClass::Critical)
    throw Error(ErrorCode::GridTooCoarse, "critical class: Zak integrand is singular on the grid");
  const auto z = zak_phase(s, std::min(c.task.n_k, 256), c.tol.tol_zak);
  out.summary["pt_class"] = pt_class_name(pt.pt_class);
  out.summary["zak"] = complex_json(z.q);
  out.summary["n_k"] = z.n_k;
  try {
    const int w = winding_number(s);
    out.summary["winding"] = w;
    out.summary["re_zak_minus_pi_winding"] = z.q.real() - kPi * w;
  } catch (const Error&) {
    out.summary["winding"] = nullptr;
  }
  return out;
}

inline std::string profile_csv(const VectorXcd& v, const char* re, const char* im) {
  Csv csv({"site", "cell", "sublattice", re, im});
  for (int i = 0; i < v.size(); ++i) csv.add(i, i / 2, i % 2 ? "B" : "A", v[i].real(), v[i].imag());
  return csv.str();
}

inline std::string cell_csv(const VectorXcd& v) {
  Csv csv({"cell", "re_n", "im_n"});
  for (int i = 0; i < v.size(); ++i) csv.add(i, v[i].real(), v[i].imag());
  return csv.str();
}

inline json bound_state_json(const BoundState& b) {
  return json{{"E", complex_json(b.E)},         {"a", b.a},
              {"beta_L", complex_json(b.beta_L)}, {"beta_R", complex_json(b.beta_R)},
              {"ratio_L", complex_json(b.ratio_L)}, {"ratio_R", complex_json(b.ratio_R)},
              {"residual", b.residual},           {"iterations", b.iterations},
              {"warning", b.warning}};
}

inline TaskOutput task_interface(const ExperimentConfig& c) {
  TaskOutput out;
  const auto& s = c.interface;
  const BoundState cont = interface_continuum(s.w - s.v1, s.u);
  out.summary["continuum"] = json{{"m1", s.w - s.v1}, {"E", complex_json(cont.E)}, {"a", cont.a}};
  const BoundState lat = interface_lattice_solve(s);
  out.summary["lattice"] = bound_state_json(lat);
  out.files.push_back({"profile.csv", profile_csv(lat.profile, "re_psi", "im_psi")});
  return out;
}

inline TaskOutput task_density(const ExperimentConfig& c) {
  TaskOutput out;
  if (c.model_type == "interface") {
    const auto d = interface_density(c.interface);
    out.files.push_back({"density.csv", profile_csv(d.density.site, "re_n", "im_n")});
    out.files.push_back({"cell_density.csv", cell_csv(d.density.cell)});
    out.summary["mode_energy"] = complex_json(d.state.E);
    out.summary["mode_index"] = d.mode_index;
    out.summary["ipr"] = d.ipr;
    double minB = 0, minA = 0;
    for (int i = 0; i < d.density.site.size(); ++i)
      (i % 2 ? minB : minA) = std::min(i % 2 ? minB : minA, d.density.site[i].real());
    out.summary["min_re_density_A"] = minA;
    out.summary["min_re_density_B"] = minB;
    return out;
  }
  const ChainSpec s = chain_for_run(c);
  const auto sys = biorthogonal_diagonalize(build_real_space(s), c.tol.tol_biorth);
  const auto occ = select_half_filling(sys, c.tol.tol_zero);
  const auto d = density_profile(sys, occ);
  out.files.push_back({"density.csv", profile_csv(d.site, "re_n", "im_n")});
  out.files.push_back({"cell_density.csv", cell_csv(d.cell)});
  cd total = d.site.sum();
  double max_im = 0;
  for (int i = 0; i < d.cell.size(); ++i) max_im = std::max(max_im, std::abs(d.cell[i].imag()));
  out.summary["total"] = complex_json(total);
  out.summary["max_abs_im_cell_density"] = max_im;
  out.summary["half_weight_modes"] = occ.half_weight_modes;
  return out;
}

inline TaskOutput task_disorder(const ExperimentConfig& c, int jobs) {
  TaskOutput out;
  ChainSpec tmpl = c.chain;
  validate(tmpl);
  const auto ells = resolve_ells(c.task.ells, tmpl.cells);
  const auto st =
      disorder_ensemble(tmpl, *c.disorder_bound, c.task.realizations, c.seed, ells, profile_options(c, jobs));
  Csv ens({"ell", "mean_re_S", "sem_re_S", "mean_im_S", "sem_im_S"});
  for (size_t i = 0; i < ells.size(); ++i) ens.add(ells[i], st.mean_re[i], st.sem_re[i], st.mean_im[i], st.sem_im[i]);
  Csv per({"realization", "seed", "ell", "re_S", "im_S"});
  double worst_im = 0;
  for (int r = 0; r < st.realizations; ++r)
    for (size_t i = 0; i < ells.size(); ++i) {
      const cd z = st.per_realization[r][i];
      per.add(r, c.seed + std::uint64_t(r), ells[i], z.real(), z.imag());
      if (ells[i] >= 2) worst_im = std::max(worst_im, std::abs(z.imag() + kPi));
    }
  out.files.push_back({"ensemble.csv", ens.str()});
  out.files.push_back({"realizations.csv", per.str()});
  out.summary["realizations"] = st.realizations;
  out.summary["base_seed"] = st.base_seed;
  out.summary["max_abs_im_S_plus_pi_beyond_first"] = worst_im;
  if (c.task.fit_ensemble) {
    std::vector<double> x(ells.begin(), ells.end());
    const bool obc = tmpl.boundary == Boundary::OBC;
    const FitResult f = obc ? cc_fit_obc(x, st.mean_re, tmpl.cells) : cc_fit_pbc(x, st.mean_re, tmpl.cells);
    out.summary["fit"] = fit_json(f);
    out.summary["central_charge"] = (obc ? 6.0 : 3.0) * f.slope;
  }
  return out;
}

inline TaskOutput task_symmetry(const ExperimentConfig& c) {
  TaskOutput out;
  const ChainSpec s = chain_for_run(c);
  const int l = c.task.ell;
  CorrelationMatrix C;
  if (s.clean() && s.boundary == Boundary::PBC) {
    C = correlation_k_space(s, l, c.tol.tol_zero);
  } else {
    const auto sys = biorthogonal_diagonalize(build_real_space(s), c.tol.tol_biorth);
    C = correlation_matrix(sys, select_half_filling(sys, c.tol.tol_zero), l);
  }
  const auto rep = symmetry_closure(C.c, c.tol.tol_sym);
  out.summary["ell"] = l;
  out.summary["t_plus_residual"] = rep.t_plus_residual;
  out.summary["ph_residual"] = rep.ph_residual;
  out.summary["t_plus_ok"] = rep.t_plus_ok;
  out.summary["ph_ok"] = rep.ph_ok;
  const auto es = subsystem_spectrum(C, c.tol.spectrum());
  json ent = json::object();
  for (Prescription p : {Prescription::BranchCut, Prescription::Regularized}) {
    try {
      ent[prescription_name(p)] = complex_json(entropy(es, p).value);
    } catch (const Error& e) {
      ent[prescription_name(p)] = json{{"error", e.name()}};
    }
  }
  out.summary["entropy"] = ent;
  return out;
}

}  // namespace runner_detail

inline TaskOutput execute(const ExperimentConfig& c, int jobs) {
  using namespace runner_detail;
  const std::string& k = c.task.kind;
  if (k == "spectrum") return task_spectrum(c);
  if (k == "entropy-scan") return task_entropy_scan(c, jobs);
  if (k == "cc-fit") return task_cc_fit(c, jobs);
  if (k == "casimir") return task_casimir(c, jobs);
  if (k == "winding") return task_winding(c);
  if (k == "zak") return task_zak(c);
  if (k == "interface") return task_interface(c);
  if (k == "density") return task_density(c);
  if (k == "disorder") return task_disorder(c, jobs);
  if (k == "symmetry-check") return task_symmetry(c);
  throw Error(ErrorCode::ConfigError, "unknown task kind '" + k + "'");
}

// temp file + rename in the same directory
inline void write_atomic(const std::filesystem::path& p, const std::string& content) {
  const std::filesystem::path tmp = p.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    f << content;
    f.flush();
    if (!f) throw Error(ErrorCode::IoError, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, p, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::IoError, "cannot rename onto " + p.string());
  }
}

struct RunResult {
  int exit_code = 0;
  json manifest;
};

// Executes a parsed config; jobs_cap <= 0 means "use the config value".
inline RunResult run_config(const json& raw, int jobs_cap = 0, const std::string& config_path = "") {
  const auto t0 = std::chrono::steady_clock::now();
  RunResult res;
  json& m = res.manifest;
  m["schema_version"] = kSchemaVersion;
  m["artifact"] = "ptchain";
  m["version"] = kVersion;
  m["config_path"] = config_path;
  m["config_hash"] = config_hash(raw);
  m["outputs"] = json::array();
  m["error"] = nullptr;
  auto finish = [&](const char* status, int code) {
    m["status"] = status;
    m["exit_code"] = code;
    m["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    res.exit_code = code;
  };

  ExperimentConfig c;
  try {
    c = parse_config(raw);
  } catch (const Error& e) {
    m["error"] = e.name();
    m["message"] = e.what();
    finish("config_error", kExitConfig);
    return res;
  } catch (const json::exception& e) {
    m["error"] = error_name(ErrorCode::ConfigError);
    m["message"] = e.what();
    finish("config_error", kExitConfig);
    return res;
  }
  m["task"] = c.task.kind;
  const int jobs = jobs_cap > 0 ? std::min(jobs_cap, c.jobs) : c.jobs;
  m["jobs"] = jobs;

  namespace fs = std::filesystem;
  const fs::path dir(c.out_dir);
  const fs::path manifest_path = dir / (c.prefix + "_manifest.json");
  auto write_manifest = [&] {
    try {
      write_atomic(manifest_path, m.dump(2) + "\n");
    } catch (const Error&) {
    }
  };
  try {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw Error(ErrorCode::IoError, "cannot create output directory " + dir.string());
  } catch (const Error& e) {
    m["error"] = e.name();
    m["message"] = e.what();
    finish("io_error", kExitIo);
    return res;
  }

  TaskOutput out;
  try {
    out = execute(c, jobs);
  } catch (const Error& e) {
    m["error"] = e.name();
    m["message"] = e.what();
    const bool io = e.code() == ErrorCode::IoError, cfgerr = e.code() == ErrorCode::ConfigError;
    finish(io ? "io_error" : cfgerr ? "config_error" : "numerical_failure",
           io ? kExitIo : cfgerr ? kExitConfig : kExitNumerical);
    if (!cfgerr) write_manifest();
    return res;
  }

  try {
    for (const auto& [suffix, content] : out.files) {
      const fs::path p = dir / (c.prefix + "_" + suffix);
      write_atomic(p, content);
      m["outputs"].push_back(p.string());
    }
    json summary = out.summary;
    summary["schema_version"] = kSchemaVersion;
    summary["task"] = c.task.kind;
    summary["config_hash"] = m["config_hash"];
    const fs::path sp = dir / (c.prefix + "_summary.json");
    write_atomic(sp, summary.dump(2) + "\n");
    m["outputs"].push_back(sp.string());
  } catch (const Error& e) {
    m["error"] = e.name();
    m["message"] = e.what();
    finish("io_error", kExitIo);
    write_manifest();
    return res;
  }
  finish("ok", kExitOk);
  m["outputs"].push_back(manifest_path.string());
  write_manifest();
  return res;
}

inline RunResult run_file(const std::string& path, int jobs_cap = 0) {
  json raw;
  try {
    raw = read_json_file(path);
  } catch (const Error& e) {
    RunResult r;
    const bool io = e.code() == ErrorCode::IoError;
    r.exit_code = io ? kExitIo : kExitConfig;
    r.manifest = json{{"schema_version", kSchemaVersion},
                      {"artifact", "ptchain"},
                      {"version", kVersion},
                      {"config_path", path},
                      {"config_hash", nullptr},
                      {"status", io ? "io_error" : "config_error"},
                      {"exit_code", r.exit_code},
                      {"error", e.name()},
                      {"message", e.what()},
                      {"outputs", json::array()},
                      {"wall_time_s", 0.0}};
    return r;
  }
  return run_config(raw, jobs_cap, path);
}

}  // namespace ptchain
