#include "squall/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>
#include <utility>
#include <vector>

#include "json.hpp"
#include "squall/barriers.hpp"
#include "squall/errors.hpp"
#include "squall/estimates.hpp"
#include "squall/fixedpoint.hpp"
#include "squall/mesh.hpp"
#include "squall/plap.hpp"
#include "squall/svg.hpp"

namespace fs = std::filesystem;

namespace squall {

namespace {

std::string num17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(const std::string& text, const std::string& what) {
  const char* begin = text.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  while (end && *end == ' ') ++end;
  if (end == begin || !end || *end != '\0')
    throw ConfigError("cannot parse " + what + " from '" + text + "'");
  return v;
}

std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

std::string read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Collects relative paths of everything written under one run directory so
// the manifest can list them.
struct Artifacts {
  fs::path root;
  std::vector<std::string> files;

  explicit Artifacts(const std::string& r) : root(r) {
    fs::create_directories(root);
  }
  std::string path(const std::string& rel) {
    const fs::path p = root / rel;
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    files.push_back(rel);
    return p.string();
  }
};

void write_manifest(Artifacts& art, const RunConfig& cfg,
                    const std::string& spec_hash) {
  nlohmann::ordered_json j;
  j["tool"] = "squall";
  j["version"] = kToolVersion;
  j["command"] = cfg.command;
  nlohmann::ordered_json p;
  p["dim"] = cfg.dim;
  p["mesh_n"] = cfg.mesh_n;
  p["extent"] = cfg.extent;
  if (cfg.command == "solve") {
    p["p"] = cfg.p;
    switch (cfg.load_kind) {
      case LoadKind::constant:
        p["load"] = {{"kind", "const"}, {"value", cfg.load_value}};
        break;
      case LoadKind::singular:
        p["load"] = {{"kind", "singular"},
                     {"c0", cfg.load_c0},
                     {"c1", cfg.load_c1},
                     {"mu", cfg.load_mu}};
        break;
      case LoadKind::csv:
        p["load"] = {{"kind", "csv"}, {"path", cfg.load_csv}};
        break;
    }
  }
  p["tol"] = cfg.tol;
  p["max_iter"] = cfg.max_iter;
  p["damping"] = cfg.damping;
  p["solver_tol"] = cfg.solver_tol;
  p["samples"] = cfg.samples;
  p["plots"] = cfg.plots;
  p["workers"] = cfg.workers;
  p["seed"] = cfg.seed;
  if (!cfg.sweep_params.empty()) p["sweep_params"] = cfg.sweep_params;
  j["parameters"] = p;
  j["inputs"] =
      nlohmann::ordered_json{{"spec_path", cfg.spec_path},
                             {"spec_hash", spec_hash}};
  j["outputs"] = art.files;
  const fs::path out = art.root / "manifest.json";
  write_text_file(out.string(), j.dump(2) + "\n");
}

MeshPtr mesh_from(const RunConfig& cfg) {
  if (cfg.dim != 1 && cfg.dim != 2)
    throw ConfigError("dim must be 1 or 2");
  if (cfg.mesh_n < 3) throw ConfigError("mesh-n must be at least 3");
  std::vector<double> ext = cfg.extent;
  if (ext.empty())
    ext = cfg.dim == 1 ? std::vector<double>{0.0, 1.0}
                       : std::vector<double>{0.0, 1.0, 0.0, 1.0};
  const std::vector<int> counts(static_cast<std::size_t>(cfg.dim),
                                cfg.mesh_n);
  return build_mesh(cfg.dim, ext, counts);
}

PlapConfig solver_config(const RunConfig& cfg) {
  PlapConfig pc;
  pc.tol = cfg.solver_tol;
  return pc;
}

std::string admissibility_text(const AdmissibilityReport& rep) {
  std::string out;
  for (const auto& c : rep.checks)
    out += "cdt[" + c.name + "] = " + (c.pass ? "pass" : "FAIL") +
           " margin=" + num17(c.margin) + "\n";
  out += std::string("admissible = ") + (rep.admissible ? "true" : "false") +
         "\n";
  return out;
}

std::vector<double> log10_clipped(const std::vector<double>& v) {
  std::vector<double> out;
  out.reserve(v.size());
  for (double x : v) out.push_back(std::log10(std::max(x, 1e-300)));
  return out;
}

PlotSeries field_profile(const ScalarField& f, const std::string& name) {
  PlotSeries s;
  s.name = name;
  const Mesh& mesh = *f.mesh;
  for (int n = 0; n < mesh.node_count(); ++n) {
    s.x.push_back(mesh.node_coords(n)[0]);
    s.y.push_back(f.values[n]);
  }
  return s;
}

// ---------------------------------------------------------------- solve --

int cmd_solve(const RunConfig& cfg) {
  Artifacts art(cfg.out_dir);
  MeshPtr mesh = mesh_from(cfg);
  const PlapConfig pc = solver_config(cfg);
  const PlapSolver solver(mesh, cfg.p, pc);

  Load g = ConstantLoad{cfg.load_value};
  std::string load_label = "const(" + num17(cfg.load_value) + ")";
  if (cfg.load_kind == LoadKind::singular) {
    g = SingularLoad{cfg.load_c0, cfg.load_c1, cfg.load_mu};
    load_label = "singular(" + num17(cfg.load_c0) + "," + num17(cfg.load_c1) +
                 "," + num17(cfg.load_mu) + ")";
  } else if (cfg.load_kind == LoadKind::csv) {
    g = NodalLoad{read_field_csv(cfg.load_csv, mesh)};
    load_label = "csv(" + cfg.load_csv + ")";
  }

  int status = exit_ok;
  PlapInfo info;
  ScalarField u;
  try {
    u = solver.solve(g, &info);
  } catch (const PlapIterationLimit& e) {
    u = e.last;
    info.residual = e.residual;
    info.iterations = pc.max_iter;
    status = exit_iteration_limit;
  }

  write_field_csv(art.path("fields/u.csv"), u);
  std::string hist = "iteration,energy,residual\n";
  for (const auto& row : info.history)
    hist += std::to_string(row.iteration) + "," + num17(row.energy) + "," +
            num17(row.residual) + "\n";
  write_text_file(art.path("history.csv"), hist);

  double sup_u = 0.0;
  for (double v : u.values) sup_u = std::max(sup_u, std::abs(v));
  std::string report;
  report += "command = solve\n";
  report += "p = " + num17(cfg.p) + "\n";
  report += "load = " + load_label + "\n";
  report += "dim = " + std::to_string(mesh->dim()) + "\n";
  report += "mesh_n = " + std::to_string(cfg.mesh_n) + "\n";
  report += "iterations = " + std::to_string(info.iterations) + "\n";
  report += "residual = " + num17(info.residual) + "\n";
  report += "sup_u = " + num17(sup_u) + "\n";
  report += "sup_grad = " + num17(norm_sup_grad(u)) + "\n";
  report += std::string("status = ") +
            (status == exit_ok ? "solved" : "iteration-limit") + "\n";
  write_text_file(art.path("report.txt"), report);

  if (cfg.plots) {
    write_text_file(art.path("plots/solution.svg"),
                    heatmap_svg("solution", u));
    PlotSeries rs;
    rs.name = "log10 residual";
    for (const auto& row : info.history) {
      rs.x.push_back(row.iteration);
      rs.y.push_back(std::log10(std::max(row.residual, 1e-300)));
    }
    write_text_file(art.path("plots/history.svg"),
                    line_plot_svg("solver residual", {rs}));
  }
  write_manifest(art, cfg, "");
  return status;
}

// -------------------------------------------------------------- barriers --

int cmd_barriers(const RunConfig& cfg) {
  const std::string spec_bytes = read_file_bytes(cfg.spec_path);
  const SystemSpec spec = parse_spec_config(spec_bytes);
  validate_spec_shape(spec);
  Artifacts art(cfg.out_dir);
  MeshPtr mesh = mesh_from(cfg);
  const BarrierSet bs = build_barrier_set(mesh, spec, -1.0, solver_config(cfg));

  const char* names[2] = {"1", "2"};
  for (int i = 0; i < 2; ++i) {
    write_field_csv(art.path(std::string("fields/y") + names[i] + ".csv"),
                    bs.y[i]);
    write_field_csv(art.path(std::string("fields/z") + names[i] + ".csv"),
                    bs.z[i]);
    write_field_csv(
        art.path(std::string("fields/torsion") + names[i] + ".csv"),
        bs.w_hat[i]);
    write_field_csv(
        art.path(std::string("fields/singular") + names[i] + ".csv"),
        bs.w_sing[i]);
  }
  write_text_file(art.path("report.txt"), barrier_report_text(bs));

  if (cfg.plots) {
    for (int i = 0; i < 2; ++i) {
      if (mesh->dim() == 1) {
        PlotSeries lo = field_profile(bs.z[i], "z");
        PlotSeries hi = field_profile(bs.y[i], "y");
        PlotSeries c0d = lo, c1d = hi;
        c0d.name = "c0*d";
        c1d.name = "c1*d";
        for (int n = 0; n < mesh->node_count(); ++n) {
          c0d.y[n] = bs.c0 * mesh->dist(n);
          c1d.y[n] = bs.c1 * mesh->dist(n);
        }
        write_text_file(
            art.path(std::string("plots/barriers_eq") + names[i] + ".svg"),
            line_plot_svg(std::string("barriers, equation ") + names[i],
                          {c0d, lo, hi, c1d}));
      } else {
        write_text_file(
            art.path(std::string("plots/y") + names[i] + ".svg"),
            heatmap_svg(std::string("upper barrier ") + names[i], bs.y[i]));
        write_text_file(
            art.path(std::string("plots/z") + names[i] + ".svg"),
            heatmap_svg(std::string("lower barrier ") + names[i], bs.z[i]));
        write_text_file(
            art.path(std::string("plots/singular") + names[i] + ".svg"),
            heatmap_svg(std::string("singular barrier ") + names[i],
                        bs.w_sing[i]));
      }
    }
  }
  write_manifest(art, cfg, fnv1a_hex(spec_bytes));
  return exit_ok;
}

// -------------------------------------------------------------- fixpoint --

struct FixpointOutcome {
  int status = exit_internal;
  std::string label = "error";
  bool admissible = false;
  double C = std::numeric_limits<double>::quiet_NaN();
  double k_grad = std::numeric_limits<double>::quiet_NaN();
  double kp_slack = std::numeric_limits<double>::quiet_NaN();
  double final_residual = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  std::string note;
};

FixpointOutcome fixpoint_into(const SystemSpec& spec, const RunConfig& cfg,
                              Artifacts& art) {
  FixpointOutcome out;
  std::string report = "command = fixpoint\n";
  validate_spec_shape(spec);
  const AdmissibilityReport rep = validate_cdt(spec);
  report += admissibility_text(rep);
  out.admissible = rep.admissible;
  if (!rep.admissible) {
    out.status = exit_admissibility;
    out.label = "inadmissible";
    write_text_file(art.path("report.txt"), report);
    return out;
  }

  MeshPtr mesh = mesh_from(cfg);
  const PlapConfig pc = solver_config(cfg);
  const BarrierSet bs = build_barrier_set(mesh, spec, -1.0, pc);
  const auto cal_loads = default_calibration_loads(8, cfg.seed);
  double k_grad = 0.0;
  for (int i = 0; i < 2; ++i) {
    if (i == 1 && spec.p[1] == spec.p[0] && spec.r[1] == spec.r[0]) break;
    const CalibrationReport cal =
        calibrate_kp(mesh, spec.p[i], cal_loads, spec.r[i], 1.5, pc);
    k_grad = std::max(k_grad, cal.k_p);
  }
  out.k_grad = k_grad;
  report += "k_grad = " + num17(k_grad) + "\n";

  double C = 0.0;
  try {
    C = select_C(spec, bs, k_grad);
  } catch (const ClosureFailure& e) {
    out.status = exit_closure_failure;
    out.label = "closure-failure";
    out.note = e.what();
    report += "closure = FAIL\n";
    report += "closure_note = " + out.note + "\n";
    write_text_file(art.path("report.txt"), report);
    return out;
  }
  out.C = C;
  out.kp_slack = closure_norm_slack(spec, bs, k_grad, C);
  const Rectangle rect = make_rectangle(bs, C);

  const FixpointState st =
      iterate(spec, mesh, rect, cfg.damping, cfg.tol, cfg.max_iter, pc);

  std::string hist = "k,residual,worst_lower,worst_upper,worst_grad,clamp\n";
  for (std::size_t k = 0; k < st.residual_history.size(); ++k) {
    const MembershipReport& m = st.membership_history[k];
    hist += std::to_string(k + 1) + "," + num17(st.residual_history[k]) +
            "," + num17(m.worst_lower) + "," + num17(m.worst_upper) + "," +
            num17(m.worst_grad) + "," + num17(st.clamp_history[k]) + "\n";
  }
  write_text_file(art.path("history.csv"), hist);
  write_field_csv(art.path("fields/u.csv"), st.iterate[0]);
  write_field_csv(art.path("fields/v.csv"), st.iterate[1]);

  out.iterations = st.k;
  out.final_residual =
      st.residual_history.empty()
          ? std::numeric_limits<double>::quiet_NaN()
          : st.residual_history.back();
  out.label = to_string(st.status);
  switch (st.status) {
    case FixpointStatus::converged:
      out.status = exit_ok;
      break;
    case FixpointStatus::iteration_limit:
      out.status = exit_iteration_limit;
      break;
    default:
      out.status = exit_left_set;
      break;
  }

  report += "C = " + num17(C) + "\n";
  report += "kp_slack = " + num17(out.kp_slack) + "\n";
  report += std::string("status = ") + out.label + "\n";
  report += "iterations = " + std::to_string(st.k) + "\n";
  report += "final_residual = " + num17(out.final_residual) + "\n";
  report += "certificate_u = " + num17(st.certificate[0]) + "\n";
  report += "certificate_v = " + num17(st.certificate[1]) + "\n";
  report += std::string("in_rectangle = ") +
            (st.in_rectangle ? "true" : "false") + "\n";
  report += std::string("grad_within_cap = ") +
            (st.grad_within_cap ? "true" : "false") + "\n";
  double min_u = std::numeric_limits<double>::infinity();
  double min_v = min_u;
  for (int n = 0; n < mesh->node_count(); ++n) {
    if (mesh->is_boundary(n)) continue;
    min_u = std::min(min_u, st.iterate[0].values[n]);
    min_v = std::min(min_v, st.iterate[1].values[n]);
  }
  report += "min_interior_u = " + num17(min_u) + "\n";
  report += "min_interior_v = " + num17(min_v) + "\n";
  write_text_file(art.path("report.txt"), report);

  if (cfg.plots) {
    write_text_file(art.path("plots/u.svg"),
                    heatmap_svg("first component", st.iterate[0]));
    write_text_file(art.path("plots/v.svg"),
                    heatmap_svg("second component", st.iterate[1]));
    PlotSeries rs;
    rs.name = "log10 residual";
    rs.y = log10_clipped(st.residual_history);
    for (std::size_t k = 0; k < rs.y.size(); ++k)
      rs.x.push_back(static_cast<double>(k + 1));
    write_text_file(art.path("plots/residual.svg"),
                    line_plot_svg("outer iteration residual", {rs}));
  }
  return out;
}

int cmd_fixpoint(const RunConfig& cfg) {
  const std::string spec_bytes = read_file_bytes(cfg.spec_path);
  const SystemSpec spec = parse_spec_config(spec_bytes);
  Artifacts art(cfg.out_dir);
  const FixpointOutcome out = fixpoint_into(spec, cfg, art);
  write_manifest(art, cfg, fnv1a_hex(spec_bytes));
  if (!out.note.empty()) std::fprintf(stderr, "note: %s\n", out.note.c_str());
  return out.status;
}

// -------------------------------------------------------------- validate --

int cmd_validate(const RunConfig& cfg) {
  const std::string spec_bytes = read_file_bytes(cfg.spec_path);
  const SystemSpec spec = parse_spec_config(spec_bytes);
  validate_spec_shape(spec);
  Artifacts art(cfg.out_dir);

  std::string report = "command = validate\n";
  const AdmissibilityReport rep = validate_cdt(spec);
  report += admissibility_text(rep);
  if (!rep.admissible) {
    write_text_file(art.path("report.txt"), report);
    write_manifest(art, cfg, fnv1a_hex(spec_bytes));
    return exit_admissibility;
  }

  MeshPtr mesh = mesh_from(cfg);
  const PlapConfig pc = solver_config(cfg);
  if (cfg.samples < 1) throw ConfigError("samples must be at least 1");
  const auto loads = default_calibration_loads(cfg.samples, cfg.seed);
  for (int i = 0; i < 2; ++i) {
    const CalibrationReport cal =
        calibrate_kp(mesh, spec.p[i], loads, spec.r[i], 1.5, pc);
    const std::string eq = "eq" + std::to_string(i + 1);
    report += "k_p." + eq + " = " + num17(cal.k_p) + "\n";
    report += "hardy." + eq + " = " + num17(cal.hardy_constant) + "\n";
    report += "safety." + eq + " = " + num17(cal.safety) + "\n";
    std::string csv = "id,grad_sup,load_norm,ratio,ok,note\n";
    for (const auto& s : cal.samples) {
      std::string note = s.note;
      std::replace(note.begin(), note.end(), ',', ';');
      csv += s.id + "," + num17(s.grad_sup) + "," + num17(s.load_norm) + "," +
             num17(s.ratio) + "," + (s.ok ? "1" : "0") + "," + note + "\n";
    }
    write_text_file(art.path("samples_" + eq + ".csv"), csv);
  }
  report += "samples = " + std::to_string(cfg.samples) + "\n";
  write_text_file(art.path("report.txt"), report);
  write_manifest(art, cfg, fnv1a_hex(spec_bytes));
  return exit_ok;
}

// ----------------------------------------------------------------- sweep --

int cmd_sweep(const RunConfig& cfg) {
  const std::string spec_bytes = read_file_bytes(cfg.spec_path);
  const SystemSpec base = parse_spec_config(spec_bytes);
  validate_spec_shape(base);
  if (cfg.sweep_params.empty())
    throw ConfigError("sweep needs at least one --param name=lo:hi:count");
  std::vector<SweepParam> params;
  for (const auto& text : cfg.sweep_params)
    params.push_back(parse_sweep_param(text));

  std::size_t total = 1;
  for (const auto& sp : params) total *= sp.values.size();
  if (total == 0 || total > 100000)
    throw ConfigError("sweep grid must have between 1 and 100000 cells");

  int pad = 3;
  while (total > static_cast<std::size_t>(std::pow(10, pad))) ++pad;

  struct Row {
    std::vector<double> values;
    FixpointOutcome out;
  };
  std::vector<Row> rows(total);

  Artifacts art(cfg.out_dir);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= total) return;
      Row& row = rows[idx];
      // first parameter varies slowest
      std::size_t rem = idx;
      row.values.resize(params.size());
      for (std::size_t k = params.size(); k-- > 0;) {
        const auto& vals = params[k].values;
        row.values[k] = vals[rem % vals.size()];
        rem /= vals.size();
      }
      char cell[32];
      std::snprintf(cell, sizeof(cell), "cell_%0*zu", pad, idx);
      RunConfig ccfg = cfg;
      ccfg.command = "fixpoint";
      ccfg.out_dir = (fs::path(cfg.out_dir) / cell).string();
      try {
        SystemSpec spec = base;
        for (std::size_t k = 0; k < params.size(); ++k)
          apply_param(spec, params[k].name, row.values[k]);
        Artifacts cart(ccfg.out_dir);
        save_spec_config(spec, cart.path("spec.ini"));
        row.out = fixpoint_into(spec, ccfg, cart);
        write_manifest(cart, ccfg, fnv1a_hex(write_spec_config(spec)));
      } catch (const std::exception& e) {
        row.out.status = exit_internal;
        row.out.label = "error";
        row.out.note = e.what();
      }
    }
  };
  const std::size_t nthreads =
      std::min<std::size_t>(static_cast<std::size_t>(cfg.workers), total);
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < nthreads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::string csv = "cell";
  for (const auto& sp : params) csv += "," + sp.name;
  csv += ",admissible,C,status,iterations,final_residual,kp_slack,note\n";
  for (std::size_t idx = 0; idx < total; ++idx) {
    const Row& row = rows[idx];
    char cell[32];
    std::snprintf(cell, sizeof(cell), "cell_%0*zu", pad, idx);
    csv += cell;
    for (double v : row.values) csv += "," + num17(v);
    std::string note = row.out.note;
    std::replace(note.begin(), note.end(), ',', ';');
    std::replace(note.begin(), note.end(), '\n', ' ');
    csv += std::string(",") + (row.out.admissible ? "1" : "0") + "," +
           num17(row.out.C) + "," + row.out.label + "," +
           std::to_string(row.out.iterations) + "," +
           num17(row.out.final_residual) + "," + num17(row.out.kp_slack) +
           "," + note + "\n";
  }
  write_text_file(art.path("sweep.csv"), csv);

  std::string report = "command = sweep\n";
  for (const auto& sp : params) {
    report += "param." + sp.name + " = ";
    for (std::size_t k = 0; k < sp.values.size(); ++k)
      report += (k ? " " : "") + num17(sp.values[k]);
    report += "\n";
  }
  report += "cells = " + std::to_string(total) + "\n";
  report += "workers = " + std::to_string(cfg.workers) + "\n";
  write_text_file(art.path("report.txt"), report);
  write_manifest(art, cfg, fnv1a_hex(spec_bytes));
  return exit_ok;
}

}  // namespace

SweepParam parse_sweep_param(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("sweep parameter must look like name=lo:hi:count, got '" +
                      text + "'");
  SweepParam sp;
  sp.name = text.substr(0, eq);
  const std::string rest = text.substr(eq + 1);
  const auto c1 = rest.find(':');
  const auto c2 = rest.find(':', c1 == std::string::npos ? 0 : c1 + 1);
  if (c1 == std::string::npos || c2 == std::string::npos)
    throw ConfigError("sweep range must look like lo:hi:count, got '" + rest +
                      "'");
  const double lo = parse_double(rest.substr(0, c1), "sweep lower bound");
  const double hi =
      parse_double(rest.substr(c1 + 1, c2 - c1 - 1), "sweep upper bound");
  const double count_raw = parse_double(rest.substr(c2 + 1), "sweep count");
  const int count = static_cast<int>(count_raw);
  if (count < 1 || count != count_raw)
    throw ConfigError("sweep count must be a positive integer");
  if (count == 1) {
    sp.values.push_back(lo);
  } else {
    for (int j = 0; j < count; ++j)
      sp.values.push_back(lo + (hi - lo) * j / (count - 1));
  }
  return sp;
}

void apply_param(SystemSpec& spec, const std::string& name, double value) {
  auto pick = [&](const std::string& base,
                  std::array<double, 2>& target) -> bool {
    if (name == base + "1") {
      target[0] = value;
      return true;
    }
    if (name == base + "2") {
      target[1] = value;
      return true;
    }
    return false;
  };
  if (!(pick("p", spec.p) || pick("alpha", spec.alpha) ||
        pick("beta", spec.beta) || pick("gamma", spec.gamma) ||
        pick("theta", spec.theta) || pick("m", spec.m) ||
        pick("M", spec.M) || pick("r", spec.r)))
    throw ConfigError("unknown sweep parameter '" + name + "'");
  apply_auto_rules(spec);
}

int run(const RunConfig& cfg) {
  try {
    if (!(cfg.tol > 0.0) || !(cfg.solver_tol > 0.0))
      throw ConfigError("tolerances must be positive");
    if (cfg.max_iter < 1) throw ConfigError("max-iter must be at least 1");
    if (cfg.workers < 1) throw ConfigError("workers must be at least 1");
    if (cfg.command == "solve") return cmd_solve(cfg);
    if (cfg.command == "barriers") return cmd_barriers(cfg);
    if (cfg.command == "fixpoint") return cmd_fixpoint(cfg);
    if (cfg.command == "validate") return cmd_validate(cfg);
    if (cfg.command == "sweep") return cmd_sweep(cfg);
    throw ConfigError("unknown command '" + cfg.command + "'");
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_parse;
  } catch (const AdmissibilityError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_admissibility;
  } catch (const HypothesisViolation& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_admissibility;
  } catch (const NonIntegrableExponent& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_admissibility;
  } catch (const ClosureFailure& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_closure_failure;
  } catch (const PlapIterationLimit& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_iteration_limit;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_internal;
  }
}

}  // namespace squall
