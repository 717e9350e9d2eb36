#pragma once

#include <chrono>
#include <iostream>

#include "krotor/analysis.hpp"
#include "krotor/config.hpp"
#include "krotor/csv.hpp"
#include "krotor/husimi.hpp"
#include "krotor/sweep.hpp"
#include "krotor/verify.hpp"

namespace krotor {

struct RunResult {
  std::vector<std::filesystem::path> files;
};

namespace detail {

inline std::string model_tag(const ExperimentConfig& cfg) {
  std::string tag = "r" + std::to_string(cfg.r) + "s" + std::to_string(cfg.s) + "w" +
                    std::to_string(cfg.omega) + "_k" + format_double_short(cfg.kick);
  if (cfg.lambda > 0.0) tag += "_lam" + format_double_short(cfg.lambda);
  return tag;
}

inline std::filesystem::path out_path(const ExperimentConfig& cfg, const std::string& stem) {
  std::filesystem::create_directories(cfg.out_dir);
  return std::filesystem::path(cfg.out_dir) / (cfg.prefix + stem + ".csv");
}

inline void write_header(CsvFile& csv, const ExperimentConfig& cfg,
                         const std::vector<std::string>& extra = {}) {
  csv.comment(std::string("krotor ") + kVersion);
  for (const std::string& tok : config_summary(cfg)) csv.comment(tok);
  for (const std::string& tok : extra) csv.comment(tok);
}

inline Wavefunction initial_wavefunction(const ExperimentConfig& cfg, double delta) {
  if (cfg.initial == "coherent") return coherent_state(cfg.p0, cfg.theta0, delta);
  if (cfg.initial == "eigenstate") {
    Wavefunction psi;
    psi.n_min = cfg.eigen_n;
    psi.amps = {cplx{1.0, 0.0}};
    return psi;
  }
  throw config_error("initial.kind=" + cfg.initial + " has no single quantum state");
}

inline double reference_p0(const ExperimentConfig& cfg, double delta) {
  if (cfg.initial == "eigenstate") return delta * static_cast<double>(cfg.eigen_n);
  return cfg.p0;
}

inline StepOptions step_options(const ExperimentConfig& cfg) {
  StepOptions opt;
  opt.pos_tol = cfg.tol.pos_tol;
  opt.amp_tol = cfg.tol.amp_tol;
  opt.sel_tol = cfg.tol.sel_tol;
  opt.branch_cap = cfg.tol.branch_cap;
  return opt;
}

inline void write_ensemble_rows(CsvFile& csv, const BranchEnsemble& ens, int t) {
  csv.row("t", "p", "theta", "re_amp", "im_amp");
  for (const Branch& b : ens.branches)
    csv.row(t, b.point.p, b.point.theta, b.amp.real(), b.amp.imag());
}

inline void write_quantum_series(const std::filesystem::path& path, const ExperimentConfig& cfg,
                                 const ObservableSeries& s, double delta) {
  CsvFile csv(path);
  write_header(csv, cfg, {"series=quantum", "series_delta=" + format_double_short(delta)});
  csv.row("t", "mean_p", "var_p", "norm_factor", "boundary_leak");
  for (std::size_t i = 0; i < s.size(); ++i)
    csv.row(s.times[i], s.mean_p[i], s.var_p[i], s.norm_factor[i], s.boundary_leak[i]);
}

inline void write_pseudo_series(const std::filesystem::path& path, const ExperimentConfig& cfg,
                                const ObservableSeries& s) {
  CsvFile csv(path);
  write_header(csv, cfg, {"series=pseudoclassical"});
  csv.row("t", "mean_p", "var_p", "total_weight", "branch_count");
  for (std::size_t i = 0; i < s.size(); ++i)
    csv.row(s.times[i], s.mean_p[i], s.var_p[i],
            s.total_weight.empty() ? 1.0 : s.total_weight[i],
            s.branch_count.empty() ? std::int64_t{0} : s.branch_count[i]);
}

/// Pseudoclassical series from a single initial point, stepping the full
/// branching map and recording amplitude-weighted moments.
inline std::pair<ObservableSeries, std::vector<BranchEnsemble>> pseudo_point_series(
    const ExperimentConfig& cfg, const ModelParams& mp, int t_max, bool keep_ensembles) {
  const BranchSpec spec = branch_spec(cfg.r, cfg.s, cfg.tol.eps_zero);
  const EvolutionMode mode = mp.lambda > 0.0 ? EvolutionMode::PT : EvolutionMode::Hermitian;
  BranchEnsemble ens;
  ens.branches.push_back({PhasePoint{cfg.p0, cfg.theta0}, cplx{1.0, 0.0}});
  ObservableSeries s;
  std::vector<BranchEnsemble> history;
  const double p0 = cfg.p0;
  for (int t = 0; t <= t_max; ++t) {
    if (t > 0) ens = step_ensemble(ens, mp, spec, mode, step_options(cfg));
    const Moments m = ensemble_moments(ens, p0);
    s.times.push_back(t);
    s.mean_p.push_back(m.mean_p);
    s.var_p.push_back(m.var_p);
    s.total_weight.push_back(ens.total_weight());
    s.branch_count.push_back(static_cast<std::int64_t>(ens.branches.size()));
    if (keep_ensembles) history.push_back(ens);
  }
  return {std::move(s), std::move(history)};
}

}  // namespace detail

/// Phase-space snapshots: Husimi field of the quantum state plus the branch
/// ensemble of the pseudoclassical map, one file pair per time step.
inline RunResult run_husimi_overlay(const ExperimentConfig& cfg) {
  const ModelParams mp = cfg.model();
  if (cfg.initial != "coherent")
    throw config_error("husimi-overlay needs initial.kind=coherent");
  RunResult out;

  auto [pseudo, ensembles] = detail::pseudo_point_series(cfg, mp, cfg.t_max, true);

  EvolveOptions eopt;
  eopt.p0 = cfg.p0;
  eopt.leak_tol = cfg.tol.leak_tol;
  for (int t = 0; t <= cfg.t_max; ++t) eopt.snapshot_times.push_back(t);
  const EvolveResult qr = evolve(coherent_state(cfg.p0, cfg.theta0, mp.delta), mp, cfg.t_max, eopt);

  // the grid covers every branch and the quantum momentum range, padded by
  // p_pad_sigma coherent widths, at nodes_per_sigma resolution
  const double sigma = std::sqrt(mp.delta / 2.0);
  double p_lo = cfg.p0, p_hi = cfg.p0;
  for (const BranchEnsemble& e : ensembles)
    for (const Branch& b : e.branches) {
      p_lo = std::min(p_lo, b.point.p);
      p_hi = std::max(p_hi, b.point.p);
    }
  p_lo -= cfg.p_pad_sigma * sigma;
  p_hi += cfg.p_pad_sigma * sigma;
  const double step = sigma / static_cast<double>(cfg.nodes_per_sigma);
  const std::size_t np = static_cast<std::size_t>(std::ceil((p_hi - p_lo) / step)) + 1;
  const std::size_t ntheta = static_cast<std::size_t>(std::ceil(kTwoPi / step));
  const std::vector<double> p_grid = uniform_grid(p_lo, p_hi, np);
  const std::vector<double> theta_grid = circle_grid(ntheta);

  const std::string tag = detail::model_tag(cfg) + "_d" + format_double_short(cfg.delta);
  for (int t = 0; t <= cfg.t_max; ++t) {
    const HusimiField field =
        husimi_field(qr.snapshots[static_cast<std::size_t>(t)].second, p_grid, theta_grid,
                     mp.delta);
    const auto fpath =
        detail::out_path(cfg, cfg.experiment + "_field_" + tag + "_t" + std::to_string(t));
    {
      CsvFile csv(fpath);
      detail::write_header(csv, cfg, {"t=" + std::to_string(t)});
      csv.row("p", "theta", "value");
      for (std::size_t i = 0; i < field.p_grid.size(); ++i)
        for (std::size_t j = 0; j < field.theta_grid.size(); ++j)
          csv.row(field.p_grid[i], field.theta_grid[j], field.at(i, j));
    }
    out.files.push_back(fpath);
    const auto bpath =
        detail::out_path(cfg, cfg.experiment + "_branches_" + tag + "_t" + std::to_string(t));
    {
      CsvFile csv(bpath);
      detail::write_header(csv, cfg, {"t=" + std::to_string(t)});
      detail::write_ensemble_rows(csv, ensembles[static_cast<std::size_t>(t)], t);
    }
    out.files.push_back(bpath);
  }
  return out;
}

/// Quantum vs pseudoclassical <(p-p0)^2>: one quantum series per sweep delta
/// plus a single pseudoclassical series (the limit map does not depend on
/// delta when the effective kick is held fixed).
inline RunResult run_variance_compare(const ExperimentConfig& cfg) {
  if (cfg.lambda > 0.0)
    throw config_error("variance-compare is the Hermitian comparison; use pt-current for lambda > 0");
  if (cfg.kick_mode != "effective")
    throw config_error("variance-compare sweeps delta at fixed effective kick; set kick_mode=effective");
  if (cfg.initial == "eigenstate" && cfg.eigen_n != 0)
    throw config_error("variance-compare with an eigenstate start needs n=0 so the baseline is shared");
  if (cfg.initial == "uniform_line")
    throw config_error("variance-compare compares against a quantum state; use coherent or eigenstate");
  RunResult out;
  const std::string tag = detail::model_tag(cfg);

  // pseudoclassical side
  ObservableSeries pseudo;
  if (cfg.initial == "coherent") {
    pseudo = detail::pseudo_point_series(cfg, cfg.model(), cfg.t_max, false).first;
  } else {
    const BranchSpec spec = branch_spec(cfg.r, cfg.s, cfg.tol.eps_zero);
    ClassicalBaseline base(cfg.model(), spec, 0.0,
                           uniform_line_ensemble(0.0, static_cast<std::size_t>(cfg.n_points)),
                           detail::step_options(cfg));
    pseudo = base.series(cfg.t_max);
  }
  const auto ppath = detail::out_path(cfg, cfg.experiment + "_pseudo_" + tag);
  detail::write_pseudo_series(ppath, cfg, pseudo);
  out.files.push_back(ppath);

  for (const double d : cfg.sweep_or_single()) {
    const ModelParams mp = cfg.model_at(d);
    EvolveOptions eopt;
    eopt.p0 = detail::reference_p0(cfg, d);
    eopt.leak_tol = cfg.tol.leak_tol;
    const EvolveResult qr = evolve(detail::initial_wavefunction(cfg, d), mp, cfg.t_max, eopt);
    const auto qpath =
        detail::out_path(cfg, cfg.experiment + "_quantum_" + tag + "_d" + format_double_short(d));
    detail::write_quantum_series(qpath, cfg, qr.series, d);
    out.files.push_back(qpath);
  }
  return out;
}

struct TdiffRow {
  double delta = 0.0;
  int t_diff = kDiffusionNotReached;
  int t_max_used = 0;
  double seconds = 0.0;
  std::vector<double> quantum_var;  // kept when run.write_series is set
};

struct TdiffTable {
  std::vector<TdiffRow> rows;
  std::vector<double> baseline_var;  // shared pseudoclassical series
  bool fitted = false;
  PowerlawFit fit;
};

/// Diffusion-time sweep against a shared pseudoclassical baseline; rows that
/// never reach the deviation are flagged and excluded from the fit.
inline TdiffTable sweep_tdiff_table(const ExperimentConfig& cfg) {
  if (cfg.lambda > 0.0) throw config_error("sweep-tdiff is defined for the Hermitian model");
  if (cfg.kick_mode != "effective")
    throw config_error("sweep-tdiff holds the effective kick fixed; set kick_mode=effective");
  if (cfg.initial == "eigenstate" && cfg.eigen_n != 0)
    throw config_error("sweep-tdiff needs n=0 so the baseline is shared across deltas");

  const BranchSpec spec = branch_spec(cfg.r, cfg.s, cfg.tol.eps_zero);
  BranchEnsemble points;
  double p0 = 0.0;
  if (cfg.initial == "coherent") {
    points.branches.push_back({PhasePoint{cfg.p0, cfg.theta0}, cplx{1.0, 0.0}});
    p0 = cfg.p0;
  } else if (cfg.initial == "eigenstate") {
    points = uniform_line_ensemble(0.0, static_cast<std::size_t>(cfg.n_points));
    p0 = 0.0;  // classical counterpart of |0>: the line p = 0
  } else {
    throw config_error("sweep-tdiff needs a quantum initial state (coherent or eigenstate)");
  }
  ClassicalBaseline baseline(cfg.model_at(cfg.sweep_or_single().front()), spec, p0, points,
                             detail::step_options(cfg));

  TdiffTable table;
  for (const double d : cfg.sweep_or_single()) {
    const ModelParams mp = cfg.model_at(d);
    const double cap = cfg.tdiff_safety / (d * d);
    const int t_cap = static_cast<int>(std::min<double>(cfg.t_max, std::ceil(cap)));
    const Wavefunction psi0 = detail::initial_wavefunction(cfg, d);
    TdiffResult res;
    if (cfg.precision == "float")
      res = quantum_tdiff<float>(mp, psi0, p0, baseline, t_cap, cfg.tol.tdiff_threshold,
                                 cfg.tol.leak_tol);
    else
      res = quantum_tdiff<double>(mp, psi0, p0, baseline, t_cap, cfg.tol.tdiff_threshold,
                                  cfg.tol.leak_tol);
    TdiffRow row{d, res.t_diff, t_cap, res.seconds, {}};
    if (cfg.write_series) row.quantum_var = std::move(res.quantum_var);
    table.rows.push_back(std::move(row));
  }
  table.baseline_var = baseline.var_series();

  std::vector<double> xs, ys;
  for (const TdiffRow& row : table.rows)
    if (row.t_diff != kDiffusionNotReached) {
      xs.push_back(row.delta);
      ys.push_back(static_cast<double>(row.t_diff));
    }
  if (xs.size() >= 3) {
    table.fit = powerlaw_fit(xs, ys);
    table.fitted = true;
  }
  return table;
}

inline RunResult run_sweep_tdiff(const ExperimentConfig& cfg) {
  const TdiffTable table = sweep_tdiff_table(cfg);
  RunResult out;
  const auto path = detail::out_path(cfg, cfg.experiment + "_" + detail::model_tag(cfg));
  CsvFile csv(path);
  std::vector<std::string> extra;
  if (table.fitted) {
    extra.push_back("fit_slope=" + format_double(table.fit.slope));
    extra.push_back("fit_intercept=" + format_double(table.fit.intercept));
    extra.push_back("fit_r_squared=" + format_double(table.fit.r_squared));
  } else {
    extra.push_back("fit=none (needs at least 3 reached rows)");
  }
  detail::write_header(csv, cfg, extra);
  csv.row("delta", "t_diff", "reached", "t_max_used");
  for (const TdiffRow& row : table.rows)
    csv.row(row.delta, row.t_diff, row.t_diff == kDiffusionNotReached ? 0 : 1, row.t_max_used);
  csv.close();
  out.files.push_back(path);
  if (cfg.write_series) {
    for (const TdiffRow& row : table.rows) {
      const auto spath = detail::out_path(cfg, cfg.experiment + "_series_" +
                                                   detail::model_tag(cfg) + "_d" +
                                                   format_double_short(row.delta));
      CsvFile scsv(spath);
      detail::write_header(scsv, cfg, {"series_delta=" + format_double_short(row.delta)});
      scsv.row("t", "var_quantum", "var_pseudo");
      for (std::size_t t = 0; t < row.quantum_var.size(); ++t)
        scsv.row(static_cast<int>(t), row.quantum_var[t], table.baseline_var[t]);
      out.files.push_back(spath);
    }
  }
  return out;
}

/// Directed-current runs of the PT-symmetric model: quantum <p>(t) per delta
/// against the non-Hermitian pseudoclassical map, with per-step branch dumps.
inline RunResult run_pt_current(const ExperimentConfig& cfg) {
  if (!(cfg.lambda > 0.0))
    throw config_error("pt-current needs lambda > 0 (use variance-compare for the Hermitian model)");
  if (cfg.initial != "coherent") throw config_error("pt-current needs initial.kind=coherent");
  RunResult out;
  const std::string tag = detail::model_tag(cfg);

  auto [pseudo, ensembles] = detail::pseudo_point_series(cfg, cfg.model(), cfg.t_max, true);
  const auto ppath = detail::out_path(cfg, cfg.experiment + "_pseudo_" + tag);
  detail::write_pseudo_series(ppath, cfg, pseudo);
  out.files.push_back(ppath);
  if (cfg.dump_branches) {
    for (int t = 0; t <= cfg.t_max; ++t) {
      const auto bpath =
          detail::out_path(cfg, cfg.experiment + "_branches_" + tag + "_t" + std::to_string(t));
      CsvFile csv(bpath);
      detail::write_header(csv, cfg, {"t=" + std::to_string(t)});
      detail::write_ensemble_rows(csv, ensembles[static_cast<std::size_t>(t)], t);
      out.files.push_back(bpath);
    }
  }

  for (const double d : cfg.sweep_or_single()) {
    const ModelParams mp = cfg.model_at(d);
    EvolveOptions eopt;
    eopt.p0 = cfg.p0;
    eopt.leak_tol = cfg.tol.leak_tol;
    const EvolveResult qr = evolve(coherent_state(cfg.p0, cfg.theta0, d), mp, cfg.t_max, eopt);
    const auto qpath =
        detail::out_path(cfg, cfg.experiment + "_quantum_" + tag + "_d" + format_double_short(d));
    detail::write_quantum_series(qpath, cfg, qr.series, d);
    out.files.push_back(qpath);
  }
  return out;
}

inline RunResult run_dump_branch_spec(const ExperimentConfig& cfg) {
  const BranchSpec spec = branch_spec(cfg.r, cfg.s, cfg.tol.eps_zero);
  RunResult out;
  const auto path = detail::out_path(
      cfg, cfg.experiment + "_r" + std::to_string(cfg.r) + "s" + std::to_string(cfg.s));
  CsvFile csv(path);
  detail::write_header(
      csv, cfg,
      {"n_branches=" + std::to_string(spec.n_branches()),
       std::string("case=") + to_string(classify_case(cfg.s, cfg.omega))});
  csv.row("delta_theta", "re_amp", "im_amp", "abs_amp");
  for (const BranchSpecEntry& e : spec.entries)
    csv.row(e.delta_theta, e.amplitude.real(), e.amplitude.imag(), std::abs(e.amplitude));
  csv.close();
  out.files.push_back(path);
  return out;
}

/// Dispatch by cfg.experiment. Validates the model parameters up front so
/// configuration mistakes fail before any output is written.
inline RunResult run_experiment(const ExperimentConfig& cfg) {
  (void)cfg.model();  // throws config_error on invalid parameters
  if (cfg.t_max < 0) throw config_error("run.t_max must be >= 0");
  if (cfg.experiment == "husimi-overlay") return run_husimi_overlay(cfg);
  if (cfg.experiment == "variance-compare") return run_variance_compare(cfg);
  if (cfg.experiment == "sweep-tdiff") return run_sweep_tdiff(cfg);
  if (cfg.experiment == "pt-current") return run_pt_current(cfg);
  if (cfg.experiment == "dump-branch-spec") return run_dump_branch_spec(cfg);
  throw config_error("unknown experiment: " + cfg.experiment);
}

struct ExperimentInfo {
  std::string name;
  std::string description;
  ExperimentConfig defaults;
};

/// The named experiments, each with a runnable default configuration.
inline const std::vector<ExperimentInfo>& experiment_registry() {
  static const std::vector<ExperimentInfo> registry = [] {
    std::vector<ExperimentInfo> v;

    ExperimentConfig husimi;
    husimi.experiment = "husimi-overlay";
    v.push_back({"husimi-overlay",
                 "Husimi snapshots of the quantum state with the branch map overlaid "
                 "(default: general case r=1 s=4 w=1, delta=0.04, k=0.5, coherent start)",
                 husimi});

    ExperimentConfig var;
    var.experiment = "variance-compare";
    var.t_max = 12;
    var.delta_sweep = {1e-1, 1e-2, 1e-3};
    v.push_back({"variance-compare",
                 "quantum vs pseudoclassical <(p-p0)^2> over a delta sweep at fixed "
                 "effective kick",
                 var});

    ExperimentConfig sweep;
    sweep.experiment = "sweep-tdiff";
    sweep.r = 1;
    sweep.s = 3;
    sweep.omega = 3;
    sweep.kick = 2.0;
    sweep.initial = "eigenstate";
    sweep.eigen_n = 0;
    sweep.p0 = 0.0;
    sweep.theta0 = 0.0;
    sweep.n_points = 10000;
    sweep.t_max = 10000;
    sweep.delta_sweep = {1e-2, std::pow(10.0, -2.4), std::pow(10.0, -2.8),
                         std::pow(10.0, -3.2)};
    v.push_back({"sweep-tdiff",
                 "diffusion time vs delta with a power-law fit (default: bounded case "
                 "r=1 s=3 w=3, k=2, |0> start vs a uniform line ensemble)",
                 sweep});

    ExperimentConfig pt;
    pt.experiment = "pt-current";
    pt.lambda = 0.01;
    pt.p0 = 0.0;
    pt.theta0 = 0.0;
    pt.t_max = 20;
    pt.delta_sweep = {1e-1, 1e-2, 1e-3};
    v.push_back({"pt-current",
                 "directed current of the PT-symmetric model: quantum <p>(t) per delta "
                 "vs the selector map",
                 pt});

    ExperimentConfig dump;
    dump.experiment = "dump-branch-spec";
    v.push_back({"dump-branch-spec",
                 "angular offsets and complex amplitudes of the branching map for (r, s)",
                 dump});

    return v;
  }();
  return registry;
}

inline ExperimentConfig default_config(const std::string& name) {
  for (const ExperimentInfo& info : experiment_registry())
    if (info.name == name) return info.defaults;
  throw config_error("unknown experiment: " + name);
}

}  // namespace krotor
