// celab: command-line front end. JSON system specs in, JSON reports on
// stdout, CSV tables on disk. Exit codes: 0 ok, 2 parse, 3 math domain,
// 4 structural (includes conjugate-pair splits), 5 I/O.
// SPDX-License-Identifier: MIT
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "celab/celab.hpp"

namespace fs = std::filesystem;
using celab::json;

namespace {

celab::SystemSpec load_spec(const std::string& path) {
  return celab::load_system_spec(path);
}

celab::CoarseMap resolve_w(const celab::SystemSpec& spec,
                           const std::string& w_file) {
  if (!w_file.empty())
    return celab::make_coarse_map(celab::read_matrix_csv(w_file));
  if (spec.W) return *spec.W;
  throw celab::ParseError(
      "no coarse map: pass --w FILE or embed \"W\" in the spec");
}

void emit(const json& j) { std::cout << j.dump(2) << "\n"; }

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    throw celab::IoError("cannot create " + dir.string() + ": " +
                         ec.message());
}

std::vector<std::uint64_t> parse_seed_list(const std::vector<std::uint64_t>& v,
                                           std::uint64_t fallback) {
  return v.empty() ? std::vector<std::uint64_t>{fallback} : v;
}

int run(int argc, char** argv) {
  CLI::App app{
      "celab: effective information and causal emergence for linear "
      "Gaussian iteration systems"};
  app.set_version_flag("--version", "celab 0.1.0");
  app.require_subcommand(1);

  // ---- ei
  auto* ei_cmd = app.add_subcommand(
      "ei", "Effective information of the micro dynamics");
  std::string ei_spec;
  double ei_L = 0.0;
  ei_cmd->add_option("--spec", ei_spec, "system spec JSON")->required();
  auto* ei_L_opt = ei_cmd->add_option("--L", ei_L, "intervention box width");
  ei_cmd->callback([&] {
    celab::SystemSpec spec = load_spec(ei_spec);
    double L = ei_L_opt->count() ? ei_L
                                 : spec.L.value_or(celab::default_box_width);
    emit(celab::ei_breakdown_to_json(celab::ei_gaussian(spec.system, L)));
  });

  // ---- emergence
  auto* em_cmd = app.add_subcommand(
      "emergence", "Causal emergence of a coarse map, or the optimum at k");
  std::string em_spec, em_w, em_out = ".";
  int em_k = 0;
  double em_eta = 0.0;
  em_cmd->add_option("--spec", em_spec, "system spec JSON")->required();
  em_cmd->add_option("--w", em_w, "coarse map CSV (rows of W)");
  auto* em_k_opt = em_cmd->add_option("--k", em_k, "macro dimension");
  auto* em_eta_opt =
      em_cmd->add_option("--eta", em_eta, "entropy-gap budget (nats)");
  em_cmd->add_option("--output", em_out, "directory for w_optimal.csv");
  em_cmd->callback([&] {
    celab::SystemSpec spec = load_spec(em_spec);
    if (em_w.empty() == (em_k_opt->count() == 0))
      throw celab::ParseError(
          "pass exactly one of --w FILE or --k INT (with --eta)");
    if (!em_w.empty()) {
      celab::CoarseMap cm =
          celab::make_coarse_map(celab::read_matrix_csv(em_w));
      std::optional<double> eta =
          em_eta_opt->count() ? std::optional<double>(em_eta) : spec.eta;
      emit(celab::emergence_report_to_json(
          celab::delta_j(spec.system, cm, eta)));
      return;
    }
    double eta = em_eta_opt->count() ? em_eta : spec.eta.value_or(0.0);
    celab::OptimalCoarsening opt =
        celab::optimal_w(spec.system, em_k, eta);
    ensure_dir(em_out);
    fs::path w_path = fs::path(em_out) / "w_optimal.csv";
    celab::write_matrix_csv(w_path, opt.W.W);
    json j = celab::emergence_report_to_json(
        celab::delta_j(spec.system, opt.W, eta));
    j["delta_j_star"] = celab::json_num(opt.analytic_bound);
    j["w_optimal"] = w_path.string();
    j["units"]["delta_j_star"] = "nats";
    emit(j);
  });

  // ---- feasibility
  auto* fe_cmd = app.add_subcommand(
      "feasibility", "Whether strictly positive emergence is attainable");
  std::string fe_spec;
  int fe_k = 1;
  double fe_eta = 0.0;
  fe_cmd->add_option("--spec", fe_spec, "system spec JSON")->required();
  fe_cmd->add_option("--k", fe_k, "macro dimension")->required();
  auto* fe_eta_opt =
      fe_cmd->add_option("--eta", fe_eta, "entropy-gap budget (nats)");
  fe_cmd->callback([&] {
    celab::SystemSpec spec = load_spec(fe_spec);
    double eta = fe_eta_opt->count() ? fe_eta : spec.eta.value_or(0.0);
    double bound = celab::delta_j_max(spec.system, fe_k, eta);
    emit(json{{"k", fe_k},
              {"eta", eta},
              {"delta_j_max", celab::json_num(bound)},
              {"feasible", bound > 0.0},
              {"units",
               {{"k", "dimensionless"},
                {"eta", "nats"},
                {"delta_j_max", "nats"}}}});
  });

  // ---- simulate
  auto* si_cmd =
      app.add_subcommand("simulate", "Seeded micro (and macro) trajectories");
  std::string si_spec, si_w, si_out = ".";
  std::vector<double> si_x0;
  int si_steps = 100;
  std::uint64_t si_seed = 0;
  si_cmd->add_option("--spec", si_spec, "system spec JSON")->required();
  si_cmd->add_option("--w", si_w, "coarse map CSV for the macro pair");
  si_cmd->add_option("--x0", si_x0, "initial state (comma separated)")
      ->delimiter(',');
  si_cmd->add_option("--steps", si_steps, "number of steps");
  si_cmd->add_option("--seed", si_seed, "RNG seed");
  si_cmd->add_option("--output", si_out, "output directory");
  si_cmd->callback([&] {
    celab::SystemSpec spec = load_spec(si_spec);
    std::uint64_t seed = si_cmd->count("--seed") ? si_seed
                                                 : spec.seed.value_or(0);
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(spec.system.n);
    if (!si_x0.empty()) {
      if (static_cast<int>(si_x0.size()) != spec.system.n)
        throw celab::ParseError("--x0 must have n entries");
      for (int i = 0; i < spec.system.n; ++i) x0(i) = si_x0[i];
    }
    ensure_dir(si_out);
    json files = json::array();
    celab::Trajectory micro =
        celab::simulate_micro(spec.system, x0, si_steps, seed);
    fs::path micro_path = fs::path(si_out) / "trajectory_micro.csv";
    celab::write_trajectory_csv(micro_path, micro);
    files.push_back(micro_path.string());
    if (!si_w.empty() || spec.W) {
      celab::CoarseMap cm = resolve_w(spec, si_w);
      auto [y, y_hat] =
          celab::macro_pair(spec.system, cm, x0, si_steps, seed);
      fs::path y_path = fs::path(si_out) / "trajectory_macro.csv";
      std::ostringstream header;
      header << "t";
      for (int j = 1; j <= cm.k; ++j) header << ",y" << j;
      for (int j = 1; j <= cm.k; ++j) header << ",yhat" << j;
      std::vector<std::vector<double>> rows(
          static_cast<std::size_t>(y.states.rows()));
      for (Eigen::Index r = 0; r < y.states.rows(); ++r) {
        auto& row = rows[static_cast<std::size_t>(r)];
        row.push_back(static_cast<double>(r));
        row.insert(row.end(), y.states.row(r).begin(),
                   y.states.row(r).end());
        row.insert(row.end(), y_hat.states.row(r).begin(),
                   y_hat.states.row(r).end());
      }
      celab::write_csv(y_path, header.str(), rows);
      files.push_back(y_path.string());
    }
    emit(json{{"files", files},
              {"steps", si_steps},
              {"seed", seed},
              {"units", {{"steps", "dimensionless"}}}});
  });

  // ---- validate-mi
  auto* mi_cmd = app.add_subcommand(
      "validate-mi",
      "Monte Carlo delta-I against the analytic delta-J");
  std::string mi_spec, mi_w, mi_out = ".";
  int mi_samples = 10000, mi_kn = 4;
  double mi_L = celab::default_box_width;
  std::uint64_t mi_seed = 0;
  std::vector<int> mi_grid;
  std::vector<std::uint64_t> mi_seeds;
  mi_cmd->add_option("--spec", mi_spec, "system spec JSON")->required();
  mi_cmd->add_option("--w", mi_w, "coarse map CSV");
  mi_cmd->add_option("--samples", mi_samples, "sample count");
  mi_cmd->add_option("--k-neighbors", mi_kn, "k-NN estimator neighbors");
  auto* mi_L_opt =
      mi_cmd->add_option("--L", mi_L, "intervention box width");
  mi_cmd->add_option("--seed", mi_seed, "RNG seed");
  mi_cmd->add_option("--grid", mi_grid,
                     "sample-count grid for a convergence sweep")
      ->delimiter(',');
  mi_cmd->add_option("--seeds", mi_seeds,
                     "seed list for the convergence sweep")
      ->delimiter(',');
  mi_cmd->add_option("--output", mi_out, "output directory for sweep CSV");
  mi_cmd->callback([&] {
    celab::SystemSpec spec = load_spec(mi_spec);
    celab::CoarseMap cm = resolve_w(spec, mi_w);
    double L = mi_L_opt->count()
                   ? mi_L
                   : spec.L.value_or(celab::default_box_width);
    std::uint64_t seed = mi_cmd->count("--seed") ? mi_seed
                                                 : spec.seed.value_or(0);
    if (!mi_grid.empty()) {
      auto rows = celab::convergence_sweep(
          spec.system, cm, mi_grid, L, parse_seed_list(mi_seeds, seed),
          mi_kn);
      ensure_dir(mi_out);
      fs::path csv = fs::path(mi_out) / "mi_convergence.csv";
      celab::write_convergence_csv(csv, rows);
      json table = json::array();
      for (const auto& r : rows)
        table.push_back(json{{"n_samples", r.n_samples},
                             {"delta_i_mean", celab::json_num(r.delta_i_mean)},
                             {"delta_i_std", celab::json_num(r.delta_i_std)},
                             {"delta_j", celab::json_num(r.delta_j)}});
      emit(json{{"rows", table},
                {"csv", csv.string()},
                {"units",
                 {{"delta_i_mean", "nats"},
                  {"delta_i_std", "nats"},
                  {"delta_j", "nats"}}}});
      return;
    }
    double di = celab::delta_i(spec.system, cm, mi_samples, L, mi_kn, seed);
    double dj = celab::delta_j(spec.system, cm).delta_j;
    emit(json{{"delta_i", celab::json_num(di)},
              {"delta_j", celab::json_num(dj)},
              {"n_samples", mi_samples},
              {"k_neighbors", mi_kn},
              {"L", L},
              {"seed", seed},
              {"units",
               {{"delta_i", "nats"},
                {"delta_j", "nats"},
                {"L", "state units"}}}});
  });

  // ---- case
  auto* ca_cmd =
      app.add_subcommand("case", "Run a canonical case study end to end");
  std::string ca_name, ca_out = ".";
  int ca_scenario = 1, ca_steps = 100;
  std::optional<int> ca_k;
  std::uint64_t ca_seed = 0;
  ca_cmd->add_option("name", ca_name, "random-walk | heat | spiral")
      ->required()
      ->check(CLI::IsMember({"random-walk", "heat", "spiral"}));
  ca_cmd->add_option("--scenario", ca_scenario, "spiral scenario (1 or 2)");
  int ca_k_raw = 0;
  double ca_eta = 0.0;
  auto* ca_k_opt = ca_cmd->add_option("--k", ca_k_raw, "macro dimension");
  auto* ca_eta_opt = ca_cmd->add_option(
      "--eta", ca_eta, "entropy-gap budget (nats), overrides the case default");
  ca_cmd->add_option("--steps", ca_steps, "trajectory length");
  ca_cmd->add_option("--seed", ca_seed, "RNG seed");
  ca_cmd->add_option("--output", ca_out, "output directory");
  ca_cmd->callback([&] {
    celab::CaseConfig cfg;
    if (ca_name == "random-walk")
      cfg = celab::build_random_walk();
    else if (ca_name == "heat")
      cfg = celab::build_heat();
    else
      cfg = celab::build_spiral_scenario(ca_scenario);
    if (ca_eta_opt->count()) cfg.eta = ca_eta;
    if (ca_k_opt->count()) ca_k = ca_k_raw;
    celab::EmergenceReport rep =
        celab::run_case(cfg, ca_k, ca_steps, ca_seed, ca_out);
    json j = celab::emergence_report_to_json(rep);
    j["case"] = cfg.name;
    j["output_dir"] = ca_out;
    emit(j);
  });

  // ---- sweep
  auto* sw_cmd = app.add_subcommand(
      "sweep", "delta_j_max across k, or across theta for the spiral");
  std::string sw_spec, sw_case, sw_out = ".";
  int sw_scenario = 1;
  double sw_eta = 0.0;
  bool sw_theta = false;
  sw_cmd->add_option("--spec", sw_spec, "system spec JSON (k sweep)");
  sw_cmd->add_option("--case", sw_case, "spiral (theta sweep)")
      ->check(CLI::IsMember({"spiral"}));
  sw_cmd->add_option("--scenario", sw_scenario, "spiral scenario");
  auto* sw_eta_opt =
      sw_cmd->add_option("--eta", sw_eta, "entropy-gap budget (nats)");
  sw_cmd->add_flag("--theta", sw_theta, "sweep rotation angle");
  sw_cmd->add_option("--output", sw_out, "output directory");
  sw_cmd->callback([&] {
    ensure_dir(sw_out);
    if (sw_theta || !sw_case.empty()) {
      celab::CaseConfig cfg = celab::build_spiral_scenario(sw_scenario);
      double eta = sw_eta_opt->count() ? sw_eta : cfg.eta;
      std::vector<std::vector<double>> rows;
      for (int i = 0; i < 64; ++i) {
        double theta = 2.0 * M_PI * i / 64.0;
        celab::CaseConfig swept =
            celab::build_spiral(*cfg.u0, theta, *cfg.psi, *cfg.sigma);
        try {
          rows.push_back({theta, celab::delta_j_max(swept.system, 1, eta)});
        } catch (const celab::ConjugatePairSplit&) {
        }
      }
      fs::path csv = fs::path(sw_out) / "sweep_theta.csv";
      celab::write_csv(csv, "theta,delta_j_star", rows);
      emit(json{{"csv", csv.string()},
                {"points", rows.size()},
                {"units", {{"theta", "radians"}}}});
      return;
    }
    if (sw_spec.empty())
      throw celab::ParseError("pass --spec FILE (k sweep) or --case spiral");
    celab::SystemSpec spec = load_spec(sw_spec);
    double eta = sw_eta_opt->count() ? sw_eta : spec.eta.value_or(0.0);
    std::vector<std::vector<double>> rows;
    for (int kk = 1; kk <= spec.system.n; ++kk) {
      try {
        rows.push_back(
            {static_cast<double>(kk),
             celab::delta_j_max(spec.system, kk, eta),
             celab::delta_j_orthogonal_bound(spec.system, kk)});
      } catch (const celab::ConjugatePairSplit&) {
      }
    }
    fs::path csv = fs::path(sw_out) / "sweep_k.csv";
    celab::write_csv(csv, "k,delta_j_star,delta_j_orthonormal", rows);
    emit(json{{"csv", csv.string()},
              {"points", rows.size()},
              {"units", {{"k", "dimensionless"}}}});
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const celab::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const celab::MathDomainError& e) {
    std::cerr << "math domain error: " << e.what() << "\n";
    return 3;
  } catch (const celab::StructuralError& e) {
    std::cerr << "structural error: " << e.what() << "\n";
    return 4;
  } catch (const celab::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 5;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
