// Copyright (c) 2026 the vvspec authors
// SPDX-License-Identifier: Apache-2.0
//
// Batch front-end.  Subcommands: lyapunov | spectrum | branch | riesz |
// packet | report.  JSON config in, CSV + JSON manifests out.  Exit codes:
// 0 success, 2 configuration error, 3 numerical failure, 4 theorem
// hypothesis not satisfied (empty unstable spectrum; a legitimate outcome).
#include <filesystem>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "vvspec/cocycle.hpp"
#include "vvspec/flows.hpp"
#include "vvspec/galerkin.hpp"
#include "vvspec/io.hpp"
#include "vvspec/lattice.hpp"
#include "vvspec/semigroup.hpp"
#include "vvspec/spectra.hpp"
#include "vvspec/types.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace vvspec;

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed,
                const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key())) {
      throw ConfigError("unknown key \"" + item.key() + "\" in " + where);
    }
  }
}

// Flags shared by every subcommand; overrides win over config values.
struct CommonArgs {
  std::string config_path;
  std::string out_override;
  long long seed_override = -1;
  int threads = 0;
};

json load_config(const CommonArgs& args,
                 const std::set<std::string>& allowed) {
  if (args.config_path.empty()) throw ConfigError("--config is required");
  json cfg = read_json(args.config_path);
  check_keys(cfg, allowed, "config");
  if (args.seed_override >= 0) cfg["seed"] = args.seed_override;
  if (!args.out_override.empty()) cfg["out_dir"] = args.out_override;
  return cfg;
}

std::string out_dir_of(const json& cfg) {
  const std::string dir = cfg.value("out_dir", ".");
  fs::create_directories(dir);
  return dir;
}

double require_number(const json& cfg, const std::string& key) {
  if (!cfg.contains(key) || !cfg.at(key).is_number()) {
    throw ConfigError("config key \"" + key + "\" must be a number");
  }
  return cfg.at(key).get<double>();
}

std::vector<double> number_list(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) {
    throw ConfigError(where + " must be a nonempty array of numbers");
  }
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) throw ConfigError(where + " must hold numbers only");
    out.push_back(v.get<double>());
  }
  return out;
}

LyapunovParams lyapunov_params(const json& cfg) {
  LyapunovParams p;
  p.samples = cfg.value("samples", 64);
  p.horizon = cfg.value("horizon", 200.0);
  p.renorm_dt = cfg.value("renorm_dt", 1.0);
  p.weight_m = cfg.value("weight_m", 0);
  p.ode_tol = cfg.value("ode_tol", 1e-10);
  p.seed = cfg.value("seed", std::uint64_t{1});
  if (p.samples < 1 || p.horizon <= 0.0 || p.renorm_dt <= 0.0) {
    throw ConfigError("samples, horizon, renorm_dt must be positive");
  }
  return p;
}

int cmd_lyapunov(const CommonArgs& args) {
  const json cfg = load_config(
      args, {"flow", "out_dir", "seed", "samples", "horizon", "renorm_dt",
             "weight_m", "ode_tol"});
  const SteadyFlow flow = flow_from_json(cfg.at("flow"));
  const LyapunovParams params = lyapunov_params(cfg);
  const LyapunovEstimate est = lyapunov_exponent(flow, params);

  const std::string dir = out_dir_of(cfg);
  std::vector<std::string> header = {"sample", "rate"};
  for (int a = 0; a < flow.dim(); ++a) header.push_back("x0_" + std::to_string(a + 1));
  for (int a = 0; a < flow.dim(); ++a) header.push_back("xi0_" + std::to_string(a + 1));
  std::vector<std::vector<std::string>> rows;
  for (size_t i = 0; i < est.per_sample.size(); ++i) {
    const auto& s = est.per_sample[i];
    std::vector<std::string> row = {std::to_string(i), fmt_g17(s.rate)};
    for (int a = 0; a < flow.dim(); ++a) row.push_back(fmt_g17(s.x0[a]));
    for (int a = 0; a < flow.dim(); ++a) row.push_back(fmt_g17(s.xi0[a]));
    rows.push_back(std::move(row));
  }
  write_csv(dir + "/lyapunov_samples.csv", header, rows);

  json m = make_manifest("lyapunov", cfg, {"lyapunov_samples.csv"});
  m["flow"] = flow.name();
  m["mu"] = est.mu;
  m["confidence_halfwidth"] = est.confidence_halfwidth;
  m["samples"] = est.samples;
  m["horizon"] = est.horizon;
  m["weight_m"] = est.weight_m;
  write_json(dir + "/lyapunov.json", m);
  return 0;
}

int cmd_spectrum(const CommonArgs& args) {
  const json cfg = load_config(
      args, {"flow", "out_dir", "seed", "cutoff", "eps", "form",
             "save_operator"});
  const SteadyFlow flow = flow_from_json(cfg.at("flow"));
  const int cutoff = static_cast<int>(require_number(cfg, "cutoff"));
  const double eps = cfg.value("eps", 0.0);
  const std::string form = cfg.value("form", "velocity");
  auto ms = std::make_shared<const ModeSet>(flow.dim(), cutoff);
  GalerkinOperator op;
  if (form == "velocity") {
    op = assemble(flow, ms, eps);
  } else if (form == "vorticity") {
    op = assemble_vorticity_2d(flow, ms, eps);
  } else {
    throw ConfigError("form must be \"velocity\" or \"vorticity\"");
  }
  const SpectrumResult spec = eigen_decompose(op);

  const std::string dir = out_dir_of(cfg);
  std::vector<std::string> outputs = {"spectrum.csv"};
  std::vector<std::vector<std::string>> rows;
  for (int i = 0; i < spec.eigenvalues.size(); ++i) {
    rows.push_back({std::to_string(i), fmt_g17(spec.eigenvalues[i].real()),
                    fmt_g17(spec.eigenvalues[i].imag()),
                    fmt_g17(spec.residuals[i])});
  }
  write_csv(dir + "/spectrum.csv", {"index", "re", "im", "residual"}, rows);
  if (cfg.value("save_operator", false)) {
    save_operator(dir + "/operator.vvop", op);
    outputs.push_back("operator.vvop");
  }

  json m = make_manifest("spectrum", cfg, outputs);
  m["flow"] = flow.name();
  m["cutoff"] = cutoff;
  m["eps"] = eps;
  m["form"] = form;
  m["dimension"] = op.dimension();
  m["rightmost_re"] = spec.eigenvalues[0].real();
  m["rightmost_im"] = spec.eigenvalues[0].imag();
  int above = 0;
  for (int i = 0; i < spec.eigenvalues.size(); ++i) {
    if (spec.eigenvalues[i].real() > 0.0) ++above;
  }
  m["count_re_positive"] = above;
  write_json(dir + "/spectrum.json", m);
  return 0;
}

int cmd_riesz(const CommonArgs& args) {
  const json cfg = load_config(
      args, {"flow", "out_dir", "seed", "cutoff", "eps", "contour"});
  const SteadyFlow flow = flow_from_json(cfg.at("flow"));
  const int cutoff = static_cast<int>(require_number(cfg, "cutoff"));
  const double eps = cfg.value("eps", 0.0);
  if (!cfg.contains("contour")) throw ConfigError("riesz needs a contour");
  const json& cj = cfg.at("contour");
  check_keys(cj, {"center", "radius", "nodes"}, "contour");
  const auto cvec = number_list(cj.at("center"), "contour.center");
  if (cvec.size() != 2) throw ConfigError("contour.center must be [re, im]");
  const cx center(cvec[0], cvec[1]);
  const double radius = require_number(cj, "radius");
  const int nodes = cj.value("nodes", 64);

  auto ms = std::make_shared<const ModeSet>(flow.dim(), cutoff);
  const GalerkinOperator op = assemble(flow, ms, eps);
  const RieszProjection proj = riesz_projection(op, center, radius, nodes);
  const SpectrumResult spec = eigen_decompose(op);

  const std::string dir = out_dir_of(cfg);
  json m = make_manifest("riesz", cfg, {});
  m["flow"] = flow.name();
  m["cutoff"] = cutoff;
  m["eps"] = eps;
  m["center"] = {center.real(), center.imag()};
  m["radius"] = radius;
  m["nodes"] = nodes;
  m["trace"] = {proj.trace.real(), proj.trace.imag()};
  m["multiplicity"] = multiplicity(proj);
  m["idempotency_defect"] = proj.idempotency_defect;
  json inside = json::array();
  for (int i = 0; i < spec.eigenvalues.size(); ++i) {
    if (std::abs(spec.eigenvalues[i] - center) < radius) {
      inside.push_back({spec.eigenvalues[i].real(), spec.eigenvalues[i].imag()});
    }
  }
  m["inside"] = inside;
  write_json(dir + "/riesz.json", m);
  return 0;
}

int cmd_branch(const CommonArgs& args) {
  const json cfg = load_config(
      args, {"flow", "out_dir", "seed", "cutoff", "eps_grid", "delta_margin",
             "contour", "lambda0", "mu_hat", "samples", "horizon", "renorm_dt",
             "weight_m", "ode_tol"});
  const SteadyFlow flow = flow_from_json(cfg.at("flow"));
  const int cutoff = static_cast<int>(require_number(cfg, "cutoff"));
  std::vector<double> eps_grid =
      number_list(cfg.at("eps_grid"), "eps_grid");
  const double delta_margin = cfg.value("delta_margin", 0.05);

  // Filtering threshold: measured growth rate unless pinned in the config.
  double mu_hat;
  std::string mu_source;
  if (cfg.contains("mu_hat")) {
    mu_hat = require_number(cfg, "mu_hat");
    mu_source = "config";
  } else {
    mu_hat = lyapunov_exponent(flow, lyapunov_params(cfg)).mu;
    mu_source = "estimated";
  }

  auto ms = std::make_shared<const ModeSet>(flow.dim(), cutoff);
  const GalerkinOperator op0 = assemble(flow, ms, 0.0);
  const SpectrumResult spec0 = eigen_decompose(op0);
  const std::vector<int> unstable = unstable_set(spec0, mu_hat, delta_margin);
  if (unstable.empty()) {
    std::cerr << "no spectrum above mu_hat + delta = "
              << mu_hat + delta_margin
              << "; the perturbation hypothesis is empty\n";
    return 4;
  }

  cx lambda0;
  if (cfg.contains("lambda0")) {
    const auto l = number_list(cfg.at("lambda0"), "lambda0");
    if (l.size() != 2) throw ConfigError("lambda0 must be [re, im]");
    lambda0 = cx(l[0], l[1]);
  } else {
    // Rightmost unstable eigenvalue; ties broken toward the real axis.
    lambda0 = spec0.eigenvalues[unstable[0]];
    for (int i : unstable) {
      const cx cand = spec0.eigenvalues[i];
      if (cand.real() > lambda0.real() + 1e-12 ||
          (std::abs(cand.real() - lambda0.real()) <= 1e-12 &&
           std::abs(cand.imag()) < std::abs(lambda0.imag()))) {
        lambda0 = cand;
      }
    }
  }

  double radius = 0.0;
  int nodes = 64;
  if (cfg.contains("contour")) {
    const json& cj = cfg.at("contour");
    check_keys(cj, {"radius", "nodes"}, "contour");  // center is lambda0
    if (cj.contains("radius")) radius = require_number(cj, "radius");
    nodes = cj.value("nodes", 64);
  }
  if (radius <= 0.0) radius = isolation_radius(spec0, lambda0);

  const BranchCurve curve =
      continue_in_viscosity(flow, ms, lambda0, radius, eps_grid, nodes);

  const std::string dir = out_dir_of(cfg);
  std::vector<std::vector<std::string>> rows;
  json points = json::array();
  for (const auto& p : curve.points) {
    std::vector<std::string> row = {fmt_g17(p.eps),
                                    p.excluded ? "1" : "0",
                                    std::to_string(p.inside.size())};
    json pj = {{"eps", p.eps},
               {"excluded", p.excluded},
               {"inside_count", p.inside.size()}};
    if (!p.excluded && p.has_lambda) {
      row.push_back(fmt_g17(p.lambda.real()));
      row.push_back(fmt_g17(p.lambda.imag()));
      row.push_back(std::to_string(p.mult));
      row.push_back(fmt_g17(p.proj_dist));
      pj["lambda"] = {p.lambda.real(), p.lambda.imag()};
      pj["multiplicity"] = p.mult;
      pj["proj_dist"] = p.proj_dist;
    } else {
      row.insert(row.end(), {"", "", "", ""});
    }
    rows.push_back(std::move(row));
    points.push_back(std::move(pj));
  }
  write_csv(dir + "/branch.csv",
            {"eps", "excluded", "inside_count", "lambda_re", "lambda_im",
             "multiplicity", "proj_dist"},
            rows);

  json m = make_manifest("branch", cfg, {"branch.csv"});
  m["flow"] = flow.name();
  m["cutoff"] = cutoff;
  m["lambda0"] = {curve.lambda0.real(), curve.lambda0.imag()};
  m["radius"] = curve.radius;
  m["nodes"] = curve.nodes;
  m["mu_hat"] = mu_hat;
  m["mu_hat_source"] = mu_source;
  m["delta_margin"] = delta_margin;
  m["points"] = points;
  write_json(dir + "/branch.json", m);
  return 0;
}

int cmd_packet(const CommonArgs& args) {
  const json cfg = load_config(args, {"flow", "out_dir", "seed", "packet",
                                      "ode_tol"});
  const SteadyFlow flow = flow_from_json(cfg.at("flow"));
  if (!cfg.contains("packet")) throw ConfigError("packet section is required");
  const json& pj = cfg.at("packet");
  check_keys(pj, {"deltas", "eps", "t", "xi0"}, "packet");
  const std::vector<double> deltas = number_list(pj.at("deltas"), "packet.deltas");
  const std::vector<double> eps_list = number_list(pj.at("eps"), "packet.eps");
  const double t = require_number(pj, "t");
  const auto xi_vec = number_list(pj.at("xi0"), "packet.xi0");
  if (static_cast<int>(xi_vec.size()) != flow.dim()) {
    throw ConfigError("packet.xi0 length must match the flow dimension");
  }
  VectorXd xi0(flow.dim());
  for (int a = 0; a < flow.dim(); ++a) xi0[a] = xi_vec[a];
  const double ode_tol = cfg.value("ode_tol", 1e-8);

  const std::vector<PacketSweepRow> sweep =
      packet_sweep(flow, t, deltas, eps_list, xi0, ode_tol);

  const std::string dir = out_dir_of(cfg);
  std::vector<std::vector<std::string>> rows;
  json rows_j = json::array();
  for (const auto& r : sweep) {
    rows.push_back({fmt_g17(r.delta), fmt_g17(r.eps), fmt_g17(r.r_asym),
                    fmt_g17(r.r_decomp)});
    rows_j.push_back({{"delta", r.delta},
                      {"eps", r.eps},
                      {"r_asym", r.r_asym},
                      {"r_decomp", r.r_decomp}});
  }
  write_csv(dir + "/packet.csv", {"delta", "eps", "r_asym", "r_decomp"}, rows);

  json m = make_manifest("packet", cfg, {"packet.csv"});
  m["flow"] = flow.name();
  m["t"] = t;
  m["xi0"] = xi_vec;
  m["rows"] = rows_j;
  if (sweep.size() >= 3) {
    const DecompFit fit = fit_decomp_model(sweep);
    m["fit"] = {{"c_delta", fit.c_delta},
                {"c_sqrteps", fit.c_sqrteps},
                {"r_squared", fit.r_squared}};
  } else {
    m["fit"] = nullptr;
  }
  write_json(dir + "/packet.json", m);
  return 0;
}

int cmd_report(const CommonArgs& args) {
  std::string dir = args.out_override;
  if (dir.empty() && !args.config_path.empty()) {
    // Alternate spelling: a config whose out_dir names the run directory.
    const json cfg = read_json(args.config_path);
    dir = cfg.value("out_dir", "");
  }
  if (dir.empty()) throw ConfigError("report needs --out <run directory>");
  if (!fs::is_directory(dir)) {
    throw ConfigError("not a directory: " + dir);
  }

  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".json" &&
        entry.path().filename() != "report.json") {
      names.push_back(entry.path().filename().string());
    }
  }
  std::sort(names.begin(), names.end());

  json sections = json::object();
  std::vector<std::string> bad;
  for (const auto& name : names) {
    json m;
    try {
      m = read_json(dir + "/" + name);
    } catch (const ConfigError&) {
      bad.push_back(name);
      continue;
    }
    if (!m.is_object() || !m.contains("command") || !m.contains("config_hash")) {
      bad.push_back(name);
      continue;
    }
    const std::string cmd = m.at("command").get<std::string>();
    if (!sections.contains(cmd)) sections[cmd] = json::array();
    m["manifest_file"] = name;
    sections[cmd].push_back(m);
  }
  if (!bad.empty()) {
    std::cerr << "corrupt or non-manifest JSON files:";
    for (const auto& b : bad) std::cerr << ' ' << b;
    std::cerr << '\n';
    return 2;
  }
  if (sections.empty()) {
    std::cerr << "no run manifests found in " << dir << '\n';
    return 2;
  }

  std::vector<std::string> outputs;
  json warnings = json::array();

  // mu_hat used for branch filtering must agree with the measured exponent.
  if (sections.contains("branch") && sections.contains("lyapunov")) {
    for (const auto& b : sections["branch"]) {
      for (const auto& l : sections["lyapunov"]) {
        if (b.value("flow", "") != l.value("flow", "?")) continue;
        const double used = b.value("mu_hat", 0.0);
        const double measured = l.value("mu", 0.0);
        if (std::abs(used - measured) > 1e-9) {
          warnings.push_back(
              "branch " + b.value("manifest_file", "") + " filtered with "
              "mu_hat " + fmt_g17(used) + " but " +
              l.value("manifest_file", "") + " measured " +
              fmt_g17(measured));
        }
      }
    }
  }

  if (sections.contains("branch")) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& b : sections["branch"]) {
      const cx l0(b.at("lambda0")[0].get<double>(),
                  b.at("lambda0")[1].get<double>());
      for (const auto& p : b.at("points")) {
        if (!p.contains("lambda")) continue;
        const cx l(p.at("lambda")[0].get<double>(),
                   p.at("lambda")[1].get<double>());
        rows.push_back({fmt_g17(p.at("eps").get<double>()),
                        fmt_g17(std::abs(l - l0)),
                        fmt_g17(p.at("proj_dist").get<double>()),
                        std::to_string(p.at("multiplicity").get<int>())});
      }
    }
    write_csv(dir + "/report_branch_convergence.csv",
              {"eps", "lambda_err", "proj_dist", "multiplicity"}, rows);
    outputs.push_back("report_branch_convergence.csv");
  }
  if (sections.contains("packet")) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& pm : sections["packet"]) {
      for (const auto& r : pm.at("rows")) {
        rows.push_back({fmt_g17(r.at("delta").get<double>()),
                        fmt_g17(r.at("eps").get<double>()),
                        fmt_g17(r.at("r_asym").get<double>()),
                        fmt_g17(r.at("r_decomp").get<double>())});
      }
    }
    write_csv(dir + "/report_packet_scaling.csv",
              {"delta", "eps", "r_asym", "r_decomp"}, rows);
    outputs.push_back("report_packet_scaling.csv");
  }
  if (sections.contains("spectrum")) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& sm : sections["spectrum"]) {
      rows.push_back({std::to_string(sm.value("cutoff", 0)),
                      fmt_g17(sm.value("eps", 0.0)),
                      fmt_g17(sm.value("rightmost_re", 0.0)),
                      fmt_g17(sm.value("rightmost_im", 0.0)),
                      std::to_string(sm.value("count_re_positive", 0))});
    }
    write_csv(dir + "/report_nsweep.csv",
              {"cutoff", "eps", "rightmost_re", "rightmost_im",
               "count_re_positive"},
              rows);
    outputs.push_back("report_nsweep.csv");
  }

  json rep = make_manifest("report", json::object(), outputs);
  rep["sections"] = sections;
  rep["warnings"] = warnings;
  write_json(dir + "/report.json", rep);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spectral toolkit for advective operators in the "
               "vanishing-viscosity limit"};
  app.require_subcommand(1);

  CommonArgs args;
  const std::vector<std::pair<std::string, std::string>> cmds = {
      {"lyapunov", "estimate the cocycle growth exponent"},
      {"spectrum", "assemble an operator and write its spectrum"},
      {"branch", "continue an eigenvalue branch across the viscosity grid"},
      {"riesz", "contour projection around a prescribed circle"},
      {"packet", "wave-packet residual sweep"},
      {"report", "merge run manifests into plot-ready tables"},
  };
  for (const auto& [name, desc] : cmds) {
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->add_option("--config", args.config_path, "JSON config path");
    sub->add_option("--out", args.out_override, "output directory override");
    sub->add_option("--seed", args.seed_override, "seed override");
    sub->add_option("--threads", args.threads, "dense kernel thread cap");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (args.threads > 0) Eigen::setNbThreads(args.threads);

  try {
    if (app.got_subcommand("lyapunov")) return cmd_lyapunov(args);
    if (app.got_subcommand("spectrum")) return cmd_spectrum(args);
    if (app.got_subcommand("branch")) return cmd_branch(args);
    if (app.got_subcommand("riesz")) return cmd_riesz(args);
    if (app.got_subcommand("packet")) return cmd_packet(args);
    if (app.got_subcommand("report")) return cmd_report(args);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 2;
}
