#include <cstdio>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dhn/io.hpp"
#include "dhn/newton.hpp"
#include "dhn/optimizer.hpp"
#include "dhn/report.hpp"

namespace {

using namespace dhn;

std::vector<double> parse_schedule(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    size_t pos = 0;
    double v = std::stod(item, &pos);
    if (pos != item.size())
      throw ValidationError("bad steepness entry '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ValidationError("empty steepness schedule");
  return out;
}

std::string out_path(const std::string& dir, const char* name) {
  std::filesystem::create_directories(dir);
  return (std::filesystem::path(dir) / name).string();
}

int run_simulate(const Problem& p, const DesignPoint& d,
                 const std::string& outdir) {
  Assembler assembler(p, FlowModel::Reduced);
  SimulateResult sim =
      simulate(assembler, d.diameters, d.diameters, d.alpha, d.gamma);
  if (!sim.converged) {
    std::fprintf(stderr, "error: flow solve did not converge (%s)\n",
                 sim.reason.c_str());
    return 1;
  }
  EnergyReport er = energy_report(p, sim.x);
  CostBreakdown costs = CostModel(p).evaluate(sim.x, d.diameters);
  std::printf("newton iterations: %d (residual %.3e)\n", sim.iterations,
              sim.residual_norm);
  std::printf("continuity imbalance: %.3e m3/s\n",
              max_continuity_imbalance(p, sim.x));
  std::printf("production: %.6e W\n", er.production);
  std::printf("delivery:   %.6e W\n", er.delivery);
  std::printf("pipe loss:  %.6e W\n", er.pipe_loss);
  std::printf("energy closure: %.3e (relative %.3e)\n", er.closure(),
              er.relative_closure());
  std::printf("objective: %.6e  npv: %.6e\n", costs.total, costs.npv);
  write_text_file(out_path(outdir, "edges.csv"), edges_csv(p, d, sim.x));
  write_text_file(out_path(outdir, "consumers.csv"),
                  consumers_csv(p, d, sim.x));
  write_text_file(out_path(outdir, "producers.csv"),
                  producers_csv(p, d, sim.x));
  write_text_file(out_path(outdir, "breakdown.csv"), breakdown_csv(p, costs));
  return 0;
}

int run_optimize(const Problem& p, const DesignPoint& start,
                 const OptimizeOptions& opt, const std::string& outdir) {
  OptimizeResult res = optimize(p, start, opt);
  if (res.status == RunStatus::Failed) {
    std::fprintf(stderr, "error: %s\n", res.message.c_str());
    return 1;
  }
  write_run_reports(outdir, p, res);
  std::fputs(summary_text(p, res).c_str(), stdout);
  return res.status == RunStatus::Converged ? 0 : 2;
}

int run_round(const Problem& p, const DesignPoint& d, bool verbose,
              const std::string& outdir) {
  DesignPoint snapped = snap_to_catalog(p, d);
  DesignPoint rounded = round_up_design(p, d);
  RepairResult rs = repair_operation(p, snapped, verbose);
  RepairResult rr = repair_operation(p, rounded, verbose);
  std::printf("snapped:  npv %.6e  %s\n", rs.npv,
              rs.feasible ? "feasible" : "infeasible");
  std::printf("rounded:  npv %.6e  %s\n", rr.npv,
              rr.feasible ? "feasible" : "infeasible");
  write_text_file(out_path(outdir, "design_snapped.json"),
                  serialize_design(p, rs.design));
  write_text_file(out_path(outdir, "design_rounded.json"),
                  serialize_design(p, rr.design));
  write_text_file(out_path(outdir, "breakdown_snapped.csv"),
                  breakdown_csv(p, rs.costs));
  write_text_file(out_path(outdir, "breakdown_rounded.csv"),
                  breakdown_csv(p, rr.costs));
  return rs.feasible && rr.feasible ? 0 : 2;
}

int run_compare(const Problem& p,
                const std::vector<std::string>& catalog_args,
                const OptimizeOptions& opt, const std::string& outdir) {
  std::vector<std::pair<std::string, PipeCatalog>> catalogs;
  if (catalog_args.empty()) {
    catalogs.emplace_back("catalog", p.catalog);
  } else {
    for (const std::string& arg : catalog_args) {
      auto eq = arg.find('=');
      if (eq == std::string::npos || eq == 0)
        throw ValidationError("catalog argument '" + arg +
                              "' must look like name=path");
      catalogs.emplace_back(
          arg.substr(0, eq),
          parse_catalog_text(read_text_file(arg.substr(eq + 1))));
    }
  }
  std::vector<CatalogOutcome> outcomes;
  bool all_feasible = true;
  for (auto& [name, cat] : catalogs) {
    CatalogOutcome out = compare_on_catalog(p, name, cat, opt);
    std::printf("%s: penalized %.6e  rounded %.6e  advantage %.6e\n",
                name.c_str(), out.penalized.npv, out.rounded.npv,
                out.advantage());
    all_feasible =
        all_feasible && out.penalized.feasible && out.rounded.feasible;
    outcomes.push_back(std::move(out));
  }
  write_text_file(out_path(outdir, "comparison.csv"),
                  comparison_csv(p, outcomes));
  return all_feasible ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"economic design of district heating networks"};
  std::string mode, input, outdir = "out", design_path, xi_schedule;
  std::vector<std::string> sets, catalog_args;
  unsigned long long seed = 1;
  int samples = 0;
  double tol = 1e-5;
  bool verbose = false;

  app.add_option("mode", mode,
                 "simulate | optimize | round | compare | curves | "
                 "check-gradients")
      ->required()
      ->check(CLI::IsMember({"simulate", "optimize", "round", "compare",
                             "curves", "check-gradients"}));
  app.add_option("-i,--input", input, "network document (JSON)")->required();
  app.add_option("-o,--out", outdir, "output directory");
  app.add_option("--set", sets,
                 "dotted-path override, path=value (repeatable)");
  app.add_option("--design", design_path, "design file (JSON)");
  app.add_option("--xi-schedule", xi_schedule,
                 "comma-separated steepness schedule");
  app.add_option("--catalog", catalog_args,
                 "name=path of a catalog file to compare (repeatable)");
  app.add_option("--seed", seed, "random seed for diagnostics");
  app.add_option("--samples", samples,
                 "sample count for curves / check-gradients");
  app.add_option("--tol", tol, "gradient check tolerance");
  app.add_flag("-v,--verbose", verbose, "progress to stderr");

  CLI11_PARSE(app, argc, argv);

  try {
    std::string text = dhn::read_text_file(input);
    if (!sets.empty()) text = dhn::apply_patches(text, sets);
    dhn::Problem p = dhn::parse_problem(text);

    dhn::OptimizeOptions opt;
    opt.verbose = verbose;
    if (!xi_schedule.empty()) opt.xi_schedule = parse_schedule(xi_schedule);

    dhn::DesignPoint design = design_path.empty()
                                  ? dhn::initial_design(p)
                                  : dhn::load_design(p, design_path);

    if (mode == "simulate") return run_simulate(p, design, outdir);
    if (mode == "optimize") return run_optimize(p, design, opt, outdir);
    if (mode == "round") {
      if (design_path.empty()) {
        std::fprintf(stderr, "error: round mode needs --design\n");
        return 1;
      }
      return run_round(p, design, verbose, outdir);
    }
    if (mode == "compare") return run_compare(p, catalog_args, opt, outdir);
    if (mode == "curves") {
      int n = samples > 0 ? samples : 200;
      dhn::write_text_file(out_path(outdir, "curves.csv"),
                           dhn::penalization_curves_csv(p, n));
      return 0;
    }
    // check-gradients
    int n = samples > 0 ? samples : 5;
    std::vector<double> xis = xi_schedule.empty()
                                  ? std::vector<double>{0.0, 2.0}
                                  : parse_schedule(xi_schedule);
    auto rows = dhn::check_gradients(p, n, seed, xis);
    dhn::write_text_file(out_path(outdir, "gradient_check.csv"),
                         dhn::gradient_check_csv(p, rows));
    double worst = 0.0;
    for (const auto& r : rows) worst = std::max(worst, r.rel_error);
    std::printf("max relative gradient error: %.3e over %d samples\n", worst,
                n);
    return worst <= tol ? 0 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
