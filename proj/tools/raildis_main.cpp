#include <iostream>

#include "CLI11.hpp"
#include "rail/io.hpp"

namespace {

using namespace rail;

constexpr int kExitOk = 0;
constexpr int kExitInfeasible = 1;
constexpr int kExitInputError = 2;

int report_load_error(const LoadError& e) {
  for (const auto& d : e.diagnostics) std::cerr << "error: " << d.code << ": " << d.message << "\n";
  return kExitInputError;
}

struct SolveOptionsCli {
  std::string instance_path;
  std::string mode = "linear";
  std::string inner = "linear";
  double threshold = 0.0;
  int max_iter = 20;
  std::uint64_t seed = 0;
  int sweeps = 2000;
  int restarts = 10;
  double p_pair = -1, p_sum = -1, p_qubic = -1;
  int resolution = 0;
  bool structured = false;
};

SolverMode parse_mode(const std::string& name) {
  if (name == "linear") return SolverMode::LinearOracle;
  if (name == "qubo-brute") return SolverMode::QuboBrute;
  if (name == "qubo-anneal") return SolverMode::QuboAnneal;
  throw RailError("bad-mode", "unknown mode " + name);
}

// Rescale all grid times when the user overrides the resolution.
void apply_resolution(DispatchInstance& inst, int resolution) {
  if (resolution <= 0 || resolution == inst.scenario.resolution) return;
  if (resolution % inst.scenario.resolution != 0)
    throw RailError("resolution-invalid",
                    "target resolution must be a multiple of the instance resolution");
  GridTime f = resolution / inst.scenario.resolution;
  auto scale = [&](GridTime& t) { t *= f; };
  for (auto& t : inst.trains) {
    for (auto& [s, v] : t.scheduled_arrival) scale(v);
    for (auto& [s, v] : t.scheduled_departure) scale(v);
  }
  for (auto& [k, v] : inst.timing.pass) scale(v);
  for (auto& [k, v] : inst.timing.blocks) scale(v);
  for (auto& [k, v] : inst.timing.stop) scale(v);
  for (auto& [k, v] : inst.timing.prep) scale(v);
  for (auto& [k, v] : inst.timing.res) scale(v);
  if (inst.timing.res_default) *inst.timing.res_default *= f;
  for (auto& [k, v] : inst.scenario.primary_delay) scale(v);
  for (auto& [k, v] : inst.scenario.d_max) scale(v);
  inst.scenario.resolution = resolution;
}

PenaltyConstants resolve_constants(const DispatchInstance& inst, const SolveOptionsCli& opt) {
  PenaltyConstants c = default_penalty_constants(inst);
  if (opt.p_pair > 0) c.p_pair = opt.p_pair;
  if (opt.p_sum > 0) c.p_sum = opt.p_sum;
  if (opt.p_qubic > 0) c.p_qubic = opt.p_qubic;
  return c;
}

int cmd_validate(const std::string& path) {
  DispatchInstance inst;
  try {
    inst = load_instance(path);
  } catch (const LoadError& e) {
    return report_load_error(e);
  }
  auto diags = validate_instance(inst, inst.default_routing);
  for (const auto& d : diags) std::cerr << "error: " << d.code << ": " << d.message << "\n";
  if (diags.empty()) {
    std::cout << "instance ok: " << inst.trains.size() << " trains, " << inst.stations.size()
              << " stations\n";
    return kExitOk;
  }
  return kExitInputError;
}

int cmd_solve(const SolveOptionsCli& opt) {
  DispatchInstance inst;
  try {
    inst = load_instance(opt.instance_path);
    apply_resolution(inst, opt.resolution);
  } catch (const LoadError& e) {
    return report_load_error(e);
  } catch (const RailError& e) {
    std::cerr << "error: " << e.code << ": " << e.what() << "\n";
    return kExitInputError;
  }
  auto diags = validate_instance(inst, inst.default_routing);
  if (!diags.empty()) {
    for (const auto& d : diags) std::cerr << "error: " << d.code << ": " << d.message << "\n";
    return kExitInputError;
  }

  PenaltyConstants constants = resolve_constants(inst, opt);
  AnnealParams anneal;
  anneal.seed = opt.seed;
  anneal.sweeps = opt.sweeps;
  anneal.restarts = opt.restarts;

  try {
    RunReport rep;
    if (opt.mode == "hybrid") {
      DispatchConfig config;
      config.objective_threshold = opt.threshold;
      config.max_iterations = opt.max_iter;
      config.solver_mode = parse_mode(opt.inner);
      config.anneal = anneal;
      config.constants = constants;
      DispatchResult result = run(inst, config);
      rep = make_report(inst, result.final_routing, "hybrid", result.best_schedule);
      rep.iterations = result.iterations;
      rep.terminated_by = to_string(result.terminated_by);
    } else {
      SolverMode mode = parse_mode(opt.mode);
      RebuildOutput build = rebuild_after_reroute(inst, inst.default_routing, constants,
                                                  mode != SolverMode::LinearOracle);
      Schedule schedule;
      switch (mode) {
        case SolverMode::LinearOracle: {
          SolveStats stats;
          schedule = solve_order_enumeration(build.linear, {}, &stats);
          rep.solver_assignments = stats.assignments_tried;
          break;
        }
        case SolverMode::QuboBrute: {
          SampleSet samples = brute_force_onehot(build.qubo->model, build.qubo->index);
          schedule = decode(samples.best().bits, *build.qubo, inst).schedule;
          if (!schedule.feasible)
            schedule.violations = check_feasibility(schedule, build.linear);
          break;
        }
        case SolverMode::QuboAnneal: {
          SampleSet samples = simulated_annealing(build.qubo->model, anneal);
          schedule = decode(samples.best().bits, *build.qubo, inst).schedule;
          if (!schedule.feasible)
            schedule.violations = check_feasibility(schedule, build.linear);
          break;
        }
      }
      RunReport base = make_report(inst, inst.default_routing, opt.mode, schedule);
      base.solver_assignments = rep.solver_assignments;
      rep = base;
    }
    std::cout << (opt.structured ? render_report_structured(rep) : render_report(rep)) << "\n";
    return rep.schedule.feasible ? kExitOk : kExitInfeasible;
  } catch (const RailError& e) {
    std::cerr << "error: " << e.code << ": " << e.what() << "\n";
    return kExitInputError;
  }
}

int cmd_export(const std::string& instance_path, const std::string& out_path,
               const SolveOptionsCli& opt) {
  try {
    DispatchInstance inst = load_instance(instance_path);
    auto diags = validate_instance(inst, inst.default_routing);
    if (!diags.empty()) {
      for (const auto& d : diags) std::cerr << "error: " << d.code << ": " << d.message << "\n";
      return kExitInputError;
    }
    QuboEncoding enc = assemble(inst, inst.default_routing,
                                derive_conflict_sets(inst, inst.default_routing),
                                resolve_constants(inst, opt));
    export_qubo(enc, out_path);
    std::cout << "wrote " << out_path << " (" << enc.model.n << " variables, "
              << enc.model.quadratic.size() << " quadratic terms)\n";
    return kExitOk;
  } catch (const LoadError& e) {
    return report_load_error(e);
  } catch (const RailError& e) {
    std::cerr << "error: " << e.code << ": " << e.what() << "\n";
    return kExitInputError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"railway dispatching: big-M linear and time-indexed QUBO solvers"};
  app.require_subcommand(1);

  SolveOptionsCli opt;

  auto* solve = app.add_subcommand("solve", "solve an instance");
  solve->add_option("--instance", opt.instance_path, "instance file")->required();
  solve->add_option("--mode", opt.mode, "linear|qubo-brute|qubo-anneal|hybrid")
      ->check(CLI::IsMember({"linear", "qubo-brute", "qubo-anneal", "hybrid"}));
  solve->add_option("--inner", opt.inner, "inner solver for hybrid mode")
      ->check(CLI::IsMember({"linear", "qubo-brute", "qubo-anneal"}));
  solve->add_option("--threshold", opt.threshold, "satisfactory objective for hybrid mode");
  solve->add_option("--max-iter", opt.max_iter, "hybrid iteration cap");
  solve->add_option("--seed", opt.seed, "annealing seed");
  solve->add_option("--sweeps", opt.sweeps, "annealing sweeps per restart");
  solve->add_option("--restarts", opt.restarts, "annealing restarts");
  solve->add_option("--p-pair", opt.p_pair, "pairwise penalty constant");
  solve->add_option("--p-sum", opt.p_sum, "one-hot penalty constant");
  solve->add_option("--p-qubic", opt.p_qubic, "cubic-reduction penalty constant");
  solve->add_option("--resolution", opt.resolution, "override grid resolution");
  solve->add_flag("--structured", opt.structured, "emit the report as JSON");

  std::string export_instance, export_out;
  auto* exp = app.add_subcommand("export-qubo", "write the QUBO in coordinate format");
  exp->add_option("--instance", export_instance, "instance file")->required();
  exp->add_option("--out", export_out, "output path")->required();
  exp->add_option("--p-pair", opt.p_pair, "pairwise penalty constant");
  exp->add_option("--p-sum", opt.p_sum, "one-hot penalty constant");
  exp->add_option("--p-qubic", opt.p_qubic, "cubic-reduction penalty constant");

  std::string validate_instance_path;
  auto* val = app.add_subcommand("validate", "check an instance file");
  val->add_option("--instance", validate_instance_path, "instance file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitInputError;
  }

  if (solve->parsed()) return cmd_solve(opt);
  if (exp->parsed()) return cmd_export(export_instance, export_out, opt);
  if (val->parsed()) return cmd_validate(validate_instance_path);
  return kExitInputError;
}
