// desync: command-line front end for the desynchronization dynamics and the
// stability laboratory.
//
//   desync simulate  ...   run the single-hop or multi-hop map, write a trace
//   desync jacobian  ...   write an analytic Jacobian (optionally FD-checked)
//   desync stability ...   eigenvalues, certificates and verdict
//   desync thresholds      closed-form node-count limits
//
// Exit codes: 0 ok, 2 config error, 3 numerical failure, 4 I/O.

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "desync/desync.hpp"

namespace {

enum class LogLevel { error = 0, info = 1, debug = 2 };

LogLevel log_level() {
  const char* env = std::getenv("DESYNC_LOG");
  if (!env) return LogLevel::error;
  const std::string v(env);
  if (v == "debug") return LogLevel::debug;
  if (v == "info") return LogLevel::info;
  return LogLevel::error;
}

void log(LogLevel level, const std::string& msg) {
  static const LogLevel threshold = log_level();
  if (level > threshold) return;
  static const char* names[] = {"error", "info", "debug"};
  std::cerr << "[desync " << names[static_cast<int>(level)] << "] " << msg << '\n';
}

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

desync::Format format_for(const std::string& requested, const std::string& path) {
  if (requested == "csv") return desync::Format::csv;
  if (requested == "json") return desync::Format::json;
  if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0) return desync::Format::csv;
  return desync::Format::json;
}

desync::Topology resolve_topology(const std::string& choice, int n) {
  if (choice.empty() || choice == "star") return desync::Topology::star(n);
  if (choice == "chain") return desync::Topology::chain(n);
  if (choice == "full") return desync::Topology::full(n);
  if (choice == "ring") return desync::Topology::ring(n);
  desync::Topology t = desync::load_topology(choice);
  if (t.size() != n)
    throw desync::ConfigError("topology file " + choice + " has " + std::to_string(t.size()) +
                              " nodes but --n is " + std::to_string(n));
  return t;
}

desync::PerceptionMode perception_for(const std::string& s) {
  return s == "one-hop" ? desync::PerceptionMode::one_hop : desync::PerceptionMode::two_hop;
}

desync::StarForm star_form_for(const std::string& s) {
  if (s == "printed-derived") return desync::StarForm::printed_derived_limit;
  if (s == "printed-literal") return desync::StarForm::printed_literal_limit;
  return desync::StarForm::mask_exact;
}

struct AnalysisArgs {
  std::string mode;
  int n = 0;
  double period = 1000.0;
  std::string topology;
  std::string perception = "two-hop";
  std::string star_form = "mask-exact";
  std::string out;
  std::string format;
};

desync::AnalysisMode analysis_mode_for(const std::string& m) {
  if (m == "single-even") return desync::AnalysisMode::single_hop_even;
  if (m == "single-odd") return desync::AnalysisMode::single_hop_odd;
  if (m == "star") return desync::AnalysisMode::star;
  return desync::AnalysisMode::general;
}

void add_analysis_options(CLI::App* cmd, AnalysisArgs& a) {
  cmd->add_option("--mode", a.mode, "Jacobian family")
      ->required()
      ->check(CLI::IsMember({"single-even", "single-odd", "star", "general"}));
  cmd->add_option("--n", a.n, "Node count")->required()->check(CLI::Range(2, 1 << 20));
  cmd->add_option("--period", a.period, "Period T in milliseconds")->required()->check(CLI::PositiveNumber);
  cmd->add_option("--topology", a.topology, "Topology file or builtin star|chain|full|ring (general mode)");
  cmd->add_option("--perception", a.perception, "Perception mode (general mode)")
      ->check(CLI::IsMember({"one-hop", "two-hop"}));
  cmd->add_option("--star-form", a.star_form, "Star closed form")
      ->check(CLI::IsMember({"mask-exact", "printed-derived", "printed-literal"}));
  cmd->add_option("--format", a.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
}

int run_jacobian(const AnalysisArgs& a, bool fd_check) {
  const auto cfg = desync::SystemConfig::derived(a.n, a.period);
  const auto mode = analysis_mode_for(a.mode);
  desync::JacobianMatrix jac{};
  std::optional<desync::JacobianMatrix> fd;
  const auto eq = desync::GapVector::equilibrium(a.n, a.period);
  const double h = a.period * 1e-6;
  switch (mode) {
    case desync::AnalysisMode::single_hop_even:
    case desync::AnalysisMode::single_hop_odd:
      jac = desync::jacobian_single_hop(cfg, mode == desync::AnalysisMode::single_hop_even ? desync::Parity::even
                                                                                         : desync::Parity::odd);
      if (fd_check) fd = desync::finite_difference_jacobian(desync::single_hop_map(cfg), eq.values(), h);
      break;
    case desync::AnalysisMode::star: {
      jac = desync::jacobian_star(cfg, star_form_for(a.star_form));
      if (fd_check) {
        const auto c = desync::perception_matrix(desync::Topology::star(a.n), desync::PerceptionMode::two_hop);
        fd = desync::finite_difference_jacobian(desync::multihop_map(c, cfg), eq.values(), h);
      }
      break;
    }
    case desync::AnalysisMode::general: {
      const auto topo = resolve_topology(a.topology, a.n);
      if (!topo.is_connected()) log(LogLevel::info, "topology is disconnected");
      const auto c = desync::perception_matrix(topo, perception_for(a.perception));
      jac = desync::jacobian_multihop(eq, c, cfg);
      if (fd_check) fd = desync::finite_difference_jacobian(desync::multihop_map(c, cfg), eq.values(), h);
      break;
    }
  }
  const auto fmt = format_for(a.format, a.out);
  bool fd_ok = true;
  if (fd) {
    const double err = desync::max_abs_difference(jac, *fd);
    fd_ok = err <= 1e-5;
    log(fd_ok ? LogLevel::info : LogLevel::error,
        "finite-difference check: max |analytic - fd| = " + desync::format_double(err) + (fd_ok ? " (ok)" : " (FAILED)"));
    if (fmt == desync::Format::json) {
      auto j = desync::matrix_json(jac);
      j["fd_check"] = {{"h", h}, {"max_abs_error", err}, {"tolerance", 1e-5}, {"passed", fd_ok}};
      desync::write_file(a.out, desync::to_stable_json(j));
    } else {
      desync::export_matrix(jac, a.out, fmt);
    }
  } else {
    desync::export_matrix(jac, a.out, fmt);
  }
  return fd_ok ? 0 : kExitNumerical;
}

int run_stability(const AnalysisArgs& a) {
  const auto cfg = desync::SystemConfig::derived(a.n, a.period);
  const auto mode = analysis_mode_for(a.mode);
  desync::StabilityOptions opts;
  opts.star_form = star_form_for(a.star_form);
  if (mode == desync::AnalysisMode::general) {
    const auto topo = resolve_topology(a.topology, a.n);
    if (!topo.is_connected()) log(LogLevel::info, "topology is disconnected");
    opts.perception_mode = perception_for(a.perception);
    opts.perception = desync::perception_matrix(topo, *opts.perception_mode);
  }
  const auto rep = desync::stability_report(cfg, mode, opts);
  log(LogLevel::info, std::string("verdict: ") + desync::to_string(rep.verdict) +
                          ", spectral radius " + desync::format_double(rep.spectral_radius));
  desync::export_report(rep, a.out, format_for(a.format, a.out));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Desynchronization dynamics and stability analysis"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Iterate the single-hop or multi-hop map");
  std::string sim_mode, sim_topology = "star", sim_perception = "two-hop", sim_init = "equilibrium";
  std::string sim_out, sim_format;
  int sim_n = 0, sim_rounds = 1, sim_stride = 1, perturb_node = 0;
  double sim_period = 1000.0;
  std::optional<double> sim_coupling, perturb;
  std::uint64_t seed = 0;
  std::vector<double> sim_gaps;
  bool sweep = false;
  sim->add_option("--mode", sim_mode)->required()->check(CLI::IsMember({"single", "multi"}));
  sim->add_option("--n", sim_n)->required()->check(CLI::Range(2, 1 << 20));
  sim->add_option("--period", sim_period, "Period T in milliseconds")->required()->check(CLI::PositiveNumber);
  sim->add_option("--coupling", sim_coupling, "Override the derived coupling constant K");
  sim->add_option("--topology", sim_topology, "Topology file or builtin star|chain|full|ring");
  sim->add_option("--perception", sim_perception)->check(CLI::IsMember({"one-hop", "two-hop"}));
  sim->add_option("--init", sim_init)->check(CLI::IsMember({"equilibrium", "random"}));
  sim->add_option("--gaps", sim_gaps, "Explicit initial gaps (overrides --init)")->delimiter(',');
  sim->add_option("--seed", seed);
  auto* perturb_opt = sim->add_option("--perturb", perturb, "Phase shift applied to --perturb-node");
  sim->add_option("--perturb-node", perturb_node)->needs(perturb_opt);
  sim->add_option("--rounds", sim_rounds)->required()->check(CLI::PositiveNumber);
  sim->add_option("--stride", sim_stride)->check(CLI::PositiveNumber);
  sim->add_flag("--sweep", sweep, "Single-hop: one round = n firings");
  sim->add_option("--out", sim_out)->required();
  sim->add_option("--format", sim_format)->check(CLI::IsMember({"csv", "json"}));

  // jacobian / stability
  AnalysisArgs jac_args, stab_args;
  bool fd_check = false;
  auto* jac = app.add_subcommand("jacobian", "Write a Jacobian at the equilibrium");
  add_analysis_options(jac, jac_args);
  jac->add_flag("--fd-check", fd_check, "Compare against central finite differences of the map");
  jac->add_option("--out", jac_args.out)->required();
  auto* stab = app.add_subcommand("stability", "Eigenvalues, bound certificates and verdict");
  add_analysis_options(stab, stab_args);
  stab->add_option("--out", stab_args.out)->required();

  // thresholds
  auto* thr = app.add_subcommand("thresholds", "Closed-form maximum node counts");
  std::string thr_out;
  thr->add_option("--out", thr_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*sim) {
      desync::SimConfig c;
      c.mode = sim_mode == "single" ? desync::SimMode::single_hop : desync::SimMode::multi_hop;
      c.n = sim_n;
      c.period = sim_period;
      c.coupling = sim_coupling;
      if (c.mode == desync::SimMode::multi_hop) c.topology = resolve_topology(sim_topology, sim_n);
      c.perception = perception_for(sim_perception);
      c.init = sim_init == "random" ? desync::InitKind::random : desync::InitKind::equilibrium;
      if (!sim_gaps.empty()) {
        c.init = desync::InitKind::explicit_gaps;
        c.gaps = sim_gaps;
      }
      c.seed = seed;
      if (perturb) c.perturbation = desync::Perturbation{*perturb, perturb_node};
      c.rounds = sim_rounds;
      c.stride = sim_stride;
      c.sweep = sweep;
      log(LogLevel::debug, "simulate: n=" + std::to_string(c.n) + " rounds=" + std::to_string(c.rounds));
      const auto result = desync::run_simulation(c);
      if (result.rejected_initial_states > 0)
        log(LogLevel::info, "random init rejected " + std::to_string(result.rejected_initial_states) +
                                " state(s) with a gap below T/(10 n^2)");
      if (!result.topology_connected) log(LogLevel::info, "topology is disconnected");
      desync::export_run(result, sim_out, format_for(sim_format, sim_out));
      if (result.failure) {
        log(LogLevel::error, "overshoot: " + result.failure->message);
        return kExitNumerical;
      }
      log(LogLevel::info, "final desync error " + desync::format_double(result.final_error));
      return 0;
    }
    if (*jac) return run_jacobian(jac_args, fd_check);
    if (*stab) return run_stability(stab_args);
    if (*thr) {
      const auto j = desync::to_stable_json(desync::thresholds_json(desync::stability_thresholds()));
      if (thr_out.empty())
        std::cout << j;
      else
        desync::write_file(thr_out, j);
      return 0;
    }
  } catch (const desync::IoError& e) {
    log(LogLevel::error, e.what());
    return kExitIo;
  } catch (const desync::ConfigError& e) {
    log(LogLevel::error, e.what());
    return kExitConfig;
  } catch (const desync::DomainError& e) {
    log(LogLevel::error, e.what());
    return kExitConfig;
  } catch (const desync::Error& e) {
    log(LogLevel::error, e.what());
    return kExitNumerical;
  }
  return 0;
}
