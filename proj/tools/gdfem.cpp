// gdfem command-line driver: scenario runs, the cube count test, the
// verification suite, and pairwise run comparison.

#include "gdfem/scenario.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"finite-strain gradient-damage finite element solver"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run_cmd = app.add_subcommand("run", "run a scenario from a config file");
  run_cmd->add_option("config", config_path, "JSON scenario config")
      ->required()
      ->check(CLI::ExistingFile);

  int count_steps = 3;
  auto* count_cmd =
      app.add_subcommand("count-test", "discrete stability count test on the "
                                       "structured unit cube");
  count_cmd->add_option("--steps", count_steps, "max refinement step")
      ->check(CLI::PositiveNumber);

  std::uint64_t seed = 42;
  int n_states = 1000;
  std::string report_csv;
  auto* verify_cmd = app.add_subcommand(
      "verify", "finite-difference oracle suite and rank probes");
  verify_cmd->add_option("--seed", seed, "RNG seed");
  verify_cmd->add_option("--states", n_states, "number of random states");
  verify_cmd->add_option("--csv", report_csv, "also write a CSV report here");

  std::string config_a, config_b;
  auto* compare_cmd = app.add_subcommand(
      "compare", "run two configs on the same mesh and report time ratios");
  compare_cmd->add_option("configA", config_a, "first config (numerator)")
      ->required()
      ->check(CLI::ExistingFile);
  compare_cmd->add_option("configB", config_b, "second config (denominator)")
      ->required()
      ->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      const gdfem::ScenarioConfig cfg = gdfem::load_config(config_path);
      const gdfem::RunResult result = gdfem::run_scenario(cfg);
      if (cfg.scenario == gdfem::ScenarioKind::CubeCountTest) {
        std::cout << "count test written to " << cfg.output_dir << "\n";
        return 0;
      }
      const auto& rep = result.report;
      std::cout << "steps completed: " << rep.steps.size() << "/"
                << cfg.load.n_steps << (rep.completed ? "" : "  [ABORTED]")
                << "\n";
      if (!rep.completed) std::cout << "abort: " << rep.abort_reason << "\n";
      if (!rep.steps.empty()) {
        const auto& last = rep.steps.back();
        std::cout << "final u = " << last.u_prescribed
                  << " mm, reaction = " << last.reaction
                  << " N, D_max = " << last.d_max << "\n";
      }
      std::cout << "totals: assembly " << rep.total_assembly_ms
                << " ms, solve " << rep.total_solve_ms << " ms, "
                << rep.total_newton_iters << " Newton iterations\n";
      std::cout << "artifacts in " << cfg.output_dir << "\n";
      return rep.completed ? 0 : 2;
    }

    if (*count_cmd) {
      const auto rows = gdfem::count_test_cube_series(count_steps);
      std::cout << "refinement  dim_V  dim_M  without_bubble  with_bubble\n";
      for (size_t s = 0; s < rows.size(); ++s)
        std::cout << s + 1 << "  " << rows[s].dim_V << "  " << rows[s].dim_M
                  << "  " << rows[s].without_bubble << "  "
                  << rows[s].with_bubble << "\n";
      return 0;
    }

    if (*verify_cmd) {
      const gdfem::OracleReport report = gdfem::fd_oracle_suite(seed, n_states);
      gdfem::write_oracle_report(report, std::cout);
      const auto probe =
          gdfem::coupling_block_probe(gdfem::generate_structured_cube(2, 1.0));
      std::cout << "coupling block probe (cube s=1): min singular value "
                << probe.min_singular_value << " over " << probe.n_alpha << "x"
                << probe.n_lambda << "\n";
      if (!report_csv.empty()) {
        std::ofstream csv(report_csv);
        gdfem::write_oracle_report_csv(report, csv);
      }
      return report.all_pass && probe.min_singular_value > 0.0 ? 0 : 1;
    }

    if (*compare_cmd) {
      const auto cmp = gdfem::timing_comparison(gdfem::load_config(config_a),
                                                gdfem::load_config(config_b));
      std::cout << "assembly ratio: " << cmp.assembly_ratio << "\n"
                << "solve ratio:    " << cmp.solve_ratio << "\n"
                << "total ratio:    " << cmp.total_ratio << "\n"
                << "|u|_L2 A: " << cmp.l2_norm_a << ", B: " << cmp.l2_norm_b
                << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
