#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "l2nas/harness.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  std::string preset = "nb";
  std::vector<std::uint64_t> seeds;
  int steps = -1;
  std::string out_dir;
  int jobs = 0;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "Run config JSON file")->required();
  cmd->add_option("--preset", opts.preset, "Agent defaults: nb or large")
      ->check(CLI::IsMember({"nb", "large"}));
  cmd->add_option("--seed", opts.seeds, "Seeds, comma separated")->delimiter(',');
  cmd->add_option("--steps", opts.steps, "Override search steps");
  cmd->add_option("--out", opts.out_dir, "Output directory");
  cmd->add_option("--jobs", opts.jobs, "Parallel seed workers");
}

l2nas::RunConfig resolve(const CommonOpts& opts) {
  auto config = l2nas::load_run_config(opts.config_path, opts.preset);
  if (!opts.seeds.empty()) config.seeds = opts.seeds;
  if (opts.steps >= 0) config.agent.steps = opts.steps;
  if (!opts.out_dir.empty()) config.out_dir = opts.out_dir;
  if (opts.jobs > 0) config.jobs = opts.jobs;
  return config;
}

void print_report(const l2nas::RunReport& report) {
  for (const auto& s : report.seeds)
    std::cout << "seed " << s.seed << ": best_valid " << s.best_valid
              << " best_test " << s.best_test << " (step " << s.best_step
              << ", key " << s.best_key << ")\n";
  std::cout << "mean_valid " << report.mean_valid << " +- " << report.std_valid
            << "\nmean_test  " << report.mean_test << " +- " << report.std_test
            << "\n";
  if (report.best_rank)
    std::cout << "best arch ground-truth rank: " << *report.best_rank << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"L2NAS: quantile-driven continuous-action search over "
               "discretizable architecture spaces"};
  app.require_subcommand(1);

  CommonOpts run_opts;
  auto* run_cmd = app.add_subcommand("run", "Run the search per seed");
  add_common(run_cmd, run_opts);

  CommonOpts rs_opts;
  auto* rs_cmd =
      app.add_subcommand("baseline-random", "Uniform random-search baseline");
  add_common(rs_cmd, rs_opts);

  std::string transfer_pre, transfer_fine, transfer_out;
  auto* transfer_cmd = app.add_subcommand(
      "transfer", "Pretrain, checkpoint, fine-tune on a second environment");
  transfer_cmd->add_option("--config", transfer_pre, "Pretrain config JSON")
      ->required();
  transfer_cmd
      ->add_option("--finetune-config", transfer_fine, "Fine-tune config JSON")
      ->required();
  transfer_cmd->add_option("--out", transfer_out, "Output directory");

  CommonOpts enum_opts;
  int enum_k = 64;
  std::string enum_out;
  auto* enum_cmd =
      app.add_subcommand("enumerate", "Exact top-K listing of an enumerable space");
  enum_cmd->add_option("--config", enum_opts.config_path, "Run config JSON file")
      ->required();
  enum_cmd->add_option("--k", enum_k, "Top-K size")->required();
  enum_cmd->add_option("--out", enum_out, "Output file (JSON)");

  std::vector<std::string> report_logs;
  std::string report_enum, report_out;
  int report_k = 0;
  auto* report_cmd =
      app.add_subcommand("report", "Aggregate statistics from step logs");
  report_cmd->add_option("--logs", report_logs, "steps.jsonl files")->required();
  report_cmd->add_option("--enumeration", report_enum,
                         "Enumeration file for state comparison");
  report_cmd->add_option("--k", report_k, "Tracker capacity used by the runs");
  report_cmd->add_option("--out", report_out, "Output file (JSON)");

  std::string import_in, import_out, import_dataset = "unknown";
  std::optional<double> import_acc_env;
  bool import_percent = false;
  auto* import_cmd = app.add_subcommand(
      "import-nb201", "Convert NB-201 arch-string records to a tabular oracle file");
  import_cmd->add_option("--in", import_in, "Input JSONL of arch_str records")
      ->required();
  import_cmd->add_option("--out", import_out, "Output tabular file")->required();
  import_cmd->add_option("--dataset", import_dataset, "Dataset label");
  import_cmd->add_option("--acc-env", import_acc_env,
                         "Environment accuracy stored in the header");
  import_cmd->add_flag("--percent", import_percent,
                       "Input accuracies are percentages");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      print_report(l2nas::cmd_run(resolve(run_opts)));
    } else if (rs_cmd->parsed()) {
      print_report(l2nas::cmd_baseline_random(resolve(rs_opts)));
    } else if (transfer_cmd->parsed()) {
      auto pre = l2nas::load_run_config(transfer_pre, "large");
      auto fine = l2nas::load_run_config(transfer_fine, "large");
      if (!transfer_out.empty()) fine.out_dir = transfer_out;
      const auto report = l2nas::cmd_transfer(pre, fine);
      for (const auto& p : report.pairs)
        std::cout << "pair (" << p.pretrain_seed << ", " << p.finetune_seed
                  << "): pretrain_best " << p.pretrain_best << " fresh_best "
                  << p.fresh_best << " finetune_best " << p.finetune_best
                  << " queries_to_reach " << p.queries_to_reach_fresh_best
                  << "\n";
      std::cout << "median queries to reach fresh best: "
                << report.median_queries_to_reach << "\n";
    } else if (enum_cmd->parsed()) {
      const auto config = l2nas::load_run_config(enum_opts.config_path, "nb");
      auto oracle = l2nas::make_oracle(config);
      const auto j = l2nas::cmd_enumerate(config.space, *oracle, enum_k, enum_out);
      if (enum_out.empty()) std::cout << j.dump(2) << "\n";
      else std::cout << "wrote top-" << enum_k << " to " << enum_out << "\n";
    } else if (report_cmd->parsed()) {
      const auto j = l2nas::cmd_report(report_logs, report_enum, report_k);
      if (report_out.empty()) {
        std::cout << j.dump(2) << "\n";
      } else {
        std::ofstream out(report_out, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + report_out);
        out << j.dump(2) << "\n";
        std::cout << "wrote report to " << report_out << "\n";
      }
    } else if (import_cmd->parsed()) {
      l2nas::import_nb201(import_in, import_out, import_dataset, import_acc_env,
                          import_percent);
      std::cout << "wrote tabular oracle to " << import_out << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
