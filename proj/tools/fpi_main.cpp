// Command-line runner for fixed-point experiments.
//
//   fpi run <config>... [--jobs N]
//   fpi validate <config>
//   fpi demo <name>
//
// Global flags: --out DIR, --seed N, --max-iter N, --quiet.

#include <algorithm>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fpi/config.hpp"
#include "fpi/error.hpp"
#include "fpi/experiment.hpp"

namespace {

struct Overrides {
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> max_iter;
  bool quiet = false;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw fpi::Error(fpi::ErrorCode::ReadError, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fpi::ExperimentConfig load(const std::string& text, const Overrides& ov) {
  fpi::ExperimentConfig cfg = fpi::parse_config(text);
  if (ov.out) cfg.output_dir = *ov.out;
  if (ov.seed) cfg.seed = *ov.seed;
  if (ov.max_iter) cfg.max_iter = *ov.max_iter;
  fpi::validate_config(cfg);
  return cfg;
}

struct Outcome {
  int code = fpi::kExitOk;
  std::string report;
};

Outcome run_one(const fpi::ExperimentConfig& cfg) {
  Outcome o;
  try {
    const fpi::RunSummary s = fpi::run_experiment(cfg);
    o.report = fpi::render_summary(s);
    o.code = s.all_passed() ? fpi::kExitOk : fpi::kExitCheckFailed;
  } catch (const fpi::Error& e) {
    o.report = std::string("error: ") + e.what() + "\n";
    o.code = fpi::exit_code_for(e.code());
  }
  return o;
}

int report_error(const fpi::Error& e) {
  std::cerr << "error: " << e.what() << "\n";
  return fpi::exit_code_for(e.code());
}

int cmd_run(const std::vector<std::string>& paths, std::size_t jobs, const Overrides& ov) {
  std::vector<fpi::ExperimentConfig> configs;
  std::set<std::string> names;
  try {
    for (const auto& p : paths) {
      configs.push_back(load(read_file(p), ov));
      if (!names.insert(configs.back().name).second) {
        throw fpi::Error(fpi::ErrorCode::ValidationError,
                         "name: duplicate experiment name '" + configs.back().name + "'");
      }
    }
  } catch (const fpi::Error& e) {
    return report_error(e);
  }

  std::vector<Outcome> outcomes(configs.size());
  jobs = std::max<std::size_t>(1, jobs);
  for (std::size_t start = 0; start < configs.size(); start += jobs) {
    const std::size_t end = std::min(configs.size(), start + jobs);
    std::vector<std::future<Outcome>> batch;
    for (std::size_t i = start; i < end; ++i) {
      batch.push_back(std::async(jobs > 1 ? std::launch::async : std::launch::deferred, run_one,
                                 std::cref(configs[i])));
    }
    for (std::size_t i = start; i < end; ++i) outcomes[i] = batch[i - start].get();
  }

  int code = fpi::kExitOk;
  for (const auto& o : outcomes) {
    if (!ov.quiet) std::cout << o.report;
    code = std::max(code, o.code);
  }
  return code;
}

int cmd_validate(const std::string& path, const Overrides& ov) {
  try {
    const fpi::ExperimentConfig cfg = load(read_file(path), ov);
    const fpi::Schedule s = cfg.schedule.value_or(fpi::Schedule::one_over_n_plus_k(2));
    const auto v = fpi::validate_schedule(s, std::max<std::size_t>(1, cfg.max_iter));
    if (!ov.quiet) {
      std::cout << "config " << cfg.name << " is valid\n"
                << "km_cond1 = " << fpi::to_string(v.km_cond1) << "\n"
                << "km_cond2 = " << fpi::to_string(v.km_cond2) << "\n"
                << "h_cond1 = " << fpi::to_string(v.h_cond1) << "\n"
                << "h_cond2 = " << fpi::to_string(v.h_cond2) << "\n"
                << "h_cond3 = " << fpi::to_string(v.h_cond3) << "\n"
                << "h_cond4 = " << fpi::to_string(v.h_cond4) << "\n";
      if (v.km_range_witness) std::cout << "km_range_witness = " << *v.km_range_witness << "\n";
      if (v.h_range_witness) std::cout << "h_range_witness = " << *v.h_range_witness << "\n";
    }
    return fpi::kExitOk;
  } catch (const fpi::Error& e) {
    return report_error(e);
  }
}

int cmd_demo(const std::string& name, const Overrides& ov) {
  fpi::ExperimentConfig cfg;
  try {
    cfg = load(fpi::demo_config_text(name), ov);
  } catch (const fpi::Error& e) {
    return report_error(e);
  }
  const Outcome o = run_one(cfg);
  if (!ov.quiet) std::cout << o.report;
  return o.code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fixed-point iteration experiments: Picard, Krasnoselskii-Mann and Halpern"};
  app.require_subcommand(1);
  app.fallthrough();

  Overrides ov;
  std::string out;
  std::uint64_t seed = 0;
  std::size_t max_iter = 0;
  auto* out_opt = app.add_option("--out", out, "Output directory (overrides output_dir)");
  auto* seed_opt = app.add_option("--seed", seed, "Seed (overrides seed)");
  auto* iter_opt = app.add_option("--max-iter", max_iter, "Iteration cap (overrides max_iter)");
  app.add_flag("--quiet", ov.quiet, "Suppress summaries");

  std::vector<std::string> run_paths;
  std::size_t jobs = 1;
  auto* run = app.add_subcommand("run", "Run one or more experiment configs");
  run->add_option("configs", run_paths, "Config files")->required();
  run->add_option("--jobs", jobs, "Configs to run concurrently")->check(CLI::PositiveNumber);

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Parse a config and print schedule verdicts");
  validate->add_option("config", validate_path, "Config file")->required();

  std::string demo_name;
  auto* demo = app.add_subcommand("demo", "Run a built-in experiment");
  demo->add_option("name", demo_name, "Demo name")
      ->required()
      ->check(CLI::IsMember(fpi::demo_names()));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : fpi::kExitParse;
  }
  if (*out_opt) ov.out = out;
  if (*seed_opt) ov.seed = seed;
  if (*iter_opt) ov.max_iter = max_iter;

  if (*run) return cmd_run(run_paths, jobs, ov);
  if (*validate) return cmd_validate(validate_path, ov);
  if (*demo) return cmd_demo(demo_name, ov);
  return fpi::kExitParse;
}
