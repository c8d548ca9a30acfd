#include <chrono>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "spoofdet/commands.hpp"
#include "spoofdet/errors.hpp"

using namespace spoofdet;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool smoke = false;
};

void add_common(CLI::App* sub, Common& c, bool out_required = true) {
  sub->add_option("--config", c.config, "JSON config file (defaults apply to missing keys)");
  sub->add_option("--seed", c.seed, "master seed, overrides the config");
  auto* o = sub->add_option("--out", c.out, "output directory");
  if (out_required) o->required();
  sub->add_flag("--smoke", c.smoke, "one seed and a reduced training budget");
}

RunConfig resolve(const Common& c) {
  RunConfig cfg = c.config.empty() ? RunConfig{} : load_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (c.smoke) cfg.apply_smoke();
  cfg.validate();
  return cfg;
}

std::optional<fs::path> opt_path(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return fs::path(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Order-book spoofing labeller and early-detection classifier"};
  app.require_subcommand(1);
  Common c;

  auto* gen = app.add_subcommand("generate", "build the four-sample synthetic benchmark");
  add_common(gen, c);

  std::string stream, flags, data, model, results, split = "test";
  auto* label = app.add_subcommand("label", "replay a stream and flag spoofing cancels");
  add_common(label, c);
  label->add_option("stream", stream, "NDJSON or CSV update stream")->required()->check(CLI::ExistingFile);

  auto* dataset = app.add_subcommand("dataset", "build a windowed dataset archive");
  add_common(dataset, c);
  dataset->add_option("--stream", stream, "update stream")->required()->check(CLI::ExistingFile);
  dataset->add_option("--flags", flags, "flags NDJSON from `label`")->required()->check(CLI::ExistingFile);

  auto* train = app.add_subcommand("train", "train a GRU classifier on a dataset archive");
  add_common(train, c);
  train->add_option("--data", data, "dataset archive directory")->required()->check(CLI::ExistingDirectory);

  auto* eval = app.add_subcommand("eval", "score a checkpoint on one split of an archive");
  add_common(eval, c);
  eval->add_option("--model", model, "checkpoint file")->required()->check(CLI::ExistingFile);
  eval->add_option("--data", data, "dataset archive directory")->required()->check(CLI::ExistingDirectory);
  eval->add_option("--split", split, "train, val or test")->check(CLI::IsMember({"train", "val", "test"}));

  auto* matrix = app.add_subcommand("matrix", "cross-sample matrix and pooled evaluation");
  add_common(matrix, c);
  matrix->add_option("--data", data, "output of `generate` (generated in memory when omitted)")
      ->check(CLI::ExistingDirectory);

  auto* report = app.add_subcommand("report", "plots around every flag and rendered result tables");
  add_common(report, c);
  report->add_option("--stream", stream, "update stream")->required()->check(CLI::ExistingFile);
  report->add_option("--flags", flags, "flags NDJSON (recomputed when omitted)")->check(CLI::ExistingFile);
  report->add_option("--results", results, "directory holding matrix.json / pooled.json")
      ->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  const auto t0 = std::chrono::steady_clock::now();
  try {
    const RunConfig cfg = resolve(c);
    const fs::path out = c.out;
    nlohmann::json m;
    if (*gen) m = cmd_generate(cfg, out);
    if (*label) m = cmd_label(cfg, stream, out);
    if (*dataset) m = cmd_dataset(cfg, stream, flags, out);
    if (*train) m = cmd_train(cfg, data, out);
    if (*eval) m = cmd_eval(cfg, model, data, split, out);
    if (*matrix) m = cmd_matrix(cfg, opt_path(data), out);
    if (*report) m = cmd_report(cfg, stream, opt_path(flags), opt_path(results), out);
    m.erase("config");
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << m.dump(2) << "\n";
    std::cerr << "done in " << secs << " s, outputs in " << out << "\n";
    return 0;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const DivergenceError& e) {
    std::cerr << "training diverged: " << e.what() << "\n";
    return 3;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
