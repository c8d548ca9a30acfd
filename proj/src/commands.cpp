#include "spoofdet/commands.hpp"

#include <cstdio>
#include <fstream>

#include "spoofdet/errors.hpp"
#include "spoofdet/grunet/checkpoint.hpp"
#include "spoofdet/ingest.hpp"
#include "spoofdet/synthgen.hpp"

namespace spoofdet {

using nlohmann::json;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("failed writing " + path.string());
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

json base_manifest(const RunConfig& cfg, const char* command) {
  return {{"command", command}, {"config", config_to_json(cfg)}, {"config_hash", config_hash(cfg)}};
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create " + dir.string() + ": " + ec.message());
}

std::string ratio_text(const LabelCounts& c) {
  return std::to_string(c.positives) + "/" + std::to_string(c.total);
}

json anomalies_json(const BookAnomalies& a) {
  return {{"zero_size_on_absent_level", a.zero_size_on_absent_level},
          {"crossed_after_update", a.crossed_after_update}};
}

json split_counts(const DatasetSplit& s) {
  json out;
  const std::pair<const char*, const std::vector<Window>*> parts[] = {
      {"train", &s.train}, {"val", &s.val}, {"test", &s.test}};
  for (const auto& [name, v] : parts) {
    const auto c = count_labels(*v);
    out[name] = {{"positives", c.positives}, {"total", c.total}};
  }
  return out;
}

}  // namespace

json cmd_generate(const RunConfig& cfg, const fs::path& out) {
  ensure_dir(out);
  auto suite = make_benchmark_suite(cfg.seed, cfg.labeller, cfg.windows, cfg.features, cfg.generate.scale);
  json manifest = base_manifest(cfg, "generate");
  json samples = json::array();
  std::vector<SampleSummary> summaries;
  for (std::size_t i = 0; i < suite.size(); ++i) {
    const BenchmarkSample& s = suite[i];
    const fs::path dir = out / s.name;
    ensure_dir(dir);
    write_ndjson(dir / "stream.ndjson", s.data.generated.stream);
    write_json(dir / "truth.json", truth_to_json(s.data.generated.truth));
    write_json(dir / "scenario.json", scenario_to_json(s.data.config));
    write_flags(dir / "flags.ndjson", s.data.flags);

    const BuiltDataset ds =
        build_dataset(s.data.frames, s.data.flags, cfg.windows, cfg.seed, static_cast<std::uint32_t>(i), cfg.split);
    const LabelCounts train = count_labels(ds.split.train);
    summaries.push_back({s.name, ds.overall, train, s.target_frequency});
    std::size_t successful = 0;
    for (const auto& sp : s.data.generated.truth.spoofs) successful += sp.successful ? 1 : 0;
    samples.push_back({{"name", s.name},
                       {"dir", s.name},
                       {"scenario_seed", s.data.config.seed},
                       {"updates", s.data.generated.stream.updates.size()},
                       {"spoofs_injected", s.data.generated.truth.spoofs.size()},
                       {"spoofs_successful", successful},
                       {"flags", s.data.flags.size()},
                       {"verification_rounds", s.data.rounds},
                       {"positive_windows", ds.overall.positives},
                       {"total_windows", ds.overall.total},
                       {"frequency", ds.overall.total ? static_cast<double>(ds.overall.positives) /
                                                            static_cast<double>(ds.overall.total)
                                                      : 0.0},
                       {"target_frequency", s.target_frequency},
                       {"overall", ratio_text(ds.overall)},
                       {"train_downsampled", ratio_text(train)},
                       {"splits", split_counts(ds.split)}});
  }
  manifest["samples"] = std::move(samples);
  write_text(out / "samples.txt", format_samples_text(summaries));
  write_json(out / "manifest.json", manifest);
  return manifest;
}

json cmd_label(const RunConfig& cfg, const fs::path& stream, const fs::path& out) {
  const UpdateStream s = read_stream(stream);
  const ReplayResult rr = replay(s, cfg.features);
  const auto flags = flag_spoofing(rr.frames, cfg.labeller);
  ensure_dir(out);
  write_flags(out / "flags.ndjson", flags);
  json manifest = base_manifest(cfg, "label");
  manifest["input"] = stream.string();
  manifest["updates"] = s.updates.size();
  manifest["frames"] = rr.frames.size();
  manifest["flags"] = flags.size();
  manifest["anomalies"] = anomalies_json(rr.anomalies);
  write_json(out / "manifest.json", manifest);
  return manifest;
}

json cmd_dataset(const RunConfig& cfg, const fs::path& stream, const fs::path& flags_path, const fs::path& out) {
  const UpdateStream s = read_stream(stream);
  const auto frames = replay(s, cfg.features).frames;
  const auto flags = read_flags(flags_path);
  const BuiltDataset ds = build_dataset(frames, flags, cfg.windows, cfg.seed, 0, cfg.split);
  const NormStats norm = compute_norm_stats(ds.split.train);
  json extra = base_manifest(cfg, "dataset");
  extra["inputs"] = {{"stream", stream.string()}, {"flags", flags_path.string()}};
  extra["flags"] = flags.size();
  extra["dropped_flags"] = ds.dropped_flags;
  extra["overall"] = {{"positives", ds.overall.positives}, {"total", ds.overall.total}};
  write_archive(out, ds.split, norm, extra);
  return read_json(out / "manifest.json");
}

json cmd_train(const RunConfig& cfg, const fs::path& dataset, const fs::path& out) {
  const DatasetArchive a = read_archive(dataset);
  grunet::TrainConfig tc = cfg.train;
  tc.seed = cfg.seed;
  json manifest = base_manifest(cfg, "train");
  manifest["dataset"] = dataset.string();
  if (cfg.search.budget > 0) {
    const auto sr = grunet::random_search(cfg.search.space, cfg.search.budget, a.split, tc, cfg.seed);
    json trials = json::array();
    for (const auto& t : sr.trials) trials.push_back({{"config", grunet::train_config_to_json(t.config)}, {"score", t.score}});
    manifest["search"] = {{"trials", std::move(trials)}, {"best", grunet::train_config_to_json(sr.best)}};
    tc = sr.best;
  }
  const auto result = grunet::train(a.split, tc);
  ensure_dir(out);
  json header{{"train_config", grunet::train_config_to_json(tc)},
              {"best_epoch", result.best_epoch ? json(*result.best_epoch) : json(nullptr)}};
  grunet::save_checkpoint(out / "model.ckpt", result.model, header);
  write_json(out / "history.json", grunet::history_to_json(result.history));
  manifest["train_config"] = grunet::train_config_to_json(tc);
  manifest["best_epoch"] = header["best_epoch"];
  if (result.best_epoch) {
    const auto& best = result.history[*result.best_epoch];
    manifest["best_val_loss"] = best.val_loss;
    manifest["best_val_weighted_accuracy"] =
        best.val_weighted_accuracy ? json(*best.val_weighted_accuracy) : json(nullptr);
  }
  write_json(out / "manifest.json", manifest);
  return manifest;
}

json cmd_eval(const RunConfig& cfg, const fs::path& model, const fs::path& dataset, const std::string& split,
              const fs::path& out) {
  const auto ck = grunet::load_checkpoint(model);
  const DatasetArchive a = read_archive(dataset);
  const std::vector<Window>* windows = nullptr;
  if (split == "train") windows = &a.split.train;
  if (split == "val") windows = &a.split.val;
  if (split == "test") windows = &a.split.test;
  if (!windows) throw UsageError("split must be train, val or test");
  const Metrics m = evaluate(ck.model, *windows, cfg.tau);
  ensure_dir(out);
  write_json(out / "metrics.json", metrics_to_json(m));
  json manifest = base_manifest(cfg, "eval");
  manifest["model"] = model.string();
  manifest["dataset"] = dataset.string();
  manifest["split"] = split;
  manifest["metrics"] = metrics_to_json(m);
  write_json(out / "manifest.json", manifest);
  return manifest;
}

Benchmark load_benchmark(const RunConfig& cfg, const std::optional<fs::path>& data) {
  Benchmark b;
  std::vector<std::pair<std::string, std::vector<FeatureFrame>>> streams;
  std::vector<double> targets;
  if (data) {
    const json m = read_json(*data / "manifest.json");
    try {
      for (const auto& s : m.at("samples")) {
        const auto name = s.at("name").get<std::string>();
        streams.emplace_back(name, replay(read_ndjson(*data / s.at("dir").get<std::string>() / "stream.ndjson"),
                                          cfg.features)
                                       .frames);
        targets.push_back(s.at("target_frequency").get<double>());
      }
    } catch (const json::exception& e) {
      throw DataError("bad benchmark manifest: " + std::string(e.what()));
    }
  } else {
    auto suite = make_benchmark_suite(cfg.seed, cfg.labeller, cfg.windows, cfg.features, cfg.generate.scale);
    for (auto& s : suite) {
      streams.emplace_back(s.name, std::move(s.data.frames));
      targets.push_back(s.target_frequency);
    }
  }
  for (std::size_t i = 0; i < streams.size(); ++i) {
    const auto& frames = streams[i].second;
    const auto flags = flag_spoofing(frames, cfg.labeller);
    BuiltDataset ds = build_dataset(frames, flags, cfg.windows, cfg.seed, static_cast<std::uint32_t>(i), cfg.split);
    b.summaries.push_back({streams[i].first, ds.overall, count_labels(ds.split.train), targets[i]});
    b.samples.push_back({streams[i].first, std::move(ds.split)});
  }
  return b;
}

json cmd_matrix(const RunConfig& cfg, const std::optional<fs::path>& data, const fs::path& out) {
  const Benchmark b = load_benchmark(cfg, data);
  const EvalConfig ec = cfg.eval_config();
  const MatrixReport matrix = cross_sample_matrix(b.samples, ec);
  const PooledReport pooled = pooled_eval(b.samples, ec);
  ensure_dir(out);
  write_json(out / "matrix.json", matrix_to_json(matrix));
  write_json(out / "pooled.json", pooled_to_json(pooled));
  write_text(out / "table2.txt", format_matrix_text(matrix));
  write_text(out / "table2.csv", format_matrix_csv(matrix));
  write_text(out / "table3.txt", format_pooled_text(pooled));
  write_text(out / "table3.csv", format_pooled_csv(pooled));
  write_text(out / "samples.txt", format_samples_text(b.summaries));
  json manifest = base_manifest(cfg, "matrix");
  manifest["data"] = data ? json(data->string()) : json("generated in memory");
  manifest["eval"] = eval_config_to_json(ec);
  json samples = json::array();
  for (const auto& s : b.summaries) {
    samples.push_back({{"name", s.name}, {"overall", ratio_text(s.overall)}, {"train_downsampled", ratio_text(s.train)}});
  }
  manifest["samples"] = std::move(samples);
  manifest["matrix_overall"] = matrix.overall ? json(*matrix.overall) : json(nullptr);
  manifest["pooled_weighted_accuracy"] =
      pooled.average.weighted_accuracy ? json(*pooled.average.weighted_accuracy) : json(nullptr);
  std::size_t failed = 0;
  for (const auto& r : matrix.runs) failed += r.error ? 1 : 0;
  for (const auto& r : pooled.runs) failed += r.error ? 1 : 0;
  manifest["failed_runs"] = failed;
  write_json(out / "manifest.json", manifest);
  return manifest;
}

json cmd_report(const RunConfig& cfg, const fs::path& stream, const std::optional<fs::path>& flags_path,
                const std::optional<fs::path>& results, const fs::path& out) {
  const auto frames = replay(read_stream(stream), cfg.features).frames;
  const auto flags = flags_path ? read_flags(*flags_path) : flag_spoofing(frames, cfg.labeller);
  const fs::path plots = out / "plots";
  ensure_dir(plots);
  for (std::size_t i = 0; i < flags.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "flag_%04zu.svg", i);
    write_text(plots / name, plot_flag_svg(frames, flags[i]));
  }
  json manifest = base_manifest(cfg, "report");
  manifest["stream"] = stream.string();
  manifest["flags"] = flags.size();
  manifest["plots"] = flags.size();
  if (results) {
    if (fs::exists(*results / "matrix.json")) {
      const MatrixReport m = matrix_from_json(read_json(*results / "matrix.json"));
      write_text(out / "table2.txt", format_matrix_text(m));
      write_text(out / "table2.csv", format_matrix_csv(m));
      manifest["matrix_overall"] = m.overall ? json(*m.overall) : json(nullptr);
    }
    if (fs::exists(*results / "pooled.json")) {
      const PooledReport p = pooled_from_json(read_json(*results / "pooled.json"));
      write_text(out / "table3.txt", format_pooled_text(p));
      write_text(out / "table3.csv", format_pooled_csv(p));
      manifest["pooled_weighted_accuracy"] =
          p.average.weighted_accuracy ? json(*p.average.weighted_accuracy) : json(nullptr);
    }
  }
  write_json(out / "manifest.json", manifest);
  return manifest;
}

}  // namespace spoofdet
