#include "spoofdet/eval.hpp"

#include <stdexcept>

#include "spoofdet/errors.hpp"
#include "spoofdet/grunet/kernels.hpp"
#include "spoofdet/random.hpp"

namespace spoofdet {

using nlohmann::json;

namespace {

std::optional<double> ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> opt_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

// Mean of the present values; nullopt when none are.
std::optional<double> mean_of(const std::vector<std::optional<double>>& v) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& x : v) {
    if (x) {
      sum += *x;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

}  // namespace

Metrics confusion_metrics(std::span<const double> probs, std::span<const int> labels, double tau) {
  if (probs.size() != labels.size()) throw std::invalid_argument("confusion_metrics: size mismatch");
  Metrics m;
  m.tau = tau;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const bool pred = probs[i] >= tau;
    if (labels[i]) {
      pred ? ++m.tp : ++m.fn;
    } else {
      pred ? ++m.fp : ++m.tn;
    }
  }
  m.accuracy = ratio(m.tp + m.tn, m.total());
  m.fp_rate = ratio(m.fp, m.fp + m.tn);
  m.fn_rate = ratio(m.fn, m.fn + m.tp);
  if (m.fp_rate && m.fn_rate) m.weighted_accuracy = ((1.0 - *m.fn_rate) + (1.0 - *m.fp_rate)) / 2.0;
  return m;
}

json metrics_to_json(const Metrics& m) {
  return json{{"tp", m.tp},
              {"fp", m.fp},
              {"tn", m.tn},
              {"fn", m.fn},
              {"tau", m.tau},
              {"accuracy", opt(m.accuracy)},
              {"weighted_accuracy", opt(m.weighted_accuracy)},
              {"fp_rate", opt(m.fp_rate)},
              {"fn_rate", opt(m.fn_rate)}};
}

Metrics metrics_from_json(const json& j) {
  Metrics m;
  m.tp = j.at("tp").get<std::size_t>();
  m.fp = j.at("fp").get<std::size_t>();
  m.tn = j.at("tn").get<std::size_t>();
  m.fn = j.at("fn").get<std::size_t>();
  m.tau = j.at("tau").get<double>();
  m.accuracy = opt_from(j.at("accuracy"));
  m.weighted_accuracy = opt_from(j.at("weighted_accuracy"));
  m.fp_rate = opt_from(j.at("fp_rate"));
  m.fn_rate = opt_from(j.at("fn_rate"));
  return m;
}

Metrics evaluate(const grunet::GruModel& model, std::span<const Window> windows, double tau, bool parallel) {
  if (windows.empty()) throw DataError("evaluate: no windows");
  const auto probs = parallel ? grunet::predict_parallel(model, windows) : grunet::predict_serial(model, windows);
  std::vector<int> labels;
  labels.reserve(windows.size());
  for (const auto& w : windows) labels.push_back(w.label);
  return confusion_metrics(probs, labels, tau);
}

void EvalConfig::validate() const {
  if (seeds == 0) throw UsageError("eval.seeds must be >= 1");
  if (!(tau > 0.0 && tau < 1.0)) throw UsageError("eval.tau must be in (0, 1)");
  train.validate();
}

json eval_config_to_json(const EvalConfig& c) {
  return json{{"seeds", c.seeds}, {"tau", c.tau}, {"seed", c.seed}, {"train", grunet::train_config_to_json(c.train)}};
}

namespace {

void run_one(EvalRun& run, const DatasetSplit& data, std::span<const NamedSplit> samples, const EvalConfig& cfg) {
  try {
    grunet::TrainConfig tc = cfg.train;
    tc.seed = run.seed;
    const auto result = grunet::train(data, tc);
    run.best_epoch = result.best_epoch;
    for (const auto& s : samples) run.tests.push_back(evaluate(result.model, s.split.test, cfg.tau));
  } catch (const std::exception& e) {
    run.error = e.what();
    run.tests.clear();
  }
}

void run_all(std::vector<EvalRun>& runs, const std::vector<const DatasetSplit*>& data,
             std::span<const NamedSplit> samples, const EvalConfig& cfg) {
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t i = 0; i < runs.size(); ++i) run_one(runs[i], *data[i], samples, cfg);
}

}  // namespace

void aggregate(MatrixReport& r) {
  const std::size_t n = r.names.size();
  std::vector<std::vector<double>> sum(n, std::vector<double>(n, 0.0));
  std::vector<std::vector<std::size_t>> count(n, std::vector<std::size_t>(n, 0));
  std::vector<bool> failed(n, false);
  for (const auto& run : r.runs) {
    if (run.error || run.tests.size() != n) {
      failed[run.train_sample] = true;
      continue;
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (!run.tests[j].weighted_accuracy) {
        failed[run.train_sample] = true;
        continue;
      }
      sum[run.train_sample][j] += *run.tests[j].weighted_accuracy;
      ++count[run.train_sample][j];
    }
  }
  r.cells.assign(n, std::vector<std::optional<double>>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (!failed[i] && count[i][j] > 0) r.cells[i][j] = sum[i][j] / static_cast<double>(count[i][j]);
    }
  }
  r.row_average.assign(n, std::nullopt);
  r.column_average.assign(n, std::nullopt);
  std::vector<std::optional<double>> all;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::optional<double>> row(r.cells[i].begin(), r.cells[i].end());
    std::vector<std::optional<double>> col;
    for (std::size_t k = 0; k < n; ++k) col.push_back(r.cells[k][i]);
    r.row_average[i] = mean_of(row);
    r.column_average[i] = mean_of(col);
    all.insert(all.end(), row.begin(), row.end());
  }
  r.overall = mean_of(all);
}

MatrixReport cross_sample_matrix(std::span<const NamedSplit> samples, const EvalConfig& cfg) {
  cfg.validate();
  if (samples.empty()) throw UsageError("cross_sample_matrix: no samples");
  MatrixReport r;
  r.seeds = cfg.seeds;
  std::vector<const DatasetSplit*> data;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    r.names.push_back(samples[i].name);
    for (std::size_t s = 0; s < cfg.seeds; ++s) {
      EvalRun run;
      run.train_sample = i;
      run.seed_index = s;
      run.seed = mix_seed(cfg.seed, 0x4D0000 + i * 256 + s);
      r.runs.push_back(std::move(run));
      data.push_back(&samples[i].split);
    }
  }
  run_all(r.runs, data, samples, cfg);
  aggregate(r);
  return r;
}

void aggregate(PooledReport& r) {
  const std::size_t n = r.names.size();
  r.per_sample.assign(n, PooledCell{});
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<std::optional<double>> fp, fn, wa, acc;
    for (const auto& run : r.runs) {
      if (run.error || run.tests.size() != n) continue;
      fp.push_back(run.tests[j].fp_rate);
      fn.push_back(run.tests[j].fn_rate);
      wa.push_back(run.tests[j].weighted_accuracy);
      acc.push_back(run.tests[j].accuracy);
    }
    r.per_sample[j] = {mean_of(fp), mean_of(fn), mean_of(wa), mean_of(acc)};
  }
  std::vector<std::optional<double>> fp, fn, wa, acc;
  for (const auto& c : r.per_sample) {
    fp.push_back(c.fp_rate);
    fn.push_back(c.fn_rate);
    wa.push_back(c.weighted_accuracy);
    acc.push_back(c.accuracy);
  }
  r.average = {mean_of(fp), mean_of(fn), mean_of(wa), mean_of(acc)};
}

PooledReport pooled_eval(std::span<const NamedSplit> samples, const EvalConfig& cfg) {
  cfg.validate();
  if (samples.empty()) throw UsageError("pooled_eval: no samples");
  DatasetSplit pooled;
  for (const auto& s : samples) {
    pooled.train.insert(pooled.train.end(), s.split.train.begin(), s.split.train.end());
    pooled.val.insert(pooled.val.end(), s.split.val.begin(), s.split.val.end());
  }
  PooledReport r;
  r.seeds = cfg.seeds;
  r.train_size = pooled.train.size();
  r.val_size = pooled.val.size();
  for (const auto& s : samples) r.names.push_back(s.name);
  std::vector<const DatasetSplit*> data;
  for (std::size_t s = 0; s < cfg.seeds; ++s) {
    EvalRun run;
    run.seed_index = s;
    run.seed = mix_seed(cfg.seed, 0x500000 + s);
    r.runs.push_back(std::move(run));
    data.push_back(&pooled);
  }
  run_all(r.runs, data, samples, cfg);
  aggregate(r);
  return r;
}

namespace {

json runs_to_json(const std::vector<EvalRun>& runs) {
  json out = json::array();
  for (const auto& run : runs) {
    json tests = json::array();
    for (const auto& m : run.tests) tests.push_back(metrics_to_json(m));
    out.push_back({{"train_sample", run.train_sample},
                   {"seed_index", run.seed_index},
                   {"seed", run.seed},
                   {"error", run.error ? json(*run.error) : json(nullptr)},
                   {"best_epoch", run.best_epoch ? json(*run.best_epoch) : json(nullptr)},
                   {"tests", std::move(tests)}});
  }
  return out;
}

std::vector<EvalRun> runs_from_json(const json& j) {
  std::vector<EvalRun> out;
  for (const auto& e : j) {
    EvalRun run;
    run.train_sample = e.at("train_sample").get<std::size_t>();
    run.seed_index = e.at("seed_index").get<std::size_t>();
    run.seed = e.at("seed").get<std::uint64_t>();
    if (!e.at("error").is_null()) run.error = e.at("error").get<std::string>();
    if (!e.at("best_epoch").is_null()) run.best_epoch = e.at("best_epoch").get<std::size_t>();
    for (const auto& m : e.at("tests")) run.tests.push_back(metrics_from_json(m));
    out.push_back(std::move(run));
  }
  return out;
}

json opt_vec(const std::vector<std::optional<double>>& v) {
  json out = json::array();
  for (const auto& x : v) out.push_back(opt(x));
  return out;
}

json cell_to_json(const PooledCell& c) {
  return {{"fp_rate", opt(c.fp_rate)},
          {"fn_rate", opt(c.fn_rate)},
          {"weighted_accuracy", opt(c.weighted_accuracy)},
          {"accuracy", opt(c.accuracy)}};
}

}  // namespace

json matrix_to_json(const MatrixReport& r) {
  json cells = json::array();
  for (const auto& row : r.cells) cells.push_back(opt_vec(row));
  return {{"samples", r.names},
          {"seeds", r.seeds},
          {"metric", "weighted_accuracy"},
          {"cells", std::move(cells)},
          {"row_average", opt_vec(r.row_average)},
          {"column_average", opt_vec(r.column_average)},
          {"overall", opt(r.overall)},
          {"runs", runs_to_json(r.runs)}};
}

MatrixReport matrix_from_json(const json& j) {
  MatrixReport r;
  try {
    r.names = j.at("samples").get<std::vector<std::string>>();
    r.seeds = j.at("seeds").get<std::size_t>();
    r.runs = runs_from_json(j.at("runs"));
  } catch (const json::exception& e) {
    throw DataError(std::string("bad matrix report: ") + e.what());
  }
  aggregate(r);
  return r;
}

json pooled_to_json(const PooledReport& r) {
  json cells = json::array();
  for (const auto& c : r.per_sample) cells.push_back(cell_to_json(c));
  return {{"samples", r.names},
          {"seeds", r.seeds},
          {"train_size", r.train_size},
          {"val_size", r.val_size},
          {"per_sample", std::move(cells)},
          {"average", cell_to_json(r.average)},
          {"runs", runs_to_json(r.runs)}};
}

PooledReport pooled_from_json(const json& j) {
  PooledReport r;
  try {
    r.names = j.at("samples").get<std::vector<std::string>>();
    r.seeds = j.at("seeds").get<std::size_t>();
    r.train_size = j.at("train_size").get<std::size_t>();
    r.val_size = j.at("val_size").get<std::size_t>();
    r.runs = runs_from_json(j.at("runs"));
  } catch (const json::exception& e) {
    throw DataError(std::string("bad pooled report: ") + e.what());
  }
  aggregate(r);
  return r;
}

}  // namespace spoofdet
