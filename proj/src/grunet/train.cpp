#include "spoofdet/grunet/train.hpp"

#include <cmath>

#include "spoofdet/errors.hpp"
#include "spoofdet/grunet/adam.hpp"
#include "spoofdet/grunet/kernels.hpp"
#include "spoofdet/metrics.hpp"
#include "spoofdet/random.hpp"

namespace spoofdet::grunet {

using nlohmann::json;

void TrainConfig::validate() const {
  shape().validate();
  if (!(lr > 0.0)) throw UsageError("train.lr must be > 0");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw UsageError("train.dropout must be in [0, 1)");
  if (!(decay > 0.0 && decay <= 1.0)) throw UsageError("train.decay must be in (0, 1]");
  if (batch == 0) throw UsageError("train.batch must be positive");
  if (!(pos_weight > 0.0)) throw UsageError("train.pos_weight must be > 0");
}

json train_config_to_json(const TrainConfig& c) {
  return json{{"layers", c.layers},       {"hidden", c.hidden},   {"head", c.head},
              {"dropout", c.dropout},     {"lr", c.lr},           {"decay", c.decay},
              {"epochs", c.epochs},       {"batch", c.batch},     {"seed", c.seed},
              {"pos_weight", c.pos_weight}, {"clip_norm", c.clip_norm}};
}

json history_to_json(const std::vector<EpochRecord>& h) {
  json out = json::array();
  for (const auto& e : h) {
    json j{{"epoch", e.epoch}, {"lr", e.lr}, {"train_loss", e.train_loss}, {"val_loss", e.val_loss}};
    j["val_accuracy"] = e.val_accuracy ? json(*e.val_accuracy) : json(nullptr);
    j["val_weighted_accuracy"] = e.val_weighted_accuracy ? json(*e.val_weighted_accuracy) : json(nullptr);
    out.push_back(std::move(j));
  }
  return out;
}

namespace {

bool better(const EpochRecord& a, const EpochRecord& b) {
  const double wa = a.val_weighted_accuracy.value_or(-1.0);
  const double wb = b.val_weighted_accuracy.value_or(-1.0);
  if (wa != wb) return wa > wb;
  return a.val_loss < b.val_loss;
}

}  // namespace

TrainResult train(const DatasetSplit& data, const TrainConfig& cfg, const EpochCallback& on_epoch) {
  cfg.validate();
  if (data.train.empty()) throw DataError("train: training split is empty");

  GruModel model(cfg.shape());
  model.init(cfg.seed);
  model.norm = compute_norm_stats(data.train);
  model.dropout = cfg.dropout;

  TrainResult result;
  result.model = model;
  if (cfg.epochs == 0) return result;

  AdamState adam(model.param_count());
  Rng order_rng(mix_seed(cfg.seed, 0x0DE5));
  std::vector<double> grad;
  std::vector<const Window*> batch;
  std::vector<int> val_labels;
  for (const auto& w : data.val) val_labels.push_back(w.label);

  EpochRecord best;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = decayed_lr(cfg.lr, cfg.decay, epoch);
    const auto order = shuffled_indices(data.train.size(), order_rng);
    double loss_sum = 0.0;
    std::size_t batch_no = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch, ++batch_no) {
      const std::size_t end = std::min(order.size(), start + cfg.batch);
      batch.clear();
      for (std::size_t k = start; k < end; ++k) batch.push_back(&data.train[order[k]]);
      BatchSpec spec{cfg.pos_weight, cfg.dropout, mix_seed(cfg.seed, (epoch << 32) | batch_no)};
      const double loss = cfg.parallel ? batch_gradient_parallel(model, batch, spec, grad)
                                       : batch_gradient_serial(model, batch, spec, grad);
      if (!std::isfinite(loss)) {
        throw DivergenceError("non-finite training loss at epoch " + std::to_string(epoch));
      }
      clip_global_norm(grad, cfg.clip_norm);
      adam_step(adam, model.params(), grad, lr);
      loss_sum += loss * static_cast<double>(end - start);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = lr;
    rec.train_loss = loss_sum / static_cast<double>(data.train.size());
    if (!data.val.empty()) {
      const auto probs = cfg.parallel ? predict_parallel(model, data.val) : predict_serial(model, data.val);
      double vl = 0.0;
      for (std::size_t i = 0; i < probs.size(); ++i) vl += bce_loss(probs[i], val_labels[i], cfg.pos_weight);
      rec.val_loss = vl / static_cast<double>(probs.size());
      const Metrics m = confusion_metrics(probs, val_labels, 0.5);
      rec.val_accuracy = m.accuracy;
      rec.val_weighted_accuracy = m.weighted_accuracy;
    } else {
      rec.val_loss = rec.train_loss;
    }
    if (!std::isfinite(rec.train_loss) || !std::isfinite(rec.val_loss)) {
      throw DivergenceError("non-finite loss at epoch " + std::to_string(epoch));
    }
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec);
    if (!result.best_epoch || better(rec, best)) {
      best = rec;
      result.best_epoch = epoch;
      result.model = model;
    }
  }
  return result;
}

SearchResult random_search(const SearchSpace& space, std::size_t budget, const DatasetSplit& data,
                           const TrainConfig& base, std::uint64_t seed) {
  if (budget == 0) throw UsageError("random_search: budget must be >= 1");
  if (space.layers.empty() || space.hidden.empty()) throw UsageError("random_search: empty choice set");
  Rng rng(mix_seed(seed, 0x5EA2C4));
  SearchResult out;
  double best_score = -1.0;
  for (std::size_t trial = 0; trial < budget; ++trial) {
    TrainConfig cfg = base;
    cfg.layers = space.layers[rng() % space.layers.size()];
    cfg.hidden = space.hidden[rng() % space.hidden.size()];
    cfg.dropout = space.dropout_min + (space.dropout_max - space.dropout_min) * uniform01(rng);
    const double log_lo = std::log(space.lr_min);
    const double log_hi = std::log(space.lr_max);
    const double u = uniform01(rng);
    cfg.lr = space.lr_min == space.lr_max ? space.lr_min : std::exp(log_lo + (log_hi - log_lo) * u);
    cfg.epochs = space.epochs_min + rng() % (space.epochs_max - space.epochs_min + 1);
    cfg.seed = mix_seed(seed, trial);

    const TrainResult r = train(data, cfg);
    double score = 0.0;
    if (r.best_epoch) score = r.history[*r.best_epoch].val_weighted_accuracy.value_or(0.0);
    out.trials.push_back({cfg, score});
    if (score > best_score) {
      best_score = score;
      out.best = cfg;
    }
  }
  return out;
}

}  // namespace spoofdet::grunet
