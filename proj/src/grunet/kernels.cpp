#include "spoofdet/grunet/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "spoofdet/random.hpp"

namespace spoofdet::grunet {

double sigmoid(double v) noexcept {
  if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
  const double e = std::exp(v);
  return e / (1.0 + e);
}

double bce_loss(double p, int y, double pos_weight) noexcept {
  const double pc = std::clamp(p, kProbClamp, 1.0 - kProbClamp);
  return y ? -pos_weight * std::log(pc) : -std::log(1.0 - pc);
}

double bce_dlogit(double p, int y, double pos_weight) noexcept {
  if (p < kProbClamp || p > 1.0 - kProbClamp) return 0.0;
  return y ? -pos_weight * (1.0 - p) : p;
}

DropoutMasks sample_dropout(const GruShape& shape, std::size_t steps, double p, std::uint64_t seed) {
  DropoutMasks m;
  if (p <= 0.0) return m;
  Rng rng(seed);
  const double keep_scale = 1.0 / (1.0 - p);
  auto draw = [&](std::vector<double>& v, std::size_t n) {
    v.resize(n);
    for (double& s : v) s = uniform01(rng) < p ? 0.0 : keep_scale;
  };
  m.between.resize(shape.layers - 1);
  for (auto& layer : m.between) draw(layer, steps * shape.hidden);
  draw(m.head, shape.hidden);
  return m;
}

void normalize_window(const GruModel& model, const Window& w, std::vector<double>& out) {
  const std::size_t F = kFeatureCount;
  if (model.shape().input != F) throw std::invalid_argument("model input size does not match windows");
  out.resize(w.x.size());
  for (std::size_t t = 0; t < w.steps(); ++t) {
    for (std::size_t f = 0; f < F; ++f) {
      out[t * F + f] = (w.x[t * F + f] - model.norm.mean[f]) / model.norm.stddev[f];
    }
  }
}

double forward(const GruModel& model, std::span<const double> x, std::size_t steps,
               SequenceCache& cache, const DropoutMasks* masks) {
  const GruShape& s = model.shape();
  const std::size_t H = s.hidden;
  const std::size_t D = s.head;
  if (x.size() != steps * s.input) throw std::invalid_argument("forward: input shape mismatch");
  const double* P = model.params().data();

  cache.steps = steps;
  cache.input.resize(s.layers);
  cache.h.resize(s.layers);
  cache.z.resize(s.layers);
  cache.r.resize(s.layers);
  cache.c.resize(s.layers);

  std::vector<double> pre(3 * H);
  std::vector<double> rh(H);
  for (std::size_t l = 0; l < s.layers; ++l) {
    const LayerOffsets& lo = model.layer(l);
    const std::size_t I = lo.input;
    auto& in = cache.input[l];
    if (l == 0) {
      in.assign(x.begin(), x.end());
    } else {
      const auto& below = cache.h[l - 1];
      in.resize(steps * H);
      const bool drop = masks && !masks->between.empty();
      for (std::size_t t = 0; t < steps; ++t) {
        for (std::size_t j = 0; j < H; ++j) {
          const double v = below[(t + 1) * H + j];
          in[t * H + j] = drop ? v * masks->between[l - 1][t * H + j] : v;
        }
      }
    }
    auto& h = cache.h[l];
    auto& z = cache.z[l];
    auto& r = cache.r[l];
    auto& c = cache.c[l];
    h.assign((steps + 1) * H, 0.0);
    z.resize(steps * H);
    r.resize(steps * H);
    c.resize(steps * H);
    const double* W = P + lo.W;
    const double* U = P + lo.U;
    const double* b = P + lo.b;

    for (std::size_t t = 0; t < steps; ++t) {
      const double* xt = in.data() + t * I;
      const double* hp = h.data() + t * H;
      for (std::size_t i = 0; i < 3 * H; ++i) {
        const double* Wi = W + i * I;
        double acc = b[i];
        for (std::size_t k = 0; k < I; ++k) acc += Wi[k] * xt[k];
        pre[i] = acc;
      }
      for (std::size_t i = 0; i < 2 * H; ++i) {
        const double* Ui = U + i * H;
        double acc = 0.0;
        for (std::size_t k = 0; k < H; ++k) acc += Ui[k] * hp[k];
        pre[i] += acc;
      }
      double* zt = z.data() + t * H;
      double* rt = r.data() + t * H;
      double* ct = c.data() + t * H;
      for (std::size_t j = 0; j < H; ++j) {
        zt[j] = sigmoid(pre[j]);
        rt[j] = sigmoid(pre[H + j]);
        rh[j] = rt[j] * hp[j];
      }
      const double* Uh = U + 2 * H * H;
      for (std::size_t j = 0; j < H; ++j) {
        const double* Uj = Uh + j * H;
        double acc = pre[2 * H + j];
        for (std::size_t k = 0; k < H; ++k) acc += Uj[k] * rh[k];
        ct[j] = std::tanh(acc);
      }
      double* ht = h.data() + (t + 1) * H;
      for (std::size_t j = 0; j < H; ++j) ht[j] = (1.0 - zt[j]) * hp[j] + zt[j] * ct[j];
    }
  }

  const HeadOffsets& ho = model.head();
  const double* top = cache.h[s.layers - 1].data() + steps * H;
  cache.head_in.resize(H);
  const bool drop_head = masks && !masks->head.empty();
  for (std::size_t j = 0; j < H; ++j) cache.head_in[j] = drop_head ? top[j] * masks->head[j] : top[j];
  cache.a1.resize(D);
  double logit = P[ho.b2];
  for (std::size_t d = 0; d < D; ++d) {
    const double* Wd = P + ho.W1 + d * H;
    double acc = P[ho.b1 + d];
    for (std::size_t k = 0; k < H; ++k) acc += Wd[k] * cache.head_in[k];
    cache.a1[d] = std::tanh(acc);
    logit += P[ho.w2 + d] * cache.a1[d];
  }
  cache.logit = logit;
  return logit;
}

void backward(const GruModel& model, const SequenceCache& cache, const DropoutMasks* masks,
              double dlogit, std::span<double> grad) {
  const GruShape& s = model.shape();
  const std::size_t H = s.hidden;
  const std::size_t D = s.head;
  const std::size_t T = cache.steps;
  const double* P = model.params().data();
  double* G = grad.data();

  // Head.
  const HeadOffsets& ho = model.head();
  G[ho.b2] += dlogit;
  std::vector<double> dhead_in(H, 0.0);
  for (std::size_t d = 0; d < D; ++d) {
    const double a = cache.a1[d];
    G[ho.w2 + d] += dlogit * a;
    const double da = dlogit * P[ho.w2 + d] * (1.0 - a * a);
    G[ho.b1 + d] += da;
    double* gW = G + ho.W1 + d * H;
    const double* W = P + ho.W1 + d * H;
    for (std::size_t k = 0; k < H; ++k) {
      gW[k] += da * cache.head_in[k];
      dhead_in[k] += da * W[k];
    }
  }

  // dout[t] is the gradient arriving at h_t of the current layer from
  // outside the recurrence (the head for the top layer, the layer above
  // otherwise).
  std::vector<double> dout(T * H, 0.0);
  const bool drop_head = masks && !masks->head.empty();
  for (std::size_t j = 0; j < H; ++j) {
    dout[(T - 1) * H + j] = drop_head ? dhead_in[j] * masks->head[j] : dhead_in[j];
  }

  std::vector<double> dh_next(H);
  std::vector<double> dh(H);
  std::vector<double> dhp(H);
  std::vector<double> dpre(3 * H);
  std::vector<double> rh(H);
  std::vector<double> drh(H);
  for (std::size_t li = s.layers; li-- > 0;) {
    const LayerOffsets& lo = model.layer(li);
    const std::size_t I = lo.input;
    const double* W = P + lo.W;
    const double* U = P + lo.U;
    const double* Uh = U + 2 * H * H;
    double* gW = G + lo.W;
    double* gU = G + lo.U;
    double* gb = G + lo.b;
    const auto& in = cache.input[li];
    const auto& h = cache.h[li];
    const auto& z = cache.z[li];
    const auto& r = cache.r[li];
    const auto& c = cache.c[li];
    const bool need_dx = li > 0;
    std::vector<double> dx(need_dx ? T * I : 0, 0.0);

    std::fill(dh_next.begin(), dh_next.end(), 0.0);
    for (std::size_t t = T; t-- > 0;) {
      const double* hp = h.data() + t * H;
      const double* zt = z.data() + t * H;
      const double* rt = r.data() + t * H;
      const double* ct = c.data() + t * H;
      const double* xt = in.data() + t * I;
      for (std::size_t j = 0; j < H; ++j) {
        dh[j] = dout[t * H + j] + dh_next[j];
        const double dc = dh[j] * zt[j];
        const double dz = dh[j] * (ct[j] - hp[j]);
        dhp[j] = dh[j] * (1.0 - zt[j]);
        dpre[2 * H + j] = dc * (1.0 - ct[j] * ct[j]);
        dpre[j] = dz * zt[j] * (1.0 - zt[j]);
        rh[j] = rt[j] * hp[j];
      }
      // Candidate path through U_h (r * h_prev).
      std::fill(drh.begin(), drh.end(), 0.0);
      for (std::size_t j = 0; j < H; ++j) {
        const double g = dpre[2 * H + j];
        double* gUj = gU + (2 * H + j) * H;
        const double* Uj = Uh + j * H;
        for (std::size_t k = 0; k < H; ++k) {
          gUj[k] += g * rh[k];
          drh[k] += g * Uj[k];
        }
      }
      for (std::size_t j = 0; j < H; ++j) {
        dhp[j] += drh[j] * rt[j];
        dpre[H + j] = drh[j] * hp[j] * rt[j] * (1.0 - rt[j]);
      }
      // Gate pre-activations: biases, input weights, recurrent z/r weights.
      for (std::size_t i = 0; i < 3 * H; ++i) {
        const double g = dpre[i];
        gb[i] += g;
        double* gWi = gW + i * I;
        for (std::size_t k = 0; k < I; ++k) gWi[k] += g * xt[k];
        if (need_dx) {
          const double* Wi = W + i * I;
          double* dxt = dx.data() + t * I;
          for (std::size_t k = 0; k < I; ++k) dxt[k] += g * Wi[k];
        }
      }
      for (std::size_t i = 0; i < 2 * H; ++i) {
        const double g = dpre[i];
        double* gUi = gU + i * H;
        const double* Ui = U + i * H;
        for (std::size_t k = 0; k < H; ++k) {
          gUi[k] += g * hp[k];
          dhp[k] += g * Ui[k];
        }
      }
      std::copy(dhp.begin(), dhp.end(), dh_next.begin());
    }

    if (need_dx) {
      // Input of layer li is the (masked) output of layer li-1.
      const bool drop = masks && !masks->between.empty();
      for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t j = 0; j < H; ++j) {
          const double g = dx[t * H + j];
          dout[t * H + j] = drop ? g * masks->between[li - 1][t * H + j] : g;
        }
      }
    }
  }
}

double predict(const GruModel& model, const Window& w) {
  std::vector<double> x;
  normalize_window(model, w, x);
  SequenceCache cache;
  return sigmoid(forward(model, x, w.steps(), cache, nullptr));
}

namespace {

// Loss and gradient of one window; `grad` must be zeroed by the caller.
double window_gradient(const GruModel& model, const Window& w, const BatchSpec& spec,
                       std::size_t batch_index, std::span<double> grad) {
  std::vector<double> x;
  normalize_window(model, w, x);
  DropoutMasks masks;
  const DropoutMasks* mp = nullptr;
  if (spec.dropout > 0.0) {
    masks = sample_dropout(model.shape(), w.steps(), spec.dropout, mix_seed(spec.dropout_seed, batch_index));
    mp = &masks;
  }
  SequenceCache cache;
  const double logit = forward(model, x, w.steps(), cache, mp);
  const double p = sigmoid(logit);
  backward(model, cache, mp, bce_dlogit(p, w.label, spec.pos_weight), grad);
  return bce_loss(p, w.label, spec.pos_weight);
}

double reduce(std::span<const double> losses, const std::vector<std::vector<double>>& parts,
              std::vector<double>& grad) {
  const std::size_t n = losses.size();
  std::fill(grad.begin(), grad.end(), 0.0);
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    loss += losses[i];
    const auto& g = parts[i];
    for (std::size_t k = 0; k < grad.size(); ++k) grad[k] += g[k];
  }
  const double inv = 1.0 / static_cast<double>(n);
  for (double& g : grad) g *= inv;
  return loss * inv;
}

}  // namespace

double batch_gradient_serial(const GruModel& model, std::span<const Window* const> batch,
                             const BatchSpec& spec, std::vector<double>& grad) {
  grad.assign(model.param_count(), 0.0);
  if (batch.empty()) return 0.0;
  std::vector<double> losses(batch.size());
  std::vector<std::vector<double>> parts(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    parts[i].assign(model.param_count(), 0.0);
    losses[i] = window_gradient(model, *batch[i], spec, i, parts[i]);
  }
  return reduce(losses, parts, grad);
}

double batch_gradient_parallel(const GruModel& model, std::span<const Window* const> batch,
                               const BatchSpec& spec, std::vector<double>& grad) {
  grad.assign(model.param_count(), 0.0);
  if (batch.empty()) return 0.0;
  const auto n = static_cast<std::ptrdiff_t>(batch.size());
  std::vector<double> losses(batch.size());
  std::vector<std::vector<double>> parts(batch.size());
#pragma omp parallel for schedule(dynamic, 1) if (!omp_in_parallel())
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    parts[k].assign(model.param_count(), 0.0);
    losses[k] = window_gradient(model, *batch[k], spec, k, parts[k]);
  }
  return reduce(losses, parts, grad);
}

std::vector<double> predict_serial(const GruModel& model, std::span<const Window> windows) {
  std::vector<double> out(windows.size());
  for (std::size_t i = 0; i < windows.size(); ++i) out[i] = predict(model, windows[i]);
  return out;
}

std::vector<double> predict_parallel(const GruModel& model, std::span<const Window> windows) {
  std::vector<double> out(windows.size());
  const auto n = static_cast<std::ptrdiff_t>(windows.size());
#pragma omp parallel for schedule(dynamic, 16) if (!omp_in_parallel())
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = predict(model, windows[static_cast<std::size_t>(i)]);
  }
  return out;
}

}  // namespace spoofdet::grunet
