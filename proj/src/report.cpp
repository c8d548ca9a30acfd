#include "spoofdet/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace spoofdet {

namespace {

std::string fmt(const std::optional<double>& v, const char* missing = "n/a") {
  if (!v) return missing;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", *v);
  return buf;
}

std::string pad(const std::string& s, std::size_t w) {
  return s.size() >= w ? s + " " : s + std::string(w - s.size(), ' ');
}

std::size_t name_width(const std::vector<std::string>& names) {
  std::size_t w = 14;
  for (const auto& n : names) w = std::max(w, n.size() + 2);
  return w;
}

}  // namespace

std::string format_matrix_text(const MatrixReport& r) {
  const std::size_t w = name_width(r.names);
  std::ostringstream out;
  out << "Weighted accuracy, mean of " << r.seeds << " training run(s) per row\n";
  out << pad("train \\ test", w);
  for (const auto& n : r.names) out << pad(n, w);
  out << "average\n";
  for (std::size_t i = 0; i < r.names.size(); ++i) {
    out << pad(r.names[i], w);
    for (std::size_t j = 0; j < r.names.size(); ++j) out << pad(fmt(r.cells[i][j], "failed"), w);
    out << fmt(r.row_average[i]) << "\n";
  }
  out << pad("average", w);
  for (std::size_t j = 0; j < r.names.size(); ++j) out << pad(fmt(r.column_average[j]), w);
  out << fmt(r.overall) << "\n";
  return out.str();
}

std::string format_matrix_csv(const MatrixReport& r) {
  std::ostringstream out;
  out << "train_sample";
  for (const auto& n : r.names) out << "," << n;
  out << ",average\n";
  for (std::size_t i = 0; i < r.names.size(); ++i) {
    out << r.names[i];
    for (std::size_t j = 0; j < r.names.size(); ++j) out << "," << fmt(r.cells[i][j], "failed");
    out << "," << fmt(r.row_average[i]) << "\n";
  }
  out << "average";
  for (std::size_t j = 0; j < r.names.size(); ++j) out << "," << fmt(r.column_average[j]);
  out << "," << fmt(r.overall) << "\n";
  return out.str();
}

namespace {

struct PooledRow {
  const char* label;
  std::optional<double> PooledCell::*field;
};

constexpr PooledRow kPooledRows[] = {
    {"FP", &PooledCell::fp_rate},
    {"FN", &PooledCell::fn_rate},
    {"Accuracy", &PooledCell::weighted_accuracy},
    {"Raw accuracy", &PooledCell::accuracy},
};

}  // namespace

std::string format_pooled_text(const PooledReport& r) {
  const std::size_t w = name_width(r.names);
  std::ostringstream out;
  out << "Pooled training (" << r.train_size << " train / " << r.val_size << " val windows), mean of "
      << r.seeds << " run(s); Accuracy is weighted\n";
  out << pad("", w);
  for (const auto& n : r.names) out << pad(n, w);
  out << "average\n";
  for (const auto& row : kPooledRows) {
    out << pad(row.label, w);
    for (const auto& c : r.per_sample) out << pad(fmt(c.*row.field), w);
    out << fmt(r.average.*row.field) << "\n";
  }
  return out.str();
}

std::string format_pooled_csv(const PooledReport& r) {
  std::ostringstream out;
  out << "metric";
  for (const auto& n : r.names) out << "," << n;
  out << ",average\n";
  for (const auto& row : kPooledRows) {
    out << row.label;
    for (const auto& c : r.per_sample) out << "," << fmt(c.*row.field);
    out << "," << fmt(r.average.*row.field) << "\n";
  }
  return out.str();
}

std::string format_samples_text(std::span<const SampleSummary> rows) {
  std::vector<std::string> names;
  for (const auto& s : rows) names.push_back(s.name);
  const std::size_t w = std::max<std::size_t>(name_width(names), 26);
  std::ostringstream out;
  out << pad("", w);
  for (const auto& n : names) out << pad(n, 16);
  out << "\n" << pad("Overall", w);
  for (const auto& s : rows) out << pad(std::to_string(s.overall.positives) + "/" + std::to_string(s.overall.total), 16);
  out << "\n" << pad("Overall frequency", w);
  for (const auto& s : rows) {
    char buf[32];
    const double f = s.overall.total ? 100.0 * static_cast<double>(s.overall.positives) / static_cast<double>(s.overall.total) : 0.0;
    std::snprintf(buf, sizeof buf, "%.2f%%", f);
    out << pad(buf, 16);
  }
  out << "\n" << pad("Target frequency", w);
  for (const auto& s : rows) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f%%", 100.0 * s.target_frequency);
    out << pad(buf, 16);
  }
  out << "\n" << pad("Training (down-sampled)", w);
  for (const auto& s : rows) out << pad(std::to_string(s.train.positives) + "/" + std::to_string(s.train.total), 16);
  out << "\n";
  return out.str();
}

namespace {

struct Series {
  std::vector<double> t;  // seconds relative to t0
  std::vector<double> v;
};

void panel(std::ostringstream& out, const Series& s, double x0, double x1, double top, double height,
           const char* title, const char* colour) {
  constexpr double left = 70.0;
  constexpr double width = 620.0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double v : s.v) {
    if (std::isfinite(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (!std::isfinite(lo)) lo = hi = 0.0;
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }
  const auto sx = [&](double t) { return left + (t - x0) / (x1 - x0) * width; };
  const auto sy = [&](double v) { return top + height - (v - lo) / (hi - lo) * height; };
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "<rect x=\"%.1f\" y=\"%.1f\" width=\"%.1f\" height=\"%.1f\" fill=\"none\" stroke=\"#999\"/>\n",
                left, top, width, height);
  out << buf;
  std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" font-size=\"12\">%s</text>\n", left, top - 4, title);
  out << buf;
  std::snprintf(buf, sizeof buf,
                "<text x=\"4\" y=\"%.1f\" font-size=\"10\">%.6g</text>\n<text x=\"4\" y=\"%.1f\" font-size=\"10\">%.6g</text>\n",
                top + 10, hi, top + height, lo);
  out << buf;
  out << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1\" points=\"";
  for (std::size_t i = 0; i < s.t.size(); ++i) {
    if (!std::isfinite(s.v[i])) continue;
    std::snprintf(buf, sizeof buf, "%.2f,%.2f ", sx(s.t[i]), sy(s.v[i]));
    out << buf;
  }
  out << "\"/>\n";
  std::snprintf(buf, sizeof buf,
                "<line x1=\"%.2f\" y1=\"%.1f\" x2=\"%.2f\" y2=\"%.1f\" stroke=\"red\" stroke-dasharray=\"3,2\"/>\n",
                sx(0.0), top, sx(0.0), top + height);
  out << buf;
}

}  // namespace

std::string plot_flag_svg(std::span<const FeatureFrame> frames, const SpoofingFlag& flag, std::int64_t before_ms,
                          std::int64_t after_ms) {
  Series mid;
  Series dsigma;
  Series dvol;
  for (const auto& f : frames) {
    if (f.ts < flag.t0 - before_ms) continue;
    if (f.ts > flag.t0 + after_ms) break;
    const double t = static_cast<double>(f.ts - flag.t0) / 1000.0;
    if (f.best_bid && f.best_ask) {
      mid.t.push_back(t);
      mid.v.push_back((f.best_bid->to_double() + f.best_ask->to_double()) / 2.0);
    }
    dsigma.t.push_back(t);
    dsigma.v.push_back(f.vol_variation);
    dvol.t.push_back(t);
    dvol.v.push_back(f.delta_volume.to_double());
  }
  const double x0 = -static_cast<double>(before_ms) / 1000.0;
  const double x1 = static_cast<double>(after_ms) / 1000.0;
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" height=\"520\" font-family=\"sans-serif\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"70\" y=\"18\" font-size=\"13\">" << to_string(flag.side) << " cancel of "
      << flag.cancelled_volume.to_string() << " at " << flag.price.to_string() << ", t0 = " << flag.t0
      << " (seconds relative to t0)</text>\n";
  panel(out, mid, x0, x1, 40, 130, "mid price", "#1f77b4");
  panel(out, dsigma, x0, x1, 200, 130, "volatility variation", "#2ca02c");
  panel(out, dvol, x0, x1, 360, 130, "delta volume", "#ff7f0e");
  out << "</svg>\n";
  return out.str();
}

}  // namespace spoofdet
