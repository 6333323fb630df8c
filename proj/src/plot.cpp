#include "vtd/plot.hpp"

#include <algorithm>
#include <cmath>

#include "vtd/error.hpp"
#include "vtd/text.hpp"

namespace vtd::plot {
namespace {

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// 1, 2 or 5 times a power of ten giving roughly `target` ticks over `span`.
double nice_step(double span, int target) {
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * mag >= raw) return m * mag;
  }
  return 10.0 * mag;
}

std::string num(double v) { return text::format_fixed(v, 2); }

}  // namespace

std::string render_svg(const EcgRecord& record, std::span<const double> r_times_s, const PlotOptions& opts) {
  if (record.n_samples() == 0) throw Error(ErrorCode::InvalidRecord, "cannot plot an empty record");
  if (opts.width_px < 200 || opts.height_px < 100) throw Error(ErrorCode::InvalidConfig, "plot must be at least 200x100 px");
  const double fs = record.fs();
  const double t0 = std::clamp(opts.start_s, 0.0, record.duration_s());
  const double t1 = opts.duration_s ? std::min(record.duration_s(), t0 + *opts.duration_s) : record.duration_s();
  const auto i0 = static_cast<std::size_t>(std::ceil(t0 * fs));
  const auto i1 = std::min(record.n_samples(), static_cast<std::size_t>(std::ceil(t1 * fs)));
  if (i1 <= i0) throw Error(ErrorCode::InvalidConfig, "plot window holds no samples");
  const auto& x = record.samples();

  double lo = *std::min_element(x.begin() + static_cast<std::ptrdiff_t>(i0), x.begin() + static_cast<std::ptrdiff_t>(i1));
  double hi = *std::max_element(x.begin() + static_cast<std::ptrdiff_t>(i0), x.begin() + static_cast<std::ptrdiff_t>(i1));
  if (hi - lo < 1e-9) {
    lo -= 1.0;
    hi += 1.0;
  }
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;

  const double left = 60, right = 20, top = 30, bottom = 40;
  const double w = opts.width_px, h = opts.height_px;
  const double pw = w - left - right, ph = h - top - bottom;
  const double span_t = std::max(t1 - t0, 1.0 / fs);
  const auto px = [&](double t) { return left + (t - t0) / span_t * pw; };
  const auto py = [&](double v) { return top + (hi - v) / (hi - lo) * ph; };

  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(opts.width_px) + "\" height=\"" +
       std::to_string(opts.height_px) + "\" viewBox=\"0 0 " + std::to_string(opts.width_px) + " " +
       std::to_string(opts.height_px) + "\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  const std::string title = opts.title.empty() ? record.id() : opts.title;
  s += "<text class=\"title\" x=\"" + num(left) + "\" y=\"18\" font-family=\"sans-serif\" font-size=\"14\">" +
       escape(title) + "</text>\n";
  s += "<rect class=\"frame\" x=\"" + num(left) + "\" y=\"" + num(top) + "\" width=\"" + num(pw) + "\" height=\"" +
       num(ph) + "\" fill=\"none\" stroke=\"black\"/>\n";

  s += "<g class=\"xticks\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"middle\">\n";
  const double xs = nice_step(span_t, 10);
  for (double t = std::ceil(t0 / xs) * xs; t <= t1 + 1e-9; t += xs) {
    const double X = px(t);
    s += "<line x1=\"" + num(X) + "\" y1=\"" + num(top + ph) + "\" x2=\"" + num(X) + "\" y2=\"" + num(top + ph + 5) +
         "\" stroke=\"black\"/><text x=\"" + num(X) + "\" y=\"" + num(top + ph + 17) + "\">" + text::format_double(std::round(t * 1000.0) / 1000.0) +
         "</text>\n";
  }
  s += "</g>\n";
  s += "<g class=\"yticks\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">\n";
  const double ys = nice_step(hi - lo, 5);
  for (double v = std::ceil(lo / ys) * ys; v <= hi + 1e-12; v += ys) {
    const double Y = py(v);
    s += "<line x1=\"" + num(left - 5) + "\" y1=\"" + num(Y) + "\" x2=\"" + num(left) + "\" y2=\"" + num(Y) +
         "\" stroke=\"black\"/><text x=\"" + num(left - 8) + "\" y=\"" + num(Y + 3) + "\">" +
         text::format_double(std::round(v * 1000.0) / 1000.0) + "</text>\n";
  }
  s += "</g>\n";
  s += "<text x=\"" + num(left + pw / 2) + "\" y=\"" + num(h - 6) +
       "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">time (s)</text>\n";
  s += "<text x=\"14\" y=\"" + num(top + ph / 2) + "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\" transform=\"rotate(-90 14 " +
       num(top + ph / 2) + ")\">amplitude (mV)</text>\n";

  s += "<polyline class=\"signal\" fill=\"none\" stroke=\"#1f4e9a\" stroke-width=\"1\" points=\"";
  for (std::size_t i = i0; i < i1; ++i) {
    if (i > i0) s += ' ';
    s += num(px(static_cast<double>(i) / fs)) + ',' + num(py(x[i]));
  }
  s += "\"/>\n";

  std::vector<double> shown;
  for (double t : r_times_s) {
    if (t < t0 || t > t1) continue;
    const auto idx = std::min(record.n_samples() - 1, static_cast<std::size_t>(std::max(0L, std::lround(t * fs))));
    s += "<circle class=\"rpeak\" cx=\"" + num(px(t)) + "\" cy=\"" + num(py(x[idx])) +
         "\" r=\"3.5\" fill=\"none\" stroke=\"#c0392b\" stroke-width=\"1.5\"/>\n";
    shown.push_back(t);
  }
  if (shown.size() >= 2) {
    const double mean_rr = (shown.back() - shown.front()) / static_cast<double>(shown.size() - 1);
    s += "<text class=\"hbr\" x=\"" + num(left + pw) + "\" y=\"18\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"end\">HBR " +
         text::format_fixed(60.0 / mean_rr, 1) + " bpm</text>\n";
  }
  s += "</svg>\n";
  return s;
}

}  // namespace vtd::plot
