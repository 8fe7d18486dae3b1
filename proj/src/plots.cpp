#include "fvc/plots.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/normal.hpp>
#include <fmt/format.h>

#include "fvc/error.hpp"
#include "text_io.hpp"

namespace fvc {

namespace {

constexpr double kMarginLeft = 80.0;
constexpr double kMarginRight = 30.0;
constexpr double kMarginTop = 50.0;
constexpr double kMarginBottom = 70.0;
constexpr double kPlotWidth = kCanvasWidth - kMarginLeft - kMarginRight;
constexpr double kPlotHeight = kCanvasHeight - kMarginTop - kMarginBottom;

// DET axes span these probabilities; points outside are pinned to the edge.
constexpr double kDetMin = 0.0005;
constexpr double kDetMax = 0.6;

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                    "#9467bd", "#ff7f0e", "#8c564b"};

struct Axis {
  double lo = 0.0;
  double hi = 1.0;
};

std::string escape_xml(std::string_view s) {
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

double map_x(double v, const Axis& a) {
  return kMarginLeft + (v - a.lo) / (a.hi - a.lo) * kPlotWidth;
}

double map_y(double v, const Axis& a) {
  return kMarginTop + kPlotHeight - (v - a.lo) / (a.hi - a.lo) * kPlotHeight;
}

std::vector<double> nice_ticks(const Axis& a) {
  const double range = a.hi - a.lo;
  const double raw = range / 8.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    step = m * mag;
    if (range / step <= 8.0) break;
  }
  std::vector<double> ticks;
  for (double t = std::ceil(a.lo / step) * step; t <= a.hi + 1e-9 * step; t += step) {
    ticks.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
  }
  return ticks;
}

std::string format_tick(double v) {
  std::string s = fmt::format("{:.3f}", v);
  while (s.back() == '0') s.pop_back();
  if (s.back() == '.') s.pop_back();
  return s == "-0" ? "0" : s;
}

std::string_view dash_array(LineStyle s) {
  switch (s) {
    case LineStyle::kSolid: return "";
    case LineStyle::kDashed: return " stroke-dasharray=\"8,4\"";
    case LineStyle::kDotted: return " stroke-dasharray=\"2,3\"";
  }
  return "";
}

LineStyle parse_style(std::string_view s, std::string_view ctx) {
  if (s == "solid") return LineStyle::kSolid;
  if (s == "dashed") return LineStyle::kDashed;
  if (s == "dotted") return LineStyle::kDotted;
  throw Error(ErrorKind::kParse, fmt::format("{}: unknown line style '{}'", ctx, s));
}

PlotKind parse_kind(std::string_view s, std::string_view ctx) {
  if (s == "tippett") return PlotKind::kTippett;
  if (s == "det") return PlotKind::kDet;
  if (s == "ece") return PlotKind::kEce;
  throw Error(ErrorKind::kParse, fmt::format("{}: unknown plot kind '{}'", ctx, s));
}

class SvgWriter {
 public:
  explicit SvgWriter(std::string_view title) {
    out_ = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" "
        "viewBox=\"0 0 {0} {1}\" font-family=\"sans-serif\" font-size=\"12\">\n"
        "<rect width=\"{0}\" height=\"{1}\" fill=\"white\"/>\n"
        "<text x=\"{2:.2f}\" y=\"28\" text-anchor=\"middle\" font-size=\"16\">{3}</text>\n",
        kCanvasWidth, kCanvasHeight, kCanvasWidth / 2.0, escape_xml(title));
  }

  void frame(std::string_view x_label, std::string_view y_label) {
    out_ += fmt::format(
        "<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" "
        "fill=\"none\" stroke=\"black\"/>\n",
        kMarginLeft, kMarginTop, kPlotWidth, kPlotHeight);
    out_ += fmt::format(
        "<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">{}</text>\n",
        kMarginLeft + kPlotWidth / 2.0, kCanvasHeight - 20.0, escape_xml(x_label));
    out_ += fmt::format(
        "<text x=\"20\" y=\"{0:.2f}\" text-anchor=\"middle\" "
        "transform=\"rotate(-90 20 {0:.2f})\">{1}</text>\n",
        kMarginTop + kPlotHeight / 2.0, escape_xml(y_label));
  }

  void x_tick(double px, std::string_view label) {
    const double y0 = kMarginTop + kPlotHeight;
    out_ += fmt::format(
        "<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\" "
        "stroke=\"#dddddd\"/>\n"
        "<text x=\"{0:.2f}\" y=\"{3:.2f}\" text-anchor=\"middle\">{4}</text>\n",
        px, kMarginTop, y0, y0 + 18.0, escape_xml(label));
  }

  void y_tick(double py, std::string_view label) {
    out_ += fmt::format(
        "<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{2:.2f}\" y2=\"{1:.2f}\" "
        "stroke=\"#dddddd\"/>\n"
        "<text x=\"{3:.2f}\" y=\"{4:.2f}\" text-anchor=\"end\">{5}</text>\n",
        kMarginLeft, py, kMarginLeft + kPlotWidth, kMarginLeft - 6.0, py + 4.0,
        escape_xml(label));
  }

  void polyline(const std::vector<std::pair<double, double>>& pts, std::string_view color,
                LineStyle style) {
    if (pts.empty()) return;
    out_ += "<polyline fill=\"none\" stroke=\"";
    out_ += color;
    out_ += "\" stroke-width=\"2\"";
    out_ += dash_array(style);
    out_ += " points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i) out_ += ' ';
      out_ += fmt::format("{:.2f},{:.2f}", pts[i].first, pts[i].second);
    }
    out_ += "\"/>\n";
  }

  void legend(std::size_t index, std::string_view name, std::string_view color,
              LineStyle style) {
    const double y = kMarginTop + 16.0 + 16.0 * static_cast<double>(index);
    const double x = kMarginLeft + kPlotWidth - 190.0;
    polyline({{x, y - 4.0}, {x + 30.0, y - 4.0}}, color, style);
    out_ += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\">{}</text>\n", x + 36.0, y,
                        escape_xml(name));
  }

  void raw(std::string_view s) { out_ += s; }

  std::string finish() {
    out_ += "</svg>\n";
    return std::move(out_);
  }

 private:
  std::string out_;
};

void check_finite(const CurveSeries& s) {
  for (std::size_t i = 0; i < s.points.size(); ++i) {
    const auto& p = s.points[i];
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw Error(ErrorKind::kArgument,
                  fmt::format("series '{}' has a non-finite point", s.name));
    }
    if (i > 0 && p.x < s.points[i - 1].x) {
      throw Error(ErrorKind::kArgument,
                  fmt::format("series '{}' abscissae decrease", s.name));
    }
  }
}

std::string render_tippett_or_ece(const Figure& f) {
  Axis xa{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  double y_max = 1.0;
  for (const auto& s : f.series) {
    for (const auto& p : s.points) {
      xa.lo = std::min(xa.lo, p.x);
      xa.hi = std::max(xa.hi, p.x);
      y_max = std::max(y_max, p.y);
    }
  }
  if (!(xa.lo < xa.hi)) {
    xa = {xa.lo - 1.0, xa.lo + 1.0};
  }
  const bool tippett = f.kind == PlotKind::kTippett;
  const Axis ya{0.0, tippett ? 1.0 : y_max * 1.05};

  SvgWriter svg(f.title);
  for (double t : nice_ticks(xa)) svg.x_tick(map_x(t, xa), format_tick(t));
  for (double t : nice_ticks(ya)) svg.y_tick(map_y(t, ya), format_tick(t));
  svg.frame(tippett ? "log10(LR)" : "prior log10 odds",
            tippett ? "cumulative proportion" : "empirical cross-entropy (bits)");

  for (std::size_t si = 0; si < f.series.size(); ++si) {
    const auto& s = f.series[si];
    const std::string_view color = kPalette[(tippett ? si % 2 : si) % std::size(kPalette)];
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < s.points.size(); ++i) {
      const auto& p = s.points[i];
      // Empirical cumulative curves are constant to the right of each point.
      if (tippett && i > 0) {
        pts.emplace_back(map_x(p.x, xa), map_y(s.points[i - 1].y, ya));
      }
      pts.emplace_back(map_x(p.x, xa), map_y(p.y, ya));
    }
    svg.polyline(pts, color, s.style);
    svg.legend(si, s.name, color, s.style);
  }
  return svg.finish();
}

std::string render_det(const Figure& f) {
  const Axis axis{probit(kDetMin), probit(kDetMax)};
  const auto pin = [&](double p) {
    return std::clamp(probit(std::clamp(p, kDetMin, kDetMax)), axis.lo, axis.hi);
  };
  SvgWriter svg(f.title);
  for (double t : kDetTicks) {
    const auto label = format_tick(100.0 * t);
    svg.x_tick(map_x(probit(t), axis), label);
    svg.y_tick(map_y(probit(t), axis), label);
  }
  svg.frame("false identification rate (%)", "false rejection rate (%)");
  for (std::size_t si = 0; si < f.series.size(); ++si) {
    const auto& s = f.series[si];
    const std::string_view color = kPalette[si % std::size(kPalette)];
    std::vector<std::pair<double, double>> pts;
    for (const auto& p : s.points) {
      pts.emplace_back(map_x(pin(p.x), axis), map_y(pin(p.y), axis));
    }
    svg.polyline(pts, color, s.style);
    svg.legend(si, s.name, color, s.style);
  }
  return svg.finish();
}

std::string figure_header(const Figure& f) {
  std::string out = fmt::format("# kind={}\n# title={}\n# series=", to_string(f.kind), f.title);
  for (std::size_t i = 0; i < f.series.size(); ++i) {
    if (i) out += ';';
    out += fmt::format("{}:{}", f.series[i].name, to_string(f.series[i].style));
  }
  out += "\nseries,style,x,y\n";
  return out;
}

}  // namespace

std::string_view to_string(LineStyle s) noexcept {
  switch (s) {
    case LineStyle::kSolid: return "solid";
    case LineStyle::kDashed: return "dashed";
    case LineStyle::kDotted: return "dotted";
  }
  return "solid";
}

std::string_view to_string(PlotKind k) noexcept {
  switch (k) {
    case PlotKind::kTippett: return "tippett";
    case PlotKind::kDet: return "det";
    case PlotKind::kEce: return "ece";
  }
  return "tippett";
}

double probit(double p) {
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

std::vector<CurveSeries> tippett_data(const LRSet& lrs, double ci95) {
  if (!(ci95 >= 0.0) || !std::isfinite(ci95)) {
    throw Error(ErrorKind::kArgument, "tippett_data: ci95 must be finite and >= 0");
  }
  std::vector<double> ss, ds;
  for (const auto& t : lrs.trials) {
    (t.trial.same_speaker() ? ss : ds).push_back(t.log10_lr);
  }
  if (ss.empty() || ds.empty()) {
    throw Error(ErrorKind::kArgument, "tippett_data needs both trial classes");
  }
  std::sort(ss.begin(), ss.end());
  std::sort(ds.begin(), ds.end());
  std::vector<double> xs;
  std::merge(ss.begin(), ss.end(), ds.begin(), ds.end(), std::back_inserter(xs));
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  xs.insert(xs.begin(), xs.front() - 1.0);
  xs.push_back(xs.back() + 1.0);

  CurveSeries ss_curve{"same_speaker", LineStyle::kSolid, {}};
  CurveSeries ds_curve{"different_speakers", LineStyle::kSolid, {}};
  const double n_ss = static_cast<double>(ss.size());
  const double n_ds = static_cast<double>(ds.size());
  for (double x : xs) {
    const auto le = std::upper_bound(ss.begin(), ss.end(), x) - ss.begin();
    const auto gt = ds.end() - std::upper_bound(ds.begin(), ds.end(), x);
    ss_curve.points.push_back({x, static_cast<double>(le) / n_ss});
    ds_curve.points.push_back({x, static_cast<double>(gt) / n_ds});
  }
  const auto shifted = [](const CurveSeries& base, std::string name, double dx) {
    CurveSeries s{std::move(name), LineStyle::kDashed, base.points};
    for (auto& p : s.points) p.x += dx;
    return s;
  };
  std::vector<CurveSeries> out;
  out.push_back(ss_curve);
  out.push_back(ds_curve);
  out.push_back(shifted(ss_curve, "same_speaker_ci_low", -ci95));
  out.push_back(shifted(ds_curve, "different_speakers_ci_low", -ci95));
  out.push_back(shifted(ss_curve, "same_speaker_ci_high", ci95));
  out.push_back(shifted(ds_curve, "different_speakers_ci_high", ci95));
  return out;
}

std::optional<double> tippett_crossing(const CurveSeries& ss_curve,
                                       const CurveSeries& ds_curve) {
  if (ss_curve.points.size() != ds_curve.points.size()) {
    throw Error(ErrorKind::kArgument, "tippett_crossing: curves differ in length");
  }
  const auto& a = ss_curve.points;
  const auto& b = ds_curve.points;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].x != b[i].x) {
      throw Error(ErrorKind::kArgument, "tippett_crossing: curves differ in abscissae");
    }
    const double d0 = a[i].y - b[i].y;
    if (d0 == 0.0) return a[i].y;
    if (i + 1 < a.size()) {
      const double d1 = a[i + 1].y - b[i + 1].y;
      if (d0 < 0.0 && d1 > 0.0) {
        const double t = -d0 / (d1 - d0);
        return a[i].y + t * (a[i + 1].y - a[i].y);
      }
    }
  }
  return std::nullopt;
}

CurveSeries det_data(const LRSet& lrs) {
  std::vector<double> ss, ds;
  for (const auto& t : lrs.trials) {
    (t.trial.same_speaker() ? ss : ds).push_back(t.log10_lr);
  }
  CurveSeries s{"rocch", LineStyle::kSolid, {}};
  for (const auto& v : roc_convex_hull(ss, ds)) s.points.push_back({v.p_fa(), v.p_miss()});
  return s;
}

Figure tippett_figure(const LRSet& lrs, double ci95, std::string title) {
  return {PlotKind::kTippett, std::move(title), tippett_data(lrs, ci95)};
}

Figure det_figure(const LRSet& lrs, std::string title) {
  return {PlotKind::kDet, std::move(title), {det_data(lrs)}};
}

Figure ece_figure(std::span<const EcePoint> curve, std::string title) {
  if (curve.empty()) throw Error(ErrorKind::kArgument, "ece_figure: empty curve");
  CurveSeries actual{"actual", LineStyle::kSolid, {}};
  CurveSeries pav{"pav", LineStyle::kDashed, {}};
  CurveSeries neutral{"neutral_lr_1", LineStyle::kDotted, {}};
  for (const auto& p : curve) {
    actual.points.push_back({p.prior_log10_odds, p.ece_actual});
    pav.points.push_back({p.prior_log10_odds, p.ece_pav});
    neutral.points.push_back({p.prior_log10_odds, p.ece_neutral});
  }
  return {PlotKind::kEce, std::move(title), {actual, pav, neutral}};
}

std::string render_svg(const Figure& figure) {
  for (const auto& s : figure.series) check_finite(s);
  return figure.kind == PlotKind::kDet ? render_det(figure)
                                       : render_tippett_or_ece(figure);
}

void write_figure_csv(const Figure& figure, const std::filesystem::path& path) {
  std::string out = figure_header(figure);
  for (const auto& s : figure.series) {
    for (const auto& p : s.points) {
      out += fmt::format("{},{},{},{}\n", s.name, to_string(s.style),
                         detail::format_double(p.x), detail::format_double(p.y));
    }
  }
  detail::write_file(path, out);
}

Figure read_figure_csv(const std::filesystem::path& path) {
  const std::string text = detail::read_file(path);
  Figure f;
  bool header_seen = false;
  std::size_t line_no = 0;
  for (const auto raw : detail::split(text, '\n')) {
    ++line_no;
    const auto line = detail::trim(raw);
    const auto ctx = fmt::format("{}:{}", path.string(), line_no);
    if (line.empty()) continue;
    if (line.starts_with("# kind=")) {
      f.kind = parse_kind(line.substr(7), ctx);
      continue;
    }
    if (line.starts_with("# title=")) {
      f.title = std::string(line.substr(8));
      continue;
    }
    if (line.front() == '#') continue;
    if (!header_seen) {
      if (line != "series,style,x,y") throw Error(ErrorKind::kParse, ctx + ": bad header");
      header_seen = true;
      continue;
    }
    const auto fields = detail::split(line, ',');
    if (fields.size() != 4) throw Error(ErrorKind::kParse, ctx + ": expected 4 fields");
    const auto style = parse_style(fields[1], ctx);
    if (f.series.empty() || f.series.back().name != fields[0]) {
      f.series.push_back({std::string(fields[0]), style, {}});
    }
    f.series.back().points.push_back(
        {detail::parse_double(fields[2], ctx), detail::parse_double(fields[3], ctx)});
  }
  if (!header_seen) throw Error(ErrorKind::kParse, path.string() + ": no data header");
  return f;
}

void write_ece_csv(std::span<const EcePoint> curve, const std::filesystem::path& path) {
  std::string out =
      "# kind=ece\n# series=ece_actual:solid;ece_pav:dashed;ece_neutral:dotted\n"
      "prior_log10_odds,ece_actual,ece_pav,ece_neutral\n";
  for (const auto& p : curve) {
    out += fmt::format("{},{},{},{}\n", detail::format_double(p.prior_log10_odds),
                       detail::format_double(p.ece_actual),
                       detail::format_double(p.ece_pav),
                       detail::format_double(p.ece_neutral));
  }
  detail::write_file(path, out);
}

std::vector<EcePoint> read_ece_csv(const std::filesystem::path& path) {
  const std::string text = detail::read_file(path);
  std::vector<EcePoint> out;
  bool header_seen = false;
  std::size_t line_no = 0;
  for (const auto raw : detail::split(text, '\n')) {
    ++line_no;
    const auto line = detail::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto ctx = fmt::format("{}:{}", path.string(), line_no);
    if (!header_seen) {
      if (line != "prior_log10_odds,ece_actual,ece_pav,ece_neutral") {
        throw Error(ErrorKind::kParse, ctx + ": bad header");
      }
      header_seen = true;
      continue;
    }
    const auto f = detail::split(line, ',');
    if (f.size() != 4) throw Error(ErrorKind::kParse, ctx + ": expected 4 fields");
    out.push_back({detail::parse_double(f[0], ctx), detail::parse_double(f[1], ctx),
                   detail::parse_double(f[2], ctx), detail::parse_double(f[3], ctx)});
  }
  return out;
}

std::vector<AccuracyPrecisionRow> accuracy_precision_data(
    std::span<const SystemMetrics> reports) {
  if (reports.empty()) {
    throw Error(ErrorKind::kArgument, "accuracy-precision plot needs >= 1 report");
  }
  std::vector<AccuracyPrecisionRow> rows;
  for (const auto& r : reports) {
    rows.push_back({r.system, r.report.cllr_mean, r.report.ci95, r.report.cllr_pooled});
  }
  return rows;
}

std::string render_accuracy_precision_svg(std::span<const AccuracyPrecisionRow> rows) {
  if (rows.empty()) {
    throw Error(ErrorKind::kArgument, "accuracy-precision plot needs >= 1 row");
  }
  Axis ya{0.0, 0.0};
  for (const auto& r : rows) {
    ya.lo = std::min(ya.lo, r.cllr_mean - r.ci95);
    ya.hi = std::max(ya.hi, r.cllr_mean + r.ci95);
  }
  ya.hi = std::max(ya.hi * 1.1, 1.0);
  if (ya.lo < 0.0) ya.lo *= 1.1;
  const Axis xa{0.0, static_cast<double>(rows.size()) + 1.0};

  SvgWriter svg("Accuracy and precision");
  for (double t : nice_ticks(ya)) svg.y_tick(map_y(t, ya), format_tick(t));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    svg.x_tick(map_x(static_cast<double>(i + 1), xa), rows[i].system);
  }
  svg.frame("system", "Cllr_mean with 95% CI (log10 units)");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const double px = map_x(static_cast<double>(i + 1), xa);
    const double py = map_y(r.cllr_mean, ya);
    svg.raw(fmt::format(
        "<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\" "
        "stroke=\"black\" stroke-width=\"2\"/>\n"
        "<circle cx=\"{0:.2f}\" cy=\"{3:.2f}\" r=\"5\" fill=\"{4}\"/>\n"
        "<text x=\"{5:.2f}\" y=\"{6:.2f}\">Cllr_pooled={7:.3f}</text>\n",
        px, map_y(r.cllr_mean - r.ci95, ya), map_y(r.cllr_mean + r.ci95, ya), py,
        kPalette[i % std::size(kPalette)], px + 8.0, py - 8.0, r.cllr_pooled));
  }
  return svg.finish();
}

void write_accuracy_precision_csv(std::span<const AccuracyPrecisionRow> rows,
                                  const std::filesystem::path& path) {
  std::string out = "# kind=accuracy_precision\nsystem,cllr_mean,ci95,cllr_pooled\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{}\n", r.system, detail::format_double(r.cllr_mean),
                       detail::format_double(r.ci95), detail::format_double(r.cllr_pooled));
  }
  detail::write_file(path, out);
}

std::vector<AccuracyPrecisionRow> read_accuracy_precision_csv(
    const std::filesystem::path& path) {
  const std::string text = detail::read_file(path);
  std::vector<AccuracyPrecisionRow> rows;
  bool header_seen = false;
  std::size_t line_no = 0;
  for (const auto raw : detail::split(text, '\n')) {
    ++line_no;
    const auto line = detail::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto ctx = fmt::format("{}:{}", path.string(), line_no);
    if (!header_seen) {
      if (line != "system,cllr_mean,ci95,cllr_pooled") {
        throw Error(ErrorKind::kParse, ctx + ": bad header");
      }
      header_seen = true;
      continue;
    }
    const auto f = detail::split(line, ',');
    if (f.size() != 4) throw Error(ErrorKind::kParse, ctx + ": expected 4 fields");
    rows.push_back({std::string(f[0]), detail::parse_double(f[1], ctx),
                    detail::parse_double(f[2], ctx), detail::parse_double(f[3], ctx)});
  }
  return rows;
}

namespace {

RenderedPlot paths_for(const std::filesystem::path& dir, std::string_view stem) {
  return {dir / (std::string(stem) + ".svg"), dir / (std::string(stem) + ".csv")};
}

RenderedPlot render_figure_files(const Figure& f, const std::filesystem::path& dir,
                                 std::string_view stem) {
  const auto out = paths_for(dir, stem);
  write_figure_csv(f, out.data);
  detail::write_file(out.image, render_svg(read_figure_csv(out.data)));
  return out;
}

}  // namespace

RenderedPlot tippett_render(const LRSet& lrs, double ci95,
                            const std::filesystem::path& dir, std::string_view stem) {
  return render_figure_files(tippett_figure(lrs, ci95, std::string(stem)), dir, stem);
}

RenderedPlot det_render(const LRSet& lrs, const std::filesystem::path& dir,
                        std::string_view stem) {
  return render_figure_files(det_figure(lrs, std::string(stem)), dir, stem);
}

RenderedPlot ece_render(std::span<const EcePoint> curve,
                        const std::filesystem::path& dir, std::string_view stem) {
  for (const auto& p : curve) {
    if (p.ece_pav > p.ece_actual + 1e-9) {
      throw Error(ErrorKind::kConsistency,
                  fmt::format("ECE of PAV output exceeds actual ECE at prior {}",
                              p.prior_log10_odds));
    }
  }
  const auto out = paths_for(dir, stem);
  write_ece_csv(curve, out.data);
  detail::write_file(out.image,
                     render_svg(ece_figure(read_ece_csv(out.data), std::string(stem))));
  return out;
}

RenderedPlot accuracy_precision_render(std::span<const SystemMetrics> reports,
                                       const std::filesystem::path& dir,
                                       std::string_view stem) {
  const auto out = paths_for(dir, stem);
  write_accuracy_precision_csv(accuracy_precision_data(reports), out.data);
  detail::write_file(out.image,
                     render_accuracy_precision_svg(read_accuracy_precision_csv(out.data)));
  return out;
}

}  // namespace fvc
