#include "ntc/plot.hpp"

#include <algorithm>
#include <stdexcept>

#include "ntc/strutil.hpp"

namespace ntc {

namespace {

constexpr double kWidth = 800.0, kHeight = 400.0;
constexpr double kLeft = 60.0, kRight = 20.0, kTop = 20.0, kBottom = 40.0;

}  // namespace

std::string render_loss_svg(const std::vector<StepRecord>& steps) {
  if (steps.empty()) throw std::invalid_argument("plot: empty trace");

  double lo = steps[0].loss, hi = steps[0].loss;
  for (const auto& s : steps) {
    lo = std::min(lo, s.loss);
    hi = std::max(hi, s.loss);
  }
  if (hi == lo) hi = lo + 1.0;  // flat trace still renders
  const double x0 = static_cast<double>(steps.front().step);
  const double x1 = static_cast<double>(steps.back().step);
  const double xspan = x1 > x0 ? x1 - x0 : 1.0;

  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto xpix = [&](double step) { return kLeft + (step - x0) / xspan * plot_w; };
  auto ypix = [&](double loss) { return kTop + (hi - loss) / (hi - lo) * plot_h; };

  std::string svg = strprintf(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%g\" height=\"%g\" "
      "viewBox=\"0 0 %g %g\">\n",
      kWidth, kHeight, kWidth, kHeight);
  svg += strprintf(
      "<rect x=\"0\" y=\"0\" width=\"%g\" height=\"%g\" fill=\"white\"/>\n", kWidth,
      kHeight);
  // axes
  svg += strprintf(
      "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n", kLeft,
      kTop, kLeft, kHeight - kBottom);
  svg += strprintf(
      "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n", kLeft,
      kHeight - kBottom, kWidth - kRight, kHeight - kBottom);
  svg += strprintf(
      "<text x=\"%g\" y=\"%g\" font-size=\"12\" text-anchor=\"end\">%s</text>\n",
      kLeft - 6.0, kTop + 4.0, format_double(hi).c_str());
  svg += strprintf(
      "<text x=\"%g\" y=\"%g\" font-size=\"12\" text-anchor=\"end\">%s</text>\n",
      kLeft - 6.0, kHeight - kBottom + 4.0, format_double(lo).c_str());
  svg += strprintf(
      "<text x=\"%g\" y=\"%g\" font-size=\"12\" text-anchor=\"middle\">step</text>\n",
      kLeft + plot_w / 2.0, kHeight - 8.0);
  svg += strprintf(
      "<text x=\"14\" y=\"%g\" font-size=\"12\" text-anchor=\"middle\" "
      "transform=\"rotate(-90 14 %g)\">loss</text>\n",
      kTop + plot_h / 2.0, kTop + plot_h / 2.0);

  // epoch boundary ticks
  std::size_t prev_epoch = steps.front().epoch;
  for (const auto& s : steps) {
    if (s.epoch != prev_epoch) {
      const double x = xpix(static_cast<double>(s.step));
      svg += strprintf(
          "<line x1=\"%.2f\" y1=\"%g\" x2=\"%.2f\" y2=\"%g\" stroke=\"#999999\" "
          "stroke-dasharray=\"3,3\"/>\n",
          x, kTop, x, kHeight - kBottom);
      prev_epoch = s.epoch;
    }
  }

  std::string points;
  for (const auto& s : steps) {
    if (!points.empty()) points += ' ';
    points += strprintf("%.2f,%.2f", xpix(static_cast<double>(s.step)), ypix(s.loss));
  }
  svg += "<polyline fill=\"none\" stroke=\"#1f6fb2\" stroke-width=\"1.5\" points=\"" +
         points + "\"/>\n";
  svg += "</svg>\n";
  return svg;
}

}  // namespace ntc
