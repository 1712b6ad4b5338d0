#include <algorithm>
#include <cmath>
#include <string>

#include "fluidity/report.hpp"

namespace fluidity {

namespace {

constexpr int kWidth = 800;
constexpr int kHeight = 600;
constexpr int kLeft = 80;
constexpr int kRight = 40;
constexpr int kTop = 60;
constexpr int kBottom = 80;

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) { return fixed(v, 2); }

std::string header(const std::string& title) {
  return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
         "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(kWidth) + "\" height=\"" +
         std::to_string(kHeight) + "\" viewBox=\"0 0 " + std::to_string(kWidth) + " " + std::to_string(kHeight) +
         "\">\n"
         "<rect x=\"0\" y=\"0\" width=\"" + std::to_string(kWidth) + "\" height=\"" + std::to_string(kHeight) +
         "\" fill=\"white\"/>\n"
         "<text x=\"" + std::to_string(kWidth / 2) + "\" y=\"32\" font-family=\"sans-serif\" font-size=\"18\" "
         "text-anchor=\"middle\">" + escape(title) + "</text>\n";
}

std::string line(double x1, double y1, double x2, double y2) {
  return "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) + "\" y2=\"" + num(y2) +
         "\" stroke=\"black\" stroke-width=\"1\"/>\n";
}

std::string text(double x, double y, const std::string& s, const char* anchor = "middle", int size = 12) {
  return "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-family=\"sans-serif\" font-size=\"" +
         std::to_string(size) + "\" text-anchor=\"" + anchor + "\">" + escape(s) + "</text>\n";
}

}  // namespace

std::string histogram_svg(const LengthDistribution& dist) {
  std::string out = header("Chain length frequency: " + dist.combo.image_generator_id + " + " + dist.combo.captioner_id);
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  const double base_y = kTop + plot_h;
  const auto peak = std::max<std::int64_t>(1, *std::max_element(dist.counts.begin(), dist.counts.end()));
  const double slot = plot_w / kMaxChainSteps;

  out += line(kLeft, base_y, kLeft + plot_w, base_y);
  out += line(kLeft, kTop, kLeft, base_y);
  for (int tick = 0; tick <= 4; ++tick) {
    const double value = static_cast<double>(peak) * tick / 4.0;
    const double y = base_y - plot_h * tick / 4.0;
    out += line(kLeft - 5, y, kLeft, y);
    out += text(kLeft - 8, y + 4, fixed(value, 0), "end");
  }
  for (int bin = 1; bin <= kMaxChainSteps; ++bin) {
    const double h = plot_h * static_cast<double>(dist.count(bin)) / static_cast<double>(peak);
    const double x = kLeft + slot * (bin - 1) + slot * 0.1;
    out += "<rect x=\"" + num(x) + "\" y=\"" + num(base_y - h) + "\" width=\"" + num(slot * 0.8) + "\" height=\"" +
           num(h) + "\" fill=\"steelblue\"/>\n";
    out += text(kLeft + slot * (bin - 0.5), base_y + 18, std::to_string(bin));
  }
  out += text(kLeft + plot_w / 2, kHeight - 30, "chain length");
  out += text(kLeft - 55, kTop - 15, "chains", "start");
  out += "</svg>\n";
  return out;
}

std::string fluidity_scale_svg(const std::vector<FluidityEntry>& scale) {
  std::string out = header("Fluidity scale (KL divergence to uniform, fluid to faithful)");
  const double plot_w = kWidth - kLeft - kRight;
  const double axis_y = kTop + 40;
  // Point mass on one bin is the largest possible divergence.
  const double ceiling = std::log(static_cast<double>(kMaxChainSteps));
  out += line(kLeft, axis_y, kLeft + plot_w, axis_y);
  for (int tick = 0; tick <= 6; ++tick) {
    const double value = ceiling * tick / 6.0;
    const double x = kLeft + plot_w * tick / 6.0;
    out += line(x, axis_y - 5, x, axis_y + 5);
    out += text(x, axis_y - 10, fixed(value, 2));
  }
  const double row_h = std::min(30.0, (kHeight - axis_y - kBottom) / std::max<std::size_t>(1, scale.size()));
  for (std::size_t i = 0; i < scale.size(); ++i) {
    const double kl = std::clamp(scale[i].kl_to_uniform, 0.0, ceiling);
    const double x = kLeft + plot_w * kl / ceiling;
    const double y = axis_y + 30 + row_h * static_cast<double>(i);
    out += "<circle cx=\"" + num(x) + "\" cy=\"" + num(y) + "\" r=\"5\" fill=\"darkorange\"/>\n";
    out += line(x, axis_y, x, y);
    const bool right_half = x > kLeft + plot_w / 2;
    out += text(right_half ? x - 10 : x + 10, y + 4,
                scale[i].combo.image_generator_id + " + " + scale[i].combo.captioner_id + " (" +
                    fixed(scale[i].kl_to_uniform, 3) + ")",
                right_half ? "end" : "start", 11);
  }
  out += text(kLeft, kHeight - 30, "fluid", "start");
  out += text(kLeft + plot_w, kHeight - 30, "faithful", "end");
  out += "</svg>\n";
  return out;
}

}  // namespace fluidity
