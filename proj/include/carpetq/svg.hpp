// Minimal deterministic SVG 1.1 writer for cylinders, approximate squares,
// anti-chain families and codebooks. World coordinates live in [0,1]^2 and
// are drawn with the y-axis pointing up.
#pragma once

#include "carpetq/words.hpp"

#include <cstdio>
#include <string>
#include <vector>

namespace carpetq {

class SvgWriter {
 public:
  explicit SvgWriter(double size = 1000.0) : size_(size) {
    body_ += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + fmt(size_) +
             "\" height=\"" + fmt(size_) + "\" viewBox=\"0 0 " + fmt(size_) + " " + fmt(size_) +
             "\">\n";
    body_ += "<rect x=\"0\" y=\"0\" width=\"" + fmt(size_) + "\" height=\"" + fmt(size_) +
             "\" fill=\"white\" stroke=\"black\" stroke-width=\"1\"/>\n";
  }

  void rect(const Rect& rc, const std::string& fill = "#4477aa22",
            const std::string& stroke = "#222222") {
    body_ += "<rect x=\"" + fmt(rc.x_lo * size_) + "\" y=\"" + fmt((1.0 - rc.y_hi) * size_) +
             "\" width=\"" + fmt(rc.width() * size_) + "\" height=\"" + fmt(rc.height() * size_) +
             "\" fill=\"" + fill + "\" stroke=\"" + stroke + "\" stroke-width=\"0.4\"/>\n";
  }

  void point(double x, double y, double radius = 2.0, const std::string& fill = "#cc3311") {
    body_ += "<circle cx=\"" + fmt(x * size_) + "\" cy=\"" + fmt((1.0 - y) * size_) + "\" r=\"" +
             fmt(radius) + "\" fill=\"" + fill + "\"/>\n";
  }

  void comment(const std::string& text) { body_ += "<!-- " + text + " -->\n"; }

  std::string finish() const { return body_ + "</svg>\n"; }

 private:
  static std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9f", v);
    // trim trailing zeros but keep at least one decimal
    std::string s(buf);
    while (s.size() > 1 && s.back() == '0' && s[s.size() - 2] != '.') s.pop_back();
    return s;
  }

  double size_;
  std::string body_;
};

inline std::string render_rects(const CarpetSpec& spec, const std::vector<SplitWord>& words,
                                const std::string& note) {
  SvgWriter svg;
  svg.comment(note);
  for (const auto& w : words) svg.rect(rectangle(spec, w));
  return svg.finish();
}

inline std::string render_points(const CarpetSpec& spec, const std::vector<SplitWord>& backdrop,
                                 const std::vector<std::array<double, 2>>& centers,
                                 const std::string& note) {
  SvgWriter svg;
  svg.comment(note);
  for (const auto& w : backdrop) svg.rect(rectangle(spec, w), "#4477aa11", "#888888");
  for (const auto& c : centers) svg.point(c[0], c[1]);
  return svg.finish();
}

}  // namespace carpetq
