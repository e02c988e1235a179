#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <vector>

#include "crimepass/csv.hpp"
#include "crimepass/pipeline.hpp"

namespace crimepass::pipeline {

namespace {

struct PathPoint {
  int x;
  double estimate;
  double se;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

} // namespace

void render_effect_path_svg(const std::string& csv_path, const std::string& svg_path) {
  csv::Reader reader(csv_path);
  auto c_kind = reader.column("kind");
  auto c_l = reader.column("L");
  auto c_est = reader.column("estimate");
  auto c_se = reader.column("se");
  auto c_outcome = reader.column("outcome");
  auto c_group = reader.column("group");

  std::map<int, PathPoint> points;
  std::string title;
  std::vector<std::string> fields;
  while (reader.next(fields)) {
    if (title.empty()) title = fields[c_outcome] + " / " + fields[c_group];
    const auto& kind = fields[c_kind];
    if (kind != "E" && kind != "P") continue; // betas are not plotted
    int x = static_cast<int>(*parse_int(fields[c_l]));
    points[x] = {x, *parse_double(fields[c_est]), *parse_double(fields[c_se])};
  }
  points[-1] = {-1, 0.0, 0.0}; // baseline normalization

  const double width = 640, height = 420;
  const double ml = 70, mr = 20, mt = 40, mb = 50;
  double x_min = points.begin()->first - 0.5;
  double x_max = points.rbegin()->first + 0.5;
  double y_min = 0, y_max = 0;
  for (const auto& [x, p] : points) {
    y_min = std::min(y_min, p.estimate - 1.645 * p.se);
    y_max = std::max(y_max, p.estimate + 1.645 * p.se);
  }
  double pad = 0.15 * std::max(1e-6, y_max - y_min);
  y_min -= pad;
  y_max += pad;

  auto sx = [&](double x) { return ml + (x - x_min) / (x_max - x_min) * (width - ml - mr); };
  auto sy = [&](double y) { return height - mb - (y - y_min) / (y_max - y_min) * (height - mt - mb); };

  std::ofstream out(svg_path);
  if (!out) fail(ErrorKind::Io, "cannot write " + svg_path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  // confidence band
  std::string band = "M";
  for (auto it = points.begin(); it != points.end(); ++it)
    band += " " + num(sx(it->first)) + " " + num(sy(it->second.estimate + 1.645 * it->second.se));
  for (auto it = points.rbegin(); it != points.rend(); ++it)
    band += " L " + num(sx(it->first)) + " " + num(sy(it->second.estimate - 1.645 * it->second.se));
  band += " Z";
  out << "<path d=\"" << band << "\" fill=\"#9ecae1\" fill-opacity=\"0.45\" stroke=\"none\"/>\n";

  // zero line and event line
  out << "<line x1=\"" << num(sx(x_min)) << "\" y1=\"" << num(sy(0)) << "\" x2=\""
      << num(sx(x_max)) << "\" y2=\"" << num(sy(0))
      << "\" stroke=\"#888\" stroke-dasharray=\"4 3\"/>\n";
  out << "<line x1=\"" << num(sx(-0.5)) << "\" y1=\"" << num(sy(y_min)) << "\" x2=\""
      << num(sx(-0.5)) << "\" y2=\"" << num(sy(y_max))
      << "\" stroke=\"#bbb\" stroke-dasharray=\"2 3\"/>\n";

  // estimate path with markers
  std::string line = "M";
  bool first = true;
  for (const auto& [x, p] : points) {
    line += (first ? " " : " L ") + num(sx(x)) + " " + num(sy(p.estimate));
    first = false;
  }
  out << "<path d=\"" << line << "\" fill=\"none\" stroke=\"#08519c\" stroke-width=\"1.8\"/>\n";
  for (const auto& [x, p] : points)
    out << "<circle cx=\"" << num(sx(x)) << "\" cy=\"" << num(sy(p.estimate))
        << "\" r=\"2.6\" fill=\"#08519c\"/>\n";

  // axes
  out << "<line x1=\"" << num(ml) << "\" y1=\"" << num(height - mb) << "\" x2=\""
      << num(width - mr) << "\" y2=\"" << num(height - mb) << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << num(ml) << "\" y1=\"" << num(mt) << "\" x2=\"" << num(ml) << "\" y2=\""
      << num(height - mb) << "\" stroke=\"black\"/>\n";
  for (const auto& [x, p] : points) {
    out << "<text x=\"" << num(sx(x)) << "\" y=\"" << num(height - mb + 18)
        << "\" font-size=\"11\" text-anchor=\"middle\">" << x << "</text>\n";
  }
  for (int i = 0; i <= 4; ++i) {
    double y = y_min + (y_max - y_min) * i / 4.0;
    char label[32];
    std::snprintf(label, sizeof(label), "%.3f", y);
    out << "<text x=\"" << num(ml - 8) << "\" y=\"" << num(sy(y) + 4)
        << "\" font-size=\"11\" text-anchor=\"end\">" << label << "</text>\n";
  }
  out << "<text x=\"" << num((ml + width - mr) / 2) << "\" y=\"" << num(height - 12)
      << "\" font-size=\"12\" text-anchor=\"middle\">months since incident</text>\n";
  out << "<text x=\"" << num((ml + width - mr) / 2) << "\" y=\"" << num(mt - 14)
      << "\" font-size=\"14\" text-anchor=\"middle\">" << title
      << " (cumulative effect, 90% CI)</text>\n";
  out << "</svg>\n";
}

} // namespace crimepass::pipeline
