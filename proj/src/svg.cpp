#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "imcmap/bench.hpp"

namespace imcmap {

namespace {

std::string f2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

const char* algo_color(Algo a) {
  switch (a) {
    case Algo::LBLP: return "#1f77b4";
    case Algo::WB: return "#d62728";
    case Algo::RR: return "#2ca02c";
    case Algo::RD: return "#9467bd";
  }
  return "#000000";
}

struct Panel {
  double x0, y0, w, h;  // plot area in svg coordinates
};

void draw_axes(std::ostringstream& os, const Panel& p, const std::string& title,
               double y_min, double y_max, const std::vector<int>& x_ticks, int x_min,
               int x_max) {
  os << "<rect x='" << f2(p.x0) << "' y='" << f2(p.y0) << "' width='" << f2(p.w)
     << "' height='" << f2(p.h) << "' fill='none' stroke='#333333'/>\n";
  os << "<text x='" << f2(p.x0 + p.w / 2) << "' y='" << f2(p.y0 - 10)
     << "' text-anchor='middle' font-size='14'>" << title << "</text>\n";
  for (int t : x_ticks) {
    double fx = x_max > x_min
                    ? p.x0 + p.w * (static_cast<double>(t - x_min) / (x_max - x_min))
                    : p.x0 + p.w / 2;
    os << "<line x1='" << f2(fx) << "' y1='" << f2(p.y0 + p.h) << "' x2='" << f2(fx)
       << "' y2='" << f2(p.y0 + p.h + 4) << "' stroke='#333333'/>\n";
    os << "<text x='" << f2(fx) << "' y='" << f2(p.y0 + p.h + 18)
       << "' text-anchor='middle' font-size='11'>" << t << "</text>\n";
  }
  for (int i = 0; i <= 4; ++i) {
    double v = y_min + (y_max - y_min) * i / 4.0;
    double fy = p.y0 + p.h - p.h * (v - y_min) / (y_max - y_min);
    os << "<line x1='" << f2(p.x0 - 4) << "' y1='" << f2(fy) << "' x2='" << f2(p.x0)
       << "' y2='" << f2(fy) << "' stroke='#333333'/>\n";
    os << "<text x='" << f2(p.x0 - 8) << "' y='" << f2(fy + 4)
       << "' text-anchor='end' font-size='11'>" << f2(v) << "</text>\n";
  }
  os << "<text x='" << f2(p.x0 + p.w / 2) << "' y='" << f2(p.y0 + p.h + 36)
     << "' text-anchor='middle' font-size='12'>total PUs</text>\n";
}

}  // namespace

std::string sweep_to_svg(const std::vector<SweepRow>& rows) {
  // per algorithm: best normalized rate (max) and latency (min) per total
  // PU count; RD is represented by its median rows
  std::map<Algo, std::map<int, double>> rate_of, lat_of;
  std::set<int> totals_set;
  for (const SweepRow& r : rows) {
    if (r.algo == Algo::RD && r.seed_label != "median") continue;
    int total = r.n_imc + r.n_dpu;
    totals_set.insert(total);
    auto& rt = rate_of[r.algo];
    if (!rt.count(total) || r.norm_rate > rt[total]) rt[total] = r.norm_rate;
    auto& lt = lat_of[r.algo];
    if (!lt.count(total) || r.norm_latency < lt[total]) lt[total] = r.norm_latency;
  }

  const std::vector<int> totals(totals_set.begin(), totals_set.end());
  const int x_min = totals.empty() ? 0 : totals.front();
  const int x_max = totals.empty() ? 1 : totals.back();

  double lat_max = 1.0;
  for (const auto& [algo, pts] : lat_of)
    for (const auto& [total, v] : pts) lat_max = std::max(lat_max, v);

  const Panel rate_panel{70, 40, 360, 320};
  const Panel lat_panel{560, 40, 360, 320};

  std::ostringstream os;
  os << "<svg xmlns='http://www.w3.org/2000/svg' width='1000' height='430' "
        "viewBox='0 0 1000 430'>\n";
  os << "<rect x='0' y='0' width='1000' height='430' fill='#ffffff'/>\n";
  draw_axes(os, rate_panel, "Normalized processing rate", 0.0, 1.0, totals, x_min, x_max);
  draw_axes(os, lat_panel, "Normalized latency", 1.0, lat_max, totals, x_min, x_max);

  auto emit_series = [&](const Panel& p, const std::map<Algo, std::map<int, double>>& data,
                         double y_min, double y_max) {
    for (Algo algo : {Algo::LBLP, Algo::WB, Algo::RR, Algo::RD}) {
      auto it = data.find(algo);
      if (it == data.end() || it->second.empty()) continue;
      std::ostringstream pts;
      for (const auto& [total, v] : it->second) {
        double fx = x_max > x_min
                        ? p.x0 + p.w * (static_cast<double>(total - x_min) / (x_max - x_min))
                        : p.x0 + p.w / 2;
        double fy = p.y0 + p.h - p.h * (v - y_min) / (y_max - y_min);
        pts << f2(fx) << "," << f2(fy) << " ";
        os << "<circle cx='" << f2(fx) << "' cy='" << f2(fy) << "' r='2.5' fill='"
           << algo_color(algo) << "'/>\n";
      }
      os << "<polyline points='" << pts.str() << "' fill='none' stroke='" << algo_color(algo)
         << "' stroke-width='1.5'/>\n";
    }
  };
  emit_series(rate_panel, rate_of, 0.0, 1.0);
  emit_series(lat_panel, lat_of, 1.0, lat_max);

  // legend
  double ly = 50;
  for (Algo algo : {Algo::LBLP, Algo::WB, Algo::RR, Algo::RD}) {
    if (!rate_of.count(algo)) continue;
    os << "<line x1='445' y1='" << f2(ly) << "' x2='465' y2='" << f2(ly) << "' stroke='"
       << algo_color(algo) << "' stroke-width='2'/>\n";
    os << "<text x='470' y='" << f2(ly + 4) << "' font-size='12'>" << to_string(algo)
       << "</text>\n";
    ly += 18;
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace imcmap
