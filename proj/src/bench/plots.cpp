/*
 Copyright 2026 The hybridopt Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#include "hybridopt/bench/plots.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "hybridopt/envs/benchmarks.hpp"

namespace hybridopt::bench {

namespace fs = std::filesystem;

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

constexpr std::array<const char*, 10> kPalette = {"#1f77b4", "#ff7f0e", "#2ca02c", "#9467bd",
                                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22",
                                                  "#17becf", "#aec7e8"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Step of roughly span / 5 rounded to 1, 2 or 5 times a power of ten.
double nice_step(double span) {
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double f = raw / mag;
  return (f < 1.5 ? 1.0 : f < 3.5 ? 2.0 : f < 7.5 ? 5.0 : 10.0) * mag;
}

struct Bounds {
  double x0 = std::numeric_limits<double>::infinity();
  double x1 = -std::numeric_limits<double>::infinity();
  double y0 = std::numeric_limits<double>::infinity();
  double y1 = -std::numeric_limits<double>::infinity();

  void add(double x, double y) {
    if (!std::isfinite(x) || !std::isfinite(y)) return;
    x0 = std::min(x0, x);
    x1 = std::max(x1, x);
    y0 = std::min(y0, y);
    y1 = std::max(y1, y);
  }
  void finish() {
    if (!std::isfinite(x0)) {
      x0 = 0.0;
      x1 = 1.0;
      y0 = 0.0;
      y1 = 1.0;
    }
    if (x1 - x0 < 1e-12) {
      x0 -= 0.5;
      x1 += 0.5;
    }
    if (y1 - y0 < 1e-12) {
      y0 -= 0.5;
      y1 += 0.5;
    }
    const double pad = 0.03 * (y1 - y0);
    y0 -= pad;
    y1 += pad;
  }
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path.string());
  os << text;
}

std::string seed_label(const SeedResult& r) { return "seed " + std::to_string(r.seed); }

const std::string* find_artifact(const SeedResult& r, const std::string& name) {
  for (const auto& a : r.artifacts) {
    if (fs::path(a).filename() == name) return &a;
  }
  return nullptr;
}

}  // namespace

bool CsvTable::has(const std::string& name) const {
  return std::find(header.begin(), header.end(), name) != header.end();
}

std::vector<double> CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw InvalidInput("csv: no column '" + name + "'");
  const auto c = static_cast<std::size_t>(it - header.begin());
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[c]);
  return out;
}

CsvTable read_csv(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw InvalidInput("missing file " + path.string());
  CsvTable t;
  std::string line;
  if (!std::getline(is, line)) throw InvalidInput("empty csv " + path.string());
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) t.header.push_back(cell);
  }
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::size_t pos = 0;
    while (true) {
      const std::size_t comma = line.find(',', pos);
      const std::string cell =
          line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      if (cell.empty()) {
        row.push_back(std::numeric_limits<double>::quiet_NaN());
      } else {
        try {
          std::size_t used = 0;
          row.push_back(std::stod(cell, &used));
          if (used != cell.size()) throw std::invalid_argument(cell);
        } catch (const std::exception&) {
          throw InvalidInput("csv " + path.string() + ": bad number '" + cell + "'");
        }
      }
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (row.size() != t.header.size()) {
      throw InvalidInput("csv " + path.string() + ": ragged row");
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::string render_svg(const Figure& fig) {
  Bounds b;
  for (const auto& s : fig.series) {
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) b.add(s.x[i], s.y[i]);
  }
  for (const auto& g : fig.guides) {
    b.add(g.x0, g.y0);
    b.add(g.x1, g.y1);
  }
  b.finish();
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto sx = [&](double x) { return kLeft + (x - b.x0) / (b.x1 - b.x0) * pw; };
  auto sy = [&](double y) { return kTop + (b.y1 - y) / (b.y1 - b.y0) * ph; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
     << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight
     << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
     << escape(fig.title) << "</text>\n";
  os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";

  os << "<g class=\"ticks\" stroke=\"#ddd\">\n";
  const double xs = nice_step(b.x1 - b.x0);
  for (double x = std::ceil(b.x0 / xs) * xs; x <= b.x1 + 1e-9 * xs; x += xs) {
    os << "<line x1=\"" << px(sx(x)) << "\" y1=\"" << kTop << "\" x2=\"" << px(sx(x))
       << "\" y2=\"" << kTop + ph << "\"/>"
       << "<text x=\"" << px(sx(x)) << "\" y=\"" << kTop + ph + 15
       << "\" text-anchor=\"middle\" stroke=\"none\" fill=\"black\">"
       << fmt(std::abs(x) < 1e-12 * xs ? 0.0 : x) << "</text>\n";
  }
  const double ys = nice_step(b.y1 - b.y0);
  for (double y = std::ceil(b.y0 / ys) * ys; y <= b.y1 + 1e-9 * ys; y += ys) {
    os << "<line x1=\"" << kLeft << "\" y1=\"" << px(sy(y)) << "\" x2=\"" << kLeft + pw
       << "\" y2=\"" << px(sy(y)) << "\"/>"
       << "<text x=\"" << kLeft - 5 << "\" y=\"" << px(sy(y) + 4)
       << "\" text-anchor=\"end\" stroke=\"none\" fill=\"black\">"
       << fmt(std::abs(y) < 1e-12 * ys ? 0.0 : y) << "</text>\n";
  }
  os << "</g>\n";
  os << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 12
     << "\" text-anchor=\"middle\">" << escape(fig.xlabel) << "</text>\n";
  os << "<text x=\"16\" y=\"" << kTop + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << kTop + ph / 2 << ")\">" << escape(fig.ylabel) << "</text>\n";

  for (const auto& g : fig.guides) {
    os << "<line class=\"guide\" x1=\"" << px(sx(g.x0)) << "\" y1=\"" << px(sy(g.y0))
       << "\" x2=\"" << px(sx(g.x1)) << "\" y2=\"" << px(sy(g.y1))
       << "\" stroke=\"#999\" stroke-dasharray=\"2,3\"/>\n";
  }
  std::size_t color = 0;
  for (const auto& s : fig.series) {
    const char* stroke = s.reference ? "#d62728" : kPalette[color++ % kPalette.size()];
    os << "<polyline class=\"" << (s.reference ? "reference" : "series") << "\" fill=\"none\" stroke=\""
       << stroke << "\" stroke-width=\"1.5\"" << (s.reference ? " stroke-dasharray=\"6,4\"" : "")
       << " points=\"";
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      os << px(sx(s.x[i])) << ',' << px(sy(s.y[i])) << ' ';
    }
    os << "\"><title>" << escape(s.label) << "</title></polyline>\n";
  }
  // legend, top right
  double ly = kTop + 14;
  color = 0;
  for (const auto& s : fig.series) {
    const char* stroke = s.reference ? "#d62728" : kPalette[color++ % kPalette.size()];
    os << "<line x1=\"" << kLeft + pw - 110 << "\" y1=\"" << ly - 4 << "\" x2=\""
       << kLeft + pw - 90 << "\" y2=\"" << ly - 4 << "\" stroke=\"" << stroke
       << "\" stroke-width=\"2\"/><text x=\"" << kLeft + pw - 85 << "\" y=\"" << ly << "\">"
       << escape(s.label) << "</text>\n";
    ly += 14;
  }
  os << "</svg>\n";
  return os.str();
}

bool clip_line(const AffineBoundary& b, const StateVector& lo, const StateVector& hi, Guide& out) {
  if (b.normal.size() != 2) return false;
  const double n0 = b.normal[0];
  const double n1 = b.normal[1];
  std::vector<std::pair<double, double>> pts;
  auto keep = [&](double x, double y) {
    const double tol = 1e-9 * (1.0 + std::abs(x) + std::abs(y));
    if (x >= lo[0] - tol && x <= hi[0] + tol && y >= lo[1] - tol && y <= hi[1] + tol) {
      pts.emplace_back(x, y);
    }
  };
  if (std::abs(n1) > 0.0) {
    for (double x : {lo[0], hi[0]}) keep(x, -(b.offset + n0 * x) / n1);
  }
  if (std::abs(n0) > 0.0) {
    for (double y : {lo[1], hi[1]}) keep(-(b.offset + n1 * y) / n0, y);
  }
  if (pts.size() < 2) return false;
  std::sort(pts.begin(), pts.end());
  out = {pts.front().first, pts.front().second, pts.back().first, pts.back().second};
  return true;
}

PlotOutput emit_plots(const RunSummary& summary) {
  PlotOutput out;
  const envs::EnvConfig env = envs::make_env(summary.env);
  const int n = env.system.state_dim();

  struct Traj {
    std::string label;
    CsvTable table;
  };
  std::vector<Traj> trajs;
  for (const auto& r : summary.seeds) {
    if (const std::string* a = find_artifact(r, "trajectory.csv")) {
      trajs.push_back({seed_label(r), read_csv(summary.root / *a)});
    } else if (const std::string* e = find_artifact(r, "extremal.csv")) {
      CsvTable t = read_csv(summary.root / *e);
      for (auto& h : t.header) {
        if (h == "x") h = "x_1";
        if (h == "u") h = "u_1";
      }
      trajs.push_back({seed_label(r), std::move(t)});
    }
  }
  const std::string tag = summary.env + " " + std::string(method_name(summary.method));

  if (trajs.empty()) {
    out.notices.push_back("no trajectory artifacts; phase and control plots skipped");
  } else {
    Figure phase;
    phase.title = tag + ": state";
    if (n == 2) {
      phase.xlabel = "x1";
      phase.ylabel = "x2";
      for (const auto& t : trajs) {
        phase.series.push_back({t.label, t.table.column("x_1"), t.table.column("x_2")});
      }
      for (const auto& bnd : env.system.boundaries()) {
        Guide g{};
        if (clip_line(bnd, env.box.lower, env.box.upper, g)) phase.guides.push_back(g);
      }
    } else {
      phase.xlabel = "t";
      phase.ylabel = "x";
      for (const auto& t : trajs) {
        phase.series.push_back({t.label, t.table.column("t"), t.table.column("x_1")});
      }
      for (const auto& bnd : env.system.boundaries()) {
        const double s = -bnd.offset / bnd.normal[0];
        phase.guides.push_back({0.0, s, env.system.horizon(), s});
      }
    }
    const fs::path p = summary.root / "phase.svg";
    write_text(p, render_svg(phase));
    out.files.push_back(p);

    Figure control;
    control.title = tag + ": control";
    control.xlabel = "t";
    control.ylabel = "u";
    for (const auto& t : trajs) {
      if (!t.table.has("u_1")) continue;
      const std::vector<double> u = t.table.column("u_1");
      std::vector<double> tt = t.table.column("t");
      std::vector<double> uu;
      std::vector<double> ts;
      for (std::size_t i = 0; i < u.size(); ++i) {
        if (std::isfinite(u[i])) {
          ts.push_back(tt[i]);
          uu.push_back(u[i]);
        }
      }
      if (!uu.empty()) control.series.push_back({t.label, std::move(ts), std::move(uu)});
    }
    if (control.series.empty()) {
      out.notices.push_back("empty control sequence; control plot skipped");
    } else {
      const fs::path c = summary.root / "control.svg";
      write_text(c, render_svg(control));
      out.files.push_back(c);
    }
  }

  Figure cost;
  cost.title = tag + ": cost";
  cost.ylabel = "J";
  double last_x = 0.0;
  for (const auto& r : summary.seeds) {
    if (const std::string* a = find_artifact(r, "curve.csv")) {
      const CsvTable t = read_csv(summary.root / *a);
      cost.xlabel = "episode";
      cost.series.push_back({seed_label(r), t.column("episode"), t.column("eval_cost")});
    } else if (const std::string* it = find_artifact(r, "iterations.csv")) {
      const CsvTable t = read_csv(summary.root / *it);
      cost.xlabel = "iteration";
      const auto iter = t.column("iter");
      const auto j = t.column("J");
      const auto acc = t.column("accepted");
      Series s{seed_label(r), {}, {}};
      for (std::size_t i = 0; i < iter.size(); ++i) {
        if (acc[i] != 0.0) {
          s.x.push_back(iter[i]);
          s.y.push_back(j[i]);
        }
      }
      cost.series.push_back(std::move(s));
    }
  }
  for (const auto& s : cost.series) {
    if (!s.x.empty()) last_x = std::max(last_x, s.x.back());
  }
  if (cost.series.empty()) {
    out.notices.push_back("no learning or iteration curve for method " +
                          std::string(method_name(summary.method)) + "; cost plot skipped");
  } else {
    if (summary.reference) {
      cost.series.push_back({"DDP", {0.0, std::max(last_x, 1.0)},
                             {*summary.reference, *summary.reference}, true});
    }
    const fs::path p = summary.root / "cost.svg";
    write_text(p, render_svg(cost));
    out.files.push_back(p);
  }
  return out;
}

}  // namespace hybridopt::bench
