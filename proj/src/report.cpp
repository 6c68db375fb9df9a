#include "sigre/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "sigre/metrics.hpp"

namespace sigre {

namespace fs = std::filesystem;

namespace {

// shortest representation that round-trips; deterministic for equal inputs
std::string fmt_double(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

std::string fmt_short(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", x);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::istringstream is(line);
  std::string cell;
  while (std::getline(is, cell, ',')) cells.push_back(cell);
  return cells;
}

double median_of_sorted_copy(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size();
  return (m % 2 == 1) ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
}

}  // namespace

std::string records_to_csv(const std::vector<ResultRecord>& records) {
  std::ostringstream os;
  os << "method,budget,seed,wasserstein,mean_distance,config_hash\n";
  for (const auto& r : records) {
    os << r.method << "," << r.budget << "," << r.seed << "," << fmt_double(r.wasserstein) << ","
       << fmt_double(r.mean_distance) << "," << r.config_hash << "\n";
  }
  return os.str();
}

std::vector<ResultRecord> records_from_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  std::vector<ResultRecord> out;
  bool first = true;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (first) {
      first = false;
      if (line.rfind("method,", 0) == 0) continue;
    }
    const auto cells = split_csv_line(line);
    if (cells.size() != 6) throw InvalidArgument("records_from_csv: expected 6 columns");
    ResultRecord r;
    r.method = cells[0];
    r.budget = std::stoi(cells[1]);
    r.seed = std::stoull(cells[2]);
    r.wasserstein = std::stod(cells[3]);
    r.mean_distance = std::stod(cells[4]);
    r.config_hash = cells[5];
    out.push_back(std::move(r));
  }
  return out;
}

void save_records_csv(const std::vector<ResultRecord>& records, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error("cannot open for writing: " + path);
  f << records_to_csv(records);
}

std::vector<ResultRecord> load_records_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return records_from_csv(ss.str());
}

// --- samples CSV ---

std::string samples_to_csv(const std::vector<Vec>& samples) {
  std::ostringstream os;
  for (const auto& s : samples) {
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      if (i) os << ",";
      os << fmt_double(s[i]);
    }
    os << "\n";
  }
  return os.str();
}

std::vector<Vec> samples_from_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  std::vector<Vec> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    bool numeric = true;
    Vec v(static_cast<Eigen::Index>(cells.size()));
    for (std::size_t i = 0; i < cells.size(); ++i) {
      try {
        v[static_cast<Eigen::Index>(i)] = std::stod(cells[i]);
      } catch (const std::exception&) {
        numeric = false;
        break;
      }
    }
    if (!numeric) continue;  // header
    out.push_back(std::move(v));
  }
  if (out.empty()) throw InvalidArgument("samples_from_csv: no rows");
  return out;
}

void save_samples_csv(const std::vector<Vec>& samples, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error("cannot open for writing: " + path);
  f << samples_to_csv(samples);
}

std::vector<Vec> load_samples_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return samples_from_csv(ss.str());
}

// --- report ---

namespace {

struct CellStats {
  int n = 0;
  BootstrapCi w1;
  BootstrapCi md;
  double w1_median = 0.0;
};

struct SeriesPoint {
  int budget;
  CellStats stats;
};

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string svg_line_plot(const std::string& title, const std::string& ylabel,
                          const std::vector<std::string>& methods,
                          const std::map<std::string, std::vector<SeriesPoint>>& series,
                          bool use_w1) {
  constexpr double width = 640, height = 420;
  constexpr double ml = 70, mr = 160, mt = 40, mb = 50;
  const double pw = width - ml - mr, ph = height - mt - mb;

  double xmin = 1e300, xmax = -1e300, ymin = 0.0, ymax = -1e300;
  for (const auto& [m, pts] : series) {
    for (const auto& p : pts) {
      xmin = std::min(xmin, static_cast<double>(p.budget));
      xmax = std::max(xmax, static_cast<double>(p.budget));
      const auto& ci = use_w1 ? p.stats.w1 : p.stats.md;
      ymax = std::max(ymax, ci.high);
    }
  }
  if (!(xmax > xmin)) xmax = xmin + 1.0;
  if (!(ymax > 0.0)) ymax = 1.0;
  ymax *= 1.08;

  const auto xpix = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
  const auto ypix = [&](double y) { return mt + ph - (y - ymin) / (ymax - ymin) * ph; };

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  os << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  os << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\" "
        "font-family=\"sans-serif\">"
     << title << "</text>\n";
  // axes
  os << "<line x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\"" << ml + pw << "\" y2=\""
     << mt + ph << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << mt + ph
     << "\" stroke=\"black\"/>\n";
  // x ticks at the budgets present
  std::set<int> budgets;
  for (const auto& [m, pts] : series) {
    for (const auto& p : pts) budgets.insert(p.budget);
  }
  for (const int b : budgets) {
    const double x = xpix(b);
    os << "<line x1=\"" << x << "\" y1=\"" << mt + ph << "\" x2=\"" << x << "\" y2=\""
       << mt + ph + 5 << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << x << "\" y=\"" << mt + ph + 20
       << "\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\">" << b
       << "</text>\n";
  }
  os << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 10
     << "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\">simulation "
        "budget</text>\n";
  // y ticks
  for (int k = 0; k <= 5; ++k) {
    const double y = ymin + (ymax - ymin) * k / 5.0;
    const double py = ypix(y);
    os << "<line x1=\"" << ml - 5 << "\" y1=\"" << py << "\" x2=\"" << ml << "\" y2=\"" << py
       << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << ml - 9 << "\" y=\"" << py + 4
       << "\" text-anchor=\"end\" font-size=\"12\" font-family=\"sans-serif\">" << fmt_short(y)
       << "</text>\n";
  }
  os << "<text x=\"18\" y=\"" << mt + ph / 2
     << "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\" transform=\"rotate(-90 "
        "18 "
     << mt + ph / 2 << ")\">" << ylabel << "</text>\n";

  int color_idx = 0;
  for (const auto& method : methods) {
    const auto it = series.find(method);
    if (it == series.end()) continue;
    const auto& pts = it->second;
    const std::string color = kPalette[color_idx % 6];
    ++color_idx;
    // CI band
    std::ostringstream band;
    for (const auto& p : pts) {
      band << xpix(p.budget) << "," << ypix((use_w1 ? p.stats.w1 : p.stats.md).high) << " ";
    }
    for (auto rit = pts.rbegin(); rit != pts.rend(); ++rit) {
      band << xpix(rit->budget) << "," << ypix((use_w1 ? rit->stats.w1 : rit->stats.md).low) << " ";
    }
    os << "<polygon points=\"" << band.str() << "\" fill=\"" << color
       << "\" fill-opacity=\"0.15\" stroke=\"none\"/>\n";
    // mean line
    std::ostringstream line;
    for (const auto& p : pts) {
      line << xpix(p.budget) << "," << ypix((use_w1 ? p.stats.w1 : p.stats.md).mean) << " ";
    }
    os << "<polyline points=\"" << line.str() << "\" fill=\"none\" stroke=\"" << color
       << "\" stroke-width=\"2\"/>\n";
    for (const auto& p : pts) {
      os << "<circle cx=\"" << xpix(p.budget) << "\" cy=\""
         << ypix((use_w1 ? p.stats.w1 : p.stats.md).mean) << "\" r=\"3\" fill=\"" << color
         << "\"/>\n";
    }
  }
  // legend
  color_idx = 0;
  double ly = mt + 10;
  for (const auto& method : methods) {
    if (series.find(method) == series.end()) continue;
    const std::string color = kPalette[color_idx % 6];
    ++color_idx;
    os << "<line x1=\"" << ml + pw + 15 << "\" y1=\"" << ly << "\" x2=\"" << ml + pw + 40
       << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << ml + pw + 46 << "\" y=\"" << ly + 4
       << "\" font-size=\"12\" font-family=\"sans-serif\">" << method << "</text>\n";
    ly += 20;
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace

ReportFiles emit_report(const std::vector<ResultRecord>& records, const std::string& out_dir,
                        int bootstrap_replicates) {
  if (records.empty()) throw InvalidArgument("emit_report: no records");
  fs::create_directories(out_dir);

  // group by (method, budget), preserving first-appearance method order
  std::vector<std::string> methods;
  std::set<int> budgets;
  std::map<std::string, std::map<int, std::vector<const ResultRecord*>>> groups;
  for (const auto& r : records) {
    if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) {
      methods.push_back(r.method);
    }
    budgets.insert(r.budget);
    groups[r.method][r.budget].push_back(&r);
  }

  std::map<std::string, std::vector<SeriesPoint>> series;
  std::ostringstream summary;
  summary << "method,budget,n,w1_mean,w1_low,w1_high,w1_median,md_mean,md_low,md_high\n";
  for (const auto& method : methods) {
    for (const auto& [budget, cell] : groups[method]) {
      std::vector<double> w1s, mds;
      for (const auto* r : cell) {
        w1s.push_back(r->wasserstein);
        mds.push_back(r->mean_distance);
      }
      CellStats stats;
      stats.n = static_cast<int>(cell.size());
      stats.w1_median = median_of_sorted_copy(w1s);
      if (w1s.size() >= 2) {
        Rng rng_w(20240801), rng_m(20240802);
        stats.w1 = bootstrap_ci(w1s, 0.95, bootstrap_replicates, rng_w);
        stats.md = bootstrap_ci(mds, 0.95, bootstrap_replicates, rng_m);
      } else {  // single seed: the interval collapses to the point value
        stats.w1 = {w1s[0], w1s[0], w1s[0]};
        stats.md = {mds[0], mds[0], mds[0]};
      }
      series[method].push_back({budget, stats});
      summary << method << "," << budget << "," << stats.n << "," << fmt_double(stats.w1.mean)
              << "," << fmt_double(stats.w1.low) << "," << fmt_double(stats.w1.high) << ","
              << fmt_double(stats.w1_median) << "," << fmt_double(stats.md.mean) << ","
              << fmt_double(stats.md.low) << "," << fmt_double(stats.md.high) << "\n";
    }
  }

  ReportFiles files;
  files.summary_csv = (fs::path(out_dir) / "summary.csv").string();
  {
    std::ofstream f(files.summary_csv);
    f << summary.str();
  }

  // median table, methods as rows, budgets as columns
  std::ostringstream mcsv, mmd;
  mcsv << "method";
  mmd << "| method |";
  for (const int b : budgets) {
    mcsv << "," << b;
    mmd << " " << b << " |";
  }
  mcsv << "\n";
  mmd << "\n|---|";
  for (std::size_t i = 0; i < budgets.size(); ++i) mmd << "---|";
  mmd << "\n";
  for (const auto& method : methods) {
    mcsv << method;
    mmd << "| " << method << " |";
    for (const int b : budgets) {
      const auto& pts = series[method];
      const auto it = std::find_if(pts.begin(), pts.end(),
                                   [b](const SeriesPoint& p) { return p.budget == b; });
      if (it == pts.end()) {
        mcsv << ",";
        mmd << " - |";
      } else {
        mcsv << "," << fmt_double(it->stats.w1_median);
        mmd << " " << fmt_short(it->stats.w1_median) << " |";
      }
    }
    mcsv << "\n";
    mmd << "\n";
  }
  files.median_csv = (fs::path(out_dir) / "median_w1.csv").string();
  files.median_md = (fs::path(out_dir) / "median_w1.md").string();
  {
    std::ofstream f(files.median_csv);
    f << mcsv.str();
  }
  {
    std::ofstream f(files.median_md);
    f << mmd.str();
  }

  files.wasserstein_svg = (fs::path(out_dir) / "wasserstein.svg").string();
  {
    std::ofstream f(files.wasserstein_svg);
    f << svg_line_plot("Wasserstein distance to reference posterior", "W1", methods, series, true);
  }
  files.mean_distance_svg = (fs::path(out_dir) / "mean_distance.svg").string();
  {
    std::ofstream f(files.mean_distance_svg);
    f << svg_line_plot("Posterior-mean distance to reference", "|mean difference|", methods, series,
                       false);
  }
  return files;
}

}  // namespace sigre
