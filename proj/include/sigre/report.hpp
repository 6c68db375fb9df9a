#ifndef SIGRE_REPORT_HPP
#define SIGRE_REPORT_HPP

#include <string>
#include <vector>

#include "sigre/config.hpp"

namespace sigre {

struct ResultRecord {
  std::string method;
  int budget = 0;
  std::uint64_t seed = 0;
  double wasserstein = 0.0;
  double mean_distance = 0.0;
  double wall_time = 0.0;  // sidecar only; kept out of the deterministic CSV
  std::string config_hash;
};

/// Deterministic CSV: method,budget,seed,wasserstein,mean_distance,config_hash
std::string records_to_csv(const std::vector<ResultRecord>& records);
std::vector<ResultRecord> records_from_csv(const std::string& text);

void save_records_csv(const std::vector<ResultRecord>& records, const std::string& path);
std::vector<ResultRecord> load_records_csv(const std::string& path);

struct ReportFiles {
  std::string summary_csv;
  std::string median_csv;
  std::string median_md;
  std::string wasserstein_svg;
  std::string mean_distance_svg;
};

/// Per-(method, budget) bootstrap-CI summary, a median table (CSV + markdown)
/// and SVG line plots with CI bands. Returns the written paths.
ReportFiles emit_report(const std::vector<ResultRecord>& records, const std::string& out_dir,
                        int bootstrap_replicates = 10000);

// sample CSV helpers (one theta per row)
std::string samples_to_csv(const std::vector<Vec>& samples);
std::vector<Vec> samples_from_csv(const std::string& text);
void save_samples_csv(const std::vector<Vec>& samples, const std::string& path);
std::vector<Vec> load_samples_csv(const std::string& path);

}  // namespace sigre

#endif
