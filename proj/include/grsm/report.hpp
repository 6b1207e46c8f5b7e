#pragma once

// Sweep outputs: the BER CSV, a JSON run manifest and a log-scale SVG plot.

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "grsm/sim.hpp"

namespace grsm {

class ReportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kCsvHeader =
    "snr_db,ber_overall,ber_spatial,ber_mqam,trials,bits_total,errors_total,config_hash";

struct CsvRow {
  double snr_db = 0.0;
  double ber_overall = 0.0;
  double ber_spatial = 0.0;
  double ber_mqam = 0.0;
  std::uint64_t trials = 0;
  std::uint64_t bits_total = 0;
  std::uint64_t errors_total = 0;
  std::string config_hash;

  /// NaN compares equal to NaN so that empty points round-trip.
  bool operator==(const CsvRow& o) const;
};

CsvRow to_row(const BerRecord& r, const std::string& config_hash);
std::vector<CsvRow> to_rows(const std::vector<BerRecord>& records, const std::string& config_hash);

/// Shortest round-trip decimal rendering; NaN becomes "nan".
std::string format_number(double v);

std::string format_csv(const std::vector<BerRecord>& records, const std::string& config_hash);
std::vector<CsvRow> parse_csv(const std::string& text);

/// Writes `text` to `path`, throwing ReportError naming the path on failure.
void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

void write_report(const std::vector<BerRecord>& records, const std::string& config_hash,
                  const std::string& path);

/// git blob id (SHA-1 of "blob <len>\0" + content), hex.
std::string content_hash(const std::string& content);

struct ManifestInfo {
  std::string csv_path;
  std::string csv_text;
  unsigned threads = 1;
  double wall_time_s = 0.0;
};

std::string format_manifest(const SimConfig& cfg, const SweepResult& result,
                            const ManifestInfo& info);

struct PlotSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;  // (snr_db, ber); non-positive ber skipped
};

std::string format_svg_plot(const std::vector<PlotSeries>& series, const std::string& title);

/// Overall, spatial and MQAM curves of one sweep.
std::vector<PlotSeries> sweep_series(const std::vector<BerRecord>& records,
                                     const std::string& prefix);

}  // namespace grsm
