#include "grsm/report.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <boost/uuid/detail/sha1.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "grsm/config.hpp"

namespace grsm {

bool CsvRow::operator==(const CsvRow& o) const {
  const auto same = [](double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; };
  return same(snr_db, o.snr_db) && same(ber_overall, o.ber_overall) &&
         same(ber_spatial, o.ber_spatial) && same(ber_mqam, o.ber_mqam) && trials == o.trials &&
         bits_total == o.bits_total && errors_total == o.errors_total &&
         config_hash == o.config_hash;
}

CsvRow to_row(const BerRecord& r, const std::string& config_hash) {
  return {r.snr_db,         r.ber_overall(),  r.ber_spatial(),     r.ber_mqam(),
          r.counts.trials,  r.bits_total(),   r.bit_errors(),      config_hash};
}

std::vector<CsvRow> to_rows(const std::vector<BerRecord>& records, const std::string& config_hash) {
  std::vector<CsvRow> rows;
  rows.reserve(records.size());
  for (const auto& r : records) rows.push_back(to_row(r, config_hash));
  return rows;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  return fmt::format("{}", v);
}

std::string format_csv(const std::vector<BerRecord>& records, const std::string& config_hash) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const auto& row : to_rows(records, config_hash)) {
    out += fmt::format("{},{},{},{},{},{},{},{}\n", format_number(row.snr_db),
                       format_number(row.ber_overall), format_number(row.ber_spatial),
                       format_number(row.ber_mqam), row.trials, row.bits_total, row.errors_total,
                       row.config_hash);
  }
  return out;
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& s, std::size_t line_no) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw ReportError(fmt::format("csv line {}: bad number '{}'", line_no, s));
  }
  return v;
}

std::uint64_t parse_count(const std::string& s, std::size_t line_no) {
  std::size_t pos = 0;
  try {
    const auto v = std::stoull(s, &pos);
    if (pos == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw ReportError(fmt::format("csv line {}: bad count '{}'", line_no, s));
}

}  // namespace

std::vector<CsvRow> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw ReportError("csv: missing or unexpected header");
  }
  std::vector<CsvRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 8) {
      throw ReportError(fmt::format("csv line {}: expected 8 fields, got {}", line_no, f.size()));
    }
    rows.push_back({parse_double(f[0], line_no), parse_double(f[1], line_no),
                    parse_double(f[2], line_no), parse_double(f[3], line_no),
                    parse_count(f[4], line_no), parse_count(f[5], line_no),
                    parse_count(f[6], line_no), f[7]});
  }
  return rows;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw ReportError(fmt::format("{}: cannot open for writing: {}", path, std::strerror(errno)));
  }
  out << text;
  out.flush();
  if (!out) throw ReportError(fmt::format("{}: write failed", path));
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ReportError(fmt::format("{}: cannot open for reading", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_report(const std::vector<BerRecord>& records, const std::string& config_hash,
                  const std::string& path) {
  write_text_file(path, format_csv(records, config_hash));
}

std::string content_hash(const std::string& content) {
  boost::uuids::detail::sha1 sha;
  const std::string head = fmt::format("blob {}", content.size());
  sha.process_bytes(head.data(), head.size() + 1);  // include the NUL
  sha.process_bytes(content.data(), content.size());
  boost::uuids::detail::sha1::digest_type digest;
  sha.get_digest(digest);
  std::string hex;
  for (const auto word : digest) hex += fmt::format("{:08x}", word);
  return hex;
}

std::string format_manifest(const SimConfig& cfg, const SweepResult& result,
                            const ManifestInfo& info) {
  using nlohmann::ordered_json;
  ordered_json j;
  ordered_json config = ordered_json::object();
  std::istringstream canon(canonical_config(cfg));
  std::string line;
  while (std::getline(canon, line)) {
    const auto eq = line.find('=');
    config[line.substr(0, eq)] = line.substr(eq + 1);
  }
  j["config"] = config;
  j["config_hash"] = config_hash(cfg);
  j["alpha"] = result.alpha;
  j["alpha_channel_rejections"] = result.alpha_rejections;
  ordered_json points = ordered_json::array();
  for (const auto& r : result.records) {
    points.push_back({{"snr_db", r.snr_db},
                      {"trials", r.counts.trials},
                      {"spatial_bits", r.counts.spatial_bits},
                      {"spatial_errors", r.counts.spatial_errors},
                      {"mqam_bits", r.counts.mqam_bits},
                      {"mqam_errors", r.counts.mqam_errors},
                      {"channel_rejections", r.channel_rejections},
                      {"wall_time_s", r.wall_time_s}});
  }
  j["points"] = points;
  j["interrupted"] = result.interrupted;
  j["threads"] = info.threads;
  j["wall_time_s"] = info.wall_time_s;
  j["results_file"] = info.csv_path;
  j["results_blob_sha1"] = content_hash(info.csv_text);
  return j.dump(2) + "\n";
}

std::vector<PlotSeries> sweep_series(const std::vector<BerRecord>& records,
                                     const std::string& prefix) {
  std::vector<PlotSeries> s{{prefix + " overall", {}},
                            {prefix + " spatial", {}},
                            {prefix + " MQAM", {}}};
  for (const auto& r : records) {
    s[0].points.emplace_back(r.snr_db, r.ber_overall());
    s[1].points.emplace_back(r.snr_db, r.ber_spatial());
    s[2].points.emplace_back(r.snr_db, r.ber_mqam());
  }
  return s;
}

std::string format_svg_plot(const std::vector<PlotSeries>& series, const std::string& title) {
  constexpr double W = 720, H = 480, L = 70, R = 200, T = 40, B = 50;
  constexpr const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};
  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      if (y > 0 && std::isfinite(y)) {
        ymin = std::min(ymin, y);
        ymax = std::max(ymax, y);
      }
    }
  }
  if (!std::isfinite(xmin)) xmin = 0, xmax = 1;
  if (xmax == xmin) xmax = xmin + 1;
  if (!std::isfinite(ymin)) ymin = 1e-6, ymax = 1;
  const double d0 = std::floor(std::log10(ymin));
  const double d1 = std::max(d0 + 1, std::ceil(std::log10(ymax)));
  const double pw = W - L - R, ph = H - T - B;
  const auto px = [&](double x) { return L + (x - xmin) / (xmax - xmin) * pw; };
  const auto py = [&](double y) { return T + (d1 - std::log10(y)) / (d1 - d0) * ph; };

  std::string svg = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n"
      "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
      W, H, L + pw / 2, title);
  for (double d = d0; d <= d1; ++d) {
    const double y = py(std::pow(10.0, d));
    svg += fmt::format(
        "<line x1=\"{}\" y1=\"{:.2f}\" x2=\"{}\" y2=\"{:.2f}\" stroke=\"#ddd\"/>\n"
        "<text x=\"{}\" y=\"{:.2f}\" text-anchor=\"end\">1e{}</text>\n",
        L, y, L + pw, y, L - 6, y + 4, static_cast<int>(d));
  }
  const double step = (xmax - xmin) > 20 ? 5 : 1;
  for (double x = std::ceil(xmin / step) * step; x <= xmax + 1e-9; x += step) {
    svg += fmt::format(
        "<line x1=\"{:.2f}\" y1=\"{}\" x2=\"{:.2f}\" y2=\"{}\" stroke=\"#eee\"/>\n"
        "<text x=\"{:.2f}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
        px(x), T, px(x), T + ph, px(x), T + ph + 16, x);
  }
  svg += fmt::format(
      "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n"
      "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">SNR (dB)</text>\n"
      "<text transform=\"translate(18,{}) rotate(-90)\" text-anchor=\"middle\">BER</text>\n",
      L, T, pw, ph, L + pw / 2, H - 12, T + ph / 2);
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto* color = colors[i % std::size(colors)];
    std::string pts;
    std::string marks;
    for (const auto& [x, y] : series[i].points) {
      if (!(y > 0) || !std::isfinite(y)) continue;
      pts += fmt::format("{:.2f},{:.2f} ", px(x), py(y));
      marks += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"3\" fill=\"{}\"/>\n", px(x),
                           py(y), color);
    }
    if (!pts.empty()) {
      pts.pop_back();
      svg += fmt::format("<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>\n",
                         pts, color);
    }
    svg += marks;
    const double ly = T + 10 + 18 * static_cast<double>(i);
    svg += fmt::format(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\" stroke-width=\"2\"/>\n"
        "<text x=\"{}\" y=\"{}\">{}</text>\n",
        L + pw + 12, ly, L + pw + 32, ly, color, L + pw + 38, ly + 4, series[i].label);
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace grsm
