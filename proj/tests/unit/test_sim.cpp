#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <numeric>

#include "grsm/config.hpp"
#include "grsm/report.hpp"
#include "grsm/sim.hpp"

using namespace grsm;

namespace {

SimConfig smoke(unsigned m, MappingMode mode) {
  SimConfig cfg;
  cfg.modulation = m;
  cfg.mapping_mode = mode;
  cfg.channel.model = ChannelModel::RayleighIid;
  cfg.alpha_realizations = 500;
  cfg.snr_db = {0.0, 10.0};
  cfg.trials_per_point = 2000;
  cfg.target_errors = 0;
  return cfg;
}

double sample_std(const std::vector<double>& v) {
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  double s = 0;
  for (const double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / (v.size() - 1));
}

}  // namespace

TEST(Sim, NoiseVariance) {
  EXPECT_DOUBLE_EQ(noise_variance_for(0.0, 10.0, 4), 2.5);
  EXPECT_NEAR(noise_variance_for(10.0, 2.0, 2), 0.1, 1e-15);
}

TEST(Sim, ConfigDerivedQuantities) {
  SimConfig cfg;
  EXPECT_EQ(cfg.n_active(), 4u);
  cfg.modulation = 4;
  EXPECT_EQ(cfg.n_active(), 6u);
  EXPECT_NO_THROW(cfg.validate());
  cfg.compensation = Compensation::DoubleStage;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg.mapping_mode = MappingMode::Epn;
  EXPECT_NO_THROW(cfg.validate());
  cfg.spectral_efficiency = 12;  // N_a = 10 > n_rx
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(Sim, HighSnrWithoutPnIsErrorFree) {
  for (const auto mode : {MappingMode::Classical, MappingMode::Epn}) {
    auto cfg = smoke(16, mode);
    cfg.pn.mode = PnMode::Off;
    cfg.snr_db = {60.0};
    cfg.trials_per_point = 10000;
    const auto r = run_sweep(cfg);
    ASSERT_EQ(r.records.size(), 1u);
    EXPECT_EQ(r.records[0].counts.trials, 10000u);
    EXPECT_EQ(r.records[0].counts.errors(), 0u);
  }
}

TEST(Sim, CloPnHurtsOnlyTheSymbol) {
  auto cfg = smoke(16, MappingMode::Classical);
  cfg.pn = {0.1, 1.0, PnMode::Clo};
  cfg.snr_db = {60.0};
  cfg.trials_per_point = 100000;
  const auto r = run_sweep(cfg).records.at(0);
  EXPECT_EQ(r.counts.spatial_errors, 0u);
  EXPECT_GT(r.counts.mqam_errors, 0u);
}

TEST(Sim, Deterministic) {
  auto cfg = smoke(16, MappingMode::Epn);
  cfg.compensation = Compensation::SingleStage;
  const auto a = run_sweep(cfg);
  const auto b = run_sweep(cfg);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) EXPECT_EQ(a.records[i].counts, b.records[i].counts);
  EXPECT_EQ(a.alpha, b.alpha);
}

TEST(Sim, ThreadCountDoesNotChangeCounts) {
  auto cfg = smoke(4, MappingMode::Classical);
  cfg.target_errors = 50;  // early stop must also be thread independent
  cfg.trials_per_point = 5000;
  const auto a = run_sweep(cfg, {1, nullptr});
  const auto b = run_sweep(cfg, {4, nullptr});
  const auto ha = config_hash(cfg);
  EXPECT_EQ(format_csv(a.records, ha), format_csv(b.records, ha));
}

TEST(Sim, ZeroTrialsGivesNan) {
  auto cfg = smoke(16, MappingMode::Classical);
  cfg.trials_per_point = 0;
  const auto r = run_sweep(cfg);
  ASSERT_EQ(r.records.size(), 2u);
  EXPECT_EQ(r.records[0].counts.trials, 0u);
  EXPECT_TRUE(std::isnan(r.records[0].ber_overall()));
  const auto csv = format_csv(r.records, "h");
  EXPECT_NE(csv.find("0,nan,nan,nan,0,0,0,h"), std::string::npos);
}

TEST(Sim, SinglePointEqualsTrialAggregation) {
  auto cfg = smoke(16, MappingMode::Epn);
  cfg.snr_db = {6.0};
  cfg.trials_per_point = 350;
  cfg.channel_redraw_period = 100;
  const auto sweep = run_sweep(cfg);
  const auto ctx = make_point_context(cfg, 0, sweep.alpha);
  ErrorCounts manual;
  for (std::uint64_t b = 0; b < 4; ++b) {
    std::uint64_t rej = 0;
    const auto ch = block_channel(cfg, sweep.alpha, b, rej);
    for (std::uint64_t t = b * 100; t < std::min<std::uint64_t>((b + 1) * 100, 350); ++t) {
      manual += run_trial(ctx, ch, t);
    }
  }
  EXPECT_EQ(sweep.records[0].counts, manual);
}

TEST(Sim, CountsAreConsistent) {
  const auto r = run_sweep(smoke(16, MappingMode::Classical));
  for (const auto& rec : r.records) {
    EXPECT_EQ(rec.bit_errors(), rec.counts.spatial_errors + rec.counts.mqam_errors);
    EXPECT_EQ(rec.bits_total(), rec.counts.spatial_bits + rec.counts.mqam_bits);
    EXPECT_LE(rec.counts.spatial_errors, rec.counts.spatial_bits);
    EXPECT_LE(rec.counts.mqam_errors, rec.counts.mqam_bits);
    EXPECT_EQ(rec.counts.spatial_bits, rec.counts.trials * 4);
  }
}

TEST(Sim, EarlyStopOnTargetErrors) {
  auto cfg = smoke(16, MappingMode::Classical);
  cfg.snr_db = {0.0};
  cfg.trials_per_point = 100000;
  cfg.target_errors = 100;
  const auto r = run_sweep(cfg).records.at(0);
  EXPECT_GE(r.bit_errors(), 100u);
  EXPECT_LT(r.counts.trials, 100000u);
}

TEST(Sim, StandardErrorScalesWithTrials) {
  // Quadrupling the trial count halves the spread of independent estimates.
  auto cfg = smoke(4, MappingMode::Classical);
  cfg.snr_db = {0.0};
  cfg.alpha_override = 7.0;
  cfg.channel_redraw_period = 50;
  const int reps = 200;
  std::vector<double> small, large;
  for (int r = 0; r < reps; ++r) {
    cfg.master_seed = 1000 + r;
    cfg.trials_per_point = 250;
    small.push_back(run_sweep(cfg).records[0].ber_overall());
    cfg.trials_per_point = 1000;
    cfg.master_seed = 5000 + r;
    large.push_back(run_sweep(cfg).records[0].ber_overall());
  }
  EXPECT_NEAR(sample_std(small) / sample_std(large), 2.0, 0.4);
}

TEST(Sim, CancelStopsEarly) {
  auto cfg = smoke(16, MappingMode::Classical);
  std::atomic<bool> cancel{true};
  const auto r = run_sweep(cfg, {1, &cancel});
  EXPECT_TRUE(r.interrupted);
  EXPECT_TRUE(r.records.empty());
}

TEST(Report, EmptyCsvIsHeaderOnly) {
  EXPECT_EQ(format_csv({}, "x"), std::string(kCsvHeader) + "\n");
  EXPECT_TRUE(parse_csv(format_csv({}, "x")).empty());
}

TEST(Report, CsvRoundTrip) {
  auto cfg = smoke(16, MappingMode::Epn);
  cfg.snr_db = {0.0, 2.5, 7.5};
  const auto r = run_sweep(cfg);
  std::vector<BerRecord> recs = r.records;
  BerRecord empty;
  empty.snr_db = -3.25;
  recs.push_back(empty);
  const auto hash = config_hash(cfg);
  EXPECT_EQ(parse_csv(format_csv(recs, hash)), to_rows(recs, hash));
  EXPECT_THROW(parse_csv("bad,header\n"), ReportError);
  EXPECT_THROW(parse_csv(std::string(kCsvHeader) + "\n1,2,3\n"), ReportError);
}

TEST(Report, IoErrorsNamePath) {
  try {
    write_report({}, "h", "/nonexistent-dir/x/ber.csv");
    FAIL() << "expected ReportError";
  } catch (const ReportError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent-dir/x/ber.csv"), std::string::npos);
  }
}

TEST(Report, ContentHashMatchesGitBlob) {
  // `printf 'hello\n' | git hash-object --stdin`
  EXPECT_EQ(content_hash("hello\n"), "ce013625030ba8dba906f756967f9e9ca394464a");
  EXPECT_EQ(content_hash(""), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
}

TEST(Report, ManifestAndPlot) {
  auto cfg = smoke(4, MappingMode::Classical);
  const auto r = run_sweep(cfg);
  const auto csv = format_csv(r.records, config_hash(cfg));
  const auto m = format_manifest(cfg, r, {"ber.csv", csv, 1, 0.5});
  EXPECT_NE(m.find("\"alpha\""), std::string::npos);
  EXPECT_NE(m.find(config_hash(cfg)), std::string::npos);
  EXPECT_NE(m.find(content_hash(csv)), std::string::npos);
  const auto svg = format_svg_plot(sweep_series(r.records, "4QAM"), "t");
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("<polyline"), std::string::npos);
  EXPECT_NE(svg.find("4QAM overall"), std::string::npos);
}

TEST(Config, ParsesExample) {
  const auto cfg = load_config(std::string(GRSM_GOLDEN_DIR) + "/../../configs/example.yaml");
  EXPECT_EQ(cfg.modulation, 16u);
  EXPECT_EQ(cfg.mapping_mode, MappingMode::Epn);
  EXPECT_EQ(cfg.compensation, Compensation::DoubleStage);
  EXPECT_EQ(cfg.snr_db.size(), 9u);
}

TEST(Config, DefaultsAndRequiredKeys) {
  const auto cfg = parse_config("system: {modulation: 4, mapping_mode: classical}\n");
  EXPECT_EQ(cfg.modulation, 4u);
  EXPECT_EQ(cfg.channel.n_tx, 32u);
  EXPECT_EQ(cfg.pn.variance, 0.1);
  EXPECT_EQ(cfg.trials_per_point, 100000u);
  try {
    parse_config("system: {mapping_mode: epn}\n", "f.yaml");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("system.modulation"), std::string::npos);
  }
  EXPECT_THROW(parse_config("system: {modulation: 16}\n"), ConfigError);
}

TEST(Config, UnknownKeyHasLocation) {
  const std::string text =
      "system:\n  modulation: 16\n  mapping_mode: epn\nsweep:\n  trials: 5\n";
  try {
    parse_config(text, "run.yaml");
    FAIL();
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("run.yaml:5:3"), std::string::npos) << msg;
    EXPECT_NE(msg.find("sweep.trials"), std::string::npos) << msg;
  }
}

TEST(Config, BadValuesNameTheKey) {
  const auto fails_with = [](const std::string& text, const std::string& key) {
    try {
      parse_config(text);
    } catch (const ConfigError& e) {
      return std::string(e.what()).find(key) != std::string::npos;
    }
    return false;
  };
  const std::string head = "system: {modulation: 16, mapping_mode: epn}\n";
  EXPECT_TRUE(fails_with(head + "phase_noise: {variance: abc}\n", "phase_noise.variance"));
  EXPECT_TRUE(fails_with(head + "phase_noise: {mode: wiener}\n", "phase_noise.mode"));
  EXPECT_TRUE(fails_with(head + "sweep: {snr_db: 5}\n", "sweep.snr_db"));
  EXPECT_TRUE(fails_with("system: {modulation: 8, mapping_mode: epn}\n", "system.modulation"));
  EXPECT_TRUE(fails_with("system: {modulation: 16, mapping_mode: classical}\n"
                         "detector: {compensation: double}\n",
                         "detector.compensation"));
  EXPECT_TRUE(fails_with("[1, 2]\n", "mapping"));
}

TEST(Config, HashChangesWithEveryField) {
  const auto base = parse_config("system: {modulation: 16, mapping_mode: epn}\n");
  const auto h0 = config_hash(base);
  std::vector<SimConfig> variants(22, base);
  int i = 0;
  variants[i++].modulation = 4;
  variants[i++].mapping_mode = MappingMode::Classical;
  variants[i++].spectral_efficiency = 7;
  variants[i++].channel.n_tx = 16;
  variants[i++].channel.n_rx = 6;
  variants[i++].channel.model = ChannelModel::RayleighIid;
  variants[i++].channel.n_clusters = 4;
  variants[i++].channel.n_rays_per_cluster = 9;
  variants[i++].channel.angular_spread_deg = 7.0;
  variants[i++].channel.cluster_angle_range_deg = 45;
  variants[i++].channel.los_present = false;
  variants[i++].alpha_realizations = 9999;
  variants[i++].alpha_override = 2.0;
  variants[i++].pn.mode = PnMode::Independent;
  variants[i++].pn.variance = 0.2;
  variants[i++].pn.correlation = 0.5;
  variants[i++].compensation = Compensation::SingleStage;
  variants[i++].prior_active = 0.4;
  variants[i++].snr_db.push_back(45);
  variants[i++].trials_per_point = 10;
  variants[i++].target_errors = 7;
  variants[i++].channel_redraw_period = 50;
  ASSERT_EQ(i, 22);
  std::set<std::string> hashes{h0};
  for (const auto& v : variants) EXPECT_TRUE(hashes.insert(config_hash(v)).second);
  auto seeded = base;
  seeded.master_seed = 2;
  EXPECT_NE(config_hash(seeded), h0);
  EXPECT_EQ(config_hash(base).size(), 16u);
}

TEST(Config, KeyTableCoversParser) {
  for (const auto& k : config_keys()) {
    if (k.path == "system.modulation" || k.path == "system.mapping_mode") continue;
    const auto dot = k.path.find('.');
    std::string value = k.default_value;
    const std::string text = "system: {modulation: 16, mapping_mode: epn}\n" +
                             k.path.substr(0, dot) + ":\n  " + k.path.substr(dot + 1) + ": " +
                             value + "\n";
    EXPECT_NO_THROW(parse_config(text)) << k.path;
  }
}

TEST(Sim, InfiniteSnrIsNoiseless) {
  for (const auto mode : {MappingMode::Classical, MappingMode::Epn}) {
    auto cfg = smoke(4, mode);
    cfg.pn.mode = PnMode::Off;
    cfg.snr_db = {INFINITY};
    const auto ctx = make_point_context(cfg, 0, 2.0);
    EXPECT_EQ(ctx.noise_variance, 0.0);
    EXPECT_GT(ctx.detection_variance, 0.0);
    const auto r = run_sweep(cfg).records.at(0);
    EXPECT_EQ(r.bit_errors(), 0u);
    EXPECT_EQ(r.counts.trials, 2000u);
  }
  auto cfg = smoke(4, MappingMode::Classical);
  cfg.snr_db = {-INFINITY};
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}
