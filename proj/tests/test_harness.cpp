#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "eyeid/error.hpp"
#include "eyeid/harness.hpp"
#include "eyeid/synthetic.hpp"
#include "oracles.hpp"

using namespace eyeid;
namespace fs = std::filesystem;

namespace {

std::vector<GazeRecording> recordings_of(const SyntheticDataset& ds) {
  std::vector<GazeRecording> out;
  for (const auto& r : ds.recordings) out.push_back(r.recording);
  return out;
}

const std::vector<GazeRecording>& small_cohort() {
  static const auto recs =
      recordings_of(generate_synthetic(separable_profiles(6, 11), 2, 30, 250, 5));
  return recs;
}

ExperimentConfig quick_config() {
  ExperimentConfig cfg;
  cfg.seeds = 3;
  return cfg;
}

}  // namespace

TEST_CASE("config keys, snapshot and validation") {
  ExperimentConfig cfg;
  apply_config_key(cfg, "vt", "27");
  apply_config_key(cfg, "mfd", "0.096");
  apply_config_key(cfg, "fusion", "0.578,0.408,0.015");
  apply_config_key(cfg, "gender", "F");
  apply_config_key(cfg, "truncate_s", "60");
  apply_config_key(cfg, "truncate_from", "end");
  CHECK(cfg.ivt.velocity_threshold_deg_s == 27);
  CHECK(cfg.fusion.w_blink == 0.015);
  CHECK(cfg.subgroup->gender == "F");

  // The snapshot is itself a valid configuration describing the same run.
  ExperimentConfig again;
  std::istringstream in(cfg.snapshot());
  for (const auto& s : parse_key_value(in))
    for (const auto& [k, v] : s.values) apply_config_key(again, k, v);
  CHECK(again.snapshot() == cfg.snapshot());

  CHECK_THROWS_AS(apply_config_key(cfg, "colour", "1"), UsageError);
  CHECK_THROWS_AS(apply_config_key(cfg, "seeds", "many"), UsageError);
  CHECK_THROWS_AS(apply_config_key(cfg, "split", "sideways"), UsageError);

  ExperimentConfig bad;
  bad.seeds = 0;
  bad.derivative_order = 9;
  bad.sg_frame_size = 14;
  CHECK(bad.problems().size() == 3);
  CHECK_THROWS_AS(bad.validate(), UsageError);
  CHECK(ExperimentConfig{}.problems().empty());
}

TEST_CASE("config file resolves the manifest next to it") {
  const fs::path dir = fs::temp_directory_path() / "eyeid_test_cfg";
  fs::create_directories(dir);
  std::ofstream(dir / "exp.ini") << "manifest = data/manifest.ini\nseeds = 4\norder = 3\n";
  const auto cfg = read_experiment_config(dir / "exp.ini");
  CHECK(cfg.manifest == dir / "data/manifest.ini");
  CHECK(cfg.seeds == 4);
  CHECK(cfg.derivative_order == 3);
  std::ofstream(dir / "bad.ini") << "seeds = 4\n[extra]\nx = 1\n";
  CHECK_THROWS(read_experiment_config(dir / "bad.ini"));
  fs::remove_all(dir);
}

TEST_CASE("single participant and memorisation") {
  const auto one = recordings_of(generate_synthetic(separable_profiles(1, 2), 2, 20, 250, 3));
  auto rep = run_experiment(one, quick_config());
  CHECK(rep.mean_accuracy == 1.0);
  CHECK(rep.predictions_per_seed == 1);

  auto cfg = quick_config();
  cfg.test_sessions = {"1"};
  rep = run_experiment(small_cohort(), cfg);
  CHECK(rep.mean_accuracy == 1.0);
}

TEST_CASE("report bookkeeping") {
  const auto rep = run_experiment(small_cohort(), quick_config());
  REQUIRE(rep.per_seed_accuracy.size() == 3);
  CHECK(rep.seeds == std::vector<std::uint64_t>{1, 2, 3});
  CHECK(rep.predictions_per_seed == 6);
  std::size_t confusion_total = 0;
  for (const auto& [k, v] : rep.confusion) confusion_total += v;
  CHECK(confusion_total == 18);
  for (double a : rep.per_seed_accuracy) {
    const double correct = a * 6.0;
    CHECK(correct == std::round(correct));
  }

  // Independent recomputation of mean and SEM from the stored list.
  const auto st = oracle::stats(rep.per_seed_accuracy);
  CHECK(rep.mean_accuracy == doctest::Approx(st.mean).epsilon(1e-15));
  CHECK(rep.sem == doctest::Approx(st.std / std::sqrt(3.0)).epsilon(1e-12));
  const auto [m, s] = mean_and_sem(rep.per_seed_accuracy);
  CHECK(m == rep.mean_accuracy);
  CHECK(s == rep.sem);
  CHECK(rep.summary_line().rfind("accuracy = ", 0) == 0);
  CHECK(rep.summary_line().find("over 3 seeds") != std::string::npos);
  CHECK(rep.fixation.used);
  CHECK(rep.saccade.used);
  CHECK(rep.blink.used);

  // Whole pipeline is deterministic.
  const auto again = run_experiment(small_cohort(), quick_config());
  CHECK(again.to_text() == rep.to_text());
  CHECK(again.to_csv() == rep.to_csv());
}

TEST_CASE("mean and SEM") {
  CHECK(mean_and_sem({0.5}) == std::pair<double, double>{0.5, 0.0});
  const auto [m, s] = mean_and_sem({0.0, 1.0});
  CHECK(m == 0.5);
  CHECK(s == doctest::Approx(0.5 / std::sqrt(2.0)));
}

TEST_CASE("truncating to the full length changes nothing") {
  auto cfg = quick_config();
  const auto base = run_experiment(small_cohort(), cfg);
  cfg.truncate_s = 30.0;
  const auto same = run_experiment(small_cohort(), cfg);
  CHECK(same.per_seed_accuracy == base.per_seed_accuracy);
  CHECK(same.confusion == base.confusion);
  cfg.truncate_s = 10.0;
  cfg.truncate_from = TruncateFrom::kEnd;
  const auto shorter = run_experiment(small_cohort(), cfg);
  CHECK(shorter.fixation.train_vectors < base.fixation.train_vectors);
}

TEST_CASE("split errors") {
  auto cfg = quick_config();
  cfg.test_sessions = {"3"};
  CHECK_THROWS_AS(run_experiment(small_cohort(), cfg), DataError);

  auto recs = small_cohort();
  recs.pop_back();  // u06 loses its test session
  CHECK_THROWS_AS(run_experiment(recs, quick_config()), DataError);

  cfg = quick_config();
  cfg.split = SplitKind::kRandomSubset;
  const auto one_each = recordings_of(generate_synthetic(separable_profiles(2, 2), 1, 20, 250, 3));
  CHECK_THROWS_AS(run_experiment(one_each, cfg), DataError);
  const auto rep = run_experiment(small_cohort(), cfg);
  CHECK(rep.predictions_per_seed == 6);
}

TEST_CASE("classifier seeds and unit grouping") {
  auto cfg = quick_config();
  cfg.use_blinks = false;
  const auto rep = run_experiment(small_cohort(), cfg);
  CHECK_FALSE(rep.blink.used);

  cfg = quick_config();
  cfg.unit = PredictionUnit::kSession;
  CHECK(run_experiment(small_cohort(), cfg).predictions_per_seed == 6);

  // Without a validity channel the blink classifier drops out.
  auto recs = small_cohort();
  for (auto& r : recs) {
    r.has_validity = false;
    for (auto& s : r.samples) s.valid = true;
  }
  const auto no_blinks = run_experiment(recs, quick_config());
  CHECK_FALSE(no_blinks.blink.used);
}

TEST_CASE("derivative-order ablation") {
  auto cfg = quick_config();
  const auto rows = ablate_derivative_orders(small_cohort(), cfg, {0, 2});
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].feature_count == 14);
  CHECK(rows[1].feature_count == 51);
  CHECK(rows[1].report.mean_accuracy >= rows[0].report.mean_accuracy);
  const auto table = ablation_table(rows);
  CHECK(table.find("51") != std::string::npos);

  const auto single = ablate_derivative_orders(small_cohort(), cfg, {5});
  REQUIRE(single.size() == 1);
  CHECK(single[0].feature_count == 105);
  CHECK_THROWS_AS(ablate_derivative_orders(small_cohort(), cfg, {6}), UsageError);
}

TEST_CASE("subgroups") {
  auto cfg = quick_config();
  cfg.subgroup = SubgroupFilter{};
  const auto all = subgroup_resample(small_cohort(), cfg);
  const auto plain = run_experiment(small_cohort(), cfg);
  CHECK(all.to_text() == plain.to_text());
  CHECK(all.to_csv() == plain.to_csv());

  cfg.subgroup->participant_count = 150;
  CHECK_THROWS_AS(subgroup_resample(small_cohort(), cfg), DataError);

  cfg.subgroup = SubgroupFilter{};
  cfg.subgroup->gender = "F";
  cfg.subgroup->participant_count = 2;
  cfg.subgroup->runs = 4;
  const auto rep = subgroup_resample(small_cohort(), cfg);
  CHECK(rep.per_seed_accuracy.size() == 12);
  CHECK(rep.predictions_per_seed == 2);
  for (const auto& [k, v] : rep.confusion) {
    const int idx = std::stoi(k.first.substr(1));
    CHECK(idx % 2 == 1);  // F participants are u01, u03, u05
  }
  const auto [m, s] = mean_and_sem(rep.per_seed_accuracy);
  CHECK(m == rep.mean_accuracy);
  CHECK(s == rep.sem);
}

TEST_CASE("low-noise cohort identifies better than a high-noise cohort") {
  auto profiles = separable_profiles(16, 21, 0.3);
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    profiles[i].noise_deg = i % 2 == 0 ? 0.003 : 0.12;
  }
  const auto recs = recordings_of(generate_synthetic(profiles, 2, 30, 250, 8));
  auto cfg = quick_config();
  cfg.subgroup = SubgroupFilter{};
  cfg.subgroup->gender = "F";
  const auto low = subgroup_resample(recs, cfg);
  cfg.subgroup->gender = "M";
  const auto high = subgroup_resample(recs, cfg);
  CHECK(low.mean_accuracy > high.mean_accuracy);
}

TEST_CASE("IVT evaluation hooks") {
  const auto cfg = quick_config();
  const auto pt = evaluate_ivt(small_cohort(), cfg, {50.0, 0.1});
  CHECK(pt.vt == 50.0);
  CHECK(pt.fixation_count == training_fixation_count(small_cohort(), cfg, 50.0));
  CHECK(pt.accuracy_mean == run_experiment(small_cohort(), cfg).mean_accuracy);
  CHECK(training_fixation_count(small_cohort(), cfg, 5.0) <
        training_fixation_count(small_cohort(), cfg, 50.0));
  const auto table = sweep_table({pt});
  CHECK(table.find("50") != std::string::npos);
}
