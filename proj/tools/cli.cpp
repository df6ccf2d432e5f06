#include "cli.hpp"

#include <omp.h>

#include <CLI11.hpp>
#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "eyeid/error.hpp"
#include "eyeid/harness.hpp"
#include "eyeid/io.hpp"
#include "eyeid/synthetic.hpp"

namespace eyeid::cli {

namespace fs = std::filesystem;

namespace {

struct Common {
  std::string config;
  std::string manifest;
  std::vector<std::string> sets;
  std::string out;
  int threads = 0;
  int verbosity = 0;
  std::optional<double> vt;
  std::optional<double> mfd;
  std::optional<std::size_t> seeds;
  std::optional<int> order;
};

void add_common(CLI::App* app, Common& c, bool experiment) {
  app->add_option("--out", c.out, "Output directory (default: $EYEID_OUTPUT_DIR or .)");
  app->add_option("--threads", c.threads, "Worker threads (default: all cores)")
      ->check(CLI::NonNegativeNumber);
  app->add_flag("-v,--verbose", c.verbosity, "More output");
  app->add_option("--vt", c.vt, "IVT velocity threshold in deg/s");
  app->add_option("--mfd", c.mfd, "IVT minimum fixation duration in seconds");
  if (!experiment) return;
  app->add_option("--config", c.config, "Experiment config file")->check(CLI::ExistingFile);
  app->add_option("--manifest", c.manifest, "Dataset manifest (overrides the config)");
  app->add_option("--set", c.sets, "Config override key=value (repeatable)");
  app->add_option("--seeds", c.seeds, "Number of seeds (default 50)");
  app->add_option("--order", c.order, "Highest derivative order 0..5");
}

ExperimentConfig build_config(const Common& c) {
  ExperimentConfig cfg = c.config.empty() ? ExperimentConfig{} : read_experiment_config(c.config);
  if (!c.manifest.empty()) cfg.manifest = c.manifest;
  for (const auto& kv : c.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
    apply_config_key(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (c.vt) cfg.ivt.velocity_threshold_deg_s = *c.vt;
  if (c.mfd) cfg.ivt.min_fixation_duration_s = *c.mfd;
  if (c.seeds) cfg.seeds = *c.seeds;
  if (c.order) cfg.derivative_order = *c.order;
  if (cfg.manifest.empty()) throw UsageError("no dataset: pass --manifest or set it in --config");
  cfg.validate();
  return cfg;
}

fs::path output_dir(const Common& c) {
  fs::path dir = ".";
  if (!c.out.empty()) {
    dir = c.out;
  } else if (const char* env = std::getenv("EYEID_OUTPUT_DIR"); env && *env) {
    dir = env;
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f || !(f << text)) throw DataError("cannot write " + path.string());
}

template <typename Fn>
void write_with(const fs::path& path, Fn&& fn) {
  std::ostringstream ss;
  fn(ss);
  write_file(path, ss.str());
}

std::vector<GazeRecording> load(const ExperimentConfig& cfg) {
  return load_dataset(read_manifest(cfg.manifest));
}

std::vector<int> parse_orders(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("--orders expects a comma-separated list of integers");
    }
  }
  return out;
}

CoordinateSpace parse_space(const std::string& s) {
  return s == "pixels" ? CoordinateSpace::kPixels : CoordinateSpace::kDegrees;
}

void write_normalizer(const Normalizer& n, std::ostream& out) {
  out << "column,mean,scale,constant\n";
  for (std::size_t i = 0; i < n.mean.size(); ++i) {
    const bool constant =
        std::find(n.constant_columns.begin(), n.constant_columns.end(), i) != n.constant_columns.end();
    out << i << ',' << format_number(n.mean[i]) << ',' << format_number(n.scale[i]) << ','
        << (constant ? 1 : 0) << '\n';
  }
}

int dispatch(CLI::App& app, const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err) {
  app.require_subcommand(1);

  // convert
  Common convert_c;
  std::string convert_in, convert_to_file, convert_from = "pixels", convert_to = "degrees";
  double convert_rate = 250.0;
  ScreenGeometry convert_geom;
  auto* convert = app.add_subcommand("convert", "Convert a recording between pixels and degrees");
  convert->add_option("input", convert_in, "Canonical recording CSV")->required();
  convert->add_option("output", convert_to_file, "Output CSV")->required();
  convert->add_option("--from", convert_from, "Input space")
      ->check(CLI::IsMember({"pixels", "degrees"}));
  convert->add_option("--to", convert_to, "Output space")
      ->check(CLI::IsMember({"pixels", "degrees"}));
  convert->add_option("--rate", convert_rate, "Sample rate in Hz");
  convert->add_option("--distance-mm", convert_geom.distance_mm, "Eye-screen distance");
  convert->add_option("--width-mm", convert_geom.width_mm, "Screen width");
  convert->add_option("--height-mm", convert_geom.height_mm, "Screen height");
  convert->add_option("--width-px", convert_geom.width_px, "Screen width in pixels");
  convert->add_option("--height-px", convert_geom.height_px, "Screen height in pixels");

  // segment
  Common seg_c;
  std::string seg_in, seg_space = "degrees";
  double seg_rate = 250.0;
  int seg_sg_order = 6, seg_sg_frame = 15;
  auto* segment = app.add_subcommand("segment", "IVT segmentation of one recording");
  segment->add_option("input", seg_in, "Canonical recording CSV")->required();
  segment->add_option("--rate", seg_rate, "Sample rate in Hz");
  segment->add_option("--space", seg_space, "Coordinate space of the CSV")
      ->check(CLI::IsMember({"pixels", "degrees"}));
  segment->add_option("--sg-order", seg_sg_order, "Savitzky-Golay polynomial order");
  segment->add_option("--sg-frame", seg_sg_frame, "Savitzky-Golay frame size");
  add_common(segment, seg_c, false);

  Common extract_c, train_c, eval_c, sweep_c, tune_c, ablate_c;
  auto* extract = app.add_subcommand("extract", "Feature matrices for every recording");
  add_common(extract, extract_c, true);

  std::optional<std::uint64_t> train_seed;
  auto* train = app.add_subcommand("train", "Train the classifiers on the train split");
  add_common(train, train_c, true);
  train->add_option("--seed", train_seed, "Training seed (default: seed_base)");

  auto* evaluate = app.add_subcommand("evaluate", "Multi-seed identification experiment");
  add_common(evaluate, eval_c, true);

  std::string sweep_stage = "vt";
  std::size_t sweep_neighborhood = 3;
  SweepPlan plan;
  auto* sweep = app.add_subcommand("sweep", "IVT parameter sweep");
  add_common(sweep, sweep_c, true);
  sweep->add_option("--stage", sweep_stage, "vt, mfd or both")
      ->check(CLI::IsMember({"vt", "mfd", "both"}));
  sweep->add_option("--vt-min", plan.vt_min, "Lowest VT in deg/s");
  sweep->add_option("--vt-max", plan.vt_max, "Highest VT in deg/s");
  sweep->add_option("--vt-coarse", plan.vt_coarse_step, "Coarse VT step");
  sweep->add_option("--vt-fine", plan.vt_fine_step, "Fine VT step");
  sweep->add_option("--mfd-min", plan.mfd_min, "Lowest MFD in seconds");
  sweep->add_option("--mfd-max", plan.mfd_max, "Highest MFD in seconds");
  sweep->add_option("--mfd-coarse", plan.mfd_coarse_step, "Coarse MFD step");
  sweep->add_option("--mfd-fine", plan.mfd_fine_step, "Fine MFD step");
  sweep->add_option("--stage1-mfd", plan.stage1_mfd, "MFD held fixed during the VT stage");
  sweep->add_option("--stage2-vt", plan.stage2_vt, "VT used when only the MFD stage runs");
  sweep->add_option("--neighborhood", sweep_neighborhood,
                    "Fine steps around the fixation-count peak");

  auto* tune = app.add_subcommand("tune-weights", "Nelder-Mead search for fusion weights");
  add_common(tune, tune_c, true);

  std::string ablate_orders = "0,1,2,3,4,5";
  auto* ablate = app.add_subcommand("ablate", "Derivative-order ablation");
  add_common(ablate, ablate_c, true);
  ablate->add_option("--orders", ablate_orders, "Comma-separated derivative orders");

  Common synth_c;
  std::size_t synth_users = 20;
  std::uint64_t synth_seed = 7;
  int synth_sessions = 2;
  double synth_duration = 60.0, synth_rate = 250.0, synth_spread = 1.0;
  auto* synth = app.add_subcommand("synth", "Write a synthetic dataset");
  synth->add_option("--users", synth_users, "Number of users")->check(CLI::PositiveNumber);
  synth->add_option("--seed", synth_seed, "Generator seed");
  synth->add_option("--sessions", synth_sessions, "Sessions per user")->check(CLI::PositiveNumber);
  synth->add_option("--duration", synth_duration, "Seconds per recording");
  synth->add_option("--rate", synth_rate, "Sample rate in Hz");
  synth->add_option("--spread", synth_spread, "Between-user parameter spread in (0, 1]");
  synth->add_option("--out", synth_c.out, "Output directory (default: $EYEID_OUTPUT_DIR or .)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  auto set_threads = [](const Common& c) {
    if (c.threads > 0) omp_set_num_threads(c.threads);
  };

  if (*convert) {
    std::ifstream in(convert_in);
    if (!in) throw DataError("cannot open " + convert_in);
    GazeRecording rec;
    rec.samples = read_recording_csv(in);
    rec.sample_rate_hz = convert_rate;
    rec.geometry = convert_geom;
    rec.space = parse_space(convert_from);
    rec.validate();
    const GazeRecording result =
        convert_to == "pixels" ? to_pixels(rec) : to_degrees(rec);
    write_with(convert_to_file, [&](std::ostream& o) { write_recording_csv(result, o); });
    out << "converted " << result.samples.size() << " samples to " << convert_to << "\n";
    return kOk;
  }

  if (*segment) {
    set_threads(seg_c);
    IvtParams ivt;
    if (seg_c.vt) ivt.velocity_threshold_deg_s = *seg_c.vt;
    if (seg_c.mfd) ivt.min_fixation_duration_s = *seg_c.mfd;
    ivt.validate();
    std::ifstream in(seg_in);
    if (!in) throw DataError("cannot open " + seg_in);
    GazeRecording rec;
    rec.samples = read_recording_csv(in);
    rec.sample_rate_hz = seg_rate;
    rec.space = parse_space(seg_space);
    rec.has_validity = true;
    const SegmentedRecording s = segment_recording(rec, ivt, {}, seg_sg_order, seg_sg_frame);
    const fs::path dir = output_dir(seg_c);
    std::vector<Segment> all = s.segments;
    for (auto& seg : all) {
      seg.start_index += s.trimmed_leading;
      seg.end_index += s.trimmed_leading;
    }
    all.insert(all.end(), s.blinks.begin(), s.blinks.end());
    std::stable_sort(all.begin(), all.end(),
                     [](const Segment& a, const Segment& b) { return a.start_index < b.start_index; });
    write_with(dir / "segments.csv", [&](std::ostream& o) { write_segment_dump(all, o); });
    out << "fixations=" << count_kind(s.segments, SegmentKind::kFixation)
        << " saccades=" << count_kind(s.segments, SegmentKind::kSaccade)
        << " blinks=" << s.blinks.size() << "\n";
    return kOk;
  }

  if (*synth) {
    const fs::path dir = output_dir(synth_c);
    const auto profiles = separable_profiles(synth_users, synth_seed, synth_spread);
    const auto ds = generate_synthetic(profiles, synth_sessions, synth_duration, synth_rate,
                                       synth_seed, dir);
    std::ostringstream snap;
    snap << "users = " << synth_users << "\nseed = " << synth_seed
         << "\nsessions = " << synth_sessions << "\nduration_s = " << format_number(synth_duration)
         << "\nrate_hz = " << format_number(synth_rate)
         << "\nspread = " << format_number(synth_spread) << "\n";
    write_file(dir / "synth.ini", snap.str());
    out << "wrote " << ds.recordings.size() << " recordings and manifest.ini to " << dir.string()
        << "\n";
    return kOk;
  }

  if (*extract) {
    set_threads(extract_c);
    const ExperimentConfig cfg = build_config(extract_c);
    const fs::path dir = output_dir(extract_c);
    write_file(dir / "config.ini", cfg.snapshot());
    const auto prepared = prepare_all(load(cfg), cfg);
    std::vector<FeatureVector> fix, sac, blink;
    for (const auto& p : prepared) {
      fix.insert(fix.end(), p.fixations.begin(), p.fixations.end());
      sac.insert(sac.end(), p.saccades.begin(), p.saccades.end());
      blink.insert(blink.end(), p.blinks.begin(), p.blinks.end());
    }
    const auto schema = FeatureSchema::for_order(cfg.derivative_order);
    write_with(dir / "fixation_features.csv",
               [&](std::ostream& o) { write_feature_matrix(fix, schema, o); });
    write_with(dir / "saccade_features.csv",
               [&](std::ostream& o) { write_feature_matrix(sac, schema, o); });
    write_with(dir / "blink_features.csv",
               [&](std::ostream& o) { write_feature_matrix(blink, FeatureSchema::blink(), o); });
    out << "fixations=" << fix.size() << " saccades=" << sac.size() << " blinks=" << blink.size()
        << " features=" << schema.feature_count() << "\n";
    return kOk;
  }

  if (*train) {
    set_threads(train_c);
    const ExperimentConfig cfg = build_config(train_c);
    const fs::path dir = output_dir(train_c);
    write_file(dir / "config.ini", cfg.snapshot());
    const auto models = train_models(prepare_all(load(cfg), cfg), cfg, train_seed.value_or(cfg.seed_base));
    const std::pair<const char*, std::pair<const std::optional<RbfnModel>*, const Normalizer*>> parts[] = {
        {"fixation", {&models.fixation, &models.fixation_norm}},
        {"saccade", {&models.saccade, &models.saccade_norm}},
        {"blink", {&models.blink, &models.blink_norm}}};
    for (const auto& [name, part] : parts) {
      const auto& [model, norm] = part;
      if (!*model) {
        out << name << ": no training data\n";
        continue;
      }
      write_with(dir / (std::string(name) + ".model"), [&](std::ostream& o) { save_model(**model, o); });
      write_with(dir / (std::string(name) + "_normalizer.csv"),
                 [&](std::ostream& o) { write_normalizer(*norm, o); });
      out << name << ": " << (*model)->centers.rows() << " centers, "
          << (*model)->class_count() << " classes\n";
    }
    return kOk;
  }

  if (*evaluate || *tune) {
    const Common& c = *evaluate ? eval_c : tune_c;
    set_threads(c);
    ExperimentConfig cfg = build_config(c);
    if (*tune) cfg.optimize_fusion = true;
    const fs::path dir = output_dir(c);
    write_file(dir / "config.ini", cfg.snapshot());
    const auto recordings = load(cfg);
    const ExperimentReport rep =
        cfg.subgroup ? subgroup_resample(recordings, cfg) : run_experiment(recordings, cfg);
    write_file(dir / "report.txt", rep.to_text());
    write_file(dir / "report.csv", rep.to_csv());
    if (rep.tuning) {
      std::ostringstream w;
      w << "w_fix = " << format_number(rep.tuning->weights.w_fix)
        << "\nw_sac = " << format_number(rep.tuning->weights.w_sac)
        << "\nw_blink = " << format_number(rep.tuning->weights.w_blink)
        << "\ninitial_accuracy = " << format_number(rep.tuning->initial_accuracy)
        << "\ntuned_accuracy = " << format_number(rep.tuning->accuracy) << "\n";
      write_file(dir / "weights.ini", w.str());
      out << "initial accuracy = " << format_number(rep.tuning->initial_accuracy)
          << ", tuned accuracy = " << format_number(rep.tuning->accuracy) << "\n";
      out << "weights = " << format_number(rep.weights.w_fix) << ","
          << format_number(rep.weights.w_sac) << "," << format_number(rep.weights.w_blink) << "\n";
    }
    if (c.verbosity > 0) out << rep.to_text();
    out << rep.summary_line() << "\n";
    return kOk;
  }

  if (*sweep) {
    set_threads(sweep_c);
    const ExperimentConfig cfg = build_config(sweep_c);
    plan.validate();
    const fs::path dir = output_dir(sweep_c);
    write_file(dir / "config.ini", cfg.snapshot());
    const auto recordings = load(cfg);
    const SweepStage stage = sweep_stage == "vt"    ? SweepStage::kVelocity
                             : sweep_stage == "mfd" ? SweepStage::kDuration
                                                    : SweepStage::kBoth;
    const SweepResult res = sweep_ivt(
        [&](const IvtParams& ivt) { return evaluate_ivt(recordings, cfg, ivt); }, plan, stage);
    write_with(dir / "sweep.csv", [&](std::ostream& o) { write_sweep_csv(res.table, o); });
    std::string text = sweep_table(res.table);
    text += "best: VT " + format_number(res.best.vt) + " deg/s, MFD " +
            format_number(res.best.mfd) + " s\n";
    if (stage != SweepStage::kDuration) {
      const PeakFixation peak = peak_fixation_vt(
          [&](double vt) { return training_fixation_count(recordings, cfg, vt); }, plan.vt_min,
          plan.vt_max, plan.vt_fine_step, sweep_neighborhood);
      text += "fixation-count peak: VT " + format_number(peak.peak_vt) + " deg/s (" +
              std::to_string(peak.peak_count) + " fixations); candidates";
      for (double v : peak.candidates) text += " " + format_number(v);
      text += "\n";
    }
    write_file(dir / "sweep.txt", text);
    out << text;
    return kOk;
  }

  if (*ablate) {
    set_threads(ablate_c);
    const ExperimentConfig cfg = build_config(ablate_c);
    const fs::path dir = output_dir(ablate_c);
    write_file(dir / "config.ini", cfg.snapshot());
    const auto rows = ablate_derivative_orders(load(cfg), cfg, parse_orders(ablate_orders));
    const std::string table = ablation_table(rows);
    write_file(dir / "ablation.txt", table);
    write_with(dir / "ablation.csv", [&](std::ostream& o) {
      o << "order,feature_count,accuracy_mean,accuracy_sem\n";
      for (const auto& r : rows) {
        o << r.order << ',' << r.feature_count << ',' << format_number(r.report.mean_accuracy)
          << ',' << format_number(r.report.sem) << '\n';
      }
    });
    out << table;
    return kOk;
  }
  return kUsage;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Eye-movement biometric identification pipeline", "eyeid"};
  try {
    return dispatch(app, args, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kData;
  } catch (const fs::filesystem_error& e) {
    err << "data error: " << e.what() << "\n";
    return kData;
  } catch (const ComputeError& e) {
    err << "compute error: " << e.what() << "\n";
    return kCompute;
  } catch (const std::exception& e) {
    err << "compute error: " << e.what() << "\n";
    return kCompute;
  }
}

}  // namespace eyeid::cli
