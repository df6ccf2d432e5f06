#include "eyeid/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "eyeid/error.hpp"
#include "eyeid/io.hpp"
#include "parallel.hpp"

namespace eyeid {

namespace {

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(s);
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ',';
    out += items[i];
  }
  return out;
}

double to_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw UsageError("config key '" + key + "': expected a number, got '" + value + "'");
  }
}

std::uint64_t to_uint(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    if (!value.empty() && value.front() == '-') throw std::invalid_argument(value);
    const unsigned long long v = std::stoull(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw UsageError("config key '" + key + "': expected a non-negative integer, got '" +
                     value + "'");
  }
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw UsageError("config key '" + key + "': expected true/false, got '" + value + "'");
}

std::string split_name(SplitKind k) {
  switch (k) {
    case SplitKind::kBySession: return "by-session";
    case SplitKind::kByTimeGap: return "by-time-gap";
    case SplitKind::kRandomSubset: return "random-subset";
  }
  return "?";
}

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t hash_string(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// Unbiased enough for shuffling small lists; portable across libraries.
std::size_t draw_index(std::mt19937_64& rng, std::size_t bound) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return std::min(bound - 1, static_cast<std::size_t>(u * static_cast<double>(bound)));
}

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

struct SplitView {
  std::vector<const PreparedRecording*> train;
  std::vector<const PreparedRecording*> test;
};

SplitView make_split(const std::vector<PreparedRecording>& prepared,
                     const ExperimentConfig& cfg) {
  SplitView split;
  if (cfg.split == SplitKind::kRandomSubset) {
    std::map<std::string, std::vector<const PreparedRecording*>> by_participant;
    for (const auto& p : prepared) by_participant[p.participant_id].push_back(&p);
    for (auto& [pid, recs] : by_participant) {
      if (recs.size() < 2) {
        throw DataError("participant " + pid +
                        " needs at least two recordings for a random-subset split");
      }
      std::mt19937_64 rng(mix(cfg.sampling_seed ^ hash_string(pid)));
      for (std::size_t i = recs.size() - 1; i > 0; --i) {
        std::swap(recs[i], recs[draw_index(rng, i + 1)]);
      }
      const auto n = recs.size();
      auto n_train = static_cast<std::size_t>(
          std::llround(cfg.train_fraction * static_cast<double>(n)));
      n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
      split.train.insert(split.train.end(), recs.begin(),
                         recs.begin() + static_cast<std::ptrdiff_t>(n_train));
      split.test.insert(split.test.end(), recs.begin() + static_cast<std::ptrdiff_t>(n_train),
                        recs.end());
    }
  } else {
    for (const auto& p : prepared) {
      if (contains(cfg.train_sessions, p.session_label)) split.train.push_back(&p);
      if (contains(cfg.test_sessions, p.session_label)) split.test.push_back(&p);
    }
  }
  std::set<std::string> train_ids, test_ids, all_ids;
  for (const auto* p : split.train) train_ids.insert(p->participant_id);
  for (const auto* p : split.test) test_ids.insert(p->participant_id);
  for (const auto& p : prepared) all_ids.insert(p.participant_id);
  for (const auto& id : all_ids) {
    if (!train_ids.count(id)) throw DataError("participant " + id + " missing from the train split");
    if (!test_ids.count(id)) throw DataError("participant " + id + " missing from the test split");
  }
  return split;
}

struct TestUnit {
  std::string truth;
  std::vector<FeatureVector> fix, sac, blink;
};

std::vector<TestUnit> make_units(const std::vector<const PreparedRecording*>& test,
                                 PredictionUnit unit) {
  std::vector<TestUnit> units;
  std::map<std::pair<std::string, std::string>, std::size_t> index;
  for (const auto* p : test) {
    std::size_t at = units.size();
    if (unit == PredictionUnit::kSession) {
      auto [it, fresh] = index.emplace(std::make_pair(p->participant_id, p->session_label),
                                       units.size());
      at = it->second;
      if (fresh) units.push_back({p->participant_id, {}, {}, {}});
    } else {
      units.push_back({p->participant_id, {}, {}, {}});
    }
    auto& u = units[at];
    u.fix.insert(u.fix.end(), p->fixations.begin(), p->fixations.end());
    u.sac.insert(u.sac.end(), p->saccades.begin(), p->saccades.end());
    u.blink.insert(u.blink.end(), p->blinks.begin(), p->blinks.end());
  }
  return units;
}

// Normalized training set plus normalized per-unit test vectors for one
// classifier kind.
struct KindData {
  std::vector<FeatureVector> train;
  std::vector<std::vector<FeatureVector>> units;
  ClassifierDiagnostics diag;
};

KindData make_kind(std::vector<FeatureVector> train,
                   const std::vector<std::vector<FeatureVector>>& units, bool enabled) {
  KindData d;
  d.diag.train_vectors = train.size();
  for (const auto& u : units) d.diag.test_vectors += u.size();
  if (!enabled || train.empty()) {
    d.units.resize(units.size());
    return d;
  }
  auto fitted = zscore_fit_transform(std::move(train));
  d.diag.used = true;
  d.diag.constant_columns = fitted.normalizer.constant_columns;
  d.train = std::move(fitted.vectors);
  for (const auto& u : units) d.units.push_back(fitted.normalizer.apply(u));
  return d;
}

std::vector<double> pool_accuracies(const std::vector<ExperimentReport>& reports) {
  std::vector<double> out;
  for (const auto& r : reports) out.insert(out.end(), r.per_seed_accuracy.begin(), r.per_seed_accuracy.end());
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

std::vector<std::string> ExperimentConfig::problems() const {
  std::vector<std::string> out;
  try {
    ivt.validate();
  } catch (const std::exception& e) {
    out.emplace_back(e.what());
  }
  try {
    blink.validate();
  } catch (const std::exception& e) {
    out.emplace_back(e.what());
  }
  if (!optimize_fusion) {
    try {
      fusion.validate();
    } catch (const std::exception& e) {
      out.emplace_back(e.what());
    }
  }
  if (derivative_order < 0 || derivative_order > kMaxDerivativeOrder) {
    out.emplace_back("order must lie in 0..5");
  }
  if (seeds < 1) out.emplace_back("seeds must be >= 1");
  if (tuning_seeds < 1) out.emplace_back("tuning_seeds must be >= 1");
  if (sg_frame_size % 2 == 0 || sg_frame_size <= sg_poly_order || sg_poly_order < 0) {
    out.emplace_back("sg_frame must be odd and exceed sg_order");
  }
  if (split != SplitKind::kRandomSubset) {
    if (train_sessions.empty()) out.emplace_back("train_sessions is empty");
    if (test_sessions.empty()) out.emplace_back("test_sessions is empty");
  } else if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    out.emplace_back("train_fraction must lie in (0, 1)");
  }
  if (truncate_s && !(*truncate_s > 0.0)) out.emplace_back("truncate_s must be positive");
  if (rbfn.centers_per_class < 1) out.emplace_back("centers_per_class must be >= 1");
  if (subgroup) {
    if (subgroup->runs < 1) out.emplace_back("runs must be >= 1");
    if (subgroup->participant_count && *subgroup->participant_count == 0) {
      out.emplace_back("participants must be >= 1");
    }
    if (subgroup->age_min && subgroup->age_max && *subgroup->age_min > *subgroup->age_max) {
      out.emplace_back("age_min exceeds age_max");
    }
  }
  return out;
}

void ExperimentConfig::validate() const {
  const auto p = problems();
  if (p.empty()) return;
  std::string msg = "invalid experiment configuration:";
  for (const auto& s : p) msg += "\n  - " + s;
  throw UsageError(msg);
}

std::string ExperimentConfig::snapshot() const {
  std::map<std::string, std::string> kv;
  kv["manifest"] = manifest.string();
  kv["vt"] = format_number(ivt.velocity_threshold_deg_s);
  kv["mfd"] = format_number(ivt.min_fixation_duration_s);
  kv["blink_min"] = format_number(blink.min_duration_s);
  kv["blink_max"] = format_number(blink.max_duration_s);
  kv["sg_order"] = std::to_string(sg_poly_order);
  kv["sg_frame"] = std::to_string(sg_frame_size);
  kv["order"] = std::to_string(derivative_order);
  kv["fusion"] = optimize_fusion ? "optimize"
                                 : format_number(fusion.w_fix) + "," + format_number(fusion.w_sac) +
                                       "," + format_number(fusion.w_blink);
  kv["tuning_seeds"] = std::to_string(tuning_seeds);
  kv["seeds"] = std::to_string(seeds);
  kv["seed_base"] = std::to_string(seed_base);
  kv["split"] = split_name(split);
  kv["train_sessions"] = join(train_sessions);
  kv["test_sessions"] = join(test_sessions);
  kv["train_fraction"] = format_number(train_fraction);
  kv["sampling_seed"] = std::to_string(sampling_seed);
  kv["unit"] = unit == PredictionUnit::kRecording ? "recording" : "session";
  kv["use_blinks"] = use_blinks ? "true" : "false";
  kv["centers_per_class"] = std::to_string(rbfn.centers_per_class);
  if (truncate_s) {
    kv["truncate_s"] = format_number(*truncate_s);
    kv["truncate_from"] = truncate_from == TruncateFrom::kStart ? "start" : "end";
  }
  if (subgroup) {
    if (subgroup->gender) kv["gender"] = *subgroup->gender;
    if (subgroup->age_min) kv["age_min"] = format_number(*subgroup->age_min);
    if (subgroup->age_max) kv["age_max"] = format_number(*subgroup->age_max);
    if (subgroup->participant_count) kv["participants"] = std::to_string(*subgroup->participant_count);
    kv["runs"] = std::to_string(subgroup->runs);
  }
  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

void apply_config_key(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  auto sub = [&]() -> SubgroupFilter& {
    if (!cfg.subgroup) cfg.subgroup.emplace();
    return *cfg.subgroup;
  };
  if (key == "manifest") cfg.manifest = value;
  else if (key == "vt") cfg.ivt.velocity_threshold_deg_s = to_double(key, value);
  else if (key == "mfd") cfg.ivt.min_fixation_duration_s = to_double(key, value);
  else if (key == "blink_min") cfg.blink.min_duration_s = to_double(key, value);
  else if (key == "blink_max") cfg.blink.max_duration_s = to_double(key, value);
  else if (key == "sg_order") cfg.sg_poly_order = static_cast<int>(to_uint(key, value));
  else if (key == "sg_frame") cfg.sg_frame_size = static_cast<int>(to_uint(key, value));
  else if (key == "order") cfg.derivative_order = static_cast<int>(to_uint(key, value));
  else if (key == "fusion") {
    if (value == "optimize") {
      cfg.optimize_fusion = true;
    } else {
      const auto parts = split_list(value);
      if (parts.size() != 3) {
        throw UsageError("config key 'fusion': expected 'w_fix,w_sac,w_blink' or 'optimize'");
      }
      cfg.optimize_fusion = false;
      cfg.fusion = {to_double(key, parts[0]), to_double(key, parts[1]), to_double(key, parts[2])};
    }
  } else if (key == "tuning_seeds") cfg.tuning_seeds = to_uint(key, value);
  else if (key == "seeds") cfg.seeds = to_uint(key, value);
  else if (key == "seed_base") cfg.seed_base = to_uint(key, value);
  else if (key == "split") {
    if (value == "by-session") cfg.split = SplitKind::kBySession;
    else if (value == "by-time-gap") cfg.split = SplitKind::kByTimeGap;
    else if (value == "random-subset") cfg.split = SplitKind::kRandomSubset;
    else throw UsageError("config key 'split': expected by-session, by-time-gap or random-subset");
  } else if (key == "train_sessions") cfg.train_sessions = split_list(value);
  else if (key == "test_sessions") cfg.test_sessions = split_list(value);
  else if (key == "train_fraction") cfg.train_fraction = to_double(key, value);
  else if (key == "sampling_seed") cfg.sampling_seed = to_uint(key, value);
  else if (key == "unit") {
    if (value == "recording") cfg.unit = PredictionUnit::kRecording;
    else if (value == "session") cfg.unit = PredictionUnit::kSession;
    else throw UsageError("config key 'unit': expected recording or session");
  } else if (key == "use_blinks") cfg.use_blinks = to_bool(key, value);
  else if (key == "centers_per_class") cfg.rbfn.centers_per_class = static_cast<int>(to_uint(key, value));
  else if (key == "truncate_s") cfg.truncate_s = to_double(key, value);
  else if (key == "truncate_from") {
    if (value == "start") cfg.truncate_from = TruncateFrom::kStart;
    else if (value == "end") cfg.truncate_from = TruncateFrom::kEnd;
    else throw UsageError("config key 'truncate_from': expected start or end");
  } else if (key == "gender") sub().gender = value;
  else if (key == "age_min") sub().age_min = to_double(key, value);
  else if (key == "age_max") sub().age_max = to_double(key, value);
  else if (key == "participants") sub().participant_count = to_uint(key, value);
  else if (key == "runs") sub().runs = to_uint(key, value);
  else throw UsageError("unknown config key '" + key + "'");
}

ExperimentConfig read_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config " + path.string());
  const auto sections = parse_key_value(in);
  if (sections.size() != 1) throw UsageError(path.string() + ": config files have no sections");
  ExperimentConfig cfg;
  for (const auto& [k, v] : sections.front().values) apply_config_key(cfg, k, v);
  if (!cfg.manifest.empty() && cfg.manifest.is_relative()) {
    cfg.manifest = path.parent_path() / cfg.manifest;
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// Pipeline

SegmentedRecording segment_recording(const GazeRecording& rec, const IvtParams& ivt,
                                     const BlinkParams& blink, int sg_poly_order,
                                     int sg_frame_size) {
  const GazeRecording deg = to_degrees(rec);
  SegmentedRecording out;
  if (deg.has_validity) out.blinks = extract_blinks(detect_invalid_runs(deg), blink);
  const InterpolatedRecording connected = interpolate_invalid(deg);
  out.trimmed_leading = connected.trimmed_leading;
  const GazeRecording smooth = savitzky_golay(connected.recording, sg_poly_order, sg_frame_size);
  out.segments = ivt_segment(smooth, ivt);
  return out;
}

PreparedRecording prepare_recording(const GazeRecording& raw, const ExperimentConfig& cfg) {
  const GazeRecording rec = cfg.truncate_s ? truncate(raw, *cfg.truncate_s, cfg.truncate_from) : raw;
  PreparedRecording out;
  out.participant_id = rec.participant_id;
  out.session_label = rec.session_label;
  out.gender = rec.gender;
  out.age = rec.age;

  SegmentedRecording seg =
      segment_recording(rec, cfg.ivt, cfg.blink, cfg.sg_poly_order, cfg.sg_frame_size);
  out.raw_fixation_count = count_kind(seg.segments, SegmentKind::kFixation);
  if (!seg.segments.empty()) {
    const auto min_points = static_cast<std::size_t>(cfg.derivative_order) + 1;
    const auto segments = enforce_min_points(std::move(seg.segments), min_points);
    const auto schema = FeatureSchema::for_order(cfg.derivative_order);
    for (auto& fv : extract_segment_features(segments, rec.sample_rate_hz, schema,
                                             rec.participant_id)) {
      (fv.kind == SegmentKind::kFixation ? out.fixations : out.saccades).push_back(std::move(fv));
    }
  }
  if (cfg.use_blinks) out.blinks = blink_feature_vectors(seg.blinks, rec.participant_id);
  return out;
}

std::vector<PreparedRecording> prepare_all(const std::vector<GazeRecording>& recordings,
                                           const ExperimentConfig& cfg) {
  std::vector<PreparedRecording> out(recordings.size());
  detail::parallel_for(static_cast<std::ptrdiff_t>(recordings.size()), [&](std::ptrdiff_t i) {
    const auto idx = static_cast<std::size_t>(i);
    out[idx] = prepare_recording(recordings[idx], cfg);
  });
  return out;
}

PredictionSet collect_predictions(const std::vector<PreparedRecording>& prepared,
                                  const ExperimentConfig& cfg) {
  cfg.validate();
  if (prepared.empty()) throw DataError("no recordings to evaluate");
  const SplitView split = make_split(prepared, cfg);

  PredictionSet set;
  {
    std::set<std::string> labels;
    for (const auto* p : split.train) labels.insert(p->participant_id);
    set.labels.assign(labels.begin(), labels.end());
  }
  std::map<std::string, std::size_t> usable;
  for (const auto* p : split.train) usable[p->participant_id] += p->fixations.size() + p->saccades.size();
  for (const auto& [pid, n] : usable) {
    if (n == 0) throw DataError("participant " + pid + " has no usable training segments");
  }

  const auto units = make_units(split.test, cfg.unit);
  std::vector<FeatureVector> train_fix, train_sac, train_blink;
  for (const auto* p : split.train) {
    train_fix.insert(train_fix.end(), p->fixations.begin(), p->fixations.end());
    train_sac.insert(train_sac.end(), p->saccades.begin(), p->saccades.end());
    train_blink.insert(train_blink.end(), p->blinks.begin(), p->blinks.end());
  }
  std::vector<std::vector<FeatureVector>> ufix, usac, ublink;
  for (const auto& u : units) {
    if (u.fix.empty() && u.sac.empty()) {
      throw DataError("test recording of participant " + u.truth + " has no usable segments");
    }
    ufix.push_back(u.fix);
    usac.push_back(u.sac);
    ublink.push_back(u.blink);
  }
  const KindData fix = make_kind(std::move(train_fix), ufix, true);
  const KindData sac = make_kind(std::move(train_sac), usac, true);
  const KindData blink = make_kind(std::move(train_blink), ublink, cfg.use_blinks);
  set.fixation = fix.diag;
  set.saccade = sac.diag;
  set.blink = blink.diag;

  for (std::size_t s = 0; s < cfg.seeds; ++s) set.seeds.push_back(cfg.seed_base + s);
  set.per_seed.resize(cfg.seeds);
  const auto schema = FeatureSchema::for_order(cfg.derivative_order);

  detail::parallel_for(static_cast<std::ptrdiff_t>(cfg.seeds), [&](std::ptrdiff_t si) {
    const auto s = static_cast<std::size_t>(si);
    const std::uint64_t seed = set.seeds[s];
    std::optional<RbfnModel> mfix, msac, mblink;
    if (fix.diag.used) mfix = rbfn_train(fix.train, seed, cfg.rbfn, schema);
    if (sac.diag.used) msac = rbfn_train(sac.train, seed, cfg.rbfn, schema);
    if (blink.diag.used) mblink = rbfn_train(blink.train, seed, cfg.rbfn, FeatureSchema::blink());
    auto predict = [&](const std::optional<RbfnModel>& m,
                       const std::vector<FeatureVector>& vs) -> std::optional<Distribution> {
      if (!m) return std::nullopt;
      auto d = aggregate_segments(*m, vs);
      if (!d) return std::nullopt;
      return align_distribution(*d, m->class_labels, set.labels);
    };
    auto& out = set.per_seed[s];
    out.reserve(units.size());
    for (std::size_t u = 0; u < units.size(); ++u) {
      out.push_back({units[u].truth, predict(mfix, fix.units[u]), predict(msac, sac.units[u]),
                     predict(mblink, blink.units[u])});
    }
  });
  return set;
}

TrainedModels train_models(const std::vector<PreparedRecording>& prepared,
                           const ExperimentConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  if (prepared.empty()) throw DataError("no recordings to train on");
  const SplitView split = make_split(prepared, cfg);
  std::vector<FeatureVector> fix, sac, blink;
  std::set<std::string> labels;
  for (const auto* p : split.train) {
    labels.insert(p->participant_id);
    fix.insert(fix.end(), p->fixations.begin(), p->fixations.end());
    sac.insert(sac.end(), p->saccades.begin(), p->saccades.end());
    blink.insert(blink.end(), p->blinks.begin(), p->blinks.end());
  }
  if (fix.empty() && sac.empty()) throw DataError("no usable training segments");
  TrainedModels out;
  out.labels.assign(labels.begin(), labels.end());
  const auto schema = FeatureSchema::for_order(cfg.derivative_order);
  auto fit = [&](std::vector<FeatureVector> train, const FeatureSchema& sch,
                 std::optional<RbfnModel>& model, Normalizer& norm) {
    if (train.empty()) return;
    auto fitted = zscore_fit_transform(std::move(train));
    norm = std::move(fitted.normalizer);
    model = rbfn_train(fitted.vectors, seed, cfg.rbfn, sch);
  };
  fit(std::move(fix), schema, out.fixation, out.fixation_norm);
  fit(std::move(sac), schema, out.saccade, out.saccade_norm);
  if (cfg.use_blinks) fit(std::move(blink), FeatureSchema::blink(), out.blink, out.blink_norm);
  return out;
}

FusionOutcome score_fusion(const PredictionSet& set, const FusionWeights& w,
                           std::size_t max_seeds) {
  FusionOutcome out;
  const std::size_t seeds = std::min(max_seeds, set.per_seed.size());
  double tie_sum = 0.0;
  std::size_t tie_count = 0;
  for (std::size_t s = 0; s < seeds; ++s) {
    std::size_t correct = 0;
    for (const auto& u : set.per_seed[s]) {
      const FusionResult r = fuse(u.p_fix, u.p_sac, u.p_blink, w);
      const std::string& predicted = set.labels[r.predicted];
      if (predicted == u.truth) ++correct;
      ++out.confusion[{u.truth, predicted}];
      const double total = std::accumulate(r.p_final.begin(), r.p_final.end(), 0.0);
      const auto truth_at = std::find(set.labels.begin(), set.labels.end(), u.truth);
      if (total > 0.0 && truth_at != set.labels.end()) {
        tie_sum += r.p_final[static_cast<std::size_t>(truth_at - set.labels.begin())] / total;
      }
      ++tie_count;
    }
    const auto n = set.per_seed[s].size();
    out.per_seed_accuracy.push_back(n ? static_cast<double>(correct) / static_cast<double>(n) : 0.0);
  }
  out.tie_break = tie_count ? tie_sum / static_cast<double>(tie_count) : 0.0;
  return out;
}

std::pair<double, double> mean_and_sem(const std::vector<double>& values) {
  if (values.empty()) return {0.0, 0.0};
  const double k = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / k;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / k) / std::sqrt(k)};
}

ExperimentReport run_experiment(const std::vector<PreparedRecording>& prepared,
                                const ExperimentConfig& cfg) {
  const PredictionSet set = collect_predictions(prepared, cfg);
  ExperimentReport rep;
  rep.config_snapshot = cfg.snapshot();
  rep.fixation = set.fixation;
  rep.saccade = set.saccade;
  rep.blink = set.blink;
  if (!set.blink.used) {
    rep.notes.emplace_back(cfg.use_blinks ? "blink classifier absent: no blink segments in training data"
                                          : "blink classifier disabled");
  }

  FusionWeights weights = cfg.fusion;
  if (cfg.optimize_fusion) {
    const FusionEvaluator eval = [&](const FusionWeights& w) {
      const FusionOutcome o = score_fusion(set, w, cfg.tuning_seeds);
      return FusionScore{mean_and_sem(o.per_seed_accuracy).first, o.tie_break};
    };
    const FusionWeights start{0.5, 0.5, 0.0};
    rep.tuning = tune_fusion_weights(eval, start);
    weights = rep.tuning->weights;
  }
  const FusionOutcome outcome = score_fusion(set, weights);
  rep.weights = weights;
  rep.seeds = set.seeds;
  rep.per_seed_accuracy = outcome.per_seed_accuracy;
  rep.confusion = outcome.confusion;
  rep.predictions_per_seed = set.per_seed.empty() ? 0 : set.per_seed.front().size();
  std::tie(rep.mean_accuracy, rep.sem) = mean_and_sem(rep.per_seed_accuracy);
  return rep;
}

ExperimentReport run_experiment(const std::vector<GazeRecording>& recordings,
                                const ExperimentConfig& cfg) {
  cfg.validate();
  return run_experiment(prepare_all(recordings, cfg), cfg);
}

std::string ExperimentReport::summary_line() const {
  return "accuracy = " + fmt("%.2f", 100.0 * mean_accuracy) + " ± " +
         fmt("%.2f", 100.0 * sem) + " % over " + std::to_string(per_seed_accuracy.size()) +
         " seeds";
}

std::string ExperimentReport::to_text() const {
  std::ostringstream out;
  out << summary_line() << "\n";
  out << "predictions per seed: " << predictions_per_seed << "\n";
  out << "fusion weights (fix/sac/blink): " << format_number(weights.w_fix) << "/"
      << format_number(weights.w_sac) << "/" << format_number(weights.w_blink) << "\n";
  if (tuning) {
    out << "weight tuning: initial accuracy " << fmt("%.4f", tuning->initial_accuracy)
        << ", tuned accuracy " << fmt("%.4f", tuning->accuracy) << " ("
        << tuning->evaluations << " evaluations)\n";
  }
  out << "\nclassifier  used  train  test  constant_columns\n";
  const std::pair<const char*, const ClassifierDiagnostics*> rows[] = {
      {"fixation", &fixation}, {"saccade", &saccade}, {"blink", &blink}};
  for (const auto& [name, d] : rows) {
    char line[128];
    std::snprintf(line, sizeof line, "%-10s  %-4s  %5zu  %4zu  ", name, d->used ? "yes" : "no",
                  d->train_vectors, d->test_vectors);
    out << line;
    if (d->constant_columns.empty()) out << "-";
    for (std::size_t i = 0; i < d->constant_columns.size(); ++i) {
      out << (i ? "," : "") << d->constant_columns[i];
    }
    out << "\n";
  }
  for (const auto& n : notes) out << "note: " << n << "\n";
  out << "\nseed  accuracy\n";
  for (std::size_t i = 0; i < per_seed_accuracy.size(); ++i) {
    out << seeds[i] << "  " << fmt("%.6f", per_seed_accuracy[i]) << "\n";
  }
  out << "\nconfiguration:\n" << config_snapshot;
  return out.str();
}

std::string ExperimentReport::to_csv() const {
  std::ostringstream out;
  out << "kind,seed,value\n";
  for (std::size_t i = 0; i < per_seed_accuracy.size(); ++i) {
    out << "accuracy," << seeds[i] << ',' << format_number(per_seed_accuracy[i]) << '\n';
  }
  out << "mean,," << format_number(mean_accuracy) << '\n';
  out << "sem,," << format_number(sem) << '\n';
  out << "w_fix,," << format_number(weights.w_fix) << '\n';
  out << "w_sac,," << format_number(weights.w_sac) << '\n';
  out << "w_blink,," << format_number(weights.w_blink) << '\n';
  return out.str();
}

// ---------------------------------------------------------------------------
// Protocols

std::vector<AblationRow> ablate_derivative_orders(const std::vector<GazeRecording>& recordings,
                                                  const ExperimentConfig& cfg,
                                                  const std::vector<int>& orders) {
  if (orders.empty()) throw UsageError("ablation needs at least one derivative order");
  std::vector<AblationRow> rows;
  for (int order : orders) {
    ExperimentConfig c = cfg;
    c.derivative_order = order;
    AblationRow row;
    row.order = order;
    row.feature_count = FeatureSchema::for_order(order).feature_count();
    row.report = run_experiment(recordings, c);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string ablation_table(const std::vector<AblationRow>& rows) {
  static const char* names[] = {"Position", "Velocity", "Acceleration", "Jerk", "Jounce", "Crackle"};
  std::ostringstream out;
  out << "order  derivative    features  accuracy\n";
  for (const auto& r : rows) {
    char line[160];
    std::snprintf(line, sizeof line, "%5d  %-12s  %8zu  %.2f ± %.2f %%\n", r.order,
                  names[r.order], r.feature_count, 100.0 * r.report.mean_accuracy,
                  100.0 * r.report.sem);
    out << line;
  }
  return out.str();
}

ExperimentReport subgroup_resample(const std::vector<GazeRecording>& recordings,
                                   const ExperimentConfig& cfg) {
  cfg.validate();
  const SubgroupFilter filter = cfg.subgroup.value_or(SubgroupFilter{});
  std::map<std::string, const GazeRecording*> first_of;
  for (const auto& r : recordings) first_of.emplace(r.participant_id, &r);
  std::vector<std::string> eligible;
  for (const auto& [pid, r] : first_of) {
    if (filter.gender && (!r->gender || *r->gender != *filter.gender)) continue;
    if (filter.age_min && (!r->age || *r->age < *filter.age_min)) continue;
    if (filter.age_max && (!r->age || *r->age > *filter.age_max)) continue;
    eligible.push_back(pid);
  }
  const std::size_t want = filter.participant_count.value_or(eligible.size());
  if (want == 0 || want > eligible.size()) {
    throw DataError("subgroup filter unsatisfiable: requested " + std::to_string(want) +
                    " participants, " + std::to_string(eligible.size()) + " eligible");
  }

  std::vector<GazeRecording> pool;
  for (const auto& r : recordings) {
    if (std::binary_search(eligible.begin(), eligible.end(), r.participant_id)) pool.push_back(r);
  }
  const auto prepared = prepare_all(pool, cfg);

  std::vector<ExperimentReport> reports;
  std::vector<std::string> run_notes;
  for (std::size_t run = 0; run < filter.runs; ++run) {
    std::vector<std::string> chosen = eligible;
    if (want < eligible.size()) {
      std::mt19937_64 rng(mix(cfg.sampling_seed + 0x5bd1e995ULL * (run + 1)));
      for (std::size_t i = 0; i < want; ++i) {
        std::swap(chosen[i], chosen[i + draw_index(rng, chosen.size() - i)]);
      }
      chosen.resize(want);
      std::sort(chosen.begin(), chosen.end());
    }
    std::vector<PreparedRecording> subset;
    for (const auto& p : prepared) {
      if (std::binary_search(chosen.begin(), chosen.end(), p.participant_id)) subset.push_back(p);
    }
    reports.push_back(run_experiment(subset, cfg));
    run_notes.push_back("run " + std::to_string(run + 1) + " participants: " + join(chosen));
  }

  if (reports.size() == 1) {
    ExperimentReport rep = std::move(reports.front());
    if (want < first_of.size()) rep.notes.push_back(run_notes.front());
    return rep;
  }
  ExperimentReport rep = reports.back();
  rep.seeds.clear();
  rep.confusion.clear();
  for (const auto& r : reports) {
    rep.seeds.insert(rep.seeds.end(), r.seeds.begin(), r.seeds.end());
    for (const auto& [k, v] : r.confusion) rep.confusion[k] += v;
  }
  rep.per_seed_accuracy = pool_accuracies(reports);
  std::tie(rep.mean_accuracy, rep.sem) = mean_and_sem(rep.per_seed_accuracy);
  rep.notes.insert(rep.notes.end(), run_notes.begin(), run_notes.end());
  return rep;
}

std::size_t training_fixation_count(const std::vector<GazeRecording>& recordings,
                                    const ExperimentConfig& cfg, double vt) {
  std::vector<const GazeRecording*> train;
  for (const auto& r : recordings) {
    if (cfg.split == SplitKind::kRandomSubset || contains(cfg.train_sessions, r.session_label)) {
      train.push_back(&r);
    }
  }
  const IvtParams ivt{vt, cfg.ivt.min_fixation_duration_s};
  std::vector<std::size_t> counts(train.size());
  detail::parallel_for(static_cast<std::ptrdiff_t>(train.size()), [&](std::ptrdiff_t i) {
    const auto idx = static_cast<std::size_t>(i);
    const GazeRecording rec =
        cfg.truncate_s ? truncate(*train[idx], *cfg.truncate_s, cfg.truncate_from) : *train[idx];
    counts[idx] = count_kind(
        segment_recording(rec, ivt, cfg.blink, cfg.sg_poly_order, cfg.sg_frame_size).segments,
        SegmentKind::kFixation);
  });
  return std::accumulate(counts.begin(), counts.end(), std::size_t{0});
}

SweepPoint evaluate_ivt(const std::vector<GazeRecording>& recordings, ExperimentConfig cfg,
                        const IvtParams& ivt) {
  cfg.ivt = ivt;
  cfg.validate();
  const auto prepared = prepare_all(recordings, cfg);
  const ExperimentReport rep = run_experiment(prepared, cfg);
  SweepPoint pt;
  pt.vt = ivt.velocity_threshold_deg_s;
  pt.mfd = ivt.min_fixation_duration_s;
  for (const auto* p : make_split(prepared, cfg).train) pt.fixation_count += p->raw_fixation_count;
  pt.accuracy_mean = rep.mean_accuracy;
  pt.accuracy_sem = rep.sem;
  return pt;
}

std::string sweep_table(const std::vector<SweepPoint>& table) {
  std::ostringstream out;
  out << "Vel. threshold  MFD     Fix. No.  Acc. %\n";
  for (const auto& p : table) {
    char line[128];
    std::snprintf(line, sizeof line, "%14g  %-6.3f  %8zu  %.2f ± %.2f\n", p.vt, p.mfd,
                  p.fixation_count, 100.0 * p.accuracy_mean, 100.0 * p.accuracy_sem);
    out << line;
  }
  return out.str();
}

}  // namespace eyeid
