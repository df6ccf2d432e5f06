#include "eyeid/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>

#include "eyeid/error.hpp"

namespace eyeid {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Portable draws; the std distributions differ between standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal() {
    // Box-Muller; u1 in (0, 1].
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

constexpr double kFieldHalfWidthDeg = 12.0;

}  // namespace

void SyntheticUserProfile::validate() const {
  const bool ok = fixation_duration_s > 0.0 && fixation_jitter_deg > 0.0 &&
                  saccade_peak_velocity_deg_s > 0.0 && saccade_amplitude_deg > 0.0 &&
                  blink_rate_per_min >= 0.0 && blink_duration_s > 0.0 &&
                  blink_duration_sd_s >= 0.0 && noise_deg >= 0.0;
  if (!ok) throw UsageError("synthetic profile parameters must be positive");
}

std::string participant_name(std::size_t index) {
  std::string n = std::to_string(index + 1);
  if (n.size() < 2) n.insert(0, 2 - n.size(), '0');
  return "u" + n;
}

SyntheticRecording synthesize_recording(const SyntheticUserProfile& p, double duration_s,
                                        double rate_hz, std::uint64_t seed) {
  p.validate();
  if (!(duration_s > 0.0 && rate_hz > 0.0)) {
    throw UsageError("synthetic duration and rate must be positive");
  }
  Rng rng(seed);
  const auto n = static_cast<std::size_t>(std::llround(duration_s * rate_hz));
  SyntheticRecording out;
  auto& rec = out.recording;
  rec.sample_rate_hz = rate_hz;
  rec.space = CoordinateSpace::kDegrees;
  rec.samples.reserve(n);

  double cx = rng.uniform(-6.0, 6.0);
  double cy = rng.uniform(-6.0, 6.0);
  auto emit = [&](double x, double y) {
    if (rec.samples.size() >= n) return;
    const double t = static_cast<double>(rec.samples.size()) / rate_hz;
    rec.samples.push_back({t, x + p.noise_deg * rng.normal(), y + p.noise_deg * rng.normal(), true});
  };

  while (rec.samples.size() < n) {
    const auto fix_len = std::max<std::size_t>(
        1, static_cast<std::size_t>(
               std::llround(p.fixation_duration_s * rng.uniform(0.8, 1.2) * rate_hz)));
    ++out.fixation_count;
    double ox = 0.0, oy = 0.0;
    for (std::size_t k = 0; k < fix_len; ++k) {
      emit(cx + ox, cy + oy);
      ox = 0.9 * ox + p.fixation_jitter_deg * rng.normal();
      oy = 0.9 * oy + p.fixation_jitter_deg * rng.normal();
    }
    const double end_x = cx + ox;
    const double end_y = cy + oy;

    double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double amp = p.saccade_amplitude_deg * rng.uniform(0.8, 1.2);
    // Steer back toward the middle when the target would leave the field.
    if (std::abs(end_x + amp * std::cos(angle)) > kFieldHalfWidthDeg ||
        std::abs(end_y + amp * std::sin(angle)) > kFieldHalfWidthDeg) {
      angle = std::atan2(-end_y, -end_x);
    }
    const double step = p.saccade_peak_velocity_deg_s / rate_hz;
    const auto steps = std::max<long long>(1, std::llround(amp / step));
    const double dx = step * std::cos(angle);
    const double dy = step * std::sin(angle);
    for (long long k = 1; k < steps; ++k) {
      emit(end_x + dx * static_cast<double>(k), end_y + dy * static_cast<double>(k));
    }
    cx = end_x + dx * static_cast<double>(steps);
    cy = end_y + dy * static_cast<double>(steps);
  }

  if (p.blink_rate_per_min > 0.0) {
    const double per_sample = p.blink_rate_per_min / 60.0 / rate_hz;
    const std::size_t margin = 20;
    std::size_t i = margin;
    while (i + margin < n) {
      if (rng.uniform() < per_sample) {
        const double d = std::max(1.0 / rate_hz,
                                  p.blink_duration_s + p.blink_duration_sd_s * rng.normal());
        const auto len = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(d * rate_hz)));
        const std::size_t end = std::min(n - margin, i + len);
        for (std::size_t k = i; k < end; ++k) {
          rec.samples[k].x = std::numeric_limits<double>::quiet_NaN();
          rec.samples[k].y = std::numeric_limits<double>::quiet_NaN();
          rec.samples[k].valid = false;
        }
        ++out.blink_count;
        i = end + margin;
      } else {
        ++i;
      }
    }
  }
  return out;
}

SyntheticDataset generate_synthetic(const std::vector<SyntheticUserProfile>& profiles,
                                    int sessions, double duration_s, double rate_hz,
                                    std::uint64_t seed,
                                    const std::optional<std::filesystem::path>& out_dir) {
  if (profiles.empty() || sessions < 1) {
    throw UsageError("synthetic dataset needs at least one profile and one session");
  }
  SyntheticDataset ds;
  ds.manifest.space = CoordinateSpace::kDegrees;
  ds.manifest.sample_rate_hz = rate_hz;
  ds.manifest.has_validity = true;
  if (out_dir) {
    std::filesystem::create_directories(*out_dir);
    ds.manifest.base_dir = *out_dir;
  }
  for (std::size_t u = 0; u < profiles.size(); ++u) {
    for (int s = 1; s <= sessions; ++s) {
      const std::uint64_t rec_seed =
          splitmix64(seed ^ splitmix64(u * 1000003ULL + static_cast<std::uint64_t>(s)));
      SyntheticRecording r = synthesize_recording(profiles[u], duration_s, rate_hz, rec_seed);
      DatasetEntry e;
      e.participant_id = participant_name(u);
      e.session_label = std::to_string(s);
      e.file = e.participant_id + "_s" + e.session_label + ".csv";
      e.gender = profiles[u].gender;
      e.age = profiles[u].age;
      r.recording.participant_id = e.participant_id;
      r.recording.session_label = e.session_label;
      r.recording.gender = e.gender;
      r.recording.age = e.age;
      r.recording.geometry = ds.manifest.geometry;
      if (out_dir) {
        std::ofstream f(*out_dir / e.file);
        if (!f) throw DataError("cannot write " + (*out_dir / e.file).string());
        write_recording_csv(r.recording, f);
      }
      ds.manifest.entries.push_back(std::move(e));
      ds.recordings.push_back(std::move(r));
    }
  }
  if (out_dir) {
    std::ofstream f(*out_dir / "manifest.ini");
    if (!f) throw DataError("cannot write manifest in " + out_dir->string());
    write_manifest(ds.manifest, f);
  }
  return ds;
}

std::vector<SyntheticUserProfile> separable_profiles(std::size_t users, std::uint64_t seed,
                                                     double spread) {
  if (users == 0) return {};
  if (!(spread > 0.0 && spread <= 1.0)) throw UsageError("spread must lie in (0, 1]");
  Rng rng(seed);
  auto levels = [&](double lo, double hi) {
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo) * spread;
    std::vector<double> v(users);
    for (std::size_t i = 0; i < users; ++i) {
      const double f = users == 1 ? 0.5 : static_cast<double>(i) / static_cast<double>(users - 1);
      v[i] = mid - half + 2.0 * half * f;
    }
    // Fisher-Yates with the portable generator.
    for (std::size_t i = users - 1; i > 0; --i) {
      const auto j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(i + 1));
      std::swap(v[i], v[std::min(j, i)]);
    }
    return v;
  };
  const auto fix = levels(0.18, 0.45);
  const auto jitter = levels(0.004, 0.03);
  const auto vel = levels(120.0, 450.0);
  const auto amp = levels(3.0, 12.0);
  const auto blink_rate = levels(6.0, 30.0);
  const auto blink_dur = levels(0.10, 0.40);
  const auto noise = levels(0.003, 0.02);
  std::vector<SyntheticUserProfile> out(users);
  for (std::size_t i = 0; i < users; ++i) {
    auto& p = out[i];
    p.fixation_duration_s = fix[i];
    p.fixation_jitter_deg = jitter[i];
    p.saccade_peak_velocity_deg_s = vel[i];
    p.saccade_amplitude_deg = amp[i];
    p.blink_rate_per_min = blink_rate[i];
    p.blink_duration_s = blink_dur[i];
    p.blink_duration_sd_s = 0.1 * blink_dur[i];
    p.noise_deg = noise[i];
    p.gender = i % 2 == 0 ? "F" : "M";
    p.age = 18.0 + static_cast<double>((i * 7) % 40);
  }
  return out;
}

}  // namespace eyeid
