#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "eyeid/io.hpp"
#include "eyeid/preprocess.hpp"

namespace eyeid {

/// Generative parameters of one synthetic viewer. Fixations are mean-reverting
/// random-walk drift around a centre, saccades move at constant velocity, and
/// blinks blank out runs of samples.
struct SyntheticUserProfile {
  double fixation_duration_s = 0.30;
  double fixation_jitter_deg = 0.01;  // drift step per sample
  double saccade_peak_velocity_deg_s = 250.0;
  double saccade_amplitude_deg = 6.0;
  double blink_rate_per_min = 10.0;  // 0 disables blinks
  double blink_duration_s = 0.20;
  double blink_duration_sd_s = 0.03;
  double noise_deg = 0.01;
  std::optional<std::string> gender;
  std::optional<double> age;

  void validate() const;
};

struct SyntheticRecording {
  GazeRecording recording;
  std::size_t fixation_count = 0;  // fixations started in the trajectory
  std::size_t blink_count = 0;
};

/// Exactly llround(duration_s * rate_hz) samples, in degrees.
SyntheticRecording synthesize_recording(const SyntheticUserProfile& profile,
                                        double duration_s, double rate_hz,
                                        std::uint64_t seed);

struct SyntheticDataset {
  DatasetManifest manifest;
  std::vector<SyntheticRecording> recordings;  // same order as manifest.entries
};

/// Participants are named u01, u02, ...; sessions 1..sessions. When
/// `out_dir` is given, recordings and `manifest.ini` are written there.
SyntheticDataset generate_synthetic(const std::vector<SyntheticUserProfile>& profiles,
                                    int sessions, double duration_s, double rate_hz,
                                    std::uint64_t seed,
                                    const std::optional<std::filesystem::path>& out_dir = {});

/// Profiles spread over disjoint parameter levels (shuffled per parameter) so
/// that users differ along every axis. `spread` in (0, 1] scales the range.
std::vector<SyntheticUserProfile> separable_profiles(std::size_t users, std::uint64_t seed,
                                                     double spread = 1.0);

std::string participant_name(std::size_t index);

}  // namespace eyeid
