// Generative timing model for benign vs. relayed inter-frame durations,
// detector training (threshold and bagged-tree forest), confusion-matrix
// metrics, and the per-frame inter-arrival check the protocol consumes.
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace celab {
class Rng;
}

namespace celab::timebound {

inline constexpr double kSpeedOfLightMps = 2.998e8;
inline constexpr double kDefaultInterFrameMeanMs = 18.66;

struct JitterDist {
  double mean_ms = kDefaultInterFrameMeanMs;
  double stddev_ms = 2.0;
  double min_ms = 0.045;
  double max_ms = 20.0;

  void validate(const std::string& what) const;
  double sample(Rng& rng) const;
};

struct TimingParams {
  double d_m = 30.0;                      // AP-station distance
  double d_a1_m = 40.0;                   // AP-adversary
  double d_a2_m = 40.0;                   // adversary-station
  JitterDist t_other;                     // station-side delays, bounded by the standard
  JitterDist t_other_adv{kDefaultInterFrameMeanMs, 2.0, 0.0, 1e9};  // adversary processing
  double t_alter_ms = 0.0;                // time to alter/spoof frame elements
  double t_in_ms = 26.66;                 // acceptance window
  double inter_frame_mean_ms = kDefaultInterFrameMeanMs;

  void validate() const;
  double prop_delay_ms() const { return d_m / kSpeedOfLightMps * 1e3; }
  double relay_path_ms() const { return (d_a1_m + d_a2_m) / kSpeedOfLightMps * 1e3; }
};

enum class Label { benign, relayed };

struct TimingSample {
  double duration_ms = 0.0;
  Label label = Label::benign;
  std::string location;  // optional tag, e.g. D1/D2/D3
};

struct DetectionMetrics {
  double accuracy = 0.0;
  double f1 = 0.0;
  double tpr = 0.0;
  double tnr = 0.0;
  double ppv = 0.0;
  double npv = 0.0;
};

std::vector<TimingSample> sample_benign(const TimingParams& params, std::size_t count,
                                        std::uint64_t rng_seed,
                                        const std::string& location = "");
std::vector<TimingSample> sample_relayed(const TimingParams& params, std::size_t count,
                                         std::uint64_t rng_seed,
                                         const std::string& location = "");

enum class DetectorKind { threshold, forest };

class Detector {
 public:
  virtual ~Detector() = default;
  virtual bool predict_relayed(const TimingSample& sample) const = 0;
  virtual std::string kind() const = 0;
};

struct ForestOptions {
  std::size_t trees = 25;
  std::size_t max_depth = 8;
};

std::unique_ptr<Detector> train_detector(std::span<const TimingSample> samples,
                                         DetectorKind kind, std::uint64_t rng_seed,
                                         const ForestOptions& options = {});

DetectionMetrics evaluate_detector(const Detector& detector,
                                   std::span<const TimingSample> samples);
DetectionMetrics metrics_from_confusion(std::uint64_t tp, std::uint64_t fn,
                                        std::uint64_t tn, std::uint64_t fp);

// Strict window check: pass iff gap < t_in.
std::vector<bool> check_inter_frame(std::span<const double> gaps_ms, double t_in_ms);

std::string render_samples_csv(std::span<const TimingSample> samples);
std::vector<TimingSample> parse_samples_csv(const std::string& text);
std::string label_to_string(Label label);

}  // namespace celab::timebound
