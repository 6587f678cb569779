#include "celab/timebound.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "celab/rng.hpp"

namespace celab::timebound {

void JitterDist::validate(const std::string& what) const {
  if (!(std::isfinite(mean_ms) && std::isfinite(stddev_ms))) {
    throw std::invalid_argument(what + ": non-finite parameters");
  }
  if (stddev_ms < 0.0) throw std::invalid_argument(what + ": stddev < 0");
  if (!(min_ms <= max_ms)) throw std::invalid_argument(what + ": min > max");
}

double JitterDist::sample(Rng& rng) const {
  return rng.truncated_normal(mean_ms, stddev_ms, min_ms, max_ms);
}

void TimingParams::validate() const {
  if (d_m < 0.0 || d_a1_m < 0.0 || d_a2_m < 0.0) {
    throw std::invalid_argument("TimingParams: negative distance");
  }
  if (d_a1_m + d_a2_m < d_m) {
    throw std::invalid_argument("TimingParams: relay path shorter than direct path");
  }
  if (t_alter_ms < 0.0) throw std::invalid_argument("TimingParams: t_alter < 0");
  if (!(t_in_ms > 0.0)) throw std::invalid_argument("TimingParams: t_in must be positive");
  t_other.validate("t_other");
  t_other_adv.validate("t_other_adv");
}

std::vector<TimingSample> sample_benign(const TimingParams& params, std::size_t count,
                                        std::uint64_t rng_seed, const std::string& location) {
  if (count < 1) throw std::invalid_argument("sample_benign: count < 1");
  params.validate();
  Rng rng(rng_seed);
  std::vector<TimingSample> out;
  out.reserve(count);
  const double prop = params.prop_delay_ms();
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back({prop + params.t_other.sample(rng), Label::benign, location});
  }
  return out;
}

std::vector<TimingSample> sample_relayed(const TimingParams& params, std::size_t count,
                                         std::uint64_t rng_seed, const std::string& location) {
  if (count < 1) throw std::invalid_argument("sample_relayed: count < 1");
  params.validate();
  Rng rng(rng_seed);
  std::vector<TimingSample> out;
  out.reserve(count);
  const double path = params.relay_path_ms();
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back({path + params.t_other_adv.sample(rng) + params.t_alter_ms,
                   Label::relayed, location});
  }
  return out;
}

// --- threshold detector ------------------------------------------------------

namespace {

class ThresholdDetector final : public Detector {
 public:
  ThresholdDetector(double cut, bool relayed_above)
      : cut_(cut), relayed_above_(relayed_above) {}

  bool predict_relayed(const TimingSample& sample) const override {
    return relayed_above_ ? sample.duration_ms > cut_ : sample.duration_ms <= cut_;
  }
  std::string kind() const override { return "threshold"; }

  double cut() const { return cut_; }

 private:
  double cut_;
  bool relayed_above_;
};

ThresholdDetector train_threshold(std::span<const TimingSample> samples) {
  std::vector<const TimingSample*> sorted;
  sorted.reserve(samples.size());
  std::size_t relayed_total = 0;
  for (const auto& s : samples) {
    sorted.push_back(&s);
    relayed_total += s.label == Label::relayed;
  }
  const std::size_t benign_total = samples.size() - relayed_total;
  std::sort(sorted.begin(), sorted.end(), [](const TimingSample* a, const TimingSample* b) {
    return a->duration_ms < b->duration_ms;
  });

  // Sweep cuts between adjacent durations, maximizing Youden's J for both
  // orientations of the decision.
  double best_j = -2.0;
  double best_cut = sorted.front()->duration_ms - 1.0;
  bool best_above = true;
  std::size_t relayed_below = 0, benign_below = 0;
  auto consider = [&](double cut) {
    // relayed-above orientation
    const double tpr_above = static_cast<double>(relayed_total - relayed_below) /
                             static_cast<double>(relayed_total);
    const double tnr_above = static_cast<double>(benign_below) / static_cast<double>(benign_total);
    const double j_above = tpr_above + tnr_above - 1.0;
    if (j_above > best_j) {
      best_j = j_above;
      best_cut = cut;
      best_above = true;
    }
    const double j_below = -j_above;
    if (j_below > best_j) {
      best_j = j_below;
      best_cut = cut;
      best_above = false;
    }
  };
  consider(sorted.front()->duration_ms - 1.0);
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    relayed_below += sorted[i]->label == Label::relayed;
    benign_below += sorted[i]->label == Label::benign;
    const double here = sorted[i]->duration_ms;
    const double next = i + 1 < sorted.size() ? sorted[i + 1]->duration_ms : here + 1.0;
    if (next > here) consider((here + next) / 2.0);
  }
  return {best_cut, best_above};
}

// --- forest detector ---------------------------------------------------------

struct FeatureRow {
  double duration = 0.0;
  double location = -1.0;
  bool relayed = false;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  bool leaf_relayed = false;
};

class Tree {
 public:
  void fit(const std::vector<FeatureRow>& rows, std::vector<std::size_t> idx,
           std::size_t max_depth, Rng& rng) {
    nodes_.clear();
    build(rows, std::move(idx), max_depth, rng);
  }

  bool predict(double duration, double location) const {
    int node = 0;
    while (nodes_[static_cast<std::size_t>(node)].feature >= 0) {
      const TreeNode& n = nodes_[static_cast<std::size_t>(node)];
      const double v = n.feature == 0 ? duration : location;
      node = v <= n.threshold ? n.left : n.right;
    }
    return nodes_[static_cast<std::size_t>(node)].leaf_relayed;
  }

 private:
  int build(const std::vector<FeatureRow>& rows, std::vector<std::size_t> idx,
            std::size_t depth_left, Rng& rng) {
    const int me = static_cast<int>(nodes_.size());
    nodes_.push_back({});

    std::size_t relayed = 0;
    for (auto i : idx) relayed += rows[i].relayed;
    const std::size_t benign = idx.size() - relayed;

    if (depth_left == 0 || relayed == 0 || benign == 0 || idx.size() < 2) {
      nodes_[static_cast<std::size_t>(me)].leaf_relayed =
          relayed > benign || (relayed == benign && rng.next_u64() % 2 == 0);
      return me;
    }

    // Best Gini split over both features via a sorted sweep.
    double best_gain = 1e-12;
    int best_feature = -1;
    double best_threshold = 0.0;
    const double parent_gini =
        1.0 - std::pow(static_cast<double>(relayed) / static_cast<double>(idx.size()), 2) -
        std::pow(static_cast<double>(benign) / static_cast<double>(idx.size()), 2);
    for (int f = 0; f < 2; ++f) {
      std::vector<std::size_t> order = idx;
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double va = f == 0 ? rows[a].duration : rows[a].location;
        const double vb = f == 0 ? rows[b].duration : rows[b].location;
        return va < vb;
      });
      std::size_t left_relayed = 0;
      for (std::size_t i = 0; i + 1 < order.size(); ++i) {
        left_relayed += rows[order[i]].relayed;
        const double here = f == 0 ? rows[order[i]].duration : rows[order[i]].location;
        const double next = f == 0 ? rows[order[i + 1]].duration : rows[order[i + 1]].location;
        if (!(next > here)) continue;
        const std::size_t nl = i + 1;
        const std::size_t nr = order.size() - nl;
        const std::size_t lr = left_relayed;
        const std::size_t rr = relayed - left_relayed;
        auto gini = [](std::size_t pos, std::size_t total) {
          const double p = static_cast<double>(pos) / static_cast<double>(total);
          return 1.0 - p * p - (1.0 - p) * (1.0 - p);
        };
        const double weighted =
            (static_cast<double>(nl) * gini(lr, nl) + static_cast<double>(nr) * gini(rr, nr)) /
            static_cast<double>(order.size());
        const double gain = parent_gini - weighted;
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = f;
          best_threshold = (here + next) / 2.0;
        }
      }
    }

    if (best_feature < 0) {
      nodes_[static_cast<std::size_t>(me)].leaf_relayed = relayed >= benign;
      return me;
    }

    std::vector<std::size_t> left_idx, right_idx;
    for (auto i : idx) {
      const double v = best_feature == 0 ? rows[i].duration : rows[i].location;
      (v <= best_threshold ? left_idx : right_idx).push_back(i);
    }
    nodes_[static_cast<std::size_t>(me)].feature = best_feature;
    nodes_[static_cast<std::size_t>(me)].threshold = best_threshold;
    const int l = build(rows, std::move(left_idx), depth_left - 1, rng);
    const int r = build(rows, std::move(right_idx), depth_left - 1, rng);
    nodes_[static_cast<std::size_t>(me)].left = l;
    nodes_[static_cast<std::size_t>(me)].right = r;
    return me;
  }

  std::vector<TreeNode> nodes_;
};

double location_code(const std::string& tag) {
  if (tag.empty()) return -1.0;
  // Stable small hash; exact values are irrelevant, only distinctness.
  std::uint64_t h = 1469598103934665603ULL;
  for (char c : tag) h = (h ^ static_cast<std::uint8_t>(c)) * 1099511628211ULL;
  return static_cast<double>(h % 4096);
}

class ForestDetector final : public Detector {
 public:
  ForestDetector(std::vector<Tree> trees) : trees_(std::move(trees)) {}

  bool predict_relayed(const TimingSample& sample) const override {
    std::size_t votes = 0;
    const double loc = location_code(sample.location);
    for (const auto& t : trees_) votes += t.predict(sample.duration_ms, loc);
    return votes * 2 > trees_.size();
  }
  std::string kind() const override { return "forest"; }

 private:
  std::vector<Tree> trees_;
};

ForestDetector train_forest(std::span<const TimingSample> samples, std::uint64_t seed,
                            const ForestOptions& options) {
  std::vector<FeatureRow> rows;
  rows.reserve(samples.size());
  for (const auto& s : samples) {
    rows.push_back({s.duration_ms, location_code(s.location), s.label == Label::relayed});
  }
  const Rng base(seed);
  std::vector<Tree> trees(std::max<std::size_t>(options.trees, 25));
  for (std::size_t t = 0; t < trees.size(); ++t) {
    Rng rng = base.substream(t);
    std::vector<std::size_t> bootstrap(rows.size());
    for (auto& i : bootstrap) i = rng.next_below(rows.size());
    trees[t].fit(rows, std::move(bootstrap), options.max_depth, rng);
  }
  return {std::move(trees)};
}

}  // namespace

std::unique_ptr<Detector> train_detector(std::span<const TimingSample> samples,
                                         DetectorKind kind, std::uint64_t rng_seed,
                                         const ForestOptions& options) {
  std::size_t relayed = 0;
  for (const auto& s : samples) relayed += s.label == Label::relayed;
  if (samples.empty() || relayed == 0 || relayed == samples.size()) {
    throw std::invalid_argument("train_detector: need both labels in training data");
  }
  if (kind == DetectorKind::threshold) {
    return std::make_unique<ThresholdDetector>(train_threshold(samples));
  }
  return std::make_unique<ForestDetector>(train_forest(samples, rng_seed, options));
}

DetectionMetrics metrics_from_confusion(std::uint64_t tp, std::uint64_t fn,
                                        std::uint64_t tn, std::uint64_t fp) {
  const auto total = tp + fn + tn + fp;
  auto ratio = [](std::uint64_t num, std::uint64_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  DetectionMetrics m;
  m.accuracy = ratio(tp + tn, total);
  m.tpr = ratio(tp, tp + fn);
  m.tnr = ratio(tn, tn + fp);
  m.ppv = ratio(tp, tp + fp);
  m.npv = ratio(tn, tn + fn);
  m.f1 = (m.ppv + m.tpr) > 0.0 ? 2.0 * m.ppv * m.tpr / (m.ppv + m.tpr) : 0.0;
  return m;
}

DetectionMetrics evaluate_detector(const Detector& detector,
                                   std::span<const TimingSample> samples) {
  if (samples.empty()) throw std::invalid_argument("evaluate_detector: empty sample set");
  std::uint64_t tp = 0, fn = 0, tn = 0, fp = 0;
  for (const auto& s : samples) {
    const bool predicted = detector.predict_relayed(s);
    const bool actual = s.label == Label::relayed;
    if (actual && predicted) ++tp;
    else if (actual && !predicted) ++fn;
    else if (!actual && !predicted) ++tn;
    else ++fp;
  }
  return metrics_from_confusion(tp, fn, tn, fp);
}

std::vector<bool> check_inter_frame(std::span<const double> gaps_ms, double t_in_ms) {
  if (!(t_in_ms > 0.0)) throw std::invalid_argument("check_inter_frame: t_in must be positive");
  std::vector<bool> out;
  out.reserve(gaps_ms.size());
  for (double g : gaps_ms) out.push_back(g < t_in_ms);
  return out;
}

std::string label_to_string(Label label) {
  return label == Label::benign ? "benign" : "relayed";
}

std::string render_samples_csv(std::span<const TimingSample> samples) {
  std::string out = "duration_ms,label,location\n";
  char line[128];
  for (const auto& s : samples) {
    std::snprintf(line, sizeof(line), "%.6f,%s,%s\n", s.duration_ms,
                  label_to_string(s.label).c_str(), s.location.c_str());
    out += line;
  }
  return out;
}

std::vector<TimingSample> parse_samples_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("duration_ms,label,location", 0) != 0) {
    throw std::invalid_argument("samples csv: bad header");
  }
  std::vector<TimingSample> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string duration, label, location;
    std::getline(row, duration, ',');
    std::getline(row, label, ',');
    std::getline(row, location, ',');
    TimingSample s;
    try {
      s.duration_ms = std::stod(duration);
    } catch (const std::exception&) {
      throw std::invalid_argument("samples csv line " + std::to_string(line_no) +
                                  ": bad duration");
    }
    if (label == "benign") s.label = Label::benign;
    else if (label == "relayed") s.label = Label::relayed;
    else throw std::invalid_argument("samples csv line " + std::to_string(line_no) + ": bad label");
    s.location = location;
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace celab::timebound
