#include "celab/sigpca.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "celab/rng.hpp"

namespace celab::sigpca {

namespace {

void require_rect(const Matrix& m, const char* what) {
  if (m.empty()) throw std::invalid_argument(std::string(what) + ": empty matrix");
  for (const auto& row : m) {
    if (row.size() != m.front().size()) {
      throw std::invalid_argument(std::string(what) + ": ragged matrix");
    }
  }
}

}  // namespace

Matrix standardize_fit(const Matrix& data, std::vector<double>& means,
                       std::vector<double>& stddevs) {
  require_rect(data, "standardize");
  const std::size_t n = data.size();
  if (n < 2) throw std::invalid_argument("standardize: need >= 2 rows to fit");
  const std::size_t d = data.front().size();
  means.assign(d, 0.0);
  stddevs.assign(d, 0.0);
  for (const auto& row : data) {
    for (std::size_t j = 0; j < d; ++j) means[j] += row[j];
  }
  for (std::size_t j = 0; j < d; ++j) means[j] /= static_cast<double>(n);
  for (const auto& row : data) {
    for (std::size_t j = 0; j < d; ++j) {
      const double dev = row[j] - means[j];
      stddevs[j] += dev * dev;
    }
  }
  for (std::size_t j = 0; j < d; ++j) {
    stddevs[j] = std::sqrt(stddevs[j] / static_cast<double>(n - 1));
  }
  return standardize_apply(data, means, stddevs);
}

Matrix standardize_apply(const Matrix& data, const std::vector<double>& means,
                         const std::vector<double>& stddevs) {
  require_rect(data, "standardize");
  const std::size_t d = data.front().size();
  if (means.size() != d || stddevs.size() != d) {
    throw std::invalid_argument("standardize: model dimension mismatch");
  }
  Matrix z(data.size(), std::vector<double>(d, 0.0));
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      // sigma == 0 guards constant features to zero instead of dividing.
      z[i][j] = stddevs[j] > 0.0 ? (data[i][j] - means[j]) / stddevs[j] : 0.0;
    }
  }
  return z;
}

Matrix covariance(const Matrix& z) {
  require_rect(z, "covariance");
  const std::size_t n = z.size();
  if (n < 2) throw std::invalid_argument("covariance: need >= 2 rows");
  const std::size_t d = z.front().size();
  std::vector<double> mean(d, 0.0);
  for (const auto& row : z) {
    for (std::size_t j = 0; j < d; ++j) mean[j] += row[j];
  }
  for (auto& m : mean) m /= static_cast<double>(n);
  Matrix sigma(d, std::vector<double>(d, 0.0));
  for (const auto& row : z) {
    for (std::size_t a = 0; a < d; ++a) {
      for (std::size_t b = 0; b < d; ++b) {
        sigma[a][b] += (row[a] - mean[a]) * (row[b] - mean[b]);
      }
    }
  }
  for (auto& row : sigma) {
    for (auto& v : row) v /= static_cast<double>(n - 1);
  }
  return sigma;
}

std::vector<EigenPair> principal_components(const Matrix& sigma, std::size_t k) {
  require_rect(sigma, "principal_components");
  const std::size_t d = sigma.size();
  if (sigma.front().size() != d) throw std::invalid_argument("principal_components: not square");
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = 0; b < d; ++b) {
      if (std::fabs(sigma[a][b] - sigma[b][a]) > 1e-9) {
        throw std::invalid_argument("principal_components: matrix not symmetric");
      }
    }
  }
  if (k < 1 || k > d) throw std::invalid_argument("principal_components: k out of range");

  // Cyclic Jacobi: rotate away off-diagonal entries until all are < 1e-12.
  Matrix a = sigma;
  Matrix v(d, std::vector<double>(d, 0.0));
  for (std::size_t i = 0; i < d; ++i) v[i][i] = 1.0;

  for (int sweep = 0; sweep < 200; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < d; ++p) {
      for (std::size_t q = p + 1; q < d; ++q) off = std::max(off, std::fabs(a[p][q]));
    }
    if (off < 1e-12) break;
    for (std::size_t p = 0; p < d; ++p) {
      for (std::size_t q = p + 1; q < d; ++q) {
        if (std::fabs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t i = 0; i < d; ++i) {
          const double aip = a[i][p], aiq = a[i][q];
          a[i][p] = c * aip - s * aiq;
          a[i][q] = s * aip + c * aiq;
        }
        for (std::size_t i = 0; i < d; ++i) {
          const double api = a[p][i], aqi = a[q][i];
          a[p][i] = c * api - s * aqi;
          a[q][i] = s * api + c * aqi;
        }
        for (std::size_t i = 0; i < d; ++i) {
          const double vip = v[i][p], viq = v[i][q];
          v[i][p] = c * vip - s * viq;
          v[i][q] = s * vip + c * viq;
        }
      }
    }
  }

  std::vector<EigenPair> pairs(d);
  for (std::size_t j = 0; j < d; ++j) {
    pairs[j].eigenvalue = a[j][j];
    pairs[j].eigenvector.resize(d);
    for (std::size_t i = 0; i < d; ++i) pairs[j].eigenvector[i] = v[i][j];
  }
  std::stable_sort(pairs.begin(), pairs.end(), [](const EigenPair& x, const EigenPair& y) {
    return x.eigenvalue > y.eigenvalue;
  });
  // Sign convention: first component with magnitude above tolerance positive.
  for (auto& pair : pairs) {
    for (double c : pair.eigenvector) {
      if (std::fabs(c) > 1e-12) {
        if (c < 0.0) {
          for (auto& x : pair.eigenvector) x = -x;
        }
        break;
      }
    }
  }
  pairs.resize(k);
  return pairs;
}

PcaModel fit_pca(const Matrix& data, std::size_t k) {
  PcaModel model;
  const Matrix z = standardize_fit(data, model.means, model.stddevs);
  const Matrix sigma = covariance(z);
  model.eigenpairs = principal_components(sigma, std::min(k, sigma.size()));
  model.k = model.eigenpairs.size();
  return model;
}

Matrix project(const Matrix& z, const PcaModel& model) {
  require_rect(z, "project");
  const std::size_t d = z.front().size();
  if (model.means.size() != d) throw std::invalid_argument("project: dimension mismatch");
  Matrix scores(z.size(), std::vector<double>(model.eigenpairs.size(), 0.0));
  for (std::size_t i = 0; i < z.size(); ++i) {
    for (std::size_t j = 0; j < model.eigenpairs.size(); ++j) {
      double dot = 0.0;
      for (std::size_t f = 0; f < d; ++f) dot += z[i][f] * model.eigenpairs[j].eigenvector[f];
      scores[i][j] = dot;
    }
  }
  return scores;
}

Matrix standardize_and_project(const Matrix& data, const PcaModel& model) {
  return project(standardize_apply(data, model.means, model.stddevs), model);
}

Centroids fit_centroids(const Matrix& scores, const std::vector<std::string>& labels) {
  if (scores.size() != labels.size()) {
    throw std::invalid_argument("fit_centroids: label count mismatch");
  }
  if (scores.empty()) throw std::invalid_argument("fit_centroids: empty");
  std::map<std::string, std::pair<std::vector<double>, std::size_t>> acc;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    auto& slot = acc[labels[i]];
    if (slot.first.empty()) slot.first.assign(scores[i].size(), 0.0);
    for (std::size_t j = 0; j < scores[i].size(); ++j) slot.first[j] += scores[i][j];
    slot.second += 1;
  }
  Centroids out;
  for (auto& [label, slot] : acc) {
    out.labels.push_back(label);
    for (auto& v : slot.first) v /= static_cast<double>(slot.second);
    out.mean.push_back(std::move(slot.first));
  }
  return out;
}

ClassifyResult classify(const std::vector<SigRecord>& records, const PcaModel& model,
                        const Centroids& centroids,
                        const std::vector<std::string>& actual_labels) {
  if (centroids.labels.empty()) throw std::invalid_argument("classify: no centroids");
  if (!actual_labels.empty() && actual_labels.size() != records.size()) {
    throw std::invalid_argument("classify: actual label count mismatch");
  }
  const Matrix scores = standardize_and_project(feature_matrix(records), model);

  ClassifyResult result;
  result.labels = centroids.labels;
  std::map<std::string, std::size_t> label_index;
  for (std::size_t i = 0; i < centroids.labels.size(); ++i) {
    label_index[centroids.labels[i]] = i;
  }
  result.confusion.assign(centroids.labels.size(),
                          std::vector<std::uint64_t>(centroids.labels.size(), 0));

  std::uint64_t correct = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    std::size_t best = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centroids.mean.size(); ++c) {
      double d2 = 0.0;
      for (std::size_t j = 0; j < scores[i].size(); ++j) {
        const double diff = scores[i][j] - centroids.mean[c][j];
        d2 += diff * diff;
      }
      // Strict < keeps ties on the lexicographically first label.
      if (d2 < best_d2) {
        best_d2 = d2;
        best = c;
      }
    }
    result.predicted.push_back(centroids.labels[best]);
    if (!actual_labels.empty()) {
      const auto it = label_index.find(actual_labels[i]);
      if (it == label_index.end()) {
        throw std::invalid_argument("classify: actual label not in centroid set: " +
                                    actual_labels[i]);
      }
      result.confusion[it->second][best] += 1;
      correct += actual_labels[i] == centroids.labels[best];
    }
  }
  result.accuracy = actual_labels.empty()
                        ? 0.0
                        : static_cast<double>(correct) / static_cast<double>(records.size());
  return result;
}

Matrix feature_matrix(const std::vector<SigRecord>& records) {
  Matrix out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.features());
  return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

double parse_number(const std::string& text, std::size_t line_no, const std::string& column) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("csv line " + std::to_string(line_no) +
                                ": non-numeric value for " + column + ": '" + text + "'");
  }
}

}  // namespace

std::vector<SigRecord> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("csv: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv_line(line);
  const std::vector<std::string> required = {"rate_mbps", "length_bytes", "duration_us"};
  for (std::size_t i = 0; i < required.size(); ++i) {
    if (header.size() <= i || header[i] != required[i]) {
      throw std::invalid_argument("csv: missing required column '" + required[i] + "'");
    }
  }
  const bool has_ap = header.size() > 3 && header[3] == "ap";
  const bool has_class = header.size() > 4 && header[4] == "frame_class";

  std::vector<SigRecord> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() < 3) {
      throw std::invalid_argument("csv line " + std::to_string(line_no) + ": too few fields");
    }
    SigRecord r;
    r.rate_mbps = parse_number(fields[0], line_no, "rate_mbps");
    r.length_bytes = parse_number(fields[1], line_no, "length_bytes");
    r.duration_us = parse_number(fields[2], line_no, "duration_us");
    if (r.rate_mbps <= 0 || r.length_bytes <= 0 || r.duration_us <= 0) {
      throw std::invalid_argument("csv line " + std::to_string(line_no) +
                                  ": fields must be positive");
    }
    if (has_ap && fields.size() > 3) r.ap = fields[3];
    if (has_class && fields.size() > 4) r.frame_class = fields[4];
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<SigRecord> ingest_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open csv: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str());
}

std::string render_csv(const std::vector<SigRecord>& records) {
  std::string out = "rate_mbps,length_bytes,duration_us,ap,frame_class\n";
  char line[192];
  for (const auto& r : records) {
    std::snprintf(line, sizeof(line), "%.6g,%.6g,%.6g,%s,%s\n", r.rate_mbps,
                  r.length_bytes, r.duration_us, r.ap.c_str(), r.frame_class.c_str());
    out += line;
  }
  return out;
}

std::vector<SigRecord> synthetic_corpus(std::size_t per_ap, std::uint64_t rng_seed) {
  // Disjoint SIG-field clusters per AP; beacons and ACKs sit far away from
  // the CE clusters in all three features.
  struct ApPattern {
    const char* name;
    double rate, length, duration;
  };
  static const ApPattern kAps[] = {
      {"A", 6.0, 120.0, 160.0}, {"B", 12.0, 150.0, 100.0}, {"C", 24.0, 180.0, 60.0},
      {"D", 36.0, 210.0, 46.0}, {"E", 48.0, 240.0, 40.0},
  };
  Rng rng(rng_seed);
  std::vector<SigRecord> out;
  for (const auto& ap : kAps) {
    for (std::size_t i = 0; i < per_ap; ++i) {
      SigRecord r;
      r.rate_mbps = ap.rate;
      r.length_bytes = ap.length + rng.normal(0.0, 1.0);
      r.duration_us = ap.duration + rng.normal(0.0, 0.5);
      r.ap = ap.name;
      r.frame_class = "CE";
      out.push_back(std::move(r));
      // Matching non-CE traffic from the same AP.
      SigRecord beacon;
      beacon.rate_mbps = 1.0;
      beacon.length_bytes = 320.0 + rng.normal(0.0, 2.0);
      beacon.duration_us = 2800.0 + rng.normal(0.0, 10.0);
      beacon.ap = ap.name;
      beacon.frame_class = "beacon";
      out.push_back(std::move(beacon));
      SigRecord ack;
      ack.rate_mbps = 24.0;
      ack.length_bytes = 14.0;
      ack.duration_us = 10.0 + rng.normal(0.0, 0.2);
      ack.ap = ap.name;
      ack.frame_class = "ack";
      out.push_back(std::move(ack));
    }
  }
  return out;
}

}  // namespace celab::sigpca
