// PHY-layer frame identification for concurrent connection establishments:
// SIG-field feature ingestion, standardization, covariance, Jacobi
// eigendecomposition, principal-component projection, and nearest-centroid
// classification of AP identity and CE vs. non-CE frames.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace celab {
class Rng;
}

namespace celab::sigpca {

struct SigRecord {
  double rate_mbps = 0.0;
  double length_bytes = 0.0;
  double duration_us = 0.0;
  std::string ap;           // optional label
  std::string frame_class;  // optional: CE, beacon, ack, other

  std::vector<double> features() const { return {rate_mbps, length_bytes, duration_us}; }
};

using Matrix = std::vector<std::vector<double>>;

struct EigenPair {
  double eigenvalue = 0.0;
  std::vector<double> eigenvector;
};

struct PcaModel {
  std::vector<double> means;
  std::vector<double> stddevs;  // sample (n-1) convention
  std::vector<EigenPair> eigenpairs;
  std::size_t k = 2;
};

// Standardize columns to zero mean / unit sample variance. Constant columns
// map to all-zero columns.
Matrix standardize_fit(const Matrix& data, std::vector<double>& means,
                       std::vector<double>& stddevs);
Matrix standardize_apply(const Matrix& data, const std::vector<double>& means,
                         const std::vector<double>& stddevs);

// Sample covariance (1/(n-1)) of the rows of Z.
Matrix covariance(const Matrix& z);

// All eigenpairs of a symmetric matrix via cyclic Jacobi rotations, sorted by
// descending eigenvalue; each vector's first nonzero component is positive.
std::vector<EigenPair> principal_components(const Matrix& sigma, std::size_t k);

PcaModel fit_pca(const Matrix& data, std::size_t k);

// Projection onto the model's top-k eigenvectors.
Matrix project(const Matrix& z, const PcaModel& model);
Matrix standardize_and_project(const Matrix& data, const PcaModel& model);

struct Centroids {
  std::vector<std::string> labels;        // sorted lexicographically
  std::vector<std::vector<double>> mean;  // per label, in PC space
};

Centroids fit_centroids(const Matrix& scores, const std::vector<std::string>& labels);

struct ClassifyResult {
  std::vector<std::string> predicted;
  std::vector<std::string> labels;            // confusion-matrix axis
  std::vector<std::vector<std::uint64_t>> confusion;  // [actual][predicted]
  double accuracy = 0.0;
};

ClassifyResult classify(const std::vector<SigRecord>& records, const PcaModel& model,
                        const Centroids& centroids,
                        const std::vector<std::string>& actual_labels);

std::vector<SigRecord> ingest_csv(const std::string& path);
std::vector<SigRecord> parse_csv(const std::string& text);
std::string render_csv(const std::vector<SigRecord>& records);

Matrix feature_matrix(const std::vector<SigRecord>& records);

// Synthetic corpus: five APs (A..E) with well-separated SIG-field patterns
// plus beacon/ack traffic, standing in for live captures.
std::vector<SigRecord> synthetic_corpus(std::size_t per_ap, std::uint64_t rng_seed);

}  // namespace celab::sigpca
