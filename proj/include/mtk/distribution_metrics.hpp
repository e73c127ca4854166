#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "mtk/errors.hpp"
#include "mtk/io.hpp"
#include "mtk/random.hpp"

namespace mtk {

struct GaussianSummary {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

// Sample mean and unbiased (N - 1) covariance.
inline GaussianSummary fit_gaussian(const EmbeddingSet& set) {
  if (set.size() < 2) throw Error(Errc::TooFewSamples, "covariance needs at least 2 rows");
  const RowMatrix& x = set.rows();
  GaussianSummary g;
  g.mean = x.colwise().mean().transpose();
  const Eigen::MatrixXd centered = x.rowwise() - g.mean.transpose();
  g.covariance = (centered.transpose() * centered) / static_cast<double>(set.size() - 1);
  g.covariance = 0.5 * (g.covariance + g.covariance.transpose());
  return g;
}

struct PsdRoot {
  Eigen::MatrixXd root;
  std::size_t clamped = 0;  // negative eigenvalues set to zero
  std::size_t near_zero = 0;
};

// Symmetric square root through an eigendecomposition; negative eigenvalues
// are clamped to zero.
inline PsdRoot sqrt_psd(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  Eigen::VectorXd vals = eig.eigenvalues();
  PsdRoot out;
  const double scale = std::max(1.0, vals.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < vals.size(); ++i) {
    if (vals(i) < 0.0) {
      ++out.clamped;
      vals(i) = 0.0;
    }
    if (vals(i) <= 1e-12 * scale) ++out.near_zero;
    vals(i) = std::sqrt(vals(i));
  }
  out.root = eig.eigenvectors() * vals.asDiagonal() * eig.eigenvectors().transpose();
  return out;
}

struct FidResult {
  double value = 0.0;
  // Singular or indefinite covariance; clamping was applied and the value is
  // still returned.
  bool degenerate_covariance = false;
  std::size_t clamped_eigenvalues = 0;
};

inline FidResult frechet_distance(const GaussianSummary& a, const GaussianSummary& b) {
  if (a.mean.size() != b.mean.size()) throw Error(Errc::DimensionMismatch, "Gaussian dimensions differ");
  // tr sqrt(S_a S_b) = tr sqrt(S_a^1/2 S_b S_a^1/2), which keeps every
  // decomposition symmetric.
  const PsdRoot root_a = sqrt_psd(a.covariance);
  const Eigen::MatrixXd inner = root_a.root * b.covariance * root_a.root;
  const PsdRoot root_inner = sqrt_psd(0.5 * (inner + inner.transpose()));
  const PsdRoot root_b = sqrt_psd(b.covariance);

  FidResult r;
  const double mean_term = (a.mean - b.mean).squaredNorm();
  const double trace_term = a.covariance.trace() + b.covariance.trace() - 2.0 * root_inner.root.trace();
  r.value = std::max(0.0, mean_term + trace_term);
  r.clamped_eigenvalues = root_a.clamped + root_b.clamped + root_inner.clamped;
  r.degenerate_covariance = r.clamped_eigenvalues > 0 || root_a.near_zero > 0 || root_b.near_zero > 0;
  return r;
}

inline FidResult fid_detailed(const EmbeddingSet& real, const EmbeddingSet& generated) {
  if (real.dim() != generated.dim()) {
    throw Error(Errc::DimensionMismatch, "embedding dimensions " + std::to_string(real.dim()) + " and " +
                                             std::to_string(generated.dim()) + " differ");
  }
  return frechet_distance(fit_gaussian(real), fit_gaussian(generated));
}

inline double fid(const EmbeddingSet& real, const EmbeddingSet& generated) {
  return fid_detailed(real, generated).value;
}

struct RetrievalProtocol {
  std::size_t batch_size = 32;
  std::vector<std::size_t> top_ks{1, 2, 3};
  std::uint64_t seed = 0;
  std::size_t num_diversity_pairs = 300;

  void validate() const {
    if (top_ks.empty()) throw Error(Errc::InvalidArgument, "no top-k values");
    const std::size_t kmax = *std::max_element(top_ks.begin(), top_ks.end());
    if (*std::min_element(top_ks.begin(), top_ks.end()) < 1) throw Error(Errc::InvalidArgument, "top-k must be >= 1");
    if (batch_size < kmax + 1) throw Error(Errc::InvalidArgument, "batch size must exceed the largest top-k");
    if (num_diversity_pairs < 1) throw Error(Errc::InvalidArgument, "diversity needs at least one pair");
  }
};

// Mean distance between two disjoint, seeded, uniformly drawn index subsets.
inline double diversity(const EmbeddingSet& set, const RetrievalProtocol& protocol) {
  protocol.validate();
  const std::size_t k = protocol.num_diversity_pairs;
  if (set.size() < 2 * k) {
    throw Error(Errc::TooFewSamples, "diversity with " + std::to_string(k) + " pairs needs " +
                                         std::to_string(2 * k) + " rows, got " + std::to_string(set.size()));
  }
  SeededRng rng(protocol.seed);
  const std::vector<std::size_t> perm = rng.permutation(set.size());
  const RowMatrix& x = set.rows();
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) sum += (x.row(perm[i]) - x.row(perm[k + i])).norm();
  return sum / static_cast<double>(k);
}

enum class MatchingMode { Distance, DotSimilarity };

inline void check_aligned(const EmbeddingSet& text, const EmbeddingSet& motion) {
  if (text.dim() != motion.dim()) throw Error(Errc::DimensionMismatch, "text and motion dimensions differ");
  if (text.size() != motion.size() || text.ids() != motion.ids()) {
    throw Error(Errc::IdMisalignment, "text and motion ids are not aligned row-to-row");
  }
}

// Mean text-motion distance over aligned pairs (lower is closer), or mean dot
// product in similarity mode.
inline double matching_score(const EmbeddingSet& text, const EmbeddingSet& motion,
                             MatchingMode mode = MatchingMode::Distance) {
  check_aligned(text, motion);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < text.rows().rows(); ++i) {
    sum += mode == MatchingMode::Distance ? (text.rows().row(i) - motion.rows().row(i)).norm()
                                          : text.rows().row(i).dot(motion.rows().row(i));
  }
  return sum / static_cast<double>(text.size());
}

// Seeded shuffle, full batches of batch_size only; within a batch each text
// ranks every motion by distance, ties going to the lower position in the
// shuffled batch. Returns top_k -> fraction of queries whose own motion ranks
// inside the top k.
inline std::map<std::size_t, double> r_precision(const EmbeddingSet& text, const EmbeddingSet& motion,
                                                 const RetrievalProtocol& protocol) {
  protocol.validate();
  check_aligned(text, motion);
  const std::size_t n = text.size();
  const std::size_t bs = protocol.batch_size;
  if (n < bs) {
    throw Error(Errc::TooFewSamples, std::to_string(n) + " pairs is fewer than batch size " + std::to_string(bs));
  }
  SeededRng rng(protocol.seed);
  const std::vector<std::size_t> perm = rng.permutation(n);
  const std::size_t batches = n / bs;

  std::map<std::size_t, std::size_t> hits;
  for (std::size_t k : protocol.top_ks) hits[k] = 0;
  std::vector<double> dist(bs);
  for (std::size_t b = 0; b < batches; ++b) {
    const std::size_t* idx = perm.data() + b * bs;
    for (std::size_t q = 0; q < bs; ++q) {
      const auto query = text.rows().row(static_cast<Eigen::Index>(idx[q]));
      for (std::size_t c = 0; c < bs; ++c) {
        dist[c] = (query - motion.rows().row(static_cast<Eigen::Index>(idx[c]))).squaredNorm();
      }
      std::size_t rank = 0;
      for (std::size_t c = 0; c < bs; ++c) {
        if (dist[c] < dist[q] || (dist[c] == dist[q] && c < q)) ++rank;
      }
      for (auto& [k, count] : hits) {
        if (rank < k) ++count;
      }
    }
  }
  std::map<std::size_t, double> out;
  const auto queries = static_cast<double>(batches * bs);
  for (const auto& [k, count] : hits) out[k] = static_cast<double>(count) / queries;
  return out;
}

}  // namespace mtk
