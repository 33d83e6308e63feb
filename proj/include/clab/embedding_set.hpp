#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace clab {

// Embeddings closer to the origin than this are rejected: cosine similarity
// divides by the norm.
inline constexpr double kMinEmbeddingNorm = 1e-12;

// Class assignment of the N samples of an embedding set. Labels are 0-based.
class Labeling {
 public:
  Labeling(std::vector<int> labels, int n_classes);

  // Class c owns samples [c*n, (c+1)*n) for n = n_samples / n_classes.
  static Labeling balanced_blocks(std::size_t n_samples, int n_classes);

  const std::vector<int>& labels() const noexcept { return labels_; }
  int label(std::size_t sample) const { return labels_[sample]; }
  int n_classes() const noexcept { return n_classes_; }
  std::size_t n_samples() const noexcept { return labels_.size(); }
  const std::vector<std::size_t>& class_counts() const noexcept { return counts_; }
  std::size_t n_max() const noexcept { return n_max_; }
  bool balanced() const noexcept { return balanced_; }
  // Number of classes with at least one sample.
  int n_nonempty() const noexcept;

  friend bool operator==(const Labeling&, const Labeling&) = default;

 private:
  std::vector<int> labels_;
  int n_classes_;
  std::vector<std::size_t> counts_;
  std::size_t n_max_ = 0;
  bool balanced_ = false;
};

// N samples x K augmentations x d coordinates. Row i*K + l of data() holds
// z_i^l. Values are stored as given (not normalized); immutable once built.
class EmbeddingSet {
 public:
  EmbeddingSet(std::size_t n_samples, std::size_t n_augs, Eigen::MatrixXd data,
               std::optional<Labeling> labeling = std::nullopt);

  std::size_t n_samples() const noexcept { return n_samples_; }
  std::size_t n_augs() const noexcept { return n_augs_; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(data_.cols()); }
  std::size_t n_rows() const noexcept { return static_cast<std::size_t>(data_.rows()); }
  std::size_t row_index(std::size_t sample, std::size_t aug) const noexcept {
    return sample * n_augs_ + aug;
  }

  const Eigen::MatrixXd& data() const noexcept { return data_; }
  auto row(std::size_t sample, std::size_t aug) const { return data_.row(row_index(sample, aug)); }

  bool labeled() const noexcept { return labeling_.has_value(); }
  const std::optional<Labeling>& labeling() const noexcept { return labeling_; }

  // Same tensor with the rows of each sample normalized to unit length.
  Eigen::MatrixXd unit_rows() const;

  EmbeddingSet with_labeling(std::optional<Labeling> labeling) const;
  // Samples reordered so that new sample s is old sample order[s].
  EmbeddingSet permuted(std::span<const std::size_t> order) const;

  friend bool operator==(const EmbeddingSet&, const EmbeddingSet&);

 private:
  std::size_t n_samples_;
  std::size_t n_augs_;
  Eigen::MatrixXd data_;
  std::optional<Labeling> labeling_;
};

// Synthetic class-conditional task: class c draws latents around
// class_means.row(c), each augmentation adds independent isotropic noise.
struct GaussianTaskSpec {
  Eigen::MatrixXd class_means;  // C x d
  double latent_sigma = 0.0;
  double aug_sigma = 0.0;
  std::size_t per_class = 1;
  std::size_t n_augs = 1;
  std::uint64_t seed = 0;

  int n_classes() const noexcept { return static_cast<int>(class_means.rows()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(class_means.cols()); }
};

EmbeddingSet generate_gaussian_classes(const GaussianTaskSpec& spec);

// i.i.d. standard normal vectors scaled to unit norm; unlabeled.
EmbeddingSet generate_random_unit(std::size_t n_samples, std::size_t n_augs, std::size_t dim,
                                  std::uint64_t seed);

// C x d matrix whose rows are unit vectors forming a simplex equiangular
// tight frame (requires d >= C - 1), optionally rotated by a seeded random
// orthogonal map when seed is given.
Eigen::MatrixXd simplex_etf(int n_classes, std::size_t dim,
                            std::optional<std::uint64_t> rotation_seed = std::nullopt);

// Haar-distributed d x d orthogonal matrix.
Eigen::MatrixXd random_orthogonal(std::size_t dim, std::uint64_t seed);

// EMB1 bundle: little-endian "EMB1", u32 N, u32 K, u32 d, u32 C (0 when
// unlabeled), N*K*d float32 in (sample, aug, coord) order, then N int32 labels
// when C > 0. Values are narrowed to float32 on save.
void save_bundle(const EmbeddingSet& set, const std::filesystem::path& path);
EmbeddingSet load_bundle(const std::filesystem::path& path);

// One row per (sample, augmentation): sample_id, aug_id, label_or_blank,
// then d coordinates. A header row is accepted when its first field is not
// numeric. Sample ids must be 0..N-1 and every (sample, aug) present once.
EmbeddingSet load_csv(const std::filesystem::path& path);
void save_csv(const EmbeddingSet& set, const std::filesystem::path& path);

}  // namespace clab
