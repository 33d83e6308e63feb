#include "clab/embedding_set.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "clab/error.hpp"
#include "clab/rng.hpp"

namespace clab {

// ---------------------------------------------------------------------------
// Labeling

Labeling::Labeling(std::vector<int> labels, int n_classes)
    : labels_(std::move(labels)), n_classes_(n_classes) {
  if (n_classes_ < 1) throw DomainError("labeling needs at least one class");
  counts_.assign(static_cast<std::size_t>(n_classes_), 0);
  for (int y : labels_) {
    if (y < 0 || y >= n_classes_) {
      throw DomainError("label " + std::to_string(y) + " outside [0, " +
                        std::to_string(n_classes_) + ")");
    }
    ++counts_[static_cast<std::size_t>(y)];
  }
  n_max_ = *std::max_element(counts_.begin(), counts_.end());
  balanced_ = std::all_of(counts_.begin(), counts_.end(),
                          [&](std::size_t c) { return c == counts_.front(); });
}

Labeling Labeling::balanced_blocks(std::size_t n_samples, int n_classes) {
  if (n_classes < 1 || n_samples % static_cast<std::size_t>(n_classes) != 0) {
    throw DomainError("balanced labeling needs N divisible by C");
  }
  const std::size_t per_class = n_samples / static_cast<std::size_t>(n_classes);
  std::vector<int> labels(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) labels[i] = static_cast<int>(i / per_class);
  return Labeling(std::move(labels), n_classes);
}

int Labeling::n_nonempty() const noexcept {
  return static_cast<int>(std::count_if(counts_.begin(), counts_.end(),
                                        [](std::size_t c) { return c > 0; }));
}

// ---------------------------------------------------------------------------
// EmbeddingSet

EmbeddingSet::EmbeddingSet(std::size_t n_samples, std::size_t n_augs, Eigen::MatrixXd data,
                           std::optional<Labeling> labeling)
    : n_samples_(n_samples), n_augs_(n_augs), data_(std::move(data)),
      labeling_(std::move(labeling)) {
  if (n_samples_ < 2) throw DomainError("an embedding set needs N >= 2");
  if (n_augs_ < 1) throw DomainError("an embedding set needs K >= 1");
  if (data_.cols() < 1) throw DomainError("an embedding set needs d >= 1");
  if (static_cast<std::size_t>(data_.rows()) != n_samples_ * n_augs_) {
    throw DomainError("data has " + std::to_string(data_.rows()) + " rows, expected N*K = " +
                      std::to_string(n_samples_ * n_augs_));
  }
  if (!data_.allFinite()) throw DomainError("embedding contains non-finite values");
  for (Eigen::Index r = 0; r < data_.rows(); ++r) {
    if (data_.row(r).norm() < kMinEmbeddingNorm) {
      throw DomainError("embedding row " + std::to_string(r) + " has norm below 1e-12");
    }
  }
  if (labeling_ && labeling_->n_samples() != n_samples_) {
    throw LabelMismatchError("labeling covers " + std::to_string(labeling_->n_samples()) +
                             " samples, set has " + std::to_string(n_samples_));
  }
}

Eigen::MatrixXd EmbeddingSet::unit_rows() const {
  return data_.rowwise().normalized();
}

EmbeddingSet EmbeddingSet::with_labeling(std::optional<Labeling> labeling) const {
  return EmbeddingSet(n_samples_, n_augs_, data_, std::move(labeling));
}

EmbeddingSet EmbeddingSet::permuted(std::span<const std::size_t> order) const {
  if (order.size() != n_samples_) throw DomainError("permutation length mismatch");
  Eigen::MatrixXd data(data_.rows(), data_.cols());
  std::vector<int> labels;
  for (std::size_t s = 0; s < n_samples_; ++s) {
    const std::size_t src = order[s];
    if (src >= n_samples_) throw DomainError("permutation index out of range");
    data.middleRows(static_cast<Eigen::Index>(s * n_augs_), static_cast<Eigen::Index>(n_augs_)) =
        data_.middleRows(static_cast<Eigen::Index>(src * n_augs_),
                         static_cast<Eigen::Index>(n_augs_));
    if (labeling_) labels.push_back(labeling_->label(src));
  }
  std::optional<Labeling> labeling;
  if (labeling_) labeling.emplace(std::move(labels), labeling_->n_classes());
  return EmbeddingSet(n_samples_, n_augs_, std::move(data), std::move(labeling));
}

bool operator==(const EmbeddingSet& a, const EmbeddingSet& b) {
  return a.n_samples_ == b.n_samples_ && a.n_augs_ == b.n_augs_ &&
         a.data_.rows() == b.data_.rows() && a.data_.cols() == b.data_.cols() &&
         a.data_ == b.data_ && a.labeling_ == b.labeling_;
}

// ---------------------------------------------------------------------------
// Generators

EmbeddingSet generate_gaussian_classes(const GaussianTaskSpec& spec) {
  const int n_classes = spec.n_classes();
  const auto dim = static_cast<Eigen::Index>(spec.dim());
  if (n_classes < 1 || dim < 1) throw DomainError("gaussian task needs C >= 1 and d >= 1");
  if (spec.per_class < 1 || spec.n_augs < 1) throw DomainError("gaussian task needs n, K >= 1");
  if (spec.latent_sigma < 0.0 || spec.aug_sigma < 0.0) throw DomainError("negative sigma");
  if (spec.latent_sigma == 0.0) {
    for (int a = 0; a < n_classes; ++a) {
      for (int b = a + 1; b < n_classes; ++b) {
        if ((spec.class_means.row(a) - spec.class_means.row(b)).norm() == 0.0) {
          throw DegenerateError("classes " + std::to_string(a) + " and " + std::to_string(b) +
                                " share a mean with zero latent spread");
        }
      }
    }
  }

  const std::size_t n_samples = spec.per_class * static_cast<std::size_t>(n_classes);
  Eigen::MatrixXd data(static_cast<Eigen::Index>(n_samples * spec.n_augs), dim);
  std::vector<int> labels(n_samples);
  Rng rng(derive_seed(spec.seed, 0));
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::RowVectorXd latent(dim);

  Eigen::Index row = 0;
  for (int c = 0; c < n_classes; ++c) {
    for (std::size_t s = 0; s < spec.per_class; ++s) {
      labels[static_cast<std::size_t>(c) * spec.per_class + s] = c;
      for (Eigen::Index k = 0; k < dim; ++k) {
        latent[k] = spec.class_means(c, k) + spec.latent_sigma * normal(rng);
      }
      for (std::size_t l = 0; l < spec.n_augs; ++l, ++row) {
        for (Eigen::Index k = 0; k < dim; ++k) {
          data(row, k) = latent[k] + spec.aug_sigma * normal(rng);
        }
      }
    }
  }
  return EmbeddingSet(n_samples, spec.n_augs, std::move(data), Labeling(std::move(labels), n_classes));
}

EmbeddingSet generate_random_unit(std::size_t n_samples, std::size_t n_augs, std::size_t dim,
                                  std::uint64_t seed) {
  if (n_samples < 1 || n_augs < 1 || dim < 1) throw DomainError("dimensions must be positive");
  Rng rng(derive_seed(seed, 0));
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd data(static_cast<Eigen::Index>(n_samples * n_augs), static_cast<Eigen::Index>(dim));
  for (Eigen::Index r = 0; r < data.rows(); ++r) {
    do {
      for (Eigen::Index k = 0; k < data.cols(); ++k) data(r, k) = normal(rng);
    } while (data.row(r).norm() < 1e-6);
    data.row(r).normalize();
  }
  return EmbeddingSet(n_samples, n_augs, std::move(data));
}

Eigen::MatrixXd random_orthogonal(std::size_t dim, std::uint64_t seed) {
  const auto d = static_cast<Eigen::Index>(dim);
  Rng rng(derive_seed(seed, 1));
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd g(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) g(i, j) = normal(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  // Sign fix makes the distribution Haar rather than QR-convention biased.
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < d; ++j) {
    if (r(j, j) < 0) q.col(j) *= -1.0;
  }
  return q;
}

Eigen::MatrixXd simplex_etf(int n_classes, std::size_t dim,
                            std::optional<std::uint64_t> rotation_seed) {
  if (n_classes < 2) throw DomainError("a simplex ETF needs C >= 2");
  if (dim + 1 < static_cast<std::size_t>(n_classes)) throw DomainError("simplex ETF needs d >= C - 1");
  const Eigen::Index c = n_classes;
  const Eigen::MatrixXd centering =
      Eigen::MatrixXd::Identity(c, c) - Eigen::MatrixXd::Constant(c, c, 1.0 / static_cast<double>(c));
  // Eigenvalues are {0, 1 (x C-1)}; the unit-eigenvalue vectors span 1^perp.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(centering);
  const Eigen::MatrixXd basis = eig.eigenvectors().rightCols(c - 1);
  Eigen::MatrixXd etf = Eigen::MatrixXd::Zero(c, static_cast<Eigen::Index>(dim));
  etf.leftCols(c - 1) = (centering * basis).rowwise().normalized();
  if (rotation_seed) etf = etf * random_orthogonal(dim, *rotation_seed).transpose();
  return etf;
}

// ---------------------------------------------------------------------------
// EMB1 bundle

namespace {

constexpr std::array<char, 4> kMagic = {'E', 'M', 'B', '1'};

template <typename T>
void put_le(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T> && sizeof(T) == 4);
  std::uint32_t bits;
  std::memcpy(&bits, &value, 4);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
  out.write(reinterpret_cast<const char*>(&bits), 4);
}

template <typename T>
T get_le(std::istream& in, const char* what) {
  std::uint32_t bits;
  if (!in.read(reinterpret_cast<char*>(&bits), 4)) {
    throw TruncatedError(std::string("bundle truncated while reading ") + what);
  }
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
  T value;
  std::memcpy(&value, &bits, 4);
  return value;
}

}  // namespace

void save_bundle(const EmbeddingSet& set, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(kMagic.data(), kMagic.size());
  put_le(out, static_cast<std::uint32_t>(set.n_samples()));
  put_le(out, static_cast<std::uint32_t>(set.n_augs()));
  put_le(out, static_cast<std::uint32_t>(set.dim()));
  put_le(out, static_cast<std::uint32_t>(set.labeled() ? set.labeling()->n_classes() : 0));
  const Eigen::MatrixXd& data = set.data();
  for (Eigen::Index r = 0; r < data.rows(); ++r)
    for (Eigen::Index k = 0; k < data.cols(); ++k) put_le(out, static_cast<float>(data(r, k)));
  if (set.labeled()) {
    for (int y : set.labeling()->labels()) put_le(out, static_cast<std::int32_t>(y));
  }
  if (!out) throw IoError("write to " + path.string() + " failed");
}

EmbeddingSet load_bundle(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), magic.size())) throw TruncatedError("bundle shorter than its magic");
  if (magic != kMagic) throw FormatError("bad bundle magic (expected EMB1)");
  const auto n = get_le<std::uint32_t>(in, "N");
  const auto k = get_le<std::uint32_t>(in, "K");
  const auto d = get_le<std::uint32_t>(in, "d");
  const auto c = get_le<std::uint32_t>(in, "C");
  if (n == 0 || k == 0 || d == 0) throw FormatError("bundle header has a zero dimension");

  Eigen::MatrixXd data(static_cast<Eigen::Index>(std::uint64_t{n} * k), static_cast<Eigen::Index>(d));
  for (Eigen::Index r = 0; r < data.rows(); ++r)
    for (Eigen::Index j = 0; j < data.cols(); ++j) data(r, j) = get_le<float>(in, "embedding data");

  std::optional<Labeling> labeling;
  if (c > 0) {
    std::vector<int> labels(n);
    for (auto& y : labels) {
      std::int32_t raw;
      try {
        raw = get_le<std::int32_t>(in, "labels");
      } catch (const TruncatedError&) {
        throw LabelMismatchError("bundle declares " + std::to_string(n) +
                                 " labels but the label block is short");
      }
      if (raw < 0 || static_cast<std::uint32_t>(raw) >= c) {
        throw LabelMismatchError("label " + std::to_string(raw) + " outside [0, C)");
      }
      y = raw;
    }
    labeling.emplace(std::move(labels), static_cast<int>(c));
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw FormatError("trailing bytes after bundle payload");
  }
  return EmbeddingSet(n, k, std::move(data), std::move(labeling));
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, ',')) {
    const auto first = field.find_first_not_of(" \t\r");
    const auto last = field.find_last_not_of(" \t\r");
    fields.push_back(first == std::string::npos ? std::string() : field.substr(first, last - first + 1));
  }
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

template <typename T>
bool parse_number(const std::string& text, T& value) {
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  return ec == std::errc() && ptr == end;
}

}  // namespace

EmbeddingSet load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());

  struct Row {
    std::size_t sample, aug;
    std::optional<int> label;
    std::vector<double> coords;
  };
  std::vector<Row> rows;
  std::string line;
  std::size_t line_no = 0;
  std::size_t dim = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = split_fields(line);
    std::size_t sample = 0;
    if (rows.empty() && line_no == 1 && !parse_number(fields.front(), sample)) continue;  // header
    if (fields.size() < 4) throw FormatError("csv line " + std::to_string(line_no) + ": too few columns");
    Row row{};
    if (!parse_number(fields[0], row.sample) || !parse_number(fields[1], row.aug)) {
      throw FormatError("csv line " + std::to_string(line_no) + ": bad sample/aug id");
    }
    if (!fields[2].empty()) {
      int label = 0;
      if (!parse_number(fields[2], label)) {
        throw FormatError("csv line " + std::to_string(line_no) + ": bad label");
      }
      row.label = label;
    }
    for (std::size_t f = 3; f < fields.size(); ++f) {
      double v = 0.0;
      if (!parse_number(fields[f], v)) {
        throw FormatError("csv line " + std::to_string(line_no) + ": bad coordinate");
      }
      row.coords.push_back(v);
    }
    if (dim == 0) dim = row.coords.size();
    if (row.coords.size() != dim) throw FormatError("csv line " + std::to_string(line_no) + ": ragged row");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw FormatError("csv has no data rows");

  std::size_t n = 0, k = 0;
  for (const auto& r : rows) {
    n = std::max(n, r.sample + 1);
    k = std::max(k, r.aug + 1);
  }
  if (rows.size() != n * k) throw TruncatedError("csv does not cover every (sample, aug) pair");
  Eigen::MatrixXd data(static_cast<Eigen::Index>(n * k), static_cast<Eigen::Index>(dim));
  std::vector<char> seen(n * k, 0);
  std::vector<std::optional<int>> labels(n);
  std::vector<char> label_set(n, 0);
  for (const auto& r : rows) {
    const std::size_t idx = r.sample * k + r.aug;
    if (seen[idx]) throw FormatError("csv repeats sample " + std::to_string(r.sample));
    seen[idx] = 1;
    data.row(static_cast<Eigen::Index>(idx)) =
        Eigen::Map<const Eigen::RowVectorXd>(r.coords.data(), static_cast<Eigen::Index>(dim));
    if (label_set[r.sample] && labels[r.sample] != r.label) {
      throw LabelMismatchError("csv gives sample " + std::to_string(r.sample) + " two labels");
    }
    labels[r.sample] = r.label;
    label_set[r.sample] = 1;
  }
  const auto n_labeled = std::count_if(labels.begin(), labels.end(), [](const auto& y) { return y.has_value(); });
  std::optional<Labeling> labeling;
  if (n_labeled > 0) {
    if (static_cast<std::size_t>(n_labeled) != n) throw LabelMismatchError("csv labels only some samples");
    std::vector<int> ys(n);
    int n_classes = 0;
    for (std::size_t i = 0; i < n; ++i) {
      ys[i] = *labels[i];
      if (ys[i] < 0) throw LabelMismatchError("negative label in csv");
      n_classes = std::max(n_classes, ys[i] + 1);
    }
    labeling.emplace(std::move(ys), n_classes);
  }
  return EmbeddingSet(n, k, std::move(data), std::move(labeling));
}

void save_csv(const EmbeddingSet& set, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "sample_id,aug_id,label";
  for (std::size_t k = 0; k < set.dim(); ++k) out << ",x" << k;
  out << '\n';
  char buf[32];
  for (std::size_t i = 0; i < set.n_samples(); ++i) {
    for (std::size_t l = 0; l < set.n_augs(); ++l) {
      out << i << ',' << l << ',';
      if (set.labeled()) out << set.labeling()->label(i);
      const auto row = set.row(i, l);
      for (Eigen::Index k = 0; k < row.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.17g", row[k]);
        out << ',' << buf;
      }
      out << '\n';
    }
  }
}

}  // namespace clab
