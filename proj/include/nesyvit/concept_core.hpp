#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nesyvit/error.hpp"

namespace nesyvit {

using ClassId = std::size_t;

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::vector<double>& data() noexcept { return data_; }
  const std::vector<double>& data() const noexcept { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Embedding vectors (one row per sample) with class labels.
struct EmbeddingDataset {
  Matrix features;  // N x E
  std::vector<ClassId> labels;
  std::vector<std::string> class_names;

  std::size_t size() const noexcept { return features.rows(); }
  std::size_t dim() const noexcept { return features.cols(); }

  /// Throws std::invalid_argument if any invariant is broken.
  void validate() const;

  /// Rows selected by `indices`, in that order. Class names are kept.
  EmbeddingDataset subset(std::span<const std::size_t> indices) const;
};

/// Linear map followed by an element-wise sigmoid.
struct SparseConceptLayer {
  Matrix weights;             // D x E
  std::vector<double> bias;   // D

  std::size_t concepts() const noexcept { return weights.rows(); }
  std::size_t input_dim() const noexcept { return weights.cols(); }

  void validate() const;

  /// Fan-in scaled uniform weights in [-1/sqrt(E), 1/sqrt(E)], zero bias.
  static SparseConceptLayer initialize(std::size_t concepts, std::size_t input_dim,
                                       std::uint64_t seed);
};

inline constexpr std::size_t kDefaultConcepts = 128;

/// Sigmoid outputs, one row per sample.
struct ActivationBatch {
  Matrix z;  // N x D, entries in [0, 1]
  std::vector<ClassId> labels;

  std::size_t size() const noexcept { return z.rows(); }
  std::size_t concepts() const noexcept { return z.cols(); }
};

struct BinaryConceptTable {
  std::size_t rows = 0;
  std::vector<std::uint8_t> bits;  // rows x neuron_names.size(), row-major
  std::vector<ClassId> labels;
  std::vector<std::string> neuron_names;
  std::vector<std::string> class_names;

  std::size_t columns() const noexcept { return neuron_names.size(); }
  bool bit(std::size_t r, std::size_t c) const { return bits[r * columns() + c] != 0; }
  std::span<const std::uint8_t> row(std::size_t r) const {
    return {bits.data() + r * columns(), columns()};
  }

  void validate() const;
  BinaryConceptTable subset(std::span<const std::size_t> indices) const;
};

/// `nJ` for J in [0, count).
std::vector<std::string> default_neuron_names(std::size_t count);

double sigmoid(double x) noexcept;

/// z[i] = sigmoid(W x_i + b).
ActivationBatch forward(const SparseConceptLayer& layer, const EmbeddingDataset& data);

/// bit = 1 iff z >= threshold.
BinaryConceptTable binarize(const ActivationBatch& acts, double threshold = 0.5);

BinaryConceptTable binarize(const ActivationBatch& acts, const std::vector<std::string>& class_names,
                            double threshold = 0.5);

}  // namespace nesyvit
