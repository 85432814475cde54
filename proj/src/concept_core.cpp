#include "nesyvit/concept_core.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "nesyvit/random.hpp"

namespace nesyvit {

void EmbeddingDataset::validate() const {
  if (size() == 0) throw std::invalid_argument("embedding dataset is empty");
  if (dim() == 0) throw std::invalid_argument("embedding dimension must be at least 1");
  if (labels.size() != size()) {
    throw std::invalid_argument("embedding dataset has " + std::to_string(size()) + " rows but " +
                                std::to_string(labels.size()) + " labels");
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= class_names.size()) {
      throw std::invalid_argument("label of row " + std::to_string(i) + " is not a known class");
    }
  }
  for (double v : features.data()) {
    if (!std::isfinite(v)) throw std::invalid_argument("embedding contains a non-finite value");
  }
}

EmbeddingDataset EmbeddingDataset::subset(std::span<const std::size_t> indices) const {
  EmbeddingDataset out;
  out.features = Matrix(indices.size(), dim());
  out.labels.reserve(indices.size());
  out.class_names = class_names;
  for (std::size_t r = 0; r < indices.size(); ++r) {
    auto src = features.row(indices[r]);
    std::copy(src.begin(), src.end(), out.features.row(r).begin());
    out.labels.push_back(labels[indices[r]]);
  }
  return out;
}

void SparseConceptLayer::validate() const {
  if (concepts() == 0 || input_dim() == 0) {
    throw std::invalid_argument("concept layer needs at least one concept and one input");
  }
  if (bias.size() != concepts()) {
    throw std::invalid_argument("concept layer bias has " + std::to_string(bias.size()) +
                                " entries, expected " + std::to_string(concepts()));
  }
  for (double v : weights.data()) {
    if (!std::isfinite(v)) throw std::invalid_argument("concept layer weight is not finite");
  }
  for (double v : bias) {
    if (!std::isfinite(v)) throw std::invalid_argument("concept layer bias is not finite");
  }
}

SparseConceptLayer SparseConceptLayer::initialize(std::size_t concepts, std::size_t input_dim,
                                                  std::uint64_t seed) {
  if (concepts == 0 || input_dim == 0) {
    throw std::invalid_argument("concept layer needs at least one concept and one input");
  }
  SparseConceptLayer layer;
  layer.weights = Matrix(concepts, input_dim);
  layer.bias.assign(concepts, 0.0);
  const double bound = 1.0 / std::sqrt(static_cast<double>(input_dim));
  Rng rng(seed);
  for (double& w : layer.weights.data()) w = rng.uniform(-bound, bound);
  return layer;
}

void BinaryConceptTable::validate() const {
  if (bits.size() != rows * columns()) {
    throw std::invalid_argument("binary table has " + std::to_string(bits.size()) +
                                " cells, expected " + std::to_string(rows * columns()));
  }
  if (labels.size() != rows) throw std::invalid_argument("binary table label count mismatch");
  for (std::uint8_t b : bits) {
    if (b > 1) throw std::invalid_argument("binary table entry is not 0 or 1");
  }
  for (ClassId c : labels) {
    if (c >= class_names.size()) throw std::invalid_argument("binary table label is not a known class");
  }
}

BinaryConceptTable BinaryConceptTable::subset(std::span<const std::size_t> indices) const {
  BinaryConceptTable out;
  out.rows = indices.size();
  out.neuron_names = neuron_names;
  out.class_names = class_names;
  out.bits.reserve(out.rows * columns());
  out.labels.reserve(out.rows);
  for (std::size_t i : indices) {
    auto r = row(i);
    out.bits.insert(out.bits.end(), r.begin(), r.end());
    out.labels.push_back(labels[i]);
  }
  return out;
}

std::vector<std::string> default_neuron_names(std::size_t count) {
  std::vector<std::string> names;
  names.reserve(count);
  for (std::size_t j = 0; j < count; ++j) names.push_back("n" + std::to_string(j));
  return names;
}

double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

ActivationBatch forward(const SparseConceptLayer& layer, const EmbeddingDataset& data) {
  if (layer.input_dim() != data.dim()) {
    throw DimensionError("concept layer expects inputs of dimension " +
                         std::to_string(layer.input_dim()) + " but embeddings have dimension " +
                         std::to_string(data.dim()));
  }
  const std::size_t n = data.size();
  const std::size_t d = layer.concepts();
  ActivationBatch out;
  out.z = Matrix(n, d);
  out.labels = data.labels;
  for (std::size_t i = 0; i < n; ++i) {
    auto x = data.features.row(i);
    for (std::size_t j = 0; j < d; ++j) {
      auto w = layer.weights.row(j);
      double a = layer.bias[j];
      for (std::size_t e = 0; e < x.size(); ++e) a += w[e] * x[e];
      out.z(i, j) = sigmoid(a);
    }
  }
  return out;
}

BinaryConceptTable binarize(const ActivationBatch& acts, const std::vector<std::string>& class_names,
                            double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw std::invalid_argument("binarization threshold must lie in (0, 1), got " +
                                std::to_string(threshold));
  }
  BinaryConceptTable table;
  table.rows = acts.size();
  table.labels = acts.labels;
  table.neuron_names = default_neuron_names(acts.concepts());
  table.class_names = class_names;
  table.bits.reserve(acts.z.data().size());
  for (double z : acts.z.data()) table.bits.push_back(z >= threshold ? 1 : 0);
  return table;
}

BinaryConceptTable binarize(const ActivationBatch& acts, double threshold) {
  std::size_t classes = 0;
  for (ClassId c : acts.labels) classes = std::max(classes, c + 1);
  std::vector<std::string> names;
  for (std::size_t c = 0; c < classes; ++c) names.push_back("c" + std::to_string(c));
  return binarize(acts, names, threshold);
}

}  // namespace nesyvit
