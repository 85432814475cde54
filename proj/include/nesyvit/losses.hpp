#pragma once

#include <span>
#include <vector>

#include "nesyvit/concept_core.hpp"

namespace nesyvit {

struct LossConfig {
  double alpha = 2.0;    // supervised contrastive weight
  double beta = 1.0;     // entropy weight
  double gamma = 1.0;    // L1 sparsity weight
  double tau = 0.1;      // contrastive temperature
  double epsilon = 1e-7; // entropy log offset

  void validate() const;
};

struct LossBreakdown {
  double supcon = 0.0;
  double entropy = 0.0;
  double sparsity = 0.0;
  double total = 0.0;
};

struct LayerGradient {
  Matrix weights;            // D x E
  std::vector<double> bias;  // D
};

/// Rows with norm at or below this are treated as zero vectors.
inline constexpr double kNormFloor = 1e-12;

/// Unit-length copy of `z`; a vector with norm <= kNormFloor maps to zeros.
std::vector<double> l2_normalize(std::span<const double> z);

/// Supervised contrastive loss on L2-normalized rows, averaged over all N
/// anchors. Anchors without positives and all-zero rows contribute 0, and
/// zero rows are left out of every other anchor's positive and contrast sets.
double supcon_loss(const ActivationBatch& batch, const LossConfig& cfg);

/// Mean binary entropy of the activations (natural log, epsilon inside the logs).
double entropy_loss(const ActivationBatch& batch, const LossConfig& cfg);

/// Mean absolute activation.
double l1_loss(const ActivationBatch& batch);

LossBreakdown total_loss(const ActivationBatch& batch, const LossConfig& cfg);

/// Loss of forward(layer, data).
LossBreakdown total_loss(const SparseConceptLayer& layer, const EmbeddingDataset& data,
                         const LossConfig& cfg);

/// Analytic gradient of total_loss(forward(layer, data), cfg).total.
LayerGradient grad_total(const SparseConceptLayer& layer, const EmbeddingDataset& data,
                         const LossConfig& cfg);

/// Same as grad_total, also returning the loss at the current parameters.
LayerGradient grad_total(const SparseConceptLayer& layer, const EmbeddingDataset& data,
                         const LossConfig& cfg, LossBreakdown& loss);

/// Central finite differences of total_loss with step h on every parameter.
LayerGradient numeric_gradient(const SparseConceptLayer& layer, const EmbeddingDataset& data,
                               const LossConfig& cfg, double h);

}  // namespace nesyvit
