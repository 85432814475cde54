#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "nesyvit/concept_core.hpp"
#include "nesyvit/losses.hpp"

namespace nesyvit {

enum class LrSchedule { plateau, cosine };

struct TrainConfig {
  std::size_t concepts = kDefaultConcepts;
  double learning_rate = 5e-6;
  double weight_decay = 5e-3;
  std::size_t batch_size = 32;
  std::size_t epochs = 50;
  std::size_t plateau_patience = 10;
  double lr_decay_factor = 0.5;
  // Relative improvement the plateau scheduler requires to reset its counter.
  double plateau_threshold = 1e-4;
  LrSchedule schedule = LrSchedule::plateau;
  // AdamW moments
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;
  LossConfig loss;

  void validate() const;
};

struct EpochRecord {
  LossBreakdown loss;  // mean over the epoch's batches
  double learning_rate = 0.0;
  double seconds = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
};

struct TrainResult {
  SparseConceptLayer layer;
  TrainHistory history;
};

/// Index batches for one epoch. Within each class the order is shuffled and
/// cut into same-class pairs; every batch opens with a pair while pairs remain,
/// so each batch holds positives for the contrastive term whenever possible.
/// A trailing singleton batch is merged into its predecessor.
std::vector<std::vector<std::size_t>> make_batches(const EmbeddingDataset& data,
                                                   const TrainConfig& cfg, std::size_t epoch);

/// AdamW on grad_total with plateau (or cosine) learning-rate decay.
/// Throws NumericError naming the epoch and batch when the loss stops being finite.
TrainResult train(const EmbeddingDataset& data, const TrainConfig& cfg);

/// Same, starting from `init`.
TrainResult train(const EmbeddingDataset& data, const TrainConfig& cfg, SparseConceptLayer init);

/// CSV with header `epoch,supcon,entropy,sparsity,total,lr`.
void write_history(std::ostream& out, const TrainHistory& history);

}  // namespace nesyvit
