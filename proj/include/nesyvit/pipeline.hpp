#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "nesyvit/asp_runtime.hpp"
#include "nesyvit/concept_core.hpp"
#include "nesyvit/fold_sem.hpp"
#include "nesyvit/rules.hpp"
#include "nesyvit/trainer.hpp"

namespace nesyvit {

struct PipelineConfig {
  TrainConfig train;
  FoldParams fold;
  double threshold = 0.5;
  double test_fraction = 0.2;
  std::uint64_t seed = 0;  // drives the split; train.seed drives training
};

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Per-class seeded split. Each class with at least two rows puts
/// round(fraction * count) of them (at least one, never all) into test.
/// Both index lists are ascending.
Split stratified_split(const std::vector<ClassId>& labels, std::size_t num_classes, double test_fraction,
                       std::uint64_t seed);

struct PipelineResult {
  Split split;
  TrainResult trained;
  BinaryConceptTable train_table;
  BinaryConceptTable test_table;
  RuleSet rules;
  Evaluation train_eval;
  Evaluation test_eval;
  RuleSetStats stats;
  /// Mean |z - round(z)| over the training activations.
  double binarization_gap = 0.0;
};

/// split -> train -> binarize -> learn -> evaluate.
PipelineResult run_pipeline(const EmbeddingDataset& data, const PipelineConfig& cfg);

/// Mean |z - round(z)|.
double binarization_gap(const ActivationBatch& acts);

/// Plain-text summary; identical inputs give identical text.
void write_pipeline_report(std::ostream& out, const PipelineResult& result,
                           const std::vector<std::string>& header_comments = {});

}  // namespace nesyvit
