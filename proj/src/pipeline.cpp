#include "nesyvit/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "nesyvit/io.hpp"
#include "nesyvit/random.hpp"

namespace nesyvit {

Split stratified_split(const std::vector<ClassId>& labels, std::size_t num_classes, double test_fraction,
                       std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw std::invalid_argument("test fraction must lie in (0, 1)");
  }
  std::vector<std::vector<std::size_t>> by_class(num_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= num_classes) throw std::invalid_argument("label out of range");
    by_class[labels[i]].push_back(i);
  }
  Split s;
  for (std::size_t c = 0; c < num_classes; ++c) {
    auto& rows = by_class[c];
    Rng rng(seed, 0x5b117000 + c);
    rng.shuffle(std::span<std::size_t>(rows));
    std::size_t n_test = 0;
    if (rows.size() >= 2) {
      n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(rows.size())));
      n_test = std::clamp<std::size_t>(n_test, 1, rows.size() - 1);
    }
    s.test.insert(s.test.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_test));
    s.train.insert(s.train.end(), rows.begin() + static_cast<std::ptrdiff_t>(n_test), rows.end());
  }
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

double binarization_gap(const ActivationBatch& acts) {
  const auto& z = acts.z.data();
  if (z.empty()) return 0.0;
  double sum = 0.0;
  for (double v : z) sum += std::abs(v - std::round(v));
  return sum / static_cast<double>(z.size());
}

PipelineResult run_pipeline(const EmbeddingDataset& data, const PipelineConfig& cfg) {
  data.validate();
  PipelineResult r;
  r.split = stratified_split(data.labels, data.class_names.size(), cfg.test_fraction, cfg.seed);
  const EmbeddingDataset train_data = data.subset(r.split.train);
  const EmbeddingDataset test_data = data.subset(r.split.test);

  r.trained = train(train_data, cfg.train);
  const ActivationBatch train_acts = forward(r.trained.layer, train_data);
  r.binarization_gap = binarization_gap(train_acts);
  r.train_table = binarize(train_acts, data.class_names, cfg.threshold);
  r.test_table = binarize(forward(r.trained.layer, test_data), data.class_names, cfg.threshold);

  r.rules = learn(r.train_table, cfg.fold);
  r.train_eval = evaluate(r.rules, r.train_table);
  r.test_eval = evaluate(r.rules, r.test_table);
  r.stats = stats(r.rules);
  return r;
}

void write_pipeline_report(std::ostream& out, const PipelineResult& result,
                           const std::vector<std::string>& header_comments) {
  for (const auto& c : header_comments) out << "# " << c << '\n';
  out << "train_rows " << result.split.train.size() << '\n';
  out << "test_rows " << result.split.test.size() << '\n';
  if (!result.trained.history.epochs.empty()) {
    const auto& h = result.trained.history.epochs;
    out << "first_epoch_loss " << format_real(h.front().loss.total) << '\n';
    out << "final_epoch_loss " << format_real(h.back().loss.total) << '\n';
  }
  out << "binarization_gap " << format_real(result.binarization_gap) << '\n';
  out << "train_accuracy " << format_real(result.train_eval.accuracy) << '\n';
  out << "test_accuracy " << format_real(result.test_eval.accuracy) << '\n';
  out << "test_abstained " << result.test_eval.abstained << '\n';
  out << "rules " << result.stats.rules << '\n';
  out << "unique_predicates " << result.stats.unique_predicates << '\n';
  out << "size " << result.stats.size << '\n';
}

}  // namespace nesyvit
