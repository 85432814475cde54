#include "nesyvit/trainer.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>

#include "nesyvit/io.hpp"
#include "nesyvit/random.hpp"

namespace nesyvit {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
  if (!(lr_decay_factor > 0.0 && lr_decay_factor < 1.0)) {
    throw std::invalid_argument("learning-rate decay factor must lie in (0, 1)");
  }
  if (weight_decay < 0.0) throw std::invalid_argument("weight decay must be non-negative");
  if (batch_size < 2) throw std::invalid_argument("batch size must be at least 2");
  if (epochs < 1) throw std::invalid_argument("epochs must be at least 1");
  if (concepts < 1) throw std::invalid_argument("concept count must be at least 1");
  loss.validate();
}

std::vector<std::vector<std::size_t>> make_batches(const EmbeddingDataset& data,
                                                   const TrainConfig& cfg, std::size_t epoch) {
  if (cfg.batch_size < 2) throw std::invalid_argument("batch size must be at least 2");
  const std::size_t n = data.size();
  if (n < 2) throw std::invalid_argument("training needs at least 2 samples");

  Rng rng(cfg.seed, 0x5eed0000u + epoch);
  if (cfg.batch_size >= n) {
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    rng.shuffle(std::span<std::size_t>(all));
    return {all};
  }

  std::vector<std::vector<std::size_t>> per_class(data.class_names.size());
  for (std::size_t i = 0; i < n; ++i) per_class[data.labels[i]].push_back(i);

  struct Chunk {
    std::size_t first;
    std::size_t second;
    bool pair;
  };
  std::vector<Chunk> chunks;
  for (auto& members : per_class) {
    rng.shuffle(std::span<std::size_t>(members));
    std::size_t k = 0;
    for (; k + 1 < members.size(); k += 2) chunks.push_back({members[k], members[k + 1], true});
    if (k < members.size()) chunks.push_back({members[k], 0, false});
  }
  rng.shuffle(std::span<Chunk>(chunks));

  std::vector<bool> used(chunks.size(), false);
  std::size_t next_pair = 0;
  auto take_pair = [&]() -> const Chunk* {
    while (next_pair < chunks.size() && (used[next_pair] || !chunks[next_pair].pair)) ++next_pair;
    if (next_pair == chunks.size()) return nullptr;
    used[next_pair] = true;
    return &chunks[next_pair];
  };

  // Batches open with a pair and are topped up in shuffled chunk order; a
  // pair may overshoot the nominal size by one.
  std::vector<std::vector<std::size_t>> batches;
  std::size_t cursor = 0;
  std::size_t remaining = chunks.size();
  while (remaining > 0) {
    std::vector<std::size_t> current;
    auto append = [&](const Chunk& c) {
      current.push_back(c.first);
      if (c.pair) current.push_back(c.second);
      --remaining;
    };
    if (const Chunk* p = take_pair()) append(*p);
    while (current.size() < cfg.batch_size && remaining > 0) {
      while (used[cursor]) ++cursor;
      used[cursor] = true;
      append(chunks[cursor]);
    }
    batches.push_back(std::move(current));
  }
  if (batches.size() > 1 && batches.back().size() == 1) {
    batches[batches.size() - 2].push_back(batches.back().front());
    batches.pop_back();
  }
  return batches;
}

namespace {

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::size_t step = 0;
};

// Decoupled weight decay, then the bias-corrected Adam step.
void adamw_update(std::vector<double>& params, const std::vector<double>& grad, AdamState& st,
                  const TrainConfig& cfg, double lr) {
  const double b1 = cfg.adam_beta1;
  const double b2 = cfg.adam_beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(st.step));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(st.step));
  for (std::size_t k = 0; k < params.size(); ++k) {
    params[k] -= lr * cfg.weight_decay * params[k];
    st.m[k] = b1 * st.m[k] + (1.0 - b1) * grad[k];
    st.v[k] = b2 * st.v[k] + (1.0 - b2) * grad[k] * grad[k];
    const double m_hat = st.m[k] / c1;
    const double v_hat = st.v[k] / c2;
    params[k] -= lr * m_hat / (std::sqrt(v_hat) + cfg.adam_eps);
  }
}

bool finite(const LossBreakdown& l) {
  return std::isfinite(l.supcon) && std::isfinite(l.entropy) && std::isfinite(l.sparsity) &&
         std::isfinite(l.total);
}

}  // namespace

TrainResult train(const EmbeddingDataset& data, const TrainConfig& cfg) {
  return train(data, cfg, SparseConceptLayer::initialize(cfg.concepts, data.dim(), cfg.seed));
}

TrainResult train(const EmbeddingDataset& data, const TrainConfig& cfg, SparseConceptLayer init) {
  cfg.validate();
  data.validate();
  init.validate();
  if (init.input_dim() != data.dim()) {
    throw DimensionError("concept layer expects inputs of dimension " +
                         std::to_string(init.input_dim()) + " but embeddings have dimension " +
                         std::to_string(data.dim()));
  }
  if (data.size() < 2) throw std::invalid_argument("training needs at least 2 samples");

  TrainResult result{std::move(init), {}};
  SparseConceptLayer& layer = result.layer;
  AdamState w_state{std::vector<double>(layer.weights.data().size(), 0.0),
                    std::vector<double>(layer.weights.data().size(), 0.0), 0};
  AdamState b_state{std::vector<double>(layer.bias.size(), 0.0),
                    std::vector<double>(layer.bias.size(), 0.0), 0};

  double lr = cfg.learning_rate;
  double best = std::numeric_limits<double>::infinity();
  std::size_t bad_epochs = 0;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.schedule == LrSchedule::cosine) {
      lr = 0.5 * cfg.learning_rate *
           (1.0 + std::cos(std::numbers::pi * static_cast<double>(epoch) /
                           static_cast<double>(cfg.epochs)));
    }
    const auto start = std::chrono::steady_clock::now();
    const auto batches = make_batches(data, cfg, epoch);
    LossBreakdown sum;
    for (std::size_t b = 0; b < batches.size(); ++b) {
      const EmbeddingDataset batch = data.subset(batches[b]);
      LossBreakdown loss;
      LayerGradient g = grad_total(layer, batch, cfg.loss, loss);
      if (!finite(loss)) {
        throw NumericError("loss diverged at epoch " + std::to_string(epoch + 1) + ", batch " +
                           std::to_string(b + 1));
      }
      ++w_state.step;
      ++b_state.step;
      adamw_update(layer.weights.data(), g.weights.data(), w_state, cfg, lr);
      adamw_update(layer.bias, g.bias, b_state, cfg, lr);
      sum.supcon += loss.supcon;
      sum.entropy += loss.entropy;
      sum.sparsity += loss.sparsity;
      sum.total += loss.total;
    }
    const double nb = static_cast<double>(batches.size());
    EpochRecord rec;
    rec.loss = {sum.supcon / nb, sum.entropy / nb, sum.sparsity / nb, sum.total / nb};
    rec.learning_rate = lr;
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.history.epochs.push_back(rec);

    for (double w : layer.weights.data()) {
      if (!std::isfinite(w)) {
        throw NumericError("weights diverged at epoch " + std::to_string(epoch + 1));
      }
    }

    if (cfg.schedule == LrSchedule::plateau) {
      if (rec.loss.total < best * (1.0 - cfg.plateau_threshold) ||
          best == std::numeric_limits<double>::infinity()) {
        best = rec.loss.total;
        bad_epochs = 0;
      } else if (++bad_epochs > cfg.plateau_patience) {
        lr *= cfg.lr_decay_factor;
        bad_epochs = 0;
      }
    }
  }
  return result;
}

void write_history(std::ostream& out, const TrainHistory& history) {
  out << "epoch,supcon,entropy,sparsity,total,lr\n";
  for (std::size_t e = 0; e < history.epochs.size(); ++e) {
    const auto& r = history.epochs[e];
    out << e + 1 << ',' << format_real(r.loss.supcon) << ',' << format_real(r.loss.entropy) << ','
        << format_real(r.loss.sparsity) << ',' << format_real(r.loss.total) << ','
        << format_real(r.learning_rate) << '\n';
  }
}

}  // namespace nesyvit
