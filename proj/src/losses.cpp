#include "nesyvit/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace nesyvit {

void LossConfig::validate() const {
  if (!(tau > 0.0)) throw std::invalid_argument("temperature tau must be positive");
  if (!(epsilon > 0.0)) throw std::invalid_argument("entropy epsilon must be positive");
  if (alpha < 0.0 || beta < 0.0 || gamma < 0.0) {
    throw std::invalid_argument("loss weights must be non-negative");
  }
}

std::vector<double> l2_normalize(std::span<const double> z) {
  double sq = 0.0;
  for (double v : z) sq += v * v;
  const double norm = std::sqrt(sq);
  std::vector<double> out(z.size(), 0.0);
  if (norm <= kNormFloor) return out;
  for (std::size_t k = 0; k < z.size(); ++k) out[k] = z[k] / norm;
  return out;
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

// Loss value and, when grad != nullptr, d loss / d z accumulated into grad (N x D).
double supcon_impl(const ActivationBatch& batch, double tau, Matrix* grad) {
  const std::size_t n = batch.size();
  const std::size_t d = batch.concepts();
  if (n < 2) {
    throw std::invalid_argument("supervised contrastive loss needs at least 2 samples, got " +
                                std::to_string(n));
  }
  Matrix unit(n, d);
  std::vector<double> norms(n, 0.0);
  std::vector<bool> valid(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = batch.z.row(i);
    norms[i] = std::sqrt(dot(row, row));
    valid[i] = norms[i] > kNormFloor;
    if (valid[i]) {
      for (std::size_t k = 0; k < d; ++k) unit(i, k) = row[k] / norms[i];
    }
  }

  Matrix unit_grad(n, d);
  std::vector<double> logits(n), weights(n);
  const double inv_n = 1.0 / static_cast<double>(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!valid[i]) continue;
    std::size_t positives = 0;
    double max_logit = -INFINITY;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i || !valid[j]) continue;
      logits[j] = dot(unit.row(i), unit.row(j)) / tau;
      max_logit = std::max(max_logit, logits[j]);
      if (batch.labels[j] == batch.labels[i]) ++positives;
    }
    if (positives == 0) continue;

    double denom = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i || !valid[j]) continue;
      weights[j] = std::exp(logits[j] - max_logit);
      denom += weights[j];
    }
    const double log_denom = max_logit + std::log(denom);
    double positive_sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i || !valid[j] || batch.labels[j] != batch.labels[i]) continue;
      positive_sum += logits[j];
    }
    const double inv_p = 1.0 / static_cast<double>(positives);
    total += log_denom - positive_sum * inv_p;

    if (grad == nullptr) continue;
    auto gi = unit_grad.row(i);
    auto ui = unit.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i || !valid[j]) continue;
      double coeff = weights[j] / denom;
      if (batch.labels[j] == batch.labels[i]) coeff -= inv_p;
      coeff *= inv_n / tau;
      auto uj = unit.row(j);
      auto gj = unit_grad.row(j);
      for (std::size_t k = 0; k < d; ++k) {
        gi[k] += coeff * uj[k];
        gj[k] += coeff * ui[k];
      }
    }
  }

  if (grad != nullptr) {
    // Through u = z / |z|: dz = (g - (g.u) u) / |z|.
    for (std::size_t i = 0; i < n; ++i) {
      if (!valid[i]) continue;
      auto g = unit_grad.row(i);
      auto u = unit.row(i);
      const double radial = dot(g, u);
      for (std::size_t k = 0; k < d; ++k) (*grad)(i, k) += (g[k] - radial * u[k]) / norms[i];
    }
  }
  return total * inv_n;
}

void check_unit_interval(const ActivationBatch& batch) {
  for (double z : batch.z.data()) {
    if (!(z >= 0.0 && z <= 1.0)) {
      throw std::invalid_argument("activation " + std::to_string(z) + " lies outside [0, 1]");
    }
  }
}

double entropy_impl(const ActivationBatch& batch, double eps, double scale, Matrix* grad) {
  check_unit_interval(batch);
  const auto& z = batch.z.data();
  if (z.empty()) return 0.0;
  const double inv = 1.0 / static_cast<double>(z.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < z.size(); ++k) {
    const double p = z[k];
    const double q = 1.0 - p;
    sum += p * std::log(p + eps) + q * std::log(q + eps);
    if (grad != nullptr) {
      const double deriv = std::log(p + eps) + p / (p + eps) - std::log(q + eps) - q / (q + eps);
      grad->data()[k] -= scale * inv * deriv;
    }
  }
  return -sum * inv;
}

double l1_impl(const ActivationBatch& batch, double scale, Matrix* grad) {
  const auto& z = batch.z.data();
  if (z.empty()) return 0.0;
  const double inv = 1.0 / static_cast<double>(z.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < z.size(); ++k) {
    sum += std::abs(z[k]);
    if (grad != nullptr && z[k] != 0.0) grad->data()[k] += scale * inv * (z[k] > 0.0 ? 1.0 : -1.0);
  }
  return sum * inv;
}

LossBreakdown combine(const ActivationBatch& batch, const LossConfig& cfg, Matrix* grad) {
  cfg.validate();
  LossBreakdown out;
  if (cfg.alpha > 0.0) {
    Matrix supcon_grad;
    if (grad != nullptr) supcon_grad = Matrix(batch.size(), batch.concepts());
    out.supcon = supcon_impl(batch, cfg.tau, grad ? &supcon_grad : nullptr);
    if (grad != nullptr) {
      for (std::size_t k = 0; k < grad->data().size(); ++k) {
        grad->data()[k] += cfg.alpha * supcon_grad.data()[k];
      }
    }
  } else if (batch.size() >= 2) {
    out.supcon = supcon_impl(batch, cfg.tau, nullptr);
  }
  out.entropy = entropy_impl(batch, cfg.epsilon, cfg.beta, cfg.beta > 0.0 ? grad : nullptr);
  out.sparsity = l1_impl(batch, cfg.gamma, cfg.gamma > 0.0 ? grad : nullptr);
  out.total = cfg.alpha * out.supcon + cfg.beta * out.entropy + cfg.gamma * out.sparsity;
  return out;
}

}  // namespace

double supcon_loss(const ActivationBatch& batch, const LossConfig& cfg) {
  cfg.validate();
  return supcon_impl(batch, cfg.tau, nullptr);
}

double entropy_loss(const ActivationBatch& batch, const LossConfig& cfg) {
  cfg.validate();
  return entropy_impl(batch, cfg.epsilon, 0.0, nullptr);
}

double l1_loss(const ActivationBatch& batch) { return l1_impl(batch, 0.0, nullptr); }

LossBreakdown total_loss(const ActivationBatch& batch, const LossConfig& cfg) {
  return combine(batch, cfg, nullptr);
}

LossBreakdown total_loss(const SparseConceptLayer& layer, const EmbeddingDataset& data,
                         const LossConfig& cfg) {
  return total_loss(forward(layer, data), cfg);
}

LayerGradient grad_total(const SparseConceptLayer& layer, const EmbeddingDataset& data,
                         const LossConfig& cfg, LossBreakdown& loss) {
  const ActivationBatch acts = forward(layer, data);
  Matrix dz(acts.size(), acts.concepts());
  loss = combine(acts, cfg, &dz);

  const std::size_t d = layer.concepts();
  const std::size_t e = layer.input_dim();
  LayerGradient g{Matrix(d, e), std::vector<double>(d, 0.0)};
  for (std::size_t i = 0; i < acts.size(); ++i) {
    auto x = data.features.row(i);
    for (std::size_t j = 0; j < d; ++j) {
      const double z = acts.z(i, j);
      const double da = dz(i, j) * z * (1.0 - z);
      if (da == 0.0) continue;
      g.bias[j] += da;
      auto gw = g.weights.row(j);
      for (std::size_t c = 0; c < e; ++c) gw[c] += da * x[c];
    }
  }
  return g;
}

LayerGradient grad_total(const SparseConceptLayer& layer, const EmbeddingDataset& data,
                         const LossConfig& cfg) {
  LossBreakdown unused;
  return grad_total(layer, data, cfg, unused);
}

LayerGradient numeric_gradient(const SparseConceptLayer& layer, const EmbeddingDataset& data,
                               const LossConfig& cfg, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite-difference step must be positive");
  SparseConceptLayer probe = layer;
  auto central = [&](double& param) {
    const double saved = param;
    param = saved + h;
    const double up = total_loss(probe, data, cfg).total;
    param = saved - h;
    const double down = total_loss(probe, data, cfg).total;
    param = saved;
    return (up - down) / (2.0 * h);
  };
  LayerGradient g{Matrix(layer.concepts(), layer.input_dim()),
                  std::vector<double>(layer.concepts(), 0.0)};
  for (std::size_t k = 0; k < probe.weights.data().size(); ++k) {
    g.weights.data()[k] = central(probe.weights.data()[k]);
  }
  for (std::size_t j = 0; j < probe.bias.size(); ++j) g.bias[j] = central(probe.bias[j]);
  return g;
}

}  // namespace nesyvit
