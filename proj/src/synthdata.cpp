#include "nesyvit/synthdata.hpp"

#include <cmath>
#include <stdexcept>

#include "nesyvit/random.hpp"

namespace nesyvit {

void SynthConfig::validate() const {
  if (classes < 2) throw std::invalid_argument("synth needs at least 2 classes");
  if (dim < 2) throw std::invalid_argument("synth needs dim >= 2");
  if (per_class < 2) throw std::invalid_argument("synth needs at least 2 samples per class");
  if (!(separation > 0.0) || !std::isfinite(separation)) {
    throw std::invalid_argument("separation must be positive");
  }
  if (classes > dim) {
    throw std::invalid_argument("cannot place " + std::to_string(classes) + " orthogonal centroids in " +
                                std::to_string(dim) + " dimensions");
  }
}

Matrix centroids(const SynthConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed, 1);
  const std::size_t k = cfg.classes;
  const std::size_t e = cfg.dim;
  Matrix q(k, e);
  for (std::size_t i = 0; i < k; ++i) {
    double norm = 0.0;
    do {
      for (std::size_t j = 0; j < e; ++j) q(i, j) = rng.normal();
      // Modified Gram-Schmidt, applied twice for stability.
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t p = 0; p < i; ++p) {
          double dot = 0.0;
          for (std::size_t j = 0; j < e; ++j) dot += q(i, j) * q(p, j);
          for (std::size_t j = 0; j < e; ++j) q(i, j) -= dot * q(p, j);
        }
      }
      norm = 0.0;
      for (std::size_t j = 0; j < e; ++j) norm += q(i, j) * q(i, j);
      norm = std::sqrt(norm);
    } while (norm < 1e-6);
    for (std::size_t j = 0; j < e; ++j) q(i, j) /= norm;
  }
  for (double& v : q.data()) v *= cfg.separation;
  return q;
}

EmbeddingDataset generate(const SynthConfig& cfg) {
  const Matrix c = centroids(cfg);
  Rng rng(cfg.seed, 2);
  EmbeddingDataset out;
  out.features = Matrix(cfg.classes * cfg.per_class, cfg.dim);
  out.labels.reserve(out.features.rows());
  for (std::size_t k = 0; k < cfg.classes; ++k) out.class_names.push_back("c" + std::to_string(k));
  std::size_t r = 0;
  for (std::size_t k = 0; k < cfg.classes; ++k) {
    for (std::size_t i = 0; i < cfg.per_class; ++i, ++r) {
      for (std::size_t j = 0; j < cfg.dim; ++j) out.features(r, j) = c(k, j) + rng.normal();
      out.labels.push_back(k);
    }
  }
  return out;
}

namespace {

constexpr const char* kConceptNames[] = {"bed",  "sink",  "stove", "sofa",  "desk",
                                         "tree", "shelf", "lamp",  "table", "door"};

std::string concept_name(std::size_t k) {
  constexpr std::size_t n = std::size(kConceptNames);
  std::string base = kConceptNames[k % n];
  // Names are reused with a letter tag past the list so they stay distinct.
  if (k >= n) base += "_" + std::string(1, static_cast<char>('a' + (k / n - 1) % 26)) + std::to_string(k / n);
  return base;
}

}  // namespace

LabelFixtures generate_label_fixtures(const SynthConfig& cfg, const FixtureConfig& fixture) {
  cfg.validate();
  if (fixture.height < cfg.classes) {
    throw std::invalid_argument("fixture height must be at least the class count");
  }
  if (fixture.width == 0) throw std::invalid_argument("fixture width must be positive");
  if (!(fixture.noise >= 0.0 && fixture.noise < 0.5)) {
    throw std::invalid_argument("fixture noise must lie in [0, 0.5)");
  }
  LabelFixtures out;
  for (std::size_t k = 0; k < cfg.classes; ++k) out.concepts.push_back(concept_name(k));

  const std::size_t h = fixture.height;
  const std::size_t w = fixture.width;
  auto band_of = [&](std::size_t row) { return row * cfg.classes / h; };

  SegmentationMask mask{h, w, std::vector<int>(h * w), {}, ""};
  mask.legend[0] = "background";
  for (std::size_t k = 0; k < cfg.classes; ++k) mask.legend[static_cast<int>(k + 1)] = out.concepts[k];
  // Each band keeps a background margin column on both sides.
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      const bool edge = w > 2 && (c == 0 || c + 1 == w);
      mask.ids[r * w + c] = edge ? 0 : static_cast<int>(band_of(r) + 1);
    }
  }

  Rng rng(cfg.seed, 3);
  std::size_t image = 0;
  for (std::size_t k = 0; k < cfg.classes; ++k) {
    for (std::size_t i = 0; i < cfg.per_class; ++i, ++image) {
      const std::string id = std::to_string(image);
      Heatmap hm{h, w, std::vector<double>(h * w), id};
      for (std::size_t r = 0; r < h; ++r) {
        for (std::size_t c = 0; c < w; ++c) {
          const bool inside = mask.ids[r * w + c] == static_cast<int>(k + 1);
          hm.values[r * w + c] = inside ? rng.uniform(0.8, 1.0) : rng.uniform(0.0, fixture.noise);
        }
      }
      SegmentationMask m = mask;
      m.image_id = id;
      out.data.heatmaps.emplace(image, std::move(hm));
      out.data.masks.emplace(image, std::move(m));
    }
  }
  return out;
}

}  // namespace nesyvit
