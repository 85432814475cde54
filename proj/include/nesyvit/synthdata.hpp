#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nesyvit/concept_core.hpp"
#include "nesyvit/labeller.hpp"

namespace nesyvit {

struct SynthConfig {
  std::size_t classes = 4;
  std::size_t dim = 32;
  std::size_t per_class = 200;
  double separation = 4.0;  // in units of the within-class standard deviation
  std::uint64_t seed = 7;

  /// Also rejects classes > dim (the frame would not be orthogonal).
  void validate() const;
};

/// k x E centroids: separation times k orthonormal directions drawn by
/// Gram-Schmidt on Gaussian vectors, so every pair is separation*sqrt(2) apart.
Matrix centroids(const SynthConfig& cfg);

/// Class-major samples (all of c0, then c1, ...), centroid plus N(0, 1) noise.
EmbeddingDataset generate(const SynthConfig& cfg);

struct FixtureConfig {
  std::size_t height = 16;
  std::size_t width = 16;
  double noise = 0.3;  // upper bound of background heatmap values
};

struct LabelFixtures {
  LabelData data;
  std::vector<std::string> concepts;  // intended concept per class
};

/// Rasters for the images of generate(cfg). Every mask shows one horizontal
/// band per class concept over a `background`; each image's heatmap is high on
/// the band of its own class and below fixture.noise elsewhere.
LabelFixtures generate_label_fixtures(const SynthConfig& cfg, const FixtureConfig& fixture = {});

}  // namespace nesyvit
