#include <doctest.h>

#include <cmath>
#include <numeric>

#include "nesyvit/concept_core.hpp"
#include "nesyvit/random.hpp"

using namespace nesyvit;

namespace {

EmbeddingDataset one_row(std::vector<double> x) {
  EmbeddingDataset d;
  d.features = Matrix(1, x.size());
  for (std::size_t j = 0; j < x.size(); ++j) d.features(0, j) = x[j];
  d.labels = {0};
  d.class_names = {"a"};
  return d;
}

SparseConceptLayer scalar_layer(double w, double b) {
  SparseConceptLayer l;
  l.weights = Matrix(1, 1, w);
  l.bias = {b};
  return l;
}

ActivationBatch acts_of(std::vector<double> z) {
  ActivationBatch a;
  a.z = Matrix(1, z.size());
  for (std::size_t j = 0; j < z.size(); ++j) a.z(0, j) = z[j];
  a.labels = {0};
  return a;
}

}  // namespace

TEST_CASE("forward with zero weights gives one half everywhere") {
  SparseConceptLayer l;
  l.weights = Matrix(3, 2);
  l.bias = {0, 0, 0};
  auto acts = forward(l, one_row({4.0, -7.0}));
  for (double v : acts.z.data()) CHECK(v == 0.5);
}

TEST_CASE("forward scalar cases") {
  CHECK(forward(scalar_layer(1, 0), one_row({0})).z(0, 0) == 0.5);
  const double expected = 1.0 / (1.0 + std::exp(-1.0));
  CHECK(forward(scalar_layer(2, -1), one_row({1})).z(0, 0) == doctest::Approx(expected).epsilon(1e-15));
  CHECK(expected == doctest::Approx(0.731059).epsilon(1e-6));
}

TEST_CASE("forward rejects mismatched dimensions and names both") {
  SparseConceptLayer l;
  l.weights = Matrix(2, 3);
  l.bias = {0, 0};
  try {
    forward(l, one_row({1, 2}));
    FAIL("expected DimensionError");
  } catch (const DimensionError& e) {
    const std::string msg = e.what();
    CHECK(msg.find('3') != std::string::npos);
    CHECK(msg.find('2') != std::string::npos);
  }
}

TEST_CASE("binarize thresholds with ties mapping to one") {
  auto t = binarize(acts_of({0.0, 1.0}));
  CHECK(t.bits == std::vector<std::uint8_t>{0, 1});
  CHECK(binarize(acts_of({0.5})).bits == std::vector<std::uint8_t>{1});
  CHECK(binarize(acts_of({0.49, 0.51, 0.5})).bits == std::vector<std::uint8_t>{0, 1, 1});
  CHECK(t.neuron_names == std::vector<std::string>{"n0", "n1"});
}

TEST_CASE("binarize rejects thresholds outside (0, 1)") {
  CHECK_THROWS_AS(binarize(acts_of({0.3}), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(binarize(acts_of({0.3}), 1.0), std::invalid_argument);
  CHECK_THROWS_AS(binarize(acts_of({0.3}), -0.2), std::invalid_argument);
}

TEST_CASE("sigmoid stays in range and is stable at extremes") {
  CHECK(sigmoid(-1000) >= 0.0);
  CHECK(sigmoid(1000) <= 1.0);
  CHECK(std::isfinite(sigmoid(-800)));
  CHECK(sigmoid(40) == doctest::Approx(1.0));
}

TEST_CASE("properties over random layers") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const std::size_t n = 1 + rng.below(8), e = 1 + rng.below(6), d = 1 + rng.below(6);
    EmbeddingDataset data;
    data.features = Matrix(n, e);
    for (double& v : data.features.data()) v = rng.normal() * 10;
    for (std::size_t i = 0; i < n; ++i) data.labels.push_back(i % 2);
    data.class_names = {"a", "b"};
    auto layer = SparseConceptLayer::initialize(d, e, seed);
    for (double& w : layer.weights.data()) w *= 1 + rng.uniform() * 20;

    auto acts = forward(layer, data);
    for (double v : acts.z.data()) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    CHECK(acts.labels == data.labels);

    // idempotence on bits
    auto t = binarize(acts);
    ActivationBatch again{Matrix(n, d), acts.labels};
    for (std::size_t i = 0; i < t.bits.size(); ++i) again.z.data()[i] = t.bits[i];
    CHECK(binarize(again).bits == t.bits);

    // permutation equivariance
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(perm));
    auto permuted = forward(layer, data.subset(perm));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < d; ++j) CHECK(permuted.z(i, j) == acts.z(perm[i], j));
    }
  }
}

TEST_CASE("initialize uses fan-in bounds and zero bias, deterministically") {
  auto a = SparseConceptLayer::initialize(kDefaultConcepts, 16, 11);
  auto b = SparseConceptLayer::initialize(kDefaultConcepts, 16, 11);
  CHECK(a.weights == b.weights);
  CHECK(a.concepts() == 128);
  const double bound = 1.0 / std::sqrt(16.0);
  for (double w : a.weights.data()) CHECK(std::abs(w) <= bound);
  for (double v : a.bias) CHECK(v == 0.0);
  CHECK_FALSE(a.weights == SparseConceptLayer::initialize(kDefaultConcepts, 16, 12).weights);
}

TEST_CASE("dataset validation") {
  EmbeddingDataset d = one_row({1.0});
  CHECK_NOTHROW(d.validate());
  d.labels = {3};
  CHECK_THROWS(d.validate());
  EmbeddingDataset empty;
  CHECK_THROWS(empty.validate());
}
