#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <sstream>

#include "nesyvit/io.hpp"
#include "nesyvit/random.hpp"

using namespace nesyvit;

namespace {

EmbeddingDataset random_dataset(Rng& rng, std::size_t n, std::size_t e) {
  EmbeddingDataset d;
  d.features = Matrix(n, e);
  for (double& v : d.features.data()) v = rng.normal() * std::pow(10.0, static_cast<double>(rng.below(9)) - 4);
  d.class_names = {"alpha", "beta", "gamma"};
  for (std::size_t i = 0; i < n; ++i) d.labels.push_back(rng.below(3));
  return d;
}

template <typename T, typename W, typename R>
T round_trip(const T& value, W write, R read) {
  std::stringstream s;
  write(s, value, std::vector<std::string>{"made by a test"});
  return read(s);
}

}  // namespace

TEST_CASE("embedding round trip, including class order") {
  Rng rng(5);
  for (int rep = 0; rep < 20; ++rep) {
    auto d = random_dataset(rng, 1 + rng.below(6), 1 + rng.below(5));
    auto back = round_trip(d, [](auto& o, auto& v, auto h) { write_embeddings(o, v, h); },
                           [](auto& i) { return read_embeddings(i); });
    CHECK(back.labels == d.labels);
    CHECK(back.class_names == d.class_names);
    REQUIRE(back.features.rows() == d.features.rows());
    for (std::size_t i = 0; i < d.features.data().size(); ++i) {
      CHECK(std::abs(back.features.data()[i] - d.features.data()[i]) <= 1e-12 * std::max(1.0, std::abs(d.features.data()[i])));
    }
  }
}

TEST_CASE("2x3 dataset round trips exactly") {
  EmbeddingDataset d;
  d.features = Matrix(2, 3);
  d.features.data() = {0.1, -2.5, 1e-9, 3.0, 4.25, -0.333333333333};
  d.labels = {1, 0};
  d.class_names = {"x", "y"};
  std::stringstream s;
  write_embeddings(s, d);
  auto back = read_embeddings(s);
  CHECK(back.features == d.features);
  CHECK(back.labels == d.labels);
  CHECK(back.class_names == d.class_names);
}

TEST_CASE("table and layer round trip") {
  Rng rng(8);
  for (int rep = 0; rep < 20; ++rep) {
    BinaryConceptTable t;
    t.rows = 1 + rng.below(5);
    const std::size_t d = 1 + rng.below(6);
    t.neuron_names = default_neuron_names(d);
    t.class_names = {"a", "b"};
    for (std::size_t i = 0; i < t.rows * d; ++i) t.bits.push_back(static_cast<std::uint8_t>(rng.below(2)));
    for (std::size_t i = 0; i < t.rows; ++i) t.labels.push_back(rng.below(2));
    std::stringstream s;
    write_table(s, t);
    auto back = read_table(s);
    CHECK(back.bits == t.bits);
    CHECK(back.labels == t.labels);
    CHECK(back.neuron_names == t.neuron_names);
    CHECK(back.class_names == t.class_names);

    auto layer = SparseConceptLayer::initialize(d, 1 + rng.below(4), rng.next());
    for (double& b : layer.bias) b = rng.normal();
    std::stringstream ls;
    write_layer(ls, layer);
    auto lb = read_layer(ls);
    CHECK(lb.weights == layer.weights);
    CHECK(lb.bias == layer.bias);
  }
}

TEST_CASE("format_real is shortest round trip") {
  for (double v : {0.1, 1.0 / 3.0, -2.0, 1e300, 5e-324, 0.0}) {
    CHECK(std::strtod(format_real(v).c_str(), nullptr) == v);
  }
  CHECK(format_real(0.5) == "0.5");
}

TEST_CASE("malformed files are rejected with line numbers") {
  SUBCASE("empty file") {
    std::istringstream in("");
    CHECK_THROWS_WITH_AS(read_embeddings(in), doctest::Contains("missing header"), FormatError);
    std::istringstream in2("# only a comment\n");
    CHECK_THROWS_WITH_AS(read_layer(in2), doctest::Contains("missing header"), FormatError);
    std::istringstream in3("");
    CHECK_THROWS_WITH_AS(read_table(in3), doctest::Contains("missing header"), FormatError);
  }
  SUBCASE("row arity") {
    std::istringstream in("nesyvit-emb 1 2 4\na,1,2,3,4\nb,1,2,3\n");
    try {
      read_embeddings(in);
      FAIL("expected FormatError");
    } catch (const FormatError& e) {
      CHECK(e.line() == 3);
    }
  }
  SUBCASE("non-numeric field") {
    std::istringstream in("nesyvit-emb 1 1 2\na,1,zz\n");
    CHECK_THROWS_WITH_AS(read_embeddings(in), doctest::Contains("line 2"), FormatError);
  }
  SUBCASE("unknown label under a classes directive") {
    std::istringstream in("# classes: a,b\nnesyvit-emb 1 1 1\nc,1\n");
    CHECK_THROWS_WITH_AS(read_embeddings(in), doctest::Contains("line 3"), FormatError);
  }
  SUBCASE("bad header") {
    std::istringstream in("nesyvit-emb 2 1 1\na,1\n");
    CHECK_THROWS_AS(read_embeddings(in), FormatError);
  }
  SUBCASE("bits other than 0/1") {
    std::istringstream in("label,n0\na,2\n");
    CHECK_THROWS_WITH_AS(read_table(in), doctest::Contains("line 2"), FormatError);
  }
  SUBCASE("layer row count") {
    std::istringstream in("nesyvit-layer 1 2 2\n1 2\n3 4\n");
    CHECK_THROWS_AS(read_layer(in), FormatError);
  }
}

TEST_CASE("comments are allowed anywhere") {
  std::istringstream in("# top\nnesyvit-emb 1 2 1\n# middle\na,1.5\n\nb,2\n# end\n");
  auto d = read_embeddings(in);
  CHECK(d.size() == 2);
  CHECK(d.class_names == std::vector<std::string>{"a", "b"});
}

TEST_CASE("save and load through files") {
  const auto dir = std::filesystem::temp_directory_path() / "nesyvit_io_test";
  std::filesystem::create_directories(dir);
  EmbeddingDataset d;
  d.features = Matrix(1, 2);
  d.features.data() = {1.25, -3};
  d.labels = {0};
  d.class_names = {"only"};
  save_embeddings(dir / "d.emb", d);
  CHECK(load_embeddings(dir / "d.emb").features == d.features);
  CHECK_THROWS_AS(load_embeddings(dir / "missing.emb"), FormatError);
  std::filesystem::remove_all(dir);
}
