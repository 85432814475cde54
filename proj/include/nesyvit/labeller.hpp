#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "nesyvit/concept_core.hpp"
#include "nesyvit/rules.hpp"

namespace nesyvit {

// Raster formats:
//
//   heatmap   nesyvit-hm 1 <H> <W> <image-id>
//             H rows of W reals in [0, 1]
//   mask      nesyvit-mask 1 <H> <W> <image-id>
//             H rows of W integer concept ids
//             legend <id> <name>             (one line per id)
//   name map  <neuron-index> <predicate-name>  (one per line)

struct Heatmap {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> values;  // row-major
  std::string image_id;

  double at(std::size_t r, std::size_t c) const { return values[r * width + c]; }
  void validate() const;
};

struct SegmentationMask {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<int> ids;  // row-major
  std::map<int, std::string> legend;
  std::string image_id;

  int at(std::size_t r, std::size_t c) const { return ids[r * width + c]; }
  void validate() const;
  /// Legend id carrying `name`, or -1.
  int id_of(const std::string& name) const;
};

struct ConceptScore {
  std::string name;
  double iou = 0.0;  // mean over the scored images
};

struct LabelParams {
  std::size_t top_k = 10;
  double theta = 0.5;      // heatmap cut as a fraction of its maximum
  double margin = 0.8;     // keep concepts scoring at least margin * best
  std::size_t max_concepts = 4;

  void validate() const;
};

/// Rasters indexed by image (dataset row). A heatmap stored for a specific
/// neuron takes precedence over the image's generic heatmap.
struct LabelData {
  std::map<std::size_t, Heatmap> heatmaps;
  std::map<std::pair<std::size_t, std::size_t>, Heatmap> neuron_heatmaps;  // (neuron, image)
  std::map<std::size_t, SegmentationMask> masks;

  const Heatmap* heatmap(std::size_t neuron, std::size_t image) const;
  const SegmentationMask* mask(std::size_t image) const;
};

/// Indices of the k strongest activations of `neuron`, ties to the lower index.
std::vector<std::size_t> top_k_images(const ActivationBatch& acts, std::size_t neuron,
                                      std::size_t k = 10);

/// IoU between {hm >= theta * max(hm), hm > 0} and the cells of `concept_id`.
double iou(const Heatmap& hm, const SegmentationMask& mask, int concept_id, double theta = 0.5);

/// Mean IoU of every concept named in the masks of `images`, best first
/// (ties by name). A concept missing from an image's mask scores 0 there.
std::vector<ConceptScore> concept_scores(const LabelData& data, std::size_t neuron,
                                         std::span<const std::size_t> images, double theta);

/// Concepts within margin of the best, at most max_concepts, best first.
/// Empty when the best score is 0.
std::vector<std::string> select_concepts(const std::vector<ConceptScore>& scores,
                                         const LabelParams& params);

/// Lowercase, with runs of other characters turned into `_`.
std::string sanitize_concept(std::string_view name);

/// Builds a predicate name from concept names, bumping `counters` per concept:
/// {bed, wall} -> `bed1_wall1`, a later {bed} -> `bed2`.
std::string suffixed_name(const std::vector<std::string>& concepts,
                          std::map<std::string, std::size_t>& counters);

/// Name for one neuron; keeps `raw_name` when no image of its top-k has a mask
/// or nothing overlaps.
std::string label_neuron(std::size_t neuron, const ActivationBatch& acts, const LabelData& data,
                         const LabelParams& params, const std::string& raw_name,
                         std::map<std::string, std::size_t>& counters);

/// Names for every neuron used in `rs`, assigned in neuron-index order.
std::map<std::size_t, std::string> label_rules(const RuleSet& rs, const ActivationBatch& acts,
                                               const LabelData& data, const LabelParams& params);

/// Rule-set with neuron columns renamed. Throws std::invalid_argument when a
/// name is not a valid predicate or two columns end up with the same name.
RuleSet rename_ruleset(const RuleSet& rs, const std::map<std::size_t, std::string>& names);

Heatmap read_heatmap(std::istream& in);
void write_heatmap(std::ostream& out, const Heatmap& hm);
SegmentationMask read_mask(std::istream& in);
void write_mask(std::ostream& out, const SegmentationMask& mask);
std::map<std::size_t, std::string> read_name_map(std::istream& in);
void write_name_map(std::ostream& out, const std::map<std::size_t, std::string>& names,
                    const std::vector<std::string>& header_comments = {});

/// Reads `<heatmap_dir>/<image>.hm`, `<heatmap_dir>/n<J>/<image>.hm` and
/// `<mask_dir>/<image>.mask`. Image ids must be dataset row indices.
LabelData load_label_data(const std::filesystem::path& heatmap_dir,
                          const std::filesystem::path& mask_dir);

/// Inverse of load_label_data.
void save_label_data(const LabelData& data, const std::filesystem::path& heatmap_dir,
                     const std::filesystem::path& mask_dir);

}  // namespace nesyvit
