#include "nesyvit/labeller.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include "nesyvit/io.hpp"

namespace nesyvit {

using detail::parse_integer;
using detail::parse_real;
using detail::split;
using detail::trim;

void Heatmap::validate() const {
  if (height == 0 || width == 0) throw std::invalid_argument("heatmap must be non-empty");
  if (values.size() != height * width) throw DimensionError("heatmap value count does not match H x W");
  for (double v : values) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("heatmap values must lie in [0, 1]");
  }
}

void SegmentationMask::validate() const {
  if (height == 0 || width == 0) throw std::invalid_argument("mask must be non-empty");
  if (ids.size() != height * width) throw DimensionError("mask id count does not match H x W");
  for (int id : ids) {
    if (!legend.count(id)) {
      throw std::invalid_argument("mask id " + std::to_string(id) + " has no legend entry");
    }
  }
}

int SegmentationMask::id_of(const std::string& name) const {
  for (const auto& [id, n] : legend) {
    if (n == name) return id;
  }
  return -1;
}

void LabelParams::validate() const {
  if (top_k == 0) throw std::invalid_argument("top_k must be at least 1");
  if (!(theta > 0.0 && theta <= 1.0)) throw std::invalid_argument("theta must lie in (0, 1]");
  if (!(margin > 0.0 && margin <= 1.0)) throw std::invalid_argument("margin must lie in (0, 1]");
  if (max_concepts == 0) throw std::invalid_argument("max_concepts must be at least 1");
}

const Heatmap* LabelData::heatmap(std::size_t neuron, std::size_t image) const {
  if (auto it = neuron_heatmaps.find({neuron, image}); it != neuron_heatmaps.end()) return &it->second;
  if (auto it = heatmaps.find(image); it != heatmaps.end()) return &it->second;
  return nullptr;
}

const SegmentationMask* LabelData::mask(std::size_t image) const {
  auto it = masks.find(image);
  return it == masks.end() ? nullptr : &it->second;
}

std::vector<std::size_t> top_k_images(const ActivationBatch& acts, std::size_t neuron, std::size_t k) {
  if (k == 0) throw std::invalid_argument("k must be at least 1");
  if (neuron >= acts.concepts()) {
    throw std::out_of_range("neuron " + std::to_string(neuron) + " out of range (layer has " +
                            std::to_string(acts.concepts()) + " neurons)");
  }
  std::vector<std::size_t> idx(acts.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return acts.z(a, neuron) > acts.z(b, neuron); });
  if (idx.size() > k) idx.resize(k);
  return idx;
}

double iou(const Heatmap& hm, const SegmentationMask& mask, int concept_id, double theta) {
  if (hm.height != mask.height || hm.width != mask.width) {
    throw DimensionError("heatmap is " + std::to_string(hm.height) + "x" + std::to_string(hm.width) +
                         " but mask is " + std::to_string(mask.height) + "x" + std::to_string(mask.width));
  }
  if (!(theta > 0.0 && theta <= 1.0)) throw std::invalid_argument("theta must lie in (0, 1]");
  const double peak = hm.values.empty() ? 0.0 : *std::max_element(hm.values.begin(), hm.values.end());
  const double cut = theta * peak;
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < hm.values.size(); ++i) {
    const bool a = hm.values[i] > 0.0 && hm.values[i] >= cut;
    const bool b = mask.ids[i] == concept_id;
    inter += (a && b) ? 1 : 0;
    uni += (a || b) ? 1 : 0;
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

std::vector<ConceptScore> concept_scores(const LabelData& data, std::size_t neuron,
                                         std::span<const std::size_t> images, double theta) {
  std::map<std::string, double> sums;
  std::size_t scored = 0;
  for (std::size_t img : images) {
    const Heatmap* hm = data.heatmap(neuron, img);
    const SegmentationMask* mask = data.mask(img);
    if (!hm || !mask) continue;
    ++scored;
    for (const auto& [id, name] : mask->legend) sums[name] += iou(*hm, *mask, id, theta);
  }
  std::vector<ConceptScore> out;
  if (scored == 0) return out;
  for (const auto& [name, sum] : sums) out.push_back({name, sum / static_cast<double>(scored)});
  std::stable_sort(out.begin(), out.end(),
                   [](const ConceptScore& a, const ConceptScore& b) { return a.iou > b.iou; });
  return out;
}

std::vector<std::string> select_concepts(const std::vector<ConceptScore>& scores,
                                         const LabelParams& params) {
  std::vector<std::string> out;
  if (scores.empty() || !(scores.front().iou > 0.0)) return out;
  const double bar = params.margin * scores.front().iou;
  for (const auto& s : scores) {
    if (out.size() >= params.max_concepts || s.iou < bar) break;
    out.push_back(s.name);
  }
  return out;
}

std::string sanitize_concept(std::string_view name) {
  std::string out;
  bool gap = false;
  for (char ch : name) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      if (gap && !out.empty()) out += '_';
      gap = false;
      out += static_cast<char>(std::tolower(c));
    } else {
      gap = true;
    }
  }
  return out;
}

std::string suffixed_name(const std::vector<std::string>& concepts,
                          std::map<std::string, std::size_t>& counters) {
  std::string out;
  for (const auto& c : concepts) {
    const std::string base = sanitize_concept(c);
    if (base.empty()) throw std::invalid_argument("concept name '" + c + "' has no usable characters");
    if (!out.empty()) out += '_';
    out += base + std::to_string(++counters[base]);
  }
  return out;
}

std::string label_neuron(std::size_t neuron, const ActivationBatch& acts, const LabelData& data,
                         const LabelParams& params, const std::string& raw_name,
                         std::map<std::string, std::size_t>& counters) {
  params.validate();
  const auto images = top_k_images(acts, neuron, params.top_k);
  const auto chosen = select_concepts(concept_scores(data, neuron, images, params.theta), params);
  if (chosen.empty()) return raw_name;
  return suffixed_name(chosen, counters);
}

std::map<std::size_t, std::string> label_rules(const RuleSet& rs, const ActivationBatch& acts,
                                               const LabelData& data, const LabelParams& params) {
  if (acts.concepts() != rs.neuron_names.size()) {
    throw DimensionError("activations have " + std::to_string(acts.concepts()) +
                         " neurons but the rule-set has " + std::to_string(rs.neuron_names.size()));
  }
  std::set<std::size_t> used;
  auto collect = [&](const Rule& r) {
    for (const Literal& l : r.body) used.insert(l.neuron);
  };
  for (const auto& r : rs.rules) collect(r.rule);
  for (const auto& [id, defs] : rs.abnormal) {
    for (const auto& r : defs) collect(r);
  }
  std::map<std::string, std::size_t> counters;
  std::map<std::size_t, std::string> names;
  for (std::size_t n : used) {
    names[n] = label_neuron(n, acts, data, params, rs.neuron_names[n], counters);
  }
  return names;
}

RuleSet rename_ruleset(const RuleSet& rs, const std::map<std::size_t, std::string>& names) {
  RuleSet out = rs;
  for (const auto& [idx, name] : names) {
    if (idx >= out.neuron_names.size()) {
      throw std::invalid_argument("name map refers to neuron " + std::to_string(idx) +
                                  " but the rule-set has " + std::to_string(out.neuron_names.size()));
    }
    if (!is_predicate_name(name)) throw std::invalid_argument("'" + name + "' is not a valid predicate name");
    out.neuron_names[idx] = name;
  }
  std::set<std::string> seen;
  for (const auto& n : out.neuron_names) {
    if (!seen.insert(n).second) throw std::invalid_argument("predicate name '" + n + "' is used twice");
  }
  return out;
}

namespace {

struct Lines {
  std::vector<std::pair<std::size_t, std::string_view>> items;
  std::size_t pos = 0;

  explicit Lines(const std::string& text) {
    std::size_t number = 0;
    for (auto raw : split(text, '\n')) {
      ++number;
      auto line = trim(raw);
      if (line.empty() || line.front() == '#') continue;
      items.emplace_back(number, line);
    }
  }
  bool done() const { return pos >= items.size(); }
};

std::vector<std::string_view> words(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

struct RasterHeader {
  std::size_t height, width;
  std::string id;
};

RasterHeader read_header(Lines& lines, std::string_view magic) {
  if (lines.done()) throw FormatError("missing header");
  auto [number, text] = lines.items[lines.pos++];
  auto w = words(text);
  if (w.size() != 5 || w[0] != magic) {
    throw FormatError("expected '" + std::string(magic) + " 1 <H> <W> <image-id>'", number);
  }
  if (parse_integer(w[1], number) != 1) throw FormatError("unsupported format version", number);
  const long long h = parse_integer(w[2], number);
  const long long wd = parse_integer(w[3], number);
  if (h <= 0 || wd <= 0) throw FormatError("raster dimensions must be positive", number);
  return {static_cast<std::size_t>(h), static_cast<std::size_t>(wd), std::string(w[4])};
}

template <typename T, typename Parse>
std::vector<T> read_grid(Lines& lines, const RasterHeader& h, Parse parse) {
  std::vector<T> out;
  out.reserve(h.height * h.width);
  for (std::size_t r = 0; r < h.height; ++r) {
    if (lines.done()) throw FormatError("expected " + std::to_string(h.height) + " raster rows, found " + std::to_string(r));
    auto [number, text] = lines.items[lines.pos++];
    auto w = words(text);
    if (w.size() != h.width) {
      throw FormatError("row has " + std::to_string(w.size()) + " values, expected " + std::to_string(h.width), number);
    }
    for (auto v : w) out.push_back(parse(v, number));
  }
  return out;
}

}  // namespace

Heatmap read_heatmap(std::istream& in) {
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  Lines lines(text);
  const auto h = read_header(lines, "nesyvit-hm");
  Heatmap hm{h.height, h.width, {}, h.id};
  hm.values = read_grid<double>(lines, h, [](std::string_view v, std::size_t n) {
    const double x = parse_real(v, n);
    if (!(x >= 0.0 && x <= 1.0)) throw FormatError("heatmap value outside [0, 1]", n);
    return x;
  });
  if (!lines.done()) throw FormatError("unexpected content after heatmap rows", lines.items[lines.pos].first);
  return hm;
}

void write_heatmap(std::ostream& out, const Heatmap& hm) {
  out << "nesyvit-hm 1 " << hm.height << ' ' << hm.width << ' ' << hm.image_id << '\n';
  for (std::size_t r = 0; r < hm.height; ++r) {
    for (std::size_t c = 0; c < hm.width; ++c) out << (c ? " " : "") << format_real(hm.at(r, c));
    out << '\n';
  }
}

SegmentationMask read_mask(std::istream& in) {
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  Lines lines(text);
  const auto h = read_header(lines, "nesyvit-mask");
  SegmentationMask mask{h.height, h.width, {}, {}, h.id};
  mask.ids = read_grid<int>(lines, h, [](std::string_view v, std::size_t n) {
    return static_cast<int>(parse_integer(v, n));
  });
  while (!lines.done()) {
    auto [number, text_line] = lines.items[lines.pos++];
    auto w = words(text_line);
    if (w.size() != 3 || w[0] != "legend") throw FormatError("expected 'legend <id> <name>'", number);
    const int id = static_cast<int>(parse_integer(w[1], number));
    if (!mask.legend.emplace(id, std::string(w[2])).second) {
      throw FormatError("duplicate legend id " + std::to_string(id), number);
    }
  }
  for (int id : mask.ids) {
    if (!mask.legend.count(id)) throw FormatError("mask id " + std::to_string(id) + " has no legend entry");
  }
  return mask;
}

void write_mask(std::ostream& out, const SegmentationMask& mask) {
  out << "nesyvit-mask 1 " << mask.height << ' ' << mask.width << ' ' << mask.image_id << '\n';
  for (std::size_t r = 0; r < mask.height; ++r) {
    for (std::size_t c = 0; c < mask.width; ++c) out << (c ? " " : "") << mask.at(r, c);
    out << '\n';
  }
  for (const auto& [id, name] : mask.legend) out << "legend " << id << ' ' << name << '\n';
}

std::map<std::size_t, std::string> read_name_map(std::istream& in) {
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  Lines lines(text);
  std::map<std::size_t, std::string> out;
  for (auto [number, line] : lines.items) {
    auto w = words(line);
    if (w.size() != 2) throw FormatError("expected '<neuron-index> <predicate-name>'", number);
    const long long idx = parse_integer(w[0], number);
    if (idx < 0) throw FormatError("negative neuron index", number);
    if (!out.emplace(static_cast<std::size_t>(idx), std::string(w[1])).second) {
      throw FormatError("neuron " + std::to_string(idx) + " is named twice", number);
    }
  }
  return out;
}

void write_name_map(std::ostream& out, const std::map<std::size_t, std::string>& names,
                    const std::vector<std::string>& header_comments) {
  for (const auto& c : header_comments) out << "# " << c << '\n';
  for (const auto& [idx, name] : names) out << idx << ' ' << name << '\n';
}

namespace {

std::size_t image_index(const std::filesystem::path& file) {
  const std::string stem = file.stem().string();
  try {
    return static_cast<std::size_t>(parse_integer(stem, 0));
  } catch (const FormatError&) {
    throw FormatError(file.string() + ": image ids must be dataset row indices");
  }
}

template <typename T, typename Read>
T read_path(const std::filesystem::path& p, Read read) {
  std::istringstream in(detail::read_file(p));
  try {
    return read(in);
  } catch (const FormatError& e) {
    throw FormatError(p.string() + ": " + e.what());
  }
}

std::vector<std::filesystem::path> sorted_files(const std::filesystem::path& dir, std::string_view ext) {
  std::vector<std::filesystem::path> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ext) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

LabelData load_label_data(const std::filesystem::path& heatmap_dir, const std::filesystem::path& mask_dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(heatmap_dir)) throw FormatError("heatmap directory " + heatmap_dir.string() + " not found");
  if (!fs::is_directory(mask_dir)) throw FormatError("mask directory " + mask_dir.string() + " not found");
  LabelData data;
  for (const auto& p : sorted_files(heatmap_dir, ".hm")) {
    data.heatmaps.emplace(image_index(p), read_path<Heatmap>(p, read_heatmap));
  }
  for (const auto& entry : fs::directory_iterator(heatmap_dir)) {
    if (!entry.is_directory()) continue;
    const std::string name = entry.path().filename().string();
    if (name.size() < 2 || name[0] != 'n') continue;
    std::size_t neuron = 0;
    try {
      neuron = static_cast<std::size_t>(parse_integer(std::string_view(name).substr(1), 0));
    } catch (const FormatError&) {
      continue;
    }
    for (const auto& p : sorted_files(entry.path(), ".hm")) {
      data.neuron_heatmaps.emplace(std::pair{neuron, image_index(p)}, read_path<Heatmap>(p, read_heatmap));
    }
  }
  for (const auto& p : sorted_files(mask_dir, ".mask")) {
    data.masks.emplace(image_index(p), read_path<SegmentationMask>(p, read_mask));
  }
  return data;
}

void save_label_data(const LabelData& data, const std::filesystem::path& heatmap_dir,
                     const std::filesystem::path& mask_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(heatmap_dir);
  fs::create_directories(mask_dir);
  auto dump = [](const fs::path& p, auto&& write) {
    std::ostringstream out;
    write(out);
    detail::write_file(p, out.str());
  };
  for (const auto& [img, hm] : data.heatmaps) {
    dump(heatmap_dir / (std::to_string(img) + ".hm"), [&](std::ostream& o) { write_heatmap(o, hm); });
  }
  for (const auto& [key, hm] : data.neuron_heatmaps) {
    const fs::path dir = heatmap_dir / ("n" + std::to_string(key.first));
    fs::create_directories(dir);
    dump(dir / (std::to_string(key.second) + ".hm"), [&](std::ostream& o) { write_heatmap(o, hm); });
  }
  for (const auto& [img, mask] : data.masks) {
    dump(mask_dir / (std::to_string(img) + ".mask"), [&](std::ostream& o) { write_mask(o, mask); });
  }
}

}  // namespace nesyvit
