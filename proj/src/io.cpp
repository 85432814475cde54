#include "nesyvit/io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <system_error>

namespace nesyvit {

namespace detail {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(text.substr(start));
      return out;
    }
    out.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string_view trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return text.substr(first, last - first + 1);
}

double parse_real(std::string_view field, std::size_t line) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
    throw FormatError("expected a number, found '" + std::string(field) + "'", line);
  }
  return value;
}

long long parse_integer(std::string_view field, std::size_t line) {
  field = trim(field);
  long long value = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
    throw FormatError("expected an integer, found '" + std::string(field) + "'", line);
  }
  return value;
}

}  // namespace detail

using detail::parse_integer;
using detail::parse_real;
using detail::split;
using detail::trim;

std::string format_real(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw std::runtime_error("cannot format number");
  return std::string(buf, ptr);
}

namespace {

struct Line {
  std::size_t number;
  std::string_view text;
};

constexpr std::string_view kClassesDirective = "classes:";

// Non-comment, non-blank lines plus the optional class directive.
struct Document {
  std::vector<Line> lines;
  std::optional<std::vector<std::string>> classes;
};

Document scan(const std::string& text) {
  Document doc;
  std::size_t number = 0;
  for (auto raw : split(text, '\n')) {
    ++number;
    auto line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '#') {
      auto body = trim(line.substr(1));
      if (!doc.classes && body.substr(0, kClassesDirective.size()) == kClassesDirective) {
        std::vector<std::string> names;
        auto list = trim(body.substr(kClassesDirective.size()));
        if (!list.empty()) {
          for (auto name : split(list, ',')) {
            auto n = trim(name);
            if (n.empty()) throw FormatError("empty class name in classes directive", number);
            names.emplace_back(n);
          }
        }
        doc.classes = std::move(names);
      }
      continue;
    }
    doc.lines.push_back({number, line});
  }
  return doc;
}

class ClassIndex {
 public:
  explicit ClassIndex(std::optional<std::vector<std::string>> fixed) : fixed_(fixed.has_value()) {
    if (fixed) {
      for (auto& n : *fixed) {
        if (index_.count(n)) throw FormatError("duplicate class '" + n + "' in classes directive");
        index_.emplace(n, names_.size());
        names_.push_back(n);
      }
    }
  }

  ClassId lookup(std::string_view label, std::size_t line) {
    auto key = std::string(trim(label));
    if (key.empty()) throw FormatError("empty label", line);
    if (auto it = index_.find(key); it != index_.end()) return it->second;
    if (fixed_) throw FormatError("unknown label '" + key + "'", line);
    index_.emplace(key, names_.size());
    names_.push_back(key);
    return names_.size() - 1;
  }

  std::vector<std::string> names() && { return std::move(names_); }

 private:
  bool fixed_;
  std::map<std::string, ClassId> index_;
  std::vector<std::string> names_;
};

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == ',')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != ',') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

void write_comments(std::ostream& out, const std::vector<std::string>& comments) {
  for (const auto& c : comments) out << "# " << c << '\n';
}

void write_classes(std::ostream& out, const std::vector<std::string>& names) {
  out << "# classes: ";
  for (std::size_t c = 0; c < names.size(); ++c) out << (c ? "," : "") << names[c];
  out << '\n';
}

std::size_t parse_count(std::string_view field, std::size_t line, const char* what) {
  const long long v = parse_integer(field, line);
  if (v < 1) throw FormatError(std::string(what) + " must be at least 1", line);
  return static_cast<std::size_t>(v);
}

std::string slurp(std::istream& in) {
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

EmbeddingDataset read_embeddings(std::istream& in) {
  const std::string text = slurp(in);
  Document doc = scan(text);
  if (doc.lines.empty()) throw FormatError("missing header");
  const Line& head = doc.lines.front();
  auto fields = split_fields(head.text);
  if (fields.size() != 4 || fields[0] != "nesyvit-emb") {
    throw FormatError("malformed header, expected 'nesyvit-emb 1 <N> <E>'", head.number);
  }
  if (fields[1] != "1") throw FormatError("unsupported embedding format version", head.number);
  const std::size_t n = parse_count(fields[2], head.number, "sample count");
  const std::size_t e = parse_count(fields[3], head.number, "embedding dimension");
  if (doc.lines.size() - 1 != n) {
    throw FormatError("header declares " + std::to_string(n) + " rows but file has " +
                          std::to_string(doc.lines.size() - 1),
                      head.number);
  }

  ClassIndex classes(std::move(doc.classes));
  EmbeddingDataset data;
  data.features = Matrix(n, e);
  data.labels.reserve(n);
  for (std::size_t r = 0; r < n; ++r) {
    const Line& line = doc.lines[r + 1];
    auto parts = split(line.text, ',');
    if (parts.size() != e + 1) {
      throw FormatError("row " + std::to_string(r + 1) + " has " + std::to_string(parts.size() - 1) +
                            " values, header declares E=" + std::to_string(e),
                        line.number);
    }
    data.labels.push_back(classes.lookup(parts[0], line.number));
    for (std::size_t c = 0; c < e; ++c) data.features(r, c) = parse_real(parts[c + 1], line.number);
  }
  data.class_names = std::move(classes).names();
  return data;
}

void write_embeddings(std::ostream& out, const EmbeddingDataset& data,
                      const std::vector<std::string>& header_comments) {
  data.validate();
  write_comments(out, header_comments);
  write_classes(out, data.class_names);
  out << "nesyvit-emb 1 " << data.size() << ' ' << data.dim() << '\n';
  for (std::size_t r = 0; r < data.size(); ++r) {
    out << data.class_names[data.labels[r]];
    for (double v : data.features.row(r)) out << ',' << format_real(v);
    out << '\n';
  }
}

BinaryConceptTable read_table(std::istream& in) {
  const std::string text = slurp(in);
  Document doc = scan(text);
  if (doc.lines.empty()) throw FormatError("missing header");
  const Line& head = doc.lines.front();
  auto names = split(head.text, ',');
  if (trim(names[0]) != "label" || names.size() < 2) {
    throw FormatError("malformed header, expected 'label,<name_0>,...'", head.number);
  }
  BinaryConceptTable table;
  for (std::size_t c = 1; c < names.size(); ++c) {
    auto n = trim(names[c]);
    if (n.empty()) throw FormatError("empty column name", head.number);
    table.neuron_names.emplace_back(n);
  }
  const std::size_t d = table.neuron_names.size();
  ClassIndex classes(std::move(doc.classes));
  table.rows = doc.lines.size() - 1;
  table.bits.reserve(table.rows * d);
  for (std::size_t r = 0; r < table.rows; ++r) {
    const Line& line = doc.lines[r + 1];
    auto parts = split(line.text, ',');
    if (parts.size() != d + 1) {
      throw FormatError("row " + std::to_string(r + 1) + " has " + std::to_string(parts.size() - 1) +
                            " entries, header has " + std::to_string(d) + " columns",
                        line.number);
    }
    table.labels.push_back(classes.lookup(parts[0], line.number));
    for (std::size_t c = 0; c < d; ++c) {
      auto v = trim(parts[c + 1]);
      if (v == "0") {
        table.bits.push_back(0);
      } else if (v == "1") {
        table.bits.push_back(1);
      } else {
        throw FormatError("expected 0 or 1, found '" + std::string(v) + "'", line.number);
      }
    }
  }
  table.class_names = std::move(classes).names();
  return table;
}

void write_table(std::ostream& out, const BinaryConceptTable& table,
                 const std::vector<std::string>& header_comments) {
  table.validate();
  write_comments(out, header_comments);
  write_classes(out, table.class_names);
  out << "label";
  for (const auto& n : table.neuron_names) out << ',' << n;
  out << '\n';
  for (std::size_t r = 0; r < table.rows; ++r) {
    out << table.class_names[table.labels[r]];
    for (auto b : table.row(r)) out << ',' << static_cast<int>(b);
    out << '\n';
  }
}

SparseConceptLayer read_layer(std::istream& in) {
  const std::string text = slurp(in);
  Document doc = scan(text);
  if (doc.lines.empty()) throw FormatError("missing header");
  const Line& head = doc.lines.front();
  auto fields = split_fields(head.text);
  if (fields.size() != 4 || fields[0] != "nesyvit-layer") {
    throw FormatError("malformed header, expected 'nesyvit-layer 1 <D> <E>'", head.number);
  }
  if (fields[1] != "1") throw FormatError("unsupported layer format version", head.number);
  const std::size_t d = parse_count(fields[2], head.number, "concept count");
  const std::size_t e = parse_count(fields[3], head.number, "input dimension");
  if (doc.lines.size() != d + 2) {
    throw FormatError("layer file needs " + std::to_string(d) + " weight rows and one bias row",
                      head.number);
  }
  SparseConceptLayer layer;
  layer.weights = Matrix(d, e);
  for (std::size_t j = 0; j < d; ++j) {
    const Line& line = doc.lines[j + 1];
    auto parts = split_fields(line.text);
    if (parts.size() != e) {
      throw FormatError("weight row " + std::to_string(j + 1) + " has " +
                            std::to_string(parts.size()) + " values, expected " + std::to_string(e),
                        line.number);
    }
    for (std::size_t c = 0; c < e; ++c) layer.weights(j, c) = parse_real(parts[c], line.number);
  }
  const Line& last = doc.lines.back();
  auto parts = split_fields(last.text);
  if (parts.size() != d) {
    throw FormatError("bias row has " + std::to_string(parts.size()) + " values, expected " +
                          std::to_string(d),
                      last.number);
  }
  for (auto p : parts) layer.bias.push_back(parse_real(p, last.number));
  layer.validate();
  return layer;
}

void write_layer(std::ostream& out, const SparseConceptLayer& layer,
                 const std::vector<std::string>& header_comments) {
  layer.validate();
  write_comments(out, header_comments);
  out << "nesyvit-layer 1 " << layer.concepts() << ' ' << layer.input_dim() << '\n';
  for (std::size_t j = 0; j < layer.concepts(); ++j) {
    auto w = layer.weights.row(j);
    for (std::size_t c = 0; c < w.size(); ++c) out << (c ? " " : "") << format_real(w[c]);
    out << '\n';
  }
  for (std::size_t j = 0; j < layer.bias.size(); ++j) {
    out << (j ? " " : "") << format_real(layer.bias[j]);
  }
  out << '\n';
}

EmbeddingDataset load_embeddings(const std::filesystem::path& path) {
  std::istringstream in(detail::read_file(path));
  return read_embeddings(in);
}

void save_embeddings(const std::filesystem::path& path, const EmbeddingDataset& data,
                     const std::vector<std::string>& header_comments) {
  std::ostringstream out;
  write_embeddings(out, data, header_comments);
  detail::write_file(path, out.str());
}

BinaryConceptTable load_table(const std::filesystem::path& path) {
  std::istringstream in(detail::read_file(path));
  return read_table(in);
}

void save_table(const std::filesystem::path& path, const BinaryConceptTable& table,
                const std::vector<std::string>& header_comments) {
  std::ostringstream out;
  write_table(out, table, header_comments);
  detail::write_file(path, out.str());
}

SparseConceptLayer load_layer(const std::filesystem::path& path) {
  std::istringstream in(detail::read_file(path));
  return read_layer(in);
}

void save_layer(const std::filesystem::path& path, const SparseConceptLayer& layer,
                const std::vector<std::string>& header_comments) {
  std::ostringstream out;
  write_layer(out, layer, header_comments);
  detail::write_file(path, out.str());
}

}  // namespace nesyvit
