#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "nesyvit/concept_core.hpp"

namespace nesyvit {

// Text formats (all accept `#` comment lines anywhere):
//
//   embeddings   nesyvit-emb 1 <N> <E>
//                <label>,<v1>,...,<vE>            (N rows)
//   table        label,<name_0>,...,<name_{D-1}>
//                <label>,<b0>,...,<b_{D-1}>       (bits are 0/1)
//   layer        nesyvit-layer 1 <D> <E>
//                <w_1> ... <w_E>                  (D rows)
//                <b_1> ... <b_D>
//
// Labels are class names. A `# classes: a,b,c` comment fixes the class order;
// when it is present any other label is rejected. Without it classes are
// numbered by first appearance.

/// Shortest decimal form that parses back to the same double.
std::string format_real(double value);

EmbeddingDataset read_embeddings(std::istream& in);
void write_embeddings(std::ostream& out, const EmbeddingDataset& data,
                      const std::vector<std::string>& header_comments = {});

BinaryConceptTable read_table(std::istream& in);
void write_table(std::ostream& out, const BinaryConceptTable& table,
                 const std::vector<std::string>& header_comments = {});

SparseConceptLayer read_layer(std::istream& in);
void write_layer(std::ostream& out, const SparseConceptLayer& layer,
                 const std::vector<std::string>& header_comments = {});

EmbeddingDataset load_embeddings(const std::filesystem::path& path);
void save_embeddings(const std::filesystem::path& path, const EmbeddingDataset& data,
                     const std::vector<std::string>& header_comments = {});
BinaryConceptTable load_table(const std::filesystem::path& path);
void save_table(const std::filesystem::path& path, const BinaryConceptTable& table,
                const std::vector<std::string>& header_comments = {});
SparseConceptLayer load_layer(const std::filesystem::path& path);
void save_layer(const std::filesystem::path& path, const SparseConceptLayer& layer,
                const std::vector<std::string>& header_comments = {});

namespace detail {

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);
std::vector<std::string_view> split(std::string_view text, char sep);
std::string_view trim(std::string_view text);
double parse_real(std::string_view field, std::size_t line);
long long parse_integer(std::string_view field, std::size_t line);

}  // namespace detail

}  // namespace nesyvit
