#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace wildlong::taxonomy {

struct Embedding {
  std::string id;
  std::vector<double> components;
  std::size_t dim() const { return components.size(); }
};

/// Embeddings keyed by id, all sharing one dimension.
class EmbeddingTable {
 public:
  /// Throws InputError on non-finite components, a `dim` field that disagrees
  /// with the component count, or a dimension different from earlier entries.
  void add(Embedding e);
  const std::vector<double>* find(const std::string& id) const;
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return rows_.size(); }
  const std::map<std::string, std::vector<double>>& rows() const { return rows_; }

 private:
  std::map<std::string, std::vector<double>> rows_;
  std::size_t dim_ = 0;
};

/// Parses {id, dim, components[]}.
Embedding embedding_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Embedding& e);

EmbeddingTable load_embeddings(const std::filesystem::path& path);

/// Id under which the embedding of a free-form document type string is stored.
std::string doc_type_embedding_id(const std::string& normalized_type);

/// Unit-length copy; zero vectors are returned unchanged.
std::vector<double> l2_normalized(std::vector<double> v);

}  // namespace wildlong::taxonomy
