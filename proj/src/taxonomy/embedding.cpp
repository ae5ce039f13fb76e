#include "wildlong/taxonomy/embedding.hpp"

#include <cmath>

#include "wildlong/error.hpp"
#include "wildlong/jsonl.hpp"

namespace wildlong::taxonomy {

void EmbeddingTable::add(Embedding e) {
  if (e.components.empty()) throw InputError("embedding '" + e.id + "' has no components");
  for (double x : e.components) {
    if (!std::isfinite(x)) throw InputError("embedding '" + e.id + "' has a non-finite component");
  }
  if (rows_.empty()) {
    dim_ = e.dim();
  } else if (e.dim() != dim_) {
    throw InputError("embedding '" + e.id + "' has dim " + std::to_string(e.dim()) +
                     ", expected " + std::to_string(dim_));
  }
  rows_[e.id] = std::move(e.components);
}

const std::vector<double>* EmbeddingTable::find(const std::string& id) const {
  auto it = rows_.find(id);
  return it == rows_.end() ? nullptr : &it->second;
}

Embedding embedding_from_json(const nlohmann::json& j) {
  if (!j.contains("id") || !j["id"].is_string()) throw InputError("embedding record needs a string id");
  if (!j.contains("components") || !j["components"].is_array()) {
    throw InputError("embedding record needs a components array");
  }
  Embedding e;
  e.id = j["id"].get<std::string>();
  for (const auto& c : j["components"]) {
    if (!c.is_number()) throw InputError("embedding '" + e.id + "' has a non-numeric component");
    e.components.push_back(c.get<double>());
  }
  if (j.contains("dim")) {
    if (!j["dim"].is_number_integer() || j["dim"].get<std::int64_t>() != static_cast<std::int64_t>(e.dim())) {
      throw InputError("embedding '" + e.id + "' dim field does not match its components");
    }
  }
  return e;
}

nlohmann::json to_json(const Embedding& e) {
  return {{"id", e.id}, {"dim", e.dim()}, {"components", e.components}};
}

EmbeddingTable load_embeddings(const std::filesystem::path& path) {
  EmbeddingTable table;
  const auto stats = read_jsonl(path, [&](const Json& j) { table.add(embedding_from_json(j)); });
  if (stats.malformed > 0) {
    throw InputError(path.string() + ": " + std::to_string(stats.malformed) + " malformed lines");
  }
  return table;
}

std::string doc_type_embedding_id(const std::string& normalized_type) {
  return "doctype:" + normalized_type;
}

std::vector<double> l2_normalized(std::vector<double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  if (s <= 0.0) return v;
  const double inv = 1.0 / std::sqrt(s);
  for (double& x : v) x *= inv;
  return v;
}

}  // namespace wildlong::taxonomy
