#ifndef TABML_MODELS_CATALOG_HPP_
#define TABML_MODELS_CATALOG_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "tabml/models/model.hpp"

namespace tabml::models {

// Raw text of resources/model_catalog.json, compiled into the library.
std::string_view CatalogJsonText();

struct ParamRange {
  double default_value = 0.0;
  double min = 0.0;
  double max = 0.0;
  bool integer = false;
};

struct CatalogEntry {
  Algorithm algorithm;
  std::vector<Task> tasks;
  std::map<std::string, ParamRange> params;
  // Candidate values searched during tuning.
  std::map<std::string, std::vector<double>> grid;

  bool supports(Task task) const;
};

// Preset hyperparameter defaults, ranges and tuning grids per algorithm.
class Catalog {
 public:
  static const Catalog& Default();
  static Catalog Parse(const nlohmann::json& doc);

  int version() const { return version_; }
  const CatalogEntry& entry(Algorithm algorithm) const;

  // Preset defaults with dimension-aware adjustments.
  ModelSpec DefaultSpec(Algorithm algorithm, Task task, std::size_t n_rows,
                        std::size_t n_features, std::uint64_t seed) const;

  // Throws InvalidHyperparameter for unknown names or out-of-range values,
  // TaskKindMismatch when the algorithm does not support the task.
  void Validate(const ModelSpec& spec) const;

 private:
  int version_ = 0;
  std::map<Algorithm, CatalogEntry> entries_;
};

// Default catalog order for a task.
std::vector<Algorithm> DefaultAlgorithms(Task task);

// The models to train. Without a selection this is the whole catalog for the
// task; each spec gets a seed derived from `seed` and its catalog position.
std::vector<ModelSpec> GetModels(Task task, std::size_t n_rows, std::size_t n_features,
                                 const std::optional<std::vector<std::string>>& selection,
                                 std::uint64_t seed = 0);

}  // namespace tabml::models

#endif  // TABML_MODELS_CATALOG_HPP_
