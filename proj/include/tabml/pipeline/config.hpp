#ifndef TABML_PIPELINE_CONFIG_HPP_
#define TABML_PIPELINE_CONFIG_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tabml/data/schema.hpp"
#include "tabml/pipeline/preprocessing.hpp"

namespace tabml::pipeline {

struct NotifySpec {
  std::string mode;  // "file" or "webhook"
  std::string address;
};

// One pipeline run. JSON form:
// {task, dataset_id, target, inputs[], models[], preprocessing{scaler, oversample},
//  split{test_fraction, seed}, tuning{enabled, folds}, clustering{k}, notify{mode, address}}
struct RunConfig {
  data::Task task = data::Task::kClassification;
  std::string dataset_id;
  std::optional<std::string> target;
  std::vector<std::string> inputs;                  // empty: every non-target column
  std::optional<std::vector<std::string>> models;   // empty: the whole catalog
  PreprocessOptions preprocessing;
  double test_fraction = 0.25;
  std::uint64_t seed = 0;
  bool tuning_enabled = true;
  std::size_t folds = 5;
  std::optional<std::size_t> clusters;  // unsupervised k; empty: chosen by silhouette
  std::optional<NotifySpec> notify;
};

struct FieldError {
  std::string field;
  std::string message;
};

nlohmann::json ToJson(const FieldError& error);

struct ConfigParse {
  std::optional<RunConfig> config;
  std::vector<FieldError> errors;
};

// Field-level validation; `config` is set only when `errors` is empty.
ConfigParse ParseRunConfig(const nlohmann::json& doc);

// Throws InvalidConfig listing every field error.
RunConfig RunConfigFromJson(const nlohmann::json& doc);

// Canonical form with every default filled in.
nlohmann::json ToJson(const RunConfig& config);

// Column references checked against a dataset schema.
std::vector<FieldError> CheckColumns(const RunConfig& config, const data::Schema& schema);

// FNV-1a of the canonical JSON, as 16 hex digits.
std::string ConfigHash(const RunConfig& config);

}  // namespace tabml::pipeline

#endif  // TABML_PIPELINE_CONFIG_HPP_
