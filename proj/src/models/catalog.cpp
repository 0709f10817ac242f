#include "tabml/models/catalog.hpp"

#include <algorithm>
#include <cmath>

#include "tabml/core/error.hpp"
#include "tabml/core/random.hpp"

namespace tabml::models {

bool CatalogEntry::supports(Task task) const {
  return std::find(tasks.begin(), tasks.end(), task) != tasks.end();
}

Catalog Catalog::Parse(const nlohmann::json& doc) {
  Catalog catalog;
  catalog.version_ = doc.at("version").get<int>();
  for (const auto& [name, body] : doc.at("algorithms").items()) {
    auto algorithm = ParseAlgorithm(name);
    Require(algorithm.has_value(), ErrorCode::kUnknownAlgorithmName,
            "catalog lists unknown algorithm '" + name + "'");
    CatalogEntry entry{*algorithm, {}, {}, {}};
    for (const auto& t : body.at("tasks")) {
      auto task = data::ParseTask(t.get<std::string>());
      Require(task.has_value(), ErrorCode::kInvalidConfig, "catalog task '" + t.dump() + "'");
      entry.tasks.push_back(*task);
    }
    for (const auto& [pname, range] : body.at("params").items()) {
      entry.params[pname] = ParamRange{range.at("default").get<double>(),
                                       range.at("min").get<double>(),
                                       range.at("max").get<double>(),
                                       range.value("integer", false)};
    }
    for (const auto& [pname, values] : body.at("grid").items()) {
      entry.grid[pname] = values.get<std::vector<double>>();
    }
    catalog.entries_.emplace(*algorithm, std::move(entry));
  }
  return catalog;
}

const Catalog& Catalog::Default() {
  static const Catalog catalog = Parse(nlohmann::json::parse(CatalogJsonText()));
  return catalog;
}

const CatalogEntry& Catalog::entry(Algorithm algorithm) const {
  auto it = entries_.find(algorithm);
  Require(it != entries_.end(), ErrorCode::kUnknownAlgorithmName,
          "algorithm '" + std::string(AlgorithmName(algorithm)) + "' not in catalog");
  return it->second;
}

ModelSpec Catalog::DefaultSpec(Algorithm algorithm, Task task, std::size_t n_rows,
                               std::size_t n_features, std::uint64_t seed) const {
  const CatalogEntry& e = entry(algorithm);
  Require(e.supports(task), ErrorCode::kTaskKindMismatch,
          std::string(AlgorithmName(algorithm)) + " does not support " +
              std::string(data::TaskName(task)));
  ModelSpec spec{algorithm, task, {}, seed};
  for (const auto& [name, range] : e.params) spec.params[name] = range.default_value;

  const double p = static_cast<double>(std::max<std::size_t>(n_features, 1));
  switch (algorithm) {
    case Algorithm::kRandomForest:
      spec.params["max_features"] = task == Task::kClassification ? std::ceil(std::sqrt(p))
                                                                   : std::ceil(p / 3.0);
      break;
    case Algorithm::kKnn:
      if (n_rows > 0) {
        spec.params["k"] = std::min(spec.params["k"], static_cast<double>(n_rows));
      }
      break;
    default:
      break;
  }
  return spec;
}

void Catalog::Validate(const ModelSpec& spec) const {
  const CatalogEntry& e = entry(spec.algorithm);
  Require(e.supports(spec.task), ErrorCode::kTaskKindMismatch,
          spec.name() + " does not support " + std::string(data::TaskName(spec.task)));
  for (const auto& [name, value] : spec.params) {
    auto it = e.params.find(name);
    Require(it != e.params.end(), ErrorCode::kInvalidHyperparameter,
            spec.name() + " has no hyperparameter '" + name + "'");
    const ParamRange& r = it->second;
    Require(std::isfinite(value) && value >= r.min && value <= r.max,
            ErrorCode::kInvalidHyperparameter,
            spec.name() + "." + name + "=" + std::to_string(value) + " outside [" +
                std::to_string(r.min) + ", " + std::to_string(r.max) + "]");
    Require(!r.integer || value == std::floor(value), ErrorCode::kInvalidHyperparameter,
            spec.name() + "." + name + " must be an integer");
  }
}

std::vector<Algorithm> DefaultAlgorithms(Task task) {
  if (task == Task::kRegression) {
    return {Algorithm::kLinearRegression, Algorithm::kKnn, Algorithm::kRandomForest,
            Algorithm::kGradientBoosting, Algorithm::kMlp};
  }
  return {Algorithm::kLogisticRegression, Algorithm::kSvm,          Algorithm::kKnn,
          Algorithm::kNaiveBayes,         Algorithm::kRandomForest, Algorithm::kGradientBoosting,
          Algorithm::kMlp};
}

std::vector<ModelSpec> GetModels(Task task, std::size_t n_rows, std::size_t n_features,
                                 const std::optional<std::vector<std::string>>& selection,
                                 std::uint64_t seed) {
  Require(task != Task::kUnsupervised, ErrorCode::kTaskKindMismatch,
          "the supervised catalog has no unsupervised models");
  std::vector<Algorithm> algorithms;
  if (!selection || selection->empty()) {
    algorithms = DefaultAlgorithms(task);
  } else {
    for (const auto& name : *selection) {
      auto a = ParseAlgorithm(name);
      Require(a.has_value(), ErrorCode::kUnknownAlgorithmName, "unknown algorithm '" + name + "'");
      if (std::find(algorithms.begin(), algorithms.end(), *a) == algorithms.end()) {
        algorithms.push_back(*a);
      }
    }
  }
  const Catalog& catalog = Catalog::Default();
  std::vector<ModelSpec> specs;
  for (Algorithm a : algorithms) {
    specs.push_back(catalog.DefaultSpec(a, task, n_rows, n_features,
                                        DeriveSeed(seed, static_cast<std::uint64_t>(a) + 1)));
  }
  return specs;
}

}  // namespace tabml::models
