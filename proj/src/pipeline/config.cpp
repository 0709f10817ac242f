#include "tabml/pipeline/config.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "tabml/core/error.hpp"
#include "tabml/core/random.hpp"
#include "tabml/models/catalog.hpp"
#include "tabml/unsupervised/cluster.hpp"

namespace tabml::pipeline {

nlohmann::json ToJson(const FieldError& error) {
  return {{"field", error.field}, {"message", error.message}};
}

namespace {

using Json = nlohmann::json;

class Parser {
 public:
  explicit Parser(std::vector<FieldError>& errors) : errors_(errors) {}

  void Fail(std::string field, std::string message) {
    errors_.push_back({std::move(field), std::move(message)});
  }

  void CheckKeys(const Json& obj, const std::string& prefix, std::initializer_list<const char*> known) {
    for (const auto& [key, value] : obj.items()) {
      if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; })) {
        Fail(prefix + key, "unknown field");
      }
    }
  }

  std::optional<std::string> String(const Json& obj, const std::string& key, const std::string& field) {
    if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
    const Json& v = obj.at(key);
    if (!v.is_string() || v.get<std::string>().empty()) {
      Fail(field, "must be a non-empty string");
      return std::nullopt;
    }
    return v.get<std::string>();
  }

  std::optional<std::vector<std::string>> Strings(const Json& obj, const std::string& key,
                                                  const std::string& field) {
    if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
    const Json& v = obj.at(key);
    if (!v.is_array()) {
      Fail(field, "must be an array of strings");
      return std::nullopt;
    }
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& e : v) {
      if (!e.is_string() || e.get<std::string>().empty()) {
        Fail(field, "must be an array of non-empty strings");
        return std::nullopt;
      }
      if (!seen.insert(e.get<std::string>()).second) {
        Fail(field, "duplicate entry \"" + e.get<std::string>() + "\"");
        return std::nullopt;
      }
      out.push_back(e.get<std::string>());
    }
    return out;
  }

  std::optional<const Json*> Object(const Json& obj, const std::string& key) {
    if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
    if (!obj.at(key).is_object()) {
      Fail(key, "must be an object");
      return std::nullopt;
    }
    return &obj.at(key);
  }

  std::optional<std::uint64_t> Count(const Json& obj, const std::string& key, const std::string& field,
                                     std::uint64_t lo, std::uint64_t hi) {
    if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
    const Json& v = obj.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      Fail(field, "must be a non-negative integer");
      return std::nullopt;
    }
    const auto n = v.get<std::uint64_t>();
    if (n < lo || n > hi) {
      Fail(field, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
      return std::nullopt;
    }
    return n;
  }

 private:
  std::vector<FieldError>& errors_;
};

}  // namespace

ConfigParse ParseRunConfig(const nlohmann::json& doc) {
  ConfigParse out;
  Parser p(out.errors);
  if (!doc.is_object()) {
    p.Fail("", "config must be a JSON object");
    return out;
  }
  p.CheckKeys(doc, "", {"task", "dataset_id", "target", "inputs", "models", "preprocessing", "split",
                        "tuning", "clustering", "notify"});
  RunConfig c;

  if (auto task = p.String(doc, "task", "task")) {
    if (auto t = data::ParseTask(*task)) {
      c.task = *t;
    } else {
      p.Fail("task", "unknown task \"" + *task + "\"");
    }
  } else if (!doc.contains("task") || doc.at("task").is_null()) {
    p.Fail("task", "required");
  }
  const bool supervised = c.task != data::Task::kUnsupervised;

  if (auto id = p.String(doc, "dataset_id", "dataset_id")) {
    c.dataset_id = *id;
  } else if (!doc.contains("dataset_id") || doc.at("dataset_id").is_null()) {
    p.Fail("dataset_id", "required");
  }

  c.target = p.String(doc, "target", "target");
  if (supervised && !c.target && (!doc.contains("target") || doc.at("target").is_null())) {
    p.Fail("target", "required for " + std::string(data::TaskName(c.task)));
  }
  if (!supervised) c.target.reset();

  if (auto inputs = p.Strings(doc, "inputs", "inputs")) {
    c.inputs = *inputs;
    if (c.target && std::find(c.inputs.begin(), c.inputs.end(), *c.target) != c.inputs.end()) {
      p.Fail("inputs", "must not contain the target column");
    }
  }

  if (auto models = p.Strings(doc, "models", "models")) {
    if (models->empty()) p.Fail("models", "must not be empty");
    for (const auto& name : *models) {
      if (supervised) {
        auto a = models::ParseAlgorithm(name);
        if (!a) {
          p.Fail("models", "unknown algorithm \"" + name + "\"");
        } else if (!models::Catalog::Default().entry(*a).supports(c.task)) {
          p.Fail("models", name + " does not support " + std::string(data::TaskName(c.task)));
        }
      } else if (!unsupervised::ParseClusterAlgorithm(name)) {
        p.Fail("models", "unknown clustering algorithm \"" + name + "\"");
      }
    }
    c.models = *models;
  }

  if (auto pre = p.Object(doc, "preprocessing")) {
    const Json& obj = **pre;
    p.CheckKeys(obj, "preprocessing.", {"scaler", "oversample"});
    if (auto s = p.String(obj, "scaler", "preprocessing.scaler")) {
      if (*s == "none") {
        c.preprocessing.scaler.reset();
      } else if (*s == "auto") {
        c.preprocessing.scaler = preprocess::ScalerMethod::kStandard;
      } else if (auto m = preprocess::ParseScalerMethod(*s)) {
        c.preprocessing.scaler = *m;
      } else {
        p.Fail("preprocessing.scaler", "unknown scaler \"" + *s + "\"");
      }
    }
    if (auto s = p.String(obj, "oversample", "preprocessing.oversample")) {
      if (auto o = ParseOversampleChoice(*s)) {
        c.preprocessing.oversample = *o;
      } else {
        p.Fail("preprocessing.oversample", "unknown oversampler \"" + *s + "\"");
      }
    }
  }

  if (auto split = p.Object(doc, "split")) {
    const Json& obj = **split;
    p.CheckKeys(obj, "split.", {"test_fraction", "seed"});
    if (obj.contains("test_fraction") && !obj.at("test_fraction").is_null()) {
      const Json& v = obj.at("test_fraction");
      if (!v.is_number() || !(v.get<double>() > 0.0 && v.get<double>() < 1.0)) {
        p.Fail("split.test_fraction", "must be a number in (0, 1)");
      } else {
        c.test_fraction = v.get<double>();
      }
    }
    if (auto s = p.Count(obj, "seed", "split.seed", 0, UINT64_MAX)) c.seed = *s;
  }

  if (auto tuning = p.Object(doc, "tuning")) {
    const Json& obj = **tuning;
    p.CheckKeys(obj, "tuning.", {"enabled", "folds"});
    if (obj.contains("enabled") && !obj.at("enabled").is_null()) {
      if (!obj.at("enabled").is_boolean()) {
        p.Fail("tuning.enabled", "must be a boolean");
      } else {
        c.tuning_enabled = obj.at("enabled").get<bool>();
      }
    }
    if (auto f = p.Count(obj, "folds", "tuning.folds", 2, 20)) c.folds = *f;
  }

  if (auto clustering = p.Object(doc, "clustering")) {
    const Json& obj = **clustering;
    p.CheckKeys(obj, "clustering.", {"k"});
    if (auto k = p.Count(obj, "k", "clustering.k", 1, 1000)) c.clusters = *k;
  }

  if (auto notify = p.Object(doc, "notify")) {
    const Json& obj = **notify;
    p.CheckKeys(obj, "notify.", {"mode", "address"});
    NotifySpec n;
    auto mode = p.String(obj, "mode", "notify.mode");
    auto address = p.String(obj, "address", "notify.address");
    if (!mode) {
      p.Fail("notify.mode", "required");
    } else if (*mode != "file" && *mode != "webhook") {
      p.Fail("notify.mode", "must be \"file\" or \"webhook\"");
    }
    if (!address) {
      p.Fail("notify.address", "required");
    } else if (mode && *mode == "webhook" && address->rfind("http://", 0) != 0) {
      p.Fail("notify.address", "webhook address must start with http://");
    }
    if (mode && address) c.notify = NotifySpec{*mode, *address};
  }

  if (out.errors.empty()) out.config = std::move(c);
  return out;
}

RunConfig RunConfigFromJson(const nlohmann::json& doc) {
  ConfigParse parsed = ParseRunConfig(doc);
  if (!parsed.errors.empty()) {
    std::string message;
    for (const auto& e : parsed.errors) {
      if (!message.empty()) message += "; ";
      message += (e.field.empty() ? "config" : e.field) + ": " + e.message;
    }
    throw Error(ErrorCode::kInvalidConfig, message);
  }
  return *parsed.config;
}

nlohmann::json ToJson(const RunConfig& config) {
  Json j = {{"task", data::TaskName(config.task)},
            {"dataset_id", config.dataset_id},
            {"target", config.target ? Json(*config.target) : Json(nullptr)},
            {"inputs", config.inputs},
            {"models", config.models ? Json(*config.models) : Json(nullptr)},
            {"preprocessing",
             {{"scaler", config.preprocessing.scaler
                             ? Json(preprocess::ScalerMethodName(*config.preprocessing.scaler))
                             : Json("none")},
              {"oversample", OversampleChoiceName(config.preprocessing.oversample)}}},
            {"split", {{"test_fraction", config.test_fraction}, {"seed", config.seed}}},
            {"tuning", {{"enabled", config.tuning_enabled}, {"folds", config.folds}}},
            {"clustering", {{"k", config.clusters ? Json(*config.clusters) : Json(nullptr)}}}};
  j["notify"] = config.notify ? Json{{"mode", config.notify->mode}, {"address", config.notify->address}}
                              : Json(nullptr);
  return j;
}

std::vector<FieldError> CheckColumns(const RunConfig& config, const data::Schema& schema) {
  std::vector<FieldError> errors;
  if (config.target && schema.find(*config.target) == nullptr) {
    errors.push_back({"target", "unknown column \"" + *config.target + "\""});
  }
  for (const auto& name : config.inputs) {
    if (schema.find(name) == nullptr) errors.push_back({"inputs", "unknown column \"" + name + "\""});
  }
  return errors;
}

std::string ConfigHash(const RunConfig& config) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(Fnv1a(ToJson(config).dump())));
  return buf;
}

}  // namespace tabml::pipeline
