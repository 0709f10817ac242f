#ifndef TABML_DATA_SCHEMA_HPP_
#define TABML_DATA_SCHEMA_HPP_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>
#include "tabml/core/matrix.hpp"
#include "tabml/data/table.hpp"

namespace tabml::data {

inline constexpr std::size_t kDefaultCategoricalThreshold = 20;

enum class ColumnKind { kContinuous, kBinary, kCategorical };

std::string_view ColumnKindName(ColumnKind kind);

struct ColumnSchema {
  std::string name;
  ColumnKind kind = ColumnKind::kCategorical;
  std::size_t missing_count = 0;
  std::size_t distinct_count = 0;
  // True when every non-missing value parses as a number.
  bool numeric = false;
};

struct Schema {
  std::vector<ColumnSchema> columns;

  const ColumnSchema* find(std::string_view name) const;
};

nlohmann::json ToJson(const Schema& schema);

// Kind precedence: numeric with more than `categorical_threshold` distinct
// values is continuous; exactly two distinct values is binary; anything else
// is categorical. Distinct values compare numerically for numeric columns and
// by case-folded text otherwise.
Schema InferSchema(const RawTable& table,
                   std::size_t categorical_threshold = kDefaultCategoricalThreshold);

// Drops rows with a missing cell and merges labels that differ only in case
// (the lexicographically smallest spelling wins).
RawTable Sanitize(const RawTable& table, const Schema& schema);

enum class Task { kClassification, kRegression, kUnsupervised };

std::string_view TaskName(Task task);
std::optional<Task> ParseTask(std::string_view name);

// Where an encoded feature came from; the preprocessing policy scales
// continuous features and leaves indicator columns alone.
struct FeatureOrigin {
  std::string column;
  ColumnKind kind = ColumnKind::kContinuous;
};

struct NumericMatrix {
  Matrix values;
  std::vector<std::string> feature_names;
  std::vector<FeatureOrigin> origins;

  std::size_t num_features() const { return feature_names.size(); }
};

class LabelMap {
 public:
  LabelMap() = default;
  // Classification labels: classes are sorted (numerically when every label
  // is numeric) and `values` become class indices.
  static LabelMap ForClasses(std::string target, const std::vector<std::string>& values);
  static LabelMap ForRegression(std::string target, Vector values);

  const std::string& target_name() const { return target_name_; }
  bool is_classification() const { return classification_; }
  const std::vector<std::string>& classes() const { return classes_; }
  const Vector& encoded() const { return encoded_; }
  std::size_t num_classes() const { return classes_.size(); }

  int encode(std::string_view label) const;
  const std::string& decode(int index) const;

 private:
  std::string target_name_;
  bool classification_ = false;
  std::vector<std::string> classes_;
  Vector encoded_;
};

struct EncodedData {
  NumericMatrix features;
  std::optional<LabelMap> labels;
};

// Builds the numeric design matrix. Continuous columns pass through, binary
// columns map to {0, 1} by sorted label order, categorical columns expand to
// "col=value" indicators. `inputs` defaults to every non-target column.
EncodedData Encode(const RawTable& table, const Schema& schema,
                   const std::optional<std::string>& target, Task task,
                   const std::vector<std::string>& inputs = {});

// Sorted distinct labels of a column: numeric order when all parse as numbers.
std::vector<std::string> SortedLabels(const std::vector<std::string>& values);

}  // namespace tabml::data

#endif  // TABML_DATA_SCHEMA_HPP_
