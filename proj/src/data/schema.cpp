#include "tabml/data/schema.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>

#include "tabml/core/error.hpp"

namespace tabml::data {

std::string_view ColumnKindName(ColumnKind kind) {
  switch (kind) {
    case ColumnKind::kContinuous: return "continuous";
    case ColumnKind::kBinary: return "binary";
    case ColumnKind::kCategorical: return "categorical";
  }
  return "categorical";
}

std::string_view TaskName(Task task) {
  switch (task) {
    case Task::kClassification: return "classification";
    case Task::kRegression: return "regression";
    case Task::kUnsupervised: return "unsupervised";
  }
  return "unsupervised";
}

std::optional<Task> ParseTask(std::string_view name) {
  if (name == "classification") return Task::kClassification;
  if (name == "regression") return Task::kRegression;
  if (name == "unsupervised" || name == "clustering") return Task::kUnsupervised;
  return std::nullopt;
}

const ColumnSchema* Schema::find(std::string_view name) const {
  for (const auto& c : columns) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

nlohmann::json ToJson(const Schema& schema) {
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& c : schema.columns) {
    cols.push_back({{"name", c.name},
                    {"kind", ColumnKindName(c.kind)},
                    {"missing_count", c.missing_count},
                    {"distinct_count", c.distinct_count},
                    {"numeric", c.numeric}});
  }
  return {{"columns", cols}};
}

Schema InferSchema(const RawTable& table, std::size_t categorical_threshold) {
  Require(table.num_cols() > 0 && table.num_rows() > 0, ErrorCode::kEmptyTable,
          "cannot infer a schema for an empty table");
  Schema schema;
  for (std::size_t c = 0; c < table.num_cols(); ++c) {
    ColumnSchema col;
    col.name = table.column_names[c];
    std::set<double> numbers;
    std::set<std::string> labels;
    bool numeric = true;
    for (const auto& row : table.rows) {
      const Cell& cell = row[c];
      if (!cell) {
        ++col.missing_count;
        continue;
      }
      labels.insert(ToLower(Trim(*cell)));
      if (numeric) {
        if (auto v = ParseNumber(*cell)) {
          numbers.insert(*v);
        } else {
          numeric = false;
        }
      }
    }
    const bool any_value = col.missing_count < table.num_rows();
    col.numeric = numeric && any_value;
    col.distinct_count = col.numeric ? numbers.size() : labels.size();
    if (col.numeric && col.distinct_count > categorical_threshold) {
      col.kind = ColumnKind::kContinuous;
    } else if (col.distinct_count == 2) {
      col.kind = ColumnKind::kBinary;
    } else {
      col.kind = ColumnKind::kCategorical;
    }
    schema.columns.push_back(std::move(col));
  }
  return schema;
}

RawTable Sanitize(const RawTable& table, const Schema& schema) {
  Require(schema.columns.size() == table.num_cols(), ErrorCode::kDimensionMismatch,
          "schema does not match table");
  RawTable out;
  out.source_path = table.source_path;
  out.column_names = table.column_names;
  for (const auto& row : table.rows) {
    if (std::all_of(row.begin(), row.end(), [](const Cell& c) { return c.has_value(); })) {
      std::vector<Cell> trimmed;
      trimmed.reserve(row.size());
      for (const auto& c : row) trimmed.emplace_back(Trim(*c));
      out.rows.push_back(std::move(trimmed));
    }
  }
  Require(!out.rows.empty(), ErrorCode::kAllRowsDropped,
          "every row contains a missing value");

  for (std::size_t c = 0; c < out.num_cols(); ++c) {
    if (schema.columns[c].kind == ColumnKind::kContinuous) continue;
    std::map<std::string, std::string> canonical;
    for (const auto& row : out.rows) {
      const std::string& v = *row[c];
      auto [it, inserted] = canonical.emplace(ToLower(v), v);
      if (!inserted && v < it->second) it->second = v;
    }
    for (auto& row : out.rows) row[c] = canonical.at(ToLower(*row[c]));
  }
  return out;
}

std::vector<std::string> SortedLabels(const std::vector<std::string>& values) {
  std::vector<std::string> distinct(values.begin(), values.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  const bool numeric = std::all_of(distinct.begin(), distinct.end(),
                                   [](const std::string& s) { return ParseNumber(s).has_value(); });
  if (numeric) {
    std::stable_sort(distinct.begin(), distinct.end(), [](const std::string& a, const std::string& b) {
      return *ParseNumber(a) < *ParseNumber(b);
    });
  }
  return distinct;
}

LabelMap LabelMap::ForClasses(std::string target, const std::vector<std::string>& values) {
  LabelMap m;
  m.target_name_ = std::move(target);
  m.classification_ = true;
  m.classes_ = SortedLabels(values);
  m.encoded_.reserve(values.size());
  for (const auto& v : values) m.encoded_.push_back(m.encode(v));
  return m;
}

LabelMap LabelMap::ForRegression(std::string target, Vector values) {
  LabelMap m;
  m.target_name_ = std::move(target);
  m.classification_ = false;
  m.encoded_ = std::move(values);
  return m;
}

int LabelMap::encode(std::string_view label) const {
  auto it = std::find(classes_.begin(), classes_.end(), label);
  Require(it != classes_.end(), ErrorCode::kNotFound,
          "unknown label '" + std::string(label) + "'");
  return static_cast<int>(it - classes_.begin());
}

const std::string& LabelMap::decode(int index) const {
  Require(index >= 0 && static_cast<std::size_t>(index) < classes_.size(),
          ErrorCode::kNotFound, "class index out of range");
  return classes_[static_cast<std::size_t>(index)];
}

namespace {

std::vector<std::string> ColumnValues(const RawTable& table, std::size_t c) {
  std::vector<std::string> values;
  values.reserve(table.num_rows());
  for (const auto& row : table.rows) {
    Require(row[c].has_value(), ErrorCode::kMalformedInput,
            "column '" + table.column_names[c] + "' has missing values; sanitize first");
    values.push_back(*row[c]);
  }
  return values;
}

}  // namespace

EncodedData Encode(const RawTable& table, const Schema& schema,
                   const std::optional<std::string>& target, Task task,
                   const std::vector<std::string>& inputs) {
  Require(schema.columns.size() == table.num_cols(), ErrorCode::kDimensionMismatch,
          "schema does not match table");
  EncodedData out;
  std::optional<std::size_t> target_index;
  if (task != Task::kUnsupervised) {
    Require(target.has_value(), ErrorCode::kTargetNotFound, "supervised task needs a target");
    target_index = table.column_index(*target);
    Require(target_index.has_value(), ErrorCode::kTargetNotFound,
            "target column '" + *target + "' not found");
    const ColumnKind kind = schema.columns[*target_index].kind;
    if (task == Task::kClassification) {
      Require(kind != ColumnKind::kContinuous, ErrorCode::kTaskKindMismatch,
              "classification needs a binary or categorical target; '" + *target +
                  "' is continuous");
      out.labels = LabelMap::ForClasses(*target, ColumnValues(table, *target_index));
    } else {
      Require(kind == ColumnKind::kContinuous, ErrorCode::kTaskKindMismatch,
              "regression needs a continuous target; '" + *target + "' is " +
                  std::string(ColumnKindName(kind)));
      Vector y;
      for (const auto& v : ColumnValues(table, *target_index)) y.push_back(*ParseNumber(v));
      out.labels = LabelMap::ForRegression(*target, std::move(y));
    }
  }

  std::vector<std::size_t> input_cols;
  if (inputs.empty()) {
    for (std::size_t c = 0; c < table.num_cols(); ++c) {
      if (!target_index || c != *target_index) input_cols.push_back(c);
    }
  } else {
    for (const auto& name : inputs) {
      auto c = table.column_index(name);
      Require(c.has_value(), ErrorCode::kTargetNotFound, "input column '" + name + "' not found");
      Require(!target_index || *c != *target_index, ErrorCode::kInvalidConfig,
              "target '" + name + "' cannot also be an input");
      input_cols.push_back(*c);
    }
  }
  Require(!input_cols.empty(), ErrorCode::kEmptyMatrix, "no input columns to encode");

  const std::size_t n = table.num_rows();
  std::vector<Vector> columns;
  auto& features = out.features;
  for (std::size_t c : input_cols) {
    const ColumnSchema& cs = schema.columns[c];
    const auto values = ColumnValues(table, c);
    switch (cs.kind) {
      case ColumnKind::kContinuous: {
        Vector col(n);
        for (std::size_t r = 0; r < n; ++r) {
          auto v = ParseNumber(values[r]);
          Require(v.has_value(), ErrorCode::kMalformedInput,
                  "non-numeric value '" + values[r] + "' in continuous column '" + cs.name + "'");
          col[r] = *v;
        }
        columns.push_back(std::move(col));
        features.feature_names.push_back(cs.name);
        features.origins.push_back({cs.name, cs.kind});
        break;
      }
      case ColumnKind::kBinary: {
        const auto labels = SortedLabels(values);
        Vector col(n);
        for (std::size_t r = 0; r < n; ++r) col[r] = values[r] == labels.back() && labels.size() > 1 ? 1.0 : 0.0;
        columns.push_back(std::move(col));
        features.feature_names.push_back(cs.name);
        features.origins.push_back({cs.name, cs.kind});
        break;
      }
      case ColumnKind::kCategorical: {
        const auto labels = SortedLabels(values);
        for (const auto& label : labels) {
          Vector col(n);
          for (std::size_t r = 0; r < n; ++r) col[r] = values[r] == label ? 1.0 : 0.0;
          columns.push_back(std::move(col));
          features.feature_names.push_back(cs.name + "=" + label);
          features.origins.push_back({cs.name, cs.kind});
        }
        break;
      }
    }
  }
  features.values = Matrix(n, columns.size());
  for (std::size_t j = 0; j < columns.size(); ++j) features.values.set_column(j, columns[j]);
  return out;
}

}  // namespace tabml::data
