#include "tabml/explain/model_function.hpp"

#include <algorithm>

namespace tabml::explain {

ModelFunction OutputOf(models::ModelPtr model, std::size_t class_index) {
  if (!model->is_classifier()) {
    return [model](const Matrix& x) { return model->predict(x); };
  }
  return [model, class_index](const Matrix& x) { return model->predict_proba(x).column(class_index); };
}

ProbaFunction ProbaOf(models::ModelPtr model) {
  return [model](const Matrix& x) { return model->predict_proba(x); };
}

std::size_t DefaultExplainedClass(const models::FittedModel& model,
                                  std::span<const double> instance) {
  if (!model.is_classifier()) return 0;
  if (model.num_classes() == 2) return 1;
  Matrix row(1, instance.size());
  std::copy(instance.begin(), instance.end(), row.row(0).begin());
  return static_cast<std::size_t>(model.predict(row)[0]);
}

}  // namespace tabml::explain
