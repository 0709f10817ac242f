#include "tabml/pipeline/preprocessing.hpp"

#include <algorithm>

namespace tabml::pipeline {

std::string_view OversampleChoiceName(OversampleChoice choice) {
  switch (choice) {
    case OversampleChoice::kAuto:
      return "auto";
    case OversampleChoice::kNone:
      return "none";
    case OversampleChoice::kRandom:
      return "random";
    case OversampleChoice::kSmote:
      return "smote";
  }
  return "auto";
}

std::optional<OversampleChoice> ParseOversampleChoice(std::string_view name) {
  for (auto c : {OversampleChoice::kAuto, OversampleChoice::kNone, OversampleChoice::kRandom,
                 OversampleChoice::kSmote}) {
    if (OversampleChoiceName(c) == name) return c;
  }
  return std::nullopt;
}

Matrix FittedPreprocessing::Apply(const Matrix& x) const {
  return scaler ? preprocess::Transform(x, *scaler) : x;
}

nlohmann::json ToJson(const FittedPreprocessing& fitted) {
  return {{"scaler", fitted.scaler ? preprocess::ToJson(*fitted.scaler) : nlohmann::json(nullptr)},
          {"sampler", fitted.sampler ? preprocess::ToJson(*fitted.sampler) : nlohmann::json(nullptr)},
          {"notes", fitted.notes}};
}

PreparedTraining PrepareTraining(const PreprocessOptions& options, const Matrix& x,
                                 std::span<const double> y,
                                 std::span<const data::FeatureOrigin> origins, data::Task task,
                                 std::uint64_t seed) {
  PreparedTraining out;
  std::vector<std::size_t> continuous;
  for (std::size_t j = 0; j < origins.size(); ++j) {
    if (origins[j].kind == data::ColumnKind::kContinuous) continuous.push_back(j);
  }
  if (options.scaler && !continuous.empty()) {
    out.fitted.scaler = preprocess::FitScaler(x, *options.scaler, continuous);
    out.x = preprocess::Transform(x, *out.fitted.scaler);
  } else {
    out.x = x;
    if (options.scaler) out.fitted.notes.push_back("no continuous features to scale");
  }
  out.y.assign(y.begin(), y.end());
  if (task != data::Task::kClassification || options.oversample == OversampleChoice::kNone) {
    return out;
  }

  std::optional<preprocess::SamplerSpec> sampler;
  if (options.oversample == OversampleChoice::kAuto) {
    sampler = preprocess::AutoSampler(y, seed);
  } else {
    auto counts = preprocess::ClassCounts(y);
    counts.erase(std::remove(counts.begin(), counts.end(), 0), counts.end());
    const std::size_t minority = counts.empty() ? 0 : *std::min_element(counts.begin(), counts.end());
    if (options.oversample == OversampleChoice::kSmote && minority >= 2) {
      sampler = preprocess::SamplerSpec{preprocess::SamplerMethod::kSmote,
                                        std::min<std::size_t>(5, minority - 1), seed};
    } else {
      if (options.oversample == OversampleChoice::kSmote) {
        out.fitted.notes.push_back("smote needs two minority rows; random oversampling used");
      }
      sampler = preprocess::SamplerSpec{preprocess::SamplerMethod::kRandom, 0, seed};
    }
  }
  if (sampler) {
    auto resampled = preprocess::Oversample(out.x, out.y, *sampler);
    out.x = std::move(resampled.x);
    out.y = std::move(resampled.y);
    out.fitted.sampler = sampler;
  }
  return out;
}

}  // namespace tabml::pipeline
