#ifndef TABML_PIPELINE_SPLIT_HPP_
#define TABML_PIPELINE_SPLIT_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace tabml::pipeline {

struct SplitSpec {
  double test_fraction = 0.25;
  bool stratified = true;
  std::uint64_t seed = 0;
};

struct Split {
  std::vector<std::size_t> train;  // ascending row indices
  std::vector<std::size_t> test;
  std::vector<std::string> warnings;
};

// Seeded shuffle split of n rows. With stratification `labels` holds class
// indices and every class contributes round(count * test_fraction) rows to the
// test side; a class with a single row stays in train (StratumTooSmall
// warning). Pass empty labels for a plain split.
Split TrainTestSplit(std::size_t n, std::span<const double> labels, const SplitSpec& spec);

// Fold index in [0, folds) per row. Stratified assignment deals every class
// round-robin, continuing where the previous class stopped, so per-class fold
// counts differ by at most one.
std::vector<std::size_t> FoldAssignment(std::size_t n, std::span<const double> labels,
                                        std::size_t folds, std::uint64_t seed);

}  // namespace tabml::pipeline

#endif  // TABML_PIPELINE_SPLIT_HPP_
