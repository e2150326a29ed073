// Entropy, equal-frequency discretization, information gain, and the
// per-feature weights used by the heterogeneous distance metric.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cfc/dataset.hpp"

namespace cfc {

/// One weight per schema feature (information gain of that feature for the
/// class), plus the bin count used to discretize continuous features.
struct FeatureWeights {
    std::vector<double> weights;
    std::size_t bins = 10;
};

inline constexpr std::size_t kDefaultInfoGainBins = 10;

/// Shannon entropy of a label multiset, in bits. Throws DataError on empty
/// input.
double entropy(std::span<const std::string> labels);

/// Category id per value under equal-frequency binning with boundaries at
/// the (i/bins)-quantiles. Missing values (nullopt) map to -1, a category of
/// their own. Duplicate or non-splitting boundaries collapse, so constant
/// columns land in bin 0.
std::vector<int> discretize(std::span<const std::optional<double>> values, std::size_t bins);

/// H(labels) - sum_v (n_v / n) * H(labels | feature = v), where v ranges over
/// the category ids in `feature` (missing id included).
double information_gain(std::span<const int> feature, std::span<const std::string> labels);

/// Information gain of every schema feature for the class labels, in schema
/// order. Continuous features are discretized first; symbolic and ordinal
/// features use their categories directly, with missing as its own category.
FeatureWeights compute_feature_weights(const Dataset& d, std::size_t bins = kDefaultInfoGainBins);

/// Category ids for any dataset column: continuous columns are discretized,
/// categorical columns get ids by sorted token order, missing is -1. Also the
/// representation the feature-subset selector correlates on.
std::vector<int> categorize_column(const Dataset& d, std::size_t q, std::size_t bins);

} // namespace cfc
