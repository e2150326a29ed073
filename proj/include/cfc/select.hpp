// Correlation-based feature-subset selection: symmetrical uncertainty, the
// CFS merit function, and a genetic search over feature bitstrings (plus a
// greedy forward fallback).

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cfc/dataset.hpp"

namespace cfc {

struct FeatureSubset {
    /// Selected feature names, in source-schema order.
    std::vector<std::string> names;
    double merit = 0.0;

    bool operator==(const FeatureSubset&) const = default;
};

struct GeneticSearchConfig {
    std::size_t population = 20;
    std::size_t generations = 20;
    double crossover = 0.6;
    double mutation = 0.033;
    std::uint64_t seed = 0;

    void validate() const;
};

/// SU(a, b) = 2 * I(a; b) / (H(a) + H(b)) in [0, 1]; 0 when both columns are
/// constant. Columns are category ids (missing = -1 is a category).
double symmetrical_uncertainty(std::span<const int> a, std::span<const int> b);

/// All pairwise SU values over a dataset's features and its class column,
/// computed once up front (continuous columns are discretized first).
class CorrelationCache {
public:
    CorrelationCache(const Dataset& d, std::size_t bins);

    std::size_t feature_count() const { return names_.size(); }
    const std::vector<std::string>& feature_names() const { return names_; }
    double feature_class(std::size_t q) const { return class_su_[q]; }
    double feature_feature(std::size_t a, std::size_t b) const;

private:
    std::vector<std::string> names_;
    std::vector<double> class_su_;
    std::vector<double> pair_su_;
};

/// Hall's merit: s * mean(feature-class SU) / sqrt(s + s(s-1) * mean
/// (feature-feature SU)), over the subset given as feature indices.
double cfs_merit(std::span<const std::size_t> subset, const CorrelationCache& cache);

/// Bitstring GA maximizing cfs_merit: tournament selection (size 2),
/// single-point crossover, per-bit mutation, elitist, singleton seeding.
/// Returns the best subset ever evaluated; deterministic given cfg.seed.
FeatureSubset genetic_search(const CorrelationCache& cache, const GeneticSearchConfig& cfg);

/// Deterministic forward selection: grow the subset by the merit-maximizing
/// feature until no addition improves.
FeatureSubset greedy_forward_search(const CorrelationCache& cache);

} // namespace cfc
