// Decision-tree induction (gain-ratio splits, fractional missing-value
// handling, pessimistic pruning), classification, stratified q-fold
// cross-validation, and TPR/FPR evaluation reports.

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cfc/dataset.hpp"

namespace cfc {

enum class InducerKind { DecisionTree };

struct InducerSpec {
    InducerKind kind = InducerKind::DecisionTree;
    /// Pruning confidence factor in (0, 0.5].
    double confidence = 0.2;
    /// Minimum training weight per leaf, >= 1.
    std::size_t min_leaf = 6;
    /// Set false to keep the grown tree as-is.
    bool prune = true;

    void validate() const;
};

struct TreeNode {
    enum class Kind { Leaf, Continuous, Symbolic };

    Kind kind = Kind::Leaf;
    /// Training weight per class (classifier class order) reaching this node.
    std::vector<double> class_weights;
    double total = 0.0;
    /// Majority class index (ties broken toward the globally larger class).
    std::size_t predicted = 0;

    std::size_t feature = 0;
    double threshold = 0.0;                  ///< Continuous: left is value <= threshold
    std::vector<std::string> branch_values;  ///< Symbolic: one branch per token
    std::vector<std::unique_ptr<TreeNode>> children;
};

class Classifier {
public:
    struct Outcome {
        std::string label;
        /// Probability per class, classifier class order; sums to 1.
        std::vector<double> probabilities;
    };

    Classifier() = default;
    Classifier(FeatureSchema schema, std::vector<std::string> classes,
               std::vector<double> class_totals, std::unique_ptr<TreeNode> root);

    const FeatureSchema& schema() const { return schema_; }
    std::uint64_t schema_fingerprint() const { return schema_.fingerprint(); }
    const std::vector<std::string>& classes() const { return classes_; }
    const std::vector<double>& class_totals() const { return class_totals_; }
    const TreeNode& root() const { return *root_; }
    bool empty() const { return root_ == nullptr; }
    std::size_t node_count() const;

    Outcome classify(const std::vector<Cell>& row) const;

private:
    FeatureSchema schema_;
    std::vector<std::string> classes_;
    std::vector<double> class_totals_;
    std::unique_ptr<TreeNode> root_;
};

/// Grow a tree on the dataset, then prune it pessimistically.
Classifier induce(const Dataset& d, const InducerSpec& spec);

std::unique_ptr<TreeNode> clone_tree(const TreeNode& node);

/// One cross-validation split: instance indices for training and testing.
struct FoldSplit {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

/// Shuffle each stratum with the seed, then deal round-robin into q folds
/// (the deal position carries across strata so folds stay balanced). Folds
/// partition {0..n-1}; per-stratum fold counts differ by at most one.
std::vector<FoldSplit> stratified_folds(std::size_t n, std::span<const std::string> strata,
                                        std::size_t q, std::uint64_t seed);

struct EvaluationReport {
    std::vector<std::string> classes;
    /// Instances of each class in the truth column.
    std::vector<std::size_t> support;
    /// confusion[t][p] = instances of true class t predicted as p.
    std::vector<std::vector<std::size_t>> confusion;
    /// Per-class rates; a class absent from the truth has no TPR, and a class
    /// covering the whole truth has no FPR.
    std::vector<std::optional<double>> tpr;
    std::vector<std::optional<double>> fpr;
    /// Support-weighted means over the classes whose rate is defined.
    double weighted_tpr = 0.0;
    double weighted_fpr = 0.0;
    double accuracy = 0.0;
    std::size_t total = 0;
};

EvaluationReport evaluate(std::span<const std::string> predictions,
                          std::span<const std::string> truth,
                          const std::vector<std::string>& classes);

struct CrossValidation {
    double mean_accuracy = 0.0;
    std::vector<EvaluationReport> folds;
};

/// Induce on each fold's training split, evaluate on its test split, and
/// average overall accuracy across folds (unweighted).
CrossValidation cross_validate(const Dataset& d, const InducerSpec& spec, std::size_t q,
                               std::span<const std::string> strata, std::uint64_t seed);

} // namespace cfc
