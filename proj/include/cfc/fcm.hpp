// Fuzzy c-means over mixed-type data: the weighted heterogeneous distance,
// membership and centroid updates, the clustering objective, and the
// alternating-optimization fit loop.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cfc/dataset.hpp"
#include "cfc/infogain.hpp"

namespace cfc {

/// Convergence test applied between iterations.
enum class FcmConvergence {
    MembershipDelta, ///< max |w_ij(t) - w_ij(t-1)| < tolerance
    ObjectiveDelta,  ///< |f(t) - f(t-1)| < tolerance
};

struct FcmConfig {
    std::size_t k = 2;
    double alpha = 3.0;
    double tolerance = 1e-6;
    std::size_t max_iterations = 300;
    std::uint64_t seed = 0;
    FcmConvergence convergence = FcmConvergence::MembershipDelta;

    /// Throws ConfigError on out-of-range values. k >= 1 (the cfc trainer
    /// restricts candidates to k >= 2; a single cluster is still a valid
    /// clustering with all memberships forced to 1).
    void validate() const;
};

/// n x k row-stochastic matrix of membership weights.
class MembershipMatrix {
public:
    MembershipMatrix() = default;
    MembershipMatrix(std::size_t n, std::size_t k) : n_(n), k_(k), data_(n * k, 0.0) {}

    std::size_t rows() const { return n_; }
    std::size_t clusters() const { return k_; }

    double at(std::size_t i, std::size_t j) const { return data_[i * k_ + j]; }
    double& at(std::size_t i, std::size_t j) { return data_[i * k_ + j]; }

    double row_sum(std::size_t i) const;
    const std::vector<double>& data() const { return data_; }

private:
    std::size_t n_ = 0;
    std::size_t k_ = 0;
    std::vector<double> data_;
};

/// k centroids over a mixed-type schema. Continuous components live in the
/// normalized [0, 1] space; ordinal components are mean ranks in [0, t-1];
/// symbolic components carry a weight per observed category plus the argmax
/// (representative) category the distance compares against.
class CentroidSet {
public:
    struct Component {
        bool missing = true;                  ///< no information observed
        double value = 0.0;                   ///< continuous value or ordinal mean rank
        std::vector<double> category_weights; ///< symbolic: sums to 1, vocab order
        std::string representative;           ///< symbolic: argmax category token
    };

    CentroidSet() = default;
    CentroidSet(FeatureSchema schema, std::size_t k,
                std::vector<std::vector<std::string>> vocabularies);

    std::size_t cluster_count() const { return k_; }
    const FeatureSchema& schema() const { return schema_; }

    const Component& at(std::size_t j, std::size_t q) const { return components_[j * m() + q]; }
    Component& at(std::size_t j, std::size_t q) { return components_[j * m() + q]; }

    /// Sorted category tokens of symbolic feature q (empty for other kinds).
    const std::vector<std::string>& vocabulary(std::size_t q) const { return vocabularies_[q]; }

private:
    std::size_t m() const { return schema_.size(); }

    FeatureSchema schema_;
    std::size_t k_ = 0;
    std::vector<std::vector<std::string>> vocabularies_;
    std::vector<Component> components_;
};

struct FcmResult {
    MembershipMatrix memberships;
    CentroidSet centroids;
    std::size_t iterations = 0;
    bool converged = false;
    /// Objective value after each iteration's membership update.
    std::vector<double> objective_trace;
};

/// Per-feature distance d_q: 1 when either side is missing; category mismatch
/// against the representative for symbolic; |x - v| for continuous;
/// |rank(x) - v| / (t - 1) for ordinal.
double feature_distance(const Cell& x, const CentroidSet::Component& v, const FeatureSpec& feature);

/// d(x, v_j)^2 = sum_q G_q * d_q(x_q, v_jq)^2.
double distance_squared(const std::vector<Cell>& row, const CentroidSet& centroids,
                        std::size_t j, const FeatureWeights& weights);

/// Membership weights of one (normalized) instance against every centroid:
/// w_j = (1/d_j^2)^(1/(alpha-1)) normalized over clusters. An instance at
/// zero distance from one or more centroids splits its mass uniformly over
/// those clusters.
std::vector<double> membership_row(const std::vector<Cell>& row, const CentroidSet& centroids,
                                   double alpha, const FeatureWeights& weights);

/// membership_row applied to every instance.
MembershipMatrix update_memberships(const Dataset& normalized, const CentroidSet& centroids,
                                    const FcmConfig& config, const FeatureWeights& weights);

/// Centroids as (w^alpha)-weighted means; missing cells are excluded from the
/// sums. Symbolic components become weighted category frequencies with the
/// argmax as representative. Throws DegenerateClusterError when a cluster has
/// no membership mass.
CentroidSet update_centroids(const Dataset& normalized, const MembershipMatrix& memberships,
                             const FcmConfig& config);

/// sum_j sum_i w_ij^alpha * d(x_i, v_j)^2.
double objective(const Dataset& normalized, const MembershipMatrix& memberships,
                 const CentroidSet& centroids, const FcmConfig& config,
                 const FeatureWeights& weights);

/// Alternating optimization from a seeded initialization (k distinct rows as
/// initial centroids) until the convergence test passes or max_iterations is
/// reached. The final membership update always runs after the final centroid
/// update, so recomputing memberships from the returned centroids reproduces
/// the returned matrix.
FcmResult fit(const Dataset& normalized, const FcmConfig& config, const FeatureWeights& weights);

} // namespace cfc
