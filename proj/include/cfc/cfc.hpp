// The cluster-feature classification trainer: clusters the normalized data
// for every candidate cluster count, augments the training set with cluster
// features, induces and cross-validates a classifier per candidate, and keeps
// the best one together with everything prediction needs.

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cfc/augment.hpp"
#include "cfc/dataset.hpp"
#include "cfc/fcm.hpp"
#include "cfc/inducer.hpp"
#include "cfc/infogain.hpp"
#include "cfc/select.hpp"

namespace cfc {

struct CfcConfig {
    /// Candidate cluster counts; each must satisfy 2 <= k <= n.
    std::vector<std::size_t> candidates = {2, 3, 4, 5};
    ManipulationMode mode = ManipulationMode::T1;
    /// Cross-validation folds used to score candidates.
    std::size_t folds = 10;
    InducerSpec inducer;
    /// Clustering parameters; the k and seed fields are set per candidate.
    FcmConfig fcm;
    /// Subset search parameters, used only for the selection mode.
    GeneticSearchConfig selection;
    /// Equal-frequency bins behind the info-gain feature weights.
    std::size_t bins = kDefaultInfoGainBins;
    std::uint64_t seed = 0;
    /// Score candidates by re-clustering (and re-selecting) inside every
    /// training fold instead of reusing the full-data cluster features. Slower
    /// and statistically cleaner; the returned model is unaffected.
    bool refit_per_fold = false;
    /// Worker threads for the candidate loop; 0 means one per candidate up to
    /// the hardware concurrency.
    std::size_t threads = 1;

    void validate() const;
};

/// One scored candidate from the training loop.
struct CandidateResult {
    std::size_t k = 0;
    double cv_accuracy = 0.0;
    CrossValidation cv;
    Classifier classifier;
    CentroidSet centroids;
    /// Meaningful only in selection mode.
    FeatureSubset subset;
};

/// Everything the operation phase needs, keyed to the original schema.
struct CfcModel {
    FeatureSchema schema;
    NormalizationParams normalization;
    FeatureWeights weights;
    /// Clustering parameters of the winning candidate (k set to the winner).
    FcmConfig fcm;
    std::size_t k = 0;
    ManipulationMode mode = ManipulationMode::T1;
    /// Meaningful only in selection mode.
    FeatureSubset subset;
    CentroidSet centroids;
    Classifier classifier;

    /// Schema the embedded classifier was trained on.
    FeatureSchema classifier_schema() const;
};

struct Prediction {
    std::string label;
    /// Per class, in the classifier's class order.
    std::vector<double> probabilities;
    /// 1-based argmax cluster.
    std::size_t z = 0;
    /// Max membership.
    double b = 0.0;
    /// Memberships against the stored centroids; sums to 1.
    std::vector<double> memberships;
};

struct TrainResult {
    CfcModel model;
    /// Every scored candidate, in ascending k order.
    std::vector<CandidateResult> candidates;
};

/// Run the full training loop. `strata` optionally gives per-instance group
/// tags for stratified cross-validation (labels are used when empty).
TrainResult train(const Dataset& d, const CfcConfig& cfg,
                  std::span<const std::string> strata = {});

/// Cluster-feature and classify one instance given in the original schema.
Prediction predict(const CfcModel& model, const std::vector<Cell>& row);

/// predict for every row, computing the manipulated layout once.
std::vector<Prediction> predict_batch(const CfcModel& model,
                                      const std::vector<std::vector<Cell>>& rows);

} // namespace cfc
