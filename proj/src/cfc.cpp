#include "cfc/cfc.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <set>
#include <thread>

#include "cfc/detail/rng.hpp"
#include "cfc/error.hpp"

namespace cfc {

namespace {

/// Arity and kind checks for rows handed in programmatically; ordinal tokens
/// outside the declared order degrade to missing like they do at parse time.
std::vector<Cell> coerce_row(const std::vector<Cell>& row, const FeatureSchema& schema) {
    if (row.size() != schema.size())
        throw DataError("instance has " + std::to_string(row.size()) + " features, schema has " +
                        std::to_string(schema.size()));
    std::vector<Cell> out = row;
    for (std::size_t q = 0; q < schema.size(); ++q) {
        const FeatureSpec& feature = schema.at(q);
        const Cell& cell = out[q];
        if (cell.is_missing()) continue;
        if (feature.kind == FeatureKind::Continuous) {
            if (!cell.is_number())
                throw DataError("feature '" + feature.name + "' expects a number");
        } else {
            if (!cell.is_category())
                throw DataError("feature '" + feature.name + "' expects a category");
            if (feature.kind == FeatureKind::Ordinal && !feature.ordinal_rank(cell.category()))
                out[q] = Cell::missing();
        }
    }
    return out;
}

struct CandidateFeatures {
    CentroidSet centroids;
    MembershipMatrix memberships;
    FeatureSubset subset;
    Dataset manipulated;
};

/// Cluster, build the cluster-feature block, optionally select features, and
/// assemble the manipulated training set for one candidate k.
CandidateFeatures build_candidate_features(const Dataset& d, const Dataset& normalized,
                                           const FeatureWeights& weights, const CfcConfig& cfg,
                                           std::size_t k, std::uint64_t base_seed) {
    FcmConfig fcm = cfg.fcm;
    fcm.k = k;
    fcm.seed = base_seed;
    auto clustering = fit(normalized, fcm, weights);
    auto block = build_cluster_features(clustering.memberships);

    CandidateFeatures out;
    out.centroids = std::move(clustering.centroids);
    out.memberships = std::move(clustering.memberships);
    if (cfg.mode == ManipulationMode::T3) {
        auto extended = manipulate(d, block, ManipulationMode::T2);
        CorrelationCache cache(extended, cfg.bins);
        GeneticSearchConfig search = cfg.selection;
        search.seed = detail::derive_seed(base_seed, "ga", k);
        out.subset = genetic_search(cache, search);
        out.manipulated = manipulate(d, block, ManipulationMode::T3, &out.subset);
    } else {
        out.manipulated = manipulate(d, block, cfg.mode);
    }
    return out;
}

CfcModel assemble_model(const Dataset& d, const CfcConfig& cfg,
                        const NormalizationParams& normalization, const FeatureWeights& weights,
                        const CandidateResult& winner) {
    CfcModel model;
    model.schema = d.schema();
    model.normalization = normalization;
    model.weights = weights;
    model.fcm = cfg.fcm;
    model.fcm.k = winner.k;
    model.fcm.seed = cfg.seed;
    model.k = winner.k;
    model.mode = cfg.mode;
    model.subset = winner.subset;
    model.centroids = winner.centroids;
    model.classifier =
        Classifier(winner.classifier.schema(), winner.classifier.classes(),
                   winner.classifier.class_totals(), clone_tree(winner.classifier.root()));
    return model;
}

/// Score one candidate by re-running the whole pipeline (normalization,
/// weights, clustering, selection, induction) inside every training fold.
CrossValidation strict_cross_validation(const Dataset& d, const CfcConfig& cfg, std::size_t k,
                                        std::span<const std::string> strata,
                                        std::uint64_t cv_seed) {
    std::vector<std::string> fallback;
    if (strata.empty()) {
        fallback = d.labels();
        strata = fallback;
    }
    auto folds = stratified_folds(d.n(), strata, cfg.folds, cv_seed);

    CrossValidation cv;
    for (std::size_t f = 0; f < folds.size(); ++f) {
        std::vector<std::vector<Cell>> rows;
        std::vector<std::string> labels;
        for (std::size_t idx : folds[f].train) {
            rows.push_back(d.row(idx));
            labels.push_back(d.label(idx));
        }
        Dataset train_d(d.schema(), std::move(rows), std::move(labels));

        auto normalization = fit_normalization(train_d);
        auto normalized = apply_normalization(train_d, normalization);
        auto weights = compute_feature_weights(normalized, cfg.bins);
        auto features = build_candidate_features(train_d, normalized, weights, cfg, k,
                                                 detail::derive_seed(cv_seed, "fold", f));

        CfcModel fold_model;
        fold_model.schema = d.schema();
        fold_model.normalization = normalization;
        fold_model.weights = weights;
        fold_model.fcm = cfg.fcm;
        fold_model.fcm.k = k;
        fold_model.k = k;
        fold_model.mode = cfg.mode;
        fold_model.subset = features.subset;
        fold_model.centroids = std::move(features.centroids);
        fold_model.classifier = induce(features.manipulated, cfg.inducer);

        std::vector<std::vector<Cell>> test_rows;
        std::vector<std::string> truths;
        for (std::size_t idx : folds[f].test) {
            test_rows.push_back(d.row(idx));
            truths.push_back(d.label(idx));
        }
        auto predictions = predict_batch(fold_model, test_rows);
        std::vector<std::string> labels_out;
        labels_out.reserve(predictions.size());
        for (const auto& p : predictions) labels_out.push_back(p.label);
        cv.folds.push_back(evaluate(labels_out, truths, d.classes()));
        cv.mean_accuracy += cv.folds.back().accuracy;
    }
    cv.mean_accuracy /= static_cast<double>(cv.folds.size());
    return cv;
}

CandidateResult run_candidate(const Dataset& d, const Dataset& normalized,
                              const FeatureWeights& weights, const CfcConfig& cfg, std::size_t k,
                              std::span<const std::string> strata) {
    auto features = build_candidate_features(d, normalized, weights, cfg, k, cfg.seed);

    CandidateResult result;
    result.k = k;
    result.subset = std::move(features.subset);
    result.centroids = std::move(features.centroids);
    result.classifier = induce(features.manipulated, cfg.inducer);

    std::uint64_t cv_seed = detail::derive_seed(cfg.seed, "cv", k);
    result.cv = cfg.refit_per_fold
                    ? strict_cross_validation(d, cfg, k, strata, cv_seed)
                    : cross_validate(features.manipulated, cfg.inducer, cfg.folds, strata,
                                     cv_seed);
    result.cv_accuracy = result.cv.mean_accuracy;
    return result;
}

} // namespace

void CfcConfig::validate() const {
    if (candidates.empty()) throw ConfigError("the candidate cluster-count set is empty");
    for (std::size_t k : candidates)
        if (k < 2) throw ConfigError("every candidate cluster count must be at least 2");
    if (folds < 2) throw ConfigError("cross-validation needs at least 2 folds");
    if (bins < 2) throw ConfigError("info-gain discretization needs at least 2 bins");
    inducer.validate();
    FcmConfig fcm_probe = fcm;
    fcm_probe.k = 2;
    fcm_probe.validate();
    selection.validate();
}

FeatureSchema CfcModel::classifier_schema() const {
    return manipulated_schema(schema, k, mode,
                              mode == ManipulationMode::T3 ? &subset : nullptr);
}

TrainResult train(const Dataset& d, const CfcConfig& cfg, std::span<const std::string> strata) {
    cfg.validate();
    if (d.n() == 0) throw DataError("cannot train on an empty dataset");
    if (!strata.empty() && strata.size() != d.n())
        throw DataError("stratum tags do not cover the dataset");

    std::vector<std::size_t> ks(cfg.candidates);
    std::sort(ks.begin(), ks.end());
    ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
    if (ks.back() > d.n())
        throw ConfigError("candidate cluster count " + std::to_string(ks.back()) +
                          " exceeds the " + std::to_string(d.n()) + " training instances");

    auto normalization = fit_normalization(d);
    auto normalized = apply_normalization(d, normalization);
    auto weights = compute_feature_weights(normalized, cfg.bins);

    std::vector<CandidateResult> candidates(ks.size());
    std::size_t thread_cap = cfg.threads == 0
                                 ? std::max<std::size_t>(1, std::thread::hardware_concurrency())
                                 : cfg.threads;
    std::size_t workers = std::min(thread_cap, ks.size());

    if (workers <= 1) {
        for (std::size_t i = 0; i < ks.size(); ++i)
            candidates[i] = run_candidate(d, normalized, weights, cfg, ks[i], strata);
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr first_error;
        std::mutex error_mutex;
        auto work = [&] {
            while (true) {
                std::size_t i = next.fetch_add(1);
                if (i >= ks.size()) return;
                try {
                    candidates[i] = run_candidate(d, normalized, weights, cfg, ks[i], strata);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        };
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(work);
        for (auto& thread : pool) thread.join();
        if (first_error) std::rethrow_exception(first_error);
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i < candidates.size(); ++i)
        if (candidates[i].cv_accuracy > candidates[best].cv_accuracy) best = i;

    TrainResult result;
    result.model = assemble_model(d, cfg, normalization, weights, candidates[best]);
    result.candidates = std::move(candidates);
    return result;
}

std::vector<Prediction> predict_batch(const CfcModel& model,
                                      const std::vector<std::vector<Cell>>& rows) {
    if (model.k == 0 || model.classifier.empty())
        throw DataError("the model has not been trained");

    std::vector<std::vector<Cell>> coerced;
    coerced.reserve(rows.size());
    for (const auto& row : rows) coerced.push_back(coerce_row(row, model.schema));

    MembershipMatrix memberships(coerced.size(), model.k);
    for (std::size_t i = 0; i < coerced.size(); ++i) {
        auto normalized = apply_normalization_row(coerced[i], model.schema, model.normalization);
        auto w = membership_row(normalized, model.centroids, model.fcm.alpha, model.weights);
        for (std::size_t j = 0; j < model.k; ++j) memberships.at(i, j) = w[j];
    }
    auto block = build_cluster_features(memberships);

    Dataset assembled(model.schema, std::move(coerced),
                      std::vector<std::string>(rows.size(), "?"));
    auto manipulated =
        manipulate(assembled, block, model.mode,
                   model.mode == ManipulationMode::T3 ? &model.subset : nullptr);

    std::vector<Prediction> out;
    out.reserve(rows.size());
    for (std::size_t i = 0; i < manipulated.n(); ++i) {
        auto outcome = model.classifier.classify(manipulated.row(i));
        Prediction p;
        p.label = std::move(outcome.label);
        p.probabilities = std::move(outcome.probabilities);
        p.z = block.z[i];
        p.b = block.b[i];
        p.memberships.resize(model.k);
        for (std::size_t j = 0; j < model.k; ++j) p.memberships[j] = block.p.at(i, j);
        out.push_back(std::move(p));
    }
    return out;
}

Prediction predict(const CfcModel& model, const std::vector<Cell>& row) {
    return predict_batch(model, {row})[0];
}

} // namespace cfc
