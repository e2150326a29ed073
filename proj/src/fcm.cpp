#include "cfc/fcm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "cfc/detail/rng.hpp"
#include "cfc/error.hpp"

namespace cfc {

namespace {

std::vector<std::vector<std::string>> collect_vocabularies(const Dataset& d) {
    std::vector<std::vector<std::string>> vocabs(d.m());
    for (std::size_t q = 0; q < d.m(); ++q) {
        if (d.schema().at(q).kind != FeatureKind::Symbolic) continue;
        std::set<std::string> seen;
        for (const auto& row : d.rows())
            if (row[q].is_category()) seen.insert(row[q].category());
        vocabs[q].assign(seen.begin(), seen.end());
    }
    return vocabs;
}

std::size_t vocab_index(const std::vector<std::string>& vocab, const std::string& token) {
    auto it = std::lower_bound(vocab.begin(), vocab.end(), token);
    if (it == vocab.end() || *it != token)
        throw DataError("category '" + token + "' not in centroid vocabulary");
    return static_cast<std::size_t>(it - vocab.begin());
}

void fill_centroid_from_row(CentroidSet& centroids, std::size_t j, const std::vector<Cell>& row) {
    const FeatureSchema& schema = centroids.schema();
    for (std::size_t q = 0; q < schema.size(); ++q) {
        auto& c = centroids.at(j, q);
        const Cell& cell = row[q];
        c = CentroidSet::Component{};
        if (cell.is_missing()) continue;
        const FeatureSpec& f = schema.at(q);
        switch (f.kind) {
        case FeatureKind::Continuous:
            c.missing = false;
            c.value = cell.number();
            break;
        case FeatureKind::Ordinal: {
            auto rank = f.ordinal_rank(cell.category());
            if (!rank) continue;
            c.missing = false;
            c.value = static_cast<double>(*rank);
            break;
        }
        case FeatureKind::Symbolic: {
            const auto& vocab = centroids.vocabulary(q);
            c.missing = false;
            c.category_weights.assign(vocab.size(), 0.0);
            c.category_weights[vocab_index(vocab, cell.category())] = 1.0;
            c.representative = cell.category();
            break;
        }
        }
    }
}

CentroidSet compute_centroids(const Dataset& d, const MembershipMatrix& w, double alpha,
                              const std::vector<std::vector<std::string>>& vocabs) {
    const std::size_t n = d.n();
    const std::size_t m = d.m();
    const std::size_t k = w.clusters();

    std::vector<double> powed(n * k);
    std::vector<double> mass(k, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < k; ++j) {
            double p = std::pow(w.at(i, j), alpha);
            powed[i * k + j] = p;
            mass[j] += p;
        }
    for (std::size_t j = 0; j < k; ++j)
        if (mass[j] <= 0.0)
            throw DegenerateClusterError(j, "cluster " + std::to_string(j) +
                                                " has zero membership mass");

    CentroidSet centroids(d.schema(), k, vocabs);
    for (std::size_t j = 0; j < k; ++j) {
        for (std::size_t q = 0; q < m; ++q) {
            const FeatureSpec& f = d.schema().at(q);
            auto& c = centroids.at(j, q);
            c = CentroidSet::Component{};
            double total = 0.0;
            if (f.kind == FeatureKind::Symbolic) {
                const auto& vocab = centroids.vocabulary(q);
                std::vector<double> acc(vocab.size(), 0.0);
                for (std::size_t i = 0; i < n; ++i) {
                    const Cell& cell = d.row(i)[q];
                    if (!cell.is_category()) continue;
                    double p = powed[i * k + j];
                    acc[vocab_index(vocab, cell.category())] += p;
                    total += p;
                }
                if (total <= 0.0) continue;
                std::size_t best = 0;
                for (std::size_t v = 0; v < acc.size(); ++v) {
                    acc[v] /= total;
                    if (acc[v] > acc[best]) best = v;
                }
                c.missing = false;
                c.category_weights = std::move(acc);
                c.representative = vocab[best];
            } else {
                double sum = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const Cell& cell = d.row(i)[q];
                    double x;
                    if (f.kind == FeatureKind::Continuous) {
                        if (!cell.is_number()) continue;
                        x = cell.number();
                    } else {
                        if (!cell.is_category()) continue;
                        auto rank = f.ordinal_rank(cell.category());
                        if (!rank) continue;
                        x = static_cast<double>(*rank);
                    }
                    double p = powed[i * k + j];
                    sum += p * x;
                    total += p;
                }
                if (total <= 0.0) continue;
                c.missing = false;
                c.value = sum / total;
            }
        }
    }
    return centroids;
}

double min_distance_squared(const std::vector<Cell>& row, const CentroidSet& centroids,
                            const FeatureWeights& weights) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < centroids.cluster_count(); ++j)
        best = std::min(best, distance_squared(row, centroids, j, weights));
    return best;
}

} // namespace

void FcmConfig::validate() const {
    if (k < 1) throw ConfigError("cluster count must be at least 1");
    if (!(alpha > 1.0)) throw ConfigError("fuzzy degree alpha must exceed 1");
    if (!(tolerance > 0.0)) throw ConfigError("tolerance must be positive");
    if (max_iterations < 1) throw ConfigError("max_iterations must be at least 1");
}

double MembershipMatrix::row_sum(std::size_t i) const {
    double s = 0.0;
    for (std::size_t j = 0; j < k_; ++j) s += at(i, j);
    return s;
}

CentroidSet::CentroidSet(FeatureSchema schema, std::size_t k,
                         std::vector<std::vector<std::string>> vocabularies)
    : schema_(std::move(schema)), k_(k), vocabularies_(std::move(vocabularies)) {
    if (vocabularies_.size() != schema_.size())
        throw DataError("centroid vocabulary list does not match schema size");
    components_.resize(k_ * schema_.size());
}

double feature_distance(const Cell& x, const CentroidSet::Component& v,
                        const FeatureSpec& feature) {
    if (x.is_missing() || v.missing) return 1.0;
    switch (feature.kind) {
    case FeatureKind::Continuous:
        return std::abs(x.number() - v.value);
    case FeatureKind::Symbolic:
        return x.category() == v.representative ? 0.0 : 1.0;
    case FeatureKind::Ordinal: {
        auto rank = feature.ordinal_rank(x.category());
        if (!rank) return 1.0;
        double t = static_cast<double>(feature.categories.size());
        return std::abs(static_cast<double>(*rank) - v.value) / (t - 1.0);
    }
    }
    return 0.0;
}

double distance_squared(const std::vector<Cell>& row, const CentroidSet& centroids,
                        std::size_t j, const FeatureWeights& weights) {
    const FeatureSchema& schema = centroids.schema();
    if (weights.weights.size() != schema.size())
        throw DataError("feature weights do not match schema size");
    double sum = 0.0;
    for (std::size_t q = 0; q < schema.size(); ++q) {
        double d = feature_distance(row[q], centroids.at(j, q), schema.at(q));
        sum += weights.weights[q] * d * d;
    }
    return sum;
}

std::vector<double> membership_row(const std::vector<Cell>& row, const CentroidSet& centroids,
                                   double alpha, const FeatureWeights& weights) {
    const std::size_t k = centroids.cluster_count();
    const double exponent = 1.0 / (alpha - 1.0);
    std::vector<double> d2(k);
    std::size_t zeros = 0;
    for (std::size_t j = 0; j < k; ++j) {
        d2[j] = distance_squared(row, centroids, j, weights);
        if (d2[j] == 0.0) ++zeros;
    }
    std::vector<double> w(k);
    if (zeros > 0) {
        for (std::size_t j = 0; j < k; ++j)
            w[j] = d2[j] == 0.0 ? 1.0 / static_cast<double>(zeros) : 0.0;
        return w;
    }
    for (std::size_t j = 0; j < k; ++j) {
        double denom = 0.0;
        for (std::size_t q = 0; q < k; ++q) denom += std::pow(d2[j] / d2[q], exponent);
        w[j] = 1.0 / denom;
    }
    return w;
}

MembershipMatrix update_memberships(const Dataset& normalized, const CentroidSet& centroids,
                                    const FcmConfig& config, const FeatureWeights& weights) {
    config.validate();
    const std::size_t k = centroids.cluster_count();
    if (config.k != k)
        throw ConfigError("config cluster count does not match centroid set");

    MembershipMatrix w(normalized.n(), k);
    for (std::size_t i = 0; i < normalized.n(); ++i) {
        std::vector<double> row = membership_row(normalized.row(i), centroids, config.alpha, weights);
        for (std::size_t j = 0; j < k; ++j) w.at(i, j) = row[j];
    }
    return w;
}

CentroidSet update_centroids(const Dataset& normalized, const MembershipMatrix& memberships,
                             const FcmConfig& config) {
    config.validate();
    if (memberships.rows() != normalized.n())
        throw DataError("membership matrix row count does not match dataset");
    return compute_centroids(normalized, memberships, config.alpha,
                             collect_vocabularies(normalized));
}

double objective(const Dataset& normalized, const MembershipMatrix& memberships,
                 const CentroidSet& centroids, const FcmConfig& config,
                 const FeatureWeights& weights) {
    double f = 0.0;
    for (std::size_t i = 0; i < normalized.n(); ++i)
        for (std::size_t j = 0; j < centroids.cluster_count(); ++j)
            f += std::pow(memberships.at(i, j), config.alpha) *
                 distance_squared(normalized.row(i), centroids, j, weights);
    return f;
}

FcmResult fit(const Dataset& normalized, const FcmConfig& config, const FeatureWeights& weights) {
    config.validate();
    if (weights.weights.size() != normalized.m())
        throw DataError("feature weights do not match schema size");
    const std::size_t n = normalized.n();
    const std::size_t k = config.k;
    if (n < k)
        throw DataError("need at least " + std::to_string(k) + " instances to fit " +
                        std::to_string(k) + " clusters, got " + std::to_string(n));

    auto vocabs = collect_vocabularies(normalized);

    detail::SplitMix64 rng(detail::derive_seed(config.seed, "fcm", k));
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    detail::shuffle(order, rng);

    std::vector<std::size_t> seeds;
    for (std::size_t idx : order) {
        bool duplicate = false;
        for (std::size_t s : seeds)
            if (normalized.row(idx) == normalized.row(s)) {
                duplicate = true;
                break;
            }
        if (!duplicate) {
            seeds.push_back(idx);
            if (seeds.size() == k) break;
        }
    }
    if (seeds.size() < k)
        throw DataError("need at least " + std::to_string(k) +
                        " distinct instances to initialize " + std::to_string(k) + " clusters");

    CentroidSet centroids(normalized.schema(), k, vocabs);
    for (std::size_t j = 0; j < k; ++j)
        fill_centroid_from_row(centroids, j, normalized.row(seeds[j]));

    FcmResult result;
    MembershipMatrix w = update_memberships(normalized, centroids, config, weights);

    for (std::size_t iter = 0; iter < config.max_iterations; ++iter) {
        // A cluster can lose all its mass (the membership formula drives far
        // points to zero in the limit); reseed it from the point farthest
        // from every current centroid before recomputing centroids.
        std::vector<double> mass(k, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < k; ++j) mass[j] += std::pow(w.at(i, j), config.alpha);
        std::vector<bool> reseeded(n, false);
        for (std::size_t j = 0; j < k; ++j) {
            if (mass[j] > 0.0) continue;
            std::size_t farthest = n;
            double best = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (reseeded[i]) continue;
                double d = min_distance_squared(normalized.row(i), centroids, weights);
                if (d > best) {
                    best = d;
                    farthest = i;
                }
            }
            if (farthest == n)
                throw DegenerateClusterError(j, "cannot reseed cluster " + std::to_string(j));
            reseeded[farthest] = true;
            for (std::size_t q = 0; q < k; ++q) w.at(farthest, q) = q == j ? 1.0 : 0.0;
        }

        centroids = compute_centroids(normalized, w, config.alpha, vocabs);
        MembershipMatrix next = update_memberships(normalized, centroids, config, weights);
        result.iterations = iter + 1;

        double delta = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < k; ++j)
                delta = std::max(delta, std::abs(next.at(i, j) - w.at(i, j)));
        w = std::move(next);

        result.objective_trace.push_back(objective(normalized, w, centroids, config, weights));

        if (config.convergence == FcmConvergence::MembershipDelta) {
            if (delta < config.tolerance) {
                result.converged = true;
                break;
            }
        } else if (result.objective_trace.size() >= 2) {
            auto& trace = result.objective_trace;
            if (std::abs(trace[trace.size() - 1] - trace[trace.size() - 2]) < config.tolerance) {
                result.converged = true;
                break;
            }
        }
    }

    result.memberships = std::move(w);
    result.centroids = std::move(centroids);
    return result;
}

} // namespace cfc
