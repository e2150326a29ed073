#include "cfc/select.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "cfc/detail/rng.hpp"
#include "cfc/error.hpp"
#include "cfc/infogain.hpp"

namespace cfc {

namespace {

double entropy_of_ids(std::span<const int> column) {
    std::map<int, std::size_t> counts;
    for (int v : column) ++counts[v];
    double h = 0.0;
    for (const auto& [_, c] : counts) {
        double p = static_cast<double>(c) / static_cast<double>(column.size());
        h -= p * std::log2(p);
    }
    return h;
}

double joint_entropy(std::span<const int> a, std::span<const int> b) {
    std::map<std::pair<int, int>, std::size_t> counts;
    for (std::size_t i = 0; i < a.size(); ++i) ++counts[{a[i], b[i]}];
    double h = 0.0;
    for (const auto& [_, c] : counts) {
        double p = static_cast<double>(c) / static_cast<double>(a.size());
        h -= p * std::log2(p);
    }
    return h;
}

std::size_t best_singleton(const CorrelationCache& cache) {
    std::size_t best = 0;
    for (std::size_t q = 1; q < cache.feature_count(); ++q)
        if (cache.feature_class(q) > cache.feature_class(best)) best = q;
    return best;
}

std::vector<std::size_t> bits_to_indices(const std::vector<bool>& bits) {
    std::vector<std::size_t> idx;
    for (std::size_t q = 0; q < bits.size(); ++q)
        if (bits[q]) idx.push_back(q);
    return idx;
}

FeatureSubset subset_from_bits(const std::vector<bool>& bits, double merit,
                               const CorrelationCache& cache) {
    FeatureSubset out;
    out.merit = merit;
    for (std::size_t q = 0; q < bits.size(); ++q)
        if (bits[q]) out.names.push_back(cache.feature_names()[q]);
    return out;
}

} // namespace

void GeneticSearchConfig::validate() const {
    if (population < 2) throw ConfigError("population size must be at least 2");
    if (generations < 1) throw ConfigError("generation count must be at least 1");
    if (crossover < 0.0 || crossover > 1.0)
        throw ConfigError("crossover probability must lie in [0, 1]");
    if (mutation < 0.0 || mutation > 1.0)
        throw ConfigError("mutation probability must lie in [0, 1]");
}

double symmetrical_uncertainty(std::span<const int> a, std::span<const int> b) {
    if (a.size() != b.size())
        throw DataError("columns have different lengths");
    if (a.empty()) throw DataError("symmetrical uncertainty of empty columns is undefined");
    double ha = entropy_of_ids(a);
    double hb = entropy_of_ids(b);
    if (ha + hb == 0.0) return 0.0;
    double mi = ha + hb - joint_entropy(a, b);
    mi = std::clamp(mi, 0.0, std::min(ha, hb));
    return 2.0 * mi / (ha + hb);
}

CorrelationCache::CorrelationCache(const Dataset& d, std::size_t bins) {
    if (d.n() == 0) throw DataError("cannot correlate an empty dataset");
    const std::size_t m = d.m();
    std::vector<std::vector<int>> columns(m);
    for (std::size_t q = 0; q < m; ++q) {
        columns[q] = categorize_column(d, q, bins);
        names_.push_back(d.schema().at(q).name);
    }

    std::vector<int> class_ids(d.n());
    {
        std::map<std::string, int> ids;
        for (const auto& c : d.classes()) ids.emplace(c, static_cast<int>(ids.size()));
        for (std::size_t i = 0; i < d.n(); ++i) class_ids[i] = ids.at(d.label(i));
    }

    class_su_.resize(m);
    for (std::size_t q = 0; q < m; ++q)
        class_su_[q] = symmetrical_uncertainty(columns[q], class_ids);

    pair_su_.assign(m * m, 1.0);
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = a + 1; b < m; ++b) {
            double su = symmetrical_uncertainty(columns[a], columns[b]);
            pair_su_[a * m + b] = su;
            pair_su_[b * m + a] = su;
        }
}

double CorrelationCache::feature_feature(std::size_t a, std::size_t b) const {
    return pair_su_[a * feature_count() + b];
}

double cfs_merit(std::span<const std::size_t> subset, const CorrelationCache& cache) {
    if (subset.empty()) throw DataError("merit of an empty subset is undefined");
    const double s = static_cast<double>(subset.size());
    double rcf = 0.0;
    for (std::size_t q : subset) rcf += cache.feature_class(q);
    rcf /= s;

    double rff = 0.0;
    if (subset.size() > 1) {
        for (std::size_t i = 0; i < subset.size(); ++i)
            for (std::size_t j = i + 1; j < subset.size(); ++j)
                rff += cache.feature_feature(subset[i], subset[j]);
        rff /= s * (s - 1.0) / 2.0;
    }
    return s * rcf / std::sqrt(s + s * (s - 1.0) * rff);
}

FeatureSubset genetic_search(const CorrelationCache& cache, const GeneticSearchConfig& cfg) {
    cfg.validate();
    const std::size_t m = cache.feature_count();
    if (m == 0) throw DataError("no candidate features to select from");

    detail::SplitMix64 rng(cfg.seed);
    const std::size_t repair_target = best_singleton(cache);

    auto repair = [&](std::vector<bool>& bits) {
        if (std::none_of(bits.begin(), bits.end(), [](bool b) { return b; }))
            bits[repair_target] = true;
    };
    auto evaluate = [&](const std::vector<bool>& bits) {
        return cfs_merit(bits_to_indices(bits), cache);
    };

    // Seed the population with singletons, best class-correlation first, then
    // fill with random bitstrings.
    std::vector<std::size_t> by_su(m);
    for (std::size_t q = 0; q < m; ++q) by_su[q] = q;
    std::stable_sort(by_su.begin(), by_su.end(), [&](std::size_t a, std::size_t b) {
        return cache.feature_class(a) > cache.feature_class(b);
    });

    std::vector<std::vector<bool>> population;
    for (std::size_t i = 0; i < cfg.population && i < m; ++i) {
        std::vector<bool> bits(m, false);
        bits[by_su[i]] = true;
        population.push_back(std::move(bits));
    }
    while (population.size() < cfg.population) {
        std::vector<bool> bits(m);
        for (std::size_t q = 0; q < m; ++q) bits[q] = rng.next() & 1;
        repair(bits);
        population.push_back(std::move(bits));
    }

    std::vector<double> merits(cfg.population);
    for (std::size_t i = 0; i < cfg.population; ++i) merits[i] = evaluate(population[i]);

    std::vector<bool> best_bits = population[0];
    double best_merit = merits[0];
    auto track = [&](const std::vector<bool>& bits, double merit) {
        if (merit > best_merit) {
            best_merit = merit;
            best_bits = bits;
        }
    };
    for (std::size_t i = 1; i < cfg.population; ++i) track(population[i], merits[i]);

    auto tournament = [&]() -> const std::vector<bool>& {
        std::size_t a = rng.next_below(cfg.population);
        std::size_t b = rng.next_below(cfg.population);
        return merits[a] >= merits[b] ? population[a] : population[b];
    };

    for (std::size_t gen = 0; gen < cfg.generations; ++gen) {
        std::vector<std::vector<bool>> next;
        next.reserve(cfg.population);
        next.push_back(best_bits);
        while (next.size() < cfg.population) {
            std::vector<bool> child_a = tournament();
            std::vector<bool> child_b = tournament();
            if (m >= 2 && rng.next_double() < cfg.crossover) {
                std::size_t point = 1 + rng.next_below(m - 1);
                for (std::size_t q = point; q < m; ++q) {
                    bool tmp = child_a[q];
                    child_a[q] = child_b[q];
                    child_b[q] = tmp;
                }
            }
            for (auto* child : {&child_a, &child_b}) {
                for (std::size_t q = 0; q < m; ++q)
                    if (rng.next_double() < cfg.mutation) (*child)[q] = !(*child)[q];
                repair(*child);
                if (next.size() < cfg.population) next.push_back(std::move(*child));
            }
        }
        population = std::move(next);
        for (std::size_t i = 0; i < cfg.population; ++i) {
            merits[i] = evaluate(population[i]);
            track(population[i], merits[i]);
        }
    }

    return subset_from_bits(best_bits, best_merit, cache);
}

FeatureSubset greedy_forward_search(const CorrelationCache& cache) {
    const std::size_t m = cache.feature_count();
    if (m == 0) throw DataError("no candidate features to select from");

    std::vector<std::size_t> chosen;
    std::vector<bool> used(m, false);
    double merit = -1.0;
    while (true) {
        std::size_t best_q = m;
        double best_merit = merit;
        for (std::size_t q = 0; q < m; ++q) {
            if (used[q]) continue;
            chosen.push_back(q);
            double candidate = cfs_merit(chosen, cache);
            chosen.pop_back();
            if (candidate > best_merit) {
                best_merit = candidate;
                best_q = q;
            }
        }
        if (best_q == m) break;
        chosen.push_back(best_q);
        used[best_q] = true;
        merit = best_merit;
    }
    std::sort(chosen.begin(), chosen.end());

    FeatureSubset out;
    out.merit = merit;
    for (std::size_t q : chosen) out.names.push_back(cache.feature_names()[q]);
    return out;
}

} // namespace cfc
