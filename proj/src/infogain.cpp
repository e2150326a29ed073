#include "cfc/infogain.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace cfc {

namespace {

double entropy_of_counts(const std::map<std::string, std::size_t>& counts, std::size_t total) {
    double h = 0.0;
    for (const auto& [label, count] : counts) {
        if (count == 0) continue;
        double p = static_cast<double>(count) / static_cast<double>(total);
        h -= p * std::log2(p);
    }
    return h;
}

} // namespace

double entropy(std::span<const std::string> labels) {
    if (labels.empty()) throw DataError("entropy of an empty label multiset is undefined");
    std::map<std::string, std::size_t> counts;
    for (const auto& label : labels) ++counts[label];
    return entropy_of_counts(counts, labels.size());
}

std::vector<int> discretize(std::span<const std::optional<double>> values, std::size_t bins) {
    if (bins < 2) throw ConfigError("discretization needs at least 2 bins");

    std::vector<double> known;
    known.reserve(values.size());
    for (const auto& v : values)
        if (v) known.push_back(*v);
    std::sort(known.begin(), known.end());

    // Boundary values at the (i/bins)-quantiles; a value belongs to the bin
    // counting the boundaries at or below it. A boundary that lands inside a
    // run of ties advances to the next distinct value, so heavy-tailed
    // columns (mostly one value, a few large ones) still split instead of
    // collapsing into a single bin.
    std::vector<double> cuts;
    if (!known.empty()) {
        for (std::size_t i = 1; i < bins; ++i) {
            double floor = cuts.empty() ? known.front() : cuts.back();
            double cut = known[i * known.size() / bins];
            if (cut <= floor) {
                auto next = std::upper_bound(known.begin(), known.end(), floor);
                if (next == known.end()) continue;
                cut = *next;
            }
            if (cuts.empty() || cut > cuts.back()) cuts.push_back(cut);
        }
    }

    std::vector<int> out(values.size(), -1);
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!values[i]) continue;
        auto it = std::upper_bound(cuts.begin(), cuts.end(), *values[i]);
        out[i] = static_cast<int>(it - cuts.begin());
    }
    return out;
}

double information_gain(std::span<const int> feature, std::span<const std::string> labels) {
    if (feature.size() != labels.size())
        throw DataError("feature column and labels have different lengths");
    if (labels.empty()) throw DataError("information gain of empty columns is undefined");

    std::map<std::string, std::size_t> class_counts;
    std::map<int, std::map<std::string, std::size_t>> per_value;
    std::map<int, std::size_t> value_counts;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        ++class_counts[labels[i]];
        ++per_value[feature[i]][labels[i]];
        ++value_counts[feature[i]];
    }

    const auto n = static_cast<double>(labels.size());
    double gain = entropy_of_counts(class_counts, labels.size());
    for (const auto& [value, counts] : per_value) {
        double weight = static_cast<double>(value_counts[value]) / n;
        gain -= weight * entropy_of_counts(counts, value_counts[value]);
    }
    return std::max(gain, 0.0);
}

std::vector<int> categorize_column(const Dataset& d, std::size_t q, std::size_t bins) {
    const auto& feature = d.schema().at(q);
    if (feature.kind == FeatureKind::Continuous) {
        std::vector<std::optional<double>> values(d.n());
        for (std::size_t i = 0; i < d.n(); ++i) {
            const Cell& cell = d.row(i)[q];
            if (!cell.is_missing()) values[i] = cell.number();
        }
        return discretize(values, bins);
    }
    std::map<std::string, int> ids;
    for (std::size_t i = 0; i < d.n(); ++i) {
        const Cell& cell = d.row(i)[q];
        if (!cell.is_missing()) ids.emplace(cell.category(), 0);
    }
    int next = 0;
    for (auto& [token, id] : ids) id = next++;
    std::vector<int> out(d.n(), -1);
    for (std::size_t i = 0; i < d.n(); ++i) {
        const Cell& cell = d.row(i)[q];
        if (!cell.is_missing()) out[i] = ids.at(cell.category());
    }
    return out;
}

FeatureWeights compute_feature_weights(const Dataset& d, std::size_t bins) {
    if (d.n() == 0) throw DataError("cannot compute feature weights on an empty dataset");
    FeatureWeights result;
    result.bins = bins;
    result.weights.resize(d.m());
    for (std::size_t q = 0; q < d.m(); ++q) {
        auto column = categorize_column(d, q, bins);
        result.weights[q] = information_gain(column, d.labels());
    }
    return result;
}

} // namespace cfc
