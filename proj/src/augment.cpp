#include "cfc/augment.hpp"

#include <algorithm>
#include <set>

#include "cfc/error.hpp"

namespace cfc {

ManipulationMode manipulation_mode_from_int(int t) {
    switch (t) {
    case 1: return ManipulationMode::T1;
    case 2: return ManipulationMode::T2;
    case 3: return ManipulationMode::T3;
    }
    throw ConfigError("feature employment mode must be 1, 2, or 3, got " + std::to_string(t));
}

int manipulation_mode_to_int(ManipulationMode mode) { return static_cast<int>(mode); }

std::string membership_column_name(std::size_t j) { return "_P" + std::to_string(j); }

ClusterFeatureBlock build_cluster_features(const MembershipMatrix& w) {
    ClusterFeatureBlock cf;
    cf.k = w.clusters();
    cf.p = w;
    cf.z.resize(w.rows());
    cf.b.resize(w.rows());
    for (std::size_t i = 0; i < w.rows(); ++i) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < w.clusters(); ++j)
            if (w.at(i, j) > w.at(i, best)) best = j;
        cf.z[i] = best + 1;
        cf.b[i] = w.at(i, best);
    }
    return cf;
}

FeatureSchema manipulated_schema(const FeatureSchema& original, std::size_t k,
                                 ManipulationMode mode, const FeatureSubset* selected) {
    std::vector<FeatureSpec> features = original.features();
    features.push_back({kClusterColumn, FeatureKind::Symbolic, {}});
    features.push_back({kConfidenceColumn, FeatureKind::Continuous, {}});
    if (mode != ManipulationMode::T1)
        for (std::size_t j = 1; j <= k; ++j)
            features.push_back({membership_column_name(j), FeatureKind::Continuous, {}});
    FeatureSchema full(std::move(features), original.missing_token());
    if (mode != ManipulationMode::T3) return full;

    if (!selected) throw ConfigError("mode 3 requires a selected feature subset");
    std::set<std::string> wanted(selected->names.begin(), selected->names.end());
    std::vector<FeatureSpec> kept;
    for (const auto& f : full.features()) {
        if (!wanted.count(f.name)) continue;
        kept.push_back(f);
        wanted.erase(f.name);
    }
    if (!wanted.empty())
        throw SchemaError("selected feature '" + *wanted.begin() +
                          "' does not exist in the augmented layout");
    return FeatureSchema(std::move(kept), original.missing_token());
}

Dataset manipulate(const Dataset& d, const ClusterFeatureBlock& cf, ManipulationMode mode,
                   const FeatureSubset* selected) {
    if (cf.z.size() != d.n() || cf.p.rows() != d.n())
        throw DataError("cluster feature block covers " + std::to_string(cf.z.size()) +
                        " instances, dataset has " + std::to_string(d.n()));

    FeatureSchema full = manipulated_schema(d.schema(), cf.k, ManipulationMode::T2);
    std::vector<std::vector<Cell>> rows;
    rows.reserve(d.n());
    for (std::size_t i = 0; i < d.n(); ++i) {
        std::vector<Cell> row = d.row(i);
        row.reserve(full.size());
        row.push_back(Cell::category(std::to_string(cf.z[i])));
        row.push_back(Cell::number(cf.b[i]));
        for (std::size_t j = 0; j < cf.k; ++j) row.push_back(Cell::number(cf.p.at(i, j)));
        rows.push_back(std::move(row));
    }

    if (mode == ManipulationMode::T2) return Dataset(full, std::move(rows), d.labels());

    FeatureSchema target = manipulated_schema(d.schema(), cf.k, mode, selected);
    std::vector<std::size_t> keep;
    keep.reserve(target.size());
    for (const auto& f : target.features()) keep.push_back(*full.index_of(f.name));

    std::vector<std::vector<Cell>> projected;
    projected.reserve(rows.size());
    for (auto& row : rows) {
        std::vector<Cell> out;
        out.reserve(keep.size());
        for (std::size_t idx : keep) out.push_back(std::move(row[idx]));
        projected.push_back(std::move(out));
    }
    return Dataset(target, std::move(projected), d.labels());
}

} // namespace cfc
