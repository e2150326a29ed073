// Cluster-feature columns (Z, B, P1..Pk) derived from a membership matrix,
// and assembly of the manipulated training set under modes T1/T2/T3.

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "cfc/dataset.hpp"
#include "cfc/fcm.hpp"
#include "cfc/select.hpp"

namespace cfc {

/// How cluster features join the original columns: T1 adds Z and B, T2 also
/// adds the full membership columns P1..Pk, T3 projects the T2 layout onto a
/// selected feature subset.
enum class ManipulationMode { T1 = 1, T2 = 2, T3 = 3 };

ManipulationMode manipulation_mode_from_int(int t);
int manipulation_mode_to_int(ManipulationMode mode);

struct ClusterFeatureBlock {
    /// Argmax cluster per instance, 1-based; ties go to the smallest index.
    std::vector<std::size_t> z;
    /// Max membership per instance.
    std::vector<double> b;
    /// The full membership matrix (columns P1..Pk).
    MembershipMatrix p;
    std::size_t k = 0;
};

inline constexpr const char* kClusterColumn = "_Z";
inline constexpr const char* kConfidenceColumn = "_B";
std::string membership_column_name(std::size_t j); // 1-based: "_P1", ...

ClusterFeatureBlock build_cluster_features(const MembershipMatrix& w);

/// Schema of the manipulated layout: original features plus _Z (symbolic) and
/// _B (continuous), plus _P1.._Pk for T2; T3 keeps the T2 columns named in
/// `selected`, in T2 schema order.
FeatureSchema manipulated_schema(const FeatureSchema& original, std::size_t k,
                                 ManipulationMode mode, const FeatureSubset* selected = nullptr);

/// Horizontal concatenation of the original (unnormalized) columns with the
/// cluster features per the mode. Labels pass through unchanged.
Dataset manipulate(const Dataset& d, const ClusterFeatureBlock& cf, ManipulationMode mode,
                   const FeatureSubset* selected = nullptr);

} // namespace cfc
