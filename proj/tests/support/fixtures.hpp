// Shared test fixtures: small hand-built datasets, synthetic blob data, and
// temp-file helpers.

#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "cfc/dataset.hpp"
#include "cfc/detail/rng.hpp"

namespace fixtures {

inline cfc::FeatureSchema mixed_schema() {
    return cfc::FeatureSchema({
        {"duration", cfc::FeatureKind::Continuous, {}},
        {"protocol", cfc::FeatureKind::Symbolic, {}},
        {"severity", cfc::FeatureKind::Ordinal, {"low", "medium", "high"}},
        {"rate", cfc::FeatureKind::Continuous, {}},
    });
}

/// 8 instances over mixed_schema with a couple of missing cells; two classes.
inline cfc::Dataset mixed_dataset() {
    using cfc::Cell;
    std::vector<std::vector<Cell>> rows = {
        {Cell::number(0.0), Cell::category("tcp"), Cell::category("low"), Cell::number(0.1)},
        {Cell::number(0.1), Cell::category("tcp"), Cell::category("low"), Cell::number(0.2)},
        {Cell::number(0.2), Cell::category("tcp"), Cell::category("medium"), Cell::number(0.1)},
        {Cell::number(0.1), Cell::category("udp"), Cell::category("low"), Cell::missing()},
        {Cell::number(0.9), Cell::category("udp"), Cell::category("high"), Cell::number(0.8)},
        {Cell::number(1.0), Cell::category("udp"), Cell::category("high"), Cell::number(0.9)},
        {Cell::number(0.8), Cell::missing(), Cell::category("high"), Cell::number(1.0)},
        {Cell::number(0.9), Cell::category("icmp"), Cell::category("medium"), Cell::number(0.9)},
    };
    std::vector<std::string> labels = {"normal", "normal", "normal", "normal",
                                       "attack", "attack", "attack", "attack"};
    return cfc::Dataset(mixed_schema(), std::move(rows), std::move(labels));
}

/// 1-D continuous blobs around the given centers (values fall in [0, 1]);
/// labels are "c0", "c1", ... per blob.
inline cfc::Dataset blob_dataset(std::size_t per_cluster, const std::vector<double>& centers,
                                 std::uint64_t seed, double spread = 0.02) {
    cfc::FeatureSchema schema({{"x", cfc::FeatureKind::Continuous, {}}});
    cfc::detail::SplitMix64 rng(seed);
    std::vector<std::vector<cfc::Cell>> rows;
    std::vector<std::string> labels;
    for (std::size_t c = 0; c < centers.size(); ++c) {
        for (std::size_t i = 0; i < per_cluster; ++i) {
            double v = centers[c] + (rng.next_double() - 0.5) * 2.0 * spread;
            v = std::min(1.0, std::max(0.0, v));
            rows.push_back({cfc::Cell::number(v)});
            labels.push_back("c" + std::to_string(c));
        }
    }
    return cfc::Dataset(schema, std::move(rows), std::move(labels));
}

inline std::filesystem::path temp_dir() {
    auto p = std::filesystem::temp_directory_path() / "cfc_tests";
    std::filesystem::create_directories(p);
    return p;
}

inline std::string write_file(const std::string& name, const std::string& content) {
    auto path = temp_dir() / name;
    std::ofstream out(path);
    out << content;
    out.close();
    return path.string();
}

} // namespace fixtures
