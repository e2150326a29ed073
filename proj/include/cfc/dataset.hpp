// Feature schema, typed dataset model, delimited-text ingestion,
// max-min normalization, and seeded group sampling.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "cfc/error.hpp"

namespace cfc {

enum class FeatureKind { Continuous, Symbolic, Ordinal };

std::string to_string(FeatureKind kind);
FeatureKind feature_kind_from_string(const std::string& s);

struct FeatureSpec {
    std::string name;
    FeatureKind kind = FeatureKind::Continuous;
    /// Ordered category list; ordinal features only, size >= 2.
    std::vector<std::string> categories;

    /// Rank of an ordinal token in [0, t-1], or nullopt if not declared.
    std::optional<std::size_t> ordinal_rank(const std::string& token) const;
};

/// Ordered feature descriptions plus the missing-value sentinel token.
class FeatureSchema {
public:
    FeatureSchema() = default;
    FeatureSchema(std::vector<FeatureSpec> features, std::string missing_token = "?");

    std::size_t size() const { return features_.size(); }
    const FeatureSpec& at(std::size_t q) const { return features_.at(q); }
    const std::vector<FeatureSpec>& features() const { return features_; }
    const std::string& missing_token() const { return missing_token_; }

    /// Index of a feature by name; nullopt if absent.
    std::optional<std::size_t> index_of(const std::string& name) const;

    bool operator==(const FeatureSchema& other) const;

    /// Stable digest over names, kinds, category orders, and the sentinel.
    std::uint64_t fingerprint() const;

private:
    std::vector<FeatureSpec> features_;
    std::string missing_token_ = "?";
};

/// One dataset cell: missing, a real number, or a category token.
class Cell {
public:
    Cell() = default;

    static Cell missing() { return Cell(); }
    static Cell number(double v) { return Cell(v); }
    static Cell category(std::string token) { return Cell(std::move(token)); }

    bool is_missing() const { return value_.index() == 0; }
    bool is_number() const { return value_.index() == 1; }
    bool is_category() const { return value_.index() == 2; }

    double number() const { return std::get<double>(value_); }
    const std::string& category() const { return std::get<std::string>(value_); }

    bool operator==(const Cell&) const = default;

private:
    explicit Cell(double v) : value_(v) {}
    explicit Cell(std::string v) : value_(std::move(v)) {}

    std::variant<std::monostate, double, std::string> value_;
};

/// Labeled instances conforming to a FeatureSchema. Immutable after
/// construction; the class set is the distinct labels, sorted.
class Dataset {
public:
    Dataset() = default;
    Dataset(FeatureSchema schema, std::vector<std::vector<Cell>> rows,
            std::vector<std::string> labels);

    std::size_t n() const { return rows_.size(); }
    std::size_t m() const { return schema_.size(); }

    const FeatureSchema& schema() const { return schema_; }
    const std::vector<Cell>& row(std::size_t i) const { return rows_.at(i); }
    const std::vector<std::vector<Cell>>& rows() const { return rows_; }
    const std::string& label(std::size_t i) const { return labels_.at(i); }
    const std::vector<std::string>& labels() const { return labels_; }
    /// Distinct labels in sorted order.
    const std::vector<std::string>& classes() const { return classes_; }

private:
    FeatureSchema schema_;
    std::vector<std::vector<Cell>> rows_;
    std::vector<std::string> labels_;
    std::vector<std::string> classes_;
};

/// Observed (min, max) per continuous feature, keyed by feature name.
struct NormalizationParams {
    struct Range {
        std::string feature;
        double min = 0.0;
        double max = 0.0;
    };
    std::vector<Range> ranges;

    const Range* find(const std::string& feature) const;
};

/// Raw delimited table: header plus untyped rows. Used by ingestion and by
/// CLI paths that must preserve input text byte-for-byte.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::optional<std::size_t> column(const std::string& name) const;
};

Table read_table(const std::string& path, char delimiter = ',');
void write_table(const std::string& path, const Table& table, char delimiter = ',');

/// Parse a schema file (JSON: label column, missing sentinel, feature list).
/// Rejects the reserved cluster-feature names (_Z, _B, _P1, ...).
struct SchemaFile {
    FeatureSchema schema;
    std::string label_column;
};
SchemaFile load_schema(const std::string& path);
SchemaFile parse_schema_json(const std::string& text);

/// True for names reserved for derived cluster-feature columns.
bool is_reserved_feature_name(const std::string& name);

Dataset load_dataset(const std::string& path, const FeatureSchema& schema,
                     const std::string& label_column, char delimiter = ',');

/// Typed view over an already-read table. `extra_columns` receives the values
/// of named columns that are not part of the schema (e.g. a strata tag).
Dataset dataset_from_table(const Table& table, const FeatureSchema& schema,
                           const std::string& label_column,
                           const std::vector<std::string>& extra_names = {},
                           std::vector<std::vector<std::string>>* extra_columns = nullptr);

/// Typed feature rows of an unlabeled table, in schema column order. Columns
/// beyond the schema are ignored; `source` names the table in error messages.
std::vector<std::vector<Cell>> rows_from_table(const Table& table, const FeatureSchema& schema,
                                               const std::string& source);

/// Parse one cell per the feature kind. Unparseable continuous values and
/// ordinal tokens outside the declared order become missing.
Cell parse_cell(const std::string& token, const FeatureSpec& feature,
                const std::string& missing_token);

std::string cell_to_string(const Cell& cell, const std::string& missing_token);

NormalizationParams fit_normalization(const Dataset& d);

/// Map continuous cells to (v - min) / (max - min), clamped to [0, 1].
/// Zero-range features map to 0. Symbolic, ordinal, and missing cells pass
/// through unchanged.
Dataset apply_normalization(const Dataset& d, const NormalizationParams& p);
std::vector<Cell> apply_normalization_row(const std::vector<Cell>& row,
                                          const FeatureSchema& schema,
                                          const NormalizationParams& p);

/// Seeded index selection shared by the Dataset and Table samplers: for each
/// group g with fraction f, keeps round-half-up(f * n_g) members chosen
/// uniformly without replacement; groups without a fraction keep everything.
/// The result is ascending, so selection is order-preserving.
std::vector<std::size_t> sample_indices_by_group(std::span<const std::string> group_tags,
                                                 const std::map<std::string, double>& fractions,
                                                 std::uint64_t seed);

Dataset sample_by_group(const Dataset& d, std::span<const std::string> group_tags,
                        const std::map<std::string, double>& fractions, std::uint64_t seed);

Table sample_table_by_group(const Table& table, const std::string& group_column,
                            const std::map<std::string, double>& fractions, std::uint64_t seed);

} // namespace cfc
