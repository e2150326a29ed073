#include "cfc/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cfc/detail/rng.hpp"
#include "cfc/detail/text.hpp"

namespace cfc {

using json = nlohmann::json;

std::string to_string(FeatureKind kind) {
    switch (kind) {
        case FeatureKind::Continuous: return "continuous";
        case FeatureKind::Symbolic: return "symbolic";
        case FeatureKind::Ordinal: return "ordinal";
    }
    return "continuous";
}

FeatureKind feature_kind_from_string(const std::string& s) {
    if (s == "continuous") return FeatureKind::Continuous;
    if (s == "symbolic") return FeatureKind::Symbolic;
    if (s == "ordinal") return FeatureKind::Ordinal;
    throw SchemaError("unknown feature kind '" + s + "'");
}

std::optional<std::size_t> FeatureSpec::ordinal_rank(const std::string& token) const {
    for (std::size_t i = 0; i < categories.size(); ++i)
        if (categories[i] == token) return i;
    return std::nullopt;
}

FeatureSchema::FeatureSchema(std::vector<FeatureSpec> features, std::string missing_token)
    : features_(std::move(features)), missing_token_(std::move(missing_token)) {
    std::set<std::string> seen;
    for (const auto& f : features_) {
        if (f.name.empty()) throw SchemaError("feature names must be non-empty");
        if (!seen.insert(f.name).second)
            throw SchemaError("duplicate feature name '" + f.name + "'");
        if (f.kind == FeatureKind::Ordinal) {
            if (f.categories.size() < 2)
                throw SchemaError("ordinal feature '" + f.name + "' needs at least 2 categories");
            std::set<std::string> cats(f.categories.begin(), f.categories.end());
            if (cats.size() != f.categories.size())
                throw SchemaError("ordinal feature '" + f.name + "' has duplicate categories");
        } else if (!f.categories.empty()) {
            throw SchemaError("feature '" + f.name + "' is not ordinal but lists categories");
        }
    }
    if (missing_token_.empty()) throw SchemaError("missing-value sentinel must be non-empty");
}

std::optional<std::size_t> FeatureSchema::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < features_.size(); ++i)
        if (features_[i].name == name) return i;
    return std::nullopt;
}

bool FeatureSchema::operator==(const FeatureSchema& other) const {
    if (missing_token_ != other.missing_token_ || features_.size() != other.features_.size())
        return false;
    for (std::size_t i = 0; i < features_.size(); ++i) {
        const auto& a = features_[i];
        const auto& b = other.features_[i];
        if (a.name != b.name || a.kind != b.kind || a.categories != b.categories) return false;
    }
    return true;
}

std::uint64_t FeatureSchema::fingerprint() const {
    std::string canon = "missing=" + missing_token_ + "\n";
    for (const auto& f : features_) {
        canon += f.name;
        canon += '\x1f';
        canon += to_string(f.kind);
        for (const auto& c : f.categories) {
            canon += '\x1f';
            canon += c;
        }
        canon += '\n';
    }
    return detail::fnv1a64(canon);
}

Dataset::Dataset(FeatureSchema schema, std::vector<std::vector<Cell>> rows,
                 std::vector<std::string> labels)
    : schema_(std::move(schema)), rows_(std::move(rows)), labels_(std::move(labels)) {
    if (rows_.size() != labels_.size())
        throw DataError("row count does not match label count");
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        if (rows_[i].size() != schema_.size())
            throw DataError("row " + std::to_string(i + 1) + " has " +
                            std::to_string(rows_[i].size()) + " values, schema expects " +
                            std::to_string(schema_.size()));
    }
    std::set<std::string> distinct(labels_.begin(), labels_.end());
    classes_.assign(distinct.begin(), distinct.end());
}

const NormalizationParams::Range* NormalizationParams::find(const std::string& feature) const {
    for (const auto& r : ranges)
        if (r.feature == feature) return &r;
    return nullptr;
}

std::optional<std::size_t> Table::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    return std::nullopt;
}

Table read_table(const std::string& path, char delimiter) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open data file '" + path + "'");
    Table table;
    std::string line;
    if (!std::getline(in, line)) throw DataError("data file '" + path + "' is empty");
    for (auto& name : detail::split(std::string(detail::trim(line)), delimiter))
        table.header.push_back(name);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view text = detail::trim(line);
        if (text.empty()) continue;
        auto fields = detail::split(std::string(text), delimiter);
        if (fields.size() != table.header.size())
            throw DataError("row " + std::to_string(line_no) + " of '" + path + "' has " +
                            std::to_string(fields.size()) + " fields, header has " +
                            std::to_string(table.header.size()));
        table.rows.push_back(std::move(fields));
    }
    return table;
}

void write_table(const std::string& path, const Table& table, char delimiter) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write data file '" + path + "'");
    out << detail::join(table.header, delimiter) << '\n';
    for (const auto& row : table.rows) out << detail::join(row, delimiter) << '\n';
}

bool is_reserved_feature_name(const std::string& name) {
    if (name == "_Z" || name == "_B") return true;
    if (name.size() > 2 && name[0] == '_' && name[1] == 'P') {
        return std::all_of(name.begin() + 2, name.end(),
                           [](unsigned char c) { return std::isdigit(c); });
    }
    return false;
}

SchemaFile parse_schema_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw SchemaError(std::string("schema file is not valid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("label") || !doc.contains("features"))
        throw SchemaError("schema file must be an object with 'label' and 'features'");

    SchemaFile result;
    result.label_column = doc.at("label").get<std::string>();
    std::string missing = doc.value("missing", "?");

    std::vector<FeatureSpec> features;
    for (const auto& item : doc.at("features")) {
        FeatureSpec spec;
        spec.name = item.at("name").get<std::string>();
        spec.kind = feature_kind_from_string(item.at("kind").get<std::string>());
        if (spec.kind == FeatureKind::Ordinal) {
            if (!item.contains("categories"))
                throw SchemaError("ordinal feature '" + spec.name + "' must list categories");
            spec.categories = item.at("categories").get<std::vector<std::string>>();
        }
        if (is_reserved_feature_name(spec.name))
            throw SchemaError("feature name '" + spec.name +
                              "' is reserved for derived cluster-feature columns");
        features.push_back(std::move(spec));
    }
    if (is_reserved_feature_name(result.label_column))
        throw SchemaError("label column name '" + result.label_column + "' is reserved");
    result.schema = FeatureSchema(std::move(features), std::move(missing));
    return result;
}

SchemaFile load_schema(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open schema file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_schema_json(buffer.str());
}

Cell parse_cell(const std::string& token, const FeatureSpec& feature,
                const std::string& missing_token) {
    if (token == missing_token) return Cell::missing();
    switch (feature.kind) {
        case FeatureKind::Continuous: {
            auto value = detail::parse_double(token);
            if (!value || !std::isfinite(*value)) return Cell::missing();
            return Cell::number(*value);
        }
        case FeatureKind::Symbolic:
            return Cell::category(token);
        case FeatureKind::Ordinal:
            // Tokens outside the declared order carry no rank information.
            if (!feature.ordinal_rank(token)) return Cell::missing();
            return Cell::category(token);
    }
    return Cell::missing();
}

std::string cell_to_string(const Cell& cell, const std::string& missing_token) {
    if (cell.is_missing()) return missing_token;
    if (cell.is_category()) return cell.category();
    return detail::format_double(cell.number());
}

Dataset dataset_from_table(const Table& table, const FeatureSchema& schema,
                           const std::string& label_column,
                           const std::vector<std::string>& extra_names,
                           std::vector<std::vector<std::string>>* extra_columns) {
    std::set<std::string> expected;
    for (const auto& f : schema.features()) expected.insert(f.name);
    expected.insert(label_column);
    for (const auto& name : extra_names) expected.insert(name);

    std::set<std::string> present(table.header.begin(), table.header.end());
    if (present.size() != table.header.size())
        throw DataError("data header contains duplicate column names");
    if (present != expected) {
        std::string msg = "header does not match schema; expected {";
        bool first = true;
        for (const auto& name : expected) {
            if (!first) msg += ", ";
            msg += name;
            first = false;
        }
        msg += "} but file has {";
        first = true;
        for (const auto& name : present) {
            if (!first) msg += ", ";
            msg += name;
            first = false;
        }
        msg += "}";
        throw SchemaError(msg);
    }

    std::vector<std::size_t> feature_cols(schema.size());
    for (std::size_t q = 0; q < schema.size(); ++q)
        feature_cols[q] = *table.column(schema.at(q).name);
    std::size_t label_col = *table.column(label_column);

    std::vector<std::size_t> extra_cols;
    for (const auto& name : extra_names) extra_cols.push_back(*table.column(name));
    if (extra_columns) extra_columns->assign(extra_names.size(), {});

    std::vector<std::vector<Cell>> rows;
    std::vector<std::string> labels;
    rows.reserve(table.rows.size());
    labels.reserve(table.rows.size());
    for (const auto& raw : table.rows) {
        std::vector<Cell> row(schema.size());
        for (std::size_t q = 0; q < schema.size(); ++q)
            row[q] = parse_cell(raw[feature_cols[q]], schema.at(q), schema.missing_token());
        rows.push_back(std::move(row));
        labels.push_back(raw[label_col]);
        if (extra_columns)
            for (std::size_t e = 0; e < extra_cols.size(); ++e)
                (*extra_columns)[e].push_back(raw[extra_cols[e]]);
    }
    return Dataset(schema, std::move(rows), std::move(labels));
}

std::vector<std::vector<Cell>> rows_from_table(const Table& table, const FeatureSchema& schema,
                                               const std::string& source) {
    std::vector<std::size_t> columns;
    std::vector<std::string> absent;
    for (std::size_t q = 0; q < schema.size(); ++q) {
        auto col = table.column(schema.at(q).name);
        if (!col)
            absent.push_back(schema.at(q).name);
        else
            columns.push_back(*col);
    }
    if (!absent.empty())
        throw DataError("'" + source + "' is missing feature column(s): " +
                        detail::join(absent, ','));
    std::vector<std::vector<Cell>> rows;
    rows.reserve(table.rows.size());
    for (const auto& raw : table.rows) {
        std::vector<Cell> row;
        row.reserve(schema.size());
        for (std::size_t q = 0; q < schema.size(); ++q)
            row.push_back(parse_cell(raw[columns[q]], schema.at(q), schema.missing_token()));
        rows.push_back(std::move(row));
    }
    return rows;
}

Dataset load_dataset(const std::string& path, const FeatureSchema& schema,
                     const std::string& label_column, char delimiter) {
    return dataset_from_table(read_table(path, delimiter), schema, label_column);
}

NormalizationParams fit_normalization(const Dataset& d) {
    if (d.n() == 0) throw DataError("cannot fit normalization on an empty dataset");
    NormalizationParams params;
    for (std::size_t q = 0; q < d.m(); ++q) {
        const auto& feature = d.schema().at(q);
        if (feature.kind != FeatureKind::Continuous) continue;
        double lo = 0.0, hi = 0.0;
        bool seen = false;
        for (std::size_t i = 0; i < d.n(); ++i) {
            const Cell& cell = d.row(i)[q];
            if (cell.is_missing()) continue;
            double v = cell.number();
            if (!seen) {
                lo = hi = v;
                seen = true;
            } else {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        }
        params.ranges.push_back({feature.name, lo, hi});
    }
    return params;
}

namespace {

Cell normalize_cell(const Cell& cell, const NormalizationParams::Range& range) {
    if (cell.is_missing()) return cell;
    double span = range.max - range.min;
    if (span <= 0.0) return Cell::number(0.0);
    double v = (cell.number() - range.min) / span;
    return Cell::number(std::clamp(v, 0.0, 1.0));
}

} // namespace

std::vector<Cell> apply_normalization_row(const std::vector<Cell>& row,
                                          const FeatureSchema& schema,
                                          const NormalizationParams& p) {
    std::vector<Cell> out = row;
    for (std::size_t q = 0; q < schema.size(); ++q) {
        if (schema.at(q).kind != FeatureKind::Continuous) continue;
        const auto* range = p.find(schema.at(q).name);
        if (!range)
            throw SchemaError("no normalization range for continuous feature '" +
                              schema.at(q).name + "'");
        out[q] = normalize_cell(out[q], *range);
    }
    return out;
}

Dataset apply_normalization(const Dataset& d, const NormalizationParams& p) {
    for (const auto& r : p.ranges) {
        auto idx = d.schema().index_of(r.feature);
        if (!idx || d.schema().at(*idx).kind != FeatureKind::Continuous)
            throw SchemaError("normalization range for unknown continuous feature '" +
                              r.feature + "'");
        if (r.min > r.max)
            throw DataError("normalization range for '" + r.feature + "' has min > max");
    }
    std::vector<std::vector<Cell>> rows;
    rows.reserve(d.n());
    for (std::size_t i = 0; i < d.n(); ++i)
        rows.push_back(apply_normalization_row(d.row(i), d.schema(), p));
    return Dataset(d.schema(), std::move(rows), d.labels());
}

std::vector<std::size_t> sample_indices_by_group(std::span<const std::string> group_tags,
                                                 const std::map<std::string, double>& fractions,
                                                 std::uint64_t seed) {
    for (const auto& [group, fraction] : fractions) {
        if (!(fraction > 0.0 && fraction <= 1.0))
            throw ConfigError("fraction for group '" + group + "' must be in (0, 1]");
        bool found = std::find(group_tags.begin(), group_tags.end(), group) != group_tags.end();
        if (!found) throw DataError("group '" + group + "' does not appear in the data");
    }

    std::map<std::string, std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < group_tags.size(); ++i) members[group_tags[i]].push_back(i);

    std::vector<std::size_t> selected;
    for (const auto& [group, indices] : members) {
        auto it = fractions.find(group);
        double fraction = it == fractions.end() ? 1.0 : it->second;
        if (fraction >= 1.0) {
            selected.insert(selected.end(), indices.begin(), indices.end());
            continue;
        }
        auto count = static_cast<std::size_t>(
            std::floor(fraction * static_cast<double>(indices.size()) + 0.5));
        detail::SplitMix64 rng(detail::derive_seed(seed, group));
        for (std::size_t pos : detail::sample_without_replacement(indices.size(), count, rng))
            selected.push_back(indices[pos]);
    }
    std::sort(selected.begin(), selected.end());
    return selected;
}

Dataset sample_by_group(const Dataset& d, std::span<const std::string> group_tags,
                        const std::map<std::string, double>& fractions, std::uint64_t seed) {
    if (group_tags.size() != d.n())
        throw DataError("group tags do not match the dataset row count");
    auto selected = sample_indices_by_group(group_tags, fractions, seed);
    std::vector<std::vector<Cell>> rows;
    std::vector<std::string> labels;
    rows.reserve(selected.size());
    labels.reserve(selected.size());
    for (std::size_t i : selected) {
        rows.push_back(d.row(i));
        labels.push_back(d.label(i));
    }
    return Dataset(d.schema(), std::move(rows), std::move(labels));
}

Table sample_table_by_group(const Table& table, const std::string& group_column,
                            const std::map<std::string, double>& fractions, std::uint64_t seed) {
    auto col = table.column(group_column);
    if (!col) throw DataError("group column '" + group_column + "' not found in data header");
    std::vector<std::string> tags;
    tags.reserve(table.rows.size());
    for (const auto& row : table.rows) tags.push_back(row[*col]);
    auto selected = sample_indices_by_group(tags, fractions, seed);
    Table out;
    out.header = table.header;
    out.rows.reserve(selected.size());
    for (std::size_t i : selected) out.rows.push_back(table.rows[i]);
    return out;
}

} // namespace cfc
