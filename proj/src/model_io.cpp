#include "cfc/model_io.hpp"

#include <fstream>
#include <sstream>

#include "cfc/detail/rng.hpp"
#include "cfc/detail/text.hpp"
#include "cfc/error.hpp"

namespace cfc {

namespace {

std::string hex64(std::uint64_t v) {
    static const char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = digits[v & 0xF];
        v >>= 4;
    }
    return out;
}

std::string esc(const std::string& token) { return detail::escape_token(token); }

void write_tree(const TreeNode& node, std::string& out) {
    auto weights = [&] {
        std::string s;
        for (double w : node.class_weights) s += " " + detail::format_double(w);
        return s;
    };
    switch (node.kind) {
        case TreeNode::Kind::Leaf:
            out += "leaf " + detail::format_double(node.total) + " " +
                   std::to_string(node.predicted) + weights() + "\n";
            return;
        case TreeNode::Kind::Continuous:
            out += "cont " + std::to_string(node.feature) + " " +
                   detail::format_double(node.threshold) + " " +
                   detail::format_double(node.total) + " " + std::to_string(node.predicted) +
                   weights() + "\n";
            break;
        case TreeNode::Kind::Symbolic: {
            out += "sym " + std::to_string(node.feature) + " " +
                   std::to_string(node.branch_values.size());
            for (const auto& value : node.branch_values) out += " " + esc(value);
            out += " " + detail::format_double(node.total) + " " +
                   std::to_string(node.predicted) + weights() + "\n";
            break;
        }
    }
    for (const auto& child : node.children) write_tree(*child, out);
}

class Reader {
public:
    explicit Reader(std::vector<std::vector<std::string>> lines) : lines_(std::move(lines)) {}

    bool done() const { return cursor_ >= lines_.size(); }

    const std::vector<std::string>& next(const std::string& keyword, std::size_t min_fields) {
        if (done()) throw ModelFormatError("model file ends early, expected '" + keyword + "'");
        const auto& line = lines_[cursor_];
        if (line.empty() || line[0] != keyword)
            throw ModelFormatError("model file line " + std::to_string(cursor_ + 3) +
                                   ": expected '" + keyword + "', found '" +
                                   (line.empty() ? "" : line[0]) + "'");
        if (line.size() < min_fields)
            throw ModelFormatError("model file line " + std::to_string(cursor_ + 3) +
                                   ": '" + keyword + "' is truncated");
        ++cursor_;
        return line;
    }

    const std::string& peek_keyword() {
        if (done()) throw ModelFormatError("model file ends early");
        static const std::string empty;
        return lines_[cursor_].empty() ? empty : lines_[cursor_][0];
    }

    std::size_t line_number() const { return cursor_ + 3; }

private:
    std::vector<std::vector<std::string>> lines_;
    std::size_t cursor_ = 0;
};

[[noreturn]] void bad(const Reader& reader, const std::string& what) {
    throw ModelFormatError("model file line " + std::to_string(reader.line_number() - 1) + ": " +
                           what);
}

double read_double(const Reader& reader, const std::string& field) {
    auto v = detail::parse_double(field);
    if (!v) bad(reader, "'" + field + "' is not a number");
    return *v;
}

std::size_t read_size(const Reader& reader, const std::string& field) {
    auto v = detail::parse_int(field);
    if (!v || *v < 0) bad(reader, "'" + field + "' is not a count");
    return static_cast<std::size_t>(*v);
}

std::string read_token(const Reader& reader, const std::string& field) {
    auto v = detail::unescape_token(field);
    if (!v) bad(reader, "'" + field + "' has a malformed escape");
    return *v;
}

std::unique_ptr<TreeNode> read_tree(Reader& reader, std::size_t feature_count,
                                    std::size_t class_count) {
    auto node = std::make_unique<TreeNode>();
    const std::string& keyword = reader.peek_keyword();
    std::size_t fixed = 0;
    if (keyword == "leaf") {
        node->kind = TreeNode::Kind::Leaf;
        fixed = 3;
    } else if (keyword == "cont") {
        node->kind = TreeNode::Kind::Continuous;
        fixed = 5;
    } else if (keyword == "sym") {
        node->kind = TreeNode::Kind::Symbolic;
        fixed = 3;
    } else {
        throw ModelFormatError("model file line " + std::to_string(reader.line_number()) +
                               ": expected a tree node, found '" + keyword + "'");
    }
    auto line = reader.next(keyword, fixed);

    std::size_t at = 1;
    if (keyword == "cont") {
        node->feature = read_size(reader, line[at++]);
        node->threshold = read_double(reader, line[at++]);
    } else if (keyword == "sym") {
        node->feature = read_size(reader, line[at++]);
        std::size_t values = read_size(reader, line[at++]);
        if (values < 2) bad(reader, "a symbolic split needs at least 2 branches");
        if (line.size() < at + values + 2) bad(reader, "'sym' is truncated");
        for (std::size_t b = 0; b < values; ++b)
            node->branch_values.push_back(read_token(reader, line[at++]));
    }
    if (node->kind != TreeNode::Kind::Leaf && node->feature >= feature_count)
        bad(reader, "split feature index out of range");

    if (line.size() != at + 2 + class_count) bad(reader, "node line has the wrong field count");
    node->total = read_double(reader, line[at++]);
    node->predicted = read_size(reader, line[at++]);
    if (node->predicted >= class_count) bad(reader, "predicted class index out of range");
    for (std::size_t c = 0; c < class_count; ++c)
        node->class_weights.push_back(read_double(reader, line[at++]));

    std::size_t children = node->kind == TreeNode::Kind::Leaf ? 0
                           : node->kind == TreeNode::Kind::Continuous
                               ? 2
                               : node->branch_values.size();
    for (std::size_t b = 0; b < children; ++b)
        node->children.push_back(read_tree(reader, feature_count, class_count));
    return node;
}

} // namespace

std::string save_model_string(const CfcModel& model) {
    std::string body;

    body += "schema " + esc(model.schema.missing_token()) + " " +
            std::to_string(model.schema.size()) + "\n";
    for (const auto& feature : model.schema.features()) {
        body += "feature " + esc(feature.name) + " " + to_string(feature.kind);
        if (feature.kind == FeatureKind::Ordinal) {
            body += " " + std::to_string(feature.categories.size());
            for (const auto& category : feature.categories) body += " " + esc(category);
        }
        body += "\n";
    }

    body += "normalization " + std::to_string(model.normalization.ranges.size()) + "\n";
    for (const auto& range : model.normalization.ranges)
        body += "range " + esc(range.feature) + " " + detail::format_double(range.min) + " " +
                detail::format_double(range.max) + "\n";

    body += "weights " + std::to_string(model.weights.bins) + " " +
            std::to_string(model.weights.weights.size()) + "\n";
    for (std::size_t q = 0; q < model.weights.weights.size(); ++q)
        body += "weight " + std::to_string(q) + " " +
                detail::format_double(model.weights.weights[q]) + "\n";

    body += "fcm " + detail::format_double(model.fcm.alpha) + " " +
            detail::format_double(model.fcm.tolerance) + " " +
            std::to_string(model.fcm.max_iterations) + " " + std::to_string(model.fcm.seed) +
            " " +
            (model.fcm.convergence == FcmConvergence::MembershipDelta ? "membership"
                                                                      : "objective") +
            "\n";

    body += "model " + std::to_string(model.k) + " " +
            std::to_string(manipulation_mode_to_int(model.mode)) + "\n";
    if (model.mode == ManipulationMode::T3) {
        body += "subset " + std::to_string(model.subset.names.size()) + " " +
                detail::format_double(model.subset.merit);
        for (const auto& name : model.subset.names) body += " " + esc(name);
        body += "\n";
    }

    const auto& classes = model.classifier.classes();
    body += "classes " + std::to_string(classes.size());
    for (const auto& label : classes) body += " " + esc(label);
    body += "\n";
    body += "totals";
    for (double total : model.classifier.class_totals())
        body += " " + detail::format_double(total);
    body += "\n";

    for (std::size_t q = 0; q < model.schema.size(); ++q) {
        const auto& vocab = model.centroids.vocabulary(q);
        if (vocab.empty()) continue;
        body += "vocab " + std::to_string(q) + " " + std::to_string(vocab.size());
        for (const auto& token : vocab) body += " " + esc(token);
        body += "\n";
    }

    for (std::size_t j = 0; j < model.k; ++j) {
        body += "centroid " + std::to_string(j) + "\n";
        for (std::size_t q = 0; q < model.schema.size(); ++q) {
            const auto& component = model.centroids.at(j, q);
            body += "comp " + std::to_string(q);
            if (component.missing) {
                body += " missing\n";
            } else if (model.schema.at(q).kind == FeatureKind::Symbolic) {
                body += " cats " + std::to_string(component.category_weights.size());
                for (double w : component.category_weights)
                    body += " " + detail::format_double(w);
                body += " " + esc(component.representative) + "\n";
            } else {
                body += " value " + detail::format_double(component.value) + "\n";
            }
        }
    }

    body += "tree\n";
    write_tree(model.classifier.root(), body);
    body += "end\n";

    return std::string(kModelFormatName) + " " + kModelFormatVersion + "\nchecksum " +
           hex64(detail::fnv1a64(body)) + "\n" + body;
}

CfcModel load_model_string(const std::string& text) {
    std::size_t first_break = text.find('\n');
    if (first_break == std::string::npos)
        throw ModelFormatError("not a model file: missing header");
    std::string magic = std::string(detail::trim(text.substr(0, first_break)));
    std::string expected = std::string(kModelFormatName) + " " + kModelFormatVersion;
    if (magic != expected) {
        if (magic.rfind(kModelFormatName, 0) == 0)
            throw ModelFormatError("unsupported model format version '" +
                                   magic.substr(std::string(kModelFormatName).size() + 1) +
                                   "'; this build reads '" + kModelFormatVersion + "'");
        throw ModelFormatError("not a model file: bad header '" + magic + "'");
    }

    std::size_t second_break = text.find('\n', first_break + 1);
    if (second_break == std::string::npos)
        throw ModelFormatError("model file is truncated after the header");
    std::string checksum_line = text.substr(first_break + 1, second_break - first_break - 1);
    auto checksum_fields = detail::split(std::string(detail::trim(checksum_line)), ' ');
    if (checksum_fields.size() != 2 || checksum_fields[0] != "checksum")
        throw ModelFormatError("model file is missing its checksum line");

    std::string body = text.substr(second_break + 1);
    if (hex64(detail::fnv1a64(body)) != checksum_fields[1])
        throw ModelFormatError("model file checksum mismatch: corrupted or truncated content");

    std::vector<std::vector<std::string>> lines;
    for (const auto& raw : detail::split(body, '\n')) {
        auto trimmed = detail::trim(raw);
        if (trimmed.empty()) continue;
        lines.push_back(detail::split(std::string(trimmed), ' '));
    }
    Reader reader(std::move(lines));

    CfcModel model;

    auto schema_line = reader.next("schema", 3);
    std::string missing_token = read_token(reader, schema_line[1]);
    std::size_t m = read_size(reader, schema_line[2]);
    std::vector<FeatureSpec> features;
    for (std::size_t q = 0; q < m; ++q) {
        auto line = reader.next("feature", 3);
        FeatureSpec spec;
        spec.name = read_token(reader, line[1]);
        try {
            spec.kind = feature_kind_from_string(line[2]);
        } catch (const Error&) {
            bad(reader, "unknown feature kind '" + line[2] + "'");
        }
        if (spec.kind == FeatureKind::Ordinal) {
            if (line.size() < 4) bad(reader, "'feature' is truncated");
            std::size_t count = read_size(reader, line[3]);
            if (line.size() != 4 + count) bad(reader, "'feature' has the wrong field count");
            for (std::size_t c = 0; c < count; ++c)
                spec.categories.push_back(read_token(reader, line[4 + c]));
        } else if (line.size() != 3) {
            bad(reader, "'feature' has the wrong field count");
        }
        features.push_back(std::move(spec));
    }
    try {
        model.schema = FeatureSchema(std::move(features), missing_token);
    } catch (const Error& e) {
        throw ModelFormatError(std::string("model file schema is invalid: ") + e.what());
    }

    auto norm_line = reader.next("normalization", 2);
    std::size_t ranges = read_size(reader, norm_line[1]);
    for (std::size_t r = 0; r < ranges; ++r) {
        auto line = reader.next("range", 4);
        NormalizationParams::Range range;
        range.feature = read_token(reader, line[1]);
        range.min = read_double(reader, line[2]);
        range.max = read_double(reader, line[3]);
        if (!model.schema.index_of(range.feature))
            bad(reader, "normalization names unknown feature '" + range.feature + "'");
        model.normalization.ranges.push_back(std::move(range));
    }

    auto weights_line = reader.next("weights", 3);
    model.weights.bins = read_size(reader, weights_line[1]);
    std::size_t weight_count = read_size(reader, weights_line[2]);
    if (weight_count != m) bad(reader, "feature weight count does not match the schema");
    model.weights.weights.assign(m, 0.0);
    for (std::size_t q = 0; q < m; ++q) {
        auto line = reader.next("weight", 3);
        std::size_t index = read_size(reader, line[1]);
        if (index >= m) bad(reader, "feature weight index out of range");
        model.weights.weights[index] = read_double(reader, line[2]);
    }

    auto fcm_line = reader.next("fcm", 6);
    model.fcm.alpha = read_double(reader, fcm_line[1]);
    model.fcm.tolerance = read_double(reader, fcm_line[2]);
    model.fcm.max_iterations = read_size(reader, fcm_line[3]);
    auto seed = detail::parse_uint(fcm_line[4]);
    if (!seed) bad(reader, "'" + fcm_line[4] + "' is not a seed");
    model.fcm.seed = *seed;
    if (fcm_line[5] == "membership")
        model.fcm.convergence = FcmConvergence::MembershipDelta;
    else if (fcm_line[5] == "objective")
        model.fcm.convergence = FcmConvergence::ObjectiveDelta;
    else
        bad(reader, "unknown convergence rule '" + fcm_line[5] + "'");

    auto model_line = reader.next("model", 3);
    model.k = read_size(reader, model_line[1]);
    if (model.k == 0) bad(reader, "cluster count must be positive");
    std::size_t mode = read_size(reader, model_line[2]);
    if (mode < 1 || mode > 3) bad(reader, "unknown manipulation mode");
    model.mode = manipulation_mode_from_int(static_cast<int>(mode));
    model.fcm.k = model.k;

    if (model.mode == ManipulationMode::T3) {
        auto line = reader.next("subset", 3);
        std::size_t count = read_size(reader, line[1]);
        if (count == 0) bad(reader, "the selected subset is empty");
        model.subset.merit = read_double(reader, line[2]);
        if (line.size() != 3 + count) bad(reader, "'subset' has the wrong field count");
        for (std::size_t i = 0; i < count; ++i)
            model.subset.names.push_back(read_token(reader, line[3 + i]));
    }

    auto classes_line = reader.next("classes", 2);
    std::size_t class_count = read_size(reader, classes_line[1]);
    if (class_count == 0) bad(reader, "the class set is empty");
    if (classes_line.size() != 2 + class_count)
        bad(reader, "'classes' has the wrong field count");
    std::vector<std::string> classes;
    for (std::size_t c = 0; c < class_count; ++c)
        classes.push_back(read_token(reader, classes_line[2 + c]));

    auto totals_line = reader.next("totals", 1);
    if (totals_line.size() != 1 + class_count) bad(reader, "'totals' has the wrong field count");
    std::vector<double> totals;
    for (std::size_t c = 0; c < class_count; ++c)
        totals.push_back(read_double(reader, totals_line[1 + c]));

    std::vector<std::vector<std::string>> vocabularies(m);
    while (!reader.done() && reader.peek_keyword() == "vocab") {
        auto line = reader.next("vocab", 3);
        std::size_t q = read_size(reader, line[1]);
        if (q >= m) bad(reader, "vocabulary feature index out of range");
        std::size_t count = read_size(reader, line[2]);
        if (line.size() != 3 + count) bad(reader, "'vocab' has the wrong field count");
        for (std::size_t i = 0; i < count; ++i)
            vocabularies[q].push_back(read_token(reader, line[3 + i]));
    }

    model.centroids = CentroidSet(model.schema, model.k, std::move(vocabularies));
    for (std::size_t j = 0; j < model.k; ++j) {
        auto line = reader.next("centroid", 2);
        if (read_size(reader, line[1]) != j) bad(reader, "centroids are out of order");
        for (std::size_t q = 0; q < m; ++q) {
            auto comp_line = reader.next("comp", 3);
            if (read_size(reader, comp_line[1]) != q)
                bad(reader, "centroid components are out of order");
            auto& component = model.centroids.at(j, q);
            const std::string& tag = comp_line[2];
            if (tag == "missing") {
                component.missing = true;
            } else if (tag == "value") {
                if (comp_line.size() != 4) bad(reader, "'comp' has the wrong field count");
                component.missing = false;
                component.value = read_double(reader, comp_line[3]);
            } else if (tag == "cats") {
                if (comp_line.size() < 4) bad(reader, "'comp' is truncated");
                std::size_t count = read_size(reader, comp_line[3]);
                const auto& vocab = model.centroids.vocabulary(q);
                if (count != vocab.size())
                    bad(reader, "category weights do not match the vocabulary");
                if (comp_line.size() != 5 + count)
                    bad(reader, "'comp' has the wrong field count");
                component.missing = false;
                for (std::size_t i = 0; i < count; ++i)
                    component.category_weights.push_back(read_double(reader, comp_line[4 + i]));
                component.representative = read_token(reader, comp_line[4 + count]);
                bool known = false;
                for (const auto& token : vocab) known = known || token == component.representative;
                if (!known) bad(reader, "representative token is not in the vocabulary");
            } else {
                bad(reader, "unknown component tag '" + tag + "'");
            }
        }
    }

    FeatureSchema classifier_schema = model.classifier_schema();
    reader.next("tree", 1);
    auto root = read_tree(reader, classifier_schema.size(), class_count);
    reader.next("end", 1);
    if (!reader.done())
        throw ModelFormatError("model file has trailing content after the tree");

    model.classifier = Classifier(std::move(classifier_schema), std::move(classes),
                                  std::move(totals), std::move(root));
    return model;
}

void save_model(const CfcModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write model file '" + path + "'");
    std::string text = save_model_string(model);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw IoError("failed while writing model file '" + path + "'");
}

CfcModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read model file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return load_model_string(buffer.str());
}

} // namespace cfc
