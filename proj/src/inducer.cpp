#include "cfc/inducer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "cfc/detail/rng.hpp"
#include "cfc/error.hpp"

namespace cfc {

namespace {

struct Item {
    std::size_t index;
    double weight;
};

double entropy_weighted(const std::vector<double>& class_weights, double total) {
    if (total <= 0.0) return 0.0;
    double h = 0.0;
    for (double w : class_weights) {
        if (w <= 0.0) continue;
        double p = w / total;
        h -= p * std::log2(p);
    }
    return h;
}

std::size_t pick_class(const std::vector<double>& weights, const std::vector<double>& global) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < weights.size(); ++c) {
        if (weights[c] > weights[best] ||
            (weights[c] == weights[best] && global[c] > global[best]))
            best = c;
    }
    return best;
}

// Confidence-limit upper bound on the error count of a leaf that saw n
// training items and misclassified e of them (the pessimistic-pruning
// estimate, interpolated from tabulated normal deviates).
double added_errors(double n, double e, double cf) {
    static const double kVal[] = {0, 0.001, 0.005, 0.01, 0.05, 0.10, 0.20, 0.40, 1.00};
    static const double kDev[] = {4.0, 3.09, 2.58, 2.33, 1.65, 1.28, 0.84, 0.25, 0.00};

    if (e < 1e-6) return n * (1.0 - std::exp(std::log(cf) / n));
    if (e < 0.9999) {
        double val0 = n * (1.0 - std::exp(std::log(cf) / n));
        return val0 + e * (added_errors(n, 1.0, cf) - val0);
    }
    if (e + 0.5 >= n) return 0.67 * (n - e);

    int i = 0;
    while (cf > kVal[i]) ++i;
    double coeff =
        kDev[i - 1] + (kDev[i] - kDev[i - 1]) * (cf - kVal[i - 1]) / (kVal[i] - kVal[i - 1]);
    coeff *= coeff;
    double e5 = e + 0.5;
    double pr = (e5 + coeff / 2.0 + std::sqrt(coeff * (e5 * (1.0 - e5 / n) + coeff / 4.0))) /
                (n + coeff);
    return pr * n - e;
}

struct SplitChoice {
    bool valid = false;
    std::size_t feature = 0;
    double gain = 0.0;
    double ratio = 0.0;
    double threshold = 0.0;
    std::vector<std::string> values;
    bool continuous = false;
};

class Grower {
public:
    Grower(const Dataset& d, const InducerSpec& spec, const std::vector<std::string>& classes)
        : d_(d), spec_(spec), classes_(classes) {
        std::map<std::string, std::size_t> ids;
        for (std::size_t c = 0; c < classes.size(); ++c) ids.emplace(classes[c], c);
        row_class_.resize(d.n());
        for (std::size_t i = 0; i < d.n(); ++i) row_class_[i] = ids.at(d.label(i));
        global_.assign(classes.size(), 0.0);
        for (std::size_t i = 0; i < d.n(); ++i) global_[row_class_[i]] += 1.0;
    }

    const std::vector<double>& global_totals() const { return global_; }

    std::unique_ptr<TreeNode> grow(const std::vector<Item>& items) {
        auto node = std::make_unique<TreeNode>();
        node->class_weights.assign(classes_.size(), 0.0);
        for (const auto& it : items) node->class_weights[row_class_[it.index]] += it.weight;
        node->total = 0.0;
        for (double w : node->class_weights) node->total += w;
        node->predicted = pick_class(node->class_weights, global_);

        std::size_t live_classes = 0;
        for (double w : node->class_weights)
            if (w > 1e-12) ++live_classes;
        if (live_classes <= 1 || node->total < 2.0 * static_cast<double>(spec_.min_leaf))
            return node;

        SplitChoice choice = select_split(items, *node);
        if (!choice.valid) return node;

        apply_split(items, *node, choice);
        return node;
    }

private:
    SplitChoice select_split(const std::vector<Item>& items, const TreeNode& node) {
        std::vector<SplitChoice> candidates;
        for (std::size_t q = 0; q < d_.m(); ++q) {
            SplitChoice c = d_.schema().at(q).kind == FeatureKind::Continuous
                                ? evaluate_continuous(items, q, node)
                                : evaluate_symbolic(items, q, node);
            if (c.valid) candidates.push_back(std::move(c));
        }
        if (candidates.empty()) return {};

        double average = 0.0;
        for (const auto& c : candidates) average += c.gain;
        average /= static_cast<double>(candidates.size());

        SplitChoice best;
        double best_ratio = 0.0;
        for (auto& c : candidates) {
            if (c.gain < average - 1e-3) continue;
            if (c.ratio > best_ratio) {
                best_ratio = c.ratio;
                best = std::move(c);
            }
        }
        return best;
    }

    SplitChoice evaluate_symbolic(const std::vector<Item>& items, std::size_t q,
                                  const TreeNode& node) {
        std::map<std::string, std::pair<double, std::vector<double>>> branches;
        double known_w = 0.0;
        std::vector<double> known_cw(classes_.size(), 0.0);
        for (const auto& it : items) {
            const Cell& cell = d_.row(it.index)[q];
            if (!cell.is_category()) continue;
            auto& [bw, bcw] = branches[cell.category()];
            if (bcw.empty()) bcw.assign(classes_.size(), 0.0);
            bw += it.weight;
            bcw[row_class_[it.index]] += it.weight;
            known_w += it.weight;
            known_cw[row_class_[it.index]] += it.weight;
        }
        if (branches.size() < 2 || known_w <= 0.0) return {};
        for (const auto& [token, branch] : branches)
            if (branch.first < static_cast<double>(spec_.min_leaf)) return {};

        double info = entropy_weighted(known_cw, known_w);
        double cond = 0.0;
        for (const auto& [token, branch] : branches)
            cond += (branch.first / known_w) * entropy_weighted(branch.second, branch.first);

        SplitChoice c;
        c.valid = true;
        c.feature = q;
        c.gain = (known_w / node.total) * (info - cond);
        double split_info = 0.0;
        for (const auto& [token, branch] : branches) {
            double p = branch.first / node.total;
            split_info -= p * std::log2(p);
            c.values.push_back(token);
        }
        double miss_w = node.total - known_w;
        if (miss_w > 0.0) {
            double p = miss_w / node.total;
            split_info -= p * std::log2(p);
        }
        if (split_info <= 0.0) return {};
        c.ratio = c.gain / split_info;
        return c;
    }

    SplitChoice evaluate_continuous(const std::vector<Item>& items, std::size_t q,
                                    const TreeNode& node) {
        std::map<double, std::pair<double, std::vector<double>>> by_value;
        double known_w = 0.0;
        std::vector<double> known_cw(classes_.size(), 0.0);
        for (const auto& it : items) {
            const Cell& cell = d_.row(it.index)[q];
            if (!cell.is_number()) continue;
            auto& [vw, vcw] = by_value[cell.number()];
            if (vcw.empty()) vcw.assign(classes_.size(), 0.0);
            vw += it.weight;
            vcw[row_class_[it.index]] += it.weight;
            known_w += it.weight;
            known_cw[row_class_[it.index]] += it.weight;
        }
        if (by_value.size() < 2 || known_w <= 0.0) return {};

        double min_split =
            0.1 * known_w / static_cast<double>(classes_.size());
        min_split = std::clamp(min_split, static_cast<double>(spec_.min_leaf), 25.0);

        double info = entropy_weighted(known_cw, known_w);
        double left_w = 0.0;
        std::vector<double> left_cw(classes_.size(), 0.0);
        double best_cond = std::numeric_limits<double>::infinity();
        double lower = 0.0, upper = 0.0;
        std::size_t tries = 0;

        auto it = by_value.begin();
        for (std::size_t step = 0; step + 1 < by_value.size(); ++step, ++it) {
            left_w += it->second.first;
            for (std::size_t cidx = 0; cidx < classes_.size(); ++cidx)
                left_cw[cidx] += it->second.second[cidx];
            double right_w = known_w - left_w;
            if (left_w < min_split) continue;
            if (right_w < min_split) break;
            ++tries;
            std::vector<double> right_cw(classes_.size());
            for (std::size_t cidx = 0; cidx < classes_.size(); ++cidx)
                right_cw[cidx] = known_cw[cidx] - left_cw[cidx];
            double cond = (left_w / known_w) * entropy_weighted(left_cw, left_w) +
                          (right_w / known_w) * entropy_weighted(right_cw, right_w);
            if (cond < best_cond) {
                best_cond = cond;
                lower = it->first;
                upper = std::next(it)->first;
            }
        }
        if (tries == 0) return {};

        SplitChoice c;
        c.feature = q;
        c.continuous = true;
        // Charge the threshold search for the splits it tried, per the usual
        // minimum-description-length correction.
        c.gain = (known_w / node.total) * (info - best_cond) -
                 std::log2(static_cast<double>(tries)) / known_w;
        if (c.gain <= 0.0) return {};
        c.threshold = (lower + upper) / 2.0;
        if (c.threshold >= upper) c.threshold = lower;

        double below_w = 0.0;
        for (const auto& [value, bucket] : by_value)
            if (value <= c.threshold) below_w += bucket.first;
        double above_w = known_w - below_w;
        if (below_w <= 0.0 || above_w <= 0.0) return {};

        double split_info = 0.0;
        for (double part : {below_w, above_w, node.total - known_w}) {
            if (part <= 0.0) continue;
            double p = part / node.total;
            split_info -= p * std::log2(p);
        }
        if (split_info <= 0.0) return {};
        c.ratio = c.gain / split_info;
        c.valid = true;
        return c;
    }

    void apply_split(const std::vector<Item>& items, TreeNode& node, SplitChoice& choice) {
        std::size_t branch_count = choice.continuous ? 2 : choice.values.size();
        std::map<std::string, std::size_t> branch_of;
        for (std::size_t b = 0; b < choice.values.size(); ++b)
            branch_of.emplace(choice.values[b], b);

        std::vector<std::vector<Item>> parts(branch_count);
        std::vector<double> part_w(branch_count, 0.0);
        std::vector<Item> missing;
        double known_w = 0.0;
        for (const auto& it : items) {
            const Cell& cell = d_.row(it.index)[choice.feature];
            int branch = -1;
            if (choice.continuous) {
                if (cell.is_number())
                    branch = cell.number() <= choice.threshold ? 0 : 1;
            } else if (cell.is_category()) {
                auto found = branch_of.find(cell.category());
                if (found != branch_of.end()) branch = static_cast<int>(found->second);
            }
            if (branch < 0) {
                missing.push_back(it);
                continue;
            }
            parts[branch].push_back(it);
            part_w[branch] += it.weight;
            known_w += it.weight;
        }
        for (const auto& it : missing)
            for (std::size_t b = 0; b < branch_count; ++b) {
                double share = it.weight * part_w[b] / known_w;
                if (share > 0.0) parts[b].push_back({it.index, share});
            }

        node.kind = choice.continuous ? TreeNode::Kind::Continuous : TreeNode::Kind::Symbolic;
        node.feature = choice.feature;
        node.threshold = choice.threshold;
        node.branch_values = std::move(choice.values);
        for (std::size_t b = 0; b < branch_count; ++b) node.children.push_back(grow(parts[b]));
    }

    const Dataset& d_;
    const InducerSpec& spec_;
    const std::vector<std::string>& classes_;
    std::vector<std::size_t> row_class_;
    std::vector<double> global_;
};

// Bottom-up pessimistic pruning; returns the estimated error count of the
// (possibly replaced) subtree.
double prune(TreeNode& node, double cf) {
    double leaf_errors = node.total - node.class_weights[node.predicted];
    double leaf_estimate = leaf_errors + added_errors(node.total, leaf_errors, cf);
    if (node.kind == TreeNode::Kind::Leaf) return leaf_estimate;

    double subtree_estimate = 0.0;
    for (auto& child : node.children) subtree_estimate += prune(*child, cf);

    if (leaf_estimate <= subtree_estimate + 0.1) {
        node.kind = TreeNode::Kind::Leaf;
        node.children.clear();
        node.branch_values.clear();
        return leaf_estimate;
    }
    return subtree_estimate;
}

std::size_t count_nodes(const TreeNode& node) {
    std::size_t n = 1;
    for (const auto& child : node.children) n += count_nodes(*child);
    return n;
}

void classify_walk(const TreeNode& node, const std::vector<Cell>& row, double weight,
                   std::vector<double>& out) {
    if (node.kind == TreeNode::Kind::Leaf) {
        for (std::size_t c = 0; c < out.size(); ++c)
            out[c] += weight * node.class_weights[c] / node.total;
        return;
    }

    const Cell& cell = row[node.feature];
    int branch = -1;
    if (node.kind == TreeNode::Kind::Continuous) {
        if (cell.is_number()) branch = cell.number() <= node.threshold ? 0 : 1;
    } else if (cell.is_category()) {
        auto it = std::find(node.branch_values.begin(), node.branch_values.end(),
                            cell.category());
        if (it != node.branch_values.end())
            branch = static_cast<int>(it - node.branch_values.begin());
    }

    if (branch >= 0) {
        classify_walk(*node.children[branch], row, weight, out);
        return;
    }
    // Missing value or a category never seen at this node: spread the weight
    // across all branches in proportion to their training mass.
    for (const auto& child : node.children)
        classify_walk(*child, row, weight * child->total / node.total, out);
}

} // namespace

void InducerSpec::validate() const {
    if (!(confidence > 0.0) || confidence > 0.5)
        throw ConfigError("pruning confidence must lie in (0, 0.5]");
    if (min_leaf < 1) throw ConfigError("minimum instances per leaf must be at least 1");
}

Classifier::Classifier(FeatureSchema schema, std::vector<std::string> classes,
                       std::vector<double> class_totals, std::unique_ptr<TreeNode> root)
    : schema_(std::move(schema)),
      classes_(std::move(classes)),
      class_totals_(std::move(class_totals)),
      root_(std::move(root)) {}

std::size_t Classifier::node_count() const { return root_ ? count_nodes(*root_) : 0; }

Classifier::Outcome Classifier::classify(const std::vector<Cell>& row) const {
    if (!root_) throw DataError("classifier has no tree");
    if (row.size() != schema_.size())
        throw DataError("instance has " + std::to_string(row.size()) + " features, schema has " +
                        std::to_string(schema_.size()));
    std::vector<double> probs(classes_.size(), 0.0);
    classify_walk(*root_, row, 1.0, probs);

    std::size_t best = pick_class(probs, class_totals_);
    return {classes_[best], std::move(probs)};
}

std::unique_ptr<TreeNode> clone_tree(const TreeNode& node) {
    auto copy = std::make_unique<TreeNode>();
    copy->kind = node.kind;
    copy->class_weights = node.class_weights;
    copy->total = node.total;
    copy->predicted = node.predicted;
    copy->feature = node.feature;
    copy->threshold = node.threshold;
    copy->branch_values = node.branch_values;
    for (const auto& child : node.children) copy->children.push_back(clone_tree(*child));
    return copy;
}

Classifier induce(const Dataset& d, const InducerSpec& spec) {
    spec.validate();
    if (d.n() == 0) throw DataError("cannot induce a classifier from an empty dataset");

    Grower grower(d, spec, d.classes());
    std::vector<Item> all;
    all.reserve(d.n());
    for (std::size_t i = 0; i < d.n(); ++i) all.push_back({i, 1.0});
    auto root = grower.grow(all);
    if (spec.prune) prune(*root, spec.confidence);
    return Classifier(d.schema(), d.classes(), grower.global_totals(), std::move(root));
}

std::vector<FoldSplit> stratified_folds(std::size_t n, std::span<const std::string> strata,
                                        std::size_t q, std::uint64_t seed) {
    if (q < 2) throw ConfigError("cross-validation needs at least 2 folds");
    if (q > n)
        throw ConfigError("cannot form " + std::to_string(q) + " folds from " +
                          std::to_string(n) + " instances");
    if (strata.size() != n) throw DataError("stratum tags do not cover the dataset");

    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < n; ++i) groups[std::string(strata[i])].push_back(i);

    std::vector<std::vector<std::size_t>> folds(q);
    std::size_t position = 0;
    for (auto& [name, members] : groups) {
        detail::SplitMix64 rng(detail::derive_seed(seed, "fold:" + name));
        detail::shuffle(members, rng);
        for (std::size_t idx : members) folds[position++ % q].push_back(idx);
    }

    std::vector<FoldSplit> out(q);
    for (std::size_t f = 0; f < q; ++f) {
        std::sort(folds[f].begin(), folds[f].end());
        out[f].test = folds[f];
        std::vector<bool> in_test(n, false);
        for (std::size_t idx : folds[f]) in_test[idx] = true;
        for (std::size_t i = 0; i < n; ++i)
            if (!in_test[i]) out[f].train.push_back(i);
    }
    return out;
}

EvaluationReport evaluate(std::span<const std::string> predictions,
                          std::span<const std::string> truth,
                          const std::vector<std::string>& classes) {
    if (predictions.size() != truth.size())
        throw DataError("predictions and truth have different lengths");
    if (truth.empty()) throw DataError("cannot evaluate an empty prediction set");

    std::map<std::string, std::size_t> ids;
    for (std::size_t c = 0; c < classes.size(); ++c) ids.emplace(classes[c], c);

    EvaluationReport r;
    r.classes = classes;
    r.total = truth.size();
    r.support.assign(classes.size(), 0);
    r.confusion.assign(classes.size(), std::vector<std::size_t>(classes.size(), 0));

    for (std::size_t i = 0; i < truth.size(); ++i) {
        auto t = ids.find(truth[i]);
        auto p = ids.find(predictions[i]);
        if (t == ids.end()) throw DataError("label '" + truth[i] + "' is not in the class set");
        if (p == ids.end())
            throw DataError("prediction '" + predictions[i] + "' is not in the class set");
        ++r.support[t->second];
        ++r.confusion[t->second][p->second];
    }

    const double n = static_cast<double>(r.total);
    double correct = 0.0;
    for (std::size_t c = 0; c < classes.size(); ++c) correct += r.confusion[c][c];
    r.accuracy = correct / n;

    r.tpr.resize(classes.size());
    r.fpr.resize(classes.size());
    double tpr_mass = 0.0, tpr_sum = 0.0, fpr_mass = 0.0, fpr_sum = 0.0;
    for (std::size_t c = 0; c < classes.size(); ++c) {
        std::size_t predicted_as = 0;
        for (std::size_t t = 0; t < classes.size(); ++t) predicted_as += r.confusion[t][c];

        if (r.support[c] > 0) {
            r.tpr[c] = static_cast<double>(r.confusion[c][c]) / r.support[c];
            tpr_sum += static_cast<double>(r.support[c]) * *r.tpr[c];
            tpr_mass += static_cast<double>(r.support[c]);
        }
        std::size_t outside = r.total - r.support[c];
        if (outside > 0) {
            r.fpr[c] = static_cast<double>(predicted_as - r.confusion[c][c]) / outside;
            fpr_sum += static_cast<double>(r.support[c]) * *r.fpr[c];
            fpr_mass += static_cast<double>(r.support[c]);
        }
    }
    r.weighted_tpr = tpr_mass > 0.0 ? tpr_sum / tpr_mass : 0.0;
    r.weighted_fpr = fpr_mass > 0.0 ? fpr_sum / fpr_mass : 0.0;
    return r;
}

CrossValidation cross_validate(const Dataset& d, const InducerSpec& spec, std::size_t q,
                               std::span<const std::string> strata, std::uint64_t seed) {
    std::vector<std::string> fallback;
    if (strata.empty()) {
        fallback = d.labels();
        strata = fallback;
    }
    auto folds = stratified_folds(d.n(), strata, q, seed);

    CrossValidation cv;
    for (const auto& fold : folds) {
        std::vector<std::vector<Cell>> rows;
        std::vector<std::string> labels;
        rows.reserve(fold.train.size());
        for (std::size_t idx : fold.train) {
            rows.push_back(d.row(idx));
            labels.push_back(d.label(idx));
        }
        Classifier cls = induce(Dataset(d.schema(), std::move(rows), std::move(labels)), spec);

        std::vector<std::string> predictions, truths;
        predictions.reserve(fold.test.size());
        for (std::size_t idx : fold.test) {
            predictions.push_back(cls.classify(d.row(idx)).label);
            truths.push_back(d.label(idx));
        }
        cv.folds.push_back(evaluate(predictions, truths, d.classes()));
        cv.mean_accuracy += cv.folds.back().accuracy;
    }
    cv.mean_accuracy /= static_cast<double>(cv.folds.size());
    return cv;
}

} // namespace cfc
