#include <doctest.h>

#include <cmath>

#include "cfc/fcm.hpp"
#include "support/fixtures.hpp"

using namespace cfc;

namespace {

FeatureWeights unit_weights(std::size_t m) {
    FeatureWeights w;
    w.weights.assign(m, 1.0);
    return w;
}

// Distance recomputed straight from the four-branch definition, bypassing the
// library's dispatch.
double distance_oracle(const std::vector<Cell>& row, const CentroidSet& v, std::size_t j,
                       const FeatureWeights& weights) {
    double total = 0.0;
    const auto& schema = v.schema();
    for (std::size_t q = 0; q < schema.size(); ++q) {
        const auto& comp = v.at(j, q);
        const auto& f = schema.at(q);
        double d;
        if (row[q].is_missing() || comp.missing) {
            d = 1.0;
        } else if (f.kind == FeatureKind::Continuous) {
            d = row[q].number() > comp.value ? row[q].number() - comp.value
                                             : comp.value - row[q].number();
        } else if (f.kind == FeatureKind::Symbolic) {
            d = row[q].category() == comp.representative ? 0.0 : 1.0;
        } else {
            double r = static_cast<double>(*f.ordinal_rank(row[q].category()));
            d = std::fabs(r - comp.value) / (static_cast<double>(f.categories.size()) - 1.0);
        }
        total += weights.weights[q] * d * d;
    }
    return total;
}

// Closed-form membership row: (1/d^2)^(1/(alpha-1)), normalized.
std::vector<double> membership_oracle(const std::vector<double>& d2, double alpha) {
    std::vector<double> u(d2.size());
    double sum = 0.0;
    for (std::size_t j = 0; j < d2.size(); ++j) {
        u[j] = std::pow(1.0 / d2[j], 1.0 / (alpha - 1.0));
        sum += u[j];
    }
    for (auto& x : u) x /= sum;
    return u;
}

Dataset one_feature(std::vector<double> xs) {
    FeatureSchema schema({{"x", FeatureKind::Continuous, {}}});
    std::vector<std::vector<Cell>> rows;
    for (double x : xs) rows.push_back({Cell::number(x)});
    return Dataset(schema, std::move(rows), std::vector<std::string>(xs.size(), "l"));
}

MembershipMatrix matrix(std::size_t n, std::size_t k, const std::vector<double>& entries) {
    MembershipMatrix w(n, k);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < k; ++j) w.at(i, j) = entries[i * k + j];
    return w;
}

} // namespace

TEST_CASE("config validation") {
    FcmConfig c;
    CHECK_NOTHROW(c.validate());
    c.k = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = FcmConfig{};
    c.alpha = 1.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = FcmConfig{};
    c.tolerance = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = FcmConfig{};
    c.max_iterations = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("per-feature distances follow the four branches") {
    FeatureSpec cont{"c", FeatureKind::Continuous, {}};
    FeatureSpec sym{"s", FeatureKind::Symbolic, {}};
    FeatureSpec ord{"o", FeatureKind::Ordinal, {"a", "b", "c", "d", "e"}};

    CentroidSet::Component v;
    v.missing = false;

    SUBCASE("continuous absolute difference") {
        v.value = 0.7;
        CHECK(feature_distance(Cell::number(0.7), v, cont) == 0.0);
        CHECK(feature_distance(Cell::number(0.2), v, cont) == doctest::Approx(0.5));
    }
    SUBCASE("symbolic representative match") {
        v.representative = "udp";
        CHECK(feature_distance(Cell::category("tcp"), v, sym) == 1.0);
        CHECK(feature_distance(Cell::category("udp"), v, sym) == 0.0);
    }
    SUBCASE("ordinal rank distance") {
        v.value = 3.0;
        CHECK(feature_distance(Cell::category("b"), v, ord) == doctest::Approx(0.5));
        CHECK(feature_distance(Cell::category("d"), v, ord) == 0.0);
    }
    SUBCASE("missing on either side") {
        v.value = 0.5;
        CHECK(feature_distance(Cell::missing(), v, cont) == 1.0);
        CentroidSet::Component gone;
        CHECK(feature_distance(Cell::number(0.5), gone, cont) == 1.0);
    }
}

TEST_CASE("distance_squared is the weighted sum of squares") {
    FeatureSchema schema({{"a", FeatureKind::Continuous, {}},
                          {"b", FeatureKind::Continuous, {}}});
    CentroidSet v(schema, 1, {{}, {}});
    v.at(0, 0) = {false, 0.5, {}, ""};
    v.at(0, 1) = {false, 0.0, {}, ""};
    FeatureWeights w;
    w.weights = {2.0, 1.0};
    std::vector<Cell> row = {Cell::number(1.0), Cell::number(1.0)};
    CHECK(distance_squared(row, v, 0, w) == doctest::Approx(1.5).epsilon(1e-12));

    std::vector<Cell> same = {Cell::number(0.5), Cell::number(0.0)};
    CHECK(distance_squared(same, v, 0, w) == 0.0);
}

TEST_CASE("distance_squared matches the oracle on mixed data") {
    auto d = fixtures::mixed_dataset();
    auto weights = compute_feature_weights(d, 10);
    FcmConfig cfg;
    cfg.k = 3;
    cfg.seed = 5;
    auto result = fit(d, cfg, weights);
    for (std::size_t i = 0; i < d.n(); ++i)
        for (std::size_t j = 0; j < cfg.k; ++j)
            CHECK(distance_squared(d.row(i), result.centroids, j, weights) ==
                  doctest::Approx(distance_oracle(d.row(i), result.centroids, j, weights))
                      .epsilon(1e-12));
}

TEST_CASE("distance_squared is zero exactly on weighted agreement") {
    FeatureSchema schema({{"a", FeatureKind::Continuous, {}},
                          {"b", FeatureKind::Continuous, {}}});
    CentroidSet v(schema, 1, {{}, {}});
    v.at(0, 0) = {false, 0.3, {}, ""};
    v.at(0, 1) = {false, 0.9, {}, ""};
    FeatureWeights w;
    w.weights = {1.0, 0.0};
    std::vector<Cell> agrees_weighted = {Cell::number(0.3), Cell::number(0.1)};
    CHECK(distance_squared(agrees_weighted, v, 0, w) == 0.0);
    std::vector<Cell> differs = {Cell::number(0.4), Cell::number(0.9)};
    CHECK(distance_squared(differs, v, 0, w) > 0.0);
}

TEST_CASE("membership updates") {
    Dataset d = one_feature({0.0, 1.0, 0.5});
    FcmConfig cfg;
    cfg.k = 2;
    auto w = unit_weights(1);

    CentroidSet v(d.schema(), 2, {{}});
    v.at(0, 0) = {false, 0.0, {}, ""};
    v.at(1, 0) = {false, 1.0, {}, ""};

    MembershipMatrix m = update_memberships(d, v, cfg, w);

    SUBCASE("singularity pins coincident points") {
        CHECK(m.at(0, 0) == 1.0);
        CHECK(m.at(0, 1) == 0.0);
        CHECK(m.at(1, 0) == 0.0);
        CHECK(m.at(1, 1) == 1.0);
    }
    SUBCASE("equidistant point splits evenly") {
        CHECK(m.at(2, 0) == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(m.at(2, 1) == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("rows are stochastic") {
        for (std::size_t i = 0; i < d.n(); ++i)
            CHECK(std::fabs(m.row_sum(i) - 1.0) < 1e-9);
    }
}

TEST_CASE("membership follows the closed form with alpha = 3") {
    // d1^2 = 1, d2^2 = 4  ->  w1 = 2/3, w2 = 1/3.
    Dataset d = one_feature({0.0});
    FcmConfig cfg;
    cfg.k = 2;
    FeatureWeights w = unit_weights(1);
    CentroidSet v(d.schema(), 2, {{}});
    v.at(0, 0) = {false, 1.0, {}, ""};
    v.at(1, 0) = {false, 2.0, {}, ""};
    MembershipMatrix m = update_memberships(d, v, cfg, w);
    CHECK(m.at(0, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(m.at(0, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("memberships match the closed-form oracle elementwise") {
    auto d = fixtures::mixed_dataset();
    auto weights = compute_feature_weights(d, 10);
    FcmConfig cfg;
    cfg.k = 3;
    cfg.seed = 11;
    auto result = fit(d, cfg, weights);
    MembershipMatrix m = update_memberships(d, result.centroids, cfg, weights);
    for (std::size_t i = 0; i < d.n(); ++i) {
        std::vector<double> d2(cfg.k);
        bool singular = false;
        for (std::size_t j = 0; j < cfg.k; ++j) {
            d2[j] = distance_oracle(d.row(i), result.centroids, j, weights);
            singular = singular || d2[j] == 0.0;
        }
        if (singular) continue;
        auto expect = membership_oracle(d2, cfg.alpha);
        for (std::size_t j = 0; j < cfg.k; ++j)
            CHECK(m.at(i, j) == doctest::Approx(expect[j]).epsilon(1e-12));
    }
}

TEST_CASE("membership matrix is scale invariant in the feature weights") {
    auto d = fixtures::mixed_dataset();
    auto weights = compute_feature_weights(d, 10);
    FcmConfig cfg;
    cfg.k = 2;
    cfg.seed = 3;
    auto result = fit(d, cfg, weights);

    FeatureWeights scaled = weights;
    for (auto& g : scaled.weights) g *= 7.5;
    MembershipMatrix a = update_memberships(d, result.centroids, cfg, weights);
    MembershipMatrix b = update_memberships(d, result.centroids, cfg, scaled);
    for (std::size_t i = 0; i < d.n(); ++i)
        for (std::size_t j = 0; j < cfg.k; ++j)
            CHECK(a.at(i, j) == doctest::Approx(b.at(i, j)).epsilon(1e-12));
}

TEST_CASE("centroid updates") {
    FcmConfig cfg;
    cfg.k = 2;

    SUBCASE("uniform memberships give the unweighted mean") {
        Dataset d = one_feature({0.0, 0.2, 0.4, 0.6});
        cfg.k = 1;
        MembershipMatrix w = matrix(4, 1, {1, 1, 1, 1});
        CentroidSet v = update_centroids(d, w, cfg);
        CHECK(v.at(0, 0).value == doctest::Approx(0.3).epsilon(1e-12));
    }
    SUBCASE("single-support cluster sits on its point") {
        Dataset d = one_feature({0.25, 0.75});
        MembershipMatrix w = matrix(2, 2, {1, 0, 0, 1});
        CentroidSet v = update_centroids(d, w, cfg);
        CHECK(v.at(0, 0).value == 0.25);
        CHECK(v.at(1, 0).value == 0.75);
    }
    SUBCASE("alpha-powered weighted mean") {
        // {0, 1} with memberships {0.8, 0.2}: 0.2^3 / (0.8^3 + 0.2^3) = 0.008 / 0.52.
        Dataset d = one_feature({0.0, 1.0});
        MembershipMatrix w = matrix(2, 2, {0.8, 0.2, 0.2, 0.8});
        CentroidSet v = update_centroids(d, w, cfg);
        CHECK(v.at(0, 0).value == doctest::Approx(0.008 / 0.52).epsilon(1e-12));
        CHECK(v.at(1, 0).value == doctest::Approx(0.512 / 0.52).epsilon(1e-12));
    }
    SUBCASE("zero-mass cluster raises the degenerate error") {
        Dataset d = one_feature({0.0, 1.0});
        MembershipMatrix w = matrix(2, 2, {1, 0, 1, 0});
        CHECK_THROWS_AS(update_centroids(d, w, cfg), DegenerateClusterError);
        try {
            update_centroids(d, w, cfg);
        } catch (const DegenerateClusterError& e) {
            CHECK(e.cluster() == 1);
        }
    }
}

TEST_CASE("symbolic centroid components are weighted frequencies") {
    auto d = fixtures::mixed_dataset();
    FcmConfig cfg;
    cfg.k = 2;
    std::vector<double> entries;
    for (std::size_t i = 0; i < d.n(); ++i) {
        entries.push_back(i < 4 ? 0.9 : 0.1);
        entries.push_back(i < 4 ? 0.1 : 0.9);
    }
    CentroidSet v = update_centroids(d, matrix(d.n(), 2, entries), cfg);

    std::size_t proto = *d.schema().index_of("protocol");
    for (std::size_t j = 0; j < 2; ++j) {
        const auto& comp = v.at(j, proto);
        REQUIRE_FALSE(comp.missing);
        double sum = 0.0;
        for (double cw : comp.category_weights) {
            CHECK(cw >= 0.0);
            sum += cw;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
        const auto& vocab = v.vocabulary(proto);
        std::size_t best = 0;
        for (std::size_t c = 0; c < vocab.size(); ++c)
            if (comp.category_weights[c] > comp.category_weights[best]) best = c;
        CHECK(comp.representative == vocab[best]);
    }
    // First four rows are dominated by tcp, last four by udp.
    CHECK(v.at(0, proto).representative == "tcp");
    CHECK(v.at(1, proto).representative == "udp");
}

TEST_CASE("missing cells are excluded from centroid sums") {
    FeatureSchema schema({{"a", FeatureKind::Continuous, {}}});
    std::vector<std::vector<Cell>> rows = {
        {Cell::number(0.2)}, {Cell::missing()}, {Cell::number(0.4)}};
    Dataset d(schema, rows, {"x", "x", "x"});
    FcmConfig cfg;
    cfg.k = 1;
    CentroidSet v = update_centroids(d, matrix(3, 1, {1, 1, 1}), cfg);
    CHECK(v.at(0, 0).value == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("objective is the alpha-weighted sum of squared distances") {
    auto d = fixtures::mixed_dataset();
    auto weights = compute_feature_weights(d, 10);
    FcmConfig cfg;
    cfg.k = 2;
    cfg.seed = 21;
    auto result = fit(d, cfg, weights);

    double naive = 0.0;
    for (std::size_t i = 0; i < d.n(); ++i)
        for (std::size_t j = 0; j < cfg.k; ++j)
            naive += std::pow(result.memberships.at(i, j), cfg.alpha) *
                     distance_oracle(d.row(i), result.centroids, j, weights);

    double f = objective(d, result.memberships, result.centroids, cfg, weights);
    CHECK(f == doctest::Approx(naive).epsilon(1e-12));
    CHECK(f >= 0.0);
    CHECK(std::isfinite(f));
}

TEST_CASE("objective is zero when every point sits on its centroid") {
    Dataset d = one_feature({0.0, 1.0});
    FcmConfig cfg;
    cfg.k = 2;
    CentroidSet v(d.schema(), 2, {{}});
    v.at(0, 0) = {false, 0.0, {}, ""};
    v.at(1, 0) = {false, 1.0, {}, ""};
    MembershipMatrix w = matrix(2, 2, {1, 0, 0, 1});
    CHECK(objective(d, w, v, cfg, unit_weights(1)) == 0.0);
}

TEST_CASE("fit separates two blobs") {
    auto d = fixtures::blob_dataset(10, {0.1, 0.9}, 17);
    FcmConfig cfg;
    cfg.k = 2;
    cfg.seed = 4;
    auto result = fit(d, cfg, unit_weights(1));
    CHECK(result.converged);

    auto argmax = [&](std::size_t i) {
        return result.memberships.at(i, 0) > result.memberships.at(i, 1) ? 0 : 1;
    };
    int first = argmax(0);
    for (std::size_t i = 0; i < 10; ++i) CHECK(argmax(i) == first);
    for (std::size_t i = 10; i < 20; ++i) CHECK(argmax(i) == 1 - first);
}

TEST_CASE("fit with one cluster forces full membership") {
    auto d = fixtures::blob_dataset(6, {0.4}, 3);
    FcmConfig cfg;
    cfg.k = 1;
    auto result = fit(d, cfg, unit_weights(1));
    for (std::size_t i = 0; i < d.n(); ++i) CHECK(result.memberships.at(i, 0) == 1.0);

    double mean = 0.0;
    for (std::size_t i = 0; i < d.n(); ++i) mean += d.row(i)[0].number();
    mean /= static_cast<double>(d.n());
    CHECK(result.centroids.at(0, 0).value == doctest::Approx(mean).epsilon(1e-12));
}

TEST_CASE("fit is deterministic for a fixed seed") {
    auto d = fixtures::mixed_dataset();
    auto weights = compute_feature_weights(d, 10);
    FcmConfig cfg;
    cfg.k = 3;
    cfg.seed = 123;
    auto a = fit(d, cfg, weights);
    auto b = fit(d, cfg, weights);
    CHECK(a.iterations == b.iterations);
    CHECK(a.memberships.data() == b.memberships.data());
    for (std::size_t j = 0; j < cfg.k; ++j)
        for (std::size_t q = 0; q < d.m(); ++q) {
            CHECK(a.centroids.at(j, q).value == b.centroids.at(j, q).value);
            CHECK(a.centroids.at(j, q).representative == b.centroids.at(j, q).representative);
            CHECK(a.centroids.at(j, q).category_weights == b.centroids.at(j, q).category_weights);
        }
}

TEST_CASE("fit objective trace never increases") {
    auto blob = fixtures::blob_dataset(8, {0.2, 0.5, 0.8}, 29, 0.08);
    auto mixed = fixtures::mixed_dataset();
    auto mixed_w = compute_feature_weights(mixed, 10);
    struct Case {
        const Dataset* d;
        FeatureWeights w;
        std::size_t k;
    };
    std::vector<Case> cases = {{&blob, unit_weights(1), 3}, {&mixed, mixed_w, 2},
                               {&mixed, mixed_w, 4}};
    for (auto& c : cases) {
        for (std::uint64_t seed : {1, 2, 3}) {
            FcmConfig cfg;
            cfg.k = c.k;
            cfg.seed = seed;
            auto result = fit(*c.d, cfg, c.w);
            for (std::size_t t = 1; t < result.objective_trace.size(); ++t)
                CHECK(result.objective_trace[t] <= result.objective_trace[t - 1] + 1e-9);
        }
    }
}

TEST_CASE("final memberships are reproducible from the final centroids") {
    auto d = fixtures::mixed_dataset();
    auto weights = compute_feature_weights(d, 10);
    FcmConfig cfg;
    cfg.k = 3;
    cfg.seed = 77;
    auto result = fit(d, cfg, weights);
    MembershipMatrix again = update_memberships(d, result.centroids, cfg, weights);
    CHECK(again.data() == result.memberships.data());
}

TEST_CASE("fit rejects more clusters than instances") {
    auto d = one_feature({0.1, 0.2});
    FcmConfig cfg;
    cfg.k = 3;
    CHECK_THROWS_AS(fit(d, cfg, unit_weights(1)), DataError);
}

TEST_CASE("fit needs k distinct instances") {
    auto d = one_feature({0.5, 0.5, 0.5});
    FcmConfig cfg;
    cfg.k = 2;
    CHECK_THROWS_AS(fit(d, cfg, unit_weights(1)), DataError);
}

TEST_CASE("objective-delta convergence is available") {
    auto d = fixtures::blob_dataset(10, {0.15, 0.85}, 31);
    FcmConfig cfg;
    cfg.k = 2;
    cfg.seed = 8;
    cfg.convergence = FcmConvergence::ObjectiveDelta;
    auto result = fit(d, cfg, unit_weights(1));
    CHECK(result.converged);
    auto& trace = result.objective_trace;
    REQUIRE(trace.size() >= 2);
    CHECK(std::fabs(trace.back() - trace[trace.size() - 2]) < cfg.tolerance);
}

TEST_CASE("membership rows stay stochastic across fit iterations") {
    auto d = fixtures::mixed_dataset();
    auto weights = compute_feature_weights(d, 10);
    for (std::size_t k = 1; k <= 4; ++k) {
        FcmConfig cfg;
        cfg.k = k;
        cfg.seed = k;
        auto result = fit(d, cfg, weights);
        for (std::size_t i = 0; i < d.n(); ++i) {
            CHECK(std::fabs(result.memberships.row_sum(i) - 1.0) < 1e-9);
            for (std::size_t j = 0; j < k; ++j) {
                CHECK(result.memberships.at(i, j) >= 0.0);
                CHECK(result.memberships.at(i, j) <= 1.0);
            }
        }
    }
}
