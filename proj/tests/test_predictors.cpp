#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "alrec/errors.hpp"
#include "alrec/predictors.hpp"
#include "oracles.hpp"

using namespace alrec;
using oracle::Grid;

namespace {

constexpr auto kNone = std::nullopt;

std::vector<Entry> vec(std::initializer_list<std::pair<std::uint32_t, double>> xs) {
    std::vector<Entry> out;
    for (auto [i, v] : xs) out.push_back({i, v});
    return out;
}

std::shared_ptr<const RatingMatrix> shared(const Grid& g, RatingScale scale = RatingScale::bookcrossing()) {
    return std::make_shared<const RatingMatrix>(oracle::to_matrix(g, scale));
}

/// Rank-1 fixture r_ui = a_u * b_i on a 1..10 scale.
Grid rank_one_grid() {
    const double a[] = {1.0, 1.5, 2.0, 2.5};
    const double b[] = {2.0, 1.0, 3.0, 1.5};
    Grid g(4, std::vector<std::optional<double>>(4));
    for (int u = 0; u < 4; ++u) {
        for (int i = 0; i < 4; ++i) g[u][i] = a[u] * b[i];
    }
    return g;
}

double training_rmse(const PredictorModel& model) {
    const auto* f = model.factors();
    return std::sqrt(training_sse(*f, model.training()) / static_cast<double>(model.training().entry_count()));
}

}  // namespace

TEST_CASE("pearson_similarity") {
    CHECK(*pearson_similarity(vec({{1, 1}, {2, 2}, {3, 3}}), vec({{1, 2}, {2, 4}, {3, 6}})) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(*pearson_similarity(vec({{1, 1}, {2, 3}}), vec({{1, 3}, {2, 1}})) == doctest::Approx(-1.0).epsilon(1e-15));
    // Frozen from an independent script (numpy corrcoef): 15 / sqrt(252).
    CHECK(*pearson_similarity(vec({{1, 1}, {2, 2}, {3, 4}}), vec({{1, 2}, {2, 2}, {3, 3}})) ==
          doctest::Approx(0.944911182523068).epsilon(1e-14));

    SUBCASE("only co-rated items count") {
        const auto a = vec({{0, 9}, {1, 1}, {2, 2}, {3, 3}});
        const auto b = vec({{1, 2}, {2, 4}, {3, 6}, {4, 1}});
        CHECK(*pearson_similarity(a, b) == doctest::Approx(1.0));
    }
    SUBCASE("no-similarity signals") {
        CHECK_FALSE(pearson_similarity(vec({{1, 1}}), vec({{1, 3}})).has_value());
        CHECK_FALSE(pearson_similarity(vec({{1, 1}, {2, 5}}), vec({{3, 3}, {4, 2}})).has_value());
        CHECK_FALSE(pearson_similarity(vec({{1, 4}, {2, 4}}), vec({{1, 1}, {2, 3}})).has_value());
    }
    SUBCASE("symmetric and matches the textbook formula on random vectors") {
        std::mt19937_64 gen(17);
        const auto g = oracle::random_grid(gen, 60, 8, 0.7, 1, 10);
        const auto m = oracle::to_matrix(g, RatingScale::bookcrossing());
        for (UserIndex u = 0; u + 1 < m.user_count(); ++u) {
            const auto ab = pearson_similarity(m.user_row(u), m.user_row(u + 1));
            const auto ba = pearson_similarity(m.user_row(u + 1), m.user_row(u));
            const auto ref = oracle::pearson(g[u], g[u + 1]);
            REQUIRE(ab.has_value() == ref.has_value());
            REQUIRE(ab.has_value() == ba.has_value());
            if (!ab) continue;
            CHECK(std::abs(*ab - *ba) <= 1e-12);
            CHECK(std::abs(*ab - *ref) <= 1e-9);
        }
    }
}

TEST_CASE("train_user_user") {
    SUBCASE("identical users list each other with similarity 1") {
        const Grid g{{1.0, 4.0, 2.0}, {1.0, 4.0, 2.0}};
        NeighborhoodConfig cfg{0, 30, 0.15, false};
        const auto model = train_user_user(shared(g), cfg);
        const auto& nb = model.neighborhood()->neighbors;
        REQUIRE(nb[0].size() == 1);
        CHECK(nb[0][0].index == 1);
        CHECK(nb[0][0].similarity == doctest::Approx(1.0));
        CHECK(nb[1][0].index == 0);
    }
    SUBCASE("max_neighbors = 1 keeps the argmax peer") {
        const Grid g{{1.0, 2.0, 3.0, 5.0}, {1.0, 3.0, 3.0, 6.0}, {2.0, 2.0, 4.0, 4.0}};
        NeighborhoodConfig cfg{0, 1, -1.0, false};
        const auto model = train_user_user(shared(g), cfg);
        for (std::size_t u = 0; u < 3; ++u) {
            std::optional<std::size_t> best;
            double best_s = -2;
            for (std::size_t v = 0; v < 3; ++v) {
                if (v == u) continue;
                const auto s = oracle::pearson(g[u], g[v]);
                if (s && *s > best_s) {
                    best_s = *s;
                    best = v;
                }
            }
            const auto& list = model.neighborhood()->neighbors[u];
            REQUIRE(list.size() == 1);
            CHECK(list[0].index == *best);
        }
    }
    SUBCASE("single user has no neighbors") {
        const Grid g{{1.0, 2.0, 3.0}};
        const auto model = train_user_user(shared(g), NeighborhoodConfig::user_user());
        CHECK(model.neighborhood()->neighbors[0].empty());
    }
    SUBCASE("lists sorted, bounded and above threshold on random data") {
        std::mt19937_64 gen(23);
        const auto g = oracle::random_grid(gen, 40, 10, 0.8, 1, 10);
        const auto cfg = NeighborhoodConfig::user_user();
        const auto model = train_user_user(shared(g), cfg);
        for (const auto& list : model.neighborhood()->neighbors) {
            CHECK(list.size() <= cfg.max_neighbors);
            for (std::size_t k = 0; k < list.size(); ++k) {
                CHECK(list[k].similarity >= cfg.min_similarity);
                if (k > 0) CHECK(list[k - 1].similarity >= list[k].similarity);
            }
        }
    }
    SUBCASE("scoped training gives the same predictions for the scoped user") {
        std::mt19937_64 gen(29);
        const auto g = oracle::random_grid(gen, 30, 8, 0.8, 1, 10);
        const auto data = shared(g);
        NeighborhoodConfig cfg{2, 30, 0.15, false};
        const auto full = train_user_user(data, cfg);
        const UserIndex scope[] = {4};
        const auto scoped = train_user_user(data, cfg, scope);
        for (ItemIndex i = 0; i < 8; ++i) CHECK(full.predict(4, i) == scoped.predict(4, i));
        CHECK_FALSE(scoped.predict(5, 0).has_value());
    }
    SUBCASE("invalid config") {
        CHECK_THROWS_AS(train_user_user(shared({{1.0}}), NeighborhoodConfig{5, 2, 0.1, false}), ConfigError);
    }
}

TEST_CASE("predict_user_user") {
    SUBCASE("unanimous neighbors with equal means") {
        const Grid g{{4.0, 6.0, kNone}, {4.0, 6.0, 5.0}, {4.0, 6.0, 5.0}, {4.0, 6.0, 5.0}};
        const auto model = train_user_user(shared(g), NeighborhoodConfig{1, 30, 0.15, false});
        CHECK(*model.predict(0, 2) == doctest::Approx(5.0));
    }
    SUBCASE("fewer contributors than min_neighbors -> unpredictable") {
        const Grid g{{4.0, 6.0, kNone}, {4.0, 6.0, 5.0}, {3.0, 7.0, 5.0}, {2.0, 8.0, 5.0}};
        const auto model = train_user_user(shared(g), NeighborhoodConfig::user_user());
        CHECK_FALSE(model.predict(0, 2).has_value());
    }
    SUBCASE("two-neighbor hand fixture") {
        // target (a=2, b=4, d=3); N1 (1, 5, 4, c=5); N2 (3, 4, 2, c=2).
        // s1 = 0.9607689228305226, s2 = 0.5, means 3, 3.75, 2.75
        // -> 3 + (s1 * 1.25 + 0.5 * -0.75) / (s1 + 0.5) = 3.565429028937509
        const Grid g{{2.0, 4.0, kNone, 3.0}, {1.0, 5.0, 5.0, 4.0}, {3.0, 4.0, 2.0, 2.0}};
        const auto model = train_user_user(shared(g), NeighborhoodConfig{1, 30, 0.15, false});
        CHECK(*model.predict(0, 2) == doctest::Approx(3.565429028937509).epsilon(1e-12));
    }
    SUBCASE("clamped to the scale") {
        const Grid g{{9.0, 10.0, kNone}, {1.0, 2.0, 10.0}, {kNone, kNone, 1.0}};
        const auto model = train_user_user(shared(g), NeighborhoodConfig{1, 30, 0.15, false});
        // 9.5 + (10 - 13/3) = 15.17 before clamping
        CHECK(*model.predict(0, 2) == 10.0);
    }
}

TEST_CASE("item-item") {
    SUBCASE("duplicate item columns have similarity 1") {
        const Grid g{{5.0, 5.0, 1.0}, {2.0, 2.0, 4.0}, {4.0, 4.0, 3.0}};
        const auto m = oracle::to_matrix(g, RatingScale::bookcrossing());
        std::vector<double> means;
        for (UserIndex u = 0; u < 3; ++u) means.push_back(*m.user_mean(u));
        CHECK(*adjusted_cosine(m.item_column(0), m.item_column(1), means) == doctest::Approx(1.0));
    }
    SUBCASE("single contributing neighbor") {
        const Grid g{{7.0, kNone, 3.0}, {5.0, 5.0, 1.0}, {2.0, 2.0, 4.0}, {4.0, 4.0, 3.0}};
        const auto model = train_item_item(shared(g), NeighborhoodConfig::item_item());
        const auto& nb = model.neighborhood()->neighbors[1];
        REQUIRE_FALSE(nb.empty());
        CHECK(nb[0].index == 0);
        // Item 2 is anti-correlated with item 1 and is never a neighbor.
        for (const auto& n : nb) CHECK(n.index != 2);
        CHECK(*model.predict(0, 1) == doctest::Approx(7.0));
    }
    SUBCASE("no contributing neighbor -> unpredictable") {
        const Grid g{{kNone, kNone, 3.0}, {5.0, 5.0, 1.0}, {2.0, 2.0, 4.0}};
        const auto model = train_item_item(shared(g), NeighborhoodConfig::item_item());
        CHECK_FALSE(model.predict(0, 1).has_value());
    }
    SUBCASE("3-item fixtures match the brute-force adjusted cosine + weighted average") {
        std::mt19937_64 gen(31);
        int predicted = 0;
        for (int trial = 0; trial < 60; ++trial) {
            const auto g = oracle::random_grid(gen, 6, 3, 0.75, 1, 10);
            const auto model = train_item_item(shared(g), NeighborhoodConfig::item_item());
            for (std::size_t u = 0; u < 6; ++u) {
                for (std::size_t i = 0; i < 3; ++i) {
                    double num = 0, den = 0;
                    for (std::size_t j = 0; j < 3; ++j) {
                        if (j == i || !g[u][j]) continue;
                        const auto s = oracle::adjusted_cosine(g, i, j);
                        if (!s || !(*s > 0.0)) continue;
                        num += *s * *g[u][j];
                        den += *s;
                    }
                    const auto got = model.predict(static_cast<UserIndex>(u), static_cast<ItemIndex>(i));
                    REQUIRE(got.has_value() == (den > 0));
                    if (got) {
                        CHECK(*got == doctest::Approx(num / den).epsilon(1e-12));
                        ++predicted;
                    }
                }
            }
        }
        CHECK(predicted > 20);
    }
}

TEST_CASE("funk-svd training") {
    const auto data = shared(rank_one_grid());

    SUBCASE("zero iterations keep the initialisation baseline") {
        FactorConfig cfg;
        cfg.n_iterations = 0;
        const auto model = train_funk_svd(data, cfg, 7);
        const double mu = global_mean(*data);
        for (UserIndex u = 0; u < 4; ++u) {
            for (ItemIndex i = 0; i < 4; ++i) {
                const double p = *model.predict(u, i);
                // 25 features, each product in [0.05^2, 0.15^2]
                CHECK(p >= mu + 25 * 0.0025 - 1e-12);
                CHECK(p <= mu + 25 * 0.0225 + 1e-12);
            }
        }
    }
    SUBCASE("same seed -> bit-identical factors; different seed differs") {
        const auto a = train_funk_svd(data, FactorConfig{}, 3);
        const auto b = train_funk_svd(data, FactorConfig{}, 3);
        const auto c = train_funk_svd(data, FactorConfig{}, 4);
        CHECK(a.factors()->user_factors == b.factors()->user_factors);
        CHECK(a.factors()->item_factors == b.factors()->item_factors);
        CHECK(a.factors()->user_factors != c.factors()->user_factors);
    }
    SUBCASE("training error never increases between sweeps") {
        std::vector<double> sse;
        train_funk_svd(data, FactorConfig{}, 1,
                       [&](std::size_t, std::size_t, const FactorModel& m) { sse.push_back(training_sse(m, *data)); });
        REQUIRE(sse.size() == 25 * 100);
        for (std::size_t k = 1; k < sse.size(); ++k) CHECK(sse[k] <= sse[k - 1] * (1 + 1e-9));
        CHECK(sse.back() < sse.front());
    }
    SUBCASE("a longer schedule fits the rank-1 fixture") {
        FactorConfig cfg;
        cfg.n_features = 2;
        cfg.n_iterations = 4000;
        cfg.learn_rate = 0.02;
        const auto model = train_funk_svd(data, cfg, 5);
        CHECK(training_rmse(model) < 0.05);
    }
    SUBCASE("divergence is reported") {
        FactorConfig cfg;
        cfg.learn_rate = 50.0;
        CHECK_THROWS_AS(train_funk_svd(data, cfg, 5), TrainingDivergedError);
    }
    SUBCASE("empty matrix") {
        CHECK_THROWS_AS(train_funk_svd(std::make_shared<const RatingMatrix>(), FactorConfig{}, 1), DataError);
    }
}

TEST_CASE("sgd step follows the negative gradient of half the squared error") {
    std::mt19937_64 gen(41);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t k = 5, f = trial % k;
        std::vector<double> p(k), q(k);
        for (auto& x : p) x = d(gen);
        for (auto& x : q) x = d(gen);
        const double mu = 3.0, r = 3.0 + 4 * d(gen);
        auto loss = [&](const std::vector<double>& pp, const std::vector<double>& qq) {
            double dot = 0;
            for (std::size_t g = 0; g < k; ++g) dot += pp[g] * qq[g];
            const double e = r - mu - dot;
            return 0.5 * e * e;
        };
        double dot = 0;
        for (std::size_t g = 0; g < k; ++g) dot += p[g] * q[g];
        const double err = r - mu - dot;

        const double lr = 1e-3;
        double pf = p[f], qf = q[f];
        sgd_step(err, lr, pf, qf);
        const double dir_p = (pf - p[f]) / lr;
        const double dir_q = (qf - q[f]) / lr;

        const double h = 1e-6;
        auto pp = p, pm = p, qp = q, qm = q;
        pp[f] += h;
        pm[f] -= h;
        qp[f] += h;
        qm[f] -= h;
        const double grad_p = (loss(pp, q) - loss(pm, q)) / (2 * h);
        const double grad_q = (loss(p, qp) - loss(p, qm)) / (2 * h);
        CHECK(std::abs(dir_p + grad_p) <= 1e-5 * std::max(1e-8, std::abs(grad_p)));
        CHECK(std::abs(dir_q + grad_q) <= 1e-5 * std::max(1e-8, std::abs(grad_q)));
    }
}

TEST_CASE("predict_funk_svd") {
    auto data = std::make_shared<const RatingMatrix>(oracle::to_matrix({{2.0, 4.0}, {6.0, 8.0}}, RatingScale::bookcrossing()));
    FactorModel f;
    f.config.n_features = 2;
    f.global_mean = 5.0;
    f.users = 2;
    f.items = 2;
    // feature-major: [f0 of users..., f1 of users...]
    f.user_factors = {0.0, 1.5, 0.0, -0.5};
    f.item_factors = {2.0, 9.0, 1.0, 3.0};
    const PredictorModel model(PredictorKind::funk_svd, data, f);

    CHECK(*model.predict(0, 0) == 5.0);                          // zero user factors
    CHECK(*model.predict(1, 0) == doctest::Approx(5.0 + 3.0 - 0.5));  // 1.5*2 + -0.5*1
    CHECK(*model.predict(1, 1) == 10.0);                         // 5 + 13.5 - 1.5 clamps to max
    CHECK_FALSE(model.predict(2, 0).has_value());
    CHECK_FALSE(model.predict(0, 2).has_value());
}

TEST_CASE("rank_items") {
    auto data = std::make_shared<const RatingMatrix>(
        oracle::to_matrix({{1.0, 1.0, 1.0, 1.0, 1.0}}, RatingScale::bookcrossing()));
    auto make = [&](std::vector<double> item_scores) {
        FactorModel f;
        f.config.n_features = 1;
        f.global_mean = 0.0;
        f.users = 1;
        f.items = item_scores.size();
        f.user_factors = {1.0};
        f.item_factors = item_scores;
        return PredictorModel(PredictorKind::funk_svd, data, f);
    };

    SUBCASE("two candidates") {
        const auto model = make({3.0, 8.0});
        const ItemIndex c[] = {0, 1};
        CHECK(rank_items(model, 0, c, Direction::descending) == std::vector<ItemIndex>{1, 0});
    }
    SUBCASE("all unpredictable -> index order") {
        const auto model = make({});
        const ItemIndex c[] = {3, 1, 2};
        CHECK(rank_items(model, 0, c, Direction::descending) == std::vector<ItemIndex>{1, 2, 3});
        CHECK(rank_items(model, 0, c, Direction::ascending) == std::vector<ItemIndex>{1, 2, 3});
    }
    SUBCASE("five candidates match predict-then-sort; unpredictables last; ties by index") {
        const auto model = make({4.0, 2.0, 9.0, 4.0});  // item 4 unknown to the model
        const ItemIndex c[] = {4, 3, 2, 1, 0};
        std::vector<std::pair<double, ItemIndex>> oracle_scores;
        for (ItemIndex i : c) {
            if (auto p = model.predict(0, i)) oracle_scores.emplace_back(-*p, i);
        }
        std::sort(oracle_scores.begin(), oracle_scores.end());
        std::vector<ItemIndex> expected;
        for (auto& [s, i] : oracle_scores) expected.push_back(i);
        expected.push_back(4);
        CHECK(rank_items(model, 0, c, Direction::descending) == expected);
        CHECK(expected == std::vector<ItemIndex>{2, 0, 3, 1, 4});
        CHECK(rank_items(model, 0, c, Direction::ascending) == std::vector<ItemIndex>{1, 0, 3, 2, 4});
    }
    SUBCASE("descending reversed equals ascending without ties") {
        std::mt19937_64 gen(2);
        std::uniform_real_distribution<double> d(1.0, 10.0);
        std::vector<double> scores(8);
        for (auto& s : scores) s = d(gen);
        const auto model = make(scores);
        std::vector<ItemIndex> c{0, 1, 2, 3, 4, 5, 6, 7};
        auto desc = rank_items(model, 0, c, Direction::descending);
        std::reverse(desc.begin(), desc.end());
        CHECK(desc == rank_items(model, 0, c, Direction::ascending));
    }
}

TEST_CASE("predictions stay within the scale (property)") {
    std::mt19937_64 gen(43);
    for (int trial = 0; trial < 10; ++trial) {
        const auto g = oracle::random_grid(gen, 12, 6, 0.7, -10, 10);
        const auto data = shared(g, RatingScale::jester());
        FactorConfig fc;
        fc.n_features = 3;
        fc.n_iterations = 20;
        fc.learn_rate = 0.01;
        const PredictorModel models[] = {
            train_user_user(data, NeighborhoodConfig{1, 30, 0.0, false}),
            train_item_item(data, NeighborhoodConfig::item_item()),
            train_funk_svd(data, fc, 9),
        };
        for (const auto& model : models) {
            for (UserIndex u = 0; u < 12; ++u) {
                for (ItemIndex i = 0; i < 6; ++i) {
                    if (auto p = model.predict(u, i)) {
                        CHECK(*p >= -10.0);
                        CHECK(*p <= 10.0);
                    }
                }
            }
        }
    }
}
