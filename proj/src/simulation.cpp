#include "alrec/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

#include "alrec/errors.hpp"
#include "alrec/rng.hpp"

namespace alrec {

std::string_view to_string(Mode mode) { return mode == Mode::batch ? "batch" : "sequential"; }

std::string_view to_string(DatasetKind kind) {
    return kind == DatasetKind::jester ? "jester" : "bookcrossing";
}

std::optional<Mode> parse_mode(std::string_view text) {
    if (text == "batch") return Mode::batch;
    if (text == "sequential") return Mode::sequential;
    return std::nullopt;
}

std::optional<DatasetKind> parse_dataset_kind(std::string_view text) {
    if (text == "jester") return DatasetKind::jester;
    if (text == "bookcrossing") return DatasetKind::bookcrossing;
    return std::nullopt;
}

void ExperimentConfig::validate() const {
    if (budget < 1) throw ConfigError("budget must be at least 1");
    if (n_users < 1) throw ConfigError("n_users must be at least 1");
    if (top_k < 1) throw ConfigError("top_k must be at least 1");
    if (ask_cap < budget) throw ConfigError("ask_cap must be at least budget");
    if (threads < 1) throw ConfigError("threads must be at least 1");
    if (relevance_threshold && !std::isfinite(*relevance_threshold)) {
        throw ConfigError("relevance_threshold must be finite");
    }
    learner.validate();
    predictors.user_user.validate();
    predictors.item_item.validate();
    predictors.funk_svd.validate();
}

UserSeeds user_seeds(std::uint64_t experiment_seed, std::string_view user_id) {
    std::uint64_t key = 0xcbf29ce484222325ULL;
    for (unsigned char c : user_id) {
        key ^= c;
        key *= 0x100000001b3ULL;
    }
    return {derive_seed(derive_seed(experiment_seed, 1), key),
            derive_seed(derive_seed(experiment_seed, 2), key),
            derive_seed(derive_seed(experiment_seed, 3), key)};
}

FinalMetrics evaluate_final(const ExperimentConfig& cfg, std::shared_ptr<const RatingMatrix> augmented,
                            UserIndex user, const std::map<ItemIndex, double>& remainder,
                            std::uint64_t rng_seed) {
    FinalMetrics out;
    if (remainder.empty()) return out;

    const RatingScale scale = augmented->scale();
    const double threshold = cfg.relevance_threshold.value_or(global_mean(*augmented));
    const auto model = train_predictor(cfg.final_recommender, std::move(augmented), cfg.predictors, rng_seed, user);

    std::vector<ItemIndex> items;
    std::vector<PredictionPair> pairs;
    for (const auto& [item, truth] : remainder) {
        items.push_back(item);
        if (auto p = model.predict(user, item)) pairs.push_back({*p, truth});
    }
    if (!pairs.empty()) out.rmse = rmse(pairs);

    auto ranked = rank_items(model, user, items, Direction::descending);
    if (ranked.size() > cfg.top_k) ranked.resize(cfg.top_k);

    RankedList list;
    std::set<ItemIndex> recommended, relevant;
    for (ItemIndex i : ranked) {
        const double truth = remainder.at(i);
        list.push_back({i, truth, model.predict(user, i).value_or(std::nan(""))});
        recommended.insert(i);
        if (truth > threshold) relevant.insert(i);
    }
    out.precision = precision(recommended, relevant);

    std::vector<double> ideal;
    for (const auto& [item, truth] : remainder) ideal.push_back(truth);
    try {
        out.ndcg = ndcg(list, std::move(ideal), gain_offset_for(scale));
    } catch (const UndefinedMetricError&) {
        out.ndcg.reset();
    }
    return out;
}

SimulationOutcome simulate_user(const ExperimentConfig& cfg, const HoldoutSplit& split, ActiveLearner& learner,
                                Mode mode, std::uint64_t final_seed, EvaluationTrace* trace) {
    SimulationOutcome outcome;
    outcome.user = split.user;
    outcome.user_id = split.training.user_id(split.user);

    auto training = std::make_shared<const RatingMatrix>(split.training);
    auto control = split.control;
    std::set<ItemIndex> asked;

    learner.fit(training, split.user);
    while (outcome.acquired_count < cfg.budget && outcome.asked.size() < cfg.ask_cap) {
        const auto item = learner.next_question(asked);
        if (!item) break;
        asked.insert(*item);
        auto hit = control.find(*item);
        if (hit == control.end()) {
            outcome.asked.push_back({*item, std::nullopt});
            continue;
        }
        outcome.asked.push_back({*item, hit->second});
        auto next = std::make_shared<RatingMatrix>(*training);
        next->set(split.user, hit->first, hit->second);
        control.erase(hit);
        training = std::move(next);
        ++outcome.acquired_count;
        if (mode == Mode::sequential) {
            learner.fit(training, split.user);
            ++outcome.retrain_count;
        }
    }

    const auto metrics = evaluate_final(cfg, training, split.user, control, final_seed);
    outcome.rmse = metrics.rmse;
    outcome.precision = metrics.precision;
    outcome.ndcg = metrics.ndcg;
    if (trace) {
        trace->final_training = training;
        trace->remainder = std::move(control);
    }
    return outcome;
}

SimulationOutcome simulate_user_batch(const ExperimentConfig& cfg, const HoldoutSplit& split,
                                      ActiveLearner& learner, std::uint64_t final_seed, EvaluationTrace* trace) {
    return simulate_user(cfg, split, learner, Mode::batch, final_seed, trace);
}

SimulationOutcome simulate_user_sequential(const ExperimentConfig& cfg, const HoldoutSplit& split,
                                           ActiveLearner& learner, std::uint64_t final_seed,
                                           EvaluationTrace* trace) {
    return simulate_user(cfg, split, learner, Mode::sequential, final_seed, trace);
}

SimulationOutcome simulate_one(const ExperimentConfig& cfg, const RatingMatrix& matrix, UserIndex user,
                               EvaluationTrace* trace) {
    const auto seeds = user_seeds(cfg.rng_seed, matrix.user_id(user));
    const auto split = holdout_user(matrix, user, seeds.holdout);
    auto learner = make_learner(cfg.learner, cfg.predictors, seeds.learner, cfg.tree_depth());
    return simulate_user(cfg, split, *learner, cfg.mode, seeds.final_recommender, trace);
}

std::vector<UserIndex> sample_users(const RatingMatrix& matrix, std::size_t n, std::size_t min_ratings,
                                    std::uint64_t seed) {
    std::vector<UserIndex> eligible;
    for (UserIndex u = 0; u < matrix.user_count(); ++u) {
        if (matrix.user_row(u).size() >= std::max<std::size_t>(min_ratings, 2)) eligible.push_back(u);
    }
    if (eligible.size() < n) {
        throw ConfigError("need " + std::to_string(n) + " eligible users with >= " + std::to_string(min_ratings) +
                          " ratings, found " + std::to_string(eligible.size()) + " (short by " +
                          std::to_string(n - eligible.size()) + ")");
    }
    Rng rng(derive_seed(seed, 0));
    for (std::size_t k = 0; k < n; ++k) {
        const auto j = k + rng.below(eligible.size() - k);
        std::swap(eligible[k], eligible[j]);
    }
    eligible.resize(n);
    std::sort(eligible.begin(), eligible.end());
    return eligible;
}

MetricSummaries summarize(const std::vector<SimulationOutcome>& outcomes) {
    std::vector<double> r, p, n;
    for (const auto& o : outcomes) {
        if (o.rmse) r.push_back(*o.rmse);
        if (o.precision) p.push_back(*o.precision);
        if (o.ndcg) n.push_back(*o.ndcg);
    }
    MetricSummaries s;
    if (!r.empty()) s.rmse = boxplot(std::move(r));
    if (!p.empty()) s.precision = boxplot(std::move(p));
    if (!n.empty()) s.ndcg = boxplot(std::move(n));
    return s;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const RatingMatrix& matrix) {
    cfg.validate();
    const auto users = sample_users(matrix, cfg.n_users, cfg.eligibility_min_ratings, cfg.rng_seed);

    ExperimentResult result;
    result.outcomes.resize(users.size());
    std::vector<std::exception_ptr> errors(users.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < users.size(); k = next++) {
            try {
                result.outcomes[k] = simulate_one(cfg, matrix, users[k]);
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    };
    const auto n_threads = std::min(cfg.threads, users.size());
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    result.summaries = summarize(result.outcomes);
    return result;
}

}  // namespace alrec
