#include <cmath>
#include <string>

#include "alrec/errors.hpp"
#include "alrec/predictors.hpp"
#include "alrec/rng.hpp"

namespace alrec {

void FactorConfig::validate() const {
    if (n_features == 0) throw ConfigError("funk-svd: n_features must be positive");
    if (!(learn_rate > 0.0) || !std::isfinite(learn_rate)) {
        throw ConfigError("funk-svd: learn_rate must be positive");
    }
    if (!(init_min <= init_max)) throw ConfigError("funk-svd: init_min must not exceed init_max");
}

double FactorModel::raw_prediction(std::size_t u, std::size_t i) const {
    double dot = 0.0;
    for (std::size_t f = 0; f < config.n_features; ++f) dot += p(u, f) * q(i, f);
    return global_mean + dot;
}

double training_sse(const FactorModel& model, const RatingMatrix& matrix) {
    double sse = 0.0;
    for (UserIndex u = 0; u < matrix.user_count(); ++u) {
        for (const auto& e : matrix.user_row(u)) {
            const double err = e.value - model.raw_prediction(u, e.index);
            sse += err * err;
        }
    }
    return sse;
}

PredictorModel train_funk_svd(std::shared_ptr<const RatingMatrix> matrix, const FactorConfig& cfg,
                              std::uint64_t rng_seed, const SweepObserver& observer) {
    cfg.validate();
    const auto& m = *matrix;
    if (m.empty()) throw DataError("funk-svd: cannot train on an empty rating matrix");

    FactorModel model;
    model.config = cfg;
    model.global_mean = global_mean(m);
    model.users = m.user_count();
    model.items = m.item_count();
    const std::size_t k = cfg.n_features;
    model.user_factors.resize(k * model.users);
    model.item_factors.resize(k * model.items);

    Rng rng(rng_seed);
    for (std::size_t u = 0; u < model.users; ++u) {
        for (std::size_t f = 0; f < k; ++f) model.user_factors[f * model.users + u] = rng.uniform(cfg.init_min, cfg.init_max);
    }
    for (std::size_t i = 0; i < model.items; ++i) {
        for (std::size_t f = 0; f < k; ++f) model.item_factors[f * model.items + i] = rng.uniform(cfg.init_min, cfg.init_max);
    }

    // Ratings flattened in user-major, item-ascending order; the sweep order
    // is part of the determinism contract.
    const std::size_t n = m.entry_count();
    std::vector<std::uint32_t> us, is;
    std::vector<double> rs;
    us.reserve(n);
    is.reserve(n);
    rs.reserve(n);
    for (UserIndex u = 0; u < m.user_count(); ++u) {
        for (const auto& e : m.user_row(u)) {
            us.push_back(u);
            is.push_back(e.index);
            rs.push_back(e.value);
        }
    }

    // rest[r] = mean + sum over the other features, so one step is O(1).
    std::vector<double> rest(n);
    for (std::size_t f = 0; f < k; ++f) {
        double* pf = model.user_factors.data() + f * model.users;
        double* qf = model.item_factors.data() + f * model.items;
        for (std::size_t r = 0; r < n; ++r) {
            rest[r] = model.raw_prediction(us[r], is[r]) - pf[us[r]] * qf[is[r]];
        }
        for (std::size_t it = 0; it < cfg.n_iterations; ++it) {
            double sse = 0.0;
            for (std::size_t r = 0; r < n; ++r) {
                double& p = pf[us[r]];
                double& q = qf[is[r]];
                const double err = rs[r] - (rest[r] + p * q);
                sse += err * err;
                sgd_step(err, cfg.learn_rate, p, q);
            }
            if (!std::isfinite(sse)) {
                throw TrainingDivergedError("funk-svd diverged at feature " + std::to_string(f) +
                                            ", iteration " + std::to_string(it));
            }
            if (observer) observer(f, it, model);
        }
    }
    for (double v : model.user_factors) {
        if (!std::isfinite(v)) throw TrainingDivergedError("funk-svd produced a non-finite user factor");
    }
    for (double v : model.item_factors) {
        if (!std::isfinite(v)) throw TrainingDivergedError("funk-svd produced a non-finite item factor");
    }
    return PredictorModel(PredictorKind::funk_svd, std::move(matrix), std::move(model));
}

std::optional<double> PredictorModel::predict_funk_svd(UserIndex user, ItemIndex item) const {
    const auto& model = std::get<FactorModel>(state_);
    if (user >= model.users || item >= model.items) return std::nullopt;
    return training_->scale().clamp(model.raw_prediction(user, item));
}

}  // namespace alrec
