#include "mealrec/recommend.hpp"

#include <algorithm>
#include <array>

#include "mealrec/error.hpp"

namespace mealrec {

namespace {

constexpr std::array<std::string_view, 3> kKindTokens{"random", "sequential", "bandit"};

MealPlan empty_plan(const UserProfile& profile) {
    MealPlan plan;
    plan.user_id = profile.user_id;
    return plan;
}

// Calls pick(role, meal, day) for every slot and assembles the plan.
template <typename Pick>
MealPlan fill_plan(const RecipeDataset& ds, const DayConfig& cfg, const UserProfile& profile, int horizon,
                   Pick&& pick) {
    MealPlan plan = empty_plan(profile);
    plan.days.resize(static_cast<std::size_t>(horizon));
    for (std::size_t d = 0; d < plan.days.size(); ++d) {
        for (const auto& spec : cfg.meals) {
            MealAssignment meal{spec.meal, {}};
            meal.items.reserve(spec.slots.size());
            for (auto role : spec.slots) meal.items.push_back(ds.recipes()[pick(role, spec.meal, d)].id);
            plan.days[d].meals.push_back(std::move(meal));
        }
    }
    return plan;
}

std::size_t uniform_index(std::size_t n, Rng& rng) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

}  // namespace

std::string_view to_string(RecommenderKind kind) noexcept { return kKindTokens[static_cast<std::size_t>(kind)]; }

std::optional<RecommenderKind> parse_recommender(std::string_view token) noexcept {
    for (std::size_t i = 0; i < kKindTokens.size(); ++i)
        if (kKindTokens[i] == token) return static_cast<RecommenderKind>(i);
    return std::nullopt;
}

void require_recommendable(const RecipeDataset& ds, const DayConfig& cfg, int horizon) {
    const auto bounds = horizon_bounds();
    if (!bounds.contains(horizon))
        throw DomainError("horizon " + std::to_string(horizon) + " outside [" + std::to_string(bounds.min_days) +
                          ", " + std::to_string(bounds.max_days) + "]");
    for (const auto& spec : cfg.meals)
        for (auto role : spec.slots)
            if (ds.eligible(role).empty())
                throw DomainError("no recipe can fill role '" + std::string(to_string(role)) + "'");
}

MealPlan recommend_random(const RecipeDataset& ds, const DayConfig& cfg, const UserProfile& profile, int horizon,
                          Rng& rng) {
    require_recommendable(ds, cfg, horizon);
    return fill_plan(ds, cfg, profile, horizon, [&](Role role, MealKind, std::size_t) {
        const auto& pool = ds.eligible(role);
        return pool[uniform_index(pool.size(), rng)];
    });
}

MealPlan recommend_sequential(const RecipeDataset& ds, const DayConfig& cfg, const UserProfile& profile,
                              int horizon, SequentialCursor& cursor) {
    require_recommendable(ds, cfg, horizon);
    const std::size_t n = ds.size();
    return fill_plan(ds, cfg, profile, horizon, [&](Role role, MealKind, std::size_t) {
        for (std::size_t step = 0; step < n; ++step) {
            const std::size_t i = (cursor.position + step) % n;
            if (ds.recipes()[i].roles.contains(role)) {
                cursor.position = (i + 1) % n;
                return i;
            }
        }
        throw DomainError("no recipe can fill role '" + std::string(to_string(role)) + "'");
    });
}

MealPlan recommend_bandit(const RecipeDataset& ds, const DayConfig& cfg, const UserProfile& profile, int horizon,
                          const BanditState& state, Rng& rng, std::optional<double> epsilon) {
    require_recommendable(ds, cfg, horizon);
    if (!state.schema.compatible_with(ds)) throw DomainError("bandit model was trained on a different recipe schema");
    const double eps = epsilon.value_or(state.epsilon());
    const auto& schema = state.schema;
    const auto& model = state.model;
    const auto prefs = align_preferences(profile, schema.flag_names());

    // The model is additive over features, so each recipe's arm block is
    // scored once and reused for every slot.
    std::vector<double> arm_score(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i)
        arm_score[i] = model.partial(schema.arm(ds.recipes()[i]), schema.context_dim());

    return fill_plan(ds, cfg, profile, horizon, [&](Role role, MealKind meal, std::size_t day) {
        const auto& pool = ds.eligible(role);
        if (eps > 0.0 && std::uniform_real_distribution<double>(0.0, 1.0)(rng) < eps)
            return pool[uniform_index(pool.size(), rng)];
        const double ctx = model.partial(schema.context(prefs, role, meal, day, horizon), 0);
        std::size_t best = pool.front();
        double best_value = -1.0;
        for (auto i : pool) {
            const double v = std::clamp(model.learning_rate() * (ctx + arm_score[i]), 0.0, 1.0);
            if (v > best_value || (v == best_value && ds.recipes()[i].id < ds.recipes()[best].id)) {
                best = i;
                best_value = v;
            }
        }
        return best;
    });
}

MealPlan recommend(RecommenderKind kind, const RecipeDataset& ds, const DayConfig& cfg, const UserProfile& profile,
                   int horizon, RecommenderState& state, Rng& rng) {
    switch (kind) {
        case RecommenderKind::Random:
            return recommend_random(ds, cfg, profile, horizon, rng);
        case RecommenderKind::Sequential:
            return recommend_sequential(ds, cfg, profile, horizon, state.cursor);
        case RecommenderKind::Bandit:
            if (!state.bandit) throw DomainError("bandit recommendation requires a bandit state");
            return recommend_bandit(ds, cfg, profile, horizon, *state.bandit, rng, state.epsilon);
    }
    throw DomainError("unknown recommender kind");
}

}  // namespace mealrec
