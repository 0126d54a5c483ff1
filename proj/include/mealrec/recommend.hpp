#pragma once

#include <optional>
#include <string_view>

#include "mealrec/bandit.hpp"
#include "mealrec/meal.hpp"
#include "mealrec/recipe.hpp"
#include "mealrec/rng.hpp"

namespace mealrec {

enum class RecommenderKind : std::uint8_t { Random, Sequential, Bandit };

std::string_view to_string(RecommenderKind kind) noexcept;
std::optional<RecommenderKind> parse_recommender(std::string_view token) noexcept;

// One rotation pointer over the dataset order, shared by every meal and day
// it serves.
struct SequentialCursor {
    std::size_t position = 0;
};

// Throws DomainError for an out-of-range horizon or a slot role no recipe can fill.
void require_recommendable(const RecipeDataset& ds, const DayConfig& cfg, int horizon);

// Each slot drawn uniformly from the role-eligible recipes.
MealPlan recommend_random(const RecipeDataset& ds, const DayConfig& cfg, const UserProfile& profile,
                          int horizon, Rng& rng);

// Each slot takes the next role-eligible recipe at or after the cursor.
MealPlan recommend_sequential(const RecipeDataset& ds, const DayConfig& cfg, const UserProfile& profile,
                              int horizon, SequentialCursor& cursor);

// Epsilon-greedy per slot: with probability epsilon a uniform role-eligible
// recipe, else the argmax of the reward model (ties to the lowest recipe id).
// `epsilon` defaults to the state's current schedule value; pass 0 for greedy.
MealPlan recommend_bandit(const RecipeDataset& ds, const DayConfig& cfg, const UserProfile& profile,
                          int horizon, const BanditState& state, Rng& rng,
                          std::optional<double> epsilon = std::nullopt);

struct RecommenderState {
    SequentialCursor cursor;
    const BanditState* bandit = nullptr;
    std::optional<double> epsilon;
};

MealPlan recommend(RecommenderKind kind, const RecipeDataset& ds, const DayConfig& cfg,
                   const UserProfile& profile, int horizon, RecommenderState& state, Rng& rng);

}  // namespace mealrec
