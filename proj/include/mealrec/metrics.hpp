#pragma once

#include <span>
#include <string>
#include <vector>

#include "mealrec/meal.hpp"
#include "mealrec/recipe.hpp"

namespace mealrec {

struct Combos {
    double uc_dm = 0.0;
    double uc_mc = 0.0;
    double dm_mc = 0.0;
    double uc_dm_mc = 0.0;
};

// Arithmetic means of the named components.
Combos combine(double uc, double dm, double mc) noexcept;

struct MealScore {
    std::size_t day = 0;  // 0-based
    MealKind meal = MealKind::Breakfast;
    double md = 0.0;
    double cs = 0.0;
    double uc = 0.0;
};

struct ScoreReport {
    std::vector<MealScore> per_meal;
    double dm = 0.0;
    double mc = 0.0;
    double uc = 0.0;
    Combos combos;
    double goodness = 0.0;
    // Day-level repetition; reported but never folded into dm or goodness.
    double role_dup_diag = 0.0;
};

/// Unique ids over total ids within one meal. Throws DomainError when empty.
double meal_duplicate_score(std::span<const std::string> items);

struct DuplicateResult {
    double dm = 0.0;
    double role_dup_diag = 0.0;
};

DuplicateResult duplicate_metric(const MealPlan& plan);

/// Coverage of one meal: each requested slot (role weight > 0) scores +1 when
/// the item can play the slot's role and trips no avoided flag, −1 otherwise.
/// The sum is clamped at 0 and divided by the number of requested slots. A
/// meal with no requested slots scores 1.
double meal_coverage_score(const MealSlotSpec& spec, std::span<const Recipe* const> assigned,
                           const UserProfile& profile, const PreferenceVector& prefs);
double meal_coverage_score(const MealSlotSpec& spec, std::span<const Recipe* const> assigned,
                           const UserProfile& profile, std::span<const std::string> flag_names);

/// Fraction of active preference checks the meal satisfies (1 when none are active).
double meal_constraint_score(std::span<const Recipe* const> assigned, const PreferenceVector& prefs);
double meal_constraint_score(std::span<const Recipe* const> assigned, const UserProfile& profile,
                             std::span<const std::string> flag_names);

double coverage_metric(const MealPlan& plan, const RecipeDataset& ds, const DayConfig& cfg,
                       const UserProfile& profile);
double constraint_metric(const MealPlan& plan, const RecipeDataset& ds, const UserProfile& profile);

// Validates the plan first (ValidationError on failure).
ScoreReport score_plan(const MealPlan& plan, const RecipeDataset& ds, const DayConfig& cfg,
                       const UserProfile& profile);

json to_json(const ScoreReport& report);

}  // namespace mealrec
