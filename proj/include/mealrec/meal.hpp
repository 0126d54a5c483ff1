#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mealrec/recipe.hpp"

namespace mealrec {

enum class MealKind : std::uint8_t { Breakfast, Lunch, Dinner };

inline constexpr std::array<MealKind, 3> kAllMeals{MealKind::Breakfast, MealKind::Lunch,
                                                   MealKind::Dinner};

std::string_view to_string(MealKind meal) noexcept;
std::optional<MealKind> parse_meal(std::string_view token) noexcept;

struct MealSlotSpec {
    MealKind meal = MealKind::Breakfast;
    std::vector<Role> slots;

    friend bool operator==(const MealSlotSpec&, const MealSlotSpec&) = default;
};

struct DayConfig {
    std::vector<MealSlotSpec> meals;

    std::size_t slots_per_day() const noexcept;
    friend bool operator==(const DayConfig&, const DayConfig&) = default;
};

// Breakfast(Main, Beverage), Lunch(Main, Side, Beverage),
// Dinner(Main, Side, Dessert, Beverage).
DayConfig default_day_config();
std::vector<std::string> validate_day_config(const DayConfig& cfg);

struct HorizonBounds {
    int min_days = 1;
    int max_days = 5;

    constexpr bool contains(int days) const noexcept { return days >= min_days && days <= max_days; }
};

constexpr HorizonBounds horizon_bounds() noexcept { return {}; }

enum class Condition : std::uint8_t { Healthy, Diabetic };

std::string_view to_string(Condition c) noexcept;
std::optional<Condition> parse_condition(std::string_view token) noexcept;

struct GoodnessWeights {
    double dm = 1.0 / 3.0;
    double mc = 1.0 / 3.0;
    double uc = 1.0 / 3.0;

    friend bool operator==(const GoodnessWeights&, const GoodnessWeights&) = default;
};

// A user's stated preferences. `condition` is carried through but does not
// influence scoring.
struct UserProfile {
    std::string user_id;
    // flag name -> -1 (avoid), 0 (indifferent), +1 (prefer)
    std::map<std::string, int> prefs;
    std::map<Role, double> role_weights{
        {Role::Main, 1.0}, {Role::Side, 1.0}, {Role::Dessert, 1.0}, {Role::Beverage, 1.0}};
    GoodnessWeights weights;
    bool penalize_missing_positive = false;
    Condition condition = Condition::Healthy;

    double role_weight(Role r) const;

    friend bool operator==(const UserProfile&, const UserProfile&) = default;
};

UserProfile neutral_profile(std::string user_id, const std::vector<std::string>& flag_names);
std::vector<std::string> validate_profile(const UserProfile& profile,
                                          const std::vector<std::string>& flag_names);

// Preferences aligned to a dataset's flag order; the form the scorers consume.
struct PreferenceVector {
    std::vector<int> values;
    bool penalize_missing_positive = false;
};

// Flags absent from the profile count as 0.
PreferenceVector align_preferences(const UserProfile& profile,
                                   std::span<const std::string> flag_names);

struct MealAssignment {
    MealKind meal = MealKind::Breakfast;
    // One recipe id per slot of the matching MealSlotSpec.
    std::vector<std::string> items;

    friend bool operator==(const MealAssignment&, const MealAssignment&) = default;
};

struct DayPlan {
    std::vector<MealAssignment> meals;

    friend bool operator==(const DayPlan&, const DayPlan&) = default;
};

struct MealPlan {
    std::string user_id;
    std::vector<DayPlan> days;

    std::size_t meal_count() const noexcept;
    friend bool operator==(const MealPlan&, const MealPlan&) = default;
};

std::vector<std::string> validate_plan(const MealPlan& plan, const RecipeDataset& ds,
                                       const DayConfig& cfg);
// Throws ValidationError when validate_plan reports anything.
void require_valid_plan(const MealPlan& plan, const RecipeDataset& ds, const DayConfig& cfg);

json to_json(const UserProfile& profile);
// Throws ValidationError naming every malformed field. Range checks against a
// dataset are left to validate_profile.
UserProfile profile_from_json(const json& j);

json to_json(const MealPlan& plan);
MealPlan plan_from_json(const json& j);

json to_json(const DayConfig& cfg);

}  // namespace mealrec
