#include "mealrec/meal.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "mealrec/error.hpp"

namespace mealrec {

namespace {

constexpr std::array<std::string_view, 3> kMealTokens{"breakfast", "lunch", "dinner"};
constexpr std::array<std::string_view, 2> kConditionTokens{"healthy", "diabetic"};

std::string day_label(std::size_t d) { return "day " + std::to_string(d + 1); }

}  // namespace

std::string_view to_string(MealKind meal) noexcept { return kMealTokens[static_cast<std::size_t>(meal)]; }

std::optional<MealKind> parse_meal(std::string_view token) noexcept {
    for (std::size_t i = 0; i < kMealTokens.size(); ++i)
        if (kMealTokens[i] == token) return static_cast<MealKind>(i);
    return std::nullopt;
}

std::string_view to_string(Condition c) noexcept { return kConditionTokens[static_cast<std::size_t>(c)]; }

std::optional<Condition> parse_condition(std::string_view token) noexcept {
    for (std::size_t i = 0; i < kConditionTokens.size(); ++i)
        if (kConditionTokens[i] == token) return static_cast<Condition>(i);
    return std::nullopt;
}

std::size_t DayConfig::slots_per_day() const noexcept {
    std::size_t n = 0;
    for (const auto& m : meals) n += m.slots.size();
    return n;
}

DayConfig default_day_config() {
    return DayConfig{{
        {MealKind::Breakfast, {Role::Main, Role::Beverage}},
        {MealKind::Lunch, {Role::Main, Role::Side, Role::Beverage}},
        {MealKind::Dinner, {Role::Main, Role::Side, Role::Dessert, Role::Beverage}},
    }};
}

std::vector<std::string> validate_day_config(const DayConfig& cfg) {
    std::vector<std::string> out;
    std::set<MealKind> seen;
    for (const auto& m : cfg.meals) {
        auto name = std::string(to_string(m.meal));
        if (!seen.insert(m.meal).second) out.push_back(name + ": meal listed twice");
        if (m.slots.empty()) out.push_back(name + ": slots must be non-empty");
        std::set<Role> roles(m.slots.begin(), m.slots.end());
        if (roles.size() != m.slots.size()) out.push_back(name + ": a role may appear at most once per meal");
    }
    for (auto meal : kAllMeals)
        if (!seen.count(meal)) out.push_back(std::string(to_string(meal)) + ": meal missing from day config");
    return out;
}

double UserProfile::role_weight(Role r) const {
    auto it = role_weights.find(r);
    return it == role_weights.end() ? 1.0 : it->second;
}

UserProfile neutral_profile(std::string user_id, const std::vector<std::string>& flag_names) {
    UserProfile p;
    p.user_id = std::move(user_id);
    for (const auto& f : flag_names) p.prefs[f] = 0;
    return p;
}

std::vector<std::string> validate_profile(const UserProfile& profile,
                                          const std::vector<std::string>& flag_names) {
    std::vector<std::string> out;
    if (profile.user_id.empty()) out.emplace_back("user_id: must be non-empty");
    for (const auto& f : flag_names)
        if (!profile.prefs.count(f)) out.push_back("prefs." + f + ": missing preference");
    for (const auto& [name, value] : profile.prefs) {
        if (std::find(flag_names.begin(), flag_names.end(), name) == flag_names.end())
            out.push_back("prefs." + name + ": unknown flag");
        if (value < -1 || value > 1) out.push_back("prefs." + name + ": preference must be -1, 0, or +1");
    }
    for (const auto& [role, w] : profile.role_weights)
        if (!(w >= 0.0) || !std::isfinite(w))
            out.push_back("role_weights." + std::string(to_string(role)) + ": must be non-negative");
    const auto& g = profile.weights;
    for (auto [name, w] : {std::pair{"dm", g.dm}, {"mc", g.mc}, {"uc", g.uc}})
        if (!(w >= 0.0) || !std::isfinite(w))
            out.push_back(std::string("goodness_weights.") + name + ": must be non-negative");
    if (std::abs(g.dm + g.mc + g.uc - 1.0) > 1e-9) out.emplace_back("goodness_weights: goodness_weights must sum to 1");
    return out;
}

PreferenceVector align_preferences(const UserProfile& profile, std::span<const std::string> flag_names) {
    PreferenceVector pv;
    pv.penalize_missing_positive = profile.penalize_missing_positive;
    pv.values.reserve(flag_names.size());
    for (const auto& f : flag_names) {
        auto it = profile.prefs.find(f);
        pv.values.push_back(it == profile.prefs.end() ? 0 : it->second);
    }
    return pv;
}

std::size_t MealPlan::meal_count() const noexcept {
    std::size_t n = 0;
    for (const auto& d : days) n += d.meals.size();
    return n;
}

std::vector<std::string> validate_plan(const MealPlan& plan, const RecipeDataset& ds, const DayConfig& cfg) {
    std::vector<std::string> out;
    const auto bounds = horizon_bounds();
    const int horizon = static_cast<int>(plan.days.size());
    if (!bounds.contains(horizon))
        out.push_back("days: horizon " + std::to_string(horizon) + " outside [" + std::to_string(bounds.min_days) +
                      ", " + std::to_string(bounds.max_days) + "]");
    for (std::size_t d = 0; d < plan.days.size(); ++d) {
        const auto& day = plan.days[d];
        if (day.meals.size() != cfg.meals.size()) {
            out.push_back(day_label(d) + ": expected " + std::to_string(cfg.meals.size()) + " meals, got " +
                          std::to_string(day.meals.size()));
        }
        std::size_t ids = 0;
        for (std::size_t m = 0; m < day.meals.size(); ++m) {
            const auto& meal = day.meals[m];
            ids += meal.items.size();
            const auto where = day_label(d) + " " + std::string(to_string(meal.meal));
            if (m < cfg.meals.size()) {
                const auto& spec = cfg.meals[m];
                if (spec.meal != meal.meal)
                    out.push_back(where + ": expected " + std::string(to_string(spec.meal)) + " in this position");
                if (meal.items.size() != spec.slots.size())
                    out.push_back(where + ": shape mismatch, " + std::to_string(meal.items.size()) +
                                  " ids for " + std::to_string(spec.slots.size()) + " slots");
            }
            for (const auto& id : meal.items)
                if (!ds.find(id)) out.push_back(where + ": unknown recipe id '" + id + "'");
        }
        if (day.meals.size() == cfg.meals.size() && ids != cfg.slots_per_day())
            out.push_back(day_label(d) + ": " + std::to_string(ids) + " ids on a " +
                          std::to_string(cfg.slots_per_day()) + "-slot day");
    }
    return out;
}

void require_valid_plan(const MealPlan& plan, const RecipeDataset& ds, const DayConfig& cfg) {
    auto v = validate_plan(plan, ds, cfg);
    if (!v.empty()) throw ValidationError("invalid meal plan", std::move(v));
}

json to_json(const UserProfile& p) {
    json prefs = json::object();
    for (const auto& [k, v] : p.prefs) prefs[k] = v;
    json rw = json::object();
    for (auto r : kAllRoles) rw[std::string(to_string(r))] = p.role_weight(r);
    return json{{"user_id", p.user_id},
                {"prefs", prefs},
                {"role_weights", rw},
                {"goodness_weights", {{"dm", p.weights.dm}, {"mc", p.weights.mc}, {"uc", p.weights.uc}}},
                {"penalize_missing_positive", p.penalize_missing_positive},
                {"condition", std::string(to_string(p.condition))}};
}

UserProfile profile_from_json(const json& j) {
    std::vector<std::string> bad;
    UserProfile p;
    if (!j.is_object()) throw ValidationError({"profile: must be an object"});
    static const std::set<std::string> known{"user_id",          "prefs",
                                             "role_weights",     "goodness_weights",
                                             "penalize_missing_positive", "condition",
                                             "version"};
    for (const auto& [k, _] : j.items())
        if (!known.count(k)) bad.push_back(k + ": unknown field");

    if (!j.contains("user_id") || !j["user_id"].is_string())
        bad.emplace_back("user_id: required string");
    else
        p.user_id = j["user_id"].get<std::string>();

    if (!j.contains("prefs") || !j["prefs"].is_object()) {
        bad.emplace_back("prefs: required object of flag -> -1|0|+1");
    } else {
        for (const auto& [k, v] : j["prefs"].items()) {
            if (v.is_number_integer())
                p.prefs[k] = static_cast<int>(std::clamp<std::int64_t>(v.get<std::int64_t>(), -1000, 1000));
            else
                bad.push_back("prefs." + k + ": preference must be -1, 0, or +1");
        }
    }

    if (j.contains("role_weights")) {
        const auto& rw = j["role_weights"];
        if (!rw.is_object()) {
            bad.emplace_back("role_weights: must be an object");
        } else {
            for (const auto& [k, v] : rw.items()) {
                auto role = parse_role(k);
                if (!role)
                    bad.push_back("role_weights." + k + ": unknown role");
                else if (!v.is_number())
                    bad.push_back("role_weights." + k + ": must be a number");
                else
                    p.role_weights[*role] = v.get<double>();
            }
        }
    }

    if (j.contains("goodness_weights")) {
        const auto& g = j["goodness_weights"];
        if (!g.is_object()) {
            bad.emplace_back("goodness_weights: must be an object with dm, mc, uc");
        } else {
            for (const auto& [k, v] : g.items()) {
                if (!v.is_number()) {
                    bad.push_back("goodness_weights." + k + ": must be a number");
                    continue;
                }
                if (k == "dm")
                    p.weights.dm = v.get<double>();
                else if (k == "mc")
                    p.weights.mc = v.get<double>();
                else if (k == "uc")
                    p.weights.uc = v.get<double>();
                else
                    bad.push_back("goodness_weights." + k + ": unknown component");
            }
        }
    }

    if (j.contains("penalize_missing_positive")) {
        if (!j["penalize_missing_positive"].is_boolean())
            bad.emplace_back("penalize_missing_positive: must be a boolean");
        else
            p.penalize_missing_positive = j["penalize_missing_positive"].get<bool>();
    }

    if (j.contains("condition")) {
        const auto& c = j["condition"];
        auto cond = c.is_string() ? parse_condition(c.get<std::string>()) : std::nullopt;
        if (!cond)
            bad.emplace_back("condition: must be \"healthy\" or \"diabetic\"");
        else
            p.condition = *cond;
    }

    if (!bad.empty()) throw ValidationError(std::move(bad));
    return p;
}

json to_json(const MealPlan& plan) {
    json days = json::array();
    for (std::size_t d = 0; d < plan.days.size(); ++d) {
        json meals = json::array();
        for (const auto& m : plan.days[d].meals)
            meals.push_back({{"meal", std::string(to_string(m.meal))}, {"items", m.items}});
        days.push_back({{"day", d + 1}, {"meals", meals}});
    }
    return json{{"user_id", plan.user_id}, {"days", days}};
}

MealPlan plan_from_json(const json& j) {
    MealPlan plan;
    try {
        plan.user_id = j.at("user_id").get<std::string>();
        for (const auto& d : j.at("days")) {
            DayPlan day;
            for (const auto& m : d.at("meals")) {
                auto kind = parse_meal(m.at("meal").get<std::string>());
                if (!kind) throw ValidationError({"meal: unknown meal '" + m.at("meal").get<std::string>() + "'"});
                day.meals.push_back({*kind, m.at("items").get<std::vector<std::string>>()});
            }
            plan.days.push_back(std::move(day));
        }
    } catch (const json::exception& e) {
        throw ValidationError({std::string("plan: ") + e.what()});
    }
    return plan;
}

json to_json(const DayConfig& cfg) {
    json meals = json::array();
    for (const auto& m : cfg.meals) {
        json slots = json::array();
        for (auto r : m.slots) slots.push_back(std::string(to_string(r)));
        meals.push_back({{"meal", std::string(to_string(m.meal))}, {"slots", slots}});
    }
    return meals;
}

}  // namespace mealrec
