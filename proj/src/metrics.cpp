#include "mealrec/metrics.hpp"

#include <algorithm>
#include <unordered_set>

#include "mealrec/error.hpp"

namespace mealrec {

namespace {

bool violates_avoided(const Recipe& r, const PreferenceVector& prefs) {
    for (std::size_t f = 0; f < prefs.values.size(); ++f)
        if (prefs.values[f] < 0 && r.flags[f]) return true;
    return false;
}

std::vector<const Recipe*> resolve(const MealAssignment& meal, const RecipeDataset& ds) {
    std::vector<const Recipe*> out;
    out.reserve(meal.items.size());
    for (const auto& id : meal.items) {
        const auto* r = ds.find(id);
        if (!r) throw ValidationError({"unknown recipe id '" + id + "'"});
        out.push_back(r);
    }
    return out;
}

void require_meals(const MealPlan& plan) {
    if (plan.days.empty()) throw ValidationError({"plan has no days"});
    for (const auto& d : plan.days) {
        if (d.meals.empty()) throw ValidationError({"plan day has no meals"});
        for (const auto& m : d.meals)
            if (m.items.empty()) throw ValidationError({"plan meal has no items"});
    }
}

const MealSlotSpec& spec_for(const DayConfig& cfg, std::size_t position) {
    if (position >= cfg.meals.size()) throw ValidationError({"plan has more meals per day than the day config"});
    return cfg.meals[position];
}

double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

}  // namespace

Combos combine(double uc, double dm, double mc) noexcept {
    return {(uc + dm) / 2.0, (uc + mc) / 2.0, (dm + mc) / 2.0, (uc + dm + mc) / 3.0};
}

double meal_duplicate_score(std::span<const std::string> items) {
    if (items.empty()) throw DomainError("meal_duplicate_score: empty meal");
    std::unordered_set<std::string_view> unique(items.begin(), items.end());
    return static_cast<double>(unique.size()) / static_cast<double>(items.size());
}

DuplicateResult duplicate_metric(const MealPlan& plan) {
    require_meals(plan);
    std::vector<double> per_meal;
    std::vector<double> per_day;
    for (const auto& day : plan.days) {
        std::vector<std::string> all;
        for (const auto& m : day.meals) {
            per_meal.push_back(meal_duplicate_score(m.items));
            all.insert(all.end(), m.items.begin(), m.items.end());
        }
        per_day.push_back(meal_duplicate_score(all));
    }
    return {mean(per_meal), mean(per_day)};
}

double meal_coverage_score(const MealSlotSpec& spec, std::span<const Recipe* const> assigned,
                           const UserProfile& profile, const PreferenceVector& prefs) {
    if (assigned.size() != spec.slots.size())
        throw ValidationError({"meal " + std::string(to_string(spec.meal)) + ": " + std::to_string(assigned.size()) +
                               " items for " + std::to_string(spec.slots.size()) + " slots"});
    int requested = 0;
    int sum = 0;
    for (std::size_t s = 0; s < spec.slots.size(); ++s) {
        const Role role = spec.slots[s];
        if (!(profile.role_weight(role) > 0.0)) continue;
        ++requested;
        const Recipe& r = *assigned[s];
        const bool fulfilled = r.roles.contains(role) && !violates_avoided(r, prefs);
        sum += fulfilled ? 1 : -1;
    }
    if (requested == 0) return 1.0;
    return static_cast<double>(std::max(0, sum)) / static_cast<double>(requested);
}

double meal_coverage_score(const MealSlotSpec& spec, std::span<const Recipe* const> assigned,
                           const UserProfile& profile, std::span<const std::string> flag_names) {
    return meal_coverage_score(spec, assigned, profile, align_preferences(profile, flag_names));
}

double meal_constraint_score(std::span<const Recipe* const> assigned, const PreferenceVector& prefs) {
    int active = 0;
    int satisfied = 0;
    for (std::size_t f = 0; f < prefs.values.size(); ++f) {
        const int pref = prefs.values[f];
        if (pref == 0) continue;
        const bool contains = std::any_of(assigned.begin(), assigned.end(), [f](const Recipe* r) { return r->flags[f]; });
        if (pref < 0) {
            ++active;
            if (!contains) ++satisfied;
        } else if (contains) {
            ++active;
            ++satisfied;
        } else if (prefs.penalize_missing_positive) {
            ++active;
        }
    }
    return active == 0 ? 1.0 : static_cast<double>(satisfied) / static_cast<double>(active);
}

double meal_constraint_score(std::span<const Recipe* const> assigned, const UserProfile& profile,
                             std::span<const std::string> flag_names) {
    return meal_constraint_score(assigned, align_preferences(profile, flag_names));
}

double coverage_metric(const MealPlan& plan, const RecipeDataset& ds, const DayConfig& cfg,
                       const UserProfile& profile) {
    require_meals(plan);
    const auto prefs = align_preferences(profile, ds.flag_names());
    std::vector<double> scores;
    for (const auto& day : plan.days)
        for (std::size_t m = 0; m < day.meals.size(); ++m)
            scores.push_back(meal_coverage_score(spec_for(cfg, m), resolve(day.meals[m], ds), profile, prefs));
    return mean(scores);
}

double constraint_metric(const MealPlan& plan, const RecipeDataset& ds, const UserProfile& profile) {
    require_meals(plan);
    const auto prefs = align_preferences(profile, ds.flag_names());
    std::vector<double> scores;
    for (const auto& day : plan.days)
        for (const auto& meal : day.meals) scores.push_back(meal_constraint_score(resolve(meal, ds), prefs));
    return mean(scores);
}

ScoreReport score_plan(const MealPlan& plan, const RecipeDataset& ds, const DayConfig& cfg,
                       const UserProfile& profile) {
    require_valid_plan(plan, ds, cfg);
    const auto prefs = align_preferences(profile, ds.flag_names());
    ScoreReport rep;
    std::vector<double> md, cs, uc;
    for (std::size_t d = 0; d < plan.days.size(); ++d) {
        const auto& day = plan.days[d];
        for (std::size_t m = 0; m < day.meals.size(); ++m) {
            const auto& meal = day.meals[m];
            const auto recipes = resolve(meal, ds);
            MealScore s;
            s.day = d;
            s.meal = meal.meal;
            s.md = meal_duplicate_score(meal.items);
            s.cs = meal_coverage_score(cfg.meals[m], recipes, profile, prefs);
            s.uc = meal_constraint_score(recipes, prefs);
            md.push_back(s.md);
            cs.push_back(s.cs);
            uc.push_back(s.uc);
            rep.per_meal.push_back(s);
        }
    }
    rep.dm = mean(md);
    rep.mc = mean(cs);
    rep.uc = mean(uc);
    rep.role_dup_diag = duplicate_metric(plan).role_dup_diag;
    rep.combos = combine(rep.uc, rep.dm, rep.mc);
    const auto& w = profile.weights;
    rep.goodness = w.dm * rep.dm + w.mc * rep.mc + w.uc * rep.uc;
    return rep;
}

json to_json(const ScoreReport& r) {
    json per_meal = json::array();
    for (const auto& m : r.per_meal)
        per_meal.push_back({{"day", m.day + 1}, {"meal", std::string(to_string(m.meal))},
                            {"md", m.md}, {"cs", m.cs}, {"uc", m.uc}});
    return json{{"dm", r.dm},
                {"mc", r.mc},
                {"uc", r.uc},
                {"G", r.goodness},
                {"combos",
                 {{"uc_dm", r.combos.uc_dm},
                  {"uc_mc", r.combos.uc_mc},
                  {"dm_mc", r.combos.dm_mc},
                  {"uc_dm_mc", r.combos.uc_dm_mc}}},
                {"role_dup_diag", r.role_dup_diag},
                {"per_meal", per_meal}};
}

}  // namespace mealrec
