#pragma once

// Brute-force reference implementations of the per-meal scores, written from
// the metric definitions without sharing code with the library, plus an
// exhaustive sweep comparing the two.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "mealrec/metrics.hpp"

namespace mealrec::testkit {

inline double oracle_duplicate(const std::vector<std::string>& items) {
    // Count an id the first time it is seen, by scanning everything before it.
    int unique = 0;
    for (std::size_t i = 0; i < items.size(); ++i) {
        bool seen = false;
        for (std::size_t j = 0; j < i; ++j) seen = seen || items[j] == items[i];
        if (!seen) ++unique;
    }
    return static_cast<double>(unique) / static_cast<double>(items.size());
}

// prefs[f] in {-1, 0, 1}; flags[i][f] says whether item i carries flag f.
inline double oracle_constraint(const std::vector<std::vector<bool>>& flags, const std::vector<int>& prefs,
                                bool penalize_missing_positive) {
    int active = 0, ok = 0;
    for (std::size_t f = 0; f < prefs.size(); ++f) {
        bool present = false;
        for (const auto& item : flags) present = present || item[f];
        if (prefs[f] == -1) {
            ++active;
            if (!present) ++ok;
        } else if (prefs[f] == 1) {
            if (present) {
                ++active;
                ++ok;
            } else if (penalize_missing_positive) {
                ++active;
            }
        }
    }
    return active == 0 ? 1.0 : static_cast<double>(ok) / active;
}

struct OracleItem {
    std::vector<Role> roles;
    std::vector<bool> flags;
};

inline double oracle_coverage(const std::vector<Role>& slots, const std::vector<OracleItem>& items,
                              const std::vector<int>& prefs, const std::vector<double>& role_weight) {
    int requested = 0, total = 0;
    for (std::size_t s = 0; s < slots.size(); ++s) {
        if (role_weight[static_cast<std::size_t>(slots[s])] <= 0.0) continue;
        ++requested;
        const auto& it = items[s];
        bool fits = std::find(it.roles.begin(), it.roles.end(), slots[s]) != it.roles.end();
        for (std::size_t f = 0; f < prefs.size(); ++f)
            if (prefs[f] == -1 && it.flags[f]) fits = false;
        total += fits ? 1 : -1;
    }
    if (requested == 0) return 1.0;
    return std::max(0, total) / static_cast<double>(requested);
}

struct SweepResult {
    std::size_t cases = 0;
    std::size_t mismatches = 0;
    std::string first_mismatch;
};

// Every meal of 1..4 slots over a 5-recipe universe, crossed with all 27
// preference vectors, both settings of penalize_missing_positive, and two
// role-weight settings for coverage.
inline SweepResult exhaustive_metric_sweep() {
    const std::vector<std::string> flag_names{"hasNuts", "hasMeat", "hasDairy"};
    const std::vector<OracleItem> universe{
        {{Role::Main}, {false, false, false}},
        {{Role::Main, Role::Side}, {true, false, false}},
        {{Role::Side}, {false, true, true}},
        {{Role::Dessert, Role::Beverage}, {false, false, true}},
        {{Role::Beverage, Role::Main}, {true, true, true}},
    };
    std::vector<Recipe> recipes;
    for (std::size_t i = 0; i < universe.size(); ++i) {
        Recipe r;
        r.id = "r" + std::to_string(i);
        r.name = r.id;
        r.category = "T";
        for (auto role : universe[i].roles) r.roles.insert(role);
        r.flags = universe[i].flags;
        recipes.push_back(r);
    }

    std::vector<std::vector<int>> all_prefs;
    for (int a = -1; a <= 1; ++a)
        for (int b = -1; b <= 1; ++b)
            for (int c = -1; c <= 1; ++c) all_prefs.push_back({a, b, c});

    // Slot layouts: every ordered choice of 1..4 distinct roles.
    std::vector<std::vector<Role>> layouts;
    std::vector<Role> roles(kAllRoles.begin(), kAllRoles.end());
    for (unsigned mask = 1; mask < 16; ++mask) {
        std::vector<Role> pick;
        for (unsigned b = 0; b < 4; ++b)
            if (mask & (1U << b)) pick.push_back(roles[b]);
        std::sort(pick.begin(), pick.end());
        do layouts.push_back(pick);
        while (std::next_permutation(pick.begin(), pick.end()));
    }
    const std::vector<std::vector<double>> weight_sets{{1, 1, 1, 1}, {1, 0, 0, 1}};

    SweepResult out;
    auto check = [&](double got, double want, const std::string& what) {
        ++out.cases;
        if (std::abs(got - want) > 1e-12) {
            if (out.mismatches++ == 0) out.first_mismatch = what;
        }
    };

    for (std::size_t len = 1; len <= 4; ++len) {
        std::size_t combos = 1;
        for (std::size_t i = 0; i < len; ++i) combos *= universe.size();
        for (std::size_t code = 0; code < combos; ++code) {
            std::vector<std::size_t> pick;
            for (std::size_t i = 0, c = code; i < len; ++i, c /= universe.size()) pick.push_back(c % universe.size());

            std::vector<std::string> ids;
            std::vector<const Recipe*> assigned;
            std::vector<OracleItem> items;
            std::vector<std::vector<bool>> flags;
            for (auto p : pick) {
                ids.push_back(recipes[p].id);
                assigned.push_back(&recipes[p]);
                items.push_back(universe[p]);
                flags.push_back(universe[p].flags);
            }
            check(meal_duplicate_score(ids), oracle_duplicate(ids), "duplicate");

            for (const auto& pv : all_prefs) {
                for (bool pen : {false, true}) {
                    PreferenceVector prefs{pv, pen};
                    check(meal_constraint_score(assigned, prefs), oracle_constraint(flags, pv, pen), "constraint");
                }
                for (const auto& layout : layouts) {
                    if (layout.size() != len) continue;
                    MealSlotSpec spec{MealKind::Dinner, layout};
                    for (const auto& w : weight_sets) {
                        UserProfile profile;
                        for (auto r : kAllRoles) profile.role_weights[r] = w[static_cast<std::size_t>(r)];
                        for (std::size_t f = 0; f < flag_names.size(); ++f) profile.prefs[flag_names[f]] = pv[f];
                        check(meal_coverage_score(spec, assigned, profile, PreferenceVector{pv, false}),
                              oracle_coverage(layout, items, pv, w), "coverage");
                    }
                }
            }
        }
    }
    return out;
}

}  // namespace mealrec::testkit
