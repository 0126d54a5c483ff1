#pragma once

#include <string>
#include <vector>

#include "mealrec/recipe.hpp"

namespace mealrec::testkit {

inline std::string source_path(const std::string& rel) { return std::string(MEALREC_SOURCE_DIR) + "/" + rel; }

inline const RecipeDataset& fixture() {
    static const RecipeDataset ds = load_dataset(source_path("data/recipes.json"));
    return ds;
}

inline const std::vector<std::string>& kFlags() {
    static const std::vector<std::string> f{"hasNuts", "hasMeat", "hasDairy"};
    return f;
}

// Minimal recipe with one step; flags given as nuts/meat/dairy.
inline Recipe make_recipe(std::string id, RoleSet roles, bool nuts = false, bool meat = false, bool dairy = false,
                          std::string category = "Test") {
    Recipe r;
    r.id = id;
    r.name = id;
    r.category = std::move(category);
    r.ingredients = {{"water", 1.0, "cup"}};
    r.steps = {{1, "serve", {"water"}, {id}, std::nullopt, {}, {}}};
    r.roles = roles;
    r.flags = {nuts, meat, dairy};
    return r;
}

// One recipe per role plus a few flagged alternatives.
inline RecipeDataset small_dataset() {
    return RecipeDataset(kFlags(), {
                                       make_recipe("a_main", {Role::Main}),
                                       make_recipe("b_meat_main", {Role::Main}, false, true, false),
                                       make_recipe("c_side", {Role::Side}),
                                       make_recipe("d_nut_side", {Role::Side}, true),
                                       make_recipe("e_dessert", {Role::Dessert}, false, false, true),
                                       make_recipe("f_drink", {Role::Beverage}),
                                       make_recipe("g_milk", {Role::Beverage}, false, false, true),
                                   });
}

}  // namespace mealrec::testkit
