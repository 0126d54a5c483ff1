#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace mealrec {

using json = nlohmann::json;

enum class Role : std::uint8_t { Main, Side, Dessert, Beverage };

inline constexpr std::array<Role, 4> kAllRoles{Role::Main, Role::Side, Role::Dessert,
                                               Role::Beverage};

std::string_view to_string(Role role) noexcept;
std::optional<Role> parse_role(std::string_view token) noexcept;

// Small bitset over Role.
class RoleSet {
public:
    constexpr RoleSet() = default;
    constexpr RoleSet(std::initializer_list<Role> roles) {
        for (auto r : roles) insert(r);
    }

    constexpr void insert(Role r) noexcept { bits_ |= bit(r); }
    constexpr bool contains(Role r) const noexcept { return (bits_ & bit(r)) != 0; }
    constexpr bool empty() const noexcept { return bits_ == 0; }
    std::size_t size() const noexcept;
    std::vector<Role> to_vector() const;

    friend constexpr bool operator==(RoleSet, RoleSet) = default;

private:
    static constexpr std::uint8_t bit(Role r) noexcept {
        return static_cast<std::uint8_t>(1U << static_cast<unsigned>(r));
    }
    std::uint8_t bits_ = 0;
};

struct Ingredient {
    std::string name;
    double amount = 0.0;
    std::string unit;

    friend bool operator==(const Ingredient&, const Ingredient&) = default;
};

// One atomic R3 plan step. Media references are opaque URIs and never fetched.
struct InstructionStep {
    int index = 1;
    std::string action;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    std::optional<std::int64_t> duration_seconds;
    std::vector<std::string> tools;
    std::vector<std::string> media_refs;

    friend bool operator==(const InstructionStep&, const InstructionStep&) = default;
};

struct Recipe {
    std::string id;
    std::string name;
    std::string category;
    std::vector<Ingredient> ingredients;
    std::vector<InstructionStep> steps;
    RoleSet roles;
    // Aligned with RecipeDataset::flag_names().
    std::vector<bool> flags;

    bool has_flag(std::size_t i) const { return flags.at(i); }

    friend bool operator==(const Recipe&, const Recipe&) = default;
};

enum class LoadMode { Full, MetadataOnly };

// Immutable after construction; safe to share read-only between threads.
class RecipeDataset {
public:
    RecipeDataset() = default;
    // Throws ValidationError on duplicate ids or flag vectors of the wrong width.
    RecipeDataset(std::vector<std::string> flag_names, std::vector<Recipe> recipes);

    const std::vector<std::string>& flag_names() const noexcept { return flag_names_; }
    const std::vector<Recipe>& recipes() const noexcept { return recipes_; }
    std::size_t size() const noexcept { return recipes_.size(); }
    bool empty() const noexcept { return recipes_.empty(); }

    const Recipe* find(std::string_view id) const;
    std::optional<std::size_t> index_of(std::string_view id) const;
    std::optional<std::size_t> flag_index(std::string_view name) const;

    // Indices of recipes whose role set contains `role`, in dataset order.
    const std::vector<std::size_t>& eligible(Role role) const {
        return eligible_[static_cast<std::size_t>(role)];
    }
    std::vector<Role> missing_roles() const;
    // Distinct categories, sorted.
    std::vector<std::string> categories() const;

    // Non-fatal findings from loading (e.g. a role nobody can fill).
    const std::vector<std::string>& warnings() const noexcept { return warnings_; }

    friend bool operator==(const RecipeDataset& a, const RecipeDataset& b) {
        return a.flag_names_ == b.flag_names_ && a.recipes_ == b.recipes_;
    }

private:
    std::vector<std::string> flag_names_;
    std::vector<Recipe> recipes_;
    std::unordered_map<std::string, std::size_t> index_;
    std::array<std::vector<std::size_t>, 4> eligible_;
    std::vector<std::string> warnings_;
};

// Returns one message per broken rule, each naming the field. Pure; never throws.
// When `flag_names` is given, the flags object must carry exactly those keys.
std::vector<std::string> validate_recipe(const json& raw, LoadMode mode = LoadMode::Full,
                                         const std::vector<std::string>* flag_names = nullptr);

// Parses a whole dataset document. Throws ParseError (with line/column) on
// malformed JSON and ValidationError listing every violation otherwise.
RecipeDataset parse_dataset(std::string_view text, LoadMode mode = LoadMode::Full);
RecipeDataset dataset_from_json(const json& doc, LoadMode mode = LoadMode::Full);
// Throws IoError when the file cannot be read.
RecipeDataset load_dataset(const std::filesystem::path& path, LoadMode mode = LoadMode::Full);

json to_json(const Recipe& recipe, const std::vector<std::string>& flag_names);
json to_json(const RecipeDataset& ds);

struct CategoryStats {
    std::string category;
    // Percentage of recipes carrying each flag, aligned with flag_names, 2 decimals.
    std::vector<double> flag_pct;
    std::size_t count = 0;
};

// Categories in order of first appearance. Throws DomainError on an empty dataset.
std::vector<CategoryStats> dataset_stats(const RecipeDataset& ds);

}  // namespace mealrec
