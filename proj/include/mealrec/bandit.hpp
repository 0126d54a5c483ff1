#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "mealrec/meal.hpp"
#include "mealrec/recipe.hpp"
#include "mealrec/stump.hpp"

namespace mealrec {

struct BanditConfig {
    double epsilon0 = 0.3;
    double epsilon_decay = 0.995;  // multiplicative, per training episode
    double epsilon_min = 0.02;
    double learning_rate = 0.1;
    std::size_t max_stumps = 400;
    std::size_t stumps_per_round = 5;
    std::size_t buffer_capacity = 10000;

    friend bool operator==(const BanditConfig&, const BanditConfig&) = default;
};

std::vector<std::string> validate_bandit_config(const BanditConfig& cfg);
json to_json(const BanditConfig& cfg);
// Missing keys keep their defaults.
BanditConfig bandit_config_from_json(const json& j, BanditConfig base = {});

// Propositional encoding of (slot context, arm).
//
//   context: user preference per flag, slot role one-hot(4), meal one-hot(3),
//            day index / horizon
//   arm:     recipe flag indicators, role indicators(4), category one-hot
class FeatureSchema {
public:
    FeatureSchema() = default;
    FeatureSchema(std::vector<std::string> flag_names, std::vector<std::string> categories);
    static FeatureSchema for_dataset(const RecipeDataset& ds);

    std::size_t context_dim() const noexcept { return flag_names_.size() + 4 + 3 + 1; }
    std::size_t arm_dim() const noexcept { return flag_names_.size() + 4 + categories_.size(); }
    std::size_t dim() const noexcept { return context_dim() + arm_dim(); }

    const std::vector<std::string>& flag_names() const noexcept { return flag_names_; }
    const std::vector<std::string>& categories() const noexcept { return categories_; }

    std::vector<double> context(const PreferenceVector& prefs, Role slot, MealKind meal, std::size_t day,
                                int horizon) const;
    std::vector<double> arm(const Recipe& recipe) const;
    std::vector<double> encode(const PreferenceVector& prefs, Role slot, MealKind meal, std::size_t day,
                               int horizon, const Recipe& recipe) const;

    // True when every recipe of `ds` encodes without loss under this schema.
    bool compatible_with(const RecipeDataset& ds) const;

    friend bool operator==(const FeatureSchema&, const FeatureSchema&) = default;

private:
    std::vector<std::string> flag_names_;
    std::vector<std::string> categories_;
};

struct Experience {
    std::vector<double> features;
    std::string recipe_id;
    double reward = 0.0;

    friend bool operator==(const Experience&, const Experience&) = default;
};

// Bounded FIFO of experiences. Alongside the ring it keeps per-feature-vector
// (count, reward sum) aggregates, which is all squared-loss boosting needs.
class ReplayBuffer {
public:
    struct Aggregate {
        double count = 0.0;
        double reward_sum = 0.0;
    };
    using Groups = std::map<std::vector<double>, Aggregate>;

    explicit ReplayBuffer(std::size_t capacity = 10000);

    void push(Experience e);
    std::size_t size() const noexcept { return ring_.size(); }
    std::size_t capacity() const noexcept { return capacity_; }
    // Oldest first.
    std::vector<Experience> entries() const;
    const Groups& groups() const noexcept { return groups_; }

    friend bool operator==(const ReplayBuffer& a, const ReplayBuffer& b) {
        return a.capacity_ == b.capacity_ && a.entries() == b.entries();
    }

private:
    std::size_t capacity_;
    std::vector<Experience> ring_;
    std::size_t head_ = 0;  // oldest entry once the ring is full
    Groups groups_;
};

struct BanditState {
    BanditConfig config;
    FeatureSchema schema;
    RewardModel model;
    ReplayBuffer buffer;
    std::uint64_t seed = 0;
    std::uint64_t episodes = 0;  // completed training episodes; drives epsilon
    std::uint64_t version = 0;   // bumped by every boosting round

    static BanditState create(const RecipeDataset& ds, const BanditConfig& config, std::uint64_t seed);

    // epsilon0 * decay^episodes, floored at epsilon_min.
    double epsilon() const;

    friend bool operator==(const BanditState&, const BanditState&) = default;
};

/// Per-slot training signal: 0.5 * role match + 0.5 * single-item constraint score.
double slot_reward(const Recipe& recipe, Role slot_role, const PreferenceVector& prefs);
double slot_reward(const Recipe& recipe, Role slot_role, const UserProfile& profile,
                   std::span<const std::string> flag_names);

// Fits up to config.stumps_per_round stumps to the residuals of everything in
// the buffer and bumps the version. Returns the number of stumps added.
std::size_t boost_round(BanditState& state);

// For each episode and profile: recommend with the current epsilon, reward
// every slot, buffer the outcomes, run one boosting round. Epsilon decays
// once per episode. Throws DomainError on an empty profile list.
void bandit_train(BanditState& state, const RecipeDataset& ds, const DayConfig& cfg,
                  std::span<const UserProfile> profiles, int episodes, int horizon);

// Converts per-slot rewards for a plan into experiences. `rewards` is indexed
// like the plan's slots flattened in day/meal/slot order.
std::vector<Experience> plan_experiences(const BanditState& state, const RecipeDataset& ds,
                                         const DayConfig& cfg, const UserProfile& profile,
                                         const MealPlan& plan, std::span<const double> rewards);

inline constexpr std::string_view kBanditFormat = "mealrec-bandit/1";

json to_json(const BanditState& state);
BanditState bandit_state_from_json(const json& j);

}  // namespace mealrec
