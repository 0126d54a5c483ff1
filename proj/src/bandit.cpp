#include "mealrec/bandit.hpp"

#include <algorithm>
#include <cmath>

#include "mealrec/error.hpp"
#include "mealrec/metrics.hpp"
#include "mealrec/recommend.hpp"
#include "mealrec/rng.hpp"

namespace mealrec {

std::vector<std::string> validate_bandit_config(const BanditConfig& c) {
    std::vector<std::string> out;
    if (!(c.epsilon0 >= 0.0 && c.epsilon0 <= 1.0)) out.emplace_back("bandit.epsilon0: must lie in [0, 1]");
    if (!(c.epsilon_min >= 0.0 && c.epsilon_min <= c.epsilon0))
        out.emplace_back("bandit.epsilon_min: must lie in [0, epsilon0]");
    if (!(c.epsilon_decay > 0.0 && c.epsilon_decay <= 1.0))
        out.emplace_back("bandit.epsilon_decay: must lie in (0, 1]");
    if (!(c.learning_rate > 0.0)) out.emplace_back("bandit.learning_rate: must be positive");
    if (c.max_stumps == 0) out.emplace_back("bandit.max_stumps: must be positive");
    if (c.stumps_per_round == 0) out.emplace_back("bandit.stumps_per_round: must be positive");
    if (c.buffer_capacity == 0) out.emplace_back("bandit.buffer_capacity: must be positive");
    return out;
}

json to_json(const BanditConfig& c) {
    return json{{"epsilon0", c.epsilon0},
                {"epsilon_decay", c.epsilon_decay},
                {"epsilon_min", c.epsilon_min},
                {"learning_rate", c.learning_rate},
                {"max_stumps", c.max_stumps},
                {"stumps_per_round", c.stumps_per_round},
                {"buffer_capacity", c.buffer_capacity}};
}

BanditConfig bandit_config_from_json(const json& j, BanditConfig c) {
    if (!j.is_object()) throw ConfigError("bandit config must be an object");
    try {
        for (const auto& [k, v] : j.items()) {
            if (k == "epsilon0")
                c.epsilon0 = v.get<double>();
            else if (k == "epsilon_decay")
                c.epsilon_decay = v.get<double>();
            else if (k == "epsilon_min")
                c.epsilon_min = v.get<double>();
            else if (k == "learning_rate")
                c.learning_rate = v.get<double>();
            else if (k == "max_stumps")
                c.max_stumps = v.get<std::size_t>();
            else if (k == "stumps_per_round")
                c.stumps_per_round = v.get<std::size_t>();
            else if (k == "buffer_capacity")
                c.buffer_capacity = v.get<std::size_t>();
            else
                throw ConfigError("bandit config: unknown key '" + k + "'");
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bandit config: ") + e.what());
    }
    auto problems = validate_bandit_config(c);
    if (!problems.empty()) throw ConfigError(problems.front());
    return c;
}

FeatureSchema::FeatureSchema(std::vector<std::string> flag_names, std::vector<std::string> categories)
    : flag_names_(std::move(flag_names)), categories_(std::move(categories)) {}

FeatureSchema FeatureSchema::for_dataset(const RecipeDataset& ds) { return {ds.flag_names(), ds.categories()}; }

std::vector<double> FeatureSchema::context(const PreferenceVector& prefs, Role slot, MealKind meal, std::size_t day,
                                           int horizon) const {
    std::vector<double> x(context_dim(), 0.0);
    std::size_t k = 0;
    for (std::size_t f = 0; f < flag_names_.size(); ++f) x[k++] = f < prefs.values.size() ? prefs.values[f] : 0;
    x[k + static_cast<std::size_t>(slot)] = 1.0;
    k += 4;
    x[k + static_cast<std::size_t>(meal)] = 1.0;
    k += 3;
    x[k] = horizon > 0 ? static_cast<double>(day) / static_cast<double>(horizon) : 0.0;
    return x;
}

std::vector<double> FeatureSchema::arm(const Recipe& recipe) const {
    std::vector<double> x(arm_dim(), 0.0);
    std::size_t k = 0;
    for (std::size_t f = 0; f < flag_names_.size(); ++f) x[k++] = recipe.flags.at(f) ? 1.0 : 0.0;
    for (auto r : kAllRoles) x[k++] = recipe.roles.contains(r) ? 1.0 : 0.0;
    auto it = std::lower_bound(categories_.begin(), categories_.end(), recipe.category);
    if (it != categories_.end() && *it == recipe.category) x[k + static_cast<std::size_t>(it - categories_.begin())] = 1.0;
    return x;
}

std::vector<double> FeatureSchema::encode(const PreferenceVector& prefs, Role slot, MealKind meal, std::size_t day,
                                          int horizon, const Recipe& recipe) const {
    auto x = context(prefs, slot, meal, day, horizon);
    auto a = arm(recipe);
    x.insert(x.end(), a.begin(), a.end());
    return x;
}

bool FeatureSchema::compatible_with(const RecipeDataset& ds) const {
    if (ds.flag_names() != flag_names_) return false;
    for (const auto& r : ds.recipes())
        if (!std::binary_search(categories_.begin(), categories_.end(), r.category)) return false;
    return true;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw ConfigError("replay buffer capacity must be positive");
}

void ReplayBuffer::push(Experience e) {
    auto& g = groups_[e.features];
    g.count += 1.0;
    g.reward_sum += e.reward;
    if (ring_.size() < capacity_) {
        ring_.push_back(std::move(e));
        return;
    }
    auto& old = ring_[head_];
    auto it = groups_.find(old.features);
    it->second.count -= 1.0;
    it->second.reward_sum -= old.reward;
    if (it->second.count <= 0.0) groups_.erase(it);
    old = std::move(e);
    head_ = (head_ + 1) % capacity_;
}

std::vector<Experience> ReplayBuffer::entries() const {
    std::vector<Experience> out;
    out.reserve(ring_.size());
    for (std::size_t i = 0; i < ring_.size(); ++i) out.push_back(ring_[(head_ + i) % ring_.size()]);
    return out;
}

BanditState BanditState::create(const RecipeDataset& ds, const BanditConfig& config, std::uint64_t seed) {
    auto problems = validate_bandit_config(config);
    if (!problems.empty()) throw ConfigError(problems.front());
    auto schema = FeatureSchema::for_dataset(ds);
    RewardModel model(schema.dim(), config.learning_rate, config.max_stumps);
    return BanditState{config, std::move(schema), std::move(model), ReplayBuffer(config.buffer_capacity), seed, 0, 0};
}

double BanditState::epsilon() const {
    const double e = config.epsilon0 * std::pow(config.epsilon_decay, static_cast<double>(episodes));
    return std::clamp(e, config.epsilon_min, config.epsilon0);
}

double slot_reward(const Recipe& recipe, Role slot_role, const PreferenceVector& prefs) {
    const double role_match = recipe.roles.contains(slot_role) ? 1.0 : 0.0;
    const Recipe* item = &recipe;
    return 0.5 * role_match + 0.5 * meal_constraint_score(std::span<const Recipe* const>(&item, 1), prefs);
}

double slot_reward(const Recipe& recipe, Role slot_role, const UserProfile& profile,
                   std::span<const std::string> flag_names) {
    return slot_reward(recipe, slot_role, align_preferences(profile, flag_names));
}

std::size_t boost_round(BanditState& state) {
    const auto& groups = state.buffer.groups();
    std::vector<WeightedResidual> residuals;
    residuals.reserve(groups.size());
    double total = 0.0;
    for (const auto& [x, agg] : groups) {
        residuals.push_back({x, agg.count, agg.reward_sum - agg.count * state.model.raw(x)});
        total += agg.count;
    }
    std::size_t added = 0;
    if (total >= 2.0) {
        const double lr = state.model.learning_rate();
        for (std::size_t k = 0; k < state.config.stumps_per_round && !state.model.full(); ++k) {
            const Stump stump = fit_stump(residuals);
            state.model.add(stump);
            ++added;
            for (auto& r : residuals) r.residual_sum -= r.weight * lr * stump(r.features);
        }
    }
    ++state.version;
    return added;
}

std::vector<Experience> plan_experiences(const BanditState& state, const RecipeDataset& ds, const DayConfig& cfg,
                                         const UserProfile& profile, const MealPlan& plan,
                                         std::span<const double> rewards) {
    const auto prefs = align_preferences(profile, state.schema.flag_names());
    const int horizon = static_cast<int>(plan.days.size());
    std::vector<Experience> out;
    std::size_t k = 0;
    for (std::size_t d = 0; d < plan.days.size(); ++d) {
        const auto& day = plan.days[d];
        for (std::size_t m = 0; m < day.meals.size() && m < cfg.meals.size(); ++m) {
            const auto& spec = cfg.meals[m];
            for (std::size_t s = 0; s < day.meals[m].items.size() && s < spec.slots.size(); ++s, ++k) {
                if (k >= rewards.size()) throw DomainError("fewer rewards than plan slots");
                const auto* r = ds.find(day.meals[m].items[s]);
                if (!r) throw DomainError("unknown recipe id '" + day.meals[m].items[s] + "'");
                out.push_back({state.schema.encode(prefs, spec.slots[s], spec.meal, d, horizon, *r), r->id, rewards[k]});
            }
        }
    }
    return out;
}

void bandit_train(BanditState& state, const RecipeDataset& ds, const DayConfig& cfg,
                  std::span<const UserProfile> profiles, int episodes, int horizon) {
    if (profiles.empty()) throw DomainError("bandit_train needs at least one profile");
    if (episodes < 1) throw DomainError("bandit_train needs at least one episode");
    require_recommendable(ds, cfg, horizon);

    std::vector<PreferenceVector> prefs;
    for (const auto& p : profiles) prefs.push_back(align_preferences(p, ds.flag_names()));

    std::vector<double> rewards;
    for (int e = 0; e < episodes; ++e) {
        const double eps = state.epsilon();
        for (std::size_t u = 0; u < profiles.size(); ++u) {
            Rng rng(derive_seed(state.seed, {state.episodes, u}));
            const auto plan = recommend_bandit(ds, cfg, profiles[u], horizon, state, rng, eps);
            rewards.clear();
            for (const auto& day : plan.days)
                for (std::size_t m = 0; m < day.meals.size(); ++m)
                    for (std::size_t s = 0; s < day.meals[m].items.size(); ++s)
                        rewards.push_back(slot_reward(*ds.find(day.meals[m].items[s]), cfg.meals[m].slots[s], prefs[u]));
            for (auto& exp : plan_experiences(state, ds, cfg, profiles[u], plan, rewards))
                state.buffer.push(std::move(exp));
            boost_round(state);
        }
        ++state.episodes;
    }
}

json to_json(const BanditState& s) {
    json buffer = json::array();
    for (const auto& e : s.buffer.entries()) buffer.push_back({{"x", e.features}, {"recipe", e.recipe_id}, {"r", e.reward}});
    return json{{"format", kBanditFormat},
                {"config", to_json(s.config)},
                {"schema", {{"flag_names", s.schema.flag_names()}, {"categories", s.schema.categories()}}},
                {"seed", s.seed},
                {"episodes", s.episodes},
                {"version", s.version},
                {"epsilon", s.epsilon()},
                {"model", to_json(s.model)},
                {"buffer", buffer}};
}

BanditState bandit_state_from_json(const json& j) {
    try {
        if (j.at("format").get<std::string>() != kBanditFormat)
            throw ValidationError({"bandit state: unsupported format '" + j.at("format").get<std::string>() + "'"});
        BanditState s;
        s.config = bandit_config_from_json(j.at("config"));
        s.schema = FeatureSchema(j.at("schema").at("flag_names").get<std::vector<std::string>>(),
                                 j.at("schema").at("categories").get<std::vector<std::string>>());
        s.seed = j.at("seed").get<std::uint64_t>();
        s.episodes = j.at("episodes").get<std::uint64_t>();
        s.version = j.at("version").get<std::uint64_t>();
        s.model = reward_model_from_json(j.at("model"));
        if (s.model.dim() != s.schema.dim()) throw ValidationError({"bandit state: model dimension does not match schema"});
        s.buffer = ReplayBuffer(s.config.buffer_capacity);
        for (const auto& e : j.at("buffer"))
            s.buffer.push({e.at("x").get<std::vector<double>>(), e.at("recipe").get<std::string>(), e.at("r").get<double>()});
        return s;
    } catch (const json::exception& e) {
        throw ValidationError({std::string("bandit state: ") + e.what()});
    } catch (const ConfigError& e) {
        throw ValidationError({std::string("bandit state: ") + e.what()});
    }
}

}  // namespace mealrec
