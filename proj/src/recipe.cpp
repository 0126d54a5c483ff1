#include "mealrec/recipe.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "mealrec/error.hpp"

namespace mealrec {

namespace {

constexpr std::array<std::string_view, 4> kRoleTokens{"main", "side", "dessert", "beverage"};

bool is_blank(std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

std::string join_violations(const std::vector<std::string>& v) {
    std::string out;
    for (const auto& s : v) {
        if (!out.empty()) out += '\n';
        out += s;
    }
    return out;
}

void check_keys(const json& obj, std::initializer_list<std::string_view> required,
                std::initializer_list<std::string_view> optional, const std::string& where,
                std::vector<std::string>& out) {
    for (auto key : required)
        if (!obj.contains(key)) out.push_back(where + std::string(key) + ": required field missing");
    for (const auto& [key, _] : obj.items()) {
        auto known = [&](std::initializer_list<std::string_view> keys) {
            return std::find(keys.begin(), keys.end(), key) != keys.end();
        };
        if (!known(required) && !known(optional)) out.push_back(where + key + ": unknown field");
    }
}

void check_name_list(const json& raw, const std::string& field, std::vector<std::string>& out,
                     bool require_non_empty_names) {
    if (!raw.is_array()) {
        out.push_back(field + ": must be an array of strings");
        return;
    }
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const auto& v = raw[i];
        if (!v.is_string()) {
            out.push_back(field + "[" + std::to_string(i) + "]: must be a string");
        } else if (require_non_empty_names && v.get_ref<const std::string&>().empty()) {
            out.push_back(field + "[" + std::to_string(i) + "]: name must be non-empty");
        }
    }
}

void check_ingredient(const json& raw, const std::string& where, std::vector<std::string>& out) {
    if (!raw.is_object()) {
        out.push_back(where + ": must be an object");
        return;
    }
    check_keys(raw, {"name", "amount", "unit"}, {}, where + ".", out);
    if (raw.contains("name")) {
        const auto& n = raw["name"];
        if (!n.is_string() || is_blank(n.get_ref<const std::string&>()))
            out.push_back(where + ".name: name must be non-empty");
    }
    if (raw.contains("amount")) {
        const auto& a = raw["amount"];
        if (!a.is_number())
            out.push_back(where + ".amount: must be a number");
        else if (!(a.get<double>() >= 0.0))
            out.push_back(where + ".amount: amount must be ≥ 0");
    }
    if (raw.contains("unit")) {
        const auto& u = raw["unit"];
        if (!u.is_string() || is_blank(u.get_ref<const std::string&>()))
            out.push_back(where + ".unit: unit must be non-empty");
    }
}

void check_step(const json& raw, const std::string& where, std::vector<std::string>& out) {
    if (!raw.is_object()) {
        out.push_back(where + ": must be an object");
        return;
    }
    check_keys(raw, {"index", "action", "inputs", "outputs"},
               {"duration_seconds", "tools", "media_refs"}, where + ".", out);
    if (raw.contains("index") && !raw["index"].is_number_integer())
        out.push_back(where + ".index: must be an integer");
    if (raw.contains("action")) {
        const auto& a = raw["action"];
        if (!a.is_string() || a.get_ref<const std::string&>().empty())
            out.push_back(where + ".action: action must be non-empty");
    }
    if (raw.contains("inputs")) check_name_list(raw["inputs"], where + ".inputs", out, true);
    if (raw.contains("outputs")) check_name_list(raw["outputs"], where + ".outputs", out, true);
    if (raw.contains("duration_seconds")) {
        const auto& d = raw["duration_seconds"];
        if (!d.is_number_integer() || d.get<std::int64_t>() < 0)
            out.push_back(where + ".duration_seconds: must be a non-negative integer");
    }
    if (raw.contains("tools")) check_name_list(raw["tools"], where + ".tools", out, false);
    if (raw.contains("media_refs"))
        check_name_list(raw["media_refs"], where + ".media_refs", out, false);
}

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
    std::size_t line = 1;
    std::size_t col = 1;
    byte = std::min(byte, text.size());
    // nlohmann reports the byte *after* the offending character.
    for (std::size_t i = 0; i + 1 < byte; ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

Recipe recipe_from_json(const json& raw, const std::vector<std::string>& flag_names) {
    Recipe r;
    r.id = raw.at("id").get<std::string>();
    r.name = raw.at("name").get<std::string>();
    r.category = raw.at("category").get<std::string>();
    for (const auto& ing : raw.at("ingredients"))
        r.ingredients.push_back(
            {ing.at("name").get<std::string>(), ing.at("amount").get<double>(), ing.at("unit").get<std::string>()});
    for (const auto& s : raw.at("steps")) {
        InstructionStep step;
        step.index = s.at("index").get<int>();
        step.action = s.at("action").get<std::string>();
        step.inputs = s.at("inputs").get<std::vector<std::string>>();
        step.outputs = s.at("outputs").get<std::vector<std::string>>();
        if (s.contains("duration_seconds")) step.duration_seconds = s["duration_seconds"].get<std::int64_t>();
        if (s.contains("tools")) step.tools = s["tools"].get<std::vector<std::string>>();
        if (s.contains("media_refs")) step.media_refs = s["media_refs"].get<std::vector<std::string>>();
        r.steps.push_back(std::move(step));
    }
    for (const auto& token : raw.at("roles")) r.roles.insert(*parse_role(token.get<std::string>()));
    const auto& flags = raw.at("flags");
    r.flags.reserve(flag_names.size());
    for (const auto& name : flag_names) r.flags.push_back(flags.at(name).get<bool>());
    return r;
}

double round2(double x) { return std::round(x * 100.0) / 100.0; }

}  // namespace

std::string_view to_string(Role role) noexcept {
    return kRoleTokens[static_cast<std::size_t>(role)];
}

std::optional<Role> parse_role(std::string_view token) noexcept {
    for (std::size_t i = 0; i < kRoleTokens.size(); ++i)
        if (kRoleTokens[i] == token) return static_cast<Role>(i);
    return std::nullopt;
}

std::size_t RoleSet::size() const noexcept { return static_cast<std::size_t>(std::popcount(bits_)); }

std::vector<Role> RoleSet::to_vector() const {
    std::vector<Role> out;
    for (auto r : kAllRoles)
        if (contains(r)) out.push_back(r);
    return out;
}

ValidationError::ValidationError(std::vector<std::string> violations)
    : ValidationError(join_violations(violations), violations) {}

ValidationError::ValidationError(std::string summary, std::vector<std::string> violations)
    : Error(std::move(summary)), violations_(std::move(violations)) {}

RecipeDataset::RecipeDataset(std::vector<std::string> flag_names, std::vector<Recipe> recipes)
    : flag_names_(std::move(flag_names)), recipes_(std::move(recipes)) {
    std::vector<std::string> problems;
    for (std::size_t i = 0; i < recipes_.size(); ++i) {
        const auto& r = recipes_[i];
        if (!index_.emplace(r.id, i).second) problems.push_back("duplicate recipe id '" + r.id + "'");
        if (r.flags.size() != flag_names_.size())
            problems.push_back("recipe '" + r.id + "': flags: expected " +
                               std::to_string(flag_names_.size()) + " flags");
        for (auto role : kAllRoles)
            if (r.roles.contains(role)) eligible_[static_cast<std::size_t>(role)].push_back(i);
    }
    if (!problems.empty()) throw ValidationError(std::move(problems));
    for (auto role : missing_roles())
        warnings_.push_back("no recipe can fill role '" + std::string(to_string(role)) + "'");
}

const Recipe* RecipeDataset::find(std::string_view id) const {
    auto i = index_of(id);
    return i ? &recipes_[*i] : nullptr;
}

std::optional<std::size_t> RecipeDataset::index_of(std::string_view id) const {
    auto it = index_.find(std::string(id));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::optional<std::size_t> RecipeDataset::flag_index(std::string_view name) const {
    auto it = std::find(flag_names_.begin(), flag_names_.end(), name);
    if (it == flag_names_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - flag_names_.begin());
}

std::vector<Role> RecipeDataset::missing_roles() const {
    std::vector<Role> out;
    for (auto role : kAllRoles)
        if (eligible(role).empty()) out.push_back(role);
    return out;
}

std::vector<std::string> RecipeDataset::categories() const {
    std::set<std::string> cats;
    for (const auto& r : recipes_) cats.insert(r.category);
    return {cats.begin(), cats.end()};
}

std::vector<std::string> validate_recipe(const json& raw, LoadMode mode,
                                         const std::vector<std::string>* flag_names) {
    std::vector<std::string> out;
    if (!raw.is_object()) {
        out.emplace_back("recipe: must be an object");
        return out;
    }
    check_keys(raw, {"id", "name", "category", "ingredients", "steps", "roles", "flags"}, {}, "", out);

    if (raw.contains("id")) {
        const auto& id = raw["id"];
        if (!id.is_string() || id.get_ref<const std::string&>().empty())
            out.emplace_back("id: id must be a non-empty string");
    }
    if (raw.contains("name") && !raw["name"].is_string()) out.emplace_back("name: must be a string");
    if (raw.contains("category")) {
        const auto& c = raw["category"];
        if (!c.is_string() || c.get_ref<const std::string&>().empty())
            out.emplace_back("category: category must be a non-empty string");
    }

    if (raw.contains("ingredients")) {
        const auto& ings = raw["ingredients"];
        if (!ings.is_array()) {
            out.emplace_back("ingredients: must be an array");
        } else {
            for (std::size_t i = 0; i < ings.size(); ++i)
                check_ingredient(ings[i], "ingredients[" + std::to_string(i) + "]", out);
        }
    }

    if (raw.contains("steps")) {
        const auto& steps = raw["steps"];
        if (!steps.is_array()) {
            out.emplace_back("steps: must be an array");
        } else {
            if (steps.empty() && mode == LoadMode::Full)
                out.emplace_back("steps: steps must be non-empty in full mode");
            bool consecutive = true;
            for (std::size_t i = 0; i < steps.size(); ++i) {
                check_step(steps[i], "steps[" + std::to_string(i) + "]", out);
                const auto* idx = steps[i].is_object() && steps[i].contains("index") ? &steps[i]["index"] : nullptr;
                if (idx && idx->is_number_integer() && idx->get<std::int64_t>() != static_cast<std::int64_t>(i + 1))
                    consecutive = false;
            }
            if (!consecutive) out.emplace_back("steps: steps not consecutive (indices must run 1..n)");
        }
    }

    if (raw.contains("roles")) {
        const auto& roles = raw["roles"];
        if (!roles.is_array()) {
            out.emplace_back("roles: must be an array");
        } else if (roles.empty()) {
            out.emplace_back("roles: roles must be non-empty");
        } else {
            std::set<std::string> seen;
            for (const auto& r : roles) {
                if (!r.is_string()) {
                    out.emplace_back("roles: entries must be strings");
                    continue;
                }
                const auto& token = r.get_ref<const std::string&>();
                if (!parse_role(token))
                    out.push_back("roles: unknown role '" + token + "' (expected main|side|dessert|beverage)");
                else if (!seen.insert(token).second)
                    out.push_back("roles: duplicate role '" + token + "'");
            }
        }
    }

    if (raw.contains("flags")) {
        const auto& flags = raw["flags"];
        if (!flags.is_object()) {
            out.emplace_back("flags: must be an object of booleans");
        } else {
            for (const auto& [key, value] : flags.items())
                if (!value.is_boolean()) out.push_back("flags." + key + ": must be a boolean");
            if (flag_names) {
                for (const auto& name : *flag_names)
                    if (!flags.contains(name)) out.push_back("flags: missing flag '" + name + "'");
                for (const auto& [key, _] : flags.items())
                    if (std::find(flag_names->begin(), flag_names->end(), key) == flag_names->end())
                        out.push_back("flags: unknown flag '" + key + "'");
            }
        }
    }
    return out;
}

RecipeDataset dataset_from_json(const json& doc, LoadMode mode) {
    std::vector<std::string> problems;
    if (!doc.is_object()) throw ValidationError({"dataset: top level must be an object"});
    check_keys(doc, {"flag_names", "recipes"}, {}, "dataset.", problems);
    if (!problems.empty()) throw ValidationError(std::move(problems));

    const auto& names = doc["flag_names"];
    std::vector<std::string> flag_names;
    if (!names.is_array() || names.empty()) {
        problems.emplace_back("dataset.flag_names: must be a non-empty array of strings");
    } else {
        for (const auto& n : names) {
            if (!n.is_string() || n.get_ref<const std::string&>().empty()) {
                problems.emplace_back("dataset.flag_names: entries must be non-empty strings");
                continue;
            }
            auto s = n.get<std::string>();
            if (std::find(flag_names.begin(), flag_names.end(), s) != flag_names.end())
                problems.push_back("dataset.flag_names: duplicate flag '" + s + "'");
            else
                flag_names.push_back(std::move(s));
        }
    }
    const auto& raws = doc["recipes"];
    if (!raws.is_array()) problems.emplace_back("dataset.recipes: must be an array");
    if (!problems.empty()) throw ValidationError(std::move(problems));

    for (std::size_t i = 0; i < raws.size(); ++i) {
        const auto& raw = raws[i];
        std::string label = "recipe #" + std::to_string(i);
        if (raw.is_object() && raw.contains("id") && raw["id"].is_string())
            label = "recipe '" + raw["id"].get<std::string>() + "'";
        for (auto& v : validate_recipe(raw, mode, &flag_names)) problems.push_back(label + ": " + v);
    }
    if (!problems.empty()) throw ValidationError(std::move(problems));

    std::vector<Recipe> recipes;
    recipes.reserve(raws.size());
    for (const auto& raw : raws) recipes.push_back(recipe_from_json(raw, flag_names));
    return RecipeDataset(std::move(flag_names), std::move(recipes));
}

RecipeDataset parse_dataset(std::string_view text, LoadMode mode) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        auto [line, col] = line_column(text, e.byte);
        std::ostringstream msg;
        msg << "parse error at line " << line << ", column " << col << ": " << e.what();
        throw ParseError(msg.str());
    }
    return dataset_from_json(doc, mode);
}

RecipeDataset load_dataset(const std::filesystem::path& path, LoadMode mode) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read dataset '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("error reading dataset '" + path.string() + "'");
    return parse_dataset(buf.str(), mode);
}

json to_json(const Recipe& recipe, const std::vector<std::string>& flag_names) {
    json ings = json::array();
    for (const auto& i : recipe.ingredients)
        ings.push_back({{"name", i.name}, {"amount", i.amount}, {"unit", i.unit}});
    json steps = json::array();
    for (const auto& s : recipe.steps) {
        json j{{"index", s.index}, {"action", s.action}, {"inputs", s.inputs}, {"outputs", s.outputs}};
        if (s.duration_seconds) j["duration_seconds"] = *s.duration_seconds;
        if (!s.tools.empty()) j["tools"] = s.tools;
        if (!s.media_refs.empty()) j["media_refs"] = s.media_refs;
        steps.push_back(std::move(j));
    }
    json roles = json::array();
    for (auto r : recipe.roles.to_vector()) roles.push_back(std::string(to_string(r)));
    json flags = json::object();
    for (std::size_t i = 0; i < flag_names.size(); ++i) flags[flag_names[i]] = static_cast<bool>(recipe.flags.at(i));
    return json{{"id", recipe.id},       {"name", recipe.name},   {"category", recipe.category},
                {"ingredients", ings},   {"steps", steps},        {"roles", roles},
                {"flags", flags}};
}

json to_json(const RecipeDataset& ds) {
    json recipes = json::array();
    for (const auto& r : ds.recipes()) recipes.push_back(to_json(r, ds.flag_names()));
    return json{{"flag_names", ds.flag_names()}, {"recipes", recipes}};
}

std::vector<CategoryStats> dataset_stats(const RecipeDataset& ds) {
    if (ds.empty()) throw DomainError("dataset is empty");
    std::vector<CategoryStats> out;
    std::vector<std::vector<std::size_t>> hits;
    for (const auto& r : ds.recipes()) {
        auto it = std::find_if(out.begin(), out.end(), [&](const auto& c) { return c.category == r.category; });
        std::size_t k = static_cast<std::size_t>(it - out.begin());
        if (it == out.end()) {
            out.push_back({r.category, {}, 0});
            hits.emplace_back(ds.flag_names().size(), 0);
        }
        ++out[k].count;
        for (std::size_t f = 0; f < r.flags.size(); ++f)
            if (r.flags[f]) ++hits[k][f];
    }
    for (std::size_t k = 0; k < out.size(); ++k)
        for (auto h : hits[k])
            out[k].flag_pct.push_back(round2(100.0 * static_cast<double>(h) / static_cast<double>(out[k].count)));
    return out;
}

}  // namespace mealrec
