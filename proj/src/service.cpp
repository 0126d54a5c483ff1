#include "mealrec/service.hpp"

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "mealrec/error.hpp"
#include "mealrec/metrics.hpp"
#include "mealrec/rng.hpp"

namespace mealrec {

namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_atomic(const fs::path& path, const std::string& text) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create " + path.parent_path().string() + ": " + ec.message());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out << text;
        out.flush();
        if (!out) throw IoError("short write to " + tmp.string());
    }
    fs::rename(tmp, path, ec);
    if (ec) throw IoError("cannot replace " + path.string() + ": " + ec.message());
}

fs::path resolve(const fs::path& p, const fs::path& base) { return p.is_relative() && !base.empty() ? base / p : p; }

std::optional<json> parse_body(const std::string& body) {
    auto j = json::parse(body, nullptr, false);
    if (j.is_discarded()) return std::nullopt;
    return j;
}

std::string join(const std::vector<std::string>& parts) {
    std::string out;
    for (const auto& p : parts) out += (out.empty() ? "" : "; ") + p;
    return out;
}

json profile_body(const ProfileStore::Entry& e) {
    auto j = to_json(e.profile);
    j["version"] = e.version;
    return j;
}

template <typename T>
std::optional<T> int_field(const json& j, const char* key) {
    if (!j.contains(key)) return std::nullopt;
    if (!j[key].is_number_integer()) throw ValidationError({std::string(key) + ": must be an integer"});
    return j[key].get<T>();
}

std::string hex(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%012llx", static_cast<unsigned long long>(v & 0xffffffffffffULL));
    return buf;
}

}  // namespace

// ---- config ---------------------------------------------------------------

ServiceConfig service_config_from_json(const json& j, const fs::path& base_dir) {
    if (!j.is_object()) throw ConfigError("service config must be a JSON object");
    ServiceConfig cfg;
    try {
        for (const auto& [k, v] : j.items()) {
            if (k == "host")
                cfg.host = v.get<std::string>();
            else if (k == "port")
                cfg.port = v.get<int>();
            else if (k == "dataset")
                cfg.dataset = resolve(v.get<std::string>(), base_dir);
            else if (k == "store_dir")
                cfg.store_dir = resolve(v.get<std::string>(), base_dir);
            else if (k == "static_dir")
                cfg.static_dir = resolve(v.get<std::string>(), base_dir);
            else if (k == "train_episodes")
                cfg.train_episodes = v.get<int>();
            else if (k == "bandit")
                cfg.bandit = bandit_config_from_json(v);
            else
                throw ConfigError("service config: unknown key '" + k + "'");
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("service config: ") + e.what());
    }
    if (cfg.port < 0 || cfg.port > 65535) throw ConfigError("service config: port out of range");
    if (cfg.train_episodes < 1) throw ConfigError("service config: train_episodes must be positive");
    auto problems = validate_bandit_config(cfg.bandit);
    if (!problems.empty()) throw ConfigError("service config: " + problems.front());
    return cfg;
}

ServiceConfig load_service_config(const fs::path& path) {
    const auto text = read_file(path);
    auto j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ConfigError("service config " + path.string() + " is not valid JSON");
    return service_config_from_json(j, path.parent_path());
}

void apply_env_overrides(ServiceConfig& cfg) {
    auto env = [](const char* name) -> std::optional<std::string> {
        const char* v = std::getenv(name);
        if (!v || !*v) return std::nullopt;
        return std::string(v);
    };
    auto number = [](const char* name, const std::string& v) {
        try {
            std::size_t pos = 0;
            double d = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return d;
        } catch (const std::exception&) {
            throw ConfigError(std::string(name) + ": not a number: '" + v + "'");
        }
    };
    if (auto v = env("MEALREC_HOST")) cfg.host = *v;
    if (auto v = env("MEALREC_PORT")) cfg.port = static_cast<int>(number("MEALREC_PORT", *v));
    if (auto v = env("MEALREC_DATASET")) cfg.dataset = *v;
    if (auto v = env("MEALREC_STORE_DIR")) cfg.store_dir = *v;
    if (auto v = env("MEALREC_STATIC_DIR")) cfg.static_dir = fs::path(*v);
    if (auto v = env("MEALREC_TRAIN_EPISODES"))
        cfg.train_episodes = static_cast<int>(number("MEALREC_TRAIN_EPISODES", *v));
    if (auto v = env("MEALREC_EPSILON0")) cfg.bandit.epsilon0 = number("MEALREC_EPSILON0", *v);
    if (auto v = env("MEALREC_LEARNING_RATE")) cfg.bandit.learning_rate = number("MEALREC_LEARNING_RATE", *v);
    if (auto v = env("MEALREC_MAX_STUMPS"))
        cfg.bandit.max_stumps = static_cast<std::size_t>(number("MEALREC_MAX_STUMPS", *v));
    if (cfg.port < 0 || cfg.port > 65535) throw ConfigError("MEALREC_PORT out of range");
    if (cfg.train_episodes < 1) throw ConfigError("MEALREC_TRAIN_EPISODES must be positive");
    auto problems = validate_bandit_config(cfg.bandit);
    if (!problems.empty()) throw ConfigError(problems.front());
}

// ---- store ----------------------------------------------------------------

bool valid_user_id(std::string_view id) noexcept {
    if (id.empty() || id.size() > 64 || id.front() == '.') return false;
    for (char c : id) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
                        c == '-' || c == '.';
        if (!ok) return false;
    }
    return true;
}

ProfileStore::ProfileStore(fs::path root) : root_(std::move(root)) {
    std::error_code ec;
    fs::create_directories(root_ / "profiles", ec);
    if (!ec) fs::create_directories(root_ / "models", ec);
    if (ec) throw IoError("cannot create store at " + root_.string() + ": " + ec.message());
}

std::optional<ProfileStore::Entry> ProfileStore::get(const std::string& user_id) const {
    const auto path = root_ / "profiles" / (user_id + ".json");
    if (!fs::exists(path)) return std::nullopt;
    auto j = json::parse(read_file(path), nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw IoError("corrupt profile document " + path.string());
    Entry e;
    e.version = j.value("version", std::uint64_t{0});
    e.profile = profile_from_json(j);
    return e;
}

ProfileStore::Entry ProfileStore::put(const UserProfile& profile) {
    Entry e{profile, 1};
    if (auto old = get(profile.user_id)) e.version = old->version + 1;
    write_atomic(root_ / "profiles" / (profile.user_id + ".json"), profile_body(e).dump(2) + "\n");
    return e;
}

std::optional<BanditState> ProfileStore::load_model(const std::string& user_id) const {
    const auto path = root_ / "models" / (user_id + ".json");
    if (!fs::exists(path)) return std::nullopt;
    auto j = json::parse(read_file(path), nullptr, false);
    if (j.is_discarded()) throw IoError("corrupt model document " + path.string());
    return bandit_state_from_json(j);
}

void ProfileStore::drop_model(const std::string& user_id) {
    std::error_code ec;
    fs::remove(root_ / "models" / (user_id + ".json"), ec);
    if (ec) throw IoError("cannot remove model for " + user_id + ": " + ec.message());
}

void ProfileStore::save_model(const std::string& user_id, const BanditState& state) {
    write_atomic(root_ / "models" / (user_id + ".json"), to_json(state).dump() + "\n");
}

// ---- handlers -------------------------------------------------------------

Response error_response(int status, std::string code, std::string message) {
    return {status, json{{"code", std::move(code)}, {"message", std::move(message)}}};
}

Service::Service(RecipeDataset ds, ServiceConfig cfg, DayConfig day)
    : ds_(std::move(ds)), cfg_(std::move(cfg)), day_(std::move(day)), store_(cfg_.store_dir),
      plan_salt_(entropy_seed()) {}

std::mutex& Service::user_lock(const std::string& user_id) {
    std::lock_guard lock(locks_mu_);
    auto& slot = user_locks_[user_id];
    if (!slot) slot = std::make_unique<std::mutex>();
    return *slot;
}

Response Service::health() const {
    json missing = json::array();
    for (auto r : ds_.missing_roles()) missing.push_back(std::string(to_string(r)));
    return {200, json{{"status", missing.empty() ? "ok" : "degraded"},
                      {"recipes", ds_.size()},
                      {"flags", ds_.flag_names()},
                      {"missing_roles", missing}}};
}

Response Service::list_recipes(const std::multimap<std::string, std::string>& query) const {
    std::vector<Role> roles;
    std::vector<std::size_t> flags;
    std::set<std::string> categories;
    for (const auto& [k, v] : query) {
        if (k == "role") {
            auto r = parse_role(v);
            if (!r) return error_response(400, "bad_request", "unknown role '" + v + "'");
            roles.push_back(*r);
        } else if (k == "flag") {
            auto f = ds_.flag_index(v);
            if (!f) return error_response(400, "bad_request", "unknown flag '" + v + "'");
            flags.push_back(*f);
        } else if (k == "category") {
            categories.insert(v);
        } else {
            return error_response(400, "bad_request", "unknown query parameter '" + k + "'");
        }
    }
    json out = json::array();
    for (const auto& r : ds_.recipes()) {
        bool keep = categories.empty() || categories.count(r.category);
        for (auto role : roles) keep = keep && r.roles.contains(role);
        for (auto f : flags) keep = keep && r.flags[f];
        if (keep) out.push_back(to_json(r, ds_.flag_names()));
    }
    return {200, out};
}

Response Service::get_recipe(const std::string& id) const {
    const auto* r = ds_.find(id);
    if (!r) return error_response(404, "not_found", "unknown recipe id '" + id + "'");
    return {200, to_json(*r, ds_.flag_names())};
}

Response Service::put_profile(const std::string& user_id, const std::string& body) {
    if (!valid_user_id(user_id)) return error_response(400, "invalid_user_id", "invalid user id '" + user_id + "'");
    auto j = parse_body(body);
    if (!j || !j->is_object()) return error_response(400, "bad_request", "body must be a JSON object");
    if (!j->contains("user_id")) (*j)["user_id"] = user_id;
    try {
        auto profile = profile_from_json(*j);
        if (profile.user_id != user_id)
            return error_response(400, "validation_failed", "user_id in body does not match the path");
        auto problems = validate_profile(profile, ds_.flag_names());
        if (!problems.empty()) return error_response(400, "validation_failed", join(problems));
        std::lock_guard lock(user_lock(user_id));
        // The reward model is additive, so preferences cannot steer an
        // existing model's argmax. Retrain on the next plan instead.
        if (auto old = store_.get(user_id); old && old->profile.prefs != profile.prefs) {
            models_.erase(user_id);
            store_.drop_model(user_id);
        }
        return {200, profile_body(store_.put(profile))};
    } catch (const ValidationError& e) {
        return error_response(400, "validation_failed", join(e.violations()));
    }
}

Response Service::get_profile(const std::string& user_id) const {
    if (!valid_user_id(user_id)) return error_response(400, "invalid_user_id", "invalid user id '" + user_id + "'");
    auto e = store_.get(user_id);
    if (!e) return error_response(404, "not_found", "no profile for '" + user_id + "'");
    return {200, profile_body(*e)};
}

BanditState& Service::bandit_for(const UserProfile& profile, int horizon, bool& trained) {
    trained = false;
    auto it = models_.find(profile.user_id);
    if (it != models_.end()) return it->second;
    if (auto stored = store_.load_model(profile.user_id); stored && stored->schema.compatible_with(ds_))
        return models_.emplace(profile.user_id, std::move(*stored)).first->second;
    auto state = BanditState::create(ds_, cfg_.bandit, derive_seed(plan_salt_, {std::hash<std::string>{}(profile.user_id)}));
    bandit_train(state, ds_, day_, std::span<const UserProfile>(&profile, 1), cfg_.train_episodes, horizon);
    store_.save_model(profile.user_id, state);
    trained = true;
    return models_.emplace(profile.user_id, std::move(state)).first->second;
}

Response Service::create_plan(const std::string& body) {
    auto j = parse_body(body);
    if (!j || !j->is_object()) return error_response(400, "bad_request", "body must be a JSON object");
    std::string user_id;
    int horizon = 0;
    RecommenderKind kind{};
    std::optional<std::uint64_t> seed;
    bool explore = false;
    try {
        static const std::set<std::string> known{"user_id", "horizon", "algorithm", "seed", "explore"};
        for (const auto& [k, _] : j->items())
            if (!known.count(k)) return error_response(400, "bad_request", "unknown field '" + k + "'");
        if (!j->contains("user_id") || !(*j)["user_id"].is_string())
            return error_response(400, "bad_request", "user_id: required string");
        user_id = (*j)["user_id"].get<std::string>();
        auto h = int_field<int>(*j, "horizon");
        if (!h) return error_response(400, "bad_request", "horizon: required integer");
        horizon = *h;
        const auto algo = j->value("algorithm", std::string("bandit"));
        auto parsed = parse_recommender(algo);
        if (!parsed) return error_response(400, "bad_request", "unknown algorithm '" + algo + "'");
        kind = *parsed;
        seed = int_field<std::uint64_t>(*j, "seed");
        if (j->contains("explore")) explore = (*j)["explore"].get<bool>();
    } catch (const ValidationError& e) {
        return error_response(400, "bad_request", join(e.violations()));
    } catch (const json::exception& e) {
        return error_response(400, "bad_request", e.what());
    }
    if (!valid_user_id(user_id)) return error_response(400, "invalid_user_id", "invalid user id '" + user_id + "'");
    if (!horizon_bounds().contains(horizon))
        return error_response(422, "horizon_out_of_bounds", "horizon " + std::to_string(horizon) + " outside [1, 5]");
    try {
        require_recommendable(ds_, day_, horizon);
    } catch (const DomainError& e) {
        return error_response(503, "dataset_incomplete", e.what());
    }

    std::lock_guard lock(user_lock(user_id));
    auto entry = store_.get(user_id);
    if (!entry) return error_response(404, "not_found", "no profile for '" + user_id + "'");
    const auto& profile = entry->profile;
    const std::uint64_t used_seed = seed.value_or(entropy_seed_53());
    Rng rng(used_seed);
    MealPlan plan;
    json model = nullptr;
    switch (kind) {
        case RecommenderKind::Random:
            plan = recommend_random(ds_, day_, profile, horizon, rng);
            break;
        case RecommenderKind::Sequential:
            plan = recommend_sequential(ds_, day_, profile, horizon, cursors_[user_id]);
            break;
        case RecommenderKind::Bandit: {
            bool trained = false;
            auto& state = bandit_for(profile, horizon, trained);
            plan = recommend_bandit(ds_, day_, profile, horizon, state, rng,
                                    explore ? std::nullopt : std::optional<double>(0.0));
            model = {{"version", state.version},
                     {"episodes", state.episodes},
                     {"stumps", state.model.stumps().size()},
                     {"trained_now", trained}};
            break;
        }
    }
    const auto plan_id = "plan-" + hex(derive_seed(plan_salt_, {++plan_counter_}));
    json out{{"plan_id", plan_id},
             {"algorithm", std::string(to_string(kind))},
             {"seed", used_seed},
             {"horizon", horizon},
             {"plan", to_json(plan)},
             {"scores", to_json(score_plan(plan, ds_, day_, profile))},
             {"model", model}};
    {
        std::lock_guard plans(plans_mu_);
        plans_.emplace(plan_id, IssuedPlan{user_id, kind, profile, std::move(plan)});
    }
    return {200, out};
}

Response Service::feedback(const std::string& body) {
    auto j = parse_body(body);
    if (!j || !j->is_object()) return error_response(400, "bad_request", "body must be a JSON object");
    if (!j->contains("plan_id") || !(*j)["plan_id"].is_string())
        return error_response(400, "bad_request", "plan_id: required string");
    if (!j->contains("slots") || !(*j)["slots"].is_array() || (*j)["slots"].empty())
        return error_response(400, "bad_request", "slots: required non-empty array");
    const auto plan_id = (*j)["plan_id"].get<std::string>();

    IssuedPlan issued;
    {
        std::lock_guard plans(plans_mu_);
        auto it = plans_.find(plan_id);
        if (it == plans_.end()) return error_response(404, "not_found", "unknown plan id '" + plan_id + "'");
        issued = it->second;
    }
    if (issued.algorithm != RecommenderKind::Bandit)
        return error_response(409, "not_bandit_plan", "feedback requires bandit plans");

    // Flattened slot offsets per (day, meal).
    std::vector<std::size_t> meal_offset;
    std::size_t total = 0;
    for (const auto& day : issued.plan.days)
        for (const auto& m : day.meals) {
            meal_offset.push_back(total);
            total += m.items.size();
        }
    std::map<std::size_t, double> chosen;
    for (const auto& s : (*j)["slots"]) {
        if (!s.is_object() || !s.contains("day") || !s["day"].is_number_integer() || !s.contains("meal") ||
            !s["meal"].is_string() || !s.contains("slot") || !s["slot"].is_number_integer() || !s.contains("accept") ||
            !s["accept"].is_boolean())
            return error_response(400, "bad_request", "each slot needs day (int), meal (string), slot (int), accept (bool)");
        const auto day = s["day"].get<long long>();
        const auto meal = parse_meal(s["meal"].get<std::string>());
        const auto slot = s["slot"].get<long long>();
        if (day < 1 || day > static_cast<long long>(issued.plan.days.size()))
            return error_response(400, "bad_slot", "day " + std::to_string(day) + " not in plan");
        if (!meal) return error_response(400, "bad_slot", "unknown meal '" + s["meal"].get<std::string>() + "'");
        const auto& meals = issued.plan.days[static_cast<std::size_t>(day - 1)].meals;
        std::size_t m = 0;
        while (m < meals.size() && meals[m].meal != *meal) ++m;
        if (m == meals.size()) return error_response(400, "bad_slot", "meal not in plan");
        if (slot < 0 || slot >= static_cast<long long>(meals[m].items.size()))
            return error_response(400, "bad_slot", "slot " + std::to_string(slot) + " not in meal");
        const auto k = meal_offset[static_cast<std::size_t>(day - 1) * meals.size() + m] + static_cast<std::size_t>(slot);
        if (!chosen.emplace(k, s["accept"].get<bool>() ? 1.0 : 0.0).second)
            return error_response(400, "bad_slot", "slot referenced twice");
    }

    std::lock_guard lock(user_lock(issued.user_id));
    bool trained = false;
    auto& state = bandit_for(issued.profile, static_cast<int>(issued.plan.days.size()), trained);
    std::vector<double> rewards(total, 0.0);
    for (auto [k, r] : chosen) rewards[k] = r;
    auto experiences = plan_experiences(state, ds_, day_, issued.profile, issued.plan, rewards);
    for (auto [k, r] : chosen) state.buffer.push(std::move(experiences[k]));
    const auto added = boost_round(state);
    store_.save_model(issued.user_id, state);
    return {200, json{{"plan_id", plan_id},
                      {"applied", chosen.size()},
                      {"stumps_added", added},
                      {"model_version", state.version},
                      {"stumps", state.model.stumps().size()}}};
}

Response Service::score(const std::string& body) const {
    auto j = parse_body(body);
    if (!j || !j->is_object() || !j->contains("plan"))
        return error_response(400, "bad_request", "body must be an object with plan and user_id or profile");
    try {
        UserProfile profile;
        if (j->contains("profile")) {
            profile = profile_from_json((*j)["profile"]);
            auto problems = validate_profile(profile, ds_.flag_names());
            if (!problems.empty()) return error_response(400, "validation_failed", join(problems));
        } else if (j->contains("user_id") && (*j)["user_id"].is_string()) {
            const auto id = (*j)["user_id"].get<std::string>();
            if (!valid_user_id(id)) return error_response(400, "invalid_user_id", "invalid user id '" + id + "'");
            auto e = store_.get(id);
            if (!e) return error_response(404, "not_found", "no profile for '" + id + "'");
            profile = e->profile;
        } else {
            return error_response(400, "bad_request", "user_id or profile required");
        }
        const auto plan = plan_from_json((*j)["plan"]);
        auto problems = validate_plan(plan, ds_, day_);
        if (!problems.empty()) return error_response(400, "validation_failed", join(problems));
        return {200, to_json(score_plan(plan, ds_, day_, profile))};
    } catch (const ValidationError& e) {
        return error_response(400, "validation_failed", join(e.violations()));
    }
}

// ---- transport ------------------------------------------------------------

HttpServer::HttpServer(Service& service) : service_(service), server_(std::make_unique<httplib::Server>()) {
    auto& srv = *server_;
    auto send = [](httplib::Response& res, const Response& r) {
        res.status = r.status;
        res.set_content(r.body.dump(), "application/json; charset=utf-8");
    };
    auto guarded = [send](auto handler) {
        return [send, handler](const httplib::Request& req, httplib::Response& res) {
            try {
                send(res, handler(req));
            } catch (const std::exception& e) {
                send(res, error_response(500, "internal", e.what()));
            }
        };
    };
    srv.Get("/health", guarded([this](const httplib::Request&) { return service_.health(); }));
    srv.Get("/recipes", guarded([this](const httplib::Request& req) {
                std::multimap<std::string, std::string> q(req.params.begin(), req.params.end());
                return service_.list_recipes(q);
            }));
    srv.Get(R"(/recipes/([^/]+))",
            guarded([this](const httplib::Request& req) { return service_.get_recipe(req.matches[1]); }));
    srv.Put(R"(/profiles/([^/]+))", guarded([this](const httplib::Request& req) {
                return service_.put_profile(req.matches[1], req.body);
            }));
    srv.Get(R"(/profiles/([^/]+))",
            guarded([this](const httplib::Request& req) { return service_.get_profile(req.matches[1]); }));
    srv.Post("/plans", guarded([this](const httplib::Request& req) { return service_.create_plan(req.body); }));
    srv.Post("/feedback", guarded([this](const httplib::Request& req) { return service_.feedback(req.body); }));
    srv.Post("/score", guarded([this](const httplib::Request& req) { return service_.score(req.body); }));
    if (service_.config().static_dir) srv.set_mount_point("/", service_.config().static_dir->string());
    srv.set_error_handler([send](const httplib::Request&, httplib::Response& res) {
        if (res.body.empty()) send(res, error_response(res.status, "not_found", "no such route"));
    });
}

HttpServer::~HttpServer() = default;

int HttpServer::bind() {
    const auto& cfg = service_.config();
    if (cfg.port == 0) {
        const int port = server_->bind_to_any_port(cfg.host);
        if (port < 0) throw IoError("cannot bind " + cfg.host);
        return port;
    }
    if (!server_->bind_to_port(cfg.host, cfg.port))
        throw IoError("cannot bind " + cfg.host + ":" + std::to_string(cfg.port));
    return cfg.port;
}

void HttpServer::listen() { server_->listen_after_bind(); }

void HttpServer::stop() { server_->stop(); }

void run_service(const ServiceConfig& cfg, std::ostream& log) {
    auto ds = load_dataset(cfg.dataset, LoadMode::Full);
    Service service(std::move(ds), cfg);

    // Signals are received by a dedicated thread via sigwait, so shutdown
    // runs outside signal context.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGTERM);
    sigaddset(&signals, SIGINT);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    HttpServer server(service);
    const int port = server.bind();
    log << "serving " << service.dataset().size() << " recipes on http://" << cfg.host << ':' << port << std::endl;

    std::atomic<bool> done{false};
    std::atomic<bool> signalled{false};
    std::thread waiter([&] {
        int sig = 0;
        sigwait(&signals, &sig);
        signalled = true;
        if (!done) log << "received signal " << sig << ", shutting down" << std::endl;
        server.stop();
    });
    server.listen();
    done = true;
    // Wake the waiter if listen returned for another reason.
    if (!signalled) pthread_kill(waiter.native_handle(), SIGTERM);
    waiter.join();
    pthread_sigmask(SIG_UNBLOCK, &signals, nullptr);
    log << "stopped" << std::endl;
}

}  // namespace mealrec
