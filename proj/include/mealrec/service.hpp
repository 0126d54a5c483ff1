#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "mealrec/bandit.hpp"
#include "mealrec/meal.hpp"
#include "mealrec/recipe.hpp"
#include "mealrec/recommend.hpp"

namespace httplib {
class Server;
}

namespace mealrec {

struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::filesystem::path dataset = "data/recipes.json";
    std::filesystem::path store_dir = "store";
    std::optional<std::filesystem::path> static_dir;
    // Episodes used when a bandit plan is requested for a user with no model.
    int train_episodes = 50;
    BanditConfig bandit;
};

// Relative paths in the file resolve against the file's directory.
ServiceConfig service_config_from_json(const json& j, const std::filesystem::path& base_dir = {});
ServiceConfig load_service_config(const std::filesystem::path& path);
// MEALREC_HOST, MEALREC_PORT, MEALREC_DATASET, MEALREC_STORE_DIR,
// MEALREC_STATIC_DIR, MEALREC_TRAIN_EPISODES, MEALREC_EPSILON0,
// MEALREC_LEARNING_RATE, MEALREC_MAX_STUMPS. Throws ConfigError on bad values.
void apply_env_overrides(ServiceConfig& cfg);

// Directory of JSON documents: profiles/<user>.json and models/<user>.json.
// Writes go to a temp file that is renamed over the target.
class ProfileStore {
public:
    struct Entry {
        UserProfile profile;
        std::uint64_t version = 0;
    };

    explicit ProfileStore(std::filesystem::path root);

    std::optional<Entry> get(const std::string& user_id) const;
    // Bumps the version and returns the stored entry.
    Entry put(const UserProfile& profile);

    std::optional<BanditState> load_model(const std::string& user_id) const;
    void save_model(const std::string& user_id, const BanditState& state);
    void drop_model(const std::string& user_id);

    const std::filesystem::path& root() const noexcept { return root_; }

private:
    std::filesystem::path root_;
};

// Letters, digits, '_', '-' and '.', at most 64 characters, not starting with '.'.
bool valid_user_id(std::string_view id) noexcept;

struct Response {
    int status = 200;
    json body;
};

Response error_response(int status, std::string code, std::string message);

// Request handlers, independent of the HTTP transport.
class Service {
public:
    Service(RecipeDataset ds, ServiceConfig cfg, DayConfig day = default_day_config());

    Response health() const;
    Response list_recipes(const std::multimap<std::string, std::string>& query) const;
    Response get_recipe(const std::string& id) const;
    Response put_profile(const std::string& user_id, const std::string& body);
    Response get_profile(const std::string& user_id) const;
    Response create_plan(const std::string& body);
    Response feedback(const std::string& body);
    Response score(const std::string& body) const;

    const RecipeDataset& dataset() const noexcept { return ds_; }
    const ServiceConfig& config() const noexcept { return cfg_; }

private:
    struct IssuedPlan {
        std::string user_id;
        RecommenderKind algorithm;
        UserProfile profile;  // as it was when the plan was issued
        MealPlan plan;
    };

    std::mutex& user_lock(const std::string& user_id);
    // Caller holds the user lock.
    BanditState& bandit_for(const UserProfile& profile, int horizon, bool& trained);

    RecipeDataset ds_;
    ServiceConfig cfg_;
    DayConfig day_;
    ProfileStore store_;

    std::mutex locks_mu_;
    std::map<std::string, std::unique_ptr<std::mutex>> user_locks_;
    std::map<std::string, BanditState> models_;          // guarded by the user lock
    std::map<std::string, SequentialCursor> cursors_;    // guarded by the user lock

    mutable std::mutex plans_mu_;
    std::map<std::string, IssuedPlan> plans_;
    std::atomic<std::uint64_t> plan_counter_{0};
    std::uint64_t plan_salt_;
};

// HTTP binding for a Service.
class HttpServer {
public:
    HttpServer(Service& service);
    ~HttpServer();

    // Binds to cfg.host/cfg.port (port 0 picks a free one) and returns the port.
    int bind();
    // Blocks until stop().
    void listen();
    void stop();

private:
    Service& service_;
    std::unique_ptr<httplib::Server> server_;
};

// Loads the dataset, serves until SIGTERM or SIGINT. Returns when stopped.
void run_service(const ServiceConfig& cfg, std::ostream& log);

}  // namespace mealrec
