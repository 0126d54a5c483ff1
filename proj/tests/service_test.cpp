#include <gtest/gtest.h>

#include <filesystem>
#include <thread>

#include <httplib.h>

#include "fixtures.hpp"
#include "mealrec/error.hpp"
#include "mealrec/service.hpp"

using namespace mealrec;
using mealrec::testkit::fixture;
namespace fs = std::filesystem;

namespace {

class TempDir {
public:
    TempDir() {
        path_ = fs::temp_directory_path() / ("mealrec-test-" + std::to_string(entropy_seed()));
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

ServiceConfig config_for(const TempDir& dir) {
    ServiceConfig c;
    c.store_dir = dir.path() / "store";
    c.port = 0;
    c.train_episodes = 20;
    return c;
}

std::string profile_body(const std::string& id, int meat = 0) {
    auto p = neutral_profile(id, testkit::kFlags());
    p.prefs["hasMeat"] = meat;
    return to_json(p).dump();
}

json plan_request(const std::string& user, int horizon, const std::string& algo, std::uint64_t seed) {
    return json{{"user_id", user}, {"horizon", horizon}, {"algorithm", algo}, {"seed", seed}};
}

int meat_items(const Service& svc, const json& plan) {
    const auto meat = *svc.dataset().flag_index("hasMeat");
    int n = 0;
    for (const auto& d : plan["days"])
        for (const auto& m : d["meals"])
            for (const auto& id : m["items"]) n += svc.dataset().find(id.get<std::string>())->flags[meat];
    return n;
}

}  // namespace

TEST(ServiceConfig, JsonResolvesPathsAndRejectsUnknownKeys) {
    auto c = service_config_from_json(json{{"port", 9000}, {"dataset", "r.json"}, {"bandit", {{"epsilon0", 0.2}}}},
                                      "/etc/mealrec");
    EXPECT_EQ(c.port, 9000);
    EXPECT_EQ(c.dataset, fs::path("/etc/mealrec/r.json"));
    EXPECT_DOUBLE_EQ(c.bandit.epsilon0, 0.2);
    EXPECT_THROW(service_config_from_json(json{{"prot", 1}}), ConfigError);
    EXPECT_THROW(service_config_from_json(json{{"port", 70000}}), ConfigError);
}

TEST(ServiceConfig, EnvironmentOverrides) {
    ServiceConfig c;
    ::setenv("MEALREC_PORT", "9191", 1);
    ::setenv("MEALREC_TRAIN_EPISODES", "7", 1);
    apply_env_overrides(c);
    EXPECT_EQ(c.port, 9191);
    EXPECT_EQ(c.train_episodes, 7);
    ::setenv("MEALREC_PORT", "nine", 1);
    EXPECT_THROW(apply_env_overrides(c), ConfigError);
    ::unsetenv("MEALREC_PORT");
    ::unsetenv("MEALREC_TRAIN_EPISODES");
}

TEST(UserId, Validation) {
    EXPECT_TRUE(valid_user_id("alice_01.x-y"));
    EXPECT_FALSE(valid_user_id(""));
    EXPECT_FALSE(valid_user_id(".hidden"));
    EXPECT_FALSE(valid_user_id("a/b"));
    EXPECT_FALSE(valid_user_id(std::string(65, 'a')));
}

TEST(Service, HealthAndRecipes) {
    TempDir dir;
    Service svc(fixture(), config_for(dir));
    auto h = svc.health();
    EXPECT_EQ(h.body["status"], "ok");
    EXPECT_EQ(h.body["recipes"], 50);

    auto all = svc.list_recipes({});
    EXPECT_EQ(all.status, 200);
    EXPECT_EQ(all.body.size(), 50u);
    auto tb = svc.list_recipes({{"category", "TacoBell"}, {"flag", "hasMeat"}});
    EXPECT_EQ(tb.body.size(), 6u);
    EXPECT_EQ(svc.list_recipes({{"role", "snack"}}).status, 400);
    EXPECT_EQ(svc.list_recipes({{"flag", "hasGluten"}}).status, 400);

    EXPECT_EQ(svc.get_recipe("mcd_big_mac").status, 200);
    auto missing = svc.get_recipe("nope");
    EXPECT_EQ(missing.status, 404);
    EXPECT_EQ(missing.body["code"], "not_found");
}

TEST(Service, HealthDegradedWhenRoleMissing) {
    TempDir dir;
    Service svc(RecipeDataset(testkit::kFlags(), {testkit::make_recipe("m", {Role::Main})}), config_for(dir));
    EXPECT_EQ(svc.health().body["status"], "degraded");
    EXPECT_EQ(svc.put_profile("u", profile_body("u")).status, 200);
    EXPECT_EQ(svc.create_plan(plan_request("u", 1, "random", 1).dump()).status, 503);
}

TEST(Service, ProfilesAreVersioned) {
    TempDir dir;
    Service svc(fixture(), config_for(dir));
    EXPECT_EQ(svc.get_profile("ann").status, 404);
    auto first = svc.put_profile("ann", profile_body("ann"));
    ASSERT_EQ(first.status, 200);
    EXPECT_EQ(first.body["version"], 1);
    auto second = svc.put_profile("ann", profile_body("ann", -1));
    EXPECT_EQ(second.body["version"], 2);
    auto got = svc.get_profile("ann");
    EXPECT_EQ(got.body["prefs"]["hasMeat"], -1);
    EXPECT_EQ(got.body["version"], 2);
    EXPECT_TRUE(fs::exists(dir.path() / "store" / "profiles" / "ann.json"));
}

TEST(Service, ProfileValidationMessages) {
    TempDir dir;
    Service svc(fixture(), config_for(dir));
    auto j = json::parse(profile_body("bob"));
    j["prefs"]["hasMeat"] = 2;
    auto r = svc.put_profile("bob", j.dump());
    EXPECT_EQ(r.status, 400);
    EXPECT_NE(r.body["message"].get<std::string>().find("preference must be -1, 0, or +1"), std::string::npos);

    j = json::parse(profile_body("bob"));
    j["goodness_weights"] = {{"dm", 0.5}, {"mc", 0.5}, {"uc", 0.5}};
    r = svc.put_profile("bob", j.dump());
    EXPECT_EQ(r.status, 400);
    EXPECT_NE(r.body["message"].get<std::string>().find("goodness_weights must sum to 1"), std::string::npos);

    EXPECT_EQ(svc.put_profile("bob", profile_body("carol")).status, 400);
    EXPECT_EQ(svc.put_profile("bob", "{not json").status, 400);
    EXPECT_EQ(svc.put_profile("../x", profile_body("bob")).status, 400);
}

TEST(Service, PlanErrors) {
    TempDir dir;
    Service svc(fixture(), config_for(dir));
    svc.put_profile("u", profile_body("u"));
    EXPECT_EQ(svc.create_plan(plan_request("u", 6, "random", 1).dump()).status, 422);
    EXPECT_EQ(svc.create_plan(plan_request("u", 0, "random", 1).dump()).status, 422);
    EXPECT_EQ(svc.create_plan(plan_request("ghost", 1, "random", 1).dump()).status, 404);
    EXPECT_EQ(svc.create_plan(plan_request("u", 1, "greedy", 1).dump()).status, 400);
    EXPECT_EQ(svc.create_plan(R"({"user_id":"u"})").status, 400);
    EXPECT_EQ(svc.create_plan(R"({"user_id":"u","horizon":1,"extra":true})").status, 400);
}

TEST(Service, SeededRandomPlansRepeat) {
    TempDir dir;
    Service svc(fixture(), config_for(dir));
    svc.put_profile("u", profile_body("u"));
    auto a = svc.create_plan(plan_request("u", 3, "random", 5).dump());
    auto b = svc.create_plan(plan_request("u", 3, "random", 5).dump());
    ASSERT_EQ(a.status, 200);
    EXPECT_EQ(a.body["plan"], b.body["plan"]);
    EXPECT_NE(a.body["plan_id"], b.body["plan_id"]);
    EXPECT_EQ(a.body["seed"], 5);
    for (const char* k : {"dm", "mc", "uc", "G", "combos", "role_dup_diag", "per_meal"})
        EXPECT_TRUE(a.body["scores"].contains(k)) << k;
    EXPECT_EQ(a.body["plan"]["days"].size(), 3u);
}

TEST(Service, BanditPlanTrainsOnceAndPersists) {
    TempDir dir;
    auto cfg = config_for(dir);
    json first_plan;
    {
        Service svc(fixture(), cfg);
        svc.put_profile("u", profile_body("u", -1));
        auto r = svc.create_plan(plan_request("u", 2, "bandit", 3).dump());
        ASSERT_EQ(r.status, 200);
        EXPECT_EQ(r.body["model"]["trained_now"], true);
        EXPECT_EQ(r.body["model"]["episodes"], 20);
        auto again = svc.create_plan(plan_request("u", 2, "bandit", 3).dump());
        EXPECT_EQ(again.body["model"]["trained_now"], false);
        EXPECT_EQ(again.body["plan"], r.body["plan"]);
        first_plan = r.body["plan"];
    }
    // A fresh process picks the stored model back up.
    Service restarted(fixture(), cfg);
    auto r = restarted.create_plan(plan_request("u", 2, "bandit", 3).dump());
    EXPECT_EQ(r.body["model"]["trained_now"], false);
    EXPECT_EQ(r.body["plan"], first_plan);
}

TEST(Service, ChangedPreferencesRetrainTheModel) {
    TempDir dir;
    Service svc(fixture(), config_for(dir));
    svc.put_profile("u", profile_body("u"));
    ASSERT_EQ(svc.create_plan(plan_request("u", 1, "bandit", 1).dump()).body["model"]["trained_now"], true);
    // Same prefs, new weights: the model stays.
    auto j = json::parse(profile_body("u"));
    j["goodness_weights"] = {{"dm", 0.5}, {"mc", 0.25}, {"uc", 0.25}};
    svc.put_profile("u", j.dump());
    EXPECT_EQ(svc.create_plan(plan_request("u", 1, "bandit", 1).dump()).body["model"]["trained_now"], false);
    svc.put_profile("u", profile_body("u", -1));
    EXPECT_FALSE(fs::exists(dir.path() / "store" / "models" / "u.json"));
    auto r = svc.create_plan(plan_request("u", 1, "bandit", 1).dump());
    EXPECT_EQ(r.body["model"]["trained_now"], true);
    EXPECT_EQ(meat_items(svc, r.body["plan"]), 0);
}

TEST(Service, FeedbackErrors) {
    TempDir dir;
    Service svc(fixture(), config_for(dir));
    svc.put_profile("u", profile_body("u"));
    auto random_plan = svc.create_plan(plan_request("u", 1, "random", 1).dump());
    auto bandit_plan = svc.create_plan(plan_request("u", 1, "bandit", 1).dump());
    const auto id = bandit_plan.body["plan_id"].get<std::string>();
    auto slot = [](int day, const char* meal, int s, bool accept) {
        return json{{"day", day}, {"meal", meal}, {"slot", s}, {"accept", accept}};
    };

    EXPECT_EQ(svc.feedback(json{{"plan_id", id}, {"slots", json::array()}}.dump()).status, 400);
    EXPECT_EQ(svc.feedback(json{{"plan_id", "plan-nope"}, {"slots", {slot(1, "lunch", 0, true)}}}.dump()).status, 404);
    auto conflict = svc.feedback(
        json{{"plan_id", random_plan.body["plan_id"]}, {"slots", {slot(1, "lunch", 0, true)}}}.dump());
    EXPECT_EQ(conflict.status, 409);
    EXPECT_EQ(conflict.body["message"], "feedback requires bandit plans");
    EXPECT_EQ(svc.feedback(json{{"plan_id", id}, {"slots", {slot(2, "lunch", 0, true)}}}.dump()).status, 400);
    EXPECT_EQ(svc.feedback(json{{"plan_id", id}, {"slots", {slot(1, "lunch", 3, true)}}}.dump()).status, 400);
    EXPECT_EQ(svc.feedback(json{{"plan_id", id}, {"slots", {slot(1, "brunch", 0, true)}}}.dump()).status, 400);
    auto twice = svc.feedback(
        json{{"plan_id", id}, {"slots", {slot(1, "dinner", 1, true), slot(1, "dinner", 1, false)}}}.dump());
    EXPECT_EQ(twice.status, 400);
    EXPECT_EQ(twice.body["code"], "bad_slot");

    auto ok = svc.feedback(json{{"plan_id", id}, {"slots", {slot(1, "dinner", 1, false)}}}.dump());
    ASSERT_EQ(ok.status, 200);
    EXPECT_EQ(ok.body["applied"], 1);
    EXPECT_EQ(ok.body["model_version"], bandit_plan.body["model"]["version"].get<int>() + 1);
}

TEST(Service, RejectingMeatSteersPlansAway) {
    TempDir dir;
    auto cfg = config_for(dir);
    Service svc(fixture(), cfg);
    svc.put_profile("u", profile_body("u"));
    int first = -1, last = -1;
    for (int round = 0; round < 10; ++round) {
        auto r = svc.create_plan(plan_request("u", 1, "bandit", 1).dump());
        ASSERT_EQ(r.status, 200);
        const auto& plan = r.body["plan"];
        last = meat_items(svc, plan);
        if (first < 0) first = last;
        json slots = json::array();
        const auto meat = *svc.dataset().flag_index("hasMeat");
        for (const auto& m : plan["days"][0]["meals"])
            for (std::size_t s = 0; s < m["items"].size(); ++s)
                slots.push_back({{"day", 1},
                                 {"meal", m["meal"]},
                                 {"slot", s},
                                 {"accept", !svc.dataset().find(m["items"][s].get<std::string>())->flags[meat]}});
        ASSERT_EQ(svc.feedback(json{{"plan_id", r.body["plan_id"]}, {"slots", slots}}.dump()).status, 200);
    }
    EXPECT_GT(first, 0);
    EXPECT_LT(last, first);
}

TEST(Service, ScoreEndpoint) {
    TempDir dir;
    Service svc(fixture(), config_for(dir));
    svc.put_profile("u", profile_body("u", -1));
    auto plan = svc.create_plan(plan_request("u", 2, "random", 9).dump());
    auto by_user = svc.score(json{{"plan", plan.body["plan"]}, {"user_id", "u"}}.dump());
    EXPECT_EQ(by_user.status, 200);
    EXPECT_EQ(by_user.body, plan.body["scores"]);
    auto by_profile = svc.score(json{{"plan", plan.body["plan"]}, {"profile", json::parse(profile_body("x", -1))}}.dump());
    EXPECT_EQ(by_profile.body["uc"], by_user.body["uc"]);
    auto bad = plan.body["plan"];
    bad["days"][0]["meals"][0]["items"][0] = "ghost";
    EXPECT_EQ(svc.score(json{{"plan", bad}, {"user_id", "u"}}.dump()).status, 400);
    EXPECT_EQ(svc.score(json{{"plan", plan.body["plan"]}, {"user_id", "nobody"}}.dump()).status, 404);
}

TEST(HttpServer, RoundTripOverLoopback) {
    TempDir dir;
    Service svc(fixture(), config_for(dir));
    HttpServer server(svc);
    const int port = server.bind();
    ASSERT_GT(port, 0);
    std::thread t([&] { server.listen(); });

    httplib::Client cli("127.0.0.1", port);
    auto health = cli.Get("/health");
    ASSERT_TRUE(health);
    EXPECT_EQ(health->status, 200);
    EXPECT_EQ(json::parse(health->body)["recipes"], 50);

    auto put = cli.Put("/profiles/web", profile_body("web"), "application/json");
    ASSERT_TRUE(put);
    EXPECT_EQ(put->status, 200);
    auto plan = cli.Post("/plans", plan_request("web", 1, "sequential", 1).dump(), "application/json");
    ASSERT_TRUE(plan);
    EXPECT_EQ(plan->status, 200);
    auto filtered = cli.Get("/recipes?role=beverage");
    ASSERT_TRUE(filtered);
    EXPECT_GT(json::parse(filtered->body).size(), 0u);
    auto missing = cli.Get("/recipes/nope");
    EXPECT_EQ(missing->status, 404);
    auto nowhere = cli.Get("/nowhere");
    EXPECT_EQ(nowhere->status, 404);
    EXPECT_EQ(json::parse(nowhere->body)["code"], "not_found");

    server.stop();
    t.join();
}
