#include "mealrec/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>

#include "mealrec/error.hpp"
#include "mealrec/metrics.hpp"
#include "mealrec/service.hpp"
#include "mealrec/simulation.hpp"

namespace mealrec {

namespace fs = std::filesystem;

namespace {

constexpr const char* kDefaultDataset = "data/recipes.json";

json read_json_file(const fs::path& path, const char* what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(std::string("cannot read ") + what + " " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    auto j = json::parse(ss.str(), nullptr, false);
    if (j.is_discarded()) throw ConfigError(path.string() + " is not valid JSON");
    return j;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("short write to " + path.string());
}

std::string fixed(double v, int digits) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::uint64_t resolve_seed(std::optional<std::uint64_t> given, std::ostream& err) {
    if (given) return *given;
    const auto s = entropy_seed_53();
    err << "seed " << s << " (pass --seed " << s << " to reproduce)\n";
    return s;
}

// ---- validate -------------------------------------------------------------

int cmd_validate(const std::string& path, bool metadata_only, std::ostream& out, std::ostream& err) {
    try {
        auto ds = load_dataset(path, metadata_only ? LoadMode::MetadataOnly : LoadMode::Full);
        for (const auto& w : ds.warnings()) err << "warning: " << w << '\n';
        out << ds.size() << " recipes OK\n";
        return 0;
    } catch (const ValidationError& e) {
        for (const auto& v : e.violations()) out << v << '\n';
        err << e.violations().size() << " violation(s)\n";
        return 1;
    }
}

// ---- stats ----------------------------------------------------------------

int cmd_stats(const std::string& path, const std::vector<std::string>& filter, const std::string& format,
              std::ostream& out) {
    auto ds = load_dataset(path, LoadMode::MetadataOnly);
    auto stats = dataset_stats(ds);
    if (!filter.empty()) {
        for (const auto& f : filter) {
            if (f.empty()) throw DomainError("category filter must be non-empty");
            bool found = false;
            for (const auto& s : stats) found = found || s.category == f;
            if (!found) throw DomainError("no recipes in category '" + f + "'");
        }
        std::erase_if(stats, [&](const CategoryStats& s) {
            return std::find(filter.begin(), filter.end(), s.category) == filter.end();
        });
    }
    if (format == "json") {
        json arr = json::array();
        for (const auto& s : stats) {
            json pct = json::object();
            for (std::size_t f = 0; f < ds.flag_names().size(); ++f) pct[ds.flag_names()[f]] = s.flag_pct[f];
            arr.push_back({{"category", s.category}, {"flag_pct", pct}, {"count", s.count}});
        }
        out << arr.dump(2) << '\n';
        return 0;
    }
    std::size_t width = 8;
    for (const auto& s : stats) width = std::max(width, s.category.size());
    char line[256];
    std::snprintf(line, sizeof line, "%-*s", static_cast<int>(width), "category");
    out << line;
    for (const auto& f : ds.flag_names()) {
        std::snprintf(line, sizeof line, " %9s", f.c_str());
        out << line;
    }
    out << "  total\n";
    for (const auto& s : stats) {
        std::snprintf(line, sizeof line, "%-*s", static_cast<int>(width), s.category.c_str());
        out << line;
        for (double p : s.flag_pct) {
            std::snprintf(line, sizeof line, " %9s", fixed(p, 2).c_str());
            out << line;
        }
        std::snprintf(line, sizeof line, "  %5zu\n", s.count);
        out << line;
    }
    return 0;
}

// ---- simulate -------------------------------------------------------------

struct SimulateArgs {
    std::string config;
    std::string out_dir = "results";
    std::string dataset = kDefaultDataset;
    std::vector<std::string> algorithms;
    std::optional<std::uint64_t> seed;
    std::optional<int> replications;
    std::optional<int> episodes;
    std::optional<unsigned> threads;
    std::string format = "table";
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
    ExperimentSpec spec;
    if (!a.config.empty()) spec = experiment_spec_from_json(read_json_file(a.config, "experiment spec"));
    if (!a.algorithms.empty()) {
        spec.algorithms.clear();
        for (const auto& t : a.algorithms) {
            auto k = parse_recommender(t);
            if (!k) throw ConfigError("unknown algorithm '" + t + "'");
            spec.algorithms.push_back(*k);
        }
    }
    if (a.replications) spec.replications = *a.replications;
    if (a.episodes) spec.episodes = *a.episodes;
    if (a.threads) spec.threads = *a.threads;
    if (a.seed)
        spec.base_seed = a.seed;
    else if (!spec.base_seed)
        spec.base_seed = resolve_seed(std::nullopt, err);
    auto problems = validate_experiment_spec(spec);
    if (!problems.empty()) throw ConfigError(problems.front());

    auto ds = load_dataset(a.dataset, LoadMode::Full);
    const auto result = run_experiment_detailed(spec, ds, default_day_config());

    std::error_code ec;
    fs::create_directories(a.out_dir, ec);
    if (ec) throw IoError("cannot create " + a.out_dir + ": " + ec.message());
    const fs::path dir(a.out_dir);
    write_file(dir / "results.csv", emit_report(result.rows, ReportFormat::Csv));
    write_file(dir / "results.json", emit_report(result.rows, ReportFormat::Json));

    json reps = json::array();
    for (const auto& r : result.replications)
        reps.push_back({{"config", r.config},
                        {"horizon", r.horizon},
                        {"algorithm", std::string(to_string(r.algorithm))},
                        {"replication", r.replication},
                        {"uc", r.uc},
                        {"dm", r.dm},
                        {"mc", r.mc}});
    json manifest{{"spec", to_json(spec)},
                  {"base_seed", result.base_seed},
                  {"dataset", {{"path", a.dataset}, {"recipes", ds.size()}, {"flags", ds.flag_names()}}},
                  {"day_config", to_json(default_day_config())},
                  {"outputs", {"results.csv", "results.json"}},
                  {"replications", reps}};
    write_file(dir / "manifest.json", manifest.dump(2) + "\n");

    auto format = parse_report_format(a.format);
    if (!format) throw ConfigError("unknown format '" + a.format + "'");
    out << emit_report(result.rows, *format);
    err << "wrote " << (dir / "results.csv").string() << ", results.json, manifest.json\n";
    return 0;
}

// ---- recommend ------------------------------------------------------------

struct RecommendArgs {
    std::string profile;
    int days = 1;
    std::string algo = "bandit";
    std::optional<std::uint64_t> seed;
    std::string dataset = kDefaultDataset;
    int episodes = 200;
    std::string model;
    std::string format = "text";
};

void print_plan_text(const MealPlan& plan, const ScoreReport& report, const RecipeDataset& ds, const DayConfig& cfg,
                     std::ostream& out) {
    std::size_t k = 0;
    for (std::size_t d = 0; d < plan.days.size(); ++d) {
        out << "Day " << d + 1 << '\n';
        for (std::size_t m = 0; m < plan.days[d].meals.size(); ++m, ++k) {
            const auto& meal = plan.days[d].meals[m];
            const auto& ms = report.per_meal[k];
            out << "  " << to_string(meal.meal) << "  md=" << fixed(ms.md, 4) << " cs=" << fixed(ms.cs, 4)
                << " uc=" << fixed(ms.uc, 4) << '\n';
            for (std::size_t s = 0; s < meal.items.size(); ++s) {
                const auto* r = ds.find(meal.items[s]);
                out << "    " << to_string(cfg.meals[m].slots[s]) << ": " << r->name << " [" << r->id << "]\n";
            }
        }
    }
    out << "dm=" << fixed(report.dm, 4) << " mc=" << fixed(report.mc, 4) << " uc=" << fixed(report.uc, 4)
        << " G=" << fixed(report.goodness, 4) << '\n';
    out << "uc_dm_mc=" << fixed(report.combos.uc_dm_mc, 4) << " uc_dm=" << fixed(report.combos.uc_dm, 4)
        << " uc_mc=" << fixed(report.combos.uc_mc, 4) << " dm_mc=" << fixed(report.combos.dm_mc, 4)
        << " role_dup_diag=" << fixed(report.role_dup_diag, 4) << '\n';
}

int cmd_recommend(const RecommendArgs& a, std::ostream& out, std::ostream& err) {
    auto kind = parse_recommender(a.algo);
    if (!kind) throw ConfigError("unknown algorithm '" + a.algo + "'");
    if (a.format != "text" && a.format != "json") throw ConfigError("unknown format '" + a.format + "'");
    auto ds = load_dataset(a.dataset, LoadMode::Full);
    const auto cfg = default_day_config();
    auto profile = profile_from_json(read_json_file(a.profile, "profile"));
    auto problems = validate_profile(profile, ds.flag_names());
    if (!problems.empty()) throw ValidationError(problems);
    require_recommendable(ds, cfg, a.days);

    const auto seed = resolve_seed(a.seed, err);
    Rng rng(seed);
    MealPlan plan;
    json model = nullptr;
    switch (*kind) {
        case RecommenderKind::Random:
            plan = recommend_random(ds, cfg, profile, a.days, rng);
            break;
        case RecommenderKind::Sequential: {
            SequentialCursor cursor;
            plan = recommend_sequential(ds, cfg, profile, a.days, cursor);
            break;
        }
        case RecommenderKind::Bandit: {
            std::optional<BanditState> state;
            if (!a.model.empty() && fs::exists(a.model)) {
                state = bandit_state_from_json(read_json_file(a.model, "model"));
                if (!state->schema.compatible_with(ds)) throw DomainError("model " + a.model + " does not fit this dataset");
                err << "loaded model " << a.model << " (" << state->episodes << " episodes)\n";
            } else {
                state = BanditState::create(ds, BanditConfig{}, derive_seed(seed, {1}));
                bandit_train(*state, ds, cfg, std::span<const UserProfile>(&profile, 1), a.episodes, a.days);
                err << "trained " << state->episodes << " episodes\n";
                if (!a.model.empty()) write_file(a.model, to_json(*state).dump() + "\n");
            }
            plan = recommend_bandit(ds, cfg, profile, a.days, *state, rng, 0.0);
            model = {{"episodes", state->episodes}, {"version", state->version}, {"stumps", state->model.stumps().size()}};
            break;
        }
    }
    const auto report = score_plan(plan, ds, cfg, profile);
    if (a.format == "json") {
        out << json{{"seed", seed},
                    {"algorithm", std::string(to_string(*kind))},
                    {"plan", to_json(plan)},
                    {"scores", to_json(report)},
                    {"model", model}}
                   .dump(2)
            << '\n';
    } else {
        print_plan_text(plan, report, ds, cfg, out);
    }
    return 0;
}

// ---- serve ----------------------------------------------------------------

int cmd_serve(const std::string& config, std::ostream& err) {
    ServiceConfig cfg = config.empty() ? ServiceConfig{} : load_service_config(config);
    apply_env_overrides(cfg);
    run_service(cfg, err);
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Multi-day meal plan recommender", "mealrec"};
    app.require_subcommand(1);

    std::string validate_path;
    bool metadata_only = false;
    auto* validate = app.add_subcommand("validate", "Check a recipe dataset");
    validate->add_option("dataset", validate_path, "Dataset JSON")->required();
    validate->add_flag("--metadata-only", metadata_only, "Skip instruction-step checks");

    std::string stats_path;
    std::vector<std::string> stats_filter;
    std::string stats_format = "table";
    auto* stats = app.add_subcommand("stats", "Per-category flag percentages");
    stats->add_option("dataset", stats_path, "Dataset JSON")->required();
    stats->add_option("--category", stats_filter, "Only these categories");
    stats->add_option("--format", stats_format)->check(CLI::IsMember({"table", "json"}));

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Run the experiment grid");
    simulate->add_option("--config", sim.config, "Experiment spec JSON");
    simulate->add_option("--out", sim.out_dir, "Output directory");
    simulate->add_option("--dataset", sim.dataset, "Dataset JSON");
    simulate->add_option("--algorithms", sim.algorithms, "Subset of bandit, sequential, random")->delimiter(',');
    simulate->add_option("--seed", sim.seed, "Base seed");
    simulate->add_option("--replications", sim.replications)->check(CLI::PositiveNumber);
    simulate->add_option("--episodes", sim.episodes, "Bandit training episodes per user")->check(CLI::PositiveNumber);
    simulate->add_option("--threads", sim.threads, "Worker threads, 0 = all cores");
    simulate->add_option("--format", sim.format, "Stdout format")->check(CLI::IsMember({"table", "csv", "json"}));

    RecommendArgs rec;
    auto* recommend = app.add_subcommand("recommend", "Plan meals for one profile");
    recommend->add_option("--profile", rec.profile, "Profile JSON")->required();
    recommend->add_option("--days", rec.days, "Horizon in days")->check(CLI::Range(1, 5));
    recommend->add_option("--algo", rec.algo)->check(CLI::IsMember({"random", "sequential", "bandit"}));
    recommend->add_option("--seed", rec.seed);
    recommend->add_option("--dataset", rec.dataset, "Dataset JSON");
    recommend->add_option("--episodes", rec.episodes, "Training episodes when no model exists")
        ->check(CLI::PositiveNumber);
    recommend->add_option("--model", rec.model, "Bandit model file, loaded if present, written after training");
    recommend->add_option("--format", rec.format)->check(CLI::IsMember({"text", "json"}));

    std::string serve_config;
    auto* serve = app.add_subcommand("serve", "Run the HTTP service");
    serve->add_option("--config", serve_config, "Service config JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*validate) return cmd_validate(validate_path, metadata_only, out, err);
        if (*stats) return cmd_stats(stats_path, stats_filter, stats_format, out);
        if (*simulate) return cmd_simulate(sim, out, err);
        if (*recommend) return cmd_recommend(rec, out, err);
        if (*serve) return cmd_serve(serve_config, err);
    } catch (const ValidationError& e) {
        for (const auto& v : e.violations()) err << "error: " << v << '\n';
        return 1;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}

}  // namespace mealrec
