#include "mealrec/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "mealrec/error.hpp"
#include "mealrec/metrics.hpp"

namespace mealrec {

namespace {

int algorithm_rank(RecommenderKind k) {
    switch (k) {
        case RecommenderKind::Bandit: return 0;
        case RecommenderKind::Sequential: return 1;
        case RecommenderKind::Random: return 2;
    }
    return 3;
}

std::string user_id(const std::string& population, int u) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "_u%02d", u + 1);
    return population + buf;
}

json counts_json(const FlagCounts& c) { return json{{"n_neg", c.n_neg}, {"n_pos", c.n_pos}}; }

FlagCounts counts_from_json(const json& j, FlagCounts base) {
    if (j.contains("n_neg")) base.n_neg = j["n_neg"].get<int>();
    if (j.contains("n_pos")) base.n_pos = j["n_pos"].get<int>();
    return base;
}

PopulationConfig population_from_json(const json& j) {
    if (j.is_string()) return population_preset(j.get<std::string>());
    if (!j.is_object()) throw ConfigError("population entries must be preset names or objects");
    PopulationConfig pc;
    if (j.contains("preset")) pc = population_preset(j["preset"].get<std::string>());
    if (j.contains("name")) pc.name = j["name"].get<std::string>();
    if (j.contains("n_users")) pc.n_users = j["n_users"].get<int>();
    pc.counts = counts_from_json(j, pc.counts);
    if (j.contains("per_flag"))
        for (const auto& [flag, c] : j["per_flag"].items()) pc.per_flag[flag] = counts_from_json(c, pc.counts);
    if (j.contains("seed")) pc.seed = j["seed"].get<std::uint64_t>();
    return pc;
}

struct CellTask {
    std::size_t population;
    int horizon;
    RecommenderKind algorithm;
    int replication;
};

struct Means {
    double uc = 0.0, dm = 0.0, mc = 0.0;
};

Means run_cell(const ExperimentSpec& spec, std::uint64_t base, const CellTask& t,
               const std::vector<UserProfile>& users, const RecipeDataset& ds, const DayConfig& cfg) {
    // Plan streams ignore the population, so every config shares them.
    const auto kind = static_cast<std::uint64_t>(t.algorithm);
    const auto h = static_cast<std::uint64_t>(t.horizon);
    const auto rep = static_cast<std::uint64_t>(t.replication);
    SequentialCursor cursor;
    Means sum;
    for (std::size_t u = 0; u < users.size(); ++u) {
        const auto& profile = users[u];
        Rng rng(derive_seed(base, {h, kind, rep, u, 0}));
        MealPlan plan;
        switch (t.algorithm) {
            case RecommenderKind::Random:
                plan = recommend_random(ds, cfg, profile, t.horizon, rng);
                break;
            case RecommenderKind::Sequential:
                plan = recommend_sequential(ds, cfg, profile, t.horizon, cursor);
                break;
            case RecommenderKind::Bandit: {
                auto state = BanditState::create(ds, spec.bandit, derive_seed(base, {h, kind, rep, u, 1}));
                bandit_train(state, ds, cfg, std::span<const UserProfile>(&profile, 1), spec.episodes, t.horizon);
                // Evaluate the learned policy without exploration.
                plan = recommend_bandit(ds, cfg, profile, t.horizon, state, rng, 0.0);
                break;
            }
        }
        const auto report = score_plan(plan, ds, cfg, profile);
        sum.uc += report.uc;
        sum.dm += report.dm;
        sum.mc += report.mc;
    }
    const double n = static_cast<double>(users.size());
    return {sum.uc / n, sum.dm / n, sum.mc / n};
}

}  // namespace

FlagCounts PopulationConfig::counts_for(const std::string& flag) const {
    auto it = per_flag.find(flag);
    return it == per_flag.end() ? counts : it->second;
}

PopulationConfig population_preset(std::string_view name) {
    if (name == "c1") return {"c1", 24, {12, 12}, {}, 0};
    if (name == "c2") return {"c2", 24, {8, 8}, {}, 0};
    if (name == "c3") return {"c3", 24, {2, 2}, {}, 0};
    throw ConfigError("unknown population preset '" + std::string(name) + "'");
}

std::vector<PopulationConfig> default_populations() {
    return {population_preset("c1"), population_preset("c2"), population_preset("c3")};
}

std::vector<UserProfile> generate_population(const PopulationConfig& pc, const std::vector<std::string>& flag_names,
                                             Rng& rng) {
    if (pc.n_users <= 0) throw DomainError("population '" + pc.name + "': n_users must be positive");
    std::vector<UserProfile> users;
    users.reserve(static_cast<std::size_t>(pc.n_users));
    for (int u = 0; u < pc.n_users; ++u) users.push_back(neutral_profile(user_id(pc.name, u), flag_names));

    std::vector<std::size_t> order(users.size());
    for (const auto& flag : flag_names) {
        const auto c = pc.counts_for(flag);
        if (c.n_neg < 0 || c.n_pos < 0 || c.n_neg + c.n_pos > pc.n_users)
            throw DomainError("population '" + pc.name + "': n_neg + n_pos exceeds n_users for " + flag);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t i = 0; i < order.size(); ++i) {
            int v = 0;
            // Negatives fill from the front of the shuffle and positives from
            // the back, so with a shared seed a smaller split is nested in a larger one.
            if (i < static_cast<std::size_t>(c.n_neg))
                v = -1;
            else if (i >= order.size() - static_cast<std::size_t>(c.n_pos))
                v = 1;
            users[order[i]].prefs[flag] = v;
        }
    }
    return users;
}

std::vector<std::string> validate_experiment_spec(const ExperimentSpec& spec) {
    std::vector<std::string> out;
    if (spec.populations.empty()) out.emplace_back("populations: must be non-empty");
    for (const auto& p : spec.populations) {
        if (p.name.empty()) out.emplace_back("populations: every population needs a name");
        if (p.n_users <= 0) out.push_back("populations." + p.name + ": n_users must be positive");
        auto check = [&](const FlagCounts& c, const std::string& where) {
            if (c.n_neg < 0 || c.n_pos < 0 || c.n_neg + c.n_pos > p.n_users)
                out.push_back("populations." + p.name + where + ": n_neg + n_pos must not exceed n_users");
        };
        check(p.counts, "");
        for (const auto& [flag, c] : p.per_flag) check(c, ".per_flag." + flag);
    }
    if (spec.horizons.empty()) out.emplace_back("horizons: must be non-empty");
    for (int h : spec.horizons)
        if (!horizon_bounds().contains(h)) out.push_back("horizons: " + std::to_string(h) + " outside [1, 5]");
    if (spec.algorithms.empty()) out.emplace_back("algorithms: must be non-empty");
    if (spec.replications < 1) out.emplace_back("replications: must be positive");
    if (spec.episodes < 1) out.emplace_back("episodes: must be positive");
    for (auto& v : validate_bandit_config(spec.bandit)) out.push_back(std::move(v));
    return out;
}

json to_json(const ExperimentSpec& spec) {
    json pops = json::array();
    for (const auto& p : spec.populations) {
        json j{{"name", p.name}, {"n_users", p.n_users}, {"n_neg", p.counts.n_neg}, {"n_pos", p.counts.n_pos},
               {"seed", p.seed}};
        if (!p.per_flag.empty()) {
            json pf = json::object();
            for (const auto& [flag, c] : p.per_flag) pf[flag] = counts_json(c);
            j["per_flag"] = pf;
        }
        pops.push_back(std::move(j));
    }
    json algos = json::array();
    for (auto a : spec.algorithms) algos.push_back(std::string(to_string(a)));
    json j{{"populations", pops},       {"horizons", spec.horizons}, {"algorithms", algos},
           {"replications", spec.replications}, {"episodes", spec.episodes}, {"bandit", to_json(spec.bandit)},
           {"threads", spec.threads}};
    if (spec.base_seed) j["base_seed"] = *spec.base_seed;
    return j;
}

ExperimentSpec experiment_spec_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("experiment spec must be a JSON object");
    ExperimentSpec spec;
    try {
        for (const auto& [k, v] : j.items()) {
            if (k == "populations") {
                spec.populations.clear();
                for (const auto& p : v) spec.populations.push_back(population_from_json(p));
            } else if (k == "horizons") {
                spec.horizons = v.get<std::vector<int>>();
            } else if (k == "algorithms") {
                spec.algorithms.clear();
                for (const auto& a : v) {
                    auto kind = parse_recommender(a.get<std::string>());
                    if (!kind) throw ConfigError("unknown algorithm '" + a.get<std::string>() + "'");
                    spec.algorithms.push_back(*kind);
                }
            } else if (k == "replications") {
                spec.replications = v.get<int>();
            } else if (k == "episodes") {
                spec.episodes = v.get<int>();
            } else if (k == "base_seed") {
                spec.base_seed = v.get<std::uint64_t>();
            } else if (k == "bandit") {
                spec.bandit = bandit_config_from_json(v);
            } else if (k == "threads") {
                spec.threads = v.get<unsigned>();
            } else {
                throw ConfigError("experiment spec: unknown key '" + k + "'");
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("experiment spec: ") + e.what());
    }
    auto problems = validate_experiment_spec(spec);
    if (!problems.empty()) throw ConfigError(problems.front());
    return spec;
}

ExperimentResult run_experiment_detailed(const ExperimentSpec& spec, const RecipeDataset& ds, const DayConfig& cfg) {
    auto problems = validate_experiment_spec(spec);
    if (!problems.empty()) throw ConfigError(problems.front());
    for (int h : spec.horizons) require_recommendable(ds, cfg, h);

    ExperimentResult result;
    result.base_seed = spec.base_seed.value_or(entropy_seed_53());
    const auto base = result.base_seed;

    // Populations depend only on (population, replication), so every
    // algorithm and horizon sees the same users.
    std::vector<std::vector<std::vector<UserProfile>>> users(spec.populations.size());
    for (std::size_t p = 0; p < spec.populations.size(); ++p) {
        for (int r = 0; r < spec.replications; ++r) {
            Rng rng(derive_seed(base, {spec.populations[p].seed, static_cast<std::uint64_t>(r), 0xC0FFEE}));
            users[p].push_back(generate_population(spec.populations[p], ds.flag_names(), rng));
        }
    }

    std::vector<CellTask> tasks;
    for (std::size_t p = 0; p < spec.populations.size(); ++p)
        for (int h : spec.horizons)
            for (auto a : spec.algorithms)
                for (int r = 0; r < spec.replications; ++r) tasks.push_back({p, h, a, r});

    std::vector<Means> means(tasks.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    auto worker = [&] {
        for (std::size_t i = next++; i < tasks.size(); i = next++) {
            try {
                const auto& t = tasks[i];
                means[i] = run_cell(spec, base, t, users[t.population][static_cast<std::size_t>(t.replication)], ds, cfg);
            } catch (...) {
                std::lock_guard lock(failure_mu);
                if (!failure) failure = std::current_exception();
                next = tasks.size();
            }
        }
    };
    unsigned n_threads = spec.threads ? spec.threads : std::max(1U, std::thread::hardware_concurrency());
    n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(tasks.size()));
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);

    for (std::size_t i = 0; i < tasks.size(); ++i) {
        const auto& t = tasks[i];
        result.replications.push_back({spec.populations[t.population].name, t.horizon, t.algorithm, t.replication,
                                       means[i].uc, means[i].dm, means[i].mc});
    }
    // Tasks are laid out replication-innermost, so each cell is a contiguous run.
    const auto reps = static_cast<std::size_t>(spec.replications);
    for (std::size_t start = 0; start < tasks.size(); start += reps) {
        Means m;
        for (std::size_t i = start; i < start + reps; ++i) {
            m.uc += means[i].uc;
            m.dm += means[i].dm;
            m.mc += means[i].mc;
        }
        const double n = static_cast<double>(reps);
        m = {m.uc / n, m.dm / n, m.mc / n};
        const auto c = combine(m.uc, m.dm, m.mc);
        const auto& t = tasks[start];
        result.rows.push_back({spec.populations[t.population].name, t.horizon, t.algorithm, m.uc, m.dm, m.mc,
                               c.uc_dm_mc, c.uc_dm, c.uc_mc, c.dm_mc});
    }
    sort_rows(result.rows);
    return result;
}

std::vector<ResultRow> run_experiment(const ExperimentSpec& spec, const RecipeDataset& ds, const DayConfig& cfg) {
    return run_experiment_detailed(spec, ds, cfg).rows;
}

void sort_rows(std::vector<ResultRow>& rows) {
    std::stable_sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
        if (a.config != b.config) return a.config < b.config;
        if (a.horizon != b.horizon) return a.horizon < b.horizon;
        return algorithm_rank(a.algorithm) < algorithm_rank(b.algorithm);
    });
}

std::optional<ReportFormat> parse_report_format(std::string_view token) noexcept {
    if (token == "csv") return ReportFormat::Csv;
    if (token == "table") return ReportFormat::Table;
    if (token == "json") return ReportFormat::Json;
    return std::nullopt;
}

std::string format_score(double value) {
    // The epsilon absorbs binary representation error, so 0.8895 -> 0.890.
    const double rounded = std::floor(value * 1000.0 + 0.5 + 1e-9) / 1000.0;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", rounded);
    return buf;
}

std::string emit_report(std::vector<ResultRow> rows, ReportFormat format) {
    if (rows.empty()) throw DomainError("no result rows to report");
    sort_rows(rows);
    std::ostringstream out;
    if (format == ReportFormat::Json) {
        json arr = json::array();
        for (const auto& r : rows)
            arr.push_back({{"config", r.config},     {"horizon", r.horizon},   {"algorithm", std::string(to_string(r.algorithm))},
                           {"uc", r.uc},             {"dm", r.dm},             {"mc", r.mc},
                           {"uc_dm_mc", r.uc_dm_mc}, {"uc_dm", r.uc_dm},       {"uc_mc", r.uc_mc},
                           {"dm_mc", r.dm_mc}});
        out << arr.dump(2) << '\n';
        return out.str();
    }
    auto values = [](const ResultRow& r) {
        return std::array<double, 7>{r.uc, r.dm, r.mc, r.uc_dm_mc, r.uc_dm, r.uc_mc, r.dm_mc};
    };
    static constexpr std::array<const char*, 7> kCols{"uc", "dm", "mc", "uc_dm_mc", "uc_dm", "uc_mc", "dm_mc"};
    if (format == ReportFormat::Csv) {
        out << "config,horizon,algorithm";
        for (auto c : kCols) out << ',' << c;
        out << '\n';
        for (const auto& r : rows) {
            out << r.config << ',' << r.horizon << ',' << to_string(r.algorithm);
            for (double v : values(r)) out << ',' << format_score(v);
            out << '\n';
        }
        return out.str();
    }
    char line[256];
    std::snprintf(line, sizeof line, "%-8s %-7s %-10s", "config", "horizon", "algorithm");
    out << line;
    for (auto c : kCols) {
        std::snprintf(line, sizeof line, " %9s", c);
        out << line;
    }
    out << '\n';
    for (const auto& r : rows) {
        std::snprintf(line, sizeof line, "%-8s %-7d %-10s", r.config.c_str(), r.horizon,
                      std::string(to_string(r.algorithm)).c_str());
        out << line;
        for (double v : values(r)) {
            std::snprintf(line, sizeof line, " %9s", format_score(v).c_str());
            out << line;
        }
        out << '\n';
    }
    return out.str();
}

std::vector<ResultRow> parse_report_json(std::string_view text) {
    std::vector<ResultRow> rows;
    try {
        for (const auto& j : json::parse(text.begin(), text.end())) {
            auto kind = parse_recommender(j.at("algorithm").get<std::string>());
            if (!kind) throw ValidationError({"report: unknown algorithm"});
            rows.push_back({j.at("config").get<std::string>(), j.at("horizon").get<int>(), *kind,
                            j.at("uc").get<double>(), j.at("dm").get<double>(), j.at("mc").get<double>(),
                            j.at("uc_dm_mc").get<double>(), j.at("uc_dm").get<double>(), j.at("uc_mc").get<double>(),
                            j.at("dm_mc").get<double>()});
        }
    } catch (const json::exception& e) {
        throw ValidationError({std::string("report: ") + e.what()});
    }
    return rows;
}

}  // namespace mealrec
