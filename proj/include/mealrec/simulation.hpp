#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mealrec/bandit.hpp"
#include "mealrec/meal.hpp"
#include "mealrec/recipe.hpp"
#include "mealrec/recommend.hpp"
#include "mealrec/rng.hpp"

namespace mealrec {

struct FlagCounts {
    int n_neg = 0;
    int n_pos = 0;

    friend bool operator==(const FlagCounts&, const FlagCounts&) = default;
};

// A synthetic user population. `counts` applies to every flag unless
// `per_flag` overrides it.
struct PopulationConfig {
    std::string name;
    int n_users = 24;
    FlagCounts counts;
    std::map<std::string, FlagCounts> per_flag;
    std::uint64_t seed = 0;

    FlagCounts counts_for(const std::string& flag) const;
    friend bool operator==(const PopulationConfig&, const PopulationConfig&) = default;
};

// c1 = 12/0/12, c2 = 8/8/8, c3 = 2/20/2 (negative/neutral/positive) over 24 users.
PopulationConfig population_preset(std::string_view name);
std::vector<PopulationConfig> default_populations();

// For each flag independently: exactly n_neg users at -1 and n_pos at +1,
// chosen uniformly without replacement; everyone else 0.
std::vector<UserProfile> generate_population(const PopulationConfig& pc, const std::vector<std::string>& flag_names,
                                             Rng& rng);

struct ExperimentSpec {
    std::vector<PopulationConfig> populations = default_populations();
    std::vector<int> horizons{1, 3, 5};
    std::vector<RecommenderKind> algorithms{RecommenderKind::Bandit, RecommenderKind::Sequential,
                                            RecommenderKind::Random};
    int replications = 10;
    int episodes = 200;
    std::optional<std::uint64_t> base_seed;
    BanditConfig bandit;
    // 0 = one worker per hardware thread.
    unsigned threads = 0;
};

std::vector<std::string> validate_experiment_spec(const ExperimentSpec& spec);
json to_json(const ExperimentSpec& spec);
// Accepts preset names ("c1") or full population objects. Throws ConfigError.
ExperimentSpec experiment_spec_from_json(const json& j);

struct ResultRow {
    std::string config;
    int horizon = 0;
    RecommenderKind algorithm = RecommenderKind::Random;
    double uc = 0.0;
    double dm = 0.0;
    double mc = 0.0;
    double uc_dm_mc = 0.0;
    double uc_dm = 0.0;
    double uc_mc = 0.0;
    double dm_mc = 0.0;

    friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

// Per-replication means of one grid cell; ResultRow averages these.
struct CellReplication {
    std::string config;
    int horizon = 0;
    RecommenderKind algorithm = RecommenderKind::Random;
    int replication = 0;
    double uc = 0.0;
    double dm = 0.0;
    double mc = 0.0;
};

struct ExperimentResult {
    std::vector<ResultRow> rows;
    std::vector<CellReplication> replications;
    std::uint64_t base_seed = 0;
};

// Runs every (population, horizon, algorithm) cell; requires spec.base_seed.
ExperimentResult run_experiment_detailed(const ExperimentSpec& spec, const RecipeDataset& ds, const DayConfig& cfg);
std::vector<ResultRow> run_experiment(const ExperimentSpec& spec, const RecipeDataset& ds, const DayConfig& cfg);

// Config name, then horizon, then algorithm in bandit/sequential/random order.
void sort_rows(std::vector<ResultRow>& rows);

enum class ReportFormat { Csv, Table, Json };

std::optional<ReportFormat> parse_report_format(std::string_view token) noexcept;
// Round half up to three decimals.
std::string format_score(double value);
// Throws DomainError on empty rows.
std::string emit_report(std::vector<ResultRow> rows, ReportFormat format);
std::vector<ResultRow> parse_report_json(std::string_view text);

}  // namespace mealrec
