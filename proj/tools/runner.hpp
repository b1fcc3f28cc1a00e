#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "nilcorr/nilseq.hpp"

namespace nilcorr::cli {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

/// Column-named series written as series.csv. The first column is n.
struct Series {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

struct Artifacts {
    json report;
    Series series;
};

/// Checks a config against the schema of its kind and fills in every default.
/// ConfigError names the offending field. The result is a fixed point:
/// normalize(normalize(c)) == normalize(c).
json normalize(const json& config);

/// Runs a config (normalized first). The report carries the normalized config,
/// the kind-specific results and a "timestamp" field, nothing time-dependent
/// besides that.
Artifacts run_experiment(const json& config);

/// Writes <dir>/<report> and <dir>/<series> as named in the config.
void write_artifacts(const Artifacts& artifacts, const std::filesystem::path& dir);

struct CatalogEntry {
    int criterion = 0;
    std::string description;
    json config;
};

/// Shipped acceptance experiments, one or two per acceptance criterion.
const std::map<std::string, CatalogEntry>& catalog();

/// 0 ok, 2 for validation-type errors, 3 for resource errors, 1 otherwise.
int exit_code_for(const std::exception& e);

/// The fixed family of 20 (F, G) observable pairs on the circle used by the
/// dual stability experiment. Every member satisfies |F|, |G| <= 1.
std::vector<std::pair<ObservableSpec, ObservableSpec>> stability_family();

}  // namespace nilcorr::cli
