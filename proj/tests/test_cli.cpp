#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "nilcorr/error.hpp"
#include "runner.hpp"

using namespace nilcorr;
using namespace nilcorr::cli;

namespace {

json gowers_constant() {
    return {{"schema_version", 1}, {"kind", "gowers-norm"}, {"function", {{"type", "constant"}, {"N", 8}}}, {"k", 2}};
}

std::string error_of(const json& cfg) {
    try {
        normalize(cfg);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

json without_timestamp(json report) {
    report.erase("timestamp");
    return report;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST(Cli, GowersConstantIsOne) {
    const auto a = run_experiment(gowers_constant());
    EXPECT_EQ(a.report["results"]["value"].get<double>(), 1.0);
    EXPECT_TRUE(a.report.contains("timestamp"));
}

TEST(Cli, UnknownFieldsAreNamed) {
    json c = gowers_constant();
    c["colour"] = 3;
    EXPECT_NE(error_of(c).find("'colour'"), std::string::npos);
    c = gowers_constant();
    c["function"]["vaule"] = 2;
    EXPECT_NE(error_of(c).find("'function.vaule'"), std::string::npos);
    c = gowers_constant();
    c.erase("function");
    EXPECT_NE(error_of(c).find("'function'"), std::string::npos);
    c = gowers_constant();
    c["schema_version"] = 2;
    EXPECT_NE(error_of(c).find("schema_version"), std::string::npos);
    c = gowers_constant();
    c["mode"] = "fast";
    EXPECT_NE(error_of(c).find("mode"), std::string::npos);
}

TEST(Cli, NormalizeIsLosslessFixedPoint) {
    std::vector<json> configs{gowers_constant()};
    for (const auto& [id, entry] : catalog()) configs.push_back(entry.config);
    for (const auto& entry : std::filesystem::directory_iterator(NILCORR_CONFIG_DIR))
        configs.push_back(json::parse(std::ifstream(entry.path())));
    for (const auto& c : configs) {
        const json n = normalize(c);
        EXPECT_EQ(normalize(n), n);
        EXPECT_EQ(json::parse(n.dump()), n);
        // Every explicitly given field survives normalization unchanged.
        for (const auto& [k, v] : c.items())
            if (!v.is_object() && !v.is_array()) EXPECT_EQ(n[k], v) << k;
    }
}

TEST(Cli, CatalogCoversEveryCriterion) {
    std::set<int> criteria;
    for (const auto& [id, entry] : catalog()) {
        criteria.insert(entry.criterion);
        EXPECT_NO_THROW(normalize(entry.config)) << id;
    }
    for (int c = 1; c <= 10; ++c) EXPECT_TRUE(criteria.count(c)) << c;
    for (const char* id : {"thmA-skew-primes", "csg-random-sweep", "lemma-von-mangoldt-gap"})
        EXPECT_TRUE(catalog().count(id)) << id;
}

TEST(Cli, ShippedConfigsMatchCatalog) {
    for (const auto& [id, entry] : catalog()) {
        const auto path = std::filesystem::path(NILCORR_CONFIG_DIR) / (id + ".json");
        ASSERT_TRUE(std::filesystem::exists(path)) << path;
        EXPECT_EQ(json::parse(std::ifstream(path)), entry.config) << id;
    }
}

TEST(Cli, SameSeedSameReport) {
    json c{{"schema_version", 1}, {"kind", "csg"}, {"trials", 40}, {"seed", 9}};
    const auto a = run_experiment(c), b = run_experiment(c);
    EXPECT_EQ(without_timestamp(a.report).dump(), without_timestamp(b.report).dump());
    EXPECT_EQ(a.series.rows, b.series.rows);
    c["seed"] = 10;
    EXPECT_NE(run_experiment(c).series.rows, a.series.rows);

    json d = catalog().at("thmA-rotation-primes").config;
    d["N"] = 3000;
    EXPECT_EQ(without_timestamp(run_experiment(d).report).dump(), without_timestamp(run_experiment(d).report).dump());
}

TEST(Cli, ArtifactsFormat) {
    const auto dir = std::filesystem::temp_directory_path() / "nilcorr_cli_test";
    std::filesystem::remove_all(dir);
    json c = gowers_constant();
    c["report"] = "r.json";
    write_artifacts(run_experiment(c), dir);
    const std::string csv = slurp(dir / "series.csv");
    EXPECT_EQ(csv.rfind("n,re,im\n", 0), 0u);
    EXPECT_EQ(csv.find('\r'), std::string::npos);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 9);
    EXPECT_EQ(json::parse(slurp(dir / "r.json"))["results"]["value"], 1.0);
    std::filesystem::remove_all(dir);
}

TEST(Cli, ExitCodes) {
    EXPECT_EQ(exit_code_for(ConfigError("x")), 2);
    EXPECT_EQ(exit_code_for(ValidationError("x")), 2);
    EXPECT_EQ(exit_code_for(RangeError("x")), 2);
    EXPECT_EQ(exit_code_for(ShapeError("x")), 2);
    EXPECT_EQ(exit_code_for(DomainError("x")), 2);
    EXPECT_EQ(exit_code_for(ResourceError("x")), 3);
    EXPECT_EQ(exit_code_for(NumericalError("x")), 1);
    EXPECT_EQ(exit_code_for(std::runtime_error("x")), 1);

    json c = gowers_constant();
    c["function"]["N"] = 4096;
    c["k"] = 3;
    EXPECT_THROW(run_experiment(c), ResourceError);
}

TEST(Cli, StabilityFamilyIsBounded) {
    const auto fam = stability_family();
    ASSERT_EQ(fam.size(), 20u);
    for (const auto& [F, G] : fam) {
        EXPECT_LE(F.coefficient_l1(), 1.0 + 1e-12);
        EXPECT_LE(G.coefficient_l1(), 1.0 + 1e-12);
    }
}

TEST(Cli, ExactPhasesFromFractions) {
    json c{{"schema_version", 1},
           {"kind", "correlation"},
           {"correlation",
            {{"system", {{"type", "rotation"}, {"angles", {"1/4"}}}},
             {"f0", {{{"freq", {-1}}}}},
             {"slots", {{{"observable", {{{"freq", {1}}}}}, {"exponents", {{{"monomial", {0, 1}}}}}}}}}},
           {"window", {0, 4}}};
    const auto a = run_experiment(c);
    const std::vector<std::vector<double>> expect{{0, 1, 0}, {1, 0, 1}, {2, -1, 0}, {3, 0, -1}};
    ASSERT_EQ(a.series.rows.size(), expect.size());
    for (std::size_t i = 0; i < expect.size(); ++i)
        for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(a.series.rows[i][j], expect[i][j], 1e-15);
}
