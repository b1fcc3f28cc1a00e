#include "runner.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <numeric>
#include <random>
#include <set>

#include "nilcorr/correlation.hpp"
#include "nilcorr/decomp.hpp"
#include "nilcorr/error.hpp"
#include "nilcorr/gowers.hpp"
#include "nilcorr/parallel.hpp"
#include "nilcorr/primes.hpp"
#include "nilcorr/systems.hpp"

namespace nilcorr::cli {

namespace {

constexpr double kGolden = 0.6180339887498949;

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
    throw ConfigError(path + ": " + msg);
}

std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

std::string index(const std::string& path, std::size_t i) {
    return path + "[" + std::to_string(i) + "]";
}

/// Allowed keys with their defaults. A key mapped to `required` must be given.
using Schema = std::vector<std::pair<std::string, json>>;
const json required = json::object({{"$required", true}});

json apply_schema(const json& obj, const Schema& schema, const std::string& path) {
    if (!obj.is_object()) fail(path.empty() ? "config" : path, "expected an object");
    for (const auto& [key, value] : obj.items()) {
        const bool known = std::any_of(schema.begin(), schema.end(),
                                       [&](const auto& f) { return f.first == key; });
        if (!known) throw ConfigError("unknown field '" + join(path, key) + "'");
    }
    json out = obj;
    for (const auto& [key, def] : schema) {
        if (out.contains(key)) continue;
        if (def == required) throw ConfigError("missing field '" + join(path, key) + "'");
        out[key] = def;
    }
    return out;
}

// Typed accessors. Integers may be written as 1e5 in the config.

std::int64_t as_int(const json& j, const std::string& path) {
    if (j.is_number_integer()) return j.get<std::int64_t>();
    if (j.is_number_float()) {
        const double d = j.get<double>();
        if (std::trunc(d) == d && std::abs(d) < 9.2e18) return static_cast<std::int64_t>(d);
    }
    fail(path, "expected an integer");
}

std::int64_t as_positive(const json& j, const std::string& path) {
    const std::int64_t v = as_int(j, path);
    if (v < 1) fail(path, "must be positive");
    return v;
}

double as_num(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
}

bool as_bool(const json& j, const std::string& path) {
    if (!j.is_boolean()) fail(path, "expected true or false");
    return j.get<bool>();
}

std::string as_string(const json& j, const std::string& path) {
    if (!j.is_string()) fail(path, "expected a string");
    return j.get<std::string>();
}

std::string as_choice(const json& j, const std::string& path, std::initializer_list<const char*> options) {
    const std::string s = as_string(j, path);
    for (const char* o : options)
        if (s == o) return s;
    std::string msg = "expected one of";
    for (const char* o : options) msg += std::string(" ") + o;
    fail(path, msg + ", got '" + s + "'");
}

const json& as_array(const json& j, const std::string& path) {
    if (!j.is_array()) fail(path, "expected an array");
    return j;
}

std::vector<std::int64_t> as_ints(const json& j, const std::string& path) {
    std::vector<std::int64_t> v;
    for (std::size_t i = 0; i < as_array(j, path).size(); ++i) v.push_back(as_int(j[i], index(path, i)));
    return v;
}

std::vector<double> as_nums(const json& j, const std::string& path) {
    std::vector<double> v;
    for (std::size_t i = 0; i < as_array(j, path).size(); ++i) v.push_back(as_num(j[i], index(path, i)));
    return v;
}

// "p/q" strings are exact; numbers go through the nearest dyadic phase.
std::pair<std::int64_t, std::int64_t> parse_fraction(const std::string& s, const std::string& path) {
    const auto slash = s.find('/');
    try {
        std::size_t used = 0;
        const std::int64_t p = std::stoll(s.substr(0, slash), &used);
        if (used != (slash == std::string::npos ? s.size() : slash)) throw std::invalid_argument(s);
        if (slash == std::string::npos) return {p, 1};
        const std::string den = s.substr(slash + 1);
        const std::int64_t q = std::stoll(den, &used);
        if (used != den.size() || q == 0) throw std::invalid_argument(s);
        return {p, q};
    } catch (const std::logic_error&) {
        fail(path, "expected a number or a fraction \"p/q\", got '" + s + "'");
    }
}

Phase as_phase(const json& j, const std::string& path) {
    if (j.is_number()) return Phase::from_double(j.get<double>());
    if (j.is_string()) {
        const auto [p, q] = parse_fraction(j.get<std::string>(), path);
        return Phase::from_rational(p, q);
    }
    fail(path, "expected a phase (number or \"p/q\")");
}

std::vector<Phase> as_phases(const json& j, const std::string& path) {
    std::vector<Phase> v;
    for (std::size_t i = 0; i < as_array(j, path).size(); ++i) v.push_back(as_phase(j[i], index(path, i)));
    return v;
}

Rational as_rational(const json& j, const std::string& path) {
    if (j.is_string()) {
        const auto [p, q] = parse_fraction(j.get<std::string>(), path);
        return Rational(p, q);
    }
    return Rational(as_int(j, path));
}

cplx as_cplx(const json& j, const std::string& path) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (j.is_array() && j.size() == 2) return {as_num(j[0], index(path, 0)), as_num(j[1], index(path, 1))};
    fail(path, "expected a number or [re, im]");
}

Window as_window(const json& j, const std::string& path) {
    const auto v = as_ints(j, path);
    if (v.size() != 2 || v[1] <= v[0]) fail(path, "expected [begin, end] with begin < end");
    return {v[0], v[1]};
}

json cjson(cplx z) { return json::array({z.real(), z.imag()}); }

// ---------------------------------------------------------------- systems

json norm_system(const json& j, const std::string& path) {
    if (!j.is_object() || !j.contains("type")) fail(path, "expected an object with a 'type'");
    const std::string type = as_choice(j["type"], join(path, "type"),
                                       {"rotation", "skew", "doubling", "heisenberg", "commuting_family"});
    Schema s{{"type", required}};
    if (type == "rotation") s.emplace_back("angles", required);
    if (type == "skew") s.emplace_back("theta", required);
    if (type == "heisenberg")
        for (const char* k : {"a", "b", "c"}) s.emplace_back(k, required);
    if (type == "commuting_family") s.emplace_back("rotations", required);
    return apply_schema(j, s, path);
}

MpSystemSpec build_system(const json& j, const std::string& path) {
    const std::string type = j["type"];
    if (type == "rotation") {
        auto a = as_phases(j["angles"], join(path, "angles"));
        if (a.empty()) fail(join(path, "angles"), "needs at least one angle");
        return MpSystemSpec::rotation(std::move(a));
    }
    if (type == "skew") return MpSystemSpec::skew(as_phase(j["theta"], join(path, "theta")));
    if (type == "doubling") return MpSystemSpec::doubling();
    if (type == "heisenberg")
        return MpSystemSpec::heisenberg(as_phase(j["a"], join(path, "a")), as_phase(j["b"], join(path, "b")),
                                        as_phase(j["c"], join(path, "c")));
    std::vector<std::vector<Phase>> rots;
    const std::string rp = join(path, "rotations");
    for (std::size_t i = 0; i < as_array(j["rotations"], rp).size(); ++i)
        rots.push_back(as_phases(j["rotations"][i], index(rp, i)));
    return MpSystemSpec::commuting_family(std::move(rots));
}

std::vector<Phase> system_angles(const MpSystemSpec& sys) {
    std::vector<Phase> out;
    for (std::size_t t = 0; t < sys.transformation_count(); ++t)
        for (Phase p : sys.parameters(t)) out.push_back(p);
    return out;
}

// ----------------------------------------------------------- observables

json norm_observable(const json& j, const std::string& path) {
    json out = json::array();
    for (std::size_t i = 0; i < as_array(j, path).size(); ++i)
        out.push_back(apply_schema(j[i], {{"freq", required}, {"coeff", 1.0}, {"phase", 0.0}}, index(path, i)));
    if (out.empty()) fail(path, "needs at least one term");
    return out;
}

ObservableSpec build_observable(const json& j, const std::string& path) {
    std::optional<ObservableSpec> F;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string tp = index(path, i);
        FreqVec freq;
        for (std::int64_t c : as_ints(j[i]["freq"], join(tp, "freq"))) freq.emplace_back(c);
        if (freq.empty()) fail(join(tp, "freq"), "needs at least one coordinate");
        if (!F) F.emplace(freq.size());
        if (freq.size() != F->dimension()) fail(join(tp, "freq"), "dimension differs from the first term");
        F->add_term({std::move(freq), as_cplx(j[i]["coeff"], join(tp, "coeff")),
                     as_phase(j[i]["phase"], join(tp, "phase"))});
    }
    return *F;
}

json norm_nilsequence(const json& j, const std::string& path) {
    json out = apply_schema(j, {{"system", required}, {"observable", required}, {"x0", nullptr}}, path);
    out["system"] = norm_system(out["system"], join(path, "system"));
    out["observable"] = norm_observable(out["observable"], join(path, "observable"));
    return out;
}

NilsequenceSpec build_nilsequence(const json& j, const std::string& path) {
    NilsequenceSpec spec{build_system(j["system"], join(path, "system")),
                         build_observable(j["observable"], join(path, "observable")),
                         {}};
    spec.x0 = j["x0"].is_null() ? Point(spec.system.dimension()) : as_phases(j["x0"], join(path, "x0"));
    spec.validate();
    return spec;
}

json norm_correlation(const json& j, const std::string& path) {
    json out = apply_schema(j, {{"system", required}, {"f0", required}, {"slots", required}}, path);
    out["system"] = norm_system(out["system"], join(path, "system"));
    out["f0"] = norm_observable(out["f0"], join(path, "f0"));
    const std::string sp = join(path, "slots");
    for (std::size_t i = 0; i < as_array(out["slots"], sp).size(); ++i) {
        const std::string p = index(sp, i);
        json slot = apply_schema(out["slots"][i], {{"observable", required}, {"exponents", required}}, p);
        slot["observable"] = norm_observable(slot["observable"], join(p, "observable"));
        const std::string ep = join(p, "exponents");
        for (std::size_t e = 0; e < as_array(slot["exponents"], ep).size(); ++e) {
            json ex = apply_schema(slot["exponents"][e],
                                   {{"transformation", 0}, {"monomial", nullptr}, {"binomial", nullptr}},
                                   index(ep, e));
            if (ex["monomial"].is_null() == ex["binomial"].is_null())
                fail(index(ep, e), "give exactly one of 'monomial' or 'binomial'");
            slot["exponents"][e] = ex;
        }
        out["slots"][i] = slot;
    }
    return out;
}

CorrelationSpec build_correlation(const json& j, const std::string& path) {
    CorrelationSpec spec{build_system(j["system"], join(path, "system")),
                         build_observable(j["f0"], join(path, "f0")),
                         {}};
    const std::string sp = join(path, "slots");
    for (std::size_t i = 0; i < j["slots"].size(); ++i) {
        const std::string p = index(sp, i);
        const json& slot = j["slots"][i];
        CorrelationSlot s{build_observable(slot["observable"], join(p, "observable")), {}};
        for (std::size_t e = 0; e < slot["exponents"].size(); ++e) {
            const std::string ep = index(join(p, "exponents"), e);
            const json& ex = slot["exponents"][e];
            const bool mono = !ex["monomial"].is_null();
            const json& cj = mono ? ex["monomial"] : ex["binomial"];
            std::vector<Rational> coeffs;
            for (std::size_t c = 0; c < as_array(cj, ep).size(); ++c) coeffs.push_back(as_rational(cj[c], index(ep, c)));
            const std::int64_t t = as_int(ex["transformation"], join(ep, "transformation"));
            if (t < 0) fail(join(ep, "transformation"), "must be >= 0");
            s.exponents.push_back({static_cast<std::size_t>(t),
                                   mono ? IntPolynomial::from_monomial(coeffs) : IntPolynomial::from_binomial(coeffs)});
        }
        spec.slots.push_back(std::move(s));
    }
    spec.validate();
    return spec;
}

// -------------------------------------------------------------- sequences

json norm_sequence(const json& j, const std::string& path) {
    if (!j.is_object() || !j.contains("type")) fail(path, "expected an object with a 'type'");
    const std::string type = as_choice(j["type"], join(path, "type"), {"constant", "random_signs", "nilsequence"});
    if (type == "constant") return apply_schema(j, {{"type", required}, {"value", 1.0}}, path);
    if (type == "random_signs") return apply_schema(j, {{"type", required}}, path);
    json inner = j;
    inner.erase("type");
    json out = norm_nilsequence(inner, path);
    out["type"] = "nilsequence";
    return out;
}

SampledSequence build_sequence(const json& j, const std::string& path, Window w, std::uint64_t seed) {
    const std::string type = j["type"];
    if (type == "constant")
        return SampledSequence::constant(w.begin, static_cast<std::size_t>(w.length()), as_cplx(j["value"], join(path, "value")));
    if (type == "random_signs") {
        std::mt19937_64 rng(seed);
        std::vector<cplx> v(static_cast<std::size_t>(w.length()));
        for (auto& z : v) z = (rng() >> 63) ? 1.0 : -1.0;
        return SampledSequence(w.begin, std::move(v));
    }
    return nilsequence_samples(build_nilsequence(j, path), w);
}

json norm_function(const json& j, const std::string& path) {
    if (!j.is_object() || !j.contains("type")) fail(path, "expected an object with a 'type'");
    const std::string type = as_choice(j["type"], join(path, "type"),
                                       {"constant", "character", "delta", "random_disc", "values"});
    if (type == "values") return apply_schema(j, {{"type", required}, {"values", required}}, path);
    Schema s{{"type", required}, {"N", required}};
    if (type == "constant") s.emplace_back("value", 1.0);
    if (type == "character") s.emplace_back("a", 1);
    return apply_schema(j, s, path);
}

ZnFunction build_function(const json& j, const std::string& path, std::uint64_t seed) {
    const std::string type = j["type"];
    if (type == "values") {
        std::vector<cplx> v;
        const std::string vp = join(path, "values");
        for (std::size_t i = 0; i < as_array(j["values"], vp).size(); ++i) v.push_back(as_cplx(j["values"][i], index(vp, i)));
        return ZnFunction(std::move(v));
    }
    const auto N = static_cast<std::size_t>(as_positive(j["N"], join(path, "N")));
    if (type == "constant") return ZnFunction::constant(N, as_cplx(j["value"], join(path, "value")));
    if (type == "character") {
        const std::int64_t a = as_int(j["a"], join(path, "a"));
        return ZnFunction::from(N, [&](std::int64_t n) {
            return e(Phase::from_rational((a * n) % static_cast<std::int64_t>(N), static_cast<std::int64_t>(N)));
        });
    }
    if (type == "delta") return ZnFunction::from(N, [](std::int64_t n) { return n == 0 ? 1.0 : 0.0; });
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0, 1);
    return ZnFunction::from(N, [&](std::int64_t) { return std::sqrt(u(rng)) * e(u(rng)); });
}

json norm_dictionary(const json& j, const std::string& path) {
    const DictionaryOptions d;
    return apply_schema(j, {{"step", d.step},
                            {"angles", nullptr},
                            {"multipliers", d.multipliers},
                            {"rational_denominator", d.rational_denominator},
                            {"fiducial", d.fiducial},
                            {"include_duals", d.include_duals}},
                        path);
}

DictionaryOptions build_dictionary_options(const json& j, const std::string& path, const MpSystemSpec& sys) {
    DictionaryOptions d;
    d.step = static_cast<int>(as_positive(j["step"], join(path, "step")));
    d.angles = j["angles"].is_null() ? system_angles(sys) : as_phases(j["angles"], join(path, "angles"));
    d.multipliers = as_ints(j["multipliers"], join(path, "multipliers"));
    d.rational_denominator = as_int(j["rational_denominator"], join(path, "rational_denominator"));
    d.fiducial = as_nums(j["fiducial"], join(path, "fiducial"));
    d.include_duals = as_bool(j["include_duals"], join(path, "include_duals"));
    return d;
}

// ---------------------------------------------------------------- schemas

const Schema& common_schema() {
    static const Schema s{{"schema_version", required}, {"kind", required}, {"task", nullptr},
                          {"label", ""},        {"seed", 0},         {"threads", 0},
                          {"budget", 1e9},      {"out_dir", "."},    {"report", "report.json"},
                          {"series", "series.csv"}};
    return s;
}

json character(std::vector<long> freq);

json golden_character_nilsequence() {
    return {{"system", {{"type", "rotation"}, {"angles", {kGolden}}}},
            {"observable", character({1})},
            {"x0", nullptr}};
}

Schema kind_schema(const std::string& kind, const std::string& task) {
    if (kind == "gowers-norm") {
        if (task == "norm")
            return {{"function", required}, {"k", 2}, {"mode", "exact"}, {"samples", 100000}};
        return {{"trials", 1000},
                {"moduli", task == "fft-oracle" ? json{8, 16, 32, 64} : json{8, 16, 32}},
                {"tolerance", 1e-9}};
    }
    if (kind == "csg") return {{"k_values", {2, 3}}, {"moduli", {8, 16}}, {"trials", 10000}, {"slack", 1e-9}};
    if (kind == "seminorm")
        return {{"sequence", required}, {"k", 2},        {"H", 64},   {"N", 16384},
                {"compare_hk", false},  {"hk_caps", nullptr}, {"grid", 8}, {"tolerance", 0.1}};
    if (kind == "correlation") return {{"correlation", required}, {"window", {0, 256}}, {"grid", 64}};
    if (kind == "dual") {
        if (task == "values")
            return {{"nilsequence", required}, {"k", 2}, {"outer", 64}, {"inner", 64}, {"window", {0, 64}}};
        if (task == "convergence")
            return {{"nilsequence", required},
                    {"k", 2},
                    {"ladder", {{16, 256}, {64, 1024}, {256, 4096}}},
                    {"probes", 16}};
        if (task == "identities")
            return {{"nilsequence", required}, {"H", 64},       {"N", 16384},
                    {"conj_box", {256, 4096}}, {"probes", 16},  {"pairing_tolerance", 0.05},
                    {"conj_tolerance", 0.02}};
        Schema s{{"system", required}, {"k", 2}, {"outer", 32}, {"inner", 32}, {"grid", 16}, {"slack", 0.05}};
        if (task == "stability") {
            s.emplace_back("F", required);
            s.emplace_back("G", required);
        }
        return s;
    }
    if (kind == "primes-gap")
        return {{"sequence", {{"type", "constant"}, {"value", 1.0}}},
                {"N_values", {100000, 1000000}},
                {"thresholds", {0.01, 0.004}},
                {"wtrick_W", 6},
                {"wtrick_b", 1},
                {"wtrick_N", 100000},
                {"wtrick_tolerance", 0.05},
                {"expected_prime_count", nullptr}};
    Schema s{{"N", 100000}, {"epsilon", 1e-8}, {"dictionary", json::object()}};
    if (kind == "decompose") {
        s.emplace_back("correlation", required);
        s.emplace_back("fit", "least_squares");
    } else if (kind == "wtrick") {
        s.emplace_back("correlation", required);
        s.emplace_back("fit", "least_squares");
        s.emplace_back("W_values", json{1, 6, 30});
        s.emplace_back("fill", "zero");
    } else {
        s.emplace_back("nil", required);
        s.emplace_back("mixing", required);
    }
    return s;
}

std::string default_task(const std::string& kind) {
    if (kind == "gowers-norm") return "norm";
    if (kind == "dual") return "values";
    return "";
}

std::initializer_list<const char*> tasks_of(const std::string& kind) {
    static const std::initializer_list<const char*> gowers{"norm", "fft-oracle", "monotonicity"};
    static const std::initializer_list<const char*> dual{"values", "convergence", "identities", "stability",
                                                         "stability-family"};
    return kind == "gowers-norm" ? gowers : dual;
}

// ------------------------------------------------------------------ output

struct Context {
    const json& cfg;
    std::uint64_t seed;
    double budget;
    json results = json::object();
    Series series;
};

std::string timestamp_now() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json report_json(const DecompositionReport& r) {
    json c = json::array();
    for (cplx z : r.coefficients) c.push_back(cjson(z));
    return {{"coefficients", c},
            {"atoms", r.atoms},
            {"cesaro_l1", r.cesaro_l1},
            {"cesaro_fluctuation", r.cesaro_fluctuation},
            {"prime_l1", r.prime_l1},
            {"N", r.N},
            {"W", r.W},
            {"excluded_primes", r.excluded_primes},
            {"primes_used", r.primes_used},
            {"epsilon_target", r.epsilon_target},
            {"achieved", r.achieved},
            {"regularized", r.regularized}};
}

// ------------------------------------------------------------------- kinds

GowersConfig gowers_cfg(const Context& cx, int k) {
    GowersConfig g;
    g.k = k;
    g.budget = cx.budget;
    g.rng_seed = cx.seed;
    return g;
}

// Random test input: a uniform disc sample, or a structured phase plus noise
// so that norms close to 1 are exercised as well.
ZnFunction random_input(std::size_t N, std::mt19937_64& rng, std::uint64_t trial) {
    std::uniform_real_distribution<double> u(0, 1);
    if (trial % 4 == 3) {
        const auto a = static_cast<std::int64_t>(rng() % N), b = static_cast<std::int64_t>(rng() % N);
        const double noise = 0.2 * u(rng);
        return ZnFunction::from(N, [&](std::int64_t n) {
            const auto M = static_cast<std::int64_t>(N);
            const cplx c = e(Phase::from_rational((a * n % M * n + b * n) % M, M));
            return (1.0 - noise) * c + noise * std::sqrt(u(rng)) * e(u(rng));
        });
    }
    return ZnFunction::from(N, [&](std::int64_t) { return std::sqrt(u(rng)) * e(u(rng)); });
}

void run_gowers(Context& cx, const std::string& task) {
    const json& c = cx.cfg;
    if (task == "norm") {
        const ZnFunction f = build_function(c["function"], "function", cx.seed);
        const int k = static_cast<int>(as_positive(c["k"], "k"));
        const std::string mode = as_choice(c["mode"], "mode", {"exact", "sampled", "fft"});
        GowersEstimate est;
        if (mode == "fft") {
            if (k != 2) fail("mode", "the fft path computes U^2 only");
            est.value = gowers_norm_u2_fft(f);
            est.power = std::pow(est.value, 4);
        } else {
            GowersConfig g = gowers_cfg(cx, k);
            g.mode = mode == "exact" ? GowersMode::exact : GowersMode::sampled;
            g.sample_count = static_cast<std::uint64_t>(as_positive(c["samples"], "samples"));
            est = gowers_norm_zn(f, g);
        }
        cx.results = {{"value", est.value}, {"power", est.power}, {"std_error", est.std_error},
                      {"N", f.modulus()}, {"k", k}};
        cx.series.columns = {"n", "re", "im"};
        for (std::size_t n = 0; n < f.modulus(); ++n)
            cx.series.rows.push_back({double(n), f.values()[n].real(), f.values()[n].imag()});
        return;
    }
    const std::int64_t trials = as_positive(c["trials"], "trials");
    const auto moduli = as_ints(c["moduli"], "moduli");
    if (moduli.empty()) fail("moduli", "needs at least one modulus");
    for (std::size_t i = 0; i < moduli.size(); ++i)
        if (moduli[i] < 1) fail(index("moduli", i), "must be positive");
    const double tol = as_num(c["tolerance"], "tolerance");
    std::mt19937_64 rng(cx.seed);
    double worst = 0;
    std::int64_t violations = 0;
    const bool fft = task == "fft-oracle";
    cx.series.columns = fft ? std::vector<std::string>{"n", "N", "exact", "fft", "rel_diff"}
                            : std::vector<std::string>{"n", "N", "u2", "u3", "excess"};
    for (std::int64_t t = 0; t < trials; ++t) {
        const auto N = static_cast<std::size_t>(moduli[static_cast<std::size_t>(t) % moduli.size()]);
        const ZnFunction f = random_input(N, rng, static_cast<std::uint64_t>(t));
        const double a = gowers_norm_zn(f, gowers_cfg(cx, 2)).value;
        const double b = fft ? gowers_norm_u2_fft(f) : gowers_norm_zn(f, gowers_cfg(cx, 3)).value;
        const double d = fft ? std::abs(a - b) / std::max(a, 1e-300) : a - b;
        worst = std::max(worst, d);
        if (d > tol) ++violations;
        cx.series.rows.push_back({double(t), double(N), a, b, d});
    }
    cx.results = {{"trials", trials}, {fft ? "max_rel_diff" : "max_excess", worst},
                  {"violations", violations}, {"passed", violations == 0}};
}

void run_csg(Context& cx) {
    const json& c = cx.cfg;
    const auto ks = as_ints(c["k_values"], "k_values");
    const auto moduli = as_ints(c["moduli"], "moduli");
    if (ks.empty() || moduli.empty()) fail("k_values", "k_values and moduli must be nonempty");
    for (std::int64_t k : ks)
        if (k < 1 || k > 6) fail("k_values", "k must lie in 1..6");
    for (std::int64_t N : moduli)
        if (N < 1) fail("moduli", "must be positive");
    const std::int64_t trials = as_positive(c["trials"], "trials");
    const double slack = as_num(c["slack"], "slack");
    std::mt19937_64 rng(cx.seed);
    std::int64_t violations = 0, tight = 0;
    double max_excess = -std::numeric_limits<double>::infinity();
    cx.series.columns = {"n", "k", "N", "lhs", "rhs"};
    for (std::int64_t t = 0; t < trials; ++t) {
        const auto k = static_cast<int>(ks[static_cast<std::size_t>(t) % ks.size()]);
        const auto N = static_cast<std::size_t>(moduli[static_cast<std::size_t>(t / static_cast<std::int64_t>(ks.size())) % moduli.size()]);
        std::vector<ZnFunction> fam;
        const std::size_t size = std::size_t{1} << k;
        if (t % 4 == 0) {
            // Equality case: f_eta = C^|eta| f.
            const ZnFunction f = random_input(N, rng, static_cast<std::uint64_t>(t));
            for (std::size_t eta = 0; eta < size; ++eta) fam.push_back(std::popcount(eta) % 2 ? f.conj() : f);
            ++tight;
        } else {
            for (std::size_t eta = 0; eta < size; ++eta)
                fam.push_back(random_input(N, rng, static_cast<std::uint64_t>(t) + eta));
        }
        const CsgResult r = csg_check(fam, gowers_cfg(cx, k));
        max_excess = std::max(max_excess, r.lhs - r.rhs);
        if (r.lhs > r.rhs + slack) ++violations;
        cx.series.rows.push_back({double(t), double(k), double(N), r.lhs, r.rhs});
    }
    cx.results = {{"trials", trials},         {"equality_cases", tight}, {"violations", violations},
                  {"max_excess", max_excess}, {"passed", violations == 0}};
}

void run_seminorm(Context& cx) {
    const json& c = cx.cfg;
    const int k = static_cast<int>(as_positive(c["k"], "k"));
    const std::int64_t H = as_positive(c["H"], "H"), N = as_positive(c["N"], "N");
    const auto seq = build_sequence(c["sequence"], "sequence", {0, N + k * H + 1}, cx.seed);
    const double u = uniformity_seminorm_n(seq, k, H, N);
    cx.results = {{"seminorm", u}};
    if (as_bool(c["compare_hk"], "compare_hk")) {
        if (c["sequence"]["type"] != "nilsequence") fail("compare_hk", "needs a nilsequence");
        const auto spec = build_nilsequence(c["sequence"], "sequence");
        const auto caps = c["hk_caps"].is_null() ? std::vector<std::int64_t>(static_cast<std::size_t>(k), H)
                                                 : as_ints(c["hk_caps"], "hk_caps");
        const double hk = hk_seminorm_estimate(spec.system, spec.F, k, caps,
                                               {as_positive(c["grid"], "grid")});
        const double diff = std::abs(hk - u);
        cx.results["hk"] = hk;
        cx.results["difference"] = diff;
        cx.results["passed"] = diff <= as_num(c["tolerance"], "tolerance");
    }
    cx.series.columns = {"n", "re", "im"};
    for (std::int64_t n = 0; n < N; ++n) cx.series.rows.push_back({double(n), seq[n].real(), seq[n].imag()});
}

void run_correlation(Context& cx) {
    const json& c = cx.cfg;
    const auto spec = build_correlation(c["correlation"], "correlation");
    const Window w = as_window(c["window"], "window");
    const auto alpha = multicorrelation_sequence(spec, w, {as_positive(c["grid"], "grid")});
    double max_abs = 0;
    cx.series.columns = {"n", "re", "im"};
    for (std::int64_t n = w.begin; n < w.end; ++n) {
        max_abs = std::max(max_abs, std::abs(alpha[n]));
        cx.series.rows.push_back({double(n), alpha[n].real(), alpha[n].imag()});
    }
    cx.results = {{"count", w.length()}, {"mean", cjson(cesaro_average(alpha, w))}, {"max_abs", max_abs}};
}

DualTruncation truncation(const json& c) {
    return {as_positive(c["outer"], "outer"), as_positive(c["inner"], "inner")};
}

void run_dual(Context& cx, const std::string& task) {
    const json& c = cx.cfg;
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    if (task == "values") {
        const auto spec = build_nilsequence(c["nilsequence"], "nilsequence");
        const int k = static_cast<int>(as_positive(c["k"], "k"));
        const Window w = as_window(c["window"], "window");
        const auto tr = truncation(c);
        const auto d = dual_sequence_samples(spec, k, tr, w);
        cx.series.columns = {"n", "dual_re", "dual_im", "symbolic_re", "symbolic_im"};
        for (std::int64_t n = w.begin; n < w.end; ++n) {
            const auto s = symbolic_dual(spec, k, n);
            cx.series.rows.push_back({double(n), d[n].real(), d[n].imag(), s ? s->real() : nan, s ? s->imag() : nan});
        }
        cx.results = {{"count", w.length()}, {"symbolic_available", symbolic_dual(spec, k, w.begin).has_value()}};
        return;
    }
    if (task == "convergence") {
        const auto spec = build_nilsequence(c["nilsequence"], "nilsequence");
        const int k = static_cast<int>(as_positive(c["k"], "k"));
        std::vector<DualTruncation> ladder;
        for (std::size_t i = 0; i < as_array(c["ladder"], "ladder").size(); ++i) {
            const auto v = as_ints(c["ladder"][i], index("ladder", i));
            if (v.size() != 2) fail(index("ladder", i), "expected [outer, inner]");
            ladder.push_back({v[0], v[1]});
        }
        std::vector<std::int64_t> probes(static_cast<std::size_t>(as_positive(c["probes"], "probes")));
        std::iota(probes.begin(), probes.end(), 0);
        const auto r = dual_uniform_convergence_check(spec, k, ladder, probes);
        cx.results = {{"max_deviation_per_level", r.max_deviation_per_level},
                      {"monotone_decreasing", r.monotone_decreasing},
                      {"against_symbolic", r.against_symbolic}};
        cx.series.columns = {"n", "outer", "inner", "max_deviation"};
        for (std::size_t i = 0; i < ladder.size(); ++i)
            cx.series.rows.push_back({double(i), double(ladder[i].outer), double(ladder[i].inner),
                                      r.max_deviation_per_level[i]});
        return;
    }
    if (task == "identities") {
        const auto spec = build_nilsequence(c["nilsequence"], "nilsequence");
        const std::int64_t H = as_positive(c["H"], "H"), N = as_positive(c["N"], "N");
        const auto phi = nilsequence_samples(spec, {0, N + 2 * H + 1});
        const auto dual = dual_sequence_samples(spec, 2, {H, H}, {0, N});
        CompensatedSum s;
        for (std::int64_t n = 0; n < N; ++n) s.add(phi[n] * dual[n]);
        const cplx pairing = s.value() / static_cast<double>(N);
        const double u4 = std::pow(uniformity_seminorm_n(phi, 2, H, N), 4);
        const auto box = as_ints(c["conj_box"], "conj_box");
        if (box.size() != 2) fail("conj_box", "expected [outer, inner]");
        const std::int64_t probes = as_positive(c["probes"], "probes");
        double conj_dev = 0;
        cx.series.columns = {"n", "dual_re", "dual_im", "conj_phi_re", "conj_phi_im"};
        for (std::int64_t n = 0; n < probes; ++n) {
            const cplx d = dual_sequence(spec, 2, {box[0], box[1]}, n).truncated;
            const cplx cp = std::conj(nilsequence_eval(spec, n));
            conj_dev = std::max(conj_dev, std::abs(d - cp));
            cx.series.rows.push_back({double(n), d.real(), d.imag(), cp.real(), cp.imag()});
        }
        const double gap = std::abs(pairing - u4);
        cx.results = {{"pairing", cjson(pairing)},
                      {"seminorm_power", u4},
                      {"pairing_gap", gap},
                      {"conj_max_deviation", conj_dev},
                      {"passed", gap <= as_num(c["pairing_tolerance"], "pairing_tolerance") &&
                                     conj_dev <= as_num(c["conj_tolerance"], "conj_tolerance")}};
        return;
    }
    const auto sys = build_system(c["system"], "system");
    const int k = static_cast<int>(as_positive(c["k"], "k"));
    const auto tr = truncation(c);
    const QuadratureGrid grid{as_positive(c["grid"], "grid")};
    const double slack = as_num(c["slack"], "slack");
    std::vector<std::pair<ObservableSpec, ObservableSpec>> pairs;
    if (task == "stability")
        pairs.emplace_back(build_observable(c["F"], "F"), build_observable(c["G"], "G"));
    else
        pairs = stability_family();
    bool all = true;
    double worst_margin = std::numeric_limits<double>::infinity();
    cx.series.columns = {"n", "lhs", "rhs"};
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto r = dual_l1_stability_check(sys, pairs[i].first, pairs[i].second, k, tr, grid, slack);
        all = all && r.holds;
        worst_margin = std::min(worst_margin, r.rhs + slack - r.lhs);
        cx.series.rows.push_back({double(i), r.lhs, r.rhs});
    }
    cx.results = {{"pairs", pairs.size()}, {"worst_margin", worst_margin}, {"passed", all}};
}

void run_primes_gap(Context& cx) {
    const json& c = cx.cfg;
    const auto Ns = as_ints(c["N_values"], "N_values");
    const auto thresholds = as_nums(c["thresholds"], "thresholds");
    if (Ns.empty() || Ns.size() != thresholds.size()) fail("thresholds", "needs one threshold per N");
    for (std::size_t i = 0; i < Ns.size(); ++i)
        if (Ns[i] < 2) fail(index("N_values", i), "must be >= 2");
    const std::int64_t W = as_positive(c["wtrick_W"], "wtrick_W"), b = as_positive(c["wtrick_b"], "wtrick_b");
    const std::int64_t wN = as_positive(c["wtrick_N"], "wtrick_N");
    const std::int64_t maxN = *std::max_element(Ns.begin(), Ns.end());
    const PrimeTable table = sieve(std::max(maxN, W * wN + b));

    bool passed = true;
    json gaps = json::array();
    cx.series.columns = {"n", "gap", "prime_avg_re", "prime_avg_im", "weighted_avg_re", "weighted_avg_im"};
    for (std::size_t i = 0; i < Ns.size(); ++i) {
        const auto seq = build_sequence(c["sequence"], "sequence", {0, Ns[i] + 1}, cx.seed);
        const PrimeGap g = prime_vs_weighted_gap(seq, Ns[i], table);
        passed = passed && g.gap <= thresholds[i];
        gaps.push_back({{"N", Ns[i]}, {"gap", g.gap}, {"threshold", thresholds[i]}});
        cx.series.rows.push_back({double(Ns[i]), g.gap, g.prime_avg.real(), g.prime_avg.imag(),
                                  g.weighted_avg.real(), g.weighted_avg.imag()});
    }
    const auto params = WTrickParams::from_modulus(W, b);
    CompensatedSum s;
    for (std::int64_t n = 1; n <= wN; ++n) s.add(lambda_Wb(n, params, table));
    const double mean = s.real() / static_cast<double>(wN);
    const bool mean_ok = std::abs(mean - 1.0) <= as_num(c["wtrick_tolerance"], "wtrick_tolerance");
    const std::int64_t count = table.count_upto(maxN);
    bool count_ok = true;
    if (!c["expected_prime_count"].is_null())
        count_ok = count == as_int(c["expected_prime_count"], "expected_prime_count");
    cx.results = {{"gaps", gaps},
                  {"wtrick_mean", mean},
                  {"prime_count", count},
                  {"prime_count_limit", maxN},
                  {"passed", passed && mean_ok && count_ok}};
}

FitMode fit_mode(const json& c) {
    return as_choice(c["fit"], "fit", {"least_squares", "convex"}) == "convex" ? FitMode::convex
                                                                              : FitMode::least_squares;
}

void alpha_psi_series(Context& cx, const SampledSequence& alpha, const SampledSequence& psi, std::int64_t N) {
    cx.series.columns = {"n", "alpha_re", "alpha_im", "psi_re", "psi_im", "abs_error"};
    for (std::int64_t n = 1; n <= N; ++n)
        cx.series.rows.push_back({double(n), alpha[n].real(), alpha[n].imag(), psi[n].real(), psi[n].imag(),
                                  std::abs(alpha[n] - psi[n])});
}

void run_decompose(Context& cx, const std::string& kind) {
    const json& c = cx.cfg;
    const std::int64_t N = as_positive(c["N"], "N");
    const double eps = as_num(c["epsilon"], "epsilon");
    const Window dict_window{1, N + 1};

    if (kind == "product") {
        const auto nil = build_correlation(c["nil"], "nil");
        const auto mix = build_correlation(c["mixing"], "mixing");
        const auto dict = standard_dictionary(build_dictionary_options(c["dictionary"], "dictionary", nil.system), dict_window);
        const auto ex = product_system_experiment(nil, mix, dict, eps, N, sieve(N));
        cx.results = report_json(ex.report);
        cx.results["passed"] = ex.report.achieved;
        alpha_psi_series(cx, ex.alpha, ex.psi, N);
        return;
    }

    const auto spec = build_correlation(c["correlation"], "correlation");
    const auto dict = standard_dictionary(build_dictionary_options(c["dictionary"], "dictionary", spec.system), dict_window);
    const FitMode mode = fit_mode(c);
    const PrimeTable table = sieve(N);

    if (kind == "decompose") {
        const auto alpha = multicorrelation_sequence(spec, {0, N + 1});
        const auto fit = fit_nilsequence(alpha, dict, mode);
        auto r = decomposition_report(alpha, fit.psi, N, table, eps);
        r.coefficients = fit.coefficients;
        for (const auto& a : dict.atoms()) r.atoms.push_back(a.description);
        cx.results = report_json(r);
        cx.results["residual"] = fit.residual;
        cx.results["dictionary_size"] = dict.size();
        cx.results["passed"] = r.achieved;
        alpha_psi_series(cx, alpha, fit.psi, N);
        return;
    }

    const auto Ws = as_ints(c["W_values"], "W_values");
    if (Ws.empty()) fail("W_values", "needs at least one modulus");
    for (std::size_t i = 0; i < Ws.size(); ++i)
        if (Ws[i] < 1) fail(index("W_values", i), "must be positive");
    const ResidueFill fill =
        as_choice(c["fill"], "fill", {"zero", "fit"}) == "fit" ? ResidueFill::fit : ResidueFill::zero;
    const std::int64_t maxW = *std::max_element(Ws.begin(), Ws.end());
    const auto alpha = multicorrelation_sequence(spec, {0, N + maxW + 1});
    const auto builder = composed_builder(dict);

    json per_w = json::array();
    bool passed = true;
    cx.series.columns = {"n", "alpha_re", "alpha_im"};
    std::vector<SampledSequence> psis;
    for (std::int64_t W : Ws) {
        SampledSequence psi = SampledSequence::constant(0, 1, 0.0);
        const auto r = wtrick_decompose(alpha, W, table, builder, eps, N, mode, fill, &psi);
        json entry = report_json(r);
        // Primes <= N dividing W, recomputed independently of the report.
        std::vector<std::int64_t> expect;
        for (std::int64_t p = 2; p <= std::min(W, N); ++p)
            if (W % p == 0 && table.is_prime(p)) expect.push_back(p);
        entry["excluded_primes_exact"] = r.excluded_primes == expect;
        bool ok = r.prime_l1 <= eps && r.excluded_primes == expect;
        if (W == 1) {
            const auto fit = fit_nilsequence(alpha, dict, mode);
            const auto plain = decomposition_report(alpha, fit.psi, N, table, eps);
            bool same = plain.cesaro_l1 == r.cesaro_l1 && plain.prime_l1 == r.prime_l1 &&
                        fit.coefficients == r.coefficients;
            for (std::int64_t n = 1; same && n <= N; ++n) same = psi[n] == fit.psi[n];
            entry["bit_identical_to_plain"] = same;
            ok = ok && same;
        }
        entry["passed"] = ok;
        passed = passed && ok;
        per_w.push_back(entry);
        cx.series.columns.push_back("psi_W" + std::to_string(W) + "_re");
        cx.series.columns.push_back("psi_W" + std::to_string(W) + "_im");
        psis.push_back(std::move(psi));
    }
    for (std::int64_t n = 1; n <= N; ++n) {
        std::vector<double> row{double(n), alpha[n].real(), alpha[n].imag()};
        for (const auto& psi : psis) {
            row.push_back(psi[n].real());
            row.push_back(psi[n].imag());
        }
        cx.series.rows.push_back(std::move(row));
    }
    cx.results = {{"per_W", per_w}, {"passed", passed}};
}

// ----------------------------------------------------------------- catalog

json character(std::vector<long> freq) {
    return json::array({{{"freq", freq}, {"coeff", 1.0}, {"phase", 0.0}}});
}

json exponent(std::int64_t a) { return {{"transformation", 0}, {"monomial", {0, a}}}; }

json rotation_instance() {
    return {{"system", {{"type", "rotation"}, {"angles", {kGolden}}}},
            {"f0", character({-1})},
            {"slots", {{{"observable", character({1})}, {"exponents", {exponent(1)}}}}}};
}

json base(const std::string& kind, std::uint64_t seed = 0) {
    return {{"schema_version", kSchemaVersion}, {"kind", kind}, {"seed", seed}};
}

json with(json j, const json& extra) {
    j.update(extra);
    return j;
}

std::map<std::string, CatalogEntry> build_catalog() {
    std::map<std::string, CatalogEntry> c;
    c["gowers-fft-oracle"] = {1, "exact U^2 vs Fourier fourth-moment path on 1000 random inputs",
                              with(base("gowers-norm", 1), {{"task", "fft-oracle"}, {"trials", 1000},
                                                            {"moduli", {8, 16, 32, 64}}, {"tolerance", 1e-9}})};
    c["csg-random-sweep"] = {2, "Cauchy-Schwarz-Gowers on 10^4 random families, k in {2,3}",
                             with(base("csg", 2), {{"trials", 10000}, {"k_values", {2, 3}},
                                                   {"moduli", {8, 16}}, {"slack", 1e-9}})};
    c["gowers-monotonicity"] = {3, "U^2 <= U^3 on 1000 random inputs, N <= 32",
                                with(base("gowers-norm", 3), {{"task", "monotonicity"}, {"trials", 1000},
                                                              {"moduli", {8, 16, 32}}, {"tolerance", 1e-9}})};
    c["dual-identities"] = {4, "pairing of a rotation character with its dual vs U^2 seminorm; D_2 phi = conj phi",
                            with(base("dual"), {{"task", "identities"},
                                                {"nilsequence", golden_character_nilsequence()}})};
    c["lemma-dual-l1-stability"] = {5, "L^1 stability of truncated duals on the 20 shipped character pairs",
                                    with(base("dual"), {{"task", "stability-family"},
                                                        {"system", {{"type", "rotation"}, {"angles", {kGolden}}}}})};
    c["lemma-von-mangoldt-gap"] = {6, "prime vs weighted averages of 1, W-trick mean, sieve count",
                                   with(base("primes-gap"), {{"expected_prime_count", 78498}})};
    c["thmA-rotation-primes"] = {7, "alpha(n) = e(n theta) fitted by a linear-phase dictionary, N = 10^5",
                                 with(base("decompose"), {{"correlation", rotation_instance()},
                                                          {"dictionary", {{"step", 1}}}})};
    c["thmA-skew-primes"] = {
        7, "alpha(n) = e(2 n^2 theta) on the skew product fitted by a quadratic-phase dictionary, N = 10^5",
        with(base("decompose"),
             {{"correlation",
               {{"system", {{"type", "skew"}, {"theta", 0.2360679774997898}}},
                {"f0", character({0, 1})},
                {"slots", {{{"observable", character({0, -2})}, {"exponents", {exponent(1)}}},
                           {{"observable", character({0, 1})}, {"exponents", {exponent(2)}}}}}}},
              {"dictionary", {{"step", 2}}}})};
    c["wtrick-rotation"] = {8, "W-trick residue fits of the rotation instance for W in {1, 6, 30}",
                            with(base("wtrick"), {{"correlation", rotation_instance()},
                                                  {"dictionary", {{"step", 1}}},
                                                  {"W_values", {1, 6, 30}},
                                                  {"fill", "fit"}})};
    json mix_f = json::array({{{"freq", {1}}, {"coeff", 0.5}, {"phase", 0.0}},
                              {{"freq", {-1}}, {"coeff", 0.5}, {"phase", 0.0}}});
    c["product-doubling"] = {
        9, "rotation factor times a doubling-map factor, errors <= 2/N at N = 10^5",
        with(base("product"),
             {{"nil", rotation_instance()},
              {"mixing", {{"system", {{"type", "doubling"}}},
                          {"f0", mix_f},
                          {"slots", {{{"observable", mix_f}, {"exponents", {exponent(1)}}}}}}},
              {"dictionary", {{"step", 1}}},
              {"epsilon", 2e-5}})};
    json seq = golden_character_nilsequence();
    seq["type"] = "nilsequence";
    c["seminorm-bridge"] = {10, "Host-Kra seminorm vs uniformity seminorm of a rotation character, k = 2",
                            with(base("seminorm"), {{"sequence", seq}, {"compare_hk", true}})};
    return c;
}

}  // namespace

json normalize(const json& config) {
    if (!config.is_object()) throw ConfigError("config: expected a JSON object");
    if (!config.contains("kind")) throw ConfigError("missing field 'kind'");
    const std::string kind = as_choice(config["kind"], "kind",
                                       {"gowers-norm", "csg", "seminorm", "correlation", "dual", "primes-gap",
                                        "decompose", "wtrick", "product"});
    if (!config.contains("schema_version")) throw ConfigError("missing field 'schema_version'");
    if (as_int(config["schema_version"], "schema_version") != kSchemaVersion)
        fail("schema_version", "unsupported version, expected " + std::to_string(kSchemaVersion));

    std::string task = default_task(kind);
    if (config.contains("task") && !config["task"].is_null()) {
        if (task.empty()) fail("task", "kind '" + kind + "' has no tasks");
        task = as_choice(config["task"], "task", tasks_of(kind));
    }
    Schema schema = common_schema();
    for (auto& f : kind_schema(kind, task)) schema.push_back(std::move(f));
    json out = apply_schema(config, schema, "");
    out["task"] = task.empty() ? json(nullptr) : json(task);

    as_int(out["seed"], "seed");
    if (as_int(out["threads"], "threads") < 0) fail("threads", "must be >= 0");
    if (as_num(out["budget"], "budget") <= 0) fail("budget", "must be positive");
    as_string(out["label"], "label");
    for (const char* k : {"out_dir", "report", "series"})
        if (as_string(out[k], k).empty()) fail(k, "must be nonempty");

    if (out.contains("mode")) as_choice(out["mode"], "mode", {"exact", "sampled", "fft"});
    if (out.contains("fit")) as_choice(out["fit"], "fit", {"least_squares", "convex"});
    if (out.contains("fill")) as_choice(out["fill"], "fill", {"zero", "fit"});

    if (out.contains("function")) out["function"] = norm_function(out["function"], "function");
    if (out.contains("sequence")) out["sequence"] = norm_sequence(out["sequence"], "sequence");
    if (out.contains("nilsequence")) out["nilsequence"] = norm_nilsequence(out["nilsequence"], "nilsequence");
    if (out.contains("system")) out["system"] = norm_system(out["system"], "system");
    for (const char* k : {"F", "G"})
        if (out.contains(k)) out[k] = norm_observable(out[k], k);
    for (const char* k : {"correlation", "nil", "mixing"})
        if (out.contains(k)) out[k] = norm_correlation(out[k], k);
    if (out.contains("dictionary")) out["dictionary"] = norm_dictionary(out["dictionary"], "dictionary");

    // Build the structured parts once so that semantic errors surface here.
    if (out.contains("sequence") && out["sequence"]["type"] == "nilsequence")
        build_nilsequence(out["sequence"], "sequence");
    if (out.contains("nilsequence")) build_nilsequence(out["nilsequence"], "nilsequence");
    if (out.contains("system")) build_system(out["system"], "system");
    for (const char* k : {"F", "G"})
        if (out.contains(k)) build_observable(out[k], k);
    for (const char* k : {"correlation", "nil", "mixing"})
        if (out.contains(k)) {
            const auto spec = build_correlation(out[k], k);
            if (out.contains("dictionary") && k != std::string("mixing"))
                build_dictionary_options(out["dictionary"], "dictionary", spec.system);
        }
    return out;
}

Artifacts run_experiment(const json& config) {
    const json cfg = normalize(config);
    if (const auto threads = as_int(cfg["threads"], "threads"); threads > 0)
        set_thread_count(static_cast<unsigned>(threads));
    Context cx{cfg, cfg["seed"].get<std::uint64_t>(), cfg["budget"].get<double>()};
    const std::string kind = cfg["kind"];
    const std::string task = cfg["task"].is_null() ? "" : cfg["task"].get<std::string>();
    if (kind == "gowers-norm") run_gowers(cx, task);
    else if (kind == "csg") run_csg(cx);
    else if (kind == "seminorm") run_seminorm(cx);
    else if (kind == "correlation") run_correlation(cx);
    else if (kind == "dual") run_dual(cx, task);
    else if (kind == "primes-gap") run_primes_gap(cx);
    else run_decompose(cx, kind);

    Artifacts a;
    a.report = {{"schema_version", kSchemaVersion},
                {"kind", kind},
                {"config", cfg},
                {"results", std::move(cx.results)},
                {"timestamp", timestamp_now()}};
    a.series = std::move(cx.series);
    return a;
}

void write_artifacts(const Artifacts& artifacts, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const json& cfg = artifacts.report["config"];
    {
        std::ofstream out(dir / cfg["report"].get<std::string>(), std::ios::binary);
        if (!out) throw ConfigError("cannot write report into " + dir.string());
        out << artifacts.report.dump(2) << '\n';
    }
    std::ofstream out(dir / cfg["series"].get<std::string>(), std::ios::binary);
    if (!out) throw ConfigError("cannot write series into " + dir.string());
    const auto& cols = artifacts.series.columns;
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
    out << '\n';
    char buf[40];
    for (const auto& row : artifacts.series.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i == 0 && std::trunc(row[i]) == row[i])
                std::snprintf(buf, sizeof buf, "%.0f", row[i]);
            else
                std::snprintf(buf, sizeof buf, "%.17g", row[i]);
            out << (i ? "," : "") << buf;
        }
        out << '\n';
    }
}

const std::map<std::string, CatalogEntry>& catalog() {
    static const auto c = build_catalog();
    return c;
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ResourceError*>(&e)) return 3;
    if (dynamic_cast<const ValidationError*>(&e) || dynamic_cast<const ConfigError*>(&e) ||
        dynamic_cast<const RangeError*>(&e) || dynamic_cast<const ShapeError*>(&e) ||
        dynamic_cast<const DomainError*>(&e) || dynamic_cast<const json::exception*>(&e))
        return 2;
    return 1;
}

std::vector<std::pair<ObservableSpec, ObservableSpec>> stability_family() {
    std::vector<std::pair<ObservableSpec, ObservableSpec>> out;
    for (long i = 0; i < 20; ++i) {
        const long a = 1 + i % 4;
        const double r = 1.0 - 0.02 * static_cast<double>(i);
        ObservableSpec F = ObservableSpec::character({a}, r);
        if (i >= 10) {
            F = ObservableSpec::character({a}, 0.6);
            F.add_term({{Freq(2 * a)}, 0.4, Phase::from_rational(1, 4)});
        }
        ObservableSpec G(1);
        switch (i % 5) {
            case 0: G = F; break;
            case 1: G = F.scaled(0.9); break;
            case 2: G = ObservableSpec::character({a + 1}, r); break;
            case 3:
                G = ObservableSpec::character({a}, 0.5);
                G.add_term({{Freq(-a)}, 0.5, Phase{}});
                break;
            default: G = ObservableSpec::constant(1, {0.3, 0.4});
        }
        out.emplace_back(std::move(F), std::move(G));
    }
    return out;
}

}  // namespace nilcorr::cli
