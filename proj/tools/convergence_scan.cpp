// Measures the truncation error of every truncated limit whose test slack is
// fixed in advance (0.05 and 0.1), over a range of truncations. Writes
// convergence_scan.csv and convergence_scan.md into the given directory.
//
//   convergence_scan [OUT_DIR]   (default: docs)

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "nilcorr/correlation.hpp"
#include "nilcorr/gowers.hpp"
#include "nilcorr/nilseq.hpp"
#include "nilcorr/parallel.hpp"
#include "nilcorr/systems.hpp"

using namespace nilcorr;

namespace {

const Phase kTheta = Phase::from_double(0.6180339887498949);

struct Row {
    std::string quantity;
    std::string parameter;
    double value;
    double error;
    double slack;
};

std::vector<Row> rows;

void add(const std::string& q, const std::string& p, double value, double error, double slack) {
    rows.push_back({q, p, value, error, slack});
    std::printf("%-28s %-22s value %-12.6g error %-12.6g slack %g\n", q.c_str(), p.c_str(), value, error, slack);
    std::fflush(stdout);
}

std::string hn(std::int64_t H, std::int64_t N) { return "H=" + std::to_string(H) + " N=" + std::to_string(N); }

NilsequenceSpec rotation_char() {
    return {MpSystemSpec::rotation({kTheta}), ObservableSpec::character({1}), {Phase{}}};
}

NilsequenceSpec skew_char() {
    return {MpSystemSpec::skew(kTheta), ObservableSpec::character({0, 1}), {Phase{}, Phase{}}};
}

void cesaro_quadratic() {
    // e(n^2 theta): every window average tends to 0.
    const std::int64_t total = 1 << 17, L = 10000;
    const auto seq = SampledSequence::generate(0, total, [](std::int64_t n) {
        return e(kTheta.times(static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(n)));
    });
    const auto est = uniform_cesaro_estimate(seq, L, 8);
    double worst = 0;
    for (std::int64_t m = 0; m + L <= total; m += 97) worst = std::max(worst, std::abs(cesaro_average(seq, {m, m + L})));
    add("cesaro_quadratic_value", "min_len=1e4 windows=8", std::abs(est.value), std::abs(est.value), 0.05);
    add("cesaro_quadratic_fluct", "min_len=1e4 windows=8", est.fluctuation, est.fluctuation, 0.1);
    add("cesaro_quadratic_bruteforce", "all windows L=1e4", worst, worst, 0.05);
}

void seminorms() {
    const std::int64_t N = 1 << 14;
    const auto rot = nilsequence_samples(rotation_char(), {0, N + 2 * 256 + 1});
    const auto skew = nilsequence_samples(skew_char(), {0, N + 3 * 256 + 1});
    for (std::int64_t H : {8, 16, 32, 64, 128, 256}) {
        const double u = uniformity_seminorm_n(rot, 2, H, N);
        add("U2_rotation_char", hn(H, N), u, std::abs(u - 1), 0.05);
    }
    for (std::int64_t H : {8, 16, 32, 64}) {
        const double u = uniformity_seminorm_n(skew, 2, H, N);
        add("U2_skew_char", hn(H, N), u, u, 0.1);
    }
    double worst = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        std::mt19937_64 rng(seed);
        std::vector<cplx> v(static_cast<std::size_t>(N + 2 * 64 + 1));
        for (auto& z : v) z = (rng() >> 63) ? 1.0 : -1.0;
        worst = std::max(worst, uniformity_seminorm_n(SampledSequence(0, v), 2, 64, N));
    }
    add("U2_random_signs_max10", hn(64, N), worst, worst, 0.15);
}

void pairing() {
    // alpha(n) = int e(-x) e(x + n theta) = e(n theta), b = conj alpha.
    const auto spec = CorrelationSpec::iterates(MpSystemSpec::rotation({kTheta}), ObservableSpec::character({-1}),
                                                {ObservableSpec::character({1})});
    const std::int64_t N = 1 << 14;
    const auto alpha = multicorrelation_sequence(spec, {0, N + 2 * 256 + 1});
    std::vector<cplx> bv(alpha.values().begin(), alpha.values().end());
    for (auto& z : bv) z = std::conj(z);
    const SampledSequence b(0, bv);
    for (std::int64_t H : {16, 64, 256}) {
        const auto r = anti_uniformity_pairing(alpha, b, 2, {0, N}, H);
        add("pairing_ratio_rotation", hn(H, N), r.ratio, std::max(0.0, r.ratio - 1), 0.1);
    }
}

void host_kra() {
    const QuadratureGrid g{8};
    const auto rot = MpSystemSpec::rotation({kTheta});
    const auto dbl = MpSystemSpec::doubling();
    const auto F = ObservableSpec::character({1});
    for (std::int64_t H : {8, 16, 32, 64, 128}) {
        const double hk = hk_seminorm_estimate(rot, F, 2, {H, H}, g);
        add("hk_rotation_char", "caps=" + std::to_string(H), hk, std::abs(hk - 1), 0.05);
    }
    for (std::int64_t H : {8, 16, 32, 64}) {
        const double hk = hk_seminorm_estimate(dbl, F, 2, {H, H}, g);
        add("hk_doubling_char", "caps=" + std::to_string(H), hk, hk, 0.1);
    }
    // Bridge: Host-Kra vs sequence seminorm along the orbit of 0.
    const std::int64_t N = 1 << 14;
    for (const auto& [name, spec] : {std::pair{"bridge_rotation_char", rotation_char()},
                                     std::pair{"bridge_skew_char", skew_char()}}) {
        for (std::int64_t H : {16, 64}) {
            const auto seq = nilsequence_samples(spec, {0, N + 2 * H + 1});
            const double u = uniformity_seminorm_n(seq, 2, H, N);
            const double hk = hk_seminorm_estimate(spec.system, spec.F, 2, {H, H}, {64});
            add(name, hn(H, N), hk - u, std::abs(hk - u), 0.1);
        }
    }
}

void duals() {
    const std::vector<DualTruncation> ladder{{16, 256}, {64, 1024}, {256, 4096}};
    std::vector<std::int64_t> probes(16);
    for (std::size_t i = 0; i < probes.size(); ++i) probes[i] = static_cast<std::int64_t>(i);
    for (const auto& [name, spec] : {std::pair{"dual_ladder_rotation", rotation_char()},
                                     std::pair{"dual_ladder_skew", skew_char()}}) {
        const auto r = dual_uniform_convergence_check(spec, 2, ladder, probes);
        for (std::size_t i = 0; i < ladder.size(); ++i) {
            const double d = r.max_deviation_per_level[i];
            add(name, "box=" + std::to_string(ladder[i].outer) + "x" + std::to_string(ladder[i].inner), d, d, 0.1);
        }
    }
    const auto spec = rotation_char();
    const std::int64_t N = 1 << 14;
    for (std::int64_t H : {16, 64}) {
        const auto phi = nilsequence_samples(spec, {0, N + 2 * H + 1});
        const auto dual = dual_sequence_samples(spec, 2, {H, H}, {0, N});
        CompensatedSum s;
        for (std::int64_t n = 0; n < N; ++n) s.add(phi[n] * dual[n]);
        const double gap = std::abs(s.value() / double(N) - std::pow(uniformity_seminorm_n(phi, 2, H, N), 4));
        add("dual_pairing_gap_rotation", hn(H, N), gap, gap, 0.05);
    }
    // Skew character at k = 3, where the dual is its conjugate in the limit.
    const auto sk = skew_char();
    for (const DualTruncation t : {DualTruncation{8, 64}, DualTruncation{16, 256}, DualTruncation{32, 1024}}) {
        double worst = 0;
        for (std::int64_t n = 0; n < 8; ++n)
            worst = std::max(worst, std::abs(dual_sequence(sk, 3, t, n).truncated - std::conj(nilsequence_eval(sk, n))));
        add("dual_k3_skew_vs_conj", "box=" + std::to_string(t.outer) + "x" + std::to_string(t.inner), worst, worst, 0.1);
    }
}

}  // namespace

int main(int argc, char** argv) {
    const std::filesystem::path out = argc > 1 ? argv[1] : "docs";
    std::filesystem::create_directories(out);
    cesaro_quadratic();
    seminorms();
    pairing();
    host_kra();
    duals();

    std::ofstream csv(out / "convergence_scan.csv", std::ios::binary);
    csv << "n,quantity,parameter,value,error,slack\n";
    char buf[256];
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const Row& r = rows[i];
        std::snprintf(buf, sizeof buf, "%zu,%s,%s,%.10g,%.10g,%g\n", i, r.quantity.c_str(), r.parameter.c_str(),
                      r.value, r.error, r.slack);
        csv << buf;
    }

    std::ofstream md(out / "convergence_scan.md", std::ios::binary);
    md << "# Convergence scan\n\n"
          "Generated by `build/tools/convergence_scan docs`. `error` is the distance to the known limit\n"
          "(or the value itself when the limit is 0); `slack` is the tolerance the tests use.\n\n"
          "| quantity | truncation | value | error | slack |\n|---|---|---|---|---|\n";
    for (const Row& r : rows) {
        std::snprintf(buf, sizeof buf, "| %s | %s | %.4g | %.3g | %g |\n", r.quantity.c_str(), r.parameter.c_str(),
                      r.value, r.error, r.slack);
        md << buf;
    }
    return 0;
}
