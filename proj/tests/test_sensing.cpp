#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "aerocell/sensing.hpp"

using namespace aerocell::sensing;

namespace {

// Independent oracle: exact fused (miss, false alarm) by enumerating all 2^K
// local-decision vectors and weighting by their Bernoulli probabilities. The
// fused decision is recomputed here from the rule semantics directly.
std::pair<double, double> enumerate_fusion(int k, double pd, double pfa, FusionRule rule) {
    double miss = 0.0, false_alarm = 0.0;
    for (unsigned mask = 0; mask < (1u << k); ++mask) {
        double prob_h1 = 1.0, prob_h0 = 1.0;
        for (int i = 0; i < k; ++i) {
            const bool vote = (mask >> i) & 1u;
            prob_h1 *= vote ? pd : 1.0 - pd;
            prob_h0 *= vote ? pfa : 1.0 - pfa;
        }
        const bool any = mask != 0;
        const bool all = mask == (1u << k) - 1u;
        const bool fused = (rule == FusionRule::OR) ? any : all;
        if (!fused) miss += prob_h1;
        if (fused) false_alarm += prob_h0;
    }
    return {miss, false_alarm};
}

// Analytic detection probability frozen from an independent evaluation of
// the noncentral chi-square tail (scipy) for N=10, per-node pfa target 0.1,
// unit per-sample SNR.
constexpr double kMuN10Pfa01 = 14.205990292152817;
constexpr double kPdN10Snr1 = 0.8599559899800165;

}  // namespace

TEST_CASE("local decision threshold is boundary inclusive") {
    CHECK(local_decision(2.0, 2.0) == 1);
    CHECK(local_decision(1.99, 2.0) == 0);
    CHECK(local_decision(5.0, 2.0) == 1);
    CHECK_THROWS_AS(local_decision(std::nan(""), 2.0), std::domain_error);
    CHECK_THROWS_AS(local_decision(1.0, std::numeric_limits<double>::infinity()),
                    std::domain_error);
}

TEST_CASE("energy statistic sums |y|^2") {
    std::vector<std::complex<double>> zeros(16, {0.0, 0.0});
    CHECK(energy_statistic(zeros) == 0.0);
    std::vector<std::complex<double>> one{{1.0, 0.0}};
    CHECK(energy_statistic(one) == 1.0);
    std::vector<std::complex<double>> mixed{{3.0, 4.0}, {0.0, 2.0}};
    CHECK(energy_statistic(mixed) == doctest::Approx(29.0).epsilon(1e-15));
    CHECK_THROWS_AS(energy_statistic({}), std::domain_error);
}

TEST_CASE("energy statistic of unit-variance noise averages to one") {
    std::mt19937_64 rng(202406);
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
    const int n = 1000;
    std::vector<std::complex<double>> samples;
    samples.reserve(n);
    for (int i = 0; i < n; ++i) samples.emplace_back(normal(rng), normal(rng));
    const double xi = energy_statistic(samples);
    CHECK(xi / n == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("threshold calibration matches the N=1 closed form") {
    const EnergyDetector det{1, 1.0};
    CHECK(threshold_for_pfa(det, 0.1) == doctest::Approx(-std::log(0.1)).epsilon(1e-9));
    CHECK(threshold_for_pfa(det, 0.5) == doctest::Approx(std::log(2.0)).epsilon(1e-9));
    CHECK(std::abs(threshold_for_pfa(det, 0.1) - 2.302585092994046) <= 1e-9);
}

TEST_CASE("threshold calibration round-trips and is monotone") {
    for (int n : {1, 10, 100}) {
        const EnergyDetector det{n, 1.0};
        double prev_mu = std::numeric_limits<double>::infinity();
        for (double pfa : {0.01, 0.05, 0.1, 0.3, 0.7}) {
            const double mu = threshold_for_pfa(det, pfa);
            CHECK(noise_tail_prob(n, mu) == doctest::Approx(pfa).epsilon(1e-8));
            CHECK(mu < prev_mu);  // larger pfa, smaller threshold
            prev_mu = mu;
        }
    }
    CHECK_THROWS_AS(threshold_for_pfa({1, 1.0}, 0.0), std::domain_error);
    CHECK_THROWS_AS(threshold_for_pfa({1, 1.0}, 1.0), std::domain_error);
    CHECK_THROWS_AS(threshold_for_pfa({0, 1.0}, 0.5), std::domain_error);
}

TEST_CASE("local pd degenerates to pfa at zero snr and to one at zero threshold") {
    for (int n : {1, 4, 25}) {
        const EnergyDetector det{n, 1.0};
        for (double pfa : {0.02, 0.1, 0.4}) {
            const double mu = threshold_for_pfa(det, pfa);
            CHECK(local_pd(det, mu, 0.0) == doctest::Approx(pfa).epsilon(1e-8));
        }
        CHECK(local_pd(det, 0.0, 1.5) == 1.0);
    }
    CHECK_THROWS_AS(local_pd({1, 1.0}, -0.5, 1.0), std::domain_error);
    CHECK_THROWS_AS(local_pd({1, 1.0}, 1.0, -1.0), std::domain_error);
}

TEST_CASE("local pd matches the frozen noncentral tail value") {
    const EnergyDetector det{10, 1.0};
    const double mu = threshold_for_pfa(det, 0.1);
    CHECK(mu == doctest::Approx(kMuN10Pfa01).epsilon(1e-9));
    CHECK(local_pd(det, mu, 1.0) == doctest::Approx(kPdN10Snr1).epsilon(1e-8));
}

TEST_CASE("local pd agrees with the Monte Carlo energy chain") {
    const EnergyDetector det{10, 1.0};
    const double mu = threshold_for_pfa(det, 0.1);
    const double analytic = local_pd(det, mu, 1.0);
    const double empirical = simulate_detection(det, mu, 1.0, 200'000, 77);
    CHECK(std::abs(analytic - empirical) < 0.01);
}

TEST_CASE("N=1 exponential tail sanity for local pd") {
    // For N=1 and snr=0 the statistic is unit-mean exponential.
    const EnergyDetector det{1, 1.0};
    for (double mu : {0.5, 1.0, 2.0})
        CHECK(local_pd(det, mu, 0.0) == doctest::Approx(std::exp(-mu)).epsilon(1e-10));
}

TEST_CASE("fusion of hard decisions") {
    CHECK(fuse({0, 0, 1}, FusionRule::OR) == 1);
    CHECK(fuse({1, 1, 0}, FusionRule::AND) == 0);
    CHECK(fuse({0, 0, 0}, FusionRule::OR) == 0);
    CHECK(fuse({1, 1, 1}, FusionRule::AND) == 1);
    for (int d : {0, 1}) {
        CHECK(fuse({d}, FusionRule::OR) == d);
        CHECK(fuse({d}, FusionRule::AND) == d);
        CHECK(fuse({d}, FusionRule::BINOMIAL_SUM) == d);
    }
    // The binomial-sum rule behaves like AND on decisions.
    CHECK(fuse({1, 0}, FusionRule::BINOMIAL_SUM) == 0);
    CHECK(fuse({1, 1}, FusionRule::BINOMIAL_SUM) == 1);
    CHECK_THROWS_AS(fuse({}, FusionRule::OR), std::domain_error);
    CHECK_THROWS_AS(fuse({2}, FusionRule::OR), std::domain_error);
}

TEST_CASE("binomial-sum miss probability examples") {
    CHECK(miss_prob_binomial_sum(1, 0.9) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(miss_prob_binomial_sum(2, 0.9) == doctest::Approx(0.19).epsilon(1e-12));
    CHECK(miss_prob_binomial_sum(3, 0.5) == doctest::Approx(0.875).epsilon(1e-12));
}

TEST_CASE("binomial-sum false alarm examples") {
    CHECK(false_alarm_prob_binomial_sum(1, 0.1) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(false_alarm_prob_binomial_sum(2, 0.1) == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(false_alarm_prob_binomial_sum(4, 0.5) == doctest::Approx(0.0625).epsilon(1e-12));
}

TEST_CASE("binomial-sum forms equal the power closed forms") {
    for (int k = 1; k <= 10; ++k) {
        for (int i = 0; i <= 10; ++i) {
            const double p = i / 10.0;
            CHECK(std::abs(miss_prob_binomial_sum(k, p) - (1.0 - std::pow(p, k))) <= 1e-12);
            CHECK(std::abs(false_alarm_prob_binomial_sum(k, p) - std::pow(p, k)) <= 1e-12);
            // Algebraic identity of the summation form.
            CHECK(std::abs(miss_prob_binomial_sum(k, p) + std::pow(p, k) - 1.0) <= 1e-12);
        }
    }
}

TEST_CASE("closed forms match exhaustive enumeration for all rules") {
    for (int k : {1, 2, 3, 5, 8, 12}) {
        for (double pd : {0.0, 0.3, 0.9, 1.0}) {
            for (double pfa : {0.0, 0.05, 0.5, 1.0}) {
                for (auto rule : {FusionRule::OR, FusionRule::AND, FusionRule::BINOMIAL_SUM}) {
                    const auto [miss, fa] = enumerate_fusion(k, pd, pfa, rule);
                    const auto probs = fusion_probs_closed_form({k, pd, pfa, rule});
                    CHECK(std::abs(probs.miss - miss) <= 1e-12);
                    CHECK(std::abs(probs.false_alarm - fa) <= 1e-12);
                }
            }
        }
    }
}

TEST_CASE("closed-form fusion examples") {
    const auto or2 = fusion_probs_closed_form({2, 0.9, 0.1, FusionRule::OR});
    CHECK(or2.miss == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(or2.false_alarm == doctest::Approx(0.19).epsilon(1e-12));
    for (auto rule : {FusionRule::OR, FusionRule::AND, FusionRule::BINOMIAL_SUM}) {
        const auto p1 = fusion_probs_closed_form({1, 0.8, 0.2, rule});
        CHECK(p1.miss == doctest::Approx(0.2).epsilon(1e-12));
        CHECK(p1.false_alarm == doctest::Approx(0.2).epsilon(1e-12));
    }
    CHECK_THROWS_AS(fusion_probs_closed_form({2, 1.5, 0.1, FusionRule::OR}), std::domain_error);
}

TEST_CASE("fusion Monte Carlo converges to the closed forms") {
    const FusionModel model{2, 0.9, 0.1, FusionRule::OR};
    const auto exact = fusion_probs_closed_form(model);
    const auto emp = simulate_fusion(model, 200'000, 42);
    const double tol_miss = 4.0 * std::sqrt(exact.miss * (1 - exact.miss) / 200'000.0);
    const double tol_fa = 4.0 * std::sqrt(exact.false_alarm * (1 - exact.false_alarm) / 200'000.0);
    CHECK(std::abs(emp.miss - exact.miss) <= tol_miss);
    CHECK(std::abs(emp.false_alarm - exact.false_alarm) <= tol_fa);
}

TEST_CASE("fusion Monte Carlo degenerate cases and determinism") {
    for (auto rule : {FusionRule::OR, FusionRule::AND}) {
        const auto sure = simulate_fusion({3, 1.0, 0.3, rule}, 20'000, 5);
        CHECK(sure.miss == 0.0);
        const auto silent = simulate_fusion({3, 0.7, 0.0, rule}, 20'000, 5);
        CHECK(silent.false_alarm == 0.0);
    }
    const FusionModel model{4, 0.6, 0.2, FusionRule::OR};
    const auto a = simulate_fusion(model, 50'000, 99);
    const auto b = simulate_fusion(model, 50'000, 99);
    CHECK(a.miss == b.miss);
    CHECK(a.false_alarm == b.false_alarm);
}

TEST_CASE("fusion Monte Carlo stays within 4 binomial stderr across seeds") {
    const FusionModel model{3, 0.7, 0.15, FusionRule::OR};
    const auto exact = fusion_probs_closed_form(model);
    const std::uint64_t trials = 20'000;
    const double tol_miss = 4.0 * std::sqrt(exact.miss * (1 - exact.miss) / trials);
    const double tol_fa =
        4.0 * std::sqrt(exact.false_alarm * (1 - exact.false_alarm) / trials);
    int within = 0;
    const int seeds = 100;
    for (int seed = 0; seed < seeds; ++seed) {
        const auto emp = simulate_fusion(model, trials, seed);
        if (std::abs(emp.miss - exact.miss) <= tol_miss &&
            std::abs(emp.false_alarm - exact.false_alarm) <= tol_fa)
            ++within;
    }
    CHECK(within >= 99);
}

TEST_CASE("roc curve sits on the diagonal for a blind detector") {
    const EnergyDetector det{10, 1.0};
    const auto points = roc_curve(det, 3, 0.0, FusionRule::OR, {0.05, 0.1, 0.3});
    for (const auto& pt : points) {
        CHECK(pt.reachable);
        CHECK(pt.global_pd == doctest::Approx(pt.global_pfa).epsilon(1e-6));
    }
}

TEST_CASE("roc curve for one node equals the local detector") {
    const EnergyDetector det{10, 1.0};
    const std::vector<double> pfa{0.02, 0.1, 0.25};
    const auto points = roc_curve(det, 1, 1.0, FusionRule::OR, pfa);
    for (std::size_t i = 0; i < pfa.size(); ++i) {
        const double mu = threshold_for_pfa(det, pfa[i]);
        CHECK(points[i].global_pd == doctest::Approx(local_pd(det, mu, 1.0)).epsilon(1e-10));
        CHECK(points[i].global_pfa == doctest::Approx(pfa[i]).epsilon(1e-10));
    }
}

TEST_CASE("roc detection gain is nondecreasing in the node count") {
    const EnergyDetector det{10, 1.0};
    const std::vector<double> pfa{0.01, 0.05, 0.1, 0.2, 0.3, 0.5};
    std::vector<std::vector<RocPoint>> curves;
    for (int k : {1, 2, 4, 8})
        curves.push_back(roc_curve(det, k, 1.0, FusionRule::OR, pfa));
    for (std::size_t i = 0; i < pfa.size(); ++i) {
        for (std::size_t c = 1; c < curves.size(); ++c) {
            CHECK(curves[c][i].reachable);
            CHECK(curves[c][i].global_pd >= curves[c - 1][i].global_pd - 1e-9);
        }
    }
    // Monotone nondecreasing along each curve.
    for (const auto& curve : curves)
        for (std::size_t i = 1; i < curve.size(); ++i) {
            CHECK(curve[i].global_pd >= curve[i - 1].global_pd - 1e-12);
            CHECK(curve[i].global_pfa > curve[i - 1].global_pfa);
        }
}

TEST_CASE("roc curve cross-checked against the fused Monte Carlo chain") {
    const EnergyDetector det{10, 1.0};
    const double pfa = 0.1;
    for (int k : {1, 2, 4}) {
        const auto pt = roc_curve(det, k, 1.0, FusionRule::OR, {pfa}).front();
        const double node_pfa = 1.0 - std::pow(1.0 - pfa, 1.0 / k);
        const double mu = threshold_for_pfa(det, node_pfa);
        const auto emp = simulate_cooperative_detection(det, k, mu, 1.0, FusionRule::OR,
                                                        100'000, 31);
        CHECK(std::abs((1.0 - emp.miss) - pt.global_pd) < 0.01);
        CHECK(std::abs(emp.false_alarm - pt.global_pfa) < 0.01);
    }
}

TEST_CASE("roc flags degenerate per-node calibration instead of clamping") {
    // A subnormal global pfa underflows the per-node OR inversion to zero.
    const EnergyDetector det{4, 1.0};
    const auto points = roc_curve(det, 2, 1.0, FusionRule::OR, {1e-320, 0.1});
    REQUIRE(points.size() == 2);
    CHECK_FALSE(points[0].reachable);
    CHECK(points[1].reachable);
}

TEST_CASE("roc curve input validation") {
    const EnergyDetector det{10, 1.0};
    CHECK_THROWS_AS(roc_curve(det, 2, 1.0, FusionRule::OR, {0.0, 0.5}), std::domain_error);
    CHECK_THROWS_AS(roc_curve(det, 2, 1.0, FusionRule::OR, {0.5, 0.1}), std::domain_error);
    CHECK_THROWS_AS(roc_curve(det, 0, 1.0, FusionRule::OR, {0.1}), std::domain_error);
}

TEST_CASE("rule parsing round-trips") {
    CHECK(parse_rule("or") == FusionRule::OR);
    CHECK(parse_rule("AND") == FusionRule::AND);
    CHECK(parse_rule("binomial_sum") == FusionRule::BINOMIAL_SUM);
    CHECK(rule_name(parse_rule("OR")) == "OR");
    CHECK_THROWS_AS(parse_rule("XOR"), std::domain_error);
}
