#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace aerocell::sensing {

enum class FusionRule {
    OR,            // global 1 iff any local decision is 1
    AND,           // global 1 iff all local decisions are 1
    BINOMIAL_SUM,  // probabilities evaluated through the binomial summation
                   // form; algebraically identical to AND
};

FusionRule parse_rule(const std::string& name);  // throws std::domain_error
std::string rule_name(FusionRule rule);

// Energy detector over n_samples complex baseband samples with the noise
// power normalized to 1.
struct EnergyDetector {
    int n_samples = 1;
    double noise_power = 1.0;

    void validate() const;
};

// Identical detectors at k_nodes cognitive radios, each with local detection
// probability p_d_local and false-alarm probability p_fa_local, hard
// decisions combined at the fusion center with the given rule.
struct FusionModel {
    int k_nodes = 1;
    double p_d_local = 0.0;
    double p_fa_local = 0.0;
    FusionRule rule = FusionRule::OR;

    void validate() const;
};

struct FusionProbs {
    double miss;
    double false_alarm;
};

struct RocPoint {
    double global_pfa;
    double global_pd;
    bool reachable;  // false when the per-node calibration degenerates
};

// Hard local decision: 1 iff the test statistic reaches the threshold
// (boundary inclusive).
int local_decision(double xi, double mu);

// Energy test statistic: sum of |y_i|^2 over the sample window.
double energy_statistic(std::span<const std::complex<double>> samples);

// Survival function of the noise-only statistic: P(xi >= mu | H0), where
// 2*xi is central chi-square with 2n degrees of freedom.
double noise_tail_prob(int n_samples, double mu);

// Threshold mu with P(xi >= mu | noise only) = target_pfa, solved by
// bisection to 1e-10 relative tolerance.
double threshold_for_pfa(const EnergyDetector& detector, double target_pfa);

// Detection probability P(xi >= mu | signal present) for a deterministic
// signal of per-sample SNR snr_linear in unit-power complex noise: 2*xi is
// noncentral chi-square with 2n degrees of freedom and noncentrality
// 2*n*snr_linear, evaluated by a Poisson-mixture series to ~1e-10.
double local_pd(const EnergyDetector& detector, double mu, double snr_linear);

// Hard-decision fusion of {0,1} votes. BINOMIAL_SUM fuses like AND.
int fuse(const std::vector<int>& decisions, FusionRule rule);

// Fused miss probability in the binomial summation form:
// sum_{j=0}^{K-1} C(K,j) Pd^j (1-Pd)^(K-j); equals 1 - Pd^K.
double miss_prob_binomial_sum(int k_nodes, double p_d_local);

// Fused false-alarm probability in the binomial summation form:
// 1 - sum_{j=0}^{K-1} C(K,j) Pfa^j (1-Pfa)^(K-j); equals Pfa^K.
double false_alarm_prob_binomial_sum(int k_nodes, double p_fa_local);

// Closed-form fused (miss, false alarm) for the model's rule.
FusionProbs fusion_probs_closed_form(const FusionModel& model);

// Monte Carlo estimate of the fused (miss, false alarm). Each trial draws K
// Bernoulli local decisions under H1 and under H0 from a counter-based
// per-trial stream of (seed, trial index), so the result does not depend on
// execution order.
FusionProbs simulate_fusion(const FusionModel& model, std::uint64_t trials,
                            std::uint64_t seed);

// Empirical noise-only false-alarm rate of the energy detector at
// threshold mu; same counter-based trial seeding.
double simulate_false_alarm(const EnergyDetector& detector, double mu,
                            std::uint64_t trials, std::uint64_t seed);

// Empirical detection rate with a deterministic per-sample-SNR signal.
double simulate_detection(const EnergyDetector& detector, double mu,
                          double snr_linear, std::uint64_t trials,
                          std::uint64_t seed);

// Empirical fused (miss, false alarm) from the full chain: per trial each of
// the K nodes forms its own energy statistic under H1 and H0, thresholds at
// mu, and the hard decisions are fused. Streams are counter-based per
// (trial, node).
FusionProbs simulate_cooperative_detection(const EnergyDetector& detector,
                                           int k_nodes, double mu,
                                           double snr_linear, FusionRule rule,
                                           std::uint64_t trials,
                                           std::uint64_t seed);

// Cooperative ROC: for each global false-alarm target, invert the rule's
// false-alarm composition to a per-node target, calibrate the per-node
// threshold, and compose the global detection probability.
std::vector<RocPoint> roc_curve(const EnergyDetector& detector, int k_nodes,
                                double snr_linear, FusionRule rule,
                                const std::vector<double>& pfa_points);

}  // namespace aerocell::sensing
