#include "aerocell/sensing.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace aerocell::sensing {

FusionRule parse_rule(const std::string& name) {
    std::string up;
    for (char c : name) up.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    if (up == "OR") return FusionRule::OR;
    if (up == "AND") return FusionRule::AND;
    if (up == "BINOMIAL_SUM" || up == "BINOMIAL-SUM") return FusionRule::BINOMIAL_SUM;
    throw std::domain_error("unknown fusion rule: " + name);
}

std::string rule_name(FusionRule rule) {
    switch (rule) {
        case FusionRule::OR: return "OR";
        case FusionRule::AND: return "AND";
        case FusionRule::BINOMIAL_SUM: return "BINOMIAL_SUM";
    }
    return "?";
}

void EnergyDetector::validate() const {
    if (n_samples < 1) throw std::domain_error("n_samples must be >= 1");
    if (!(noise_power > 0.0)) throw std::domain_error("noise_power must be > 0");
}

void FusionModel::validate() const {
    if (k_nodes < 1) throw std::domain_error("k_nodes must be >= 1");
    if (!(p_d_local >= 0.0 && p_d_local <= 1.0))
        throw std::domain_error("p_d_local must be in [0, 1]");
    if (!(p_fa_local >= 0.0 && p_fa_local <= 1.0))
        throw std::domain_error("p_fa_local must be in [0, 1]");
}

int local_decision(double xi, double mu) {
    if (!std::isfinite(xi) || !std::isfinite(mu))
        throw std::domain_error("test statistic and threshold must be finite");
    return xi >= mu ? 1 : 0;
}

double energy_statistic(std::span<const std::complex<double>> samples) {
    if (samples.empty()) throw std::domain_error("energy statistic needs at least one sample");
    double acc = 0.0;
    for (const auto& y : samples) acc += std::norm(y);
    return acc;
}

namespace {

// Regularized upper incomplete gamma Q(m, x) for integer m >= 1:
// Q(m, x) = e^-x * sum_{i<m} x^i / i!. Falls back to a log-space sum around
// the dominant term when e^-x would underflow.
double gamma_q_int(int m, double x) {
    if (x <= 0.0) return 1.0;
    if (x < 700.0) {
        double term = std::exp(-x);
        double sum = term;
        for (int i = 1; i < m; ++i) {
            term *= x / i;
            sum += term;
        }
        return std::min(1.0, sum);
    }
    double log_max = -x;  // log of the i-th term is i*ln(x) - lgamma(i+1) - x
    for (int i = 1; i < m; ++i)
        log_max = std::max(log_max, i * std::log(x) - std::lgamma(i + 1.0) - x);
    double sum = 0.0;
    for (int i = 0; i < m; ++i)
        sum += std::exp(i * std::log(x) - std::lgamma(i + 1.0) - x - log_max);
    return std::min(1.0, std::exp(log_max) * sum);
}

// Survival function of a noncentral chi-square with 2m degrees of freedom
// and noncentrality 2a at 2x, written as a Poisson(a) mixture of central
// even-dof tails. Expands outward from the Poisson mode so large a cannot
// underflow the weights.
double noncentral_q_even(int m, double a, double x) {
    if (a <= 0.0) return gamma_q_int(m, x);
    if (x <= 0.0) return 1.0;
    if (a > 1e8) throw std::domain_error("noncentrality too large for the series evaluation");

    const int j0 = static_cast<int>(a);
    const double log_w0 = -a + j0 * std::log(a) - std::lgamma(j0 + 1.0);
    const double w0 = std::exp(log_w0);

    // Central tail Q(m + j0, x) and the pdf-step term e^-x x^(m+j0-1)/(m+j0-1)!.
    double q0 = gamma_q_int(m + j0, x);
    const double log_p0 = -x + (m + j0) * std::log(x) - std::lgamma(m + j0 + 1.0);
    double p_up = std::exp(log_p0);  // term added when stepping m+j0 -> m+j0+1

    double total = w0 * q0;
    double weight_sum = w0;

    // Upward sweep from the mode.
    {
        double w = w0, q = q0, p = p_up;
        for (int j = j0 + 1; weight_sum < 1.0 - 1e-14; ++j) {
            w *= a / j;
            q += p;
            p *= x / (m + j);
            total += w * std::min(1.0, q);
            weight_sum += w;
            if (w < 1e-17 && j > a) break;
        }
    }
    // Downward sweep.
    {
        double w = w0, q = q0;
        double p = std::exp(-x + (m + j0 - 1) * std::log(x) - std::lgamma(m + j0 + 0.0));
        for (int j = j0 - 1; j >= 0; --j) {
            w *= (j + 1) / a;
            q -= p;
            if (q < 0.0) q = 0.0;
            p *= (m + j) / x;
            total += w * std::min(1.0, q);
            weight_sum += w;
            if (w < 1e-17) break;
        }
    }
    return std::clamp(total, 0.0, 1.0);
}

}  // namespace

double noise_tail_prob(int n_samples, double mu) {
    if (n_samples < 1) throw std::domain_error("n_samples must be >= 1");
    if (!std::isfinite(mu)) throw std::domain_error("mu must be finite");
    if (mu <= 0.0) return 1.0;
    return gamma_q_int(n_samples, mu);
}

double threshold_for_pfa(const EnergyDetector& detector, double target_pfa) {
    detector.validate();
    if (!(target_pfa > 0.0 && target_pfa < 1.0))
        throw std::domain_error("target_pfa must be in (0, 1)");

    double lo = 0.0;
    double hi = std::max(1.0, static_cast<double>(detector.n_samples));
    while (noise_tail_prob(detector.n_samples, hi) > target_pfa) hi *= 2.0;
    // Decreasing tail: bisect until the bracket is relatively tight.
    while (hi - lo > 1e-10 * std::max(1.0, hi)) {
        const double mid = 0.5 * (lo + hi);
        if (noise_tail_prob(detector.n_samples, mid) >= target_pfa)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double local_pd(const EnergyDetector& detector, double mu, double snr_linear) {
    detector.validate();
    if (!(mu >= 0.0)) throw std::domain_error("mu must be >= 0");
    if (!(snr_linear >= 0.0)) throw std::domain_error("snr_linear must be >= 0");
    // 2*xi ~ ncx2(2n, 2n*snr); P(xi >= mu) with a = n*snr, x = mu.
    return noncentral_q_even(detector.n_samples,
                             detector.n_samples * snr_linear, mu);
}

int fuse(const std::vector<int>& decisions, FusionRule rule) {
    if (decisions.empty()) throw std::domain_error("fusion needs at least one decision");
    for (int d : decisions)
        if (d != 0 && d != 1) throw std::domain_error("local decisions must be 0 or 1");
    if (rule == FusionRule::OR)
        return std::any_of(decisions.begin(), decisions.end(), [](int d) { return d == 1; }) ? 1 : 0;
    return std::all_of(decisions.begin(), decisions.end(), [](int d) { return d == 1; }) ? 1 : 0;
}

double miss_prob_binomial_sum(int k_nodes, double p_d_local) {
    if (k_nodes < 1) throw std::domain_error("k_nodes must be >= 1");
    double sum = 0.0;
    double binom = 1.0;  // C(K, j), built multiplicatively
    for (int j = 0; j <= k_nodes - 1; ++j) {
        sum += binom * std::pow(p_d_local, j) * std::pow(1.0 - p_d_local, k_nodes - j);
        binom = binom * (k_nodes - j) / (j + 1);
    }
    return sum;
}

double false_alarm_prob_binomial_sum(int k_nodes, double p_fa_local) {
    if (k_nodes < 1) throw std::domain_error("k_nodes must be >= 1");
    double sum = 0.0;
    double binom = 1.0;
    for (int j = 0; j <= k_nodes - 1; ++j) {
        sum += binom * std::pow(p_fa_local, j) * std::pow(1.0 - p_fa_local, k_nodes - j);
        binom = binom * (k_nodes - j) / (j + 1);
    }
    return 1.0 - sum;
}

FusionProbs fusion_probs_closed_form(const FusionModel& model) {
    model.validate();
    const double k = model.k_nodes;
    switch (model.rule) {
        case FusionRule::OR:
            return {std::pow(1.0 - model.p_d_local, k),
                    1.0 - std::pow(1.0 - model.p_fa_local, k)};
        case FusionRule::AND:
            return {1.0 - std::pow(model.p_d_local, k),
                    std::pow(model.p_fa_local, k)};
        case FusionRule::BINOMIAL_SUM:
            return {miss_prob_binomial_sum(model.k_nodes, model.p_d_local),
                    false_alarm_prob_binomial_sum(model.k_nodes, model.p_fa_local)};
    }
    throw std::domain_error("unknown fusion rule");
}

namespace {

// Counter-based per-trial random stream (splitmix64). Each trial's stream is
// a pure function of (seed, trial index), so trials can run in any order or
// in parallel and produce identical results.
struct TrialRng {
    std::uint64_t state;

    TrialRng(std::uint64_t seed, std::uint64_t trial) {
        state = seed * 0x9e3779b97f4a7c15ULL + trial + 1;
        next();  // decorrelate nearby (seed, trial) pairs
        next();
    }

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    double u01() {  // uniform in (0, 1)
        return (static_cast<double>(next() >> 11) + 0.5) * 0x1p-53;
    }

    // Standard normal pair via Box-Muller.
    void normal_pair(double& n0, double& n1) {
        const double u1 = u01();
        const double u2 = u01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        n0 = r * std::cos(2.0 * std::numbers::pi * u2);
        n1 = r * std::sin(2.0 * std::numbers::pi * u2);
    }
};

}  // namespace

FusionProbs simulate_fusion(const FusionModel& model, std::uint64_t trials,
                            std::uint64_t seed) {
    model.validate();
    if (trials < 1) throw std::domain_error("trials must be >= 1");

    std::uint64_t misses = 0;
    std::uint64_t false_alarms = 0;
    const bool any_rule = model.rule == FusionRule::OR;
    for (std::uint64_t t = 0; t < trials; ++t) {
        TrialRng rng(seed, t);
        bool h1_any = false, h1_all = true;
        for (int k = 0; k < model.k_nodes; ++k) {
            const bool vote = rng.u01() < model.p_d_local;
            h1_any |= vote;
            h1_all &= vote;
        }
        bool h0_any = false, h0_all = true;
        for (int k = 0; k < model.k_nodes; ++k) {
            const bool vote = rng.u01() < model.p_fa_local;
            h0_any |= vote;
            h0_all &= vote;
        }
        const bool h1_global = any_rule ? h1_any : h1_all;
        const bool h0_global = any_rule ? h0_any : h0_all;
        if (!h1_global) ++misses;
        if (h0_global) ++false_alarms;
    }
    return {static_cast<double>(misses) / trials,
            static_cast<double>(false_alarms) / trials};
}

namespace {

double simulate_energy_tail(const EnergyDetector& detector, double mu,
                            double amplitude, std::uint64_t trials,
                            std::uint64_t seed) {
    std::uint64_t hits = 0;
    const int n = detector.n_samples;
    for (std::uint64_t t = 0; t < trials; ++t) {
        TrialRng rng(seed, t);
        double xi = 0.0;
        for (int i = 0; i < n; ++i) {
            double n0, n1;
            rng.normal_pair(n0, n1);
            // Unit-power complex noise plus a real deterministic signal.
            const double re = amplitude + n0 * std::numbers::sqrt2 / 2.0;
            const double im = n1 * std::numbers::sqrt2 / 2.0;
            xi += re * re + im * im;
        }
        if (xi >= mu) ++hits;
    }
    return static_cast<double>(hits) / trials;
}

}  // namespace

double simulate_false_alarm(const EnergyDetector& detector, double mu,
                            std::uint64_t trials, std::uint64_t seed) {
    detector.validate();
    if (trials < 1) throw std::domain_error("trials must be >= 1");
    return simulate_energy_tail(detector, mu, 0.0, trials, seed);
}

double simulate_detection(const EnergyDetector& detector, double mu,
                          double snr_linear, std::uint64_t trials,
                          std::uint64_t seed) {
    detector.validate();
    if (!(snr_linear >= 0.0)) throw std::domain_error("snr_linear must be >= 0");
    if (trials < 1) throw std::domain_error("trials must be >= 1");
    return simulate_energy_tail(detector, mu, std::sqrt(snr_linear), trials, seed);
}

FusionProbs simulate_cooperative_detection(const EnergyDetector& detector,
                                           int k_nodes, double mu,
                                           double snr_linear, FusionRule rule,
                                           std::uint64_t trials,
                                           std::uint64_t seed) {
    detector.validate();
    if (k_nodes < 1) throw std::domain_error("k_nodes must be >= 1");
    if (!(snr_linear >= 0.0)) throw std::domain_error("snr_linear must be >= 0");
    if (trials < 1) throw std::domain_error("trials must be >= 1");

    const double amplitude = std::sqrt(snr_linear);
    const int n = detector.n_samples;
    const bool any_rule = rule == FusionRule::OR;
    std::uint64_t misses = 0, false_alarms = 0;
    for (std::uint64_t t = 0; t < trials; ++t) {
        bool h1_any = false, h1_all = true, h0_any = false, h0_all = true;
        for (int k = 0; k < k_nodes; ++k) {
            TrialRng rng(seed, t * static_cast<std::uint64_t>(k_nodes) + k);
            double xi1 = 0.0, xi0 = 0.0;
            for (int i = 0; i < n; ++i) {
                double n0, n1, n2, n3;
                rng.normal_pair(n0, n1);
                rng.normal_pair(n2, n3);
                const double re1 = amplitude + n0 * std::numbers::sqrt2 / 2.0;
                const double im1 = n1 * std::numbers::sqrt2 / 2.0;
                const double re0 = n2 * std::numbers::sqrt2 / 2.0;
                const double im0 = n3 * std::numbers::sqrt2 / 2.0;
                xi1 += re1 * re1 + im1 * im1;
                xi0 += re0 * re0 + im0 * im0;
            }
            const bool v1 = xi1 >= mu;
            const bool v0 = xi0 >= mu;
            h1_any |= v1;
            h1_all &= v1;
            h0_any |= v0;
            h0_all &= v0;
        }
        if (!(any_rule ? h1_any : h1_all)) ++misses;
        if (any_rule ? h0_any : h0_all) ++false_alarms;
    }
    return {static_cast<double>(misses) / trials,
            static_cast<double>(false_alarms) / trials};
}

std::vector<RocPoint> roc_curve(const EnergyDetector& detector, int k_nodes,
                                double snr_linear, FusionRule rule,
                                const std::vector<double>& pfa_points) {
    detector.validate();
    if (k_nodes < 1) throw std::domain_error("k_nodes must be >= 1");
    if (!(snr_linear >= 0.0)) throw std::domain_error("snr_linear must be >= 0");
    for (std::size_t i = 0; i < pfa_points.size(); ++i) {
        if (!(pfa_points[i] > 0.0 && pfa_points[i] < 1.0))
            throw std::domain_error("pfa points must be in (0, 1)");
        if (i > 0 && !(pfa_points[i] > pfa_points[i - 1]))
            throw std::domain_error("pfa points must be sorted ascending");
    }

    const double k = k_nodes;
    std::vector<RocPoint> points;
    points.reserve(pfa_points.size());
    for (double global_pfa : pfa_points) {
        // Invert the rule's false-alarm composition to the per-node target.
        double node_pfa;
        if (rule == FusionRule::OR)
            node_pfa = 1.0 - std::pow(1.0 - global_pfa, 1.0 / k);
        else
            node_pfa = std::pow(global_pfa, 1.0 / k);

        if (!(node_pfa > 0.0 && node_pfa < 1.0)) {
            points.push_back({global_pfa, 0.0, false});
            continue;
        }

        const double mu = threshold_for_pfa(detector, node_pfa);
        const double node_pd = local_pd(detector, mu, snr_linear);
        double global_pd;
        double achieved_pfa;
        if (rule == FusionRule::OR) {
            global_pd = 1.0 - std::pow(1.0 - node_pd, k);
            achieved_pfa = 1.0 - std::pow(1.0 - node_pfa, k);
        } else {
            global_pd = std::pow(node_pd, k);
            achieved_pfa = std::pow(node_pfa, k);
        }
        points.push_back({achieved_pfa, global_pd, true});
    }
    return points;
}

}  // namespace aerocell::sensing
