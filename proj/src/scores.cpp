#include "screject/scores.hpp"

#include <algorithm>
#include <cmath>

#include "screject/error.hpp"

namespace screject {

void check_logits(std::span<const double> v) {
    if (v.size() < 2) {
        throw InvalidInput("logit vector needs K >= 2, got K = " + std::to_string(v.size()));
    }
    for (double x : v) {
        if (!std::isfinite(x)) {
            throw InvalidInput("logit vector contains a non-finite value");
        }
    }
}

void check_probs(std::span<const double> pi) {
    if (pi.size() < 2) {
        throw InvalidInput("probability vector needs K >= 2");
    }
    double sum = 0.0;
    for (double p : pi) {
        if (!std::isfinite(p) || p < 0.0) {
            throw InvalidInput("probability vector has a negative or non-finite entry");
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12 * pi.size()) {
        throw InvalidInput("probability vector does not sum to 1");
    }
}

double log_sum_exp(std::span<const double> v) {
    const double m = *std::max_element(v.begin(), v.end());
    double sum = 0.0;
    for (double x : v) {
        sum += std::exp(x - m);
    }
    return m + std::log(sum);
}

std::vector<double> softmax(std::span<const double> v) {
    check_logits(v);
    const double m = *std::max_element(v.begin(), v.end());
    std::vector<double> pi(v.size());
    double sum = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) {
        pi[k] = std::exp(v[k] - m);
        sum += pi[k];
    }
    for (double& p : pi) {
        p /= sum;
    }
    return pi;
}

double score_msp(std::span<const double> pi) {
    check_probs(pi);
    return -*std::max_element(pi.begin(), pi.end());
}

double score_entropy(std::span<const double> pi) {
    check_probs(pi);
    double h = 0.0;
    for (double p : pi) {
        if (p > 0.0) {
            h -= p * std::log(p);
        }
    }
    return h;
}

double score_doctor(std::span<const double> pi) {
    check_probs(pi);
    double sq = 0.0;
    for (double p : pi) {
        sq += p * p;
    }
    return -std::sqrt(sq);
}

double score_energy(std::span<const double> v) {
    check_logits(v);
    return -log_sum_exp(v);
}

}  // namespace screject
