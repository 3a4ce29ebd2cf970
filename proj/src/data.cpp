#include "screject/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "screject/error.hpp"
#include "screject/scores.hpp"

namespace screject {

double Rng::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::uniform_open() {
    double u = uniform();
    while (u == 0.0) {
        u = uniform();
    }
    return u;
}

double Rng::normal() {
    const double u1 = uniform_open();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t Rng::below(std::uint64_t n) {
    // Rejection sampling for an unbiased draw.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x = engine_();
    while (x >= limit) {
        x = engine_();
    }
    return x % n;
}

void MixtureSpec::validate() const {
    if (num_classes < 2 || dim < 1) {
        throw InvalidInput("mixture needs K >= 2 and D >= 1");
    }
    if (static_cast<int>(means.size()) != num_classes ||
        static_cast<int>(priors.size()) != num_classes) {
        throw InvalidInput("mixture needs one mean and one prior per class");
    }
    if (!(sigma > 0.0)) {
        throw InvalidInput("mixture sigma must be positive");
    }
    double sum = 0.0;
    for (double p : priors) {
        if (p < 0.0) {
            throw InvalidInput("mixture priors must be nonnegative");
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12 * num_classes) {
        throw InvalidInput("mixture priors must sum to 1");
    }
    for (const auto& mu : means) {
        if (static_cast<int>(mu.size()) != dim) {
            throw InvalidInput("mixture mean has wrong dimension");
        }
    }
    for (int i = 0; i < num_classes; ++i) {
        for (int j = i + 1; j < num_classes; ++j) {
            if (means[i] == means[j]) {
                throw InvalidInput("mixture means must be pairwise distinct");
            }
        }
    }
}

MixtureSpec MixtureSpec::ring(int num_classes, double radius, double sigma, std::uint64_t seed) {
    MixtureSpec spec;
    spec.num_classes = num_classes;
    spec.dim = 2;
    spec.sigma = sigma;
    spec.seed = seed;
    spec.priors.assign(num_classes, 1.0 / num_classes);
    for (int k = 0; k < num_classes; ++k) {
        const double angle = 2.0 * std::numbers::pi * k / num_classes;
        spec.means.push_back({radius * std::cos(angle), radius * std::sin(angle)});
    }
    spec.validate();
    return spec;
}

std::uint64_t MixtureSpec::hash() const {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](std::uint64_t x) {
        for (int i = 0; i < 8; ++i) {
            h ^= (x >> (8 * i)) & 0xff;
            h *= 1099511628211ull;
        }
    };
    auto mix_double = [&](double x) {
        std::uint64_t bits;
        std::memcpy(&bits, &x, sizeof(bits));
        mix(bits);
    };
    mix(static_cast<std::uint64_t>(num_classes));
    mix(static_cast<std::uint64_t>(dim));
    mix_double(sigma);
    mix(seed);
    for (const auto& mu : means) {
        for (double m : mu) {
            mix_double(m);
        }
    }
    for (double p : priors) {
        mix_double(p);
    }
    return h;
}

std::vector<double> bayes_posterior(const MixtureSpec& spec, std::span<const double> x) {
    if (static_cast<int>(x.size()) != spec.dim) {
        throw InvalidInput("point dimension does not match mixture");
    }
    // Work in log space: log prior_k - ||x - mu_k||^2 / (2 sigma^2).
    std::vector<double> logw(spec.num_classes);
    const double inv2s2 = 1.0 / (2.0 * spec.sigma * spec.sigma);
    for (int k = 0; k < spec.num_classes; ++k) {
        double sq = 0.0;
        for (int d = 0; d < spec.dim; ++d) {
            const double diff = x[d] - spec.means[k][d];
            sq += diff * diff;
        }
        logw[k] = (spec.priors[k] > 0.0 ? std::log(spec.priors[k])
                                        : -std::numeric_limits<double>::infinity()) -
                  sq * inv2s2;
    }
    // Zero-prior components stay exactly zero after normalisation.
    const double m = *std::max_element(logw.begin(), logw.end());
    std::vector<double> pibar(spec.num_classes);
    double sum = 0.0;
    for (int k = 0; k < spec.num_classes; ++k) {
        pibar[k] = std::isfinite(logw[k]) ? std::exp(logw[k] - m) : 0.0;
        sum += pibar[k];
    }
    for (double& p : pibar) {
        p /= sum;
    }
    return pibar;
}

std::vector<Sample> sample_dataset(const MixtureSpec& spec, long n) {
    spec.validate();
    if (n < 1) {
        throw InvalidInput("dataset size must be >= 1");
    }
    Rng rng(spec.seed);
    std::vector<double> cum(spec.priors.size());
    std::partial_sum(spec.priors.begin(), spec.priors.end(), cum.begin());

    std::vector<Sample> out;
    out.reserve(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) {
        const double u = rng.uniform();
        int label = spec.num_classes - 1;
        for (int k = 0; k < spec.num_classes; ++k) {
            if (u < cum[k]) {
                label = k;
                break;
            }
        }
        Sample s;
        s.label = label;
        s.x.resize(spec.dim);
        for (int d = 0; d < spec.dim; ++d) {
            s.x[d] = spec.means[label][d] + spec.sigma * rng.normal();
        }
        s.pibar = bayes_posterior(spec, s.x);
        out.push_back(std::move(s));
    }
    return out;
}

MixtureSpec shift_spec(const MixtureSpec& spec, std::span<const double> delta) {
    spec.validate();
    if (static_cast<int>(delta.size()) != spec.dim) {
        throw InvalidInput("shift dimension does not match mixture");
    }
    MixtureSpec shifted = spec;
    for (auto& mu : shifted.means) {
        for (int d = 0; d < spec.dim; ++d) {
            mu[d] += delta[d];
        }
    }
    return shifted;
}

double p_error_of(std::span<const double> pibar, int predicted) {
    check_probs(pibar);
    if (predicted < 0 || predicted >= static_cast<int>(pibar.size())) {
        throw InvalidInput("predicted label out of range");
    }
    return 1.0 - pibar[static_cast<std::size_t>(predicted)];
}

namespace {

std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

}  // namespace

void write_logit_records(const std::filesystem::path& path, std::span<const LogitRecord> records) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    const std::size_t k = records.empty() ? 0 : records.front().logits.size();
    out << "# screject-logits v1 K=" << k << "\n";
    for (const auto& rec : records) {
        if (rec.logits.size() != k) {
            throw InvalidInput("inconsistent K across logit records");
        }
        for (double v : rec.logits) {
            out << format_double(v) << ",";
        }
        out << rec.label;
        if (!rec.source_tag.empty()) {
            out << "," << rec.source_tag;
        }
        out << "\n";
    }
    if (!out) {
        throw std::runtime_error("write failed for " + path.string());
    }
}

std::vector<LogitRecord> load_logit_records(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw FormatError("cannot open " + path.string(), 0);
    }
    std::string line;
    long line_no = 1;
    if (!std::getline(in, line)) {
        throw FormatError("empty logit file", line_no);
    }
    long k = -1;
    if (std::sscanf(line.c_str(), "# screject-logits v1 K=%ld", &k) != 1 || k < 0) {
        throw FormatError("bad header, expected '# screject-logits v1 K=<K>'", line_no);
    }

    std::vector<LogitRecord> records;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) {
            fields.push_back(field);
        }
        if (static_cast<long>(fields.size()) < k + 1 || static_cast<long>(fields.size()) > k + 2) {
            throw FormatError("expected K logits, a label and an optional tag", line_no);
        }
        LogitRecord rec;
        rec.logits.resize(static_cast<std::size_t>(k));
        for (long i = 0; i < k; ++i) {
            std::size_t pos = 0;
            try {
                rec.logits[static_cast<std::size_t>(i)] =
                    std::stod(fields[static_cast<std::size_t>(i)], &pos);
            } catch (const std::exception&) {
                throw FormatError("unparseable logit value", line_no);
            }
            if (pos != fields[static_cast<std::size_t>(i)].size()) {
                throw FormatError("trailing junk in logit value", line_no);
            }
        }
        try {
            rec.label = std::stoi(fields[static_cast<std::size_t>(k)]);
        } catch (const std::exception&) {
            throw FormatError("unparseable label", line_no);
        }
        if (rec.label < 0 || rec.label >= k) {
            throw FormatError("label out of range [0, K)", line_no);
        }
        if (static_cast<long>(fields.size()) == k + 2) {
            rec.source_tag = fields[static_cast<std::size_t>(k + 1)];
        }
        records.push_back(std::move(rec));
    }
    return records;
}

}  // namespace screject
