#include <cstdio>
#include "screject/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "screject/error.hpp"
#include "screject/scores.hpp"

namespace screject {

void TrainConfig::validate() const {
    SmoothingConfig{alpha, 2}.validate();
    if (epochs < 0 || batch_size < 1) {
        throw InvalidInput("train config needs epochs >= 0 and batch_size >= 1");
    }
    if (!(learning_rate > 0.0)) {
        throw InvalidInput("learning rate must be positive");
    }
    if (momentum < 0.0 || momentum >= 1.0) {
        throw InvalidInput("momentum must be in [0, 1)");
    }
    if (weight_decay < 0.0) {
        throw InvalidInput("weight decay must be >= 0");
    }
}

MLPModel init_model(std::span<const int> sizes, std::uint64_t seed) {
    if (sizes.size() < 2) {
        throw InvalidInput("model needs at least input and output layers");
    }
    MLPModel model;
    model.sizes.assign(sizes.begin(), sizes.end());
    Rng rng(seed);
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        const int fan_in = sizes[l];
        const int fan_out = sizes[l + 1];
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        std::vector<double> w(static_cast<std::size_t>(fan_in) * fan_out);
        for (double& x : w) {
            x = bound * (2.0 * rng.uniform() - 1.0);
        }
        model.weights.push_back(std::move(w));
        model.biases.emplace_back(fan_out, 0.0);
    }
    return model;
}

namespace {

// Forward pass keeping post-activation values per layer;
// activations.front() is the input, activations.back() the logits.
std::vector<std::vector<double>> forward_trace(const MLPModel& model,
                                               std::span<const double> x) {
    if (static_cast<int>(x.size()) != model.input_dim()) {
        throw InvalidInput("input dimension does not match model");
    }
    std::vector<std::vector<double>> activations;
    activations.emplace_back(x.begin(), x.end());
    const std::size_t layers = model.weights.size();
    for (std::size_t l = 0; l < layers; ++l) {
        const int in = model.sizes[l];
        const int out = model.sizes[l + 1];
        const auto& prev = activations.back();
        std::vector<double> next(out);
        for (int o = 0; o < out; ++o) {
            double acc = model.biases[l][static_cast<std::size_t>(o)];
            const double* row = model.weights[l].data() + static_cast<std::size_t>(o) * in;
            for (int i = 0; i < in; ++i) {
                acc += row[i] * prev[static_cast<std::size_t>(i)];
            }
            next[static_cast<std::size_t>(o)] = acc;
        }
        if (l + 1 < layers) {
            for (double& v : next) {
                v = std::max(v, 0.0);
            }
        }
        activations.push_back(std::move(next));
    }
    return activations;
}

Gradients zero_gradients(const MLPModel& model) {
    Gradients g;
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        g.weights.emplace_back(model.weights[l].size(), 0.0);
        g.biases.emplace_back(model.biases[l].size(), 0.0);
    }
    return g;
}

// Backprop from the logit seed gradient into accumulated parameter
// gradients; activations come from forward_trace on the same input.
void accumulate_backward(const MLPModel& model,
                         const std::vector<std::vector<double>>& activations,
                         std::vector<double> delta, Gradients& grads) {
    for (std::size_t l = model.weights.size(); l-- > 0;) {
        const int in = model.sizes[l];
        const int out = model.sizes[l + 1];
        const auto& prev = activations[l];
        for (int o = 0; o < out; ++o) {
            const double d = delta[static_cast<std::size_t>(o)];
            grads.biases[l][static_cast<std::size_t>(o)] += d;
            double* row = grads.weights[l].data() + static_cast<std::size_t>(o) * in;
            for (int i = 0; i < in; ++i) {
                row[i] += d * prev[static_cast<std::size_t>(i)];
            }
        }
        if (l == 0) {
            break;
        }
        std::vector<double> prev_delta(in, 0.0);
        for (int o = 0; o < out; ++o) {
            const double d = delta[static_cast<std::size_t>(o)];
            const double* row = model.weights[l].data() + static_cast<std::size_t>(o) * in;
            for (int i = 0; i < in; ++i) {
                prev_delta[static_cast<std::size_t>(i)] += d * row[i];
            }
        }
        // ReLU gate on the hidden activation.
        for (int i = 0; i < in; ++i) {
            if (prev[static_cast<std::size_t>(i)] <= 0.0) {
                prev_delta[static_cast<std::size_t>(i)] = 0.0;
            }
        }
        delta = std::move(prev_delta);
    }
}

}  // namespace

std::vector<double> forward(const MLPModel& model, std::span<const double> x) {
    return forward_trace(model, x).back();
}

Gradients backward(const MLPModel& model, std::span<const double> x,
                   std::span<const double> target, const SmoothingConfig& cfg) {
    const auto activations = forward_trace(model, x);
    const auto pi = softmax(activations.back());
    auto grads = zero_gradients(model);
    accumulate_backward(model, activations, grad_ls_logits(pi, target, cfg), grads);
    return grads;
}

MLPModel train(const MixtureSpec& spec, long n_train, const TrainConfig& cfg) {
    return train(spec, n_train, cfg, nullptr);
}

MLPModel train(const MixtureSpec& spec, long n_train, const TrainConfig& cfg,
               std::vector<double>* epoch_losses) {
    cfg.validate();
    const auto dataset = sample_dataset(spec, n_train);

    std::vector<int> sizes;
    sizes.push_back(spec.dim);
    sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
    sizes.push_back(spec.num_classes);
    MLPModel model = init_model(sizes, cfg.seed);

    const SmoothingConfig smoothing{cfg.alpha, spec.num_classes};
    smoothing.validate();

    Gradients velocity = zero_gradients(model);
    Rng shuffle_rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);
    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), 0);

    if (epoch_losses) {
        epoch_losses->clear();
    }
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        // Fisher-Yates with the dedicated shuffle stream.
        for (std::size_t i = order.size(); i > 1; --i) {
            std::swap(order[i - 1], order[shuffle_rng.below(i)]);
        }
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(order.size(), start + cfg.batch_size);
            Gradients grads = zero_gradients(model);
            for (std::size_t i = start; i < end; ++i) {
                const Sample& s = dataset[order[i]];
                const auto activations = forward_trace(model, s.x);
                const auto pi = softmax(activations.back());
                std::vector<double> onehot(spec.num_classes, 0.0);
                onehot[static_cast<std::size_t>(s.label)] = 1.0;
                epoch_loss += loss_ls(pi, onehot, smoothing);
                accumulate_backward(model, activations, grad_ls_logits(pi, onehot, smoothing),
                                    grads);
            }
            const double scale = 1.0 / static_cast<double>(end - start);
            for (std::size_t l = 0; l < model.weights.size(); ++l) {
                for (std::size_t j = 0; j < model.weights[l].size(); ++j) {
                    const double g =
                        grads.weights[l][j] * scale + cfg.weight_decay * model.weights[l][j];
                    velocity.weights[l][j] = cfg.momentum * velocity.weights[l][j] - cfg.learning_rate * g;
                    model.weights[l][j] += velocity.weights[l][j];
                }
                for (std::size_t j = 0; j < model.biases[l].size(); ++j) {
                    const double g = grads.biases[l][j] * scale;
                    velocity.biases[l][j] = cfg.momentum * velocity.biases[l][j] - cfg.learning_rate * g;
                    model.biases[l][j] += velocity.biases[l][j];
                }
            }
        }
        epoch_loss /= static_cast<double>(dataset.size());
        if (!std::isfinite(epoch_loss)) {
            throw TrainingDiverged(epoch);
        }
        if (epoch_losses) {
            epoch_losses->push_back(epoch_loss);
        }
    }
    return model;
}

long dump_logits(const MLPModel& model, std::span<const Sample> samples,
                 const std::filesystem::path& path, const std::string& source_tag) {
    std::vector<LogitRecord> records;
    records.reserve(samples.size());
    for (const auto& s : samples) {
        records.push_back({forward(model, s.x), s.label, source_tag});
    }
    write_logit_records(path, records);
    return static_cast<long>(records.size());
}

void write_manifest(const std::filesystem::path& path,
                    const std::map<std::string, std::string>& entries) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    for (const auto& [key, value] : entries) {
        out << key << "=" << value << "\n";
    }
}

std::map<std::string, std::string> run_manifest(const MixtureSpec& spec, const TrainConfig& cfg) {
    std::ostringstream arch;
    arch << spec.dim;
    for (int h : cfg.hidden) {
        arch << "-" << h;
    }
    arch << "-" << spec.num_classes;
    auto real = [](double x) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%g", x);
        return std::string(buf);
    };
    std::map<std::string, std::string> m;
    m["seed"] = std::to_string(cfg.seed);
    m["alpha"] = real(cfg.alpha);
    m["architecture"] = "mlp-relu-" + arch.str();
    m["init"] = "fan-in-uniform";
    m["optimizer"] = "sgd-momentum";
    m["learning_rate"] = real(cfg.learning_rate);
    m["momentum"] = real(cfg.momentum);
    m["weight_decay"] = real(cfg.weight_decay);
    m["epochs"] = std::to_string(cfg.epochs);
    m["batch_size"] = std::to_string(cfg.batch_size);
    m["rng"] = Rng::kAlgorithm;
    m["dataset_spec_hash"] = std::to_string(spec.hash());
    return m;
}

}  // namespace screject
