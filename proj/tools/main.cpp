// screject: selective-classification toolkit command line.
//
// Subcommands: train | eval | rc | analyze | repro.
// Exit codes: 0 success, 2 usage, 3 training failure, 4 I/O or format
// error, 5 reproduction-criterion failure.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "screject/analysis.hpp"
#include "screject/data.hpp"
#include "screject/error.hpp"
#include "screject/normalization.hpp"
#include "screject/repro.hpp"
#include "screject/scores.hpp"
#include "screject/selective.hpp"
#include "screject/svg.hpp"
#include "screject/trainer.hpp"

namespace fs = std::filesystem;
using namespace screject;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitTraining = 3;
constexpr int kExitIo = 4;
constexpr int kExitCriteria = 5;

std::string fmt(double x, int precision) {
    char buf[64];
    if (precision >= 17) {
        std::snprintf(buf, sizeof(buf), "%.17g", x);
    } else {
        std::snprintf(buf, sizeof(buf), "%.*f", precision, x);
    }
    return buf;
}

std::string fmt_g(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%g", x);
    return buf;
}

int argmax_of(const std::vector<double>& v) {
    return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

// Scores a logit file with one of the five uncertainty scores.
std::vector<ScoredPrediction> score_records(const std::vector<LogitRecord>& records,
                                            const std::string& score, const NormConfig& norm) {
    std::vector<ScoredPrediction> preds;
    preds.reserve(records.size());
    long id = 0;
    for (const auto& rec : records) {
        ScoredPrediction p;
        if (score == "energy") {
            p.uncertainty = score_energy(rec.logits);
        } else if (score == "maxlogit-norm") {
            p.uncertainty = score_maxlogit_norm(rec.logits, norm);
        } else {
            const auto pi = softmax(rec.logits);
            if (score == "msp") {
                p.uncertainty = score_msp(pi);
            } else if (score == "entropy") {
                p.uncertainty = score_entropy(pi);
            } else if (score == "doctor") {
                p.uncertainty = score_doctor(pi);
            } else {
                throw InvalidInput("unknown score: " + score);
            }
        }
        p.correct = argmax_of(rec.logits) == rec.label;
        p.sample_id = id++;
        p.source_tag = rec.source_tag;
        preds.push_back(std::move(p));
    }
    return preds;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    return out;
}

void write_rc_table(const fs::path& path, const RCCurve& curve, int precision) {
    auto out = open_out(path);
    out << "coverage,risk,threshold\n";
    for (const auto& pt : curve.points) {
        out << fmt(pt.coverage, precision) << ',' << fmt(pt.risk, precision) << ','
            << fmt(pt.threshold, precision) << '\n';
    }
}

// Legend label for an RC input: alpha from a sibling manifest when
// available, otherwise the file stem.
std::string legend_label(const fs::path& input) {
    const fs::path manifest = input.parent_path() / "manifest.txt";
    if (fs::exists(manifest)) {
        std::ifstream in(manifest);
        std::string line;
        while (std::getline(in, line)) {
            if (line.rfind("alpha=", 0) == 0) {
                return "alpha=" + line.substr(6);
            }
        }
    }
    return input.stem().string();
}

// ---------------------------------------------------------------- train

struct TrainArgs {
    std::vector<double> alphas{0.0};
    std::uint64_t seed = 1;
    std::string out;
    long n_train = 20000;
    long n_val = 2000;
    long n_eval = 5000;
    int classes = 8;
    double radius = 2.0;
    double sigma = 0.6;
    int epochs = 15;
    int batch_size = 128;
    double learning_rate = 0.05;
    double momentum = 0.9;
    std::vector<int> hidden{64, 64};
};

int cmd_train(const TrainArgs& args) {
    const auto spec = MixtureSpec::ring(args.classes, args.radius, args.sigma, args.seed);
    auto val_spec = spec;
    val_spec.seed = args.seed + 1;
    auto eval_spec = spec;
    eval_spec.seed = args.seed + 2;

    const auto val = sample_dataset(val_spec, args.n_val);
    const auto eval = sample_dataset(eval_spec, args.n_eval);
    const auto train_set = sample_dataset(spec, args.n_train);

    for (double alpha : args.alphas) {
        TrainConfig cfg;
        cfg.alpha = alpha;
        cfg.epochs = args.epochs;
        cfg.batch_size = args.batch_size;
        cfg.learning_rate = args.learning_rate;
        cfg.momentum = args.momentum;
        cfg.hidden = args.hidden;
        cfg.seed = args.seed + 17;
        cfg.validate();

        const fs::path dir = fs::path(args.out) / ("alpha-" + fmt_g(alpha));
        fs::create_directories(dir);
        const auto model = train(spec, args.n_train, cfg);
        dump_logits(model, train_set, dir / "train.logits");
        dump_logits(model, val, dir / "val.logits");
        dump_logits(model, eval, dir / "eval.logits");
        write_manifest(dir / "manifest.txt", run_manifest(spec, cfg));
        std::cout << "trained alpha=" << fmt_g(alpha) << " -> " << dir.string() << '\n';
    }
    return 0;
}

// ----------------------------------------------------------------- eval

struct EvalArgs {
    std::string input;
    std::string score = "msp";
    std::string val;
    std::vector<double> risks{0.01, 0.05, 0.1};
    std::vector<double> coverages{0.5, 0.75, 0.9, 1.0};
    std::string out;
    int precision = 6;
};

int cmd_eval(const EvalArgs& args) {
    NormConfig norm;
    if (args.score == "maxlogit-norm") {
        if (args.val.empty()) {
            std::cerr << "error: --score maxlogit-norm requires --val for the p search\n";
            return kExitUsage;
        }
        const auto val_records = load_logit_records(args.val);
        norm.p = search_p(val_records, norm).p;
    }

    const auto records = load_logit_records(args.input);
    const auto preds = score_records(records, args.score, norm);
    const auto curve = rc_curve(preds);
    const long n = static_cast<long>(preds.size());
    long errors = 0;
    for (const auto& p : preds) {
        if (!p.correct) {
            ++errors;
        }
    }

    std::ostringstream report;
    report << "score=" << args.score << '\n';
    if (args.score == "maxlogit-norm") {
        report << "p=" << fmt_g(norm.p) << '\n';
    }
    report << "samples=" << n << '\n';
    report << "error_rate=" << fmt(static_cast<double>(errors) / static_cast<double>(n),
                                   args.precision)
           << '\n';
    report << "aurc=" << fmt(aurc(curve, n), args.precision) << '\n';
    for (double r : args.risks) {
        report << "coverage@risk=" << fmt_g(r) << '=' << fmt(coverage_at_risk(curve, r),
                                                             args.precision)
               << '\n';
    }
    for (double c : args.coverages) {
        report << "risk@coverage=" << fmt_g(c) << '=' << fmt(risk_at_coverage(curve, c),
                                                             args.precision)
               << '\n';
    }

    std::cout << report.str();
    if (!args.out.empty()) {
        open_out(args.out) << report.str();
    }
    return 0;
}

// ------------------------------------------------------------------- rc

struct RcArgs {
    std::vector<std::string> inputs;
    std::string out_dir = ".";
    std::string score = "msp";
    std::string svg = "rc.svg";
    bool log_x = false;
    bool deterministic = false;
    int precision = 6;
};

int cmd_rc(const RcArgs& args) {
    fs::create_directories(args.out_dir);
    LineChart chart("risk vs coverage", "coverage", "risk (%)");
    chart.set_log_x(args.log_x);
    chart.set_timestamp(!args.deterministic);

    for (const auto& input : args.inputs) {
        const auto records = load_logit_records(input);
        const auto preds = score_records(records, args.score, NormConfig{});
        const auto curve = rc_curve(preds);
        const fs::path table =
            fs::path(args.out_dir) / (fs::path(input).stem().string() + ".rc.csv");
        write_rc_table(table, curve, args.precision);

        std::vector<std::pair<double, double>> points;
        for (const auto& pt : curve.points) {
            points.emplace_back(pt.coverage, 100.0 * pt.risk);
        }
        chart.add_series(legend_label(input), std::move(points));
    }
    chart.write(fs::path(args.out_dir) / args.svg);
    return 0;
}

// -------------------------------------------------------------- analyze

struct AnalyzeArgs {
    std::string input;
    std::string shift_input;
    std::string out_dir = ".";
    double window = 0.05;
    double vprime_window = 0.2;
    double clip_sigmas = 2.0;
    double norm_p = 2.0;
    double coverage = 0.1;
    long min_count = 10;
    bool deterministic = false;
    int precision = 6;
};

void write_window_points(std::ofstream& out, const std::vector<WindowPoint>& points,
                         const std::string& group, int precision) {
    for (const auto& pt : points) {
        out << group << ',' << fmt(pt.center, precision) << ',' << fmt(pt.mean, precision) << ','
            << fmt(pt.stddev, precision) << ',' << pt.count << '\n';
    }
}

int cmd_analyze(const AnalyzeArgs& args) {
    fs::create_directories(args.out_dir);
    const fs::path out_dir(args.out_dir);
    const auto records = load_logit_records(args.input);
    const auto preds = score_records_msp(records, args.norm_p);

    // Fig. 5 analogue: v_max conditioned on pi_max, split by correctness.
    const auto vmax = conditional_vmax_stats(preds, args.window, args.window, args.min_count);
    {
        auto out = open_out(out_dir / "vmax_conditional.csv");
        out << "group,center,mean,std,count\n";
        write_window_points(out, vmax.correct, "correct", args.precision);
        write_window_points(out, vmax.incorrect, "incorrect", args.precision);
    }
    {
        LineChart chart("max logit given max probability", "pi_max", "v_max");
        chart.set_timestamp(!args.deterministic);
        auto to_points = [](const std::vector<WindowPoint>& pts) {
            std::vector<std::pair<double, double>> xy;
            for (const auto& pt : pts) {
                xy.emplace_back(pt.center, pt.mean);
            }
            return xy;
        };
        if (!vmax.correct.empty()) {
            chart.add_series("correct", to_points(vmax.correct));
        }
        if (!vmax.incorrect.empty()) {
            chart.add_series("incorrect", to_points(vmax.incorrect));
        }
        if (!vmax.correct.empty() || !vmax.incorrect.empty()) {
            chart.write(out_dir / "vmax_conditional.svg");
        }
    }

    // Fig. 14 analogue: v'_max given v_max within MSP bins.
    const std::vector<std::pair<double, double>> bins{{0.3, 0.5}, {0.5, 0.7}, {0.7, 0.9},
                                                      {0.9, 1.0}};
    const auto vprime = conditional_vprime_stats(preds, bins, args.vprime_window,
                                                 args.clip_sigmas);
    {
        auto out = open_out(out_dir / "vprime_conditional.csv");
        out << "bin_lo,bin_hi,center,mean,std,count,clipped\n";
        for (const auto& bin : vprime) {
            for (const auto& pt : bin.points) {
                out << fmt(bin.msp_bin.first, args.precision) << ','
                    << fmt(bin.msp_bin.second, args.precision) << ','
                    << fmt(pt.center, args.precision) << ',' << fmt(pt.mean, args.precision)
                    << ',' << fmt(pt.stddev, args.precision) << ',' << pt.count << ','
                    << bin.clipped << '\n';
            }
        }
    }

    // Fig. 13 analogue: sorted-logit rank profile.
    const auto profile = sorted_logit_profile(records, args.norm_p);
    {
        auto out = open_out(out_dir / "logit_profile.csv");
        out << "rank,mean_v,std_v,mean_vp,std_vp,mean_exp,std_exp\n";
        for (std::size_t r = 0; r < profile.size(); ++r) {
            const auto& row = profile[r];
            out << r << ',' << fmt(row.mean_v, args.precision) << ','
                << fmt(row.std_v, args.precision) << ',' << fmt(row.mean_vp, args.precision)
                << ',' << fmt(row.std_vp, args.precision) << ',' << fmt(row.mean_exp,
                                                                        args.precision)
                << ',' << fmt(row.std_exp, args.precision) << '\n';
        }
    }

    // Fig. 6 analogue: per-source acceptance table at pooled coverage.
    if (!args.shift_input.empty()) {
        const auto shift_records = load_logit_records(args.shift_input);
        const auto shift_preds = score_records_msp(shift_records, args.norm_p);
        const auto report = shift_mix_report(preds, shift_preds, args.coverage);
        auto out = open_out(out_dir / "shift_mix.csv");
        out << "source,samples,errors,error_rate\n";
        for (const auto& [tag, stats] : report) {
            out << tag << ',' << stats.count << ',' << stats.errors << ','
                << fmt(stats.error_rate, args.precision) << '\n';
        }
    }

    write_manifest(out_dir / "analyze_manifest.txt",
                   {{"input", args.input},
                    {"shift_input", args.shift_input},
                    {"window", fmt_g(args.window)},
                    {"vprime_window", fmt_g(args.vprime_window)},
                    {"clip_sigmas", fmt_g(args.clip_sigmas)},
                    {"norm_p", fmt_g(args.norm_p)},
                    {"coverage", fmt_g(args.coverage)},
                    {"min_count", std::to_string(args.min_count)}});
    return 0;
}

// ---------------------------------------------------------------- repro

struct ReproArgs {
    std::string out_dir = "repro-out";
    int seeds = 5;
    unsigned threads = 0;
    std::uint64_t base_seed = 1;
    bool quick = false;
};

int cmd_repro(const ReproArgs& args) {
    ReproConfig cfg = args.quick ? ReproConfig::quick_defaults() : ReproConfig::defaults();
    cfg.seeds = args.seeds;
    cfg.threads = args.threads;
    cfg.base_seed = args.base_seed;

    const auto result = run_repro(cfg);
    fs::create_directories(args.out_dir);
    const fs::path verdict_path = fs::path(args.out_dir) / "verdicts.txt";
    write_verdicts(verdict_path, result, cfg.quick);
    if (args.seeds < 2) {
        std::ofstream(verdict_path, std::ios::app)
            << "note: single-seed run, verdicts are low-confidence\n";
    }

    std::ifstream in(verdict_path);
    std::cout << in.rdbuf();
    if (!result.all_pass() && !cfg.quick) {
        return kExitCriteria;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"selective-classification toolkit"};
    app.require_subcommand(1);
    app.set_config("--config", "", "flat key=value configuration file; flags override");

    TrainArgs train_args;
    auto* train_cmd = app.add_subcommand("train", "train models and dump logits");
    train_cmd->add_option("--alphas", train_args.alphas, "label-smoothing coefficients")
        ->delimiter(',');
    train_cmd->add_option("--seed", train_args.seed, "base dataset seed");
    train_cmd->add_option("--out", train_args.out, "output directory")->required();
    train_cmd->add_option("--n-train", train_args.n_train);
    train_cmd->add_option("--n-val", train_args.n_val);
    train_cmd->add_option("--n-eval", train_args.n_eval);
    train_cmd->add_option("--classes", train_args.classes);
    train_cmd->add_option("--radius", train_args.radius);
    train_cmd->add_option("--sigma", train_args.sigma);
    train_cmd->add_option("--epochs", train_args.epochs);
    train_cmd->add_option("--batch-size", train_args.batch_size);
    train_cmd->add_option("--lr", train_args.learning_rate);
    train_cmd->add_option("--momentum", train_args.momentum);
    train_cmd->add_option("--hidden", train_args.hidden, "hidden layer widths")->delimiter(',');

    EvalArgs eval_args;
    auto* eval_cmd = app.add_subcommand("eval", "selective metrics for one logit file");
    eval_cmd->add_option("--input", eval_args.input, "logit file")->required();
    eval_cmd->add_option("--score", eval_args.score)
        ->check(CLI::IsMember({"msp", "entropy", "doctor", "energy", "maxlogit-norm"}));
    eval_cmd->add_option("--val", eval_args.val, "validation logit file for the p search");
    eval_cmd->add_option("--risks", eval_args.risks)->delimiter(',');
    eval_cmd->add_option("--coverages", eval_args.coverages)->delimiter(',');
    eval_cmd->add_option("--out", eval_args.out, "also write the report here");
    eval_cmd->add_option("--precision", eval_args.precision);

    RcArgs rc_args;
    auto* rc_cmd = app.add_subcommand("rc", "risk-coverage tables and overlay plot");
    rc_cmd->add_option("--inputs", rc_args.inputs, "logit files")->required()->delimiter(',');
    rc_cmd->add_option("--out-dir", rc_args.out_dir);
    rc_cmd->add_option("--score", rc_args.score)
        ->check(CLI::IsMember({"msp", "entropy", "doctor", "energy"}));
    rc_cmd->add_option("--svg", rc_args.svg, "overlay file name");
    rc_cmd->add_flag("--log-x", rc_args.log_x, "log-scale coverage axis");
    rc_cmd->add_flag("--deterministic", rc_args.deterministic, "omit the SVG timestamp");
    rc_cmd->add_option("--precision", rc_args.precision);

    AnalyzeArgs analyze_args;
    auto* analyze_cmd = app.add_subcommand("analyze", "conditional logit diagnostics");
    analyze_cmd->add_option("--input", analyze_args.input, "logit file")->required();
    analyze_cmd->add_option("--shift-input", analyze_args.shift_input,
                            "shifted logit file for the mix table");
    analyze_cmd->add_option("--out-dir", analyze_args.out_dir);
    analyze_cmd->add_option("--window", analyze_args.window, "pi_max window width");
    analyze_cmd->add_option("--vprime-window", analyze_args.vprime_window);
    analyze_cmd->add_option("--clip-sigmas", analyze_args.clip_sigmas);
    analyze_cmd->add_option("--norm-p", analyze_args.norm_p);
    analyze_cmd->add_option("--coverage", analyze_args.coverage, "pooled mix coverage");
    analyze_cmd->add_option("--min-count", analyze_args.min_count);
    analyze_cmd->add_flag("--deterministic", analyze_args.deterministic);
    analyze_cmd->add_option("--precision", analyze_args.precision);

    ReproArgs repro_args;
    auto* repro_cmd = app.add_subcommand("repro", "end-to-end directional reproduction");
    repro_cmd->add_option("--out-dir", repro_args.out_dir);
    repro_cmd->add_option("--seeds", repro_args.seeds)->check(CLI::PositiveNumber);
    repro_cmd->add_option("--threads", repro_args.threads);
    repro_cmd->add_option("--base-seed", repro_args.base_seed);
    repro_cmd->add_flag("--quick", repro_args.quick, "reduced sizes, advisory verdicts");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (train_cmd->parsed()) {
            return cmd_train(train_args);
        }
        if (eval_cmd->parsed()) {
            return cmd_eval(eval_args);
        }
        if (rc_cmd->parsed()) {
            return cmd_rc(rc_args);
        }
        if (analyze_cmd->parsed()) {
            return cmd_analyze(analyze_args);
        }
        if (repro_cmd->parsed()) {
            return cmd_repro(repro_args);
        }
    } catch (const InvalidInput& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const TrainingDiverged& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitTraining;
    } catch (const FormatError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    }
    return 0;
}
