// Copyright 2026 The mallineage Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "commands.hpp"

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "mallineage/errors.hpp"
#include "mallineage/eval.hpp"
#include "mallineage/infer.hpp"
#include "mallineage/io.hpp"
#include "mallineage/lineage.hpp"
#include "mallineage/synthgen.hpp"
#include "mallineage/timemodel.hpp"

namespace mallineage::cli {

namespace {

namespace fs = std::filesystem;

struct Common {
    std::optional<std::uint64_t> seed;
    std::size_t threads = 0;
    bool quiet = false;
};

void add_common(CLI::App* cmd, Common& common)
{
    cmd->add_option("--seed", common.seed, "Seed for all randomness; overrides seeds in config files");
    cmd->add_option("--threads", common.threads, "Worker thread cap (0 = all cores)")->default_val(0);
    cmd->add_flag("--quiet,-q", common.quiet, "Suppress diagnostics");
}

class Log {
public:
    Log(std::ostream& err, const bool& quiet) : err_(err), quiet_(quiet) {}

    template <typename... Args>
    void operator()(const Args&... args) const
    {
        if (quiet_) {
            return;
        }
        ((err_ << args), ...);
        err_ << '\n';
    }

private:
    std::ostream& err_;
    const bool& quiet_;
};

std::vector<double> parse_levels(const std::string& text)
{
    std::vector<double> levels;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            levels.push_back(std::stod(item, &used));
            if (used != item.size()) {
                throw std::invalid_argument(item);
            }
        } catch (const std::exception&) {
            throw ConfigError("bad obfuscation level \"" + item + "\"");
        }
    }
    if (levels.empty()) {
        throw ConfigError("--levels needs at least one value");
    }
    return levels;
}

void ensure_dir(const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create " + dir.string() + ": " + ec.message());
    }
}

Window training_window(const std::vector<LabeledTimeExample>& examples)
{
    TimeTick lo = examples.front().true_creation;
    TimeTick hi = lo;
    for (const auto& e : examples) {
        lo = std::min(lo, e.true_creation);
        hi = std::max(hi, e.true_creation);
        if (e.first_seen) {
            hi = std::max(hi, *e.first_seen);
        }
    }
    return {lo, std::max(hi, lo + 1)};
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Malware lineage reconstruction by joint inference of creation times and lineage"};
    app.name(args.empty() ? "mallineage" : fs::path(args.front()).filename().string());
    app.require_subcommand(1);

    Common common;
    const Log log(err, common.quiet);

    // gen
    auto* gen = app.add_subcommand("gen", "Generate a synthetic family with ground truth");
    std::string gen_config;
    std::string gen_out;
    gen->add_option("--config", gen_config, "Generator config JSON")->required();
    gen->add_option("--out-dir", gen_out, "Directory for dataset.json, truth.json, training.json")->required();
    add_common(gen, common);

    // learn
    auto* learn = app.add_subcommand("learn", "Learn time-model parameters from labeled examples");
    std::string learn_train;
    std::string learn_out;
    learn->add_option("--train", learn_train, "Training-set JSON (list of labeled examples)")->required();
    learn->add_option("--out", learn_out, "Output params JSON")->required();
    add_common(learn, common);

    // infer
    auto* infer = app.add_subcommand("infer", "Infer the most probable lineage of a dataset");
    std::string infer_dataset;
    std::string infer_time_params;
    std::string infer_lineage_params;
    std::string infer_config;
    std::string infer_out;
    std::string infer_dot;
    infer->add_option("--dataset", infer_dataset, "Dataset JSON")->required();
    infer->add_option("--time-params", infer_time_params, "Time-model params JSON")->required();
    infer->add_option("--lineage-params", infer_lineage_params, "Lineage-model params JSON")->required();
    infer->add_option("--config", infer_config, "Inference config JSON")->required();
    infer->add_option("--out", infer_out, "Output lineage JSON")->required();
    infer->add_option("--dot", infer_dot, "Also write a Graphviz DOT file");
    add_common(infer, common);

    // eval
    auto* eval = app.add_subcommand("eval", "Score a predicted lineage against ground truth");
    std::string eval_pred;
    std::string eval_truth;
    std::string eval_out;
    eval->add_option("--pred", eval_pred, "Predicted lineage JSON")->required();
    eval->add_option("--truth", eval_truth, "Ground-truth lineage JSON")->required();
    eval->add_option("--out", eval_out, "Output metrics JSON")->required();
    add_common(eval, common);

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Run the obfuscation sweep experiment");
    std::string sweep_gen;
    std::string sweep_levels = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0";
    std::size_t sweep_reps = 10;
    std::string sweep_time_params;
    std::string sweep_lineage_params;
    std::string sweep_config;
    std::string sweep_out;
    bool sweep_timing = false;
    sweep->add_option("--gen", sweep_gen, "Base generator config JSON")->required();
    sweep->add_option("--levels", sweep_levels, "Comma-separated obfuscation fractions")->capture_default_str();
    sweep->add_option("--reps", sweep_reps, "Families per level")->capture_default_str();
    sweep->add_option("--time-params", sweep_time_params, "Time-model params JSON")->required();
    sweep->add_option("--lineage-params", sweep_lineage_params, "Lineage-model params JSON")->required();
    sweep->add_option("--config", sweep_config, "Inference config JSON")->required();
    sweep->add_option("--out-dir", sweep_out, "Directory for sweep.csv and summary.json")->required();
    sweep->add_flag("--timing", sweep_timing, "Record wall time in the seconds column (breaks byte-identical reruns)");
    add_common(sweep, common);

    std::vector<const char*> argv;
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::Success& e) {
        return app.exit(e, out, err) == 0 ? kOk : kUsage;
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kUsage;
    }

    try {
        if (gen->parsed()) {
            auto config = gen_config_from_json(read_json_file(gen_config));
            if (common.seed) {
                config.seed = *common.seed;
            }
            const auto family = generate_family(config);
            const fs::path dir(gen_out);
            ensure_dir(dir);
            save_dataset(family.dataset, dir / "dataset.json");
            save_lineage(LineageDocument{family.truth, family.times, std::nullopt}, dir / "truth.json");
            write_json_file(training_to_json(family.labels), dir / "training.json");
            log("generated ", family.dataset.size(), " binaries, ", family.truth.edges.size(), " edges into ",
                dir.string());
        } else if (learn->parsed()) {
            const auto examples = training_from_json(read_json_file(learn_train));
            if (examples.empty()) {
                throw EmptyTrainingSet("training set is empty");
            }
            const auto params = learn_params(examples, training_window(examples));
            write_json_file(params_to_json(params), learn_out);
            log("learned p_obf=", params.p_obf, " p_empty=", params.p_empty, " p_lag=", params.p_lag, " from ",
                examples.size(), " examples");
        } else if (infer->parsed()) {
            const auto dataset = load_dataset(infer_dataset);
            const auto time_params = params_from_json(read_json_file(infer_time_params), dataset.window());
            const auto lineage_params = lineage_params_from_json(read_json_file(infer_lineage_params));
            auto config = infer_config_from_json(read_json_file(infer_config));
            if (common.seed) {
                config.seed = *common.seed;
            }
            config.threads = common.threads;
            const auto result = infer_lineage(dataset, time_params, lineage_params, config);
            save_lineage(LineageDocument{result.lineage, result.times, result.joint_log_score}, infer_out);
            if (!infer_dot.empty()) {
                write_text_file(export_dot(result.lineage, result.times), infer_dot);
            }
            for (std::size_t r = 0; r < result.restarts.size(); ++r) {
                const auto& s = result.restarts[r];
                log("restart ", r, ": rounds=", s.iterations, " score=", s.final_score);
            }
            log("best joint log-score ", result.joint_log_score, ", ", result.lineage.edges.size(), " edges, ",
                result.lineage.roots.size(), " roots");
        } else if (eval->parsed()) {
            const auto pred = load_lineage(eval_pred);
            const auto truth = load_lineage(eval_truth);
            auto metrics = score_lineage(pred.graph, truth.graph);
            if (pred.times && truth.times) {
                metrics.mean_abs_time_error = time_error(*pred.times, *truth.times);
            }
            write_json_file(metrics_to_json(metrics), eval_out);
            log("precision=", metrics.edge_precision, " recall=", metrics.edge_recall, " f1=", metrics.edge_f1);
        } else if (sweep->parsed()) {
            auto base = gen_config_from_json(read_json_file(sweep_gen));
            auto time_params = params_from_json(read_json_file(sweep_time_params), base.window);
            const auto lineage_params = lineage_params_from_json(read_json_file(sweep_lineage_params));
            auto config = infer_config_from_json(read_json_file(sweep_config));
            if (common.seed) {
                base.seed = *common.seed;
                config.seed = *common.seed;
            }
            const auto levels = parse_levels(sweep_levels);
            SweepOptions options;
            options.threads = common.threads;
            options.record_timing = sweep_timing;
            const auto report =
                obfuscation_sweep(base, levels, time_params, lineage_params, config, sweep_reps, options);
            const fs::path dir(sweep_out);
            ensure_dir(dir);
            write_text_file(sweep_csv(report), dir / "sweep.csv");
            const auto summary = sweep_summary(report);
            write_json_file(summary, dir / "summary.json");
            log("sweep: ", report.rows.size(), " rows; mean delta >= 0 at ",
                summary["levels_with_nonnegative_delta"].get<std::size_t>(), " of ", levels.size(), " levels");
        }
    } catch (const InfeasibleError& e) {
        err << "error: " << e.what() << '\n';
        return kInfeasible;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kDataError;
    }
    return kOk;
}

} // namespace mallineage::cli
