// vrpmtw: generate instances, solve them, train the operator-selection policy
// and benchmark the methods against each other.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "vrpmtw/bench.hpp"

namespace fs = std::filesystem;
using namespace vrpmtw;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Common {
    std::uint64_t seed = 0;
    int budget = 2000;
    double time_limit = 0.0;
    std::string checkpoint;
    std::string out = ".";
};

void add_common(CLI::App* app, Common& c, bool with_checkpoint) {
    app->add_option("--seed", c.seed, "Random seed")->capture_default_str();
    app->add_option("--budget", c.budget, "Iteration budget (operator applications)")->capture_default_str()->check(CLI::NonNegativeNumber);
    app->add_option("--time-limit", c.time_limit, "Wall-clock limit in seconds (0 = none)")->capture_default_str()->check(CLI::NonNegativeNumber);
    if (with_checkpoint) app->add_option("--checkpoint", c.checkpoint, "Policy checkpoint file");
    app->add_option("--out", c.out, "Output directory or file")->capture_default_str();
}

WindowMode mode_or_usage(const std::string& s) {
    const auto m = parse_window_mode(s);
    if (!m) throw UsageError("invalid window mode \"" + s + "\" (expected 1tw, 2tw, 3tw or mix)");
    return *m;
}

std::string join_argv(int argc, char** argv) {
    std::string s;
    for (int i = 0; i < argc; ++i) s += (i ? " " : "") + std::string(argv[i]);
    return s;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<Instance> load_instance_dir(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw Error("instance directory not found: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::vector<Instance> out;
    for (const auto& f : files) {
        const Json j = read_json_file(f);
        // Skip solutions and manifests living in the same directory.
        if (j.is_object() && j.contains("customers")) out.push_back(instance_from_json(j));
    }
    if (out.empty()) throw Error("no instance files in " + dir.string());
    return out;
}

std::vector<Method> parse_methods(const std::string& list) {
    std::vector<Method> out;
    std::stringstream ss(list);
    for (std::string item; std::getline(ss, item, ',');) {
        const auto m = parse_method(item);
        if (!m) throw UsageError("unknown method \"" + item + "\"");
        out.push_back(*m);
    }
    if (out.empty()) throw UsageError("no methods given");
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"VRPMTW solver toolkit"};
    app.require_subcommand(1);
    const std::string cmdline = join_argv(argc, argv);

    // gen
    Common gen_c;
    std::string gen_mode = "3tw";
    int gen_n = 10, gen_count = 1;
    auto* gen = app.add_subcommand("gen", "Generate random instances");
    add_common(gen, gen_c, false);
    gen->add_option("--mode", gen_mode, "Window mode: 1tw, 2tw, 3tw or mix")->capture_default_str();
    gen->add_option("--n", gen_n, "Customers per instance")->capture_default_str()->check(CLI::PositiveNumber);
    gen->add_option("--count", gen_count, "Number of instances (seeds seed..seed+count-1)")->capture_default_str()->check(CLI::PositiveNumber);

    // solve
    Common solve_c;
    std::string solve_instance, solve_method = "vns";
    auto* solve = app.add_subcommand("solve", "Solve one instance");
    add_common(solve, solve_c, true);
    solve->add_option("instance", solve_instance, "Instance JSON file")->required();
    solve->add_option("--method", solve_method, "greedy, vns, rvns, avns, rl-avns or exact")->capture_default_str();

    // train
    Common train_c;
    TrainConfig tcfg;
    std::string train_mode = "3tw", train_log;
    auto* trn = app.add_subcommand("train", "Train the operator-selection policy");
    add_common(trn, train_c, true);
    trn->add_option("--mode", train_mode, "Window mode of the training instances")->capture_default_str();
    trn->add_option("--n", tcfg.instances.n_customers, "Customers per training instance")->capture_default_str()->check(CLI::PositiveNumber);
    trn->add_option("--episodes", tcfg.episodes, "Total episodes")->capture_default_str()->check(CLI::NonNegativeNumber);
    trn->add_option("--steps", tcfg.steps, "Steps per episode")->capture_default_str()->check(CLI::PositiveNumber);
    trn->add_option("--episodes-per-update", tcfg.episodes_per_update, "Episodes collected per PPO update")->capture_default_str()->check(CLI::PositiveNumber);
    trn->add_option("--entropy", tcfg.entropy_coef, "Entropy bonus coefficient")->capture_default_str();
    trn->add_option("--d-model", tcfg.arch.d_model, "Embedding dimension")->capture_default_str();
    trn->add_option("--heads", tcfg.arch.heads, "Attention heads")->capture_default_str();
    trn->add_option("--ff-hidden", tcfg.arch.ff_hidden, "Encoder feed-forward width")->capture_default_str();
    trn->add_option("--hidden", tcfg.arch.decoder_hidden, "Decoder hidden width")->capture_default_str();
    trn->add_option("--log", train_log, "Training log CSV (default: <out>.csv)");
    train_c.out = "policy.ckpt";

    // bench
    Common bench_c;
    std::string bench_dir, bench_methods = "greedy,vns,rvns,avns";
    int bench_seeds = 1, shake_seeds = 0, workers = 0;
    auto* bench = app.add_subcommand("bench", "Compare methods over an instance directory");
    add_common(bench, bench_c, true);
    bench->add_option("instances", bench_dir, "Directory of instance JSON files")->required();
    bench->add_option("--methods", bench_methods, "Comma-separated methods")->capture_default_str();
    bench->add_option("--seeds", bench_seeds, "Search seeds per instance (seed..seed+k-1)")->capture_default_str()->check(CLI::PositiveNumber);
    bench->add_option("--shake-study", shake_seeds, "Also compare fitness-guided and random shaking over this many seeds")->check(CLI::NonNegativeNumber);
    bench->add_option("--workers", workers, "Worker threads (default: VRPMTW_WORKERS or hardware)")->check(CLI::NonNegativeNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    const auto t0 = std::chrono::steady_clock::now();
    RunManifest man;
    fs::path manifest_path;
    man.command_line = cmdline;
    man.started_at = utc_timestamp();

    try {
        if (*gen) {
            GenConfig g;
            g.window_mode = mode_or_usage(gen_mode);
            g.n_customers = gen_n;
            fs::create_directories(gen_c.out);
            man.seed = gen_c.seed;
            man.config = {{"command", "gen"}, {"mode", gen_mode}, {"n", gen_n}, {"count", gen_count}};
            for (int i = 0; i < gen_count; ++i) {
                g.seed = gen_c.seed + static_cast<std::uint64_t>(i);
                const Instance inst = generate(g);
                const fs::path file = fs::path(gen_c.out) / (inst.name() + ".json");
                write_json_file(file, to_json(inst));
                man.rows.push_back({{"file", file.string()}, {"seed", g.seed}});
            }
            manifest_path = fs::path(gen_c.out) / "manifest.json";
        } else if (*solve) {
            const auto method = parse_method(solve_method);
            if (!method) throw UsageError("unknown method \"" + solve_method + "\"");
            const Instance inst = load_instance(solve_instance);
            std::optional<nn::Network> policy;
            if (*method == Method::RlAvns) {
                if (solve_c.checkpoint.empty()) throw UsageError("rl-avns requires --checkpoint");
                policy = load_checkpoint(solve_c.checkpoint).agent.policy;
            }
            const SearchBudget budget{.max_iterations = solve_c.budget, .time_limit = solve_c.time_limit, .seed = solve_c.seed};
            const ExactOptions exact{.time_limit = solve_c.time_limit > 0 ? solve_c.time_limit : 60.0};
            const RunResult r = run_method(*method, inst, budget, policy ? &*policy : nullptr, exact);

            fs::create_directories(solve_c.out);
            const std::string stem = inst.name() + "." + std::string(to_string(*method));
            write_json_file(fs::path(solve_c.out) / (stem + ".solution.json"), to_json(r.solution, inst.name(), &r.metrics));
            write_text_file(fs::path(solve_c.out) / (stem + ".trace.csv"), r.trace.to_csv());
            man.seed = solve_c.seed;
            man.config = {{"command", "solve"}, {"method", solve_method}, {"budget", solve_c.budget},
                          {"time_limit", solve_c.time_limit}, {"checkpoint", solve_c.checkpoint}};
            man.rows.push_back(metrics_row(inst.name(), *method, solve_c.seed, r.metrics));
            manifest_path = fs::path(solve_c.out) / (stem + ".manifest.json");
        } else if (*trn) {
            tcfg.instances.window_mode = mode_or_usage(train_mode);
            tcfg.seed = train_c.seed;
            TrainState state = train_c.checkpoint.empty() ? TrainState::create(tcfg) : load_checkpoint(train_c.checkpoint);
            if (!train_c.checkpoint.empty()) state.config.episodes = std::max(state.config.episodes, tcfg.episodes);
            const fs::path ckpt = train_c.out;
            const fs::path log = train_log.empty() ? fs::path(ckpt.string() + ".csv") : fs::path(train_log);
            train(state, [&](const LogRow& row) {
                std::cerr << "episode " << row.episode << " return " << row.mean_return << '\n';
            });
            save_checkpoint(ckpt, state);
            write_text_file(log, training_log_csv(state.log));
            man.seed = state.config.seed;
            man.config = {{"command", "train"}, {"train", detail::to_json(state.config)}, {"checkpoint", ckpt.string()},
                          {"log", log.string()}};
            man.rows.push_back({{"episodes_done", state.episodes_done}});
            manifest_path = ckpt.string() + ".manifest.json";
        } else if (*bench) {
            const std::vector<Instance> instances = load_instance_dir(bench_dir);
            BenchConfig cfg;
            cfg.methods = parse_methods(bench_methods);
            cfg.seeds.clear();
            for (int i = 0; i < bench_seeds; ++i) cfg.seeds.push_back(bench_c.seed + static_cast<std::uint64_t>(i));
            cfg.budget = {.max_iterations = bench_c.budget, .time_limit = bench_c.time_limit};
            cfg.exact.time_limit = bench_c.time_limit > 0 ? bench_c.time_limit : 60.0;
            cfg.workers = workers > 0 ? workers : worker_count();
            std::optional<nn::Network> policy;
            if (std::find(cfg.methods.begin(), cfg.methods.end(), Method::RlAvns) != cfg.methods.end()) {
                if (bench_c.checkpoint.empty()) throw UsageError("rl-avns requires --checkpoint");
                policy = load_checkpoint(bench_c.checkpoint).agent.policy;
            }
            const std::vector<BenchRow> rows = run_bench(instances, cfg, policy ? &*policy : nullptr);
            const auto summary = summarize(rows);
            fs::create_directories(bench_c.out);
            write_text_file(fs::path(bench_c.out) / "runs.csv", rows_csv(rows));
            write_text_file(fs::path(bench_c.out) / "summary.csv", summary_csv(summary));
            write_text_file(fs::path(bench_c.out) / "summary.txt", summary_text(summary));
            std::cout << summary_text(summary);
            man.seed = bench_c.seed;
            man.config = {{"command", "bench"},  {"instances", bench_dir},      {"methods", bench_methods},
                          {"seeds", bench_seeds}, {"budget", bench_c.budget},  {"time_limit", bench_c.time_limit},
                          {"checkpoint", bench_c.checkpoint}, {"shake_study", shake_seeds}};
            for (const BenchRow& r : rows) man.rows.push_back(metrics_row(r.instance, r.method, r.seed, r.metrics));
            manifest_path = fs::path(bench_c.out) / "manifest.json";
            if (shake_seeds > 0) {
                const Instance& ref = instances.front();
                GenConfig g;
                g.n_customers = ref.size();
                g.seed = bench_c.seed;
                const ShakeStudy st = shake_study(g, shake_seeds, cfg.budget, cfg.workers);
                write_text_file(fs::path(bench_c.out) / "shake_study.csv", shake_study_csv(st));
                std::cout << "shake study (" << shake_seeds << " seeds, N=" << g.n_customers << "): fitness-guided "
                          << st.mean_fitness() << ", random-removal " << st.mean_random() << ", wins "
                          << st.fitness_wins << "/" << st.random_wins << "/" << st.ties << " -> " << st.direction()
                          << '\n';
            }
        }
        man.wall_seconds = seconds_since(t0);
        const Json mj = man.to_json();
        write_json_file(manifest_path, mj);
        std::cout << mj.dump(2) << '\n';
        return 0;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
