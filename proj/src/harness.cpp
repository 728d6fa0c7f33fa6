#include "cmdp/harness.hpp"

#include <atomic>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "cmdp/diagnostics.hpp"

namespace cmdp {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

SlopeFit fit_decay_slope(std::span<const double> avg_gap, int window, long lo, long hi) {
    if (window < 1) throw std::invalid_argument("window must be >= 1");
    const long len = long(avg_gap.size());
    if (len < 4L * window) throw std::invalid_argument("sequence shorter than 4 * window");
    if (hi <= 0 || hi > len) hi = len;

    SlopeFit fit;
    std::vector<double> xs, ys;
    for (long n = 1; n <= hi; n *= 2) {
        if (n < lo || n < window) continue;
        for (long k = n - window + 1; k <= n; ++k) {
            const double g = avg_gap[k - 1];
            if (g <= 0.0) {
                fit.degenerate = true;
                fit.slope = -std::numeric_limits<double>::infinity();
                fit.intercept = std::numeric_limits<double>::quiet_NaN();
                return fit;
            }
            xs.push_back(std::log(double(k)));
            ys.push_back(std::log(g));
        }
    }
    if (xs.size() < 2) throw std::invalid_argument("no usable checkpoints in [lo, hi]");

    const double m = double(xs.size());
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
    }
    const double mx = sx / m, my = sy / m;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double e = ys[i] - (fit.intercept + fit.slope * xs[i]);
        ss_res += e * e;
    }
    fit.r2 = syy > 0 ? 1.0 - ss_res / syy : 1.0;
    return fit;
}

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

CConvention c_convention_from_string(const std::string& s) {
    if (s == "sqrt_ratio") return CConvention::SqrtRatio;
    if (s == "ratio") return CConvention::Ratio;
    throw ConfigError("c_convention must be \"sqrt_ratio\" or \"ratio\"");
}

ExperimentConfig parse_config_json(const json& doc) {
    ExperimentConfig cfg;
    try {
        const json& inst = doc.at("instance");
        cfg.model_kind = model_kind_from_string(inst.at("model_kind").get<std::string>());
        cfg.instance_seed = inst.value("seed", std::uint64_t(0));
        cfg.dims.num_states = inst.at("num_states").get<int>();
        cfg.dims.num_actions = inst.at("num_actions").get<int>();
        cfg.dims.num_contexts = inst.at("num_contexts").get<int>();
        cfg.dims.horizon = inst.at("horizon").get<int>();
        cfg.dims.feat_dim = inst.at("feat_dim").get<int>();
        cfg.class_size = inst.value("class_size", 1);
        cfg.reward_class_size = inst.value("reward_class_size", cfg.class_size);
        cfg.mix_eps = inst.value("mix_eps", 0.0);
        cfg.instance_file = inst.value("file", std::string());

        const json& agent = doc.at("agent");
        cfg.agent.episodes = agent.at("episodes").get<int>();
        cfg.agent.delta = agent.value("delta", 0.1);
        cfg.agent.gamma1 = agent.value("gamma1", 1.0);
        cfg.agent.gamma2 = agent.value("gamma2", 1.0);
        cfg.agent.bonus_scale = agent.value("bonus_scale", 1.0);
        cfg.agent.oracle_mode = agent.value("oracle_mode", false);
        cfg.agent.diagnostics_every = agent.value("diagnostics_every", 0);
        cfg.agent.c_convention =
            c_convention_from_string(agent.value("c_convention", std::string("sqrt_ratio")));

        const json& run = doc.at("run");
        cfg.seeds = run.at("seeds").get<std::vector<std::uint64_t>>();
        cfg.out_dir = run.value("out_dir", std::string("out"));
        cfg.slope_window = run.value("slope_window", 8);
        cfg.slope_lo = run.value("slope_lo", 64L);
        cfg.slope_hi = run.value("slope_hi", 0L);

        if (doc.contains("check")) {
            const json& check = doc.at("check");
            cfg.deterministic_trials = check.value("deterministic_trials", 200);
            cfg.check_episodes = check.value("check_episodes", std::vector<int>{8, 64, 512});
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config field error: ") + e.what());
    }
    cfg.dims.validate();
    if (cfg.agent.episodes < 1) throw ConfigError("agent.episodes must be >= 1");
    if (cfg.agent.delta <= 0.0 || cfg.agent.delta >= 1.0)
        throw ConfigError("agent.delta must lie in (0,1)");
    if (cfg.agent.bonus_scale < 0.0) throw ConfigError("agent.bonus_scale must be >= 0");
    if (cfg.seeds.empty()) throw ConfigError("run.seeds must not be empty");
    if (cfg.class_size < 1) throw ConfigError("instance.class_size must be >= 1");
    if (cfg.mix_eps < 0.0 || cfg.mix_eps >= 1.0) throw ConfigError("instance.mix_eps outside [0,1)");
    if (cfg.slope_window < 1) throw ConfigError("run.slope_window must be >= 1");
    return cfg;
}

} // namespace

ExperimentConfig parse_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config_json(doc);
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string run_log_to_csv(const RunLog& log) {
    std::string out = "schema_version,episode,context,gap,avg_gap,mean_tbonus,mean_rbonus,mle_correct\n";
    for (const EpisodeRecord& e : log.log) {
        out += "1,";
        out += std::to_string(e.episode) + ',' + std::to_string(e.context) + ',';
        out += fmt17(e.gap) + ',' + fmt17(e.avg_gap) + ',';
        out += fmt17(e.mean_tbonus) + ',' + fmt17(e.mean_rbonus) + ',';
        out += e.mle_correct ? "1\n" : "0\n";
    }
    return out;
}

int worker_pool_size() {
    if (const char* env = std::getenv("CMDP_LAB_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? int(hw) : 1;
}

namespace {

GeneratedInstance make_instance(const ExperimentConfig& cfg) {
    return generate_instance(cfg.instance_seed, cfg.dims, cfg.model_kind, cfg.class_size,
                             cfg.reward_class_size, cfg.mix_eps);
}

RunLog run_one(const GeneratedInstance& gen, const ExperimentConfig& cfg, std::uint64_t seed) {
    AgentConfig agent = cfg.agent;
    agent.seed = seed;
    if (cfg.model_kind == ModelKind::ModelI)
        return run_algorithm1(gen.instance, gen.transition_class, agent);
    return run_algorithm2(gen.instance, gen.transition_class, gen.reward_class, agent);
}

void apply_overrides(ExperimentConfig& cfg, const std::vector<std::string>& overrides) {
    for (std::size_t i = 0; i < overrides.size(); ++i) {
        const std::string& flag = overrides[i];
        const auto need_value = [&]() -> const std::string& {
            if (i + 1 >= overrides.size()) throw ConfigError("missing value for " + flag);
            return overrides[++i];
        };
        if (flag == "--seed")
            cfg.seeds = {std::uint64_t(std::strtoull(need_value().c_str(), nullptr, 10))};
        else if (flag == "--episodes")
            cfg.agent.episodes = int(std::strtol(need_value().c_str(), nullptr, 10));
        else if (flag == "--out")
            cfg.out_dir = need_value();
        else
            throw ConfigError("unknown option: " + flag);
    }
    if (cfg.agent.episodes < 1) throw ConfigError("agent.episodes must be >= 1");
}

} // namespace

int cli_run(const std::string& config_path, const std::vector<std::string>& overrides) {
    ExperimentConfig cfg;
    try {
        cfg = load_config(config_path);
        apply_overrides(cfg, overrides);
        if (!cfg.instance_file.empty())
            throw ConfigError("run always generates the instance; instance.file is check-only");
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    }

    try {
        const GeneratedInstance gen = make_instance(cfg);
        fs::create_directories(cfg.out_dir);

        const int num_seeds = int(cfg.seeds.size());
        std::vector<RunLog> logs(num_seeds);
        std::vector<std::exception_ptr> errors(num_seeds);
        std::atomic<int> next{0};
        const int workers = std::min(worker_pool_size(), num_seeds);
        const auto work = [&]() {
            for (int i = next.fetch_add(1); i < num_seeds; i = next.fetch_add(1)) {
                try {
                    logs[i] = run_one(gen, cfg, cfg.seeds[i]);
                    std::ofstream out(fs::path(cfg.out_dir) /
                                      ("run_seed" + std::to_string(cfg.seeds[i]) + ".csv"),
                                      std::ios::binary);
                    out << run_log_to_csv(logs[i]);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        };
        if (workers <= 1) {
            work();
        } else {
            std::vector<std::thread> pool;
            for (int t = 0; t < workers; ++t) pool.emplace_back(work);
            for (auto& th : pool) th.join();
        }
        for (auto& err : errors)
            if (err) std::rethrow_exception(err);

        // coordinator writes the shared summary after all workers finish
        ordered_json summary;
        summary["schema_version"] = 1;
        summary["model_kind"] = to_string(cfg.model_kind);
        summary["episodes"] = cfg.agent.episodes;
        summary["instance"] = {{"seed", cfg.instance_seed},
                               {"num_states", cfg.dims.num_states},
                               {"num_actions", cfg.dims.num_actions},
                               {"num_contexts", cfg.dims.num_contexts},
                               {"horizon", cfg.dims.horizon},
                               {"feat_dim", cfg.dims.feat_dim},
                               {"class_size", cfg.class_size},
                               {"reward_class_size", cfg.reward_class_size},
                               {"mix_eps", cfg.mix_eps}};
        summary["bonus_scale"] = cfg.agent.bonus_scale;
        summary["seeds"] = cfg.seeds;

        const int N = cfg.agent.episodes;
        std::vector<double> mean_curve(N, 0.0);
        ordered_json per_seed = ordered_json::array();
        const bool fit_possible = N >= 4 * cfg.slope_window;
        double mean_final = 0.0;
        for (int i = 0; i < num_seeds; ++i) {
            const auto curve = logs[i].avg_gap_sequence();
            for (int n = 0; n < N; ++n) mean_curve[n] += curve[n] / num_seeds;
            ordered_json row;
            row["seed"] = cfg.seeds[i];
            row["final_avg_gap"] = curve.back();
            row["first64_avg_gap"] = curve[std::min<std::size_t>(curve.size(), 64) - 1];
            if (fit_possible) {
                const SlopeFit fit =
                    fit_decay_slope(curve, cfg.slope_window, cfg.slope_lo, cfg.slope_hi);
                row["slope"] = fit.slope;
                row["intercept"] = fit.intercept;
                row["r2"] = fit.r2;
                row["degenerate_fit"] = fit.degenerate;
            }
            int optimism_violations = 0, coverage_violations = 0;
            for (const EpisodeRecord& e : logs[i].log) {
                optimism_violations += e.optimism_violated;
                coverage_violations += e.coverage_violated;
            }
            row["optimism_violations"] = optimism_violations;
            row["coverage_violations"] = coverage_violations;
            row["total_env_steps"] = logs[i].total_env_steps;
            row["csv"] = "run_seed" + std::to_string(cfg.seeds[i]) + ".csv";
            per_seed.push_back(std::move(row));
            mean_final += curve.back() / num_seeds;
        }
        summary["per_seed"] = std::move(per_seed);
        summary["mean_final_avg_gap"] = mean_final;
        if (fit_possible) {
            const SlopeFit fit =
                fit_decay_slope(mean_curve, cfg.slope_window, cfg.slope_lo, cfg.slope_hi);
            summary["slope_mean_curve"] = {{"slope", fit.slope},
                                           {"intercept", fit.intercept},
                                           {"r2", fit.r2},
                                           {"degenerate_fit", fit.degenerate}};
        }
        ordered_json curve_doc;
        curve_doc["episode"] = [&] {
            std::vector<int> ns(N);
            for (int n = 0; n < N; ++n) ns[n] = n + 1;
            return ns;
        }();
        curve_doc["avg_gap"] = mean_curve;
        summary["curve"] = std::move(curve_doc);

        std::ofstream out(fs::path(cfg.out_dir) / "summary.json", std::ios::binary);
        out << summary.dump(2) << '\n';
        std::printf("wrote %d run(s) to %s (mean final avg gap %.6g)\n", num_seeds,
                    cfg.out_dir.c_str(), mean_final);
        return 0;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "runtime failure: %s\n", e.what());
        return 3;
    }
}

int cli_check(const std::string& config_path) {
    ExperimentConfig cfg;
    try {
        cfg = load_config(config_path);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    }

    const auto print_row = [](const CheckReport& rep) {
        std::printf("%-22s n=%-5d h=%-3d measured=%-14.6g bound=%-14.6g %s\n", rep.name.c_str(),
                    rep.n, rep.h, rep.measured, rep.bound, rep.passed ? "pass" : "FAIL");
    };

    try {
        bool deterministic_ok = true;

        if (!cfg.instance_file.empty()) {
            std::ifstream in(cfg.instance_file);
            if (!in) {
                std::fprintf(stderr, "config error: cannot open %s\n", cfg.instance_file.c_str());
                return 2;
            }
            try {
                json doc = json::parse(in);
                InstanceSpec inst = instance_from_json(doc);
                std::printf("%-22s %-46s pass\n", "instance_valid", cfg.instance_file.c_str());
            } catch (const std::exception& e) {
                std::printf("%-22s %-46s FAIL (%s)\n", "instance_valid", cfg.instance_file.c_str(),
                            e.what());
                deterministic_ok = false;
            }
        }

        std::printf("deterministic suite (%d trials, seed %" PRIu64 "):\n", cfg.deterministic_trials,
                    cfg.instance_seed);
        for (const CheckReport& rep :
             deterministic_battery(cfg.instance_seed, cfg.deterministic_trials)) {
            print_row(rep);
            deterministic_ok = deterministic_ok && rep.passed;
        }
        if (!deterministic_ok) return 4;

        if (!cfg.instance_file.empty()) {
            std::printf("probabilistic suite skipped (instance.file given)\n");
            return 0;
        }

        const GeneratedInstance gen = make_instance(cfg);
        const ProbabilisticBatteryResult result =
            probabilistic_battery(gen, cfg.agent, cfg.seeds, cfg.check_episodes);
        std::printf("probabilistic suite (%d seeds, allowed violations %d):\n", result.num_seeds,
                    result.allowed);
        for (const auto& [name, count] : result.violating_seeds)
            std::printf("%-22s violating seeds %d/%d %s\n", name.c_str(), count, result.num_seeds,
                        count <= result.allowed ? "pass" : "FAIL");
        for (const CheckReport& rep : result.failures) print_row(rep);
        return result.within_slack() ? 0 : 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "runtime failure: %s\n", e.what());
        return 3;
    }
}

int cli_plot_data(const std::string& summary_path) {
    std::ifstream in(summary_path);
    if (!in) {
        std::fprintf(stderr, "config error: cannot open %s\n", summary_path.c_str());
        return 2;
    }
    try {
        const json doc = json::parse(in);
        const auto& episodes = doc.at("curve").at("episode");
        const auto& gaps = doc.at("curve").at("avg_gap");
        for (std::size_t i = 0; i < episodes.size(); ++i)
            std::printf("%d\t%s\n", episodes[i].get<int>(),
                        fmt17(gaps[i].get<double>()).c_str());
        return 0;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    }
}

} // namespace cmdp
