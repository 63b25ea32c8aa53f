#pragma once

// Reinforcement-learning operator selection: state featurization, the policy
// and value networks, PPO with generalized advantage estimation, training
// with checkpoints, and the RL-AVNS search driver.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <exception>
#include <functional>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "construct.hpp"
#include "gen.hpp"
#include "io.hpp"
#include "model.hpp"
#include "nn/network.hpp"
#include "operators.hpp"
#include "search.hpp"

namespace vrpmtw {

// ---------------------------------------------------------------- features

inline constexpr int kNodeFeatures = 19;
inline constexpr int kGlobalFeatures = 5;

using StateFeatures = nn::NetInput;

/// Search history the global features are computed from.
struct History {
    double initial_length = 0.0;
    double best_length = 0.0;
    double previous_length = 0.0;
    bool improved = true;
    int step = 0;
    int steps_total = 1;

    static History start(double length, int steps_total) {
        return {length, length, length, true, 0, std::max(1, steps_total)};
    }

    /// Advances past one operator application that produced `new_length`.
    void advance(double current_length, double new_length) {
        improved = new_length < best_length - kImproveEps;
        best_length = std::min(best_length, new_length);
        previous_length = current_length;
        ++step;
    }
};

/// Node rows (depot first, then customers by id) with columns
///   0-1   x, y / 100
///   2     demand / capacity
///   3-8   (open, close) of up to three windows, relative to the horizon
///   9-11  window presence mask
///   12    arrival time relative to the horizon
///   13-16 predecessor and successor coordinates / 100
///   17    fitness / horizon length
///   18    depot flag
/// and global features
///   current / initial length, best / initial, previous / current,
///   improvement flag, step / total steps.
inline StateFeatures encode_state(const Instance& inst, const Solution& sol, const Schedule& sched,
                                  const History& hist) {
    if (!sched.feasible || !covers_exactly_once(inst, sol))
        throw InfeasibleError("encode_state: schedule is not feasible");
    const int n = inst.size();
    const double open = inst.horizon().open, span = inst.horizon().close - inst.horizon().open;
    StateFeatures s{nn::Matrix(n + 1, kNodeFeatures), std::vector<double>(kGlobalFeatures)};
    nn::Matrix& m = s.nodes;

    m(0, 0) = inst.depot_x() / 100.0;
    m(0, 1) = inst.depot_y() / 100.0;
    m(0, 18) = 1.0;

    for (std::size_t r = 0; r < sol.routes.size(); ++r) {
        const Route& route = sol.routes[r];
        const RouteSchedule& rs = sched.routes[r];
        for (std::size_t i = 0; i < route.size(); ++i) {
            const Customer& c = inst.customer(route[i]);
            const int row = c.id;
            m(row, 0) = c.x / 100.0;
            m(row, 1) = c.y / 100.0;
            m(row, 2) = c.demand / inst.capacity();
            for (std::size_t w = 0; w < c.windows.size() && w < 3; ++w) {
                m(row, 3 + 2 * static_cast<int>(w)) = (c.windows[w].open - open) / span;
                m(row, 4 + 2 * static_cast<int>(w)) = (c.windows[w].close - open) / span;
                m(row, 9 + static_cast<int>(w)) = 1.0;
            }
            m(row, 12) = (rs.visits[i].arrival - open) / span;
            const int pred = i == 0 ? 0 : route[i - 1];
            const int succ = i + 1 == route.size() ? 0 : route[i + 1];
            m(row, 13) = inst.node_x(pred) / 100.0;
            m(row, 14) = inst.node_y(pred) / 100.0;
            m(row, 15) = inst.node_x(succ) / 100.0;
            m(row, 16) = inst.node_y(succ) / 100.0;
            m(row, 17) = fitness(c.windows, rs.visits[i].arrival).value_or(0.0) / span;
        }
    }

    const double cur = sched.routes.empty() ? 0.0 : total_length(inst, sol);
    auto ratio = [](double a, double b) { return b > 0.0 ? a / b : 1.0; };
    s.global[0] = ratio(cur, hist.initial_length);
    s.global[1] = ratio(hist.best_length, hist.initial_length);
    s.global[2] = ratio(hist.previous_length, cur);
    s.global[3] = hist.improved ? 1.0 : 0.0;
    s.global[4] = static_cast<double>(hist.step) / hist.steps_total;
    return s;
}

inline StateFeatures encode_state(const Instance& inst, const Solution& sol, const History& hist) {
    return encode_state(inst, sol, evaluate(inst, sol), hist);
}

// ---------------------------------------------------------------- networks

inline nn::ArchConfig policy_arch(nn::ArchConfig arch = {}) {
    arch.node_features = kNodeFeatures;
    arch.global_features = kGlobalFeatures;
    arch.outputs = kOperatorCount;
    return arch;
}

inline nn::ArchConfig value_arch(nn::ArchConfig arch = {}) {
    arch = policy_arch(arch);
    arch.outputs = 1;
    return arch;
}

/// Policy network theta and value network phi. Each has its own encoder.
struct Agent {
    nn::Network policy;
    nn::Network value;

    static Agent create(const nn::ArchConfig& arch, std::uint64_t seed) {
        Rng prng(seed, "policy-init"), vrng(seed, "value-init");
        return {nn::Network(policy_arch(arch), prng), nn::Network(value_arch(arch), vrng)};
    }
};

/// Action distribution over the operator catalog.
inline std::vector<double> policy_forward(const nn::Network& policy, const StateFeatures& s,
                                          nn::Network::Cache* cache = nullptr) {
    if (!policy.finite()) throw Error("policy parameters are not finite");
    return nn::softmax(policy.forward(s, cache));
}

inline double value_forward(const nn::Network& value, const StateFeatures& s, nn::Network::Cache* cache = nullptr) {
    if (!value.finite()) throw Error("value parameters are not finite");
    return value.forward(s, cache)[0];
}

// ---------------------------------------------------------------- rewards

inline constexpr double kRewardClip = 10.0;
inline constexpr double kRuntimePenalty = 100.0;

inline double reward(double prev_length, double new_length, double t_run) {
    if (!(t_run >= 0.0)) throw std::invalid_argument("reward: t_run must be non-negative");
    return std::clamp(prev_length - new_length - kRuntimePenalty * t_run, -kRewardClip, kRewardClip);
}

struct Step {
    StateFeatures state;
    int action = 0;
    double log_prob = 0.0;
    double reward = 0.0;
    double value = 0.0;
    double t_run = 0.0;
};

struct Trajectory {
    std::vector<Step> steps;

    std::vector<double> rewards() const {
        std::vector<double> r;
        r.reserve(steps.size());
        for (const Step& s : steps) r.push_back(s.reward);
        return r;
    }

    std::vector<double> values() const {
        std::vector<double> v;
        v.reserve(steps.size());
        for (const Step& s : steps) v.push_back(s.value);
        return v;
    }
};

/// G_t = sum_l gamma^l r_{t+l}
inline std::vector<double> compute_returns(std::span<const double> rewards, double gamma) {
    std::vector<double> g(rewards.size());
    double acc = 0.0;
    for (std::size_t t = rewards.size(); t-- > 0;) g[t] = acc = rewards[t] + gamma * acc;
    return g;
}

inline std::vector<double> compute_returns(const Trajectory& tr, double gamma) {
    return compute_returns(tr.rewards(), gamma);
}

/// A_t = sum_l (gamma lambda)^l delta_{t+l}, with delta_t = r_t + gamma V_{t+1} - V_t.
/// `values` holds V(s_0)..V(s_{T-1}); V(s_T) is `bootstrap`.
inline std::vector<double> compute_gae(std::span<const double> rewards, std::span<const double> values, double gamma,
                                       double lambda, double bootstrap = 0.0) {
    if (values.size() != rewards.size()) throw std::invalid_argument("compute_gae: size mismatch");
    std::vector<double> a(rewards.size());
    double acc = 0.0, next_v = bootstrap;
    for (std::size_t t = rewards.size(); t-- > 0;) {
        const double delta = rewards[t] + gamma * next_v - values[t];
        a[t] = acc = delta + gamma * lambda * acc;
        next_v = values[t];
    }
    return a;
}

inline std::vector<double> compute_gae(const Trajectory& tr, double gamma, double lambda) {
    return compute_gae(tr.rewards(), tr.values(), gamma, lambda);
}

// ---------------------------------------------------------------- PPO

inline double clipped_surrogate(double ratio, double advantage, double eps) {
    return std::min(ratio * advantage, std::clamp(ratio, 1.0 - eps, 1.0 + eps) * advantage);
}

/// One training sample with its targets.
struct Sample {
    const StateFeatures* state = nullptr;
    int action = 0;
    double old_log_prob = 0.0;
    double advantage = 0.0;
    double target = 0.0;  // return G_t
};

struct LossInfo {
    double loss = 0.0;
    double mean_ratio = 0.0;
    double clip_fraction = 0.0;
    double entropy = 0.0;
};

/// Negative mean clipped surrogate, minus `entropy_coef` times the mean policy
/// entropy. With `grad` the parameter gradients of the loss are accumulated
/// into the network.
inline LossInfo policy_loss(nn::Network& policy, std::span<const Sample> batch, double eps, bool grad,
                            double entropy_coef = 0.0) {
    LossInfo info;
    if (batch.empty()) return info;
    const double inv = 1.0 / static_cast<double>(batch.size());
    nn::Network::Cache cache;
    std::vector<double> d_logits;
    for (const Sample& s : batch) {
        const std::vector<double> logits = policy.forward(*s.state, &cache);
        const std::vector<double> lp = nn::log_softmax(logits);
        const double ratio = std::exp(lp[static_cast<std::size_t>(s.action)] - s.old_log_prob);
        double entropy = 0.0;
        for (double l : lp) entropy -= std::exp(l) * l;
        info.loss -= (clipped_surrogate(ratio, s.advantage, eps) + entropy_coef * entropy) * inv;
        info.mean_ratio += ratio * inv;
        info.entropy += entropy * inv;
        const bool clipped = ratio < 1.0 - eps || ratio > 1.0 + eps;
        if (clipped) info.clip_fraction += inv;
        if (!grad) continue;
        d_logits.assign(logits.size(), 0.0);
        // The surrogate follows ratio * A unless the clipped branch is the minimum.
        const bool active = !clipped || ratio * s.advantage < std::clamp(ratio, 1.0 - eps, 1.0 + eps) * s.advantage;
        if (active) {
            const double d_logp = -ratio * s.advantage * inv;
            for (std::size_t k = 0; k < logits.size(); ++k) d_logits[k] = -std::exp(lp[k]) * d_logp;
            d_logits[static_cast<std::size_t>(s.action)] += d_logp;
        }
        // dH/dz_k = -p_k (log p_k + H)
        if (entropy_coef != 0.0)
            for (std::size_t k = 0; k < logits.size(); ++k)
                d_logits[k] += entropy_coef * inv * std::exp(lp[k]) * (lp[k] + entropy);
        if (active || entropy_coef != 0.0) policy.backward(cache, d_logits);
    }
    return info;
}

/// Mean squared error of V(s_t) against the return targets.
inline double value_loss(nn::Network& value, std::span<const Sample> batch, bool grad) {
    if (batch.empty()) return 0.0;
    const double inv = 1.0 / static_cast<double>(batch.size());
    nn::Network::Cache cache;
    double loss = 0.0;
    for (const Sample& s : batch) {
        const double v = value.forward(*s.state, &cache)[0];
        const double err = v - s.target;
        loss += err * err * inv;
        if (grad) {
            const double d = 2.0 * err * inv;
            value.backward(cache, std::span<const double>(&d, 1));
        }
    }
    return loss;
}

struct TrainConfig {
    double learning_rate = 1e-3;
    double gamma = 0.99;
    double lambda = 0.95;
    double clip_eps = 0.2;
    int epochs = 4;
    int episodes = 200;
    int steps = 50;
    std::uint64_t seed = 0;
    GenConfig instances{};
    nn::ArchConfig arch{};
    /// Charge a fixed cost per evaluated move instead of wall-clock time, so
    /// that rewards (and therefore training) are reproducible.
    bool virtual_clock = true;
    double seconds_per_move = 5e-8;
    /// Standardize advantages over each update batch.
    bool normalize_advantages = true;
    double entropy_coef = 0.01;
    /// Episodes collected per PPO update.
    int episodes_per_update = 8;

    void validate() const {
        if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must be in (0, 1]");
        if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("lambda must be in [0, 1]");
        if (!(clip_eps > 0.0)) throw std::invalid_argument("clip epsilon must be positive");
        if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
        if (epochs < 1 || episodes < 0 || steps < 1 || episodes_per_update < 1) throw std::invalid_argument("epochs, episodes and steps must be positive");
        if (!(seconds_per_move >= 0.0)) throw std::invalid_argument("seconds per move must be non-negative");
    }
};

struct UpdateStats {
    double policy_loss = 0.0;
    double value_loss = 0.0;
    double mean_ratio = 0.0;
    double clip_fraction = 0.0;
};

/// K full-batch epochs of Adam on the clipped surrogate (ascent) and the value
/// loss (descent). Statistics are averaged over the epochs.
inline UpdateStats ppo_update(Agent& agent, nn::Adam& policy_opt, nn::Adam& value_opt,
                              std::span<const Trajectory> trajectories, const TrainConfig& cfg) {
    std::vector<Sample> batch;
    for (const Trajectory& tr : trajectories) {
        const std::vector<double> g = compute_returns(tr, cfg.gamma);
        const std::vector<double> a = compute_gae(tr, cfg.gamma, cfg.lambda);
        for (std::size_t t = 0; t < tr.steps.size(); ++t)
            batch.push_back({&tr.steps[t].state, tr.steps[t].action, tr.steps[t].log_prob, a[t], g[t]});
    }
    if (batch.empty()) throw std::invalid_argument("ppo_update: no samples");
    if (cfg.normalize_advantages && batch.size() > 1) {
        double mean = 0.0, var = 0.0;
        for (const Sample& s : batch) mean += s.advantage / static_cast<double>(batch.size());
        for (const Sample& s : batch) var += (s.advantage - mean) * (s.advantage - mean) / static_cast<double>(batch.size());
        const double sd = std::sqrt(var) + 1e-8;
        for (Sample& s : batch) s.advantage = (s.advantage - mean) / sd;
    }

    UpdateStats st;
    for (int k = 0; k < cfg.epochs; ++k) {
        agent.policy.zero_grad();
        const LossInfo pl = policy_loss(agent.policy, batch, cfg.clip_eps, true, cfg.entropy_coef);
        agent.value.zero_grad();
        const double vl = value_loss(agent.value, batch, true);
        if (!agent.policy.grads_finite() || !agent.value.grads_finite())
            throw Error("ppo_update: non-finite gradient");
        policy_opt.step(agent.policy);
        value_opt.step(agent.value);
        st.policy_loss += pl.loss / cfg.epochs;
        st.value_loss += vl / cfg.epochs;
        st.mean_ratio += pl.mean_ratio / cfg.epochs;
        st.clip_fraction += pl.clip_fraction / cfg.epochs;
    }
    return st;
}

// ---------------------------------------------------------------- training

struct LogRow {
    int episode = 0;
    double mean_return = 0.0;
    double policy_loss = 0.0;
    double value_loss = 0.0;
    double clip_fraction = 0.0;
};

inline std::string training_log_csv(std::span<const LogRow> rows) {
    std::ostringstream os;
    os.precision(17);
    os << "episode,mean_return,policy_loss,value_loss,clip_fraction\n";
    for (const LogRow& r : rows)
        os << r.episode << ',' << r.mean_return << ',' << r.policy_loss << ',' << r.value_loss << ','
           << r.clip_fraction << '\n';
    return os.str();
}

/// Everything needed to continue training exactly where it stopped.
struct TrainState {
    TrainConfig config;
    Agent agent;
    nn::Adam policy_opt;
    nn::Adam value_opt;
    int episodes_done = 0;
    std::vector<LogRow> log;

    static TrainState create(const TrainConfig& cfg) {
        cfg.validate();
        TrainState s{cfg, Agent::create(cfg.arch, cfg.seed), {}, {}, 0, {}};
        s.policy_opt = nn::Adam(s.agent.policy, cfg.learning_rate);
        s.value_opt = nn::Adam(s.agent.value, cfg.learning_rate);
        return s;
    }
};

/// Runs one policy-driven episode of `steps` operator applications.
inline Trajectory collect_episode(const Agent& agent, const Instance& inst, int steps, Rng& rng,
                                  const TrainConfig& cfg) {
    Solution x = greedy_construct(inst);
    double cur = total_length(inst, x);
    History hist = History::start(cur, steps);
    Trajectory tr;
    for (int t = 0; t < steps; ++t) {
        Step step;
        step.state = encode_state(inst, x, hist);
        const std::vector<double> probs = policy_forward(agent.policy, step.state);
        step.action = static_cast<int>(rng.categorical(probs));
        step.log_prob = std::log(probs[static_cast<std::size_t>(step.action)]);
        step.value = value_forward(agent.value, step.state);

        OperatorStats stats;
        const auto t0 = std::chrono::steady_clock::now();
        Solution next = apply_operator(inst, x, static_cast<OperatorId>(step.action), rng, &stats);
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        step.t_run = cfg.virtual_clock ? static_cast<double>(stats.moves_evaluated) * cfg.seconds_per_move : wall;

        const double len = total_length(inst, next);
        step.reward = reward(cur, len, step.t_run);
        hist.advance(cur, len);
        x = std::move(next);
        cur = len;
        tr.steps.push_back(std::move(step));
    }
    return tr;
}

/// Instance of training episode `e`.
inline Instance episode_instance(const TrainConfig& cfg, int episode) {
    GenConfig g = cfg.instances;
    g.seed = derive_seed(cfg.seed, "episode-instance", static_cast<std::uint64_t>(episode));
    return generate(g);
}

/// One PPO update: collects the next `episodes_per_update` episodes (each on
/// a fresh instance from a greedy start, concurrently with independent
/// streams) and updates both networks on them. Returns one log row per
/// episode.
inline std::vector<LogRow> train_update(TrainState& s) {
    const int first = s.episodes_done;
    const int count = std::min(std::max(1, s.config.episodes_per_update), s.config.episodes - first);
    if (count <= 0) return {};
    std::vector<Trajectory> trs(static_cast<std::size_t>(count));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
    auto collect = [&](int i) {
        try {
            const Instance inst = episode_instance(s.config, first + i);
            Rng rng(s.config.seed, "episode", static_cast<std::uint64_t>(first + i));
            trs[static_cast<std::size_t>(i)] = collect_episode(s.agent, inst, s.config.steps, rng, s.config);
        } catch (...) {
            errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
    };
    {
        std::vector<std::jthread> pool;
        for (int i = 1; i < count; ++i) pool.emplace_back(collect, i);
        collect(0);
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    const UpdateStats u = ppo_update(s.agent, s.policy_opt, s.value_opt, trs, s.config);
    std::vector<LogRow> rows;
    for (int i = 0; i < count; ++i) {
        double ret = 0.0;
        for (const Step& st : trs[static_cast<std::size_t>(i)].steps) ret += st.reward;
        rows.push_back({first + i, ret, u.policy_loss, u.value_loss, u.clip_fraction});
    }
    s.log.insert(s.log.end(), rows.begin(), rows.end());
    s.episodes_done += count;
    return rows;
}

/// Trains until `config.episodes` episodes are done. `on_episode` is called
/// for every logged episode.
inline void train(TrainState& s, const std::function<void(const LogRow&)>& on_episode = {}) {
    while (s.episodes_done < s.config.episodes)
        for (const LogRow& row : train_update(s))
            if (on_episode) on_episode(row);
}

inline TrainState train(const TrainConfig& cfg) {
    TrainState s = TrainState::create(cfg);
    train(s);
    return s;
}

// ---------------------------------------------------------------- checkpoints

// Layout: 8-byte magic "VRPMTWCK", u32 format version, u64 header length,
// JSON header, then the tensors listed in the header as little-endian doubles.

inline constexpr char kCheckpointMagic[8] = {'V', 'R', 'P', 'M', 'T', 'W', 'C', 'K'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {

inline Json to_json(const nn::ArchConfig& a) {
    return {{"node_features", a.node_features}, {"global_features", a.global_features}, {"d_model", a.d_model},
            {"heads", a.heads},           {"ff_hidden", a.ff_hidden},           {"decoder_hidden", a.decoder_hidden}};
}

inline nn::ArchConfig arch_from_json(const Json& j) {
    nn::ArchConfig a;
    a.node_features = j.at("node_features");
    a.global_features = j.at("global_features");
    a.d_model = j.at("d_model");
    a.heads = j.at("heads");
    a.ff_hidden = j.at("ff_hidden");
    a.decoder_hidden = j.at("decoder_hidden");
    return a;
}

inline Json to_json(const TrainConfig& c) {
    const GenConfig& g = c.instances;
    return {{"learning_rate", c.learning_rate},
            {"gamma", c.gamma},
            {"lambda", c.lambda},
            {"clip_eps", c.clip_eps},
            {"epochs", c.epochs},
            {"episodes", c.episodes},
            {"steps", c.steps},
            {"seed", c.seed},
            {"virtual_clock", c.virtual_clock},
            {"seconds_per_move", c.seconds_per_move},
            {"normalize_advantages", c.normalize_advantages},
            {"entropy_coef", c.entropy_coef},
            {"episodes_per_update", c.episodes_per_update},
            {"arch", to_json(c.arch)},
            {"instances",
             {{"n_customers", g.n_customers},
              {"window_mode", std::string(to_string(g.window_mode))},
              {"capacity", g.capacity},
              {"horizon", {{"open", g.horizon.open}, {"close", g.horizon.close}}},
              {"service_time", g.service_time},
              {"demand_mean", g.demand_mean},
              {"demand_std", g.demand_std},
              {"demand_min", g.demand_min},
              {"demand_max", g.demand_max}}}};
}

inline TrainConfig train_config_from_json(const Json& j) {
    TrainConfig c;
    c.learning_rate = j.at("learning_rate");
    c.gamma = j.at("gamma");
    c.lambda = j.at("lambda");
    c.clip_eps = j.at("clip_eps");
    c.epochs = j.at("epochs");
    c.episodes = j.at("episodes");
    c.steps = j.at("steps");
    c.seed = j.at("seed");
    c.virtual_clock = j.at("virtual_clock");
    c.seconds_per_move = j.at("seconds_per_move");
    c.normalize_advantages = j.at("normalize_advantages");
    c.entropy_coef = j.at("entropy_coef");
    c.episodes_per_update = j.at("episodes_per_update");
    c.arch = arch_from_json(j.at("arch"));
    const Json& g = j.at("instances");
    c.instances.n_customers = g.at("n_customers");
    const auto mode = parse_window_mode(g.at("window_mode").get<std::string>());
    if (!mode) throw StructuralError("checkpoint: unknown window mode");
    c.instances.window_mode = *mode;
    c.instances.capacity = g.at("capacity");
    c.instances.horizon = {g.at("horizon").at("open"), g.at("horizon").at("close")};
    c.instances.service_time = g.at("service_time");
    c.instances.demand_mean = g.at("demand_mean");
    c.instances.demand_std = g.at("demand_std");
    c.instances.demand_min = g.at("demand_min");
    c.instances.demand_max = g.at("demand_max");
    return c;
}

inline void put_u64(std::ostream& os, std::uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    os.write(b, 8);
}

inline std::uint64_t get_u64(std::istream& is) {
    unsigned char b[8];
    if (!is.read(reinterpret_cast<char*>(b), 8)) throw StructuralError("checkpoint: truncated file");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

/// Every tensor of the training state, in serialization order.
template <class State>
auto checkpoint_tensors(State& s) {
    using M = std::conditional_t<std::is_const_v<State>, const nn::Matrix, nn::Matrix>;
    std::vector<std::pair<std::string, M*>> out;
    for (auto& p : s.agent.policy.params()) out.emplace_back("policy." + p.name, &p.value);
    for (auto& p : s.agent.value.params()) out.emplace_back("value." + p.name, &p.value);
    auto adam = [&](auto& opt, const std::string& prefix) {
        for (std::size_t i = 0; i < opt.first_moment().size(); ++i)
            out.emplace_back(prefix + ".m" + std::to_string(i), &opt.first_moment()[i]);
        for (std::size_t i = 0; i < opt.second_moment().size(); ++i)
            out.emplace_back(prefix + ".v" + std::to_string(i), &opt.second_moment()[i]);
    };
    adam(s.policy_opt, "adam.policy");
    adam(s.value_opt, "adam.value");
    return out;
}

}  // namespace detail

inline void save_checkpoint(const std::filesystem::path& path, const TrainState& s) {
    Json header;
    header["format"] = "vrpmtw-checkpoint";
    header["config"] = detail::to_json(s.config);
    header["seed"] = s.config.seed;
    header["episodes_done"] = s.episodes_done;
    header["adam_steps"] = {s.policy_opt.steps(), s.value_opt.steps()};
    Json log = Json::array();
    for (const LogRow& r : s.log)
        log.push_back({r.episode, r.mean_return, r.policy_loss, r.value_loss, r.clip_fraction});
    header["log"] = log;
    Json tensors = Json::array();
    const auto list = detail::checkpoint_tensors(s);
    for (const auto& [name, m] : list) tensors.push_back({{"name", name}, {"rows", m->rows}, {"cols", m->cols}});
    header["tensors"] = tensors;

    std::ostringstream os(std::ios::binary);
    os.write(kCheckpointMagic, 8);
    const std::uint32_t ver = kCheckpointVersion;
    for (int i = 0; i < 4; ++i) os.put(static_cast<char>((ver >> (8 * i)) & 0xFF));
    const std::string text = header.dump();
    detail::put_u64(os, text.size());
    os.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const auto& [name, m] : list)
        for (double v : m->data) detail::put_u64(os, std::bit_cast<std::uint64_t>(v));

    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write checkpoint " + path.string());
    const std::string bytes = os.str();
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw Error("failed writing checkpoint " + path.string());
}

inline TrainState load_checkpoint(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot read checkpoint " + path.string());
    char magic[8];
    if (!f.read(magic, 8) || !std::equal(magic, magic + 8, kCheckpointMagic))
        throw StructuralError("not a checkpoint file: " + path.string());
    unsigned char vb[4];
    if (!f.read(reinterpret_cast<char*>(vb), 4)) throw StructuralError("checkpoint: truncated file");
    const std::uint32_t ver = vb[0] | (vb[1] << 8) | (vb[2] << 16) | (static_cast<std::uint32_t>(vb[3]) << 24);
    if (ver != kCheckpointVersion) throw StructuralError("unsupported checkpoint version " + std::to_string(ver));
    const std::uint64_t len = detail::get_u64(f);
    std::string text(len, '\0');
    if (!f.read(text.data(), static_cast<std::streamsize>(len))) throw StructuralError("checkpoint: truncated file");

    return detail::parse_guard([&] {
        const Json header = Json::parse(text);
        TrainState s = TrainState::create(detail::train_config_from_json(header.at("config")));
        s.episodes_done = header.at("episodes_done");
        s.policy_opt.set_steps(header.at("adam_steps").at(0));
        s.value_opt.set_steps(header.at("adam_steps").at(1));
        for (const Json& r : header.at("log")) s.log.push_back({r.at(0), r.at(1), r.at(2), r.at(3), r.at(4)});
        const auto list = detail::checkpoint_tensors(s);
        const Json& tensors = header.at("tensors");
        if (tensors.size() != list.size()) throw StructuralError("checkpoint: tensor list does not match the architecture");
        for (std::size_t i = 0; i < list.size(); ++i) {
            nn::Matrix& m = *list[i].second;
            if (tensors[i].at("name") != list[i].first || tensors[i].at("rows") != m.rows || tensors[i].at("cols") != m.cols)
                throw StructuralError("checkpoint: tensor " + list[i].first + " has the wrong shape");
            for (double& v : m.data) v = std::bit_cast<double>(detail::get_u64(f));
        }
        return s;
    });
}

// ---------------------------------------------------------------- RL-AVNS

/// Policy-driven VNS. Each iteration encodes the working solution, samples an
/// operator (shake included) from the policy and applies it to the working
/// solution; the best solution seen is returned.
inline SearchResult rl_avns(const Instance& inst, const Solution& x0, const SearchBudget& budget,
                            const nn::Network& policy) {
    detail::SearchState st(inst, x0, budget, "rl_avns");
    if (policy.arch().outputs != kOperatorCount || policy.arch().node_features != kNodeFeatures ||
        policy.arch().global_features != kGlobalFeatures)
        throw std::invalid_argument("rl_avns: policy architecture does not match the state layout");
    Rng rng(budget.seed, "rl-avns");
    Rng shake_rng(budget.seed, "rl-avns-shake");
    Solution cur = st.best();
    double cur_len = st.best_length();
    History hist = History::start(cur_len, budget.max_iterations);
    while (!st.exhausted()) {
        const std::vector<double> probs = policy_forward(policy, encode_state(inst, cur, hist));
        const auto op = static_cast<OperatorId>(rng.categorical(probs));
        cur = apply_operator(inst, cur, op, shake_rng, nullptr, budget.shake_mode);
        const double len = total_length(inst, cur);
        hist.advance(cur_len, len);
        cur_len = len;
        st.record(op, cur, len);
    }
    return st.finish();
}

/// A policy whose output layer is zero: uniform over the catalog.
inline nn::Network uniform_policy(const nn::ArchConfig& arch = {}) {
    Rng rng(0, "uniform-policy");
    return nn::Network(policy_arch(arch), rng, true);
}

}  // namespace vrpmtw
