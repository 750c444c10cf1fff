#pragma once

#include "surefire/env.hpp"
#include "surefire/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

namespace surefire {

inline Tensor to_tensor(const GafState& s) {
    Tensor t({kWindowSize, kWindowSize, GafState::kChannels});
    for (std::size_t y = 0; y < kWindowSize; ++y)
        for (std::size_t x = 0; x < kWindowSize; ++x)
            for (std::size_t c = 0; c < GafState::kChannels; ++c)
                t.at3(y, x, c) = s.at(y, x, c);
    return t;
}

struct Transition {
    GafState state;
    std::size_t action;
    double reward;
    GafState next_state;
    bool terminal;
};

class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity = 10000) : capacity_(capacity) {}

    void push(Transition t) {
        if (buf_.size() == capacity_) buf_.pop_front();
        buf_.push_back(std::move(t));
    }

    std::size_t size() const { return buf_.size(); }
    std::size_t capacity() const { return capacity_; }
    const Transition& operator[](std::size_t i) const { return buf_[i]; }

    std::vector<const Transition*> sample(std::size_t n, std::mt19937_64& rng) const {
        if (buf_.empty()) throw std::logic_error("sampling an empty replay buffer");
        std::uniform_int_distribution<std::size_t> pick(0, buf_.size() - 1);
        std::vector<const Transition*> out(n);
        for (auto& p : out) p = &buf_[pick(rng)];
        return out;
    }

private:
    std::size_t capacity_;
    std::deque<Transition> buf_;
};

// Ties break to the lowest index.
inline std::size_t argmax_index(const std::vector<double>& v) {
    return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

inline std::size_t epsilon_greedy(const std::vector<double>& q_values, double epsilon,
                                  std::mt19937_64& rng) {
    if (epsilon < 0.0 || epsilon > 1.0) throw std::invalid_argument("epsilon out of [0,1]");
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (coin(rng) < epsilon) {
        std::uniform_int_distribution<std::size_t> pick(0, q_values.size() - 1);
        return pick(rng);
    }
    return argmax_index(q_values);
}

inline std::vector<double> forward_vec(Network& net, const GafState& s) {
    Tensor out = net.forward(to_tensor(s));
    return out.data;
}

inline double huber(double x, double delta = 1.0) {
    double a = std::abs(x);
    return a <= delta ? 0.5 * x * x : delta * (a - 0.5 * delta);
}

// One DQN step: Huber(y - Q(s,a)) averaged over the batch, one Adam update.
inline double dqn_update(const std::vector<const Transition*>& batch, Network& online,
                         Network& target, double gamma, Adam& adam, double reward_scale = 0.01) {
    if (batch.empty()) throw std::invalid_argument("empty batch");
    online.zero_grads();
    double loss = 0.0;
    const double inv_b = 1.0 / static_cast<double>(batch.size());
    for (const Transition* tr : batch) {
        double y = tr->reward * reward_scale;
        if (!tr->terminal) {
            std::vector<double> qn = forward_vec(target, tr->next_state);
            y += gamma * *std::max_element(qn.begin(), qn.end());
        }
        Tensor q = online.forward(to_tensor(tr->state));
        double err = y - q[tr->action];
        loss += huber(err) * inv_b;
        Tensor dout(q.shape);
        dout[tr->action] = -std::clamp(err, -1.0, 1.0) * inv_b;
        online.backward(dout);
    }
    if (!std::isfinite(loss)) throw std::runtime_error("non-finite DQN loss");
    adam.step(online);
    return loss;
}

struct GaeResult {
    std::vector<double> advantages;
    std::vector<double> returns;
};

// delta_t = r_t + g V(s_{t+1}) - V(s_t); A_t = sum (g l)^i delta_{t+i};
// terminal bootstrap value is 0.
inline GaeResult gae_advantages(const std::vector<double>& rewards,
                                const std::vector<double>& values, double gamma, double lambda) {
    if (rewards.size() != values.size()) throw std::invalid_argument("gae length mismatch");
    const std::size_t n = rewards.size();
    GaeResult out;
    out.advantages.assign(n, 0.0);
    out.returns.assign(n, 0.0);
    double acc = 0.0;
    for (std::size_t i = n; i-- > 0;) {
        double next_v = i + 1 < n ? values[i + 1] : 0.0;
        double delta = rewards[i] + gamma * next_v - values[i];
        acc = delta + gamma * lambda * acc;
        out.advantages[i] = acc;
        out.returns[i] = acc + values[i];
    }
    return out;
}

inline double entropy_of(const std::vector<double>& probs) {
    double h = 0.0;
    for (double p : probs)
        if (p > 0.0) h -= p * std::log(p);
    return h;
}

// Clipped-surrogate objective with value and entropy terms; returns the
// total loss to minimize.
inline double ppo_loss(const std::vector<double>& old_logp, const std::vector<double>& new_logp,
                       const std::vector<double>& advantages, double eps_clip,
                       const std::vector<double>& value_pred, const std::vector<double>& returns,
                       double value_coef = 0.5, double entropy_coef = 0.01,
                       const std::vector<double>& entropies = {}) {
    const std::size_t n = old_logp.size();
    if (new_logp.size() != n || advantages.size() != n || value_pred.size() != n ||
        returns.size() != n)
        throw std::invalid_argument("ppo_loss length mismatch");
    if (eps_clip <= 0.0) throw std::invalid_argument("eps_clip must be positive");
    double policy = 0.0, value = 0.0, ent = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double r = std::exp(new_logp[i] - old_logp[i]);
        if (!std::isfinite(r)) throw std::runtime_error("non-finite PPO ratio");
        double a = advantages[i];
        policy += std::min(r * a, std::clamp(r, 1.0 - eps_clip, 1.0 + eps_clip) * a);
        double ve = value_pred[i] - returns[i];
        value += ve * ve;
        if (!entropies.empty()) ent += entropies[i];
    }
    double inv_n = 1.0 / static_cast<double>(n);
    return -policy * inv_n + value_coef * value * inv_n - entropy_coef * ent * inv_n;
}

enum class AgentKind { Constant, Dqn, Ppo };

struct TrainConfig {
    std::size_t episodes = 1300;
    std::uint64_t seed = 0;
    double gamma = 0.9;
    AdamConfig adam{};
    double reward_scale = 0.01;
    // DQN
    std::size_t batch_size = 32;
    std::size_t buffer_capacity = 10000;
    std::size_t sync_period = 100;
    double eps_start = 1.0;
    double eps_end = 0.1;
    // PPO
    std::size_t ppo_epochs = 4;
    std::size_t minibatch = 32;
    double eps_clip = 0.2;
    double gae_lambda = 0.95;
    double value_coef = 0.5;
    double entropy_coef = 0.01;
    // Constant baseline
    SurefireAction constant_action{3, Direction::Buy, 20};
};

struct TrainRun {
    std::vector<double> episode_rewards;
    Network net;
    AgentKind kind = AgentKind::Constant;
    std::uint64_t seed = 0;
};

// Linear 1.0 -> 0.1 over the first half of training, then flat.
inline double epsilon_schedule(std::size_t episode, std::size_t episodes, double eps_start = 1.0,
                               double eps_end = 0.1) {
    std::size_t half = std::max<std::size_t>(1, episodes / 2);
    if (episode >= half) return eps_end;  // exactly, not via the lerp
    double frac = static_cast<double>(episode) / static_cast<double>(half);
    return eps_start + (eps_end - eps_start) * frac;
}

namespace detail {

inline double run_constant_episode(TradingEnv& env, const SurefireAction& action) {
    env.reset();
    double total = 0.0;
    while (!env.done()) total += env.step(action).reward;
    return total;
}

inline double log_softmax_at(const std::vector<double>& logits, std::size_t idx) {
    double mx = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double v : logits) sum += std::exp(v - mx);
    return logits[idx] - mx - std::log(sum);
}

}  // namespace detail

inline TrainRun train(TradingEnv& env, AgentKind kind, const TrainConfig& cfg) {
    TrainRun run;
    run.kind = kind;
    run.seed = cfg.seed;
    std::mt19937_64 rng(cfg.seed);

    if (kind == AgentKind::Constant) {
        for (std::size_t ep = 0; ep < cfg.episodes; ++ep)
            run.episode_rewards.push_back(detail::run_constant_episode(env, cfg.constant_action));
        return run;
    }

    if (kind == AgentKind::Dqn) {
        Network online = build_default_network(kActionCount);
        online.init_he(cfg.seed);
        Network target = online;
        Adam adam(online, cfg.adam);
        ReplayBuffer buffer(cfg.buffer_capacity);
        std::size_t updates = 0;
        for (std::size_t ep = 0; ep < cfg.episodes; ++ep) {
            double eps = epsilon_schedule(ep, cfg.episodes, cfg.eps_start, cfg.eps_end);
            GafState obs = env.reset();
            double total = 0.0;
            while (!env.done()) {
                std::vector<double> q = forward_vec(online, obs);
                std::size_t a = epsilon_greedy(q, eps, rng);
                StepResult res = env.step(action_from_index(a));
                buffer.push({obs, a, res.reward, res.observation, res.done});
                obs = res.observation;
                total += res.reward;
                if (buffer.size() >= cfg.batch_size) {
                    dqn_update(buffer.sample(cfg.batch_size, rng), online, target, cfg.gamma, adam,
                               cfg.reward_scale);
                    if (++updates % cfg.sync_period == 0) target = online;
                    if (!online.params_finite())
                        throw std::runtime_error("non-finite parameters after DQN update");
                }
            }
            run.episode_rewards.push_back(total);
        }
        run.net = std::move(online);
        return run;
    }

    // PPO: one-episode rollouts, clipped-surrogate minibatch epochs.
    Network net = build_default_network(kActionCount + 1);  // logits + value head
    net.init_he(cfg.seed);
    Adam adam(net, cfg.adam);
    for (std::size_t ep = 0; ep < cfg.episodes; ++ep) {
        std::vector<GafState> states;
        std::vector<std::size_t> actions;
        std::vector<double> old_logp, rewards, values;
        GafState obs = env.reset();
        double total = 0.0;
        while (!env.done()) {
            std::vector<double> out = forward_vec(net, obs);
            std::vector<double> logits(out.begin(), out.begin() + kActionCount);
            std::vector<double> probs = softmax(logits);
            std::discrete_distribution<std::size_t> pick(probs.begin(), probs.end());
            std::size_t a = pick(rng);
            StepResult res = env.step(action_from_index(a));
            states.push_back(obs);
            actions.push_back(a);
            old_logp.push_back(detail::log_softmax_at(logits, a));
            rewards.push_back(res.reward * cfg.reward_scale);
            values.push_back(out[kActionCount]);
            obs = res.observation;
            total += res.reward;
        }
        run.episode_rewards.push_back(total);
        if (states.empty()) continue;

        GaeResult gae = gae_advantages(rewards, values, cfg.gamma, cfg.gae_lambda);
        std::vector<std::size_t> order(states.size());
        std::iota(order.begin(), order.end(), 0);
        for (std::size_t epoch = 0; epoch < cfg.ppo_epochs; ++epoch) {
            std::shuffle(order.begin(), order.end(), rng);
            for (std::size_t off = 0; off < order.size(); off += cfg.minibatch) {
                std::size_t bsz = std::min(cfg.minibatch, order.size() - off);
                double inv_b = 1.0 / static_cast<double>(bsz);
                net.zero_grads();
                for (std::size_t bi = 0; bi < bsz; ++bi) {
                    std::size_t i = order[off + bi];
                    Tensor out = net.forward(to_tensor(states[i]));
                    std::vector<double> logits(out.data.begin(), out.data.begin() + kActionCount);
                    std::vector<double> probs = softmax(logits);
                    double new_lp = detail::log_softmax_at(logits, actions[i]);
                    double ratio = std::exp(new_lp - old_logp[i]);
                    if (!std::isfinite(ratio)) throw std::runtime_error("non-finite PPO ratio");
                    double adv = gae.advantages[i];
                    bool clipped = (adv >= 0.0 && ratio > 1.0 + cfg.eps_clip) ||
                                   (adv < 0.0 && ratio < 1.0 - cfg.eps_clip);
                    Tensor dout(out.shape);
                    // policy term: maximize min(rA, clip(r)A); grad is 0 on the
                    // clipped branch
                    if (!clipped) {
                        double coef = -ratio * adv * inv_b;
                        for (std::size_t j = 0; j < kActionCount; ++j) {
                            double onehot = j == actions[i] ? 1.0 : 0.0;
                            dout[j] += coef * (onehot - probs[j]);
                        }
                    }
                    // entropy bonus
                    double h = entropy_of(probs);
                    for (std::size_t j = 0; j < kActionCount; ++j)
                        if (probs[j] > 0.0)
                            dout[j] += cfg.entropy_coef * probs[j] * (std::log(probs[j]) + h) * inv_b;
                    // value head MSE
                    dout[kActionCount] =
                        cfg.value_coef * 2.0 * (out[kActionCount] - gae.returns[i]) * inv_b;
                    net.backward(dout);
                }
                adam.step(net);
                if (!net.params_finite())
                    throw std::runtime_error("non-finite parameters after PPO update");
            }
        }
    }
    run.net = std::move(net);
    return run;
}

// Deterministic greedy/mode action for evaluation.
inline std::size_t greedy_action(Network& net, const GafState& obs, AgentKind kind,
                                 const SurefireAction& constant_action) {
    if (kind == AgentKind::Constant) return action_index(constant_action);
    std::vector<double> out = forward_vec(net, obs);
    out.resize(kActionCount);  // drop the PPO value head if present
    return argmax_index(out);
}

}  // namespace surefire
