#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "surefire/agents.hpp"
#include "test_util.hpp"

#include <cmath>
#include <random>

using namespace surefire;

namespace {

GafState state_of(double fill) {
    GafState s{};
    for (auto& ch : s.channels) ch.fill(fill);
    return s;
}

}  // namespace

TEST_CASE("replay buffer FIFO eviction at capacity") {
    ReplayBuffer buf(3);
    for (int i = 0; i < 4; ++i) buf.push({state_of(0), 0, static_cast<double>(i), state_of(0), false});
    CHECK(buf.size() == 3);
    CHECK(buf[0].reward == 1.0);  // the oldest (reward 0) is gone
    CHECK(buf[2].reward == 3.0);
    std::mt19937_64 rng(1);
    for (const Transition* t : buf.sample(10, rng)) CHECK(t->reward >= 1.0);
}

TEST_CASE("epsilon greedy decision rule") {
    std::mt19937_64 rng(3);
    std::vector<double> q(18, 0.0);
    q[7] = 1.0;
    for (int i = 0; i < 50; ++i) CHECK(epsilon_greedy(q, 0.0, rng) == 7);

    std::vector<double> ties(18, 2.5);
    CHECK(epsilon_greedy(ties, 0.0, rng) == 0);

    // eps = 1: 18,000 draws, each action within 1/18 +- 0.01
    std::vector<int> counts(18, 0);
    for (int i = 0; i < 18000; ++i) ++counts[epsilon_greedy(q, 1.0, rng)];
    for (int c : counts) {
        double freq = c / 18000.0;
        CHECK(std::abs(freq - 1.0 / 18) < 0.01);
    }
    CHECK_THROWS_AS(epsilon_greedy(q, 1.5, rng), std::invalid_argument);
}

TEST_CASE("epsilon schedule anneals linearly to exactly 0.1") {
    double prev = 2.0;
    for (std::size_t ep = 0; ep < 100; ++ep) {
        double e = epsilon_schedule(ep, 100);
        CHECK(e <= prev);
        prev = e;
    }
    CHECK(epsilon_schedule(0, 100) == 1.0);
    CHECK(epsilon_schedule(25, 100) == doctest::Approx(0.55).epsilon(1e-12));
    CHECK(epsilon_schedule(50, 100) == 0.1);
    CHECK(epsilon_schedule(99, 100) == 0.1);
}

TEST_CASE("dqn_update target arithmetic") {
    Network online = build_default_network(kActionCount);
    online.init_he(1);
    Network target = online;
    Adam adam(online, {.lr = 1e-4});

    GafState s = state_of(0.2), s2 = state_of(-0.3);
    SUBCASE("terminal target is the reward") {
        Transition tr{s, 4, 5.0, s2, true};
        double q = forward_vec(online, s)[4];
        std::vector<const Transition*> batch{&tr};
        double loss = dqn_update(batch, online, target, 0.9, adam, 1.0);
        CHECK(loss == doctest::Approx(huber(5.0 - q)).epsilon(1e-12));
    }
    SUBCASE("non-terminal target bootstraps from the target net") {
        Transition tr{s, 4, 1.0, s2, false};
        std::vector<double> qn = forward_vec(target, s2);
        double y = 1.0 + 0.9 * *std::max_element(qn.begin(), qn.end());
        double q = forward_vec(online, s)[4];
        std::vector<const Transition*> batch{&tr};
        double loss = dqn_update(batch, online, target, 0.9, adam, 1.0);
        CHECK(loss == doctest::Approx(huber(y - q)).epsilon(1e-12));
    }
    SUBCASE("predictions equal to targets give zero loss and unchanged params") {
        double q = forward_vec(online, s)[4];
        Transition tr{s, 4, q, s2, true};
        std::vector<double> before = online.params()[0]->data;
        std::vector<const Transition*> batch{&tr};
        double loss = dqn_update(batch, online, target, 0.9, adam, 1.0);
        CHECK(loss == 0.0);
        CHECK(online.params()[0]->data == before);
    }
    SUBCASE("the target network is never touched") {
        Network snapshot = target;
        Transition tr{s, 0, 3.0, s2, false};
        std::vector<const Transition*> batch{&tr, &tr};
        dqn_update(batch, online, target, 0.9, adam, 1.0);
        auto pa = target.params(), pb = snapshot.params();
        for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa[i]->data == pb[i]->data);
    }
}

TEST_CASE("gae worked examples") {
    SUBCASE("single terminal step") {
        auto g = gae_advantages({1.0}, {0.5}, 0.9, 0.95);
        CHECK(g.advantages[0] == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(g.returns[0] == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("lambda=1 gamma=1 telescopes to future reward minus value") {
        std::vector<double> r{1, 2, 3}, v{0.5, 0.25, 0.125};
        auto g = gae_advantages(r, v, 1.0, 1.0);
        CHECK(g.advantages[0] == doctest::Approx(6.0 - 0.5).epsilon(1e-12));
        CHECK(g.advantages[1] == doctest::Approx(5.0 - 0.25).epsilon(1e-12));
        CHECK(g.advantages[2] == doctest::Approx(3.0 - 0.125).epsilon(1e-12));
    }
    SUBCASE("two-step recursion") {
        auto g = gae_advantages({1.0, 1.0}, {0.0, 0.0}, 0.9, 0.95);
        CHECK(g.advantages[1] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(g.advantages[0] == doctest::Approx(1.0 + 0.855).epsilon(1e-12));
    }
    CHECK_THROWS_AS(gae_advantages({1.0}, {}, 0.9, 0.95), std::invalid_argument);
}

TEST_CASE("ppo_loss clip arithmetic") {
    auto policy_term = [](double ratio, double adv) {
        // isolate the policy part: no value error, no entropy
        double lp_old = 0.0, lp_new = std::log(ratio);
        return -ppo_loss({lp_old}, {lp_new}, {adv}, 0.2, {0.0}, {0.0}, 0.5, 0.0);
    };
    CHECK(policy_term(1.5, 1.0) == doctest::Approx(1.2).epsilon(1e-12));
    CHECK(policy_term(0.5, -1.0) == doctest::Approx(-0.8).epsilon(1e-12));
    CHECK(policy_term(1.0, 0.7) == doctest::Approx(0.7).epsilon(1e-12));
    CHECK_THROWS_AS(ppo_loss({0.0}, {0.0}, {1.0}, 0.0, {0.0}, {0.0}), std::invalid_argument);
    CHECK_THROWS_AS(ppo_loss({0.0}, {0.0, 0.0}, {1.0}, 0.2, {0.0}, {0.0}), std::invalid_argument);
}

TEST_CASE("ppo ratios are exactly 1 before the first update") {
    Network net = build_default_network(kActionCount + 1);
    net.init_he(21);
    std::vector<GafState> states{state_of(0.1), state_of(-0.4), state_of(0.9)};
    std::vector<std::size_t> actions{2, 9, 17};
    std::vector<double> old_lp, new_lp, adv{0.3, -0.7, 1.1};
    for (std::size_t i = 0; i < states.size(); ++i) {
        std::vector<double> out = forward_vec(net, states[i]);
        std::vector<double> logits(out.begin(), out.begin() + kActionCount);
        old_lp.push_back(detail::log_softmax_at(logits, actions[i]));
    }
    for (std::size_t i = 0; i < states.size(); ++i) {
        std::vector<double> out = forward_vec(net, states[i]);
        std::vector<double> logits(out.begin(), out.begin() + kActionCount);
        new_lp.push_back(detail::log_softmax_at(logits, actions[i]));
        CHECK(std::exp(new_lp[i] - old_lp[i]) == 1.0);
    }
    // first-epoch policy term equals mean advantage
    double loss = ppo_loss(old_lp, new_lp, adv, 0.2, {0, 0, 0}, {0, 0, 0}, 0.0, 0.0);
    double mean_adv = (0.3 - 0.7 + 1.1) / 3.0;
    CHECK(-loss == doctest::Approx(mean_adv).epsilon(1e-12));
}

TEST_CASE("constant policy is state-independent and deterministic") {
    auto closes = test::random_walk(60, 110000, 15, 5);
    auto s = test::series_from_closes(closes);
    TradingEnv env(s);
    TrainConfig cfg;
    cfg.episodes = 3;
    cfg.seed = 1;
    cfg.constant_action = {1, Direction::Buy, 20};
    TrainRun a = train(env, AgentKind::Constant, cfg);
    TrainRun b = train(env, AgentKind::Constant, cfg);
    REQUIRE(a.episode_rewards.size() == 3);
    CHECK(a.episode_rewards == b.episode_rewards);
    CHECK(a.episode_rewards[0] == a.episode_rewards[1]);  // no randomness at all
    Network none;
    CHECK(greedy_action(none, state_of(0.3), AgentKind::Constant, cfg.constant_action) == 0);
    CHECK(greedy_action(none, state_of(-0.8), AgentKind::Constant, cfg.constant_action) == 0);
}

TEST_CASE("train with zero episodes returns initial parameters and empty history") {
    auto s = test::series_from_closes(test::random_walk(40, 110000, 15, 6));
    TradingEnv env(s);
    TrainConfig cfg;
    cfg.episodes = 0;
    cfg.seed = 4;
    TrainRun run = train(env, AgentKind::Dqn, cfg);
    CHECK(run.episode_rewards.empty());
    Network fresh = build_default_network(kActionCount);
    fresh.init_he(4);
    auto pa = run.net.params(), pb = fresh.params();
    for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa[i]->data == pb[i]->data);
}

TEST_CASE("training is bitwise deterministic per seed") {
    auto s = test::series_from_closes(test::random_walk(50, 110000, 15, 8));
    TrainConfig cfg;
    cfg.episodes = 2;
    cfg.seed = 12;
    cfg.batch_size = 8;
    for (AgentKind kind : {AgentKind::Dqn, AgentKind::Ppo}) {
        TradingEnv env1(s), env2(s);
        TrainRun a = train(env1, kind, cfg);
        TrainRun b = train(env2, kind, cfg);
        CHECK(a.episode_rewards == b.episode_rewards);
        auto pa = a.net.params(), pb = b.net.params();
        for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa[i]->data == pb[i]->data);
    }
}
