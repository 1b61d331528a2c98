// QMIX value decomposition: recurrent agent networks with shared weights, a
// state-conditioned monotone mixing network fed by hypernetworks, episode
// replay, eps-greedy selection, TD targets and the training step. A single
// agent with the mixer disabled is the DQN baseline.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "qas/common.hpp"
#include "qas/nn.hpp"

namespace qas::qmix {

using nn::Vec;

/// Agent network: linear -> ReLU -> GRU -> linear. One instance is shared
/// by all agents; only the hidden state is per-agent.
struct AgentNet {
    nn::Linear fc1;
    nn::GruCell gru;
    nn::Linear fc2;

    AgentNet() = default;
    AgentNet(int obs_dim, int hidden, int n_actions)
        : fc1(hidden, obs_dim), gru(hidden, hidden), fc2(n_actions, hidden) {}

    int hidden_dim() const { return gru.hidden_dim(); }
    int n_actions() const { return fc2.out_dim(); }

    struct Cache {
        Vec a1, x1;
        nn::GruCache gru;
        Vec h_next;
    };

    /// One step: q-vector for the current observation, advancing the hidden
    /// state. The cache is only needed when a backward pass will follow.
    void forward(const Vec &obs, const Vec &h_prev, Vec &q, Vec &h_next,
                 Cache *cache = nullptr) const {
        Vec a1, x1;
        fc1.forward(obs, a1);
        nn::relu(a1, x1);
        gru.forward(x1, h_prev, h_next, cache ? &cache->gru : nullptr);
        fc2.forward(h_next, q);
        if (cache) {
            cache->a1 = std::move(a1);
            cache->x1 = std::move(x1);
            cache->h_next = h_next;
        }
    }

    void zero_grad() {
        fc1.zero_grad();
        gru.zero_grad();
        fc2.zero_grad();
    }

    void collect(std::vector<nn::NamedParam> &out) {
        nn::collect_params(fc1, "agent.fc1", out);
        nn::collect_params(gru, "agent.gru", out);
        nn::collect_params(fc2, "agent.fc2", out);
    }

    void init(Rng &rng) {
        nn::init_linear(fc1, rng);
        nn::init_gru(gru, rng);
        nn::init_linear(fc2, rng);
    }
};

/// Mixing network. The two mixing layers' weights come from hypernetworks
/// with absolute activation (non-negative weights enforce monotonicity);
/// the first bias is a plain linear hypernetwork, the second a two-layer
/// one with a ReLU in between.
struct MixerNet {
    int n_agents = 0;
    int embed = 0;
    nn::Linear hyper_w1;  // state -> n_agents * embed
    nn::Linear hyper_b1;  // state -> embed
    nn::Linear hyper_w2;  // state -> embed
    nn::Linear hyper_b2a; // state -> embed
    nn::Linear hyper_b2b; // embed -> 1

    MixerNet() = default;
    MixerNet(int m, int state_dim, int embed_dim)
        : n_agents(m), embed(embed_dim), hyper_w1(m * embed_dim, state_dim),
          hyper_b1(embed_dim, state_dim), hyper_w2(embed_dim, state_dim),
          hyper_b2a(embed_dim, state_dim), hyper_b2b(1, embed_dim) {}

    struct Cache {
        Vec state, q;
        Vec w1_raw, w1, b1;
        Vec w2_raw, w2;
        Vec b2a_pre, b2a;
        Vec hidden_pre, hidden;
        double q_tot = 0.0;
    };

    /// q_tot = W2 . relu(W1^T q + b1) + b2 with W1 >= 0, W2 >= 0 produced
    /// from the state, hence dq_tot/dq_i >= 0.
    double forward(const Vec &q_agents, const Vec &state,
                   Cache *cache = nullptr) const {
        Cache local;
        Cache &c = cache ? *cache : local;
        c.state = state;
        c.q = q_agents;
        hyper_w1.forward(state, c.w1_raw);
        nn::abs_act(c.w1_raw, c.w1);
        hyper_b1.forward(state, c.b1);
        hyper_w2.forward(state, c.w2_raw);
        nn::abs_act(c.w2_raw, c.w2);
        hyper_b2a.forward(state, c.b2a_pre);
        nn::relu(c.b2a_pre, c.b2a);
        Vec b2(1);
        hyper_b2b.forward(c.b2a, b2);

        c.hidden_pre.assign(embed, 0.0);
        for (int i = 0; i < n_agents; ++i)
            for (int j = 0; j < embed; ++j)
                c.hidden_pre[j] += q_agents[i] * c.w1[static_cast<std::size_t>(i) * embed + j];
        for (int j = 0; j < embed; ++j) c.hidden_pre[j] += c.b1[j];
        nn::relu(c.hidden_pre, c.hidden);
        double q_tot = b2[0];
        for (int j = 0; j < embed; ++j) q_tot += c.hidden[j] * c.w2[j];
        c.q_tot = q_tot;
        return q_tot;
    }

    /// Backward from dL/dq_tot: accumulates hypernetwork gradients and adds
    /// dL/dq_i into dq_agents (caller sizes & zeroes).
    void backward(const Cache &c, double dq_tot, Vec &dq_agents) {
        Vec scratch_state(c.state.size(), 0.0); // state carries no gradient
        Vec db2(1, dq_tot);
        Vec db2a(hyper_b2b.in_dim(), 0.0);
        hyper_b2b.backward(c.b2a, db2, db2a);
        Vec db2a_pre;
        nn::relu_backward(c.b2a_pre, db2a, db2a_pre);
        hyper_b2a.backward(c.state, db2a_pre, scratch_state);

        Vec dw2(embed), dhidden(embed);
        for (int j = 0; j < embed; ++j) {
            dw2[j] = dq_tot * c.hidden[j];
            dhidden[j] = dq_tot * c.w2[j];
        }
        Vec dw2_raw;
        nn::abs_backward(c.w2_raw, dw2, dw2_raw);
        hyper_w2.backward(c.state, dw2_raw, scratch_state);

        Vec dhidden_pre;
        nn::relu_backward(c.hidden_pre, dhidden, dhidden_pre);
        hyper_b1.backward(c.state, dhidden_pre, scratch_state);

        Vec dw1(static_cast<std::size_t>(n_agents) * embed, 0.0);
        for (int i = 0; i < n_agents; ++i)
            for (int j = 0; j < embed; ++j) {
                dw1[static_cast<std::size_t>(i) * embed + j] += dhidden_pre[j] * c.q[i];
                dq_agents[i] += dhidden_pre[j] * c.w1[static_cast<std::size_t>(i) * embed + j];
            }
        Vec dw1_raw;
        nn::abs_backward(c.w1_raw, dw1, dw1_raw);
        hyper_w1.backward(c.state, dw1_raw, scratch_state);
    }

    void zero_grad() {
        hyper_w1.zero_grad();
        hyper_b1.zero_grad();
        hyper_w2.zero_grad();
        hyper_b2a.zero_grad();
        hyper_b2b.zero_grad();
    }

    void collect(std::vector<nn::NamedParam> &out) {
        nn::collect_params(hyper_w1, "mixer.hyper_w1", out);
        nn::collect_params(hyper_b1, "mixer.hyper_b1", out);
        nn::collect_params(hyper_w2, "mixer.hyper_w2", out);
        nn::collect_params(hyper_b2a, "mixer.hyper_b2a", out);
        nn::collect_params(hyper_b2b, "mixer.hyper_b2b", out);
    }

    void init(Rng &rng) {
        nn::init_linear(hyper_w1, rng);
        nn::init_linear(hyper_b1, rng);
        nn::init_linear(hyper_w2, rng);
        nn::init_linear(hyper_b2a, rng);
        nn::init_linear(hyper_b2b, rng);
    }
};

/// One completed episode: per step the global state, per-agent observations,
/// the joint action, the reward and the done flag (true only at the end).
struct EpisodeRecord {
    std::vector<Vec> states;
    std::vector<std::vector<Vec>> obs;
    std::vector<std::vector<int>> actions;
    std::vector<double> rewards;
    std::vector<char> done;

    std::size_t length() const { return rewards.size(); }

    void push_step(Vec state, std::vector<Vec> observations,
                   std::vector<int> joint_action, double reward, bool terminal) {
        states.push_back(std::move(state));
        obs.push_back(std::move(observations));
        actions.push_back(std::move(joint_action));
        rewards.push_back(reward);
        done.push_back(terminal ? 1 : 0);
    }

    bool well_formed() const {
        if (rewards.empty()) return false;
        for (std::size_t t = 0; t + 1 < done.size(); ++t)
            if (done[t]) return false;
        return done.back() == 1;
    }
};

/// Ring buffer of whole episodes with uniform sampling.
class ReplayBuffer {
  public:
    explicit ReplayBuffer(std::size_t capacity = 5000) : capacity_(capacity) {}

    void push(EpisodeRecord ep) {
        if (!ep.well_formed())
            throw UsageError("ReplayBuffer: episode must end with its only terminal step");
        if (store_.size() < capacity_) {
            store_.push_back(std::move(ep));
        } else {
            store_[next_] = std::move(ep);
            next_ = (next_ + 1) % capacity_;
        }
    }

    std::size_t size() const { return store_.size(); }
    std::size_t capacity() const { return capacity_; }
    const EpisodeRecord &at(std::size_t i) const { return store_[i]; }

    std::vector<const EpisodeRecord *> sample(std::size_t count, Rng &rng) const {
        std::vector<const EpisodeRecord *> batch;
        batch.reserve(count);
        for (std::size_t i = 0; i < count; ++i)
            batch.push_back(&store_[uniform_index(rng, store_.size())]);
        return batch;
    }

  private:
    std::size_t capacity_;
    std::vector<EpisodeRecord> store_;
    std::size_t next_ = 0;
};

struct TrainerConfig {
    double gamma = 0.99;
    double lr = 1e-4;
    int batch_episodes = 32;
    int buffer_capacity = 5000;
    double eps_start = 1.0;
    double eps_end = 0.05;
    int eps_anneal_steps = 600;
    int target_sync_every = 150; // episodes
    int n_agents = 1;
    int n_actions = 0;
    int obs_dim = 0;
    int state_dim = 0;
    int hidden_width = 64;
    int mixing_width = 64;
    bool use_mixer = true; // false: identity mixer (single-agent DQN)
};

/// Linear anneal: eps(t) = max(eps_end, eps_start - (eps_start-eps_end) t/T).
inline double epsilon_schedule(const TrainerConfig &cfg, long long step) {
    if (cfg.eps_anneal_steps <= 0) return cfg.eps_end;
    const double frac = static_cast<double>(step) / cfg.eps_anneal_steps;
    return std::max(cfg.eps_end,
                    cfg.eps_start - (cfg.eps_start - cfg.eps_end) * frac);
}

/// Greedy action with ties broken toward the lowest index.
inline int argmax_action(const Vec &q) {
    int best = 0;
    for (int a = 1; a < static_cast<int>(q.size()); ++a)
        if (q[a] > q[best]) best = a;
    return best;
}

/// All trainable weights plus helpers shared by the live and target copies.
struct QmixModel {
    AgentNet agent;
    MixerNet mixer;
    bool use_mixer = true;

    QmixModel() = default;
    QmixModel(const TrainerConfig &cfg)
        : agent(cfg.obs_dim, cfg.hidden_width, cfg.n_actions),
          mixer(cfg.n_agents, cfg.state_dim, cfg.mixing_width),
          use_mixer(cfg.use_mixer) {}

    std::vector<nn::NamedParam> named_params() {
        std::vector<nn::NamedParam> out;
        agent.collect(out);
        if (use_mixer) mixer.collect(out);
        return out;
    }

    void zero_grad() {
        agent.zero_grad();
        if (use_mixer) mixer.zero_grad();
    }

    void init(std::uint64_t seed) {
        Rng rng = make_rng(seed, "qmix-init");
        agent.init(rng);
        if (use_mixer) mixer.init(rng);
    }

    /// Mixes per-agent chosen-action values; identity on agent 0 when the
    /// mixer is disabled.
    double mix(const Vec &q_agents, const Vec &state,
               MixerNet::Cache *cache = nullptr) const {
        if (!use_mixer) return q_agents[0];
        return mixer.forward(q_agents, state, cache);
    }
};

inline void copy_params(QmixModel &from, QmixModel &to) {
    auto src = from.named_params();
    auto dst = to.named_params();
    if (src.size() != dst.size())
        throw UsageError("copy_params: mismatched models");
    for (std::size_t i = 0; i < src.size(); ++i) *dst[i].value = *src[i].value;
}

/// Owns the live and target models, the ADAM state, the replay buffer and
/// the action-selection stream for one training run.
class QmixTrainer {
  public:
    QmixTrainer(const TrainerConfig &cfg, std::uint64_t seed)
        : cfg_(cfg), model_(cfg), target_(cfg), buffer_(cfg.buffer_capacity),
          action_rng_(make_rng(seed, "action-select")),
          sample_rng_(make_rng(seed, "replay-sample")) {
        if (cfg.n_agents < 1 || cfg.n_actions < 1)
            throw ConfigError("QmixTrainer: agents and actions must be positive");
        if (!cfg.use_mixer && cfg.n_agents != 1)
            throw ConfigError("QmixTrainer: identity mixer requires one agent");
        model_.init(derive_seed(seed, "model-init"));
        sync_target();
        adam_.lr = cfg.lr;
        params_ = model_.named_params();
        adam_.attach(params_);
    }

    const TrainerConfig &config() const { return cfg_; }
    QmixModel &model() { return model_; }
    QmixModel &target() { return target_; }
    ReplayBuffer &buffer() { return buffer_; }
    std::vector<nn::NamedParam> &named_params() { return params_; }

    /// Fresh zeroed per-agent hidden states for a rollout.
    std::vector<Vec> initial_hidden() const {
        return std::vector<Vec>(cfg_.n_agents, Vec(cfg_.hidden_width, 0.0));
    }

    /// Eps-greedy joint action from the target network (the behaviour
    /// policy), advancing the per-agent hidden states in place.
    std::vector<int> select_actions(const std::vector<Vec> &obs,
                                    std::vector<Vec> &hidden, double eps) {
        if (eps < 0.0 || eps > 1.0)
            throw UsageError("select_actions: eps outside [0, 1]");
        std::vector<int> joint(cfg_.n_agents);
        Vec q, h_next;
        for (int i = 0; i < cfg_.n_agents; ++i) {
            target_.agent.forward(obs[i], hidden[i], q, h_next);
            hidden[i] = h_next;
            const double u = uniform_real(action_rng_, 0.0, 1.0);
            joint[i] = u < eps
                           ? static_cast<int>(uniform_index(
                                 action_rng_, static_cast<std::size_t>(cfg_.n_actions)))
                           : argmax_action(q);
        }
        return joint;
    }

    /// TD targets y_t for every step of every episode in the batch. The
    /// joint maximization decomposes per agent (valid under the monotone
    /// mixer) and terminal steps take y = r.
    std::vector<std::vector<double>>
    td_targets(const std::vector<const EpisodeRecord *> &batch) {
        std::vector<std::vector<double>> ys(batch.size());
        Vec q, h_next;
        for (std::size_t e = 0; e < batch.size(); ++e) {
            const EpisodeRecord &ep = *batch[e];
            const std::size_t len = ep.length();
            // target-net q-vectors along the episode, hidden from zero
            std::vector<std::vector<Vec>> tq(
                len, std::vector<Vec>(cfg_.n_agents));
            std::vector<Vec> hidden = initial_hidden();
            for (std::size_t t = 0; t < len; ++t)
                for (int i = 0; i < cfg_.n_agents; ++i) {
                    target_.agent.forward(ep.obs[t][i], hidden[i], q, h_next);
                    hidden[i] = h_next;
                    tq[t][i] = q;
                }
            ys[e].resize(len);
            for (std::size_t t = 0; t < len; ++t) {
                if (ep.done[t]) {
                    ys[e][t] = ep.rewards[t];
                } else {
                    Vec greedy(cfg_.n_agents);
                    for (int i = 0; i < cfg_.n_agents; ++i)
                        greedy[i] = tq[t + 1][i][argmax_action(tq[t + 1][i])];
                    const double qnext = target_.mix(greedy, ep.states[t + 1]);
                    ys[e][t] = ep.rewards[t] + cfg_.gamma * qnext;
                }
            }
        }
        return ys;
    }

    /// Squared TD error summed over batch and steps, normalized by the total
    /// step count; fills gradients (does not update parameters).
    double loss_and_grad(const std::vector<const EpisodeRecord *> &batch) {
        model_.zero_grad();
        const auto ys = td_targets(batch);

        std::size_t total_steps = 0;
        for (const auto *ep : batch) total_steps += ep->length();
        if (total_steps == 0) throw UsageError("loss_and_grad: empty batch");

        double loss = 0.0;
        Vec q, h_next;
        for (std::size_t e = 0; e < batch.size(); ++e) {
            const EpisodeRecord &ep = *batch[e];
            const std::size_t len = ep.length();

            std::vector<std::vector<AgentNet::Cache>> caches(
                len, std::vector<AgentNet::Cache>(cfg_.n_agents));
            std::vector<std::vector<Vec>> qvecs(len,
                                                std::vector<Vec>(cfg_.n_agents));
            std::vector<Vec> hidden = initial_hidden();
            for (std::size_t t = 0; t < len; ++t)
                for (int i = 0; i < cfg_.n_agents; ++i) {
                    model_.agent.forward(ep.obs[t][i], hidden[i], q, h_next,
                                         &caches[t][i]);
                    hidden[i] = h_next;
                    qvecs[t][i] = q;
                }

            // per-step mixer, collecting dL/dq_i(chosen)
            std::vector<Vec> dq_chosen(len, Vec(cfg_.n_agents, 0.0));
            for (std::size_t t = 0; t < len; ++t) {
                Vec chosen(cfg_.n_agents);
                for (int i = 0; i < cfg_.n_agents; ++i)
                    chosen[i] = qvecs[t][i][ep.actions[t][i]];
                MixerNet::Cache mix_cache;
                const double q_tot = model_.mix(chosen, ep.states[t], &mix_cache);
                const double diff = q_tot - ys[e][t];
                loss += diff * diff;
                const double dq_tot = 2.0 * diff / static_cast<double>(total_steps);
                if (model_.use_mixer)
                    model_.mixer.backward(mix_cache, dq_tot, dq_chosen[t]);
                else
                    dq_chosen[t][0] = dq_tot;
            }

            // BPTT through the shared agent network, one agent at a time
            Vec dx(cfg_.hidden_width), dh(cfg_.hidden_width),
                dobs(cfg_.obs_dim), da1, dh_prev;
            for (int i = 0; i < cfg_.n_agents; ++i) {
                std::fill(dh.begin(), dh.end(), 0.0);
                for (std::size_t t = len; t-- > 0;) {
                    Vec dq_vec(cfg_.n_actions, 0.0);
                    dq_vec[ep.actions[t][i]] = dq_chosen[t][i];
                    model_.agent.fc2.backward(caches[t][i].h_next, dq_vec, dh);
                    std::fill(dx.begin(), dx.end(), 0.0);
                    model_.agent.gru.backward(caches[t][i].gru, dh, dx, dh_prev);
                    nn::relu_backward(caches[t][i].a1, dx, da1);
                    std::fill(dobs.begin(), dobs.end(), 0.0);
                    model_.agent.fc1.backward(ep.obs[t][i], da1, dobs);
                    dh = dh_prev;
                }
            }
        }
        loss /= static_cast<double>(total_steps);
        if (!std::isfinite(loss))
            throw TrainingError("loss_and_grad: non-finite loss");
        return loss;
    }

    /// Samples a batch, computes the loss gradient and applies one ADAM
    /// update. Requires the buffer to hold at least batch_episodes episodes.
    double train_step() {
        if (buffer_.size() < static_cast<std::size_t>(cfg_.batch_episodes))
            throw UsageError("train_step: buffer holds fewer episodes than a batch");
        const auto batch = buffer_.sample(
            static_cast<std::size_t>(cfg_.batch_episodes), sample_rng_);
        const double loss = loss_and_grad(batch);
        nn::adam_step(params_, adam_);
        return loss;
    }

    void sync_target() { copy_params(model_, target_); }

    /// Hard copy on multiples of target_sync_every (counted in episodes).
    bool maybe_sync_target(long long episode_counter) {
        if (cfg_.target_sync_every > 0 &&
            episode_counter % cfg_.target_sync_every == 0) {
            sync_target();
            return true;
        }
        return false;
    }

  private:
    TrainerConfig cfg_;
    QmixModel model_;
    QmixModel target_;
    ReplayBuffer buffer_;
    std::vector<nn::NamedParam> params_;
    nn::AdamState adam_;
    Rng action_rng_;
    Rng sample_rng_;
};

} // namespace qas::qmix
