// The architecture-search environment: integer action tokens decode into
// gates on each agent's qubit block, the circuit grows step by step, inner
// variational optimization scores it and the common reward is 2*eta - rho*t.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "qas/circuit.hpp"
#include "qas/common.hpp"
#include "qas/nn.hpp"
#include "qas/problems.hpp"
#include "qas/statevec.hpp"
#include "qas/vqopt.hpp"

namespace qas::env {

using nn::Vec;

/// n qubits split across m agents, q = n/m qubits each; agent i supervises
/// global qubits [i*q, (i+1)*q).
struct SystemLayout {
    int n = 0;
    int m = 0;
    int q = 0;

    static SystemLayout make(int n, int m) {
        if (n < 1 || m < 1 || n % m != 0)
            throw ConfigError("SystemLayout: agent count must divide qubit count");
        return {n, m, n / m};
    }

    /// Per-agent action-space size: 4 gate kinds x q qubits + skip.
    int n_actions() const { return 4 * q + 1; }
    int skip_token() const { return 4 * q; }
};

/// Decodes token a = k*q + l: k picks from [RX, RY, CNOT_{j,j-1},
/// CNOT_{j,j+1}], l picks the (l+1)-th qubit of the agent's block. CNOT
/// partners wrap around the ring (PBC). The last token is a skip.
inline std::optional<GateOp> decode_action(int token, int agent_index,
                                           const SystemLayout &layout) {
    if (token < 0 || token > layout.skip_token())
        throw UsageError("decode_action: token out of range");
    if (token == layout.skip_token()) return std::nullopt;
    const int kind = token / layout.q;
    const int local = token % layout.q;
    const int j = agent_index * layout.q + local;
    switch (kind) {
    case 0: return GateOp::rx(j);
    case 1: return GateOp::ry(j);
    case 2: return GateOp::cnot(j, (j - 1 + layout.n) % layout.n);
    default: return GateOp::cnot(j, (j + 1) % layout.n);
    }
}

enum class RewardMode { single_instance, averaged_instances };

struct EnvConfig {
    double rho = 0.01;        // circuit length penalty
    int max_steps = 15;       // T
    double eta_threshold = 0.95;
    RewardMode reward_mode = RewardMode::averaged_instances;
    OptConfig inner;          // inner-loop optimizer settings
    bool share_params_per_step = true;
};

/// A target Hamiltonian with its cached spectrum bounds.
struct ProblemInstance {
    PauliHamiltonian ham;
    SpectrumBounds bounds;

    ProblemInstance() = default;
    explicit ProblemInstance(PauliHamiltonian h)
        : ham(std::move(h)), bounds(extreme_eigenvalues(ham)) {}
};

struct StepResult {
    std::vector<Vec> obs; // next per-agent observations
    double reward = 0.0;
    bool done = false;
    double eta = 0.0;
    std::vector<double> instance_etas;
    std::vector<double> instance_energies;
};

/// One rollout worker's environment. Shares nothing mutable; the instance
/// list is read-only.
class Environment {
  public:
    Environment(const SystemLayout &layout, const EnvConfig &cfg,
                const std::vector<ProblemInstance> *instances)
        : layout_(layout), cfg_(cfg), instances_(instances),
          circuit_(layout.n) {
        if (!instances_ || instances_->empty())
            throw ConfigError("Environment: need at least one problem instance");
        if (cfg_.max_steps < 1)
            throw ConfigError("Environment: max_steps must be >= 1");
        if (cfg_.eta_threshold < 0.0 || cfg_.eta_threshold > 1.0)
            throw ConfigError("Environment: eta_threshold outside [0, 1]");
        reset(0);
    }

    int obs_dim() const { return layout_.n_actions() + 1 + 4 + layout_.m; }
    int state_dim() const {
        return layout_.m * (layout_.n_actions() + 4 + layout_.m) + 2;
    }

    const SystemLayout &layout() const { return layout_; }
    const EnvConfig &config() const { return cfg_; }
    const Circuit &circuit() const { return circuit_; }
    int t() const { return t_; }
    bool done() const { return done_; }
    const std::vector<ProblemInstance> &instances() const { return *instances_; }

    /// Starts a fresh episode; the seed drives this episode's inner-loop
    /// optimizer starts. Returns the initial per-agent observations.
    std::vector<Vec> reset(std::uint64_t episode_seed) {
        episode_seed_ = episode_seed;
        circuit_ = Circuit(layout_.n);
        t_ = 0;
        done_ = false;
        prev_action_.assign(layout_.m, layout_.skip_token());
        kind_counts_.assign(layout_.m, std::array<int, 4>{0, 0, 0, 0});
        return observations();
    }

    /// Observation: previous-action one-hot, normalized step, the agent's
    /// per-gate-kind placement counts (normalized by T), agent-id one-hot.
    Vec encode_observation(int agent) const {
        Vec o(obs_dim(), 0.0);
        int at = 0;
        o[at + prev_action_[agent]] = 1.0;
        at += layout_.n_actions();
        o[at++] = static_cast<double>(t_) / cfg_.max_steps;
        for (int k = 0; k < 4; ++k)
            o[at + k] = static_cast<double>(kind_counts_[agent][k]) / cfg_.max_steps;
        at += 4;
        o[at + agent] = 1.0;
        return o;
    }

    std::vector<Vec> observations() const {
        std::vector<Vec> obs(layout_.m);
        for (int i = 0; i < layout_.m; ++i) obs[i] = encode_observation(i);
        return obs;
    }

    /// Global state for the mixer: all observations minus the duplicated
    /// step entry, then the step and the total CNOT count (normalized).
    Vec global_state() const {
        Vec s(state_dim(), 0.0);
        int at = 0;
        for (int i = 0; i < layout_.m; ++i) {
            s[at + prev_action_[i]] = 1.0;
            at += layout_.n_actions();
            for (int k = 0; k < 4; ++k)
                s[at + k] =
                    static_cast<double>(kind_counts_[i][k]) / cfg_.max_steps;
            at += 4;
            s[at + i] = 1.0;
            at += layout_.m;
        }
        s[at++] = static_cast<double>(t_) / cfg_.max_steps;
        s[at++] = static_cast<double>(cnot_count(circuit_)) / cfg_.max_steps;
        return s;
    }

    /// Applies the joint action: gates append in ascending agent order (a
    /// skip appends nothing), rotations added this step share one new
    /// parameter group in shared mode, then the circuit is re-optimized on
    /// every instance and the common reward is computed.
    StepResult step(const std::vector<int> &joint_action) {
        if (done_) throw UsageError("step: episode already finished");
        if (static_cast<int>(joint_action.size()) != layout_.m)
            throw UsageError("step: joint action size mismatch");
        ++t_;
        int shared_slot = -1;
        for (int i = 0; i < layout_.m; ++i) {
            const auto gate = decode_action(joint_action[i], i, layout_);
            prev_action_[i] = joint_action[i];
            if (!gate) continue;
            kind_counts_[i][joint_action[i] / layout_.q] += 1;
            if (is_rotation(gate->kind) && cfg_.share_params_per_step) {
                if (shared_slot < 0) {
                    append_gate(circuit_, *gate);
                    shared_slot = circuit_.n_param_groups - 1;
                } else {
                    append_gate(circuit_, *gate, shared_slot);
                }
            } else {
                append_gate(circuit_, *gate);
            }
        }
        circuit_.n_steps = t_;

        StepResult res;
        const auto &insts = *instances_;
        const std::size_t count =
            cfg_.reward_mode == RewardMode::averaged_instances ? insts.size() : 1;
        double eta_sum = 0.0;
        for (std::size_t idx = 0; idx < count; ++idx) {
            OptConfig inner = cfg_.inner;
            inner.seed = derive_seed(episode_seed_, "inner-opt", idx,
                                     static_cast<std::uint64_t>(t_));
            double energy = 0.0;
            bool ok = false;
            for (int attempt = 0; attempt < 2 && !ok; ++attempt) {
                try {
                    energy = optimize(circuit_, insts[idx].ham, inner).best_energy;
                    ok = true;
                } catch (const NumericalError &) {
                    inner.seed = derive_seed(inner.seed, "inner-opt-retry");
                }
            }
            if (!ok)
                throw TrainingError(
                    "step: inner optimization failed twice; episode aborted");
            const double eta_i = approximation_ratio(energy, insts[idx].bounds);
            res.instance_energies.push_back(energy);
            res.instance_etas.push_back(eta_i);
            eta_sum += eta_i;
        }
        res.eta = eta_sum / static_cast<double>(count);
        res.reward = 2.0 * res.eta - cfg_.rho * t_;
        done_ = res.eta >= cfg_.eta_threshold || t_ >= cfg_.max_steps;
        res.done = done_;
        res.obs = observations();
        return res;
    }

  private:
    SystemLayout layout_;
    EnvConfig cfg_;
    const std::vector<ProblemInstance> *instances_;
    Circuit circuit_;
    int t_ = 0;
    bool done_ = false;
    std::uint64_t episode_seed_ = 0;
    std::vector<int> prev_action_;
    std::vector<std::array<int, 4>> kind_counts_;
};

} // namespace qas::env
