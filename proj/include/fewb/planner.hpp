#pragma once

#include <memory>
#include <vector>

#include "fewb/networks.hpp"

namespace fewb::mcts {

struct PlannerConfig {
    real c_explore = 2;        // UCT exploration constant
    int max_iterations = 100;  // planning budget
    real t_dec = 0.4;          // clear-winner margin over uniform
    int rollout_depth = 0;     // extra imagined steps refining an edge cost
};

struct TreeNode {
    std::vector<real> state;  // latent MAP estimate
    int incoming_action = -1;
    real g_aggr = 0;   // cost mass accumulated through this node
    long visits = 0;   // N
    TreeNode* parent = nullptr;
    std::vector<std::unique_ptr<TreeNode>> children;  // indexed by action

    explicit TreeNode(std::size_t num_actions) : children(num_actions) {}
    real mean_cost() const { return visits > 0 ? g_aggr / static_cast<real>(visits) : 0; }
    bool fully_expanded() const {
        for (const auto& c : children)
            if (!c) return false;
        return true;
    }
};

/// Search over the learned latent dynamics. Selection follows
/// UCT(s,a) = -Gbar(s,a) + c_explore * prior(a|s) / (1 + N(s,a)), the prior
/// coming from the policy network when the agent has one and uniform
/// otherwise. Expansion takes the transition mean as the child's MAP state;
/// the edge cost is the critic's G-value for the taken action, optionally
/// refined by random rollouts through the transition network.
class Planner {
public:
    Planner(const PlannerConfig& config, const nets::AgentNetworks& nets);

    /// Runs select/expand/backpropagate until the budget is exhausted or a
    /// clear winner emerges; returns the root visit-count distribution.
    dist::CategoricalDist plan(const std::vector<real>& root_state, Rng& rng);

    TreeNode* select_leaf(TreeNode* root) const;
    TreeNode* expand(TreeNode* node, int action, Rng& rng);
    static void backpropagate(TreeNode* node, real cost);

    /// Tree of the most recent plan() call (inspection and tests).
    const TreeNode* last_root() const { return root_.get(); }

private:
    PlannerConfig config_;
    const nets::AgentNetworks& nets_;
    std::unique_ptr<TreeNode> root_;

    real edge_cost(const TreeNode& parent, int action, const std::vector<real>& child_state,
                   Rng& rng) const;
    std::vector<real> action_prior(const TreeNode& node) const;
};

}  // namespace fewb::mcts
