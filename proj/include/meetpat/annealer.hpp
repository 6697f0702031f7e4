#ifndef meetpat_annealer_hpp
#define meetpat_annealer_hpp

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "meetpat/random.hpp"
#include "meetpat/template.hpp"

namespace meetpat {

struct AnnealConfig {
    double t0 = 1000.0;
    double cool = 0.95;                 // T = t0 * cool^iter
    std::size_t restart_period = 800;   // accepted steps between jumps back to the best template
    std::size_t max_accepted = 4000;
    std::size_t max_proposals = 0;      // 0 means 10 * max_accepted
    std::size_t stall_limit = 2000;     // consecutive rejections treated as converged; 0 disables
    std::size_t max_nodes = 20;
    std::size_t max_back_edges = 5;
    std::size_t alphabet_size = 0;
    ObjectiveParams params;
    LossMode mode = LossMode::exact();
    std::uint64_t seed = 0;

    std::size_t proposal_cap() const { return max_proposals ? max_proposals : 10 * max_accepted; }
    void validate() const;
};

enum class MoveKind { insert_node, delete_node, insert_back_edge, delete_back_edge };

std::string to_string(MoveKind kind);

struct Proposal {
    MoveKind kind;
    Template result;
};

/*
 * One neighbor of `tmpl`. The move kind is uniform over the kinds feasible
 * for this template (node insertion needs room under max_nodes, deletion
 * needs two or more nodes, edge insertion needs a free slot under
 * max_back_edges, edge deletion needs an edge). Inserted labels and
 * positions are uniform; deleting a node drops its incident back edges and
 * shifts the rest.
 */
Proposal propose_move(const Template& tmpl, std::size_t alphabet_size, std::size_t max_nodes,
                      std::size_t max_back_edges, Rng& rng);

/// Metropolis rule: accept with probability min(1, exp(-delta_f / temperature)).
bool metropolis_accept(double delta_f, double temperature, Rng& rng);

struct AcceptedMove {
    std::size_t iteration = 0;   // accepted-step counter after this move
    MoveKind kind = MoveKind::insert_node;
    double delta_f = 0.0;
    double temperature = 0.0;    // temperature the move was judged at
    double best_f = 0.0;         // best objective after this move
};

struct AnnealTrace {
    std::vector<AcceptedMove> accepted_moves;
    double init_f = 0.0;
    double best_f = 0.0;
    Template best_template;
    std::size_t proposals = 0;
    std::size_t restarts = 0;
    bool converged = false;
};

struct AnnealResult {
    Template best;
    AnnealTrace trace;
};

AnnealResult anneal(std::span<const LabelSeq> meetings, const Template& init,
                    const AnnealConfig& config);

/// Label sequences of all instantiations up to `max_len` nodes.
std::set<LabelSeq> instantiation_signature(const Template& tmpl, std::size_t max_len = 8);

bool equivalent(const Template& a, const Template& b, std::size_t max_len = 8);

struct StartResult {
    Template best;
    double best_f = 0.0;
    std::size_t start_id = 0;
    AnnealTrace trace;
};

struct ConsensusGroup {
    Template representative;        // lowest-F member
    std::vector<std::size_t> members;  // indices into MultiStartResult::runs
};

struct ConsensusReport {
    std::vector<ConsensusGroup> groups;   // sorted by size descending, then best F
    std::size_t total_runs = 0;
    double modal_frequency = 0.0;
};

struct MultiStartResult {
    std::vector<StartResult> runs;
    ConsensusReport consensus;
    std::size_t best_run = 0;
};

struct MultiStartOptions {
    std::optional<std::size_t> max_starts;   // default: one start per meeting
    std::size_t equivalence_len = 8;
    std::size_t threads = 0;                 // 0 = hardware concurrency
};

/*
 * One anneal run per meeting, started from that meeting's sequence
 * truncated to max_nodes with no back edges. Run i uses the seed
 * derive_seed(config.seed, i). Results are grouped into instantiation-set
 * equivalence classes.
 */
MultiStartResult multi_start(std::span<const LabelSeq> meetings, const AnnealConfig& config,
                             const MultiStartOptions& options = {});

ConsensusReport build_consensus(std::span<const StartResult> runs, std::size_t equivalence_len);

} // namespace meetpat

#endif
