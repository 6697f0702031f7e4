#ifndef meetpat_baselines_hpp
#define meetpat_baselines_hpp

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "meetpat/corpus.hpp"

namespace meetpat {

/*
 * First-order Markov chain estimated by bigram counting. Rows whose source
 * label never precedes another act are undefined; their probability row is
 * left at zero and `defined` is false.
 */
struct MarkovChain {
    Eigen::MatrixXd transition;
    Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> counts;
    std::vector<bool> defined;

    std::size_t states() const { return defined.size(); }
};

MarkovChain fit_markov(std::span<const LabelSeq> sequences, std::size_t alphabet_size);

struct Transition {
    Label from = 0;
    Label to = 0;
    double probability = 0.0;

    bool operator==(const Transition&) const = default;
};

struct TopTransitions {
    std::vector<Transition> transitions;
    bool truncated = false;   // fewer than k positive-probability transitions existed
};

/// The k most probable transitions with positive probability; ties go to
/// the smaller (from, to) pair.
TopTransitions top_transitions(const MarkovChain& chain, std::size_t k);

std::string markov_to_csv(const MarkovChain& chain, const Alphabet& alphabet);
std::string markov_to_dot(const MarkovChain& chain, const Alphabet& alphabet);

/*
 * Profile HMM with `length` match states and the usual insert/delete
 * states. Node k = 0 is the begin state (plus insert state I0); for each
 * node k and source state s in {M, I, D}, `transitions[k]` row s holds the
 * probabilities of moving to {M_{k+1}, I_k, D_{k+1}}. At k = length the
 * "M" column means the end state and the "D" column is unused.
 */
struct ProfileHmm {
    enum State { M = 0, I = 1, D = 2 };

    std::size_t length = 0;
    std::size_t alphabet_size = 0;
    double pseudocount = 1.0;
    Eigen::MatrixXd match_emissions;    // length x alphabet, row k-1 is M_k
    Eigen::MatrixXd insert_emissions;   // (length + 1) x alphabet, row k is I_k
    std::vector<Eigen::Matrix3d> transitions;   // length + 1 entries

    // per EM iteration, evaluated at the parameters entering that iteration
    std::vector<double> log_likelihood;
    // log_likelihood plus the pseudocount prior term; EM never decreases it
    std::vector<double> log_posterior;
};

/*
 * Baum-Welch on the profile architecture. Emission and transition counts
 * get `pseudocount` added before normalization (a Dirichlet prior of
 * pseudocount + 1), so each iteration is a MAP-EM step. Match emissions
 * start from a seeded pick of one training sequence stretched over the
 * match states.
 */
ProfileHmm fit_profile_hmm(std::span<const LabelSeq> sequences, std::size_t alphabet_size,
                           std::size_t length, double pseudocount, std::size_t iterations,
                           std::uint64_t seed);

/// Log-probability of one sequence under the model (forward algorithm).
double profile_log_likelihood(const ProfileHmm& hmm, std::span<const Label> sequence);

/// Per match state, the most probable emitted label; ties go to the lower label.
LabelSeq consensus_string(const ProfileHmm& hmm);

} // namespace meetpat

#endif
