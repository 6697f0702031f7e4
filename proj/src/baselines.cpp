#include "meetpat/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "meetpat/error.hpp"
#include "meetpat/random.hpp"

namespace meetpat {

MarkovChain fit_markov(std::span<const LabelSeq> sequences, std::size_t alphabet_size) {
    if (alphabet_size == 0) {
        throw ValidationError("fit_markov needs a nonempty alphabet");
    }
    MarkovChain chain;
    chain.counts.setZero(static_cast<Eigen::Index>(alphabet_size), static_cast<Eigen::Index>(alphabet_size));
    std::int64_t bigrams = 0;
    for (const auto& seq : sequences) {
        for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
            if (seq[i] >= alphabet_size || seq[i + 1] >= alphabet_size) {
                throw SchemaError("fit_markov: label outside alphabet");
            }
            ++chain.counts(seq[i], seq[i + 1]);
            ++bigrams;
        }
    }
    if (bigrams == 0) {
        throw FitError("fit_markov: no sequence has two or more acts");
    }
    chain.transition.setZero(chain.counts.rows(), chain.counts.cols());
    chain.defined.assign(alphabet_size, false);
    for (Eigen::Index a = 0; a < chain.counts.rows(); ++a) {
        const auto row_total = chain.counts.row(a).sum();
        if (row_total == 0) {
            continue;
        }
        chain.defined[static_cast<std::size_t>(a)] = true;
        chain.transition.row(a) = chain.counts.row(a).cast<double>() / static_cast<double>(row_total);
    }
    return chain;
}

TopTransitions top_transitions(const MarkovChain& chain, std::size_t k) {
    if (k == 0) {
        throw ValidationError("top_transitions needs k >= 1");
    }
    std::vector<Transition> all;
    for (std::size_t a = 0; a < chain.states(); ++a) {
        if (!chain.defined[a]) {
            continue;
        }
        for (std::size_t b = 0; b < chain.states(); ++b) {
            const double p = chain.transition(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
            if (p > 0.0) {
                all.push_back({static_cast<Label>(a), static_cast<Label>(b), p});
            }
        }
    }
    std::stable_sort(all.begin(), all.end(), [](const Transition& x, const Transition& y) {
        return x.probability > y.probability;
    });
    TopTransitions out;
    out.truncated = all.size() < k;
    all.resize(std::min(k, all.size()));
    out.transitions = std::move(all);
    return out;
}

std::string markov_to_csv(const MarkovChain& chain, const Alphabet& alphabet) {
    std::ostringstream out;
    out << std::setprecision(17) << "from";
    for (const auto& name : alphabet.names()) {
        out << ',' << name;
    }
    out << ",defined\n";
    for (std::size_t a = 0; a < chain.states(); ++a) {
        out << alphabet.name(static_cast<Label>(a));
        for (std::size_t b = 0; b < chain.states(); ++b) {
            out << ',' << chain.transition(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
        }
        out << ',' << (chain.defined[a] ? "true" : "false") << '\n';
    }
    return out.str();
}

std::string markov_to_dot(const MarkovChain& chain, const Alphabet& alphabet) {
    std::ostringstream out;
    out << std::setprecision(3) << "digraph markov {\n";
    for (std::size_t a = 0; a < chain.states(); ++a) {
        out << "  s" << a << " [label=\"" << alphabet.name(static_cast<Label>(a)) << "\"];\n";
    }
    for (std::size_t a = 0; a < chain.states(); ++a) {
        for (std::size_t b = 0; b < chain.states(); ++b) {
            const double p = chain.transition(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
            if (p > 0.0) {
                out << "  s" << a << " -> s" << b << " [label=\"" << p << "\"];\n";
            }
        }
    }
    out << "}\n";
    return out.str();
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double lse(double a, double b) {
    if (a == kNegInf) {
        return b;
    }
    if (b == kNegInf) {
        return a;
    }
    const double hi = std::max(a, b);
    return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

double lse3(double a, double b, double c) {
    return lse(lse(a, b), c);
}

bool valid_transition(std::size_t k, std::size_t length, int from, int to) {
    if (k == 0 && from == ProfileHmm::D) {
        return false;
    }
    if (k == length && to == ProfileHmm::D) {
        return false;
    }
    return true;
}

// log-space copy of the parameters used by forward/backward
struct LogParams {
    Eigen::MatrixXd match;
    Eigen::MatrixXd insert;
    std::vector<Eigen::Matrix3d> trans;

    explicit LogParams(const ProfileHmm& hmm)
        : match(hmm.match_emissions.array().log().matrix()),
          insert(hmm.insert_emissions.array().log().matrix()) {
        for (const auto& t : hmm.transitions) {
            trans.push_back(t.array().log().matrix());
        }
    }
};

struct Lattice {
    std::size_t rows, cols;
    std::vector<double> data;

    Lattice(std::size_t n, std::size_t length)
        : rows(n + 1), cols(length + 1), data(3 * rows * cols, kNegInf) {}

    double& operator()(int state, std::size_t i, std::size_t k) {
        return data[(static_cast<std::size_t>(state) * rows + i) * cols + k];
    }
};

struct Accumulator {
    Eigen::MatrixXd match;
    Eigen::MatrixXd insert;
    std::vector<Eigen::Matrix3d> trans;

    Accumulator(std::size_t length, std::size_t alphabet)
        : match(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(length), static_cast<Eigen::Index>(alphabet))),
          insert(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(length + 1), static_cast<Eigen::Index>(alphabet))),
          trans(length + 1, Eigen::Matrix3d::Zero()) {}
};

double forward(const LogParams& p, std::size_t length, std::span<const Label> x, Lattice& f) {
    using S = ProfileHmm::State;
    const std::size_t n = x.size();
    f(S::M, 0, 0) = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
        for (std::size_t k = 0; k <= length; ++k) {
            if (i >= 1) {
                const Label c = x[i - 1];
                if (k >= 1) {
                    const auto& t = p.trans[k - 1];
                    f(S::M, i, k) = p.match(static_cast<Eigen::Index>(k - 1), c) +
                                    lse3(f(S::M, i - 1, k - 1) + t(S::M, S::M),
                                         f(S::I, i - 1, k - 1) + t(S::I, S::M),
                                         f(S::D, i - 1, k - 1) + t(S::D, S::M));
                }
                const auto& t = p.trans[k];
                f(S::I, i, k) = p.insert(static_cast<Eigen::Index>(k), c) +
                                lse3(f(S::M, i - 1, k) + t(S::M, S::I),
                                     f(S::I, i - 1, k) + t(S::I, S::I),
                                     f(S::D, i - 1, k) + t(S::D, S::I));
            }
            if (k >= 1) {
                const auto& t = p.trans[k - 1];
                f(S::D, i, k) = lse3(f(S::M, i, k - 1) + t(S::M, S::D),
                                     f(S::I, i, k - 1) + t(S::I, S::D),
                                     f(S::D, i, k - 1) + t(S::D, S::D));
            }
        }
    }
    const auto& t = p.trans[length];
    return lse3(f(S::M, n, length) + t(S::M, S::M), f(S::I, n, length) + t(S::I, S::M),
                f(S::D, n, length) + t(S::D, S::M));
}

void backward(const LogParams& p, std::size_t length, std::span<const Label> x, Lattice& b) {
    using S = ProfileHmm::State;
    const std::size_t n = x.size();
    for (std::size_t ii = n + 1; ii-- > 0;) {
        for (std::size_t kk = length + 1; kk-- > 0;) {
            const auto& t = p.trans[kk];
            for (int s = 0; s < 3; ++s) {
                double acc = kNegInf;
                if (kk < length && ii < n) {
                    acc = lse(acc, t(s, S::M) + p.match(static_cast<Eigen::Index>(kk), x[ii]) +
                                       b(S::M, ii + 1, kk + 1));
                }
                if (ii < n) {
                    acc = lse(acc, t(s, S::I) + p.insert(static_cast<Eigen::Index>(kk), x[ii]) +
                                       b(S::I, ii + 1, kk));
                }
                if (kk < length) {
                    acc = lse(acc, t(s, S::D) + b(S::D, ii, kk + 1));
                }
                if (kk == length && ii == n) {
                    acc = lse(acc, t(s, S::M));
                }
                b(s, ii, kk) = acc;
            }
        }
    }
}

// Adds this sequence's expected counts; returns its log-likelihood.
double expected_counts(const LogParams& p, std::size_t length, std::span<const Label> x,
                       Accumulator& acc) {
    using S = ProfileHmm::State;
    const std::size_t n = x.size();
    Lattice f(n, length), b(n, length);
    const double log_p = forward(p, length, x, f);
    backward(p, length, x, b);

    for (std::size_t i = 1; i <= n; ++i) {
        const Label c = x[i - 1];
        for (std::size_t k = 0; k <= length; ++k) {
            if (k >= 1) {
                acc.match(static_cast<Eigen::Index>(k - 1), c) += std::exp(f(S::M, i, k) + b(S::M, i, k) - log_p);
            }
            acc.insert(static_cast<Eigen::Index>(k), c) += std::exp(f(S::I, i, k) + b(S::I, i, k) - log_p);
        }
    }
    for (std::size_t k = 0; k <= length; ++k) {
        const auto& t = p.trans[k];
        auto& counts = acc.trans[k];
        for (int s = 0; s < 3; ++s) {
            if (!valid_transition(k, length, s, S::M)) {
                continue;
            }
            double to_m = 0.0, to_i = 0.0, to_d = 0.0;
            for (std::size_t i = 0; i <= n; ++i) {
                const double from = f(s, i, k);
                if (from == kNegInf) {
                    continue;
                }
                if (i < n) {
                    if (k < length) {
                        to_m += std::exp(from + t(s, S::M) + p.match(static_cast<Eigen::Index>(k), x[i]) +
                                         b(S::M, i + 1, k + 1) - log_p);
                    }
                    to_i += std::exp(from + t(s, S::I) + p.insert(static_cast<Eigen::Index>(k), x[i]) +
                                     b(S::I, i + 1, k) - log_p);
                }
                if (k < length) {
                    to_d += std::exp(from + t(s, S::D) + b(S::D, i, k + 1) - log_p);
                }
            }
            if (k == length) {
                to_m = std::exp(f(s, n, k) + t(s, S::M) - log_p);
            }
            counts(s, S::M) += to_m;
            counts(s, S::I) += to_i;
            counts(s, S::D) += to_d;
        }
    }
    return log_p;
}

void normalize_rows(Eigen::MatrixXd& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        m.row(r) /= m.row(r).sum();
    }
}

void initial_transitions(ProfileHmm& hmm) {
    using S = ProfileHmm::State;
    const std::size_t L = hmm.length;
    hmm.transitions.assign(L + 1, Eigen::Matrix3d::Zero());
    for (std::size_t k = 0; k <= L; ++k) {
        auto& t = hmm.transitions[k];
        t.row(S::M) << 0.9, 0.05, 0.05;
        t.row(S::I) << 0.8, 0.15, 0.05;
        t.row(S::D) << 0.8, 0.05, 0.15;
        if (k == 0) {
            t.row(S::D).setZero();
        }
        if (k == L) {
            t.col(S::D).setZero();
            for (int s = 0; s < 3; ++s) {
                const double total = t.row(s).sum();
                if (total > 0.0) {
                    t.row(s) /= total;
                }
            }
        }
    }
}

double prior_term(const ProfileHmm& hmm) {
    double total = hmm.match_emissions.array().log().sum() + hmm.insert_emissions.array().log().sum();
    for (std::size_t k = 0; k <= hmm.length; ++k) {
        for (int s = 0; s < 3; ++s) {
            for (int d = 0; d < 3; ++d) {
                if (valid_transition(k, hmm.length, s, d)) {
                    total += std::log(hmm.transitions[k](s, d));
                }
            }
        }
    }
    return hmm.pseudocount * total;
}

} // namespace

double profile_log_likelihood(const ProfileHmm& hmm, std::span<const Label> sequence) {
    LogParams p(hmm);
    Lattice f(sequence.size(), hmm.length);
    return forward(p, hmm.length, sequence, f);
}

ProfileHmm fit_profile_hmm(std::span<const LabelSeq> sequences, std::size_t alphabet_size,
                           std::size_t length, double pseudocount, std::size_t iterations,
                           std::uint64_t seed) {
    if (sequences.empty()) {
        throw FitError("fit_profile_hmm: no training sequences");
    }
    if (length == 0 || alphabet_size == 0) {
        throw ValidationError("fit_profile_hmm: length and alphabet size must be positive");
    }
    if (!(pseudocount > 0.0) || !std::isfinite(pseudocount)) {
        throw ValidationError("fit_profile_hmm: pseudocount must be positive and finite");
    }
    for (const auto& seq : sequences) {
        for (auto c : seq) {
            if (c >= alphabet_size) {
                throw SchemaError("fit_profile_hmm: label outside alphabet");
            }
        }
    }

    const auto A = static_cast<Eigen::Index>(alphabet_size);
    const auto L = static_cast<Eigen::Index>(length);
    ProfileHmm hmm;
    hmm.length = length;
    hmm.alphabet_size = alphabet_size;
    hmm.pseudocount = pseudocount;
    hmm.insert_emissions = Eigen::MatrixXd::Constant(L + 1, A, 1.0 / static_cast<double>(alphabet_size));
    initial_transitions(hmm);

    Rng rng(seed);
    std::uniform_real_distribution<double> jitter(0.0, 0.01);
    hmm.match_emissions = Eigen::MatrixXd::Constant(L, A, 0.5 / static_cast<double>(alphabet_size));
    std::vector<std::size_t> nonempty;
    for (std::size_t s = 0; s < sequences.size(); ++s) {
        if (!sequences[s].empty()) {
            nonempty.push_back(s);
        }
    }
    if (!nonempty.empty()) {
        const auto& guide = sequences[nonempty[std::uniform_int_distribution<std::size_t>(
            0, nonempty.size() - 1)(rng)]];
        for (std::size_t k = 0; k < length; ++k) {
            const auto pos = k * guide.size() / length;
            hmm.match_emissions(static_cast<Eigen::Index>(k), guide[pos]) += 0.5;
        }
    } else {
        hmm.match_emissions.array() += 0.5 / static_cast<double>(alphabet_size);
    }
    for (Eigen::Index r = 0; r < L; ++r) {
        for (Eigen::Index c = 0; c < A; ++c) {
            hmm.match_emissions(r, c) *= 1.0 + jitter(rng);
        }
    }
    normalize_rows(hmm.match_emissions);

    auto e_step = [&](Accumulator& acc) {
        LogParams p(hmm);
        double total = 0.0;
        for (const auto& seq : sequences) {
            total += expected_counts(p, length, seq, acc);
        }
        return total;
    };

    for (std::size_t it = 0; it < iterations; ++it) {
        Accumulator acc(length, alphabet_size);
        const double ll = e_step(acc);
        hmm.log_likelihood.push_back(ll);
        hmm.log_posterior.push_back(ll + prior_term(hmm));

        hmm.match_emissions = acc.match.array() + pseudocount;
        hmm.insert_emissions = acc.insert.array() + pseudocount;
        normalize_rows(hmm.match_emissions);
        normalize_rows(hmm.insert_emissions);
        for (std::size_t k = 0; k <= length; ++k) {
            auto& t = hmm.transitions[k];
            for (int s = 0; s < 3; ++s) {
                double total = 0.0;
                for (int d = 0; d < 3; ++d) {
                    t(s, d) = valid_transition(k, length, s, d) ? acc.trans[k](s, d) + pseudocount : 0.0;
                    total += t(s, d);
                }
                if (total > 0.0) {
                    t.row(s) /= total;
                }
            }
        }
    }
    {
        Accumulator acc(length, alphabet_size);
        const double ll = e_step(acc);
        hmm.log_likelihood.push_back(ll);
        hmm.log_posterior.push_back(ll + prior_term(hmm));
    }
    return hmm;
}

LabelSeq consensus_string(const ProfileHmm& hmm) {
    LabelSeq out;
    out.reserve(hmm.length);
    for (Eigen::Index k = 0; k < hmm.match_emissions.rows(); ++k) {
        Eigen::Index best = 0;
        for (Eigen::Index c = 1; c < hmm.match_emissions.cols(); ++c) {
            if (hmm.match_emissions(k, c) > hmm.match_emissions(k, best)) {
                best = c;
            }
        }
        out.push_back(static_cast<Label>(best));
    }
    return out;
}

} // namespace meetpat
