#include "meetpat/annealer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <thread>

#include "meetpat/error.hpp"

namespace meetpat {

void AnnealConfig::validate() const {
    if (!(t0 > 0.0)) {
        throw ValidationError("anneal: t0 must be positive");
    }
    if (!(cool > 0.0 && cool < 1.0)) {
        throw ValidationError("anneal: cool must lie in (0, 1)");
    }
    if (restart_period == 0 || max_accepted == 0 || max_nodes == 0) {
        throw ValidationError("anneal: restart_period, max_accepted and max_nodes must be positive");
    }
    if (alphabet_size == 0) {
        throw ValidationError("anneal: alphabet_size must be positive");
    }
    if (params.c1 < 0.0 || params.c2 < 0.0) {
        throw ValidationError("anneal: c1 and c2 must be nonnegative");
    }
}

std::string to_string(MoveKind kind) {
    switch (kind) {
        case MoveKind::insert_node: return "insert_node";
        case MoveKind::delete_node: return "delete_node";
        case MoveKind::insert_back_edge: return "insert_back_edge";
        case MoveKind::delete_back_edge: return "delete_back_edge";
    }
    return "unknown";
}

namespace {

Template insert_node(const Template& tmpl, std::size_t pos, Label label) {
    LabelSeq nodes = tmpl.nodes();
    nodes.insert(nodes.begin() + static_cast<std::ptrdiff_t>(pos), label);
    std::vector<BackEdge> edges;
    for (auto e : tmpl.back_edges()) {
        edges.push_back({e.from >= pos ? e.from + 1 : e.from, e.to >= pos ? e.to + 1 : e.to});
    }
    return Template(std::move(nodes), std::move(edges));
}

Template delete_node(const Template& tmpl, std::size_t pos) {
    LabelSeq nodes = tmpl.nodes();
    nodes.erase(nodes.begin() + static_cast<std::ptrdiff_t>(pos));
    std::vector<BackEdge> edges;
    for (auto e : tmpl.back_edges()) {
        if (e.from == pos || e.to == pos) {
            continue;
        }
        edges.push_back({e.from > pos ? e.from - 1 : e.from, e.to > pos ? e.to - 1 : e.to});
    }
    return Template(std::move(nodes), std::move(edges));
}

std::vector<BackEdge> absent_back_edges(const Template& tmpl) {
    std::vector<BackEdge> out;
    for (std::size_t from = 1; from < tmpl.size(); ++from) {
        for (std::size_t to = 0; to < from; ++to) {
            if (!tmpl.has_back_edge(from, to)) {
                out.push_back({from, to});
            }
        }
    }
    return out;
}

std::size_t uniform_index(std::size_t n, Rng& rng) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

} // namespace

Proposal propose_move(const Template& tmpl, std::size_t alphabet_size, std::size_t max_nodes,
                      std::size_t max_back_edges, Rng& rng) {
    if (tmpl.empty()) {
        throw ContractViolation("propose_move needs a nonempty template");
    }
    const std::size_t n = tmpl.size();
    const std::size_t slots = n * (n - 1) / 2;
    std::vector<MoveKind> feasible;
    if (n < max_nodes && alphabet_size > 0) {
        feasible.push_back(MoveKind::insert_node);
    }
    if (n >= 2) {
        feasible.push_back(MoveKind::delete_node);
    }
    if (tmpl.back_edge_count() < max_back_edges && tmpl.back_edge_count() < slots) {
        feasible.push_back(MoveKind::insert_back_edge);
    }
    if (tmpl.back_edge_count() > 0) {
        feasible.push_back(MoveKind::delete_back_edge);
    }
    if (feasible.empty()) {
        throw RefusalError("template has no feasible neighbor under the configured caps");
    }

    const MoveKind kind = feasible[uniform_index(feasible.size(), rng)];
    switch (kind) {
        case MoveKind::insert_node: {
            const auto pos = uniform_index(n + 1, rng);
            const auto label = static_cast<Label>(uniform_index(alphabet_size, rng));
            return {kind, insert_node(tmpl, pos, label)};
        }
        case MoveKind::delete_node:
            return {kind, delete_node(tmpl, uniform_index(n, rng))};
        case MoveKind::insert_back_edge: {
            const auto absent = absent_back_edges(tmpl);
            auto edges = tmpl.back_edges();
            edges.push_back(absent[uniform_index(absent.size(), rng)]);
            return {kind, Template(tmpl.nodes(), std::move(edges))};
        }
        case MoveKind::delete_back_edge: {
            auto edges = tmpl.back_edges();
            edges.erase(edges.begin() + static_cast<std::ptrdiff_t>(uniform_index(edges.size(), rng)));
            return {kind, Template(tmpl.nodes(), std::move(edges))};
        }
    }
    throw ContractViolation("unreachable move kind");
}

bool metropolis_accept(double delta_f, double temperature, Rng& rng) {
    if (delta_f <= 0.0) {
        return true;
    }
    if (!(temperature > 0.0)) {
        return false;
    }
    const double p = std::exp(-delta_f / temperature);
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

AnnealResult anneal(std::span<const LabelSeq> meetings, const Template& init,
                    const AnnealConfig& config) {
    config.validate();
    if (meetings.empty()) {
        throw ValidationError("anneal needs at least one meeting");
    }
    if (init.empty() || init.size() > config.max_nodes ||
        init.back_edge_count() > config.max_back_edges) {
        throw ValidationError("anneal: initial template violates the size caps");
    }
    for (auto label : init.nodes()) {
        if (label >= config.alphabet_size) {
            throw ValidationError("anneal: initial template uses a label outside the alphabet");
        }
    }

    Rng rng(config.seed);
    auto evaluate = [&](const Template& t) {
        return objective(t, meetings, config.params, config.mode);
    };

    AnnealTrace trace;
    Template current = init;
    double current_f = evaluate(init);
    Template best = init;
    double best_f = current_f;
    trace.init_f = current_f;

    std::size_t iter = 0;
    std::size_t last_restart = 0;
    std::size_t stalled = 0;
    double temperature = config.t0;
    const std::size_t cap = config.proposal_cap();

    while (iter < config.max_accepted && trace.proposals < cap) {
        if (iter > 0 && iter % config.restart_period == 0 && last_restart != iter) {
            last_restart = iter;
            temperature = config.t0;
            current = best;
            current_f = best_f;
            ++trace.restarts;
        }
        auto proposal = propose_move(current, config.alphabet_size, config.max_nodes,
                                     config.max_back_edges, rng);
        ++trace.proposals;
        const double proposed_f = evaluate(proposal.result);
        const double delta = proposed_f - current_f;
        const bool accept = proposed_f < current_f || metropolis_accept(delta, temperature, rng);
        if (accept) {
            current = std::move(proposal.result);
            current_f = proposed_f;
            ++iter;
            stalled = 0;
            if (current_f < best_f) {
                best = current;
                best_f = current_f;
            }
            trace.accepted_moves.push_back({iter, proposal.kind, delta, temperature, best_f});
        } else if (config.stall_limit > 0 && ++stalled >= config.stall_limit) {
            trace.converged = true;
            break;
        }
        // cooling restarts from t0 at every jump back to the best template
        temperature = config.t0 * std::pow(config.cool, static_cast<double>(iter - last_restart));
    }

    trace.best_f = best_f;
    trace.best_template = best;
    return {std::move(best), std::move(trace)};
}

std::set<LabelSeq> instantiation_signature(const Template& tmpl, std::size_t max_len) {
    std::set<LabelSeq> out;
    if (tmpl.empty() || max_len == 0) {
        return out;
    }
    for (auto& inst : enumerate_instantiations(tmpl, 1, max_len, std::max(max_len, kDefaultEnumerationCap))) {
        out.insert(std::move(inst.labels));
    }
    return out;
}

bool equivalent(const Template& a, const Template& b, std::size_t max_len) {
    return instantiation_signature(a, max_len) == instantiation_signature(b, max_len);
}

ConsensusReport build_consensus(std::span<const StartResult> runs, std::size_t equivalence_len) {
    ConsensusReport report;
    report.total_runs = runs.size();
    std::map<std::set<LabelSeq>, std::size_t> index;
    std::vector<double> representative_f;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        auto signature = instantiation_signature(runs[i].best, equivalence_len);
        auto [it, inserted] = index.emplace(std::move(signature), report.groups.size());
        if (inserted) {
            report.groups.push_back({runs[i].best, {i}});
            representative_f.push_back(runs[i].best_f);
            continue;
        }
        auto& group = report.groups[it->second];
        group.members.push_back(i);
        if (runs[i].best_f < representative_f[it->second]) {
            group.representative = runs[i].best;
            representative_f[it->second] = runs[i].best_f;
        }
    }
    auto group_best = [&](const ConsensusGroup& g) {
        double f = runs[g.members.front()].best_f;
        for (auto m : g.members) {
            f = std::min(f, runs[m].best_f);
        }
        return f;
    };
    std::stable_sort(report.groups.begin(), report.groups.end(),
                     [&](const ConsensusGroup& a, const ConsensusGroup& b) {
                         if (a.members.size() != b.members.size()) {
                             return a.members.size() > b.members.size();
                         }
                         return group_best(a) < group_best(b);
                     });
    if (!report.groups.empty()) {
        report.modal_frequency = static_cast<double>(report.groups.front().members.size()) /
                                 static_cast<double>(runs.size());
    }
    return report;
}

MultiStartResult multi_start(std::span<const LabelSeq> meetings, const AnnealConfig& config,
                             const MultiStartOptions& options) {
    config.validate();
    if (meetings.empty()) {
        throw ValidationError("multi_start needs at least one meeting");
    }
    const std::size_t starts = std::min(meetings.size(), options.max_starts.value_or(meetings.size()));
    MultiStartResult result;
    result.runs.resize(starts);

    auto run_one = [&](std::size_t i) {
        const auto& seq = meetings[i];
        LabelSeq nodes(seq.begin(), seq.begin() + static_cast<std::ptrdiff_t>(
                                                      std::min(seq.size(), config.max_nodes)));
        if (nodes.empty()) {
            nodes.push_back(0);
        }
        AnnealConfig run_config = config;
        run_config.seed = derive_seed(config.seed, i);
        auto outcome = anneal(meetings, Template(std::move(nodes)), run_config);
        result.runs[i] = {std::move(outcome.best), outcome.trace.best_f, i, std::move(outcome.trace)};
    };

    std::size_t threads = options.threads ? options.threads : std::thread::hardware_concurrency();
    threads = std::clamp<std::size_t>(threads, 1, starts);
    if (threads == 1) {
        for (std::size_t i = 0; i < starts; ++i) {
            run_one(i);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::exception_ptr> errors(threads);
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < threads; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t i = next++; i < starts; i = next++) {
                        run_one(i);
                    }
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto& t : pool) {
            t.join();
        }
        for (auto& e : errors) {
            if (e) {
                std::rethrow_exception(e);
            }
        }
    }

    for (std::size_t i = 1; i < starts; ++i) {
        if (result.runs[i].best_f < result.runs[result.best_run].best_f) {
            result.best_run = i;
        }
    }
    result.consensus = build_consensus(result.runs, options.equivalence_len);
    return result;
}

} // namespace meetpat
