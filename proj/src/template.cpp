#include "meetpat/template.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "meetpat/error.hpp"

namespace meetpat {

Template::Template(LabelSeq nodes, std::vector<BackEdge> back_edges)
    : nodes_(std::move(nodes)), back_edges_(std::move(back_edges)) {
    for (const auto& e : back_edges_) {
        if (e.from >= nodes_.size() || e.to >= e.from) {
            throw ContractViolation("back edge (" + std::to_string(e.from) + ", " +
                                    std::to_string(e.to) + ") must satisfy to < from < " +
                                    std::to_string(nodes_.size()));
        }
    }
    std::sort(back_edges_.begin(), back_edges_.end());
    if (std::adjacent_find(back_edges_.begin(), back_edges_.end()) != back_edges_.end()) {
        throw ContractViolation("duplicate back edge");
    }
}

bool Template::has_back_edge(std::size_t from, std::size_t to) const {
    return std::binary_search(back_edges_.begin(), back_edges_.end(), BackEdge{from, to});
}

std::vector<std::size_t> Template::successors(std::size_t node) const {
    if (node >= nodes_.size()) {
        throw ContractViolation("node index " + std::to_string(node) + " out of range");
    }
    std::vector<std::size_t> out;
    for (const auto& e : back_edges_) {
        if (e.from == node) {
            out.push_back(e.to);
        }
    }
    if (node + 1 < nodes_.size()) {
        out.push_back(node + 1);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<Instantiation> enumerate_instantiations(const Template& tmpl, std::size_t min_len,
                                                    std::size_t max_len, std::size_t cap) {
    if (min_len < 1 || min_len > max_len) {
        throw ContractViolation("enumerate_instantiations needs 1 <= min_len <= max_len");
    }
    if (max_len > cap) {
        throw RefusalError("instantiation length " + std::to_string(max_len) +
                           " exceeds enumeration cap " + std::to_string(cap));
    }
    std::vector<Instantiation> out;
    if (tmpl.empty()) {
        return out;
    }
    std::vector<std::vector<std::size_t>> succ(tmpl.size());
    for (std::size_t v = 0; v < tmpl.size(); ++v) {
        succ[v] = tmpl.successors(v);
    }
    std::vector<std::size_t> path;
    auto visit = [&](auto&& self, std::size_t node) -> void {
        path.push_back(node);
        if (path.size() >= min_len) {
            Instantiation inst;
            inst.path = path;
            for (auto p : path) {
                inst.labels.push_back(tmpl.label(p));
            }
            out.push_back(std::move(inst));
        }
        if (path.size() < max_len) {
            for (auto next : succ[node]) {
                self(self, next);
            }
        }
        path.pop_back();
    };
    for (std::size_t v = 0; v < tmpl.size(); ++v) {
        visit(visit, v);
    }
    return out;
}

std::size_t edit_distance(std::span<const Label> a, std::span<const Label> b) {
    if (a.size() < b.size()) {
        std::swap(a, b);
    }
    std::vector<std::size_t> row(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) {
        row[j] = j;
    }
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t diag = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t up = row[j];
            row[j] = std::min({up + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0u : 1u)});
            diag = up;
        }
    }
    return row[b.size()];
}

namespace {

using Cost = std::uint32_t;
constexpr Cost kInf = std::numeric_limits<Cost>::max() / 4;

std::vector<std::vector<std::size_t>> predecessors(const Template& tmpl) {
    std::vector<std::vector<std::size_t>> pred(tmpl.size());
    for (std::size_t u = 0; u + 1 < tmpl.size(); ++u) {
        pred[u + 1].push_back(u);
    }
    for (const auto& e : tmpl.back_edges()) {
        pred[e.to].push_back(e.from);
    }
    return pred;
}

/*
 * Shortest path over the product graph (meeting prefix length, template
 * node). A state (i, v) is "x[0..i) aligned to a path ending at v". Edges
 * between layers consume one meeting symbol (match/substitute into a
 * successor node, or insertion staying on v); edges within a layer append a
 * deleted node (cost 1). In-layer edges all cost 1, so relaxing until
 * stable gives the exact layer minimum.
 */
std::size_t exact_loss(const Template& tmpl, std::span<const Label> x) {
    const std::size_t n = tmpl.size();
    const auto pred = predecessors(tmpl);
    const auto& labels = tmpl.nodes();

    std::vector<Cost> prev(n, 1), cur(n);
    auto relax_layer = [&](std::vector<Cost>& layer) {
        bool changed = true;
        while (changed) {
            changed = false;
            for (std::size_t v = 0; v < n; ++v) {
                for (auto u : pred[v]) {
                    if (layer[u] + 1 < layer[v]) {
                        layer[v] = layer[u] + 1;
                        changed = true;
                    }
                }
            }
        }
    };
    for (std::size_t i = 1; i <= x.size(); ++i) {
        const Label c = x[i - 1];
        const Cost inserted_all = static_cast<Cost>(i - 1);
        for (std::size_t v = 0; v < n; ++v) {
            const Cost sub = labels[v] == c ? 0 : 1;
            Cost best = std::min<Cost>(inserted_all + sub, prev[v] + 1);
            best = std::min<Cost>(best, static_cast<Cost>(i) + 1);
            for (auto u : pred[v]) {
                best = std::min<Cost>(best, prev[u] + sub);
            }
            cur[v] = best;
        }
        relax_layer(cur);
        std::swap(prev, cur);
    }
    return *std::min_element(prev.begin(), prev.end());
}

/*
 * Same alignment with path length as an extra coordinate. Every transition
 * advances either the meeting position or the path length, so the state
 * space (i, len, v) is acyclic and a plain sweep suffices.
 */
std::size_t windowed_loss(const Template& tmpl, std::span<const Label> x, double delta) {
    const std::size_t n = tmpl.size();
    const auto pred = predecessors(tmpl);
    const auto& labels = tmpl.nodes();
    const std::size_t width = static_cast<std::size_t>(std::ceil(delta * static_cast<double>(x.size())));
    const std::size_t lo = std::max<std::size_t>(1, x.size() > width ? x.size() - width : 0);
    const std::size_t hi = std::max(lo, x.size() + width);

    // layer[len * n + v]
    std::vector<Cost> prev((hi + 1) * n, kInf), cur((hi + 1) * n, kInf);
    auto at = [n](std::vector<Cost>& layer, std::size_t len, std::size_t v) -> Cost& {
        return layer[len * n + v];
    };
    for (std::size_t i = 0; i <= x.size(); ++i) {
        std::fill(cur.begin(), cur.end(), kInf);
        for (std::size_t len = 1; len <= hi; ++len) {
            for (std::size_t v = 0; v < n; ++v) {
                Cost best = kInf;
                if (i >= 1) {
                    const Cost sub = labels[v] == x[i - 1] ? 0 : 1;
                    best = std::min(best, at(prev, len, v) + 1);
                    if (len == 1) {
                        best = std::min<Cost>(best, static_cast<Cost>(i - 1) + sub);
                    } else {
                        for (auto u : pred[v]) {
                            best = std::min(best, at(prev, len - 1, u) + sub);
                        }
                    }
                }
                if (len == 1) {
                    best = std::min<Cost>(best, static_cast<Cost>(i) + 1);
                } else {
                    for (auto u : pred[v]) {
                        best = std::min(best, at(cur, len - 1, u) + 1);
                    }
                }
                at(cur, len, v) = best;
            }
        }
        std::swap(prev, cur);
    }
    Cost best = kInf;
    for (std::size_t len = lo; len <= hi; ++len) {
        for (std::size_t v = 0; v < n; ++v) {
            best = std::min(best, at(prev, len, v));
        }
    }
    return best;
}

} // namespace

std::size_t loss(const Template& tmpl, std::span<const Label> meeting, LossMode mode) {
    if (tmpl.empty()) {
        throw ContractViolation("loss is undefined for the empty template");
    }
    if (mode.kind == LossMode::Kind::windowed) {
        if (!(mode.delta >= 0.0)) {
            throw ValidationError("windowed loss needs delta >= 0");
        }
        return windowed_loss(tmpl, meeting, mode.delta);
    }
    return exact_loss(tmpl, meeting);
}

double empirical_risk(const Template& tmpl, std::span<const LabelSeq> meetings, LossMode mode) {
    if (meetings.empty()) {
        throw ValidationError("empirical risk needs at least one meeting");
    }
    double total = 0.0;
    for (const auto& m : meetings) {
        total += static_cast<double>(loss(tmpl, m, mode));
    }
    return total / static_cast<double>(meetings.size());
}

double objective(const Template& tmpl, std::span<const LabelSeq> meetings,
                 const ObjectiveParams& params, LossMode mode) {
    return empirical_risk(tmpl, meetings, mode) + params.c1 * static_cast<double>(tmpl.size()) +
           params.c2 * static_cast<double>(tmpl.back_edge_count());
}

nlohmann::json template_to_json(const Template& tmpl, const Alphabet& alphabet) {
    nlohmann::json nodes = nlohmann::json::array();
    for (auto label : tmpl.nodes()) {
        nodes.push_back(alphabet.name(label));
    }
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& e : tmpl.back_edges()) {
        edges.push_back({e.from, e.to});
    }
    return {{"nodes", std::move(nodes)}, {"back_edges", std::move(edges)}};
}

Template template_from_json(const nlohmann::json& j, const Alphabet& alphabet) {
    try {
        LabelSeq nodes;
        for (const auto& name : j.at("nodes")) {
            nodes.push_back(alphabet.at(name.get<std::string>()));
        }
        std::vector<BackEdge> edges;
        if (auto it = j.find("back_edges"); it != j.end()) {
            for (const auto& e : *it) {
                if (!e.is_array() || e.size() != 2) {
                    throw ParseError("back edge must be a [from, to] pair");
                }
                edges.push_back({e[0].get<std::size_t>(), e[1].get<std::size_t>()});
            }
        }
        return Template(std::move(nodes), std::move(edges));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed template JSON: ") + e.what());
    } catch (const ContractViolation& e) {
        throw SchemaError(e.what());
    }
}

std::string template_to_dot(const Template& tmpl, const Alphabet& alphabet) {
    std::ostringstream out;
    out << "digraph template {\n  rankdir=LR;\n";
    for (std::size_t v = 0; v < tmpl.size(); ++v) {
        out << "  n" << v << " [label=\"" << alphabet.name(tmpl.label(v)) << "\"];\n";
    }
    for (std::size_t v = 0; v + 1 < tmpl.size(); ++v) {
        out << "  n" << v << " -> n" << v + 1 << ";\n";
    }
    for (const auto& e : tmpl.back_edges()) {
        out << "  n" << e.from << " -> n" << e.to << " [style=dashed];\n";
    }
    out << "}\n";
    return out.str();
}

} // namespace meetpat
