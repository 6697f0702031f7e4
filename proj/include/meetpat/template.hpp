#ifndef meetpat_template_hpp
#define meetpat_template_hpp

#include <compare>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "meetpat/corpus.hpp"
#include "json.hpp"

namespace meetpat {

/// A backward arrow `from -> to` with `to < from`.
struct BackEdge {
    std::size_t from = 0;
    std::size_t to = 0;

    auto operator<=>(const BackEdge&) const = default;
};

/*
 * A template is a chain of act labels with implicit forward edges i -> i+1
 * plus a set of backward edges. Instances are immutable values; back edges
 * are kept sorted so structural equality is plain member equality.
 */
class Template {
public:
    Template() = default;
    Template(LabelSeq nodes, std::vector<BackEdge> back_edges = {});

    std::size_t size() const { return nodes_.size(); }
    bool empty() const { return nodes_.empty(); }
    const LabelSeq& nodes() const { return nodes_; }
    Label label(std::size_t node) const { return nodes_.at(node); }
    const std::vector<BackEdge>& back_edges() const { return back_edges_; }
    std::size_t back_edge_count() const { return back_edges_.size(); }
    bool has_back_edge(std::size_t from, std::size_t to) const;

    /// Nodes reachable in one step from `node`; throws ContractViolation when
    /// `node` is out of range. Sorted ascending.
    std::vector<std::size_t> successors(std::size_t node) const;

    bool operator==(const Template&) const = default;

private:
    LabelSeq nodes_;
    std::vector<BackEdge> back_edges_;
};

struct Instantiation {
    std::vector<std::size_t> path;
    LabelSeq labels;

    bool operator==(const Instantiation&) const = default;
};

inline constexpr std::size_t kDefaultEnumerationCap = 12;

/*
 * Every path with min_len <= length <= max_len, in lexicographic order of
 * node indices. Paths may start and end at any node. Refuses (RefusalError)
 * when max_len exceeds `cap`.
 */
std::vector<Instantiation> enumerate_instantiations(const Template& tmpl, std::size_t min_len,
                                                    std::size_t max_len,
                                                    std::size_t cap = kDefaultEnumerationCap);

/// Levenshtein distance with unit costs.
std::size_t edit_distance(std::span<const Label> a, std::span<const Label> b);

/*
 * exact    - minimum over all instantiations of any length.
 * windowed - minimum over instantiations whose length is within
 *            ceil(delta * |x|) of the meeting length |x|.
 */
struct LossMode {
    enum class Kind { exact, windowed };
    Kind kind = Kind::exact;
    double delta = 0.1;

    static LossMode exact() { return {}; }
    static LossMode windowed(double delta = 0.1) { return {Kind::windowed, delta}; }
};

/// Minimum edit distance between `meeting` and any instantiation of `tmpl`.
/// The empty meeting has loss 1 (the shortest instantiation has one node).
std::size_t loss(const Template& tmpl, std::span<const Label> meeting,
                 LossMode mode = LossMode::exact());

struct ObjectiveParams {
    double c1 = 1.0;   // per template node
    double c2 = 0.1;   // per backward edge
};

/// Mean loss over the meetings.
double empirical_risk(const Template& tmpl, std::span<const LabelSeq> meetings,
                      LossMode mode = LossMode::exact());

/// empirical_risk + c1 * |nodes| + c2 * |back edges|
double objective(const Template& tmpl, std::span<const LabelSeq> meetings,
                 const ObjectiveParams& params = {}, LossMode mode = LossMode::exact());

// {"nodes": [name, ...], "back_edges": [[from, to], ...]}
nlohmann::json template_to_json(const Template& tmpl, const Alphabet& alphabet);
Template template_from_json(const nlohmann::json& j, const Alphabet& alphabet);

/// Graphviz rendering: forward edges solid, backward edges dashed.
std::string template_to_dot(const Template& tmpl, const Alphabet& alphabet);

} // namespace meetpat

#endif
