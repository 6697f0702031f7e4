#ifndef meetpat_corpus_hpp
#define meetpat_corpus_hpp

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace meetpat {

class Template;

/// Index of an act label within an Alphabet.
using Label = std::uint16_t;
using LabelSeq = std::vector<Label>;

/*
 * Ordered set of act label names. Labels are referred to by their position
 * in this list everywhere else in the library.
 */
class Alphabet {
public:
    Alphabet() = default;
    explicit Alphabet(std::vector<std::string> names);

    std::size_t size() const { return names_.size(); }
    const std::string& name(Label label) const { return names_.at(label); }
    const std::vector<std::string>& names() const { return names_; }

    std::optional<Label> find(std::string_view name) const;
    // throws SchemaError when the name is absent
    Label at(std::string_view name) const;

    bool operator==(const Alphabet& other) const { return names_ == other.names_; }

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, Label> index_;
};

struct DialogueAct {
    double time = 0.0;              // seconds from meeting start
    std::string speaker;
    Label label = 0;
    std::optional<std::string> text;

    bool operator==(const DialogueAct&) const = default;
};

struct DecisionWindow {
    double start_s = 0.0;
    double end_s = 0.0;

    bool operator==(const DecisionWindow&) const = default;
};

struct Suggestion {
    std::size_t act_index = 0;
    bool accepted = false;

    bool operator==(const Suggestion&) const = default;
};

struct Meeting {
    std::string id;
    std::vector<DialogueAct> acts;
    std::vector<DecisionWindow> decision_windows;
    std::vector<Suggestion> suggestions;

    bool operator==(const Meeting&) const = default;
};

struct Corpus {
    Alphabet alphabet;
    std::vector<Meeting> meetings;

    bool operator==(const Corpus&) const = default;
};

/// The six acts used for decision detection, in feature order.
inline constexpr std::array<std::string_view, 6> kDecisionActs = {
    "act-directive", "offer", "accept", "reject", "info-request", "information"};

/// The four assessment acts used for template mining.
inline constexpr std::array<std::string_view, 4> kAssessmentActs = {"SP", "SN", "AP", "AN"};

/// Throws SchemaError/ValidationError naming the first violated invariant.
void validate(const Corpus& corpus);

/*
 * JSON Lines corpus format. The first line declares the alphabet:
 *   {"alphabet": ["SP", "AP", ...]}
 * and every following non-blank line is one meeting:
 *   {"id": "m1", "acts": [{"t": 0.0, "spk": "A", "act": "SP", "text": "..."}],
 *    "decision_windows": [[t0, t1]], "suggestions": [{"i": 3, "accepted": true}]}
 */
Corpus parse_corpus(std::string_view text);
Corpus read_corpus(const std::filesystem::path& path);
std::string serialize_corpus(const Corpus& corpus);
void write_corpus(const Corpus& corpus, const std::filesystem::path& path);

/*
 * Labels of the acts whose label is in `keep`, in meeting order. With
 * `collapse_same_speaker_repeats`, each contiguous run of kept acts sharing
 * both speaker and label contributes a single element.
 */
LabelSeq project_sequence(const Meeting& meeting, std::span<const Label> keep,
                          bool collapse_same_speaker_repeats);

/*
 * Rebuilds a corpus over the sub-alphabet `keep` (in the given order),
 * dropping every other act. A collapsed run keeps its first act. Decision
 * windows are clipped to the last kept act; suggestions on dropped acts
 * are discarded.
 */
Corpus restrict_corpus(const Corpus& corpus, std::span<const std::string> keep,
                       bool collapse_same_speaker_repeats);

/// Label sequence of every meeting, unfiltered.
std::vector<LabelSeq> sequences(const Corpus& corpus);

/*
 * Planted-template generator. Each meeting is a uniformly sampled
 * instantiation of `target_len` nodes, then perturbed: at every position,
 * with probability `noise_rate`, one of substitute / insert / delete is
 * applied (chosen uniformly). Acts are one second apart and speakers
 * rotate so that no two consecutive acts share a speaker.
 */
Corpus synth_template_corpus(const Template& tmpl, const Alphabet& alphabet, std::size_t m,
                             std::size_t target_len, double noise_rate, std::uint64_t seed);

/*
 * Decision-window generator over the six decision acts. Every meeting has
 * four blocks of `window_size` acts; one block, picked uniformly, is the
 * decision window and draws its acts from `inside_rates`.
 */
Corpus synth_decision_corpus(std::size_t m, std::size_t window_size,
                             std::span<const double> inside_rates,
                             std::span<const double> outside_rates, std::uint64_t seed);

struct WrapupSpec {
    double decision_minutes = 0.0;
    double wrapup_minutes = 0.0;
};

/// One meeting per spec whose last decision window ends at `decision_minutes`
/// and whose last act falls `wrapup_minutes` later.
Corpus synth_wrapup_corpus(std::span<const WrapupSpec> specs, std::uint64_t seed);

struct SuggestionSynthConfig {
    std::size_t meetings = 20;
    std::size_t suggestions_per_meeting = 50;
    std::size_t vocabulary_size = 200;
    std::size_t words_per_suggestion = 8;
    double base_accept_rate = 0.7;
    std::vector<std::string> positive_words;   // raise acceptance when present
    std::vector<std::string> negative_words;   // lower acceptance when present
    double word_rate = 0.08;                   // chance each planted word is used
    double effect = 0.25;                      // probability shift per planted word
};

/// Suggestion corpus with planted persuasive and non-persuasive words.
Corpus synth_suggestion_corpus(const SuggestionSynthConfig& config, std::uint64_t seed);

} // namespace meetpat

#endif
