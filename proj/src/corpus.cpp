#include "meetpat/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "meetpat/error.hpp"
#include "meetpat/random.hpp"
#include "meetpat/template.hpp"

namespace meetpat {

using nlohmann::json;

Alphabet::Alphabet(std::vector<std::string> names) : names_(std::move(names)) {
    if (names_.empty()) {
        throw ValidationError("alphabet must contain at least one label");
    }
    if (names_.size() > std::numeric_limits<Label>::max()) {
        throw ValidationError("alphabet too large");
    }
    for (std::size_t i = 0; i < names_.size(); ++i) {
        if (names_[i].empty()) {
            throw ValidationError("alphabet contains an empty label");
        }
        if (!index_.emplace(names_[i], static_cast<Label>(i)).second) {
            throw ValidationError("duplicate label in alphabet: " + names_[i]);
        }
    }
}

std::optional<Label> Alphabet::find(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) {
        return std::nullopt;
    }
    return it->second;
}

Label Alphabet::at(std::string_view name) const {
    if (auto label = find(name)) {
        return *label;
    }
    throw SchemaError("unknown act label: " + std::string(name));
}

namespace {

void validate_meeting(const Meeting& meeting, const Alphabet& alphabet) {
    const std::string where = "meeting '" + meeting.id + "': ";
    double prev = 0.0;
    for (std::size_t i = 0; i < meeting.acts.size(); ++i) {
        const auto& act = meeting.acts[i];
        if (!(act.time >= 0.0)) {
            throw ValidationError(where + "negative timestamp at act " + std::to_string(i));
        }
        if (i > 0 && act.time < prev) {
            throw ValidationError(where + "acts not sorted by time at act " + std::to_string(i));
        }
        if (act.label >= alphabet.size()) {
            throw SchemaError(where + "label index out of alphabet at act " + std::to_string(i));
        }
        prev = act.time;
    }
    const double last = meeting.acts.empty() ? 0.0 : meeting.acts.back().time;
    for (const auto& w : meeting.decision_windows) {
        if (!(w.start_s >= 0.0) || !(w.end_s >= w.start_s) || w.end_s > last) {
            throw ValidationError(where + "decision window outside [0, last act time]");
        }
    }
    for (const auto& s : meeting.suggestions) {
        if (s.act_index >= meeting.acts.size()) {
            throw SchemaError(where + "suggestion index " + std::to_string(s.act_index) +
                              " out of range");
        }
    }
}

json meeting_to_json(const Meeting& meeting, const Alphabet& alphabet) {
    json acts = json::array();
    for (const auto& act : meeting.acts) {
        json a = {{"t", act.time}, {"spk", act.speaker}, {"act", alphabet.name(act.label)}};
        if (act.text) {
            a["text"] = *act.text;
        }
        acts.push_back(std::move(a));
    }
    json out = {{"id", meeting.id}, {"acts", std::move(acts)}};
    if (!meeting.decision_windows.empty()) {
        json windows = json::array();
        for (const auto& w : meeting.decision_windows) {
            windows.push_back({w.start_s, w.end_s});
        }
        out["decision_windows"] = std::move(windows);
    }
    if (!meeting.suggestions.empty()) {
        json sugg = json::array();
        for (const auto& s : meeting.suggestions) {
            sugg.push_back({{"i", s.act_index}, {"accepted", s.accepted}});
        }
        out["suggestions"] = std::move(sugg);
    }
    return out;
}

Meeting meeting_from_json(const json& j, const Alphabet& alphabet) {
    Meeting meeting;
    meeting.id = j.at("id").get<std::string>();
    for (const auto& a : j.at("acts")) {
        DialogueAct act;
        act.time = a.at("t").get<double>();
        act.speaker = a.at("spk").get<std::string>();
        act.label = alphabet.at(a.at("act").get<std::string>());
        if (auto it = a.find("text"); it != a.end() && !it->is_null()) {
            act.text = it->get<std::string>();
        }
        meeting.acts.push_back(std::move(act));
    }
    if (auto it = j.find("decision_windows"); it != j.end()) {
        for (const auto& w : *it) {
            if (!w.is_array() || w.size() != 2) {
                throw ParseError("decision window must be a [start, end] pair");
            }
            meeting.decision_windows.push_back({w[0].get<double>(), w[1].get<double>()});
        }
    }
    if (auto it = j.find("suggestions"); it != j.end()) {
        for (const auto& s : *it) {
            const auto index = s.at("i").get<long long>();
            if (index < 0) {
                throw SchemaError("negative suggestion index");
            }
            meeting.suggestions.push_back(
                {static_cast<std::size_t>(index), s.at("accepted").get<bool>()});
        }
    }
    return meeting;
}

bool is_blank(std::string_view line) {
    return std::all_of(line.begin(), line.end(),
                       [](unsigned char c) { return std::isspace(c) != 0; });
}

std::string speaker_for(std::size_t index) {
    return "S" + std::to_string(index % 4);
}

std::string meeting_id(const char* prefix, std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s-%04zu", prefix, index);
    return buf;
}

} // namespace

void validate(const Corpus& corpus) {
    if (corpus.meetings.empty()) {
        throw ValidationError("empty corpus");
    }
    for (const auto& meeting : corpus.meetings) {
        validate_meeting(meeting, corpus.alphabet);
    }
}

Corpus parse_corpus(std::string_view text) {
    std::optional<Alphabet> alphabet;
    Corpus corpus;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto end = std::min(text.find('\n', pos), text.size());
        const auto line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (is_blank(line)) {
            if (end == text.size()) {
                break;
            }
            continue;
        }
        const std::string where = "line " + std::to_string(line_no) + ": ";
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(where + "malformed JSON (" + e.what() + ")");
        }
        try {
            if (!alphabet) {
                if (!j.is_object() || !j.contains("alphabet")) {
                    throw ParseError(where + "first record must declare the alphabet");
                }
                alphabet.emplace(j.at("alphabet").get<std::vector<std::string>>());
                continue;
            }
            auto meeting = meeting_from_json(j, *alphabet);
            validate_meeting(meeting, *alphabet);
            corpus.meetings.push_back(std::move(meeting));
        } catch (const json::exception& e) {
            throw ParseError(where + "malformed meeting record (" + e.what() + ")");
        } catch (const ParseError&) {
            throw;
        } catch (const SchemaError& e) {
            throw SchemaError(where + e.what());
        } catch (const ValidationError& e) {
            throw ValidationError(where + e.what());
        }
        if (end == text.size()) {
            break;
        }
    }
    if (!alphabet || corpus.meetings.empty()) {
        throw ValidationError("empty corpus");
    }
    corpus.alphabet = std::move(*alphabet);
    return corpus;
}

Corpus read_corpus(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open corpus file: " + path.string());
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_corpus(buffer.str());
}

std::string serialize_corpus(const Corpus& corpus) {
    validate(corpus);
    std::string out = json{{"alphabet", corpus.alphabet.names()}}.dump();
    out += '\n';
    for (const auto& meeting : corpus.meetings) {
        out += meeting_to_json(meeting, corpus.alphabet).dump();
        out += '\n';
    }
    return out;
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write corpus file: " + path.string());
    }
    out << serialize_corpus(corpus);
}

LabelSeq project_sequence(const Meeting& meeting, std::span<const Label> keep,
                          bool collapse_same_speaker_repeats) {
    LabelSeq out;
    const DialogueAct* prev = nullptr;
    for (const auto& act : meeting.acts) {
        if (std::find(keep.begin(), keep.end(), act.label) == keep.end()) {
            continue;
        }
        if (collapse_same_speaker_repeats && prev != nullptr && prev->label == act.label &&
            prev->speaker == act.speaker) {
            continue;
        }
        out.push_back(act.label);
        prev = &act;
    }
    return out;
}

Corpus restrict_corpus(const Corpus& corpus, std::span<const std::string> keep,
                       bool collapse_same_speaker_repeats) {
    Corpus out;
    out.alphabet = Alphabet(std::vector<std::string>(keep.begin(), keep.end()));
    // old label -> new label, or -1 when dropped
    std::vector<int> remap(corpus.alphabet.size(), -1);
    for (std::size_t i = 0; i < keep.size(); ++i) {
        remap[corpus.alphabet.at(keep[i])] = static_cast<int>(i);
    }
    for (const auto& meeting : corpus.meetings) {
        Meeting m;
        m.id = meeting.id;
        std::vector<long> new_index(meeting.acts.size(), -1);
        for (std::size_t i = 0; i < meeting.acts.size(); ++i) {
            const auto& act = meeting.acts[i];
            const int mapped = remap[act.label];
            if (mapped < 0) {
                continue;
            }
            if (collapse_same_speaker_repeats && !m.acts.empty() &&
                m.acts.back().label == mapped && m.acts.back().speaker == act.speaker) {
                continue;
            }
            DialogueAct copy = act;
            copy.label = static_cast<Label>(mapped);
            new_index[i] = static_cast<long>(m.acts.size());
            m.acts.push_back(std::move(copy));
        }
        const double last = m.acts.empty() ? 0.0 : m.acts.back().time;
        for (const auto& w : meeting.decision_windows) {
            if (w.start_s <= last) {
                m.decision_windows.push_back({w.start_s, std::min(w.end_s, last)});
            }
        }
        for (const auto& s : meeting.suggestions) {
            if (new_index[s.act_index] >= 0) {
                m.suggestions.push_back({static_cast<std::size_t>(new_index[s.act_index]),
                                         s.accepted});
            }
        }
        out.meetings.push_back(std::move(m));
    }
    return out;
}

std::vector<LabelSeq> sequences(const Corpus& corpus) {
    std::vector<LabelSeq> out;
    out.reserve(corpus.meetings.size());
    for (const auto& meeting : corpus.meetings) {
        LabelSeq seq;
        seq.reserve(meeting.acts.size());
        for (const auto& act : meeting.acts) {
            seq.push_back(act.label);
        }
        out.push_back(std::move(seq));
    }
    return out;
}

namespace {

// Uniform sample of a path with exactly `length` nodes.
std::vector<std::size_t> sample_path(const Template& tmpl, std::size_t length, Rng& rng) {
    const std::size_t n = tmpl.size();
    std::vector<std::vector<std::size_t>> succ(n);
    for (std::size_t v = 0; v < n; ++v) {
        succ[v] = tmpl.successors(v);
    }
    // paths[r][v] = number of paths of r nodes starting at v
    std::vector<std::vector<long double>> paths(length + 1, std::vector<long double>(n, 0.0L));
    for (std::size_t v = 0; v < n; ++v) {
        paths[1][v] = 1.0L;
    }
    for (std::size_t r = 2; r <= length; ++r) {
        for (std::size_t v = 0; v < n; ++v) {
            long double total = 0.0L;
            for (auto s : succ[v]) {
                total += paths[r - 1][s];
            }
            paths[r][v] = total;
        }
    }
    auto pick = [&](std::span<const std::size_t> candidates, std::size_t r) {
        long double total = 0.0L;
        for (auto c : candidates) {
            total += paths[r][c];
        }
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        long double target = unif(rng) * total;
        for (auto c : candidates) {
            if (paths[r][c] <= 0.0L) {
                continue;
            }
            if (target < paths[r][c]) {
                return c;
            }
            target -= paths[r][c];
        }
        // floating-point slack: last candidate with positive weight
        for (auto it = candidates.rbegin(); it != candidates.rend(); ++it) {
            if (paths[r][*it] > 0.0L) {
                return *it;
            }
        }
        return candidates.front();
    };

    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    std::vector<std::size_t> path;
    path.reserve(length);
    path.push_back(pick(all, length));
    for (std::size_t r = length - 1; r >= 1; --r) {
        path.push_back(pick(succ[path.back()], r));
    }
    return path;
}

} // namespace

Corpus synth_template_corpus(const Template& tmpl, const Alphabet& alphabet, std::size_t m,
                             std::size_t target_len, double noise_rate, std::uint64_t seed) {
    if (m == 0) {
        throw ValidationError("empty corpus: m must be at least 1");
    }
    if (tmpl.empty()) {
        throw ValidationError("template must have at least one node");
    }
    if (!(noise_rate >= 0.0 && noise_rate < 1.0)) {
        throw ValidationError("noise_rate must lie in [0, 1)");
    }
    if (target_len == 0) {
        throw ValidationError("no instantiation of length 0");
    }
    for (auto label : tmpl.nodes()) {
        if (label >= alphabet.size()) {
            throw SchemaError("template label outside alphabet");
        }
    }
    // existence check: some path of exactly target_len nodes
    {
        std::vector<char> reach(tmpl.size(), 1);
        for (std::size_t r = 2; r <= target_len; ++r) {
            std::vector<char> next(tmpl.size(), 0);
            for (std::size_t v = 0; v < tmpl.size(); ++v) {
                for (auto s : tmpl.successors(v)) {
                    next[v] = next[v] || reach[s];
                }
            }
            reach = std::move(next);
        }
        if (std::none_of(reach.begin(), reach.end(), [](char c) { return c != 0; })) {
            throw ValidationError("template has no instantiation of length " +
                                  std::to_string(target_len));
        }
    }

    Rng rng(seed);
    const auto k = alphabet.size();
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> any_label(0, k - 1);

    Corpus corpus;
    corpus.alphabet = alphabet;
    for (std::size_t mi = 0; mi < m; ++mi) {
        const auto path = sample_path(tmpl, target_len, rng);
        LabelSeq seq;
        seq.reserve(target_len + target_len / 4);
        for (auto node : path) {
            const Label original = tmpl.label(node);
            if (unif(rng) >= noise_rate) {
                seq.push_back(original);
                continue;
            }
            // substitution needs a second label to move to
            const std::size_t kinds = k > 1 ? 3 : 2;
            std::size_t kind = std::uniform_int_distribution<std::size_t>(0, kinds - 1)(rng);
            if (k == 1) {
                kind += 1;
            }
            if (kind == 0) {
                auto replacement = std::uniform_int_distribution<std::size_t>(0, k - 2)(rng);
                if (replacement >= original) {
                    ++replacement;
                }
                seq.push_back(static_cast<Label>(replacement));
            } else if (kind == 1) {
                seq.push_back(static_cast<Label>(any_label(rng)));
                seq.push_back(original);
            }
            // kind == 2: deletion, emit nothing
        }
        Meeting meeting;
        meeting.id = meeting_id("synth", mi);
        for (std::size_t i = 0; i < seq.size(); ++i) {
            meeting.acts.push_back({static_cast<double>(i), speaker_for(i), seq[i], std::nullopt});
        }
        corpus.meetings.push_back(std::move(meeting));
    }
    return corpus;
}

namespace {

void check_rates(std::span<const double> rates, const char* what) {
    if (rates.size() != kDecisionActs.size()) {
        throw ValidationError(std::string(what) + " must have 6 entries");
    }
    double total = 0.0;
    for (double r : rates) {
        if (!(r >= 0.0)) {
            throw ValidationError(std::string(what) + " must be nonnegative");
        }
        total += r;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw ValidationError(std::string(what) + " must sum to 1 (got " +
                              std::to_string(total) + ")");
    }
}

Alphabet decision_alphabet() {
    return Alphabet(std::vector<std::string>(kDecisionActs.begin(), kDecisionActs.end()));
}

} // namespace

Corpus synth_decision_corpus(std::size_t m, std::size_t window_size,
                             std::span<const double> inside_rates,
                             std::span<const double> outside_rates, std::uint64_t seed) {
    if (m == 0) {
        throw ValidationError("empty corpus: m must be at least 1");
    }
    if (window_size == 0) {
        throw ValidationError("window_size must be at least 1");
    }
    check_rates(inside_rates, "inside_rates");
    check_rates(outside_rates, "outside_rates");

    constexpr std::size_t kBlocks = 4;
    Rng rng(seed);
    std::discrete_distribution<int> inside(inside_rates.begin(), inside_rates.end());
    std::discrete_distribution<int> outside(outside_rates.begin(), outside_rates.end());
    std::uniform_int_distribution<std::size_t> block_pick(0, kBlocks - 1);

    Corpus corpus;
    corpus.alphabet = decision_alphabet();
    for (std::size_t mi = 0; mi < m; ++mi) {
        Meeting meeting;
        meeting.id = meeting_id("decision", mi);
        const std::size_t decision_block = block_pick(rng);
        for (std::size_t i = 0; i < kBlocks * window_size; ++i) {
            const bool in_window = i / window_size == decision_block;
            const int label = in_window ? inside(rng) : outside(rng);
            meeting.acts.push_back({static_cast<double>(i), speaker_for(i),
                                    static_cast<Label>(label), std::nullopt});
        }
        meeting.decision_windows.push_back(
            {static_cast<double>(decision_block * window_size),
             static_cast<double>((decision_block + 1) * window_size - 1)});
        corpus.meetings.push_back(std::move(meeting));
    }
    return corpus;
}

Corpus synth_wrapup_corpus(std::span<const WrapupSpec> specs, std::uint64_t seed) {
    if (specs.empty()) {
        throw ValidationError("empty corpus: no wrap-up specs");
    }
    Rng rng(seed);
    std::uniform_int_distribution<int> label(0, static_cast<int>(kDecisionActs.size()) - 1);
    Corpus corpus;
    corpus.alphabet = decision_alphabet();
    for (std::size_t mi = 0; mi < specs.size(); ++mi) {
        const auto& spec = specs[mi];
        if (!(spec.decision_minutes > 0.0) || !(spec.wrapup_minutes >= 0.0)) {
            throw ValidationError("wrap-up spec needs decision > 0 and wrap-up >= 0 minutes");
        }
        const double decided = spec.decision_minutes * 60.0;
        const double last = decided + spec.wrapup_minutes * 60.0;
        Meeting meeting;
        meeting.id = meeting_id("wrapup", mi);
        std::size_t i = 0;
        for (double t = 0.0; t < last; t += 10.0, ++i) {
            meeting.acts.push_back({t, speaker_for(i), static_cast<Label>(label(rng)), std::nullopt});
        }
        meeting.acts.push_back({last, speaker_for(i), static_cast<Label>(label(rng)), std::nullopt});
        meeting.decision_windows.push_back({std::max(0.0, decided - 300.0), decided});
        corpus.meetings.push_back(std::move(meeting));
    }
    return corpus;
}

Corpus synth_suggestion_corpus(const SuggestionSynthConfig& config, std::uint64_t seed) {
    if (config.meetings == 0 || config.suggestions_per_meeting == 0) {
        throw ValidationError("empty corpus: no suggestions requested");
    }
    if (config.vocabulary_size == 0) {
        throw ValidationError("vocabulary_size must be at least 1");
    }
    Rng rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> filler(0, config.vocabulary_size - 1);

    Corpus corpus;
    corpus.alphabet = Alphabet({"suggestion"});
    for (std::size_t mi = 0; mi < config.meetings; ++mi) {
        Meeting meeting;
        meeting.id = meeting_id("suggest", mi);
        for (std::size_t si = 0; si < config.suggestions_per_meeting; ++si) {
            std::vector<std::string> words;
            for (std::size_t w = 0; w < config.words_per_suggestion; ++w) {
                char buf[16];
                std::snprintf(buf, sizeof(buf), "w%03zu", filler(rng));
                words.emplace_back(buf);
            }
            double p = config.base_accept_rate;
            for (const auto& word : config.positive_words) {
                if (unif(rng) < config.word_rate) {
                    words.push_back(word);
                    p += config.effect;
                }
            }
            for (const auto& word : config.negative_words) {
                if (unif(rng) < config.word_rate) {
                    words.push_back(word);
                    p -= config.effect;
                }
            }
            p = std::clamp(p, 0.02, 0.98);
            std::shuffle(words.begin(), words.end(), rng);
            std::string text;
            for (const auto& word : words) {
                if (!text.empty()) {
                    text += ' ';
                }
                text += word;
            }
            const bool accepted = unif(rng) < p;
            meeting.suggestions.push_back({meeting.acts.size(), accepted});
            meeting.acts.push_back({static_cast<double>(si), speaker_for(si), 0, std::move(text)});
        }
        corpus.meetings.push_back(std::move(meeting));
    }
    return corpus;
}

} // namespace meetpat
