#include "doctest.h"

#include <set>
#include <string>

#include "meetpat/corpus.hpp"
#include "meetpat/error.hpp"
#include "meetpat/template.hpp"

using namespace meetpat;

namespace {

Alphabet abc() { return Alphabet({"A", "B", "C"}); }

Template planted() { return Template({0, 1, 2}, {{2, 0}}); }

std::string letters(const LabelSeq& s) {
    std::string out;
    for (auto l : s) {
        out.push_back(static_cast<char>('A' + l));
    }
    return out;
}

Meeting meeting_of(std::initializer_list<std::pair<const char*, Label>> acts) {
    Meeting m;
    m.id = "m";
    double t = 0.0;
    for (const auto& [spk, label] : acts) {
        m.acts.push_back({t, spk, label, std::nullopt});
        t += 1.0;
    }
    return m;
}

} // namespace

TEST_CASE("parse a one-meeting corpus") {
    const auto c = parse_corpus(
        "{\"alphabet\": [\"SP\", \"AP\"]}\n"
        "{\"id\": \"m1\", \"acts\": [{\"t\": 0, \"spk\": \"A\", \"act\": \"SP\"},"
        " {\"t\": 2.5, \"spk\": \"B\", \"act\": \"AP\", \"text\": \"ok\"}]}\n");
    REQUIRE(c.meetings.size() == 1);
    CHECK(c.meetings[0].acts.size() == 2);
    CHECK(c.alphabet.size() == 2);
    CHECK(c.meetings[0].acts[1].label == 1);
    CHECK(c.meetings[0].acts[1].text == std::optional<std::string>("ok"));
}

TEST_CASE("corpus errors") {
    const std::string head = "{\"alphabet\": [\"SP\"]}\n";
    CHECK_THROWS_WITH_AS(
        parse_corpus(head + "{\"id\": \"m\", \"acts\": [{\"t\": -1, \"spk\": \"A\", \"act\": \"SP\"}]}\n"),
        doctest::Contains("negative timestamp"), ValidationError);
    CHECK_THROWS_AS(parse_corpus(head), ValidationError);
    CHECK_THROWS_AS(parse_corpus(""), Error);
    CHECK_THROWS_AS(
        parse_corpus(head + "{\"id\": \"m\", \"acts\": [{\"t\": 0, \"spk\": \"A\", \"act\": \"XX\"}]}\n"),
        SchemaError);
    CHECK_THROWS_WITH_AS(parse_corpus(head + "{\"id\": \"m\", \"acts\": [}\n"), doctest::Contains("line 2"),
                         ParseError);
}

TEST_CASE("serialize round-trip") {
    const auto a = synth_template_corpus(planted(), abc(), 4, 7, 0.2, 3);
    const auto text = serialize_corpus(a);
    const auto b = parse_corpus(text);
    CHECK(a == b);
    CHECK(serialize_corpus(b) == text);

    const double rates[6] = {0.1, 0.1, 0.1, 0.1, 0.1, 0.5};
    const auto d = synth_decision_corpus(3, 20, rates, rates, 5);
    CHECK(parse_corpus(serialize_corpus(d)) == d);
}

TEST_CASE("project_sequence") {
    const Label keep_all[] = {0, 1};
    SUBCASE("same speaker repeats collapse") {
        const auto m = meeting_of({{"A", 0}, {"A", 0}, {"B", 1}});
        CHECK(project_sequence(m, keep_all, true) == LabelSeq{0, 1});
        CHECK(project_sequence(m, keep_all, false) == LabelSeq{0, 0, 1});
    }
    SUBCASE("different speakers stay separate") {
        const auto m = meeting_of({{"A", 0}, {"B", 0}});
        CHECK(project_sequence(m, keep_all, true) == LabelSeq{0, 0});
    }
    SUBCASE("empty keep set") {
        const auto m = meeting_of({{"A", 0}, {"B", 1}});
        CHECK(project_sequence(m, std::span<const Label>{}, true).empty());
    }
    SUBCASE("dropped acts do not break a run") {
        const Label keep_a[] = {0};
        const auto m = meeting_of({{"A", 0}, {"C", 2}, {"A", 0}});
        CHECK(project_sequence(m, keep_a, true) == LabelSeq{0});
    }
}

TEST_CASE("restrict_corpus keeps order and remaps") {
    Corpus c;
    c.alphabet = abc();
    auto m = meeting_of({{"A", 0}, {"B", 1}, {"B", 1}, {"C", 2}, {"A", 2}});
    m.suggestions = {{1, true}, {3, false}};
    c.meetings.push_back(m);
    const std::vector<std::string> keep = {"C", "B"};
    const auto r = restrict_corpus(c, keep, true);
    CHECK(r.alphabet.names() == std::vector<std::string>{"C", "B"});
    REQUIRE(r.meetings.size() == 1);
    // B by B collapses; C then C from different speakers does not
    CHECK(sequences(r)[0] == LabelSeq{1, 0, 0});
    REQUIRE(r.meetings[0].suggestions.size() == 2);
    CHECK(r.meetings[0].suggestions[0] == Suggestion{0, true});
    CHECK(r.meetings[0].suggestions[1] == Suggestion{1, false});
    // projecting twice changes nothing
    const auto again = restrict_corpus(r, keep, true);
    CHECK(sequences(again) == sequences(r));
}

TEST_CASE("planted synthesis") {
    SUBCASE("noiseless length-6 meetings are rotations") {
        const auto c = synth_template_corpus(planted(), abc(), 60, 6, 0.0, 11);
        std::set<std::string> seen;
        for (const auto& s : sequences(c)) {
            seen.insert(letters(s));
            CHECK(loss(planted(), s) == 0);
        }
        CHECK(seen == std::set<std::string>{"ABCABC", "BCABCA", "CABCAB"});
    }
    SUBCASE("same seed same corpus, different seed different corpus") {
        const auto a = synth_template_corpus(planted(), abc(), 5, 20, 0.1, 1);
        CHECK(a == synth_template_corpus(planted(), abc(), 5, 20, 0.1, 1));
        CHECK_FALSE(a == synth_template_corpus(planted(), abc(), 5, 20, 0.1, 2));
    }
    SUBCASE("noise 0.1 on length 100 gives loss near 10") {
        const auto c = synth_template_corpus(planted(), abc(), 100, 100, 0.1, 4);
        double total = 0.0;
        for (const auto& s : sequences(c)) {
            total += static_cast<double>(loss(planted(), s));
        }
        const double mean = total / 100.0;
        CHECK(mean >= 5.0);
        CHECK(mean <= 15.0);
    }
    SUBCASE("argument errors") {
        CHECK_THROWS_AS(synth_template_corpus(planted(), abc(), 0, 6, 0.0, 1), ValidationError);
        CHECK_THROWS_AS(synth_template_corpus(Template({0, 1}), abc(), 3, 3, 0.0, 1), ValidationError);
        CHECK_THROWS_AS(synth_template_corpus(planted(), abc(), 3, 6, 1.0, 1), ValidationError);
    }
}

TEST_CASE("decision synthesis") {
    const double inside[6] = {0.14, 0.095, 0.145, 0.08, 0.125, 0.415};
    const double outside[6] = {0.15, 0.10, 0.20, 0.10, 0.10, 0.35};
    SUBCASE("every meeting has four blocks") {
        const auto c = synth_decision_corpus(20, 70, inside, outside, 3);
        CHECK(c.meetings.size() == 20);
        for (const auto& m : c.meetings) {
            CHECK(m.acts.size() >= 4 * 70);
            REQUIRE(m.decision_windows.size() == 1);
        }
    }
    SUBCASE("rates must sum to one") {
        const double bad[6] = {0.2, 0.2, 0.2, 0.2, 0.2, 0.2};
        CHECK_THROWS_AS(synth_decision_corpus(5, 70, bad, outside, 3), ValidationError);
        CHECK_THROWS_AS(synth_decision_corpus(0, 70, inside, outside, 3), ValidationError);
    }
}

TEST_CASE("wrapup synthesis carries the requested times") {
    const WrapupSpec specs[] = {{14.0, 11.0}, {30.5, 2.25}};
    const auto c = synth_wrapup_corpus(specs, 9);
    REQUIRE(c.meetings.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
        const auto& m = c.meetings[i];
        CHECK(m.decision_windows.back().end_s == doctest::Approx(specs[i].decision_minutes * 60.0));
        CHECK(m.acts.back().time ==
              doctest::Approx((specs[i].decision_minutes + specs[i].wrapup_minutes) * 60.0));
    }
    CHECK(parse_corpus(serialize_corpus(c)) == c);
}
