#include "doctest.h"

#include <map>
#include <random>

#include "meetpat/baselines.hpp"
#include "meetpat/corpus.hpp"
#include "meetpat/error.hpp"
#include "meetpat/template.hpp"
#include "oracles.hpp"

using namespace meetpat;

namespace {

LabelSeq seq(std::string_view s) {
    LabelSeq out;
    for (char ch : s) {
        out.push_back(static_cast<Label>(ch - 'A'));
    }
    return out;
}

} // namespace

TEST_CASE("markov examples") {
    const std::vector<LabelSeq> abab = {seq("ABAB")};
    const auto c = fit_markov(abab, 2);
    CHECK(c.transition(0, 1) == 1.0);
    CHECK(c.transition(1, 0) == 1.0);
    CHECK(c.counts(0, 1) == 2);
    CHECK(c.counts(1, 0) == 1);

    const std::vector<LabelSeq> aa = {seq("AA")};
    const auto d = fit_markov(aa, 2);
    CHECK(d.transition(0, 0) == 1.0);
    CHECK(d.defined[0]);
    CHECK_FALSE(d.defined[1]);
    CHECK(d.transition.row(1).sum() == 0.0);

    const std::vector<LabelSeq> singles = {seq("A"), seq("B")};
    CHECK_THROWS_AS(fit_markov(singles, 2), FitError);
}

TEST_CASE("markov matches bigram counting") {
    std::mt19937_64 rng(4);
    std::vector<LabelSeq> xs;
    for (int i = 0; i < 20; ++i) {
        xs.push_back(oracle::random_sequence(rng, 0, 15, 4));
    }
    std::map<std::pair<Label, Label>, int> bigrams;
    std::map<Label, int> sources;
    for (const auto& x : xs) {
        for (std::size_t i = 1; i < x.size(); ++i) {
            ++bigrams[{x[i - 1], x[i]}];
            ++sources[x[i - 1]];
        }
    }
    const auto c = fit_markov(xs, 4);
    for (Label a = 0; a < 4; ++a) {
        for (Label b = 0; b < 4; ++b) {
            const double expect = sources[a] ? double(bigrams[{a, b}]) / sources[a] : 0.0;
            CHECK(c.transition(a, b) == doctest::Approx(expect).epsilon(1e-15));
        }
        if (c.defined[a]) {
            CHECK(c.transition.row(a).sum() == doctest::Approx(1.0));
        }
    }
}

TEST_CASE("noiseless planted corpus puts all mass on the template edges") {
    const auto corpus = synth_template_corpus(Template({0, 1, 2}, {{2, 0}}), Alphabet({"A", "B", "C"}), 30,
                                              30, 0.0, 5);
    const auto chain = fit_markov(sequences(corpus), 3);
    const auto top = top_transitions(chain, 4);
    CHECK(top.truncated);
    REQUIRE(top.transitions.size() == 3);
    CHECK(top.transitions[0] == Transition{0, 1, 1.0});
    CHECK(top.transitions[1] == Transition{1, 2, 1.0});
    CHECK(top.transitions[2] == Transition{2, 0, 1.0});
}

TEST_CASE("top_transitions") {
    const std::vector<LabelSeq> xs = {seq("ABAC"), seq("BA")};
    const auto c = fit_markov(xs, 3);
    // A->B and A->C at 0.5 each, B->A at 1
    const auto top = top_transitions(c, 2);
    CHECK_FALSE(top.truncated);
    REQUIRE(top.transitions.size() == 2);
    CHECK(top.transitions[0] == Transition{1, 0, 1.0});
    CHECK(top.transitions[1] == Transition{0, 1, 0.5});
    CHECK(top_transitions(c, 1).transitions.size() == 1);
    CHECK_THROWS_AS(top_transitions(c, 0), ValidationError);

    const auto csv = markov_to_csv(c, Alphabet({"A", "B", "C"}));
    CHECK(csv.find("A") != std::string::npos);
    CHECK(markov_to_dot(c, Alphabet({"A", "B", "C"})).rfind("digraph", 0) == 0);
}

TEST_CASE("profile hmm") {
    SUBCASE("identical sequences give their consensus") {
        const std::vector<LabelSeq> xs(20, LabelSeq{0, 1, 1});
        const auto h = fit_profile_hmm(xs, 4, 3, 1.0, 30, 3);
        CHECK(consensus_string(h) == LabelSeq{0, 1, 1});
    }
    SUBCASE("a singleton concentrates on its symbols") {
        const std::vector<LabelSeq> xs = {seq("CABD")};
        const auto h = fit_profile_hmm(xs, 4, 4, 0.01, 200, 1);
        CHECK(consensus_string(h) == seq("CABD"));
        for (int k = 0; k < 4; ++k) {
            CHECK(h.match_emissions(k, xs[0][k]) > 0.5);
        }
    }
    SUBCASE("a huge pseudocount flattens every emission row") {
        const std::vector<LabelSeq> xs = {seq("ABCA"), seq("BBCA")};
        const auto h = fit_profile_hmm(xs, 3, 3, 1e9, 5, 2);
        CHECK((h.match_emissions.array() - 1.0 / 3).abs().maxCoeff() < 1e-6);
        CHECK((h.insert_emissions.array() - 1.0 / 3).abs().maxCoeff() < 1e-6);
    }
    SUBCASE("map-em never lowers the posterior") {
        std::mt19937_64 rng(8);
        std::vector<LabelSeq> xs;
        for (int i = 0; i < 15; ++i) {
            xs.push_back(oracle::random_sequence(rng, 2, 7, 3));
        }
        const auto h = fit_profile_hmm(xs, 3, 4, 1.0, 25, 6);
        REQUIRE(h.log_posterior.size() >= 2);
        for (std::size_t i = 1; i < h.log_posterior.size(); ++i) {
            CHECK(h.log_posterior[i] >= h.log_posterior[i - 1] - 1e-8 * std::abs(h.log_posterior[i - 1]));
        }
        CHECK(consensus_string(h).size() == 4);
        for (const auto& t : h.transitions) {
            for (int s = 0; s < 3; ++s) {
                const double sum = t.row(s).sum();
                CHECK((sum == doctest::Approx(1.0) || sum == 0.0));
            }
        }
        for (const auto& x : xs) {
            CHECK(std::isfinite(profile_log_likelihood(h, x)));
        }
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(fit_profile_hmm(std::vector<LabelSeq>{}, 3, 3, 1.0, 5, 1), FitError);
        const std::vector<LabelSeq> xs = {seq("AB")};
        CHECK_THROWS_AS(fit_profile_hmm(xs, 2, 0, 1.0, 5, 1), ValidationError);
        CHECK_THROWS_AS(fit_profile_hmm(xs, 2, 2, 0.0, 5, 1), ValidationError);
    }
}
