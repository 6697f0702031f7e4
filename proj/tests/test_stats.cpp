#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "meetpat/corpus.hpp"
#include "meetpat/error.hpp"
#include "meetpat/stats.hpp"
#include "oracles.hpp"

using namespace meetpat;

namespace {

std::set<std::string> stopword_set() {
    const auto& v = default_stopwords();
    return {v.begin(), v.end()};
}

// suggestions as explicit word lists, labels +1 / -1
SuggestionMatrix matrix_of(const std::vector<std::pair<std::vector<std::string>, bool>>& rows) {
    Corpus c;
    c.alphabet = Alphabet({"suggestion"});
    Meeting m;
    m.id = "m";
    for (const auto& [words, accepted] : rows) {
        std::string text;
        for (const auto& w : words) {
            text += w + " ";
        }
        m.suggestions.push_back({m.acts.size(), accepted});
        m.acts.push_back({static_cast<double>(m.acts.size()), "A", 0, text});
    }
    c.meetings.push_back(m);
    return tokenize_suggestions(c, {});
}

SuggestionSynthConfig planted_config() {
    SuggestionSynthConfig cfg;
    cfg.meetings = 40;
    cfg.suggestions_per_meeting = 50;
    cfg.vocabulary_size = 100;
    cfg.base_accept_rate = 0.55;
    cfg.effect = 0.4;
    cfg.word_rate = 0.1;
    cfg.positive_words = {"yeah", "good", "great", "sure", "fine"};
    cfg.negative_words = {"maybe", "costly", "hard", "slow", "risky"};
    return cfg;
}

} // namespace

TEST_CASE("hypergeometric pmf") {
    CHECK(hypergeom_pmf(4, 2, 2, 1) == doctest::Approx(4.0 / 6.0).epsilon(1e-15));
    CHECK(hypergeom_pmf(4, 2, 2, 3) == 0.0);
    CHECK(hypergeom_pmf(10, 2, 9, 0) == 0.0);
    for (std::uint64_t N : {1, 7, 50, 101, 200}) {
        for (std::uint64_t K = 0; K <= N; K += 1 + N / 7) {
            for (std::uint64_t n = 0; n <= N; n += 1 + N / 9) {
                double total = 0.0;
                for (std::uint64_t k = 0; k <= n; ++k) {
                    total += hypergeom_pmf(N, K, n, k);
                }
                CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("fisher examples") {
    const auto a = fisher_exact({1, 0, 0, 1});
    CHECK(a.p_two_sided == 1.0);
    CHECK(a.p_one_sided == 0.5);
    const auto b = fisher_exact({10, 0, 0, 10});
    CHECK(b.p_two_sided == doctest::Approx(2.0 / 184756.0).epsilon(1e-14));
    const auto c = fisher_exact({0, 0, 3, 4});
    CHECK(c.degenerate);
    CHECK(c.p_two_sided == 1.0);
}

TEST_CASE("fisher equals exact enumeration") {
    const auto tri = oracle::pascal(100);
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 400; ++trial) {
        const std::uint64_t n = std::uniform_int_distribution<std::uint64_t>(1, 100)(rng);
        std::uint64_t cells[4] = {0, 0, 0, 0};
        for (std::uint64_t i = 0; i < n; ++i) {
            ++cells[std::uniform_int_distribution<int>(0, 3)(rng)];
        }
        const auto r = fisher_exact({cells[0], cells[1], cells[2], cells[3]});
        const auto o = oracle::fisher(cells[0], cells[1], cells[2], cells[3], tri);
        CHECK(r.degenerate == o.degenerate);
        CHECK(oracle::nearest_double(o.two_sided, r.p_two_sided));
        CHECK(oracle::nearest_double(o.less, r.p_less));
        CHECK(oracle::nearest_double(o.greater, r.p_greater));
        CHECK(r.p_two_sided >= r.p_one_sided);
        CHECK(r.p_one_sided == std::min(r.p_less, r.p_greater));
    }
}

TEST_CASE("large tables use the log path") {
    const auto r = fisher_exact({134, 5, 1981, 204});
    CHECK(r.p_greater == doctest::Approx(0.009991).epsilon(1e-3));
    CHECK(r.p_two_sided == doctest::Approx(0.020587).epsilon(1e-3));
    CHECK(r.p_two_sided >= r.p_one_sided);
    const auto yeah = fisher_exact({46, 0, 2069, 209});
    CHECK(yeah.p_greater == doctest::Approx(0.012532).epsilon(1e-3));
    CHECK(yeah.tail == Tail::greater);
}

TEST_CASE("tokenize") {
    const auto words = tokenize("Shouldn't we start with the most important parts?", stopword_set());
    const std::set<std::string> got(words.begin(), words.end());
    CHECK(got.count("start"));
    CHECK(got.count("important"));
    CHECK(got.count("parts"));
    CHECK_FALSE(got.count("we"));
    CHECK_FALSE(got.count("the"));
    CHECK_FALSE(got.count("shouldnt"));
}

TEST_CASE("suggestion matrix") {
    const auto m = matrix_of({{{"go", "go", "now"}, true}, {{}, false}, {{"stop"}, false}});
    CHECK(m.vocabulary == std::vector<std::string>{"go", "now", "stop"});
    REQUIRE(m.suggestions() == 2);
    CHECK(m.rows(0, 0) == 1.0);
    CHECK(m.rows.maxCoeff() == 1.0);
    CHECK(m.labels(0) == 1);
    CHECK(m.labels(1) == -1);
    CHECK(m.warnings.size() == 1);
}

TEST_CASE("aggregate lexicon test") {
    std::vector<std::pair<std::vector<std::string>, bool>> rows;
    for (int i = 0; i < 100; ++i) {
        const bool accepted = i < 50;
        std::vector<std::string> words = {"filler"};
        if (accepted && i < 40) {
            words.push_back("good");
        }
        rows.push_back({words, accepted});
    }
    const auto m = matrix_of(rows);
    const auto t = aggregate_lexicon_test(m, {"good", "great"});
    CHECK(t.table == ContingencyTable2x2{40, 0, 10, 50});
    CHECK(t.fisher.p_two_sided < 1e-6);

    const auto all = aggregate_lexicon_test(m, {"filler"});
    CHECK(all.fisher.degenerate);
    CHECK(all.fisher.p_two_sided == 1.0);
    CHECK(aggregate_lexicon_test(m, {"absent"}).fisher.degenerate);
}

TEST_CASE("word screen") {
    SUBCASE("the yeah row") {
        std::vector<std::pair<std::vector<std::string>, bool>> rows;
        for (int i = 0; i < 46; ++i) {
            rows.push_back({{"yeah"}, true});
        }
        for (int i = 0; i < 2278; ++i) {
            rows.push_back({{"other"}, i < 2069});
        }
        auto screen = word_screen(matrix_of(rows), 0.05);
        // "other" is the complement of "yeah" and ties with it
        std::erase_if(screen, [](const WordScreenRow& r) { return r.word != "yeah"; });
        REQUIRE(screen.size() == 1);
        CHECK(screen[0].word == "yeah");
        CHECK(screen[0].accepted_with == 46);
        CHECK(screen[0].with == 46);
        CHECK(screen[0].accepted_without == 2069);
        CHECK(screen[0].without == 2278);
        CHECK(screen[0].ratio_with() == 1.0);
        CHECK(std::abs(screen[0].p - 0.012) <= 0.002);
        CHECK(screen[0].persuasive);
        CHECK(screen_csv(screen).find("1,yeah,") != std::string::npos);
        CHECK(ratio_cell(46, 46) == "1 (46/46)");
        CHECK(ratio_cell(2069, 2278) == "0.90 (2069/2278)");
        CHECK(ratio_cell(37, 38) == "0.97 (37/38)");
    }
    SUBCASE("a single accepted occurrence is not significant") {
        std::vector<std::pair<std::vector<std::string>, bool>> rows = {{{"once", "x"}, true}};
        for (int i = 0; i < 50; ++i) {
            rows.push_back({{"x"}, i < 45});
        }
        const auto m = matrix_of(rows);
        for (const auto& r : word_screen(m, 1.0)) {
            if (r.word == "once") {
                CHECK(r.p > 0.8);
            }
        }
        for (const auto& r : word_screen(m, 0.05)) {
            CHECK(r.word != "once");
        }
        CHECK(word_screen(m, 0.0).empty());
    }
    SUBCASE("order of suggestions does not matter") {
        const auto corpus = synth_suggestion_corpus(planted_config(), 4);
        auto m = tokenize_suggestions(corpus, stopword_set());
        const auto base = word_screen(m, 0.2);
        std::vector<Eigen::Index> perm(static_cast<std::size_t>(m.rows.rows()));
        std::iota(perm.begin(), perm.end(), 0);
        std::mt19937_64 rng(1);
        std::shuffle(perm.begin(), perm.end(), rng);
        SuggestionMatrix shuffled = m;
        for (std::size_t i = 0; i < perm.size(); ++i) {
            shuffled.rows.row(static_cast<Eigen::Index>(i)) = m.rows.row(perm[i]);
            shuffled.labels(static_cast<Eigen::Index>(i)) = m.labels(perm[i]);
        }
        // reverse the vocabulary columns as well
        shuffled.vocabulary.assign(m.vocabulary.rbegin(), m.vocabulary.rend());
        shuffled.rows = shuffled.rows.rowwise().reverse().eval();
        const auto again = word_screen(shuffled, 0.2);
        REQUIRE(again.size() == base.size());
        for (std::size_t i = 0; i < base.size(); ++i) {
            CHECK(again[i].word == base[i].word);
            CHECK(again[i].p == base[i].p);
        }
    }
}

TEST_CASE("svm word ranking") {
    const auto cfg = planted_config();
    const auto m = tokenize_suggestions(synth_suggestion_corpus(cfg, 8), stopword_set());
    std::set<std::string> planted(cfg.positive_words.begin(), cfg.positive_words.end());
    planted.insert(cfg.negative_words.begin(), cfg.negative_words.end());

    const auto r = svm_word_ranking(m, 5, 3);
    REQUIRE(r.fold_coefficients.rows() == 5);
    int good_folds = 0;
    for (Eigen::Index f = 0; f < 5; ++f) {
        std::vector<std::size_t> order(r.vocabulary.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return std::abs(r.fold_coefficients(f, static_cast<Eigen::Index>(a))) >
                   std::abs(r.fold_coefficients(f, static_cast<Eigen::Index>(b)));
        });
        int hits = 0;
        for (std::size_t i = 0; i < 10; ++i) {
            hits += planted.count(r.vocabulary[order[i]]) ? 1 : 0;
        }
        good_folds += hits == 10 ? 1 : 0;
    }
    CHECK(good_folds >= 4);
    CHECK(r.words.front().mean > 0);
    CHECK(cfg.positive_words.end() !=
          std::find(cfg.positive_words.begin(), cfg.positive_words.end(), r.words.front().word));

    SuggestionMatrix flipped = m;
    flipped.labels = -m.labels;
    const auto f = svm_word_ranking(flipped, 5, 3);
    for (std::size_t i = 0; i < r.vocabulary.size(); ++i) {
        CHECK(std::abs(f.fold_coefficients.col(static_cast<Eigen::Index>(i)).mean() +
                       r.fold_coefficients.col(static_cast<Eigen::Index>(i)).mean()) < 1e-6);
    }

    const auto screened = screen_then_fit(m, 0.05, 5, 3);
    CHECK(screened.vocabulary.size() < r.vocabulary.size());
    CHECK(screened.accuracy_mean >= r.accuracy_mean - 0.05);
    CHECK(word_ranking_csv(r).find("yeah") != std::string::npos);
}

TEST_CASE("no signal gives the majority rate") {
    auto cfg = planted_config();
    cfg.positive_words.clear();
    cfg.negative_words.clear();
    cfg.base_accept_rate = 0.7;
    const auto m = tokenize_suggestions(synth_suggestion_corpus(cfg, 2), stopword_set());
    const double majority = std::max((m.labels.array() == 1).cast<double>().mean(),
                                     (m.labels.array() == -1).cast<double>().mean());
    const auto r = svm_word_ranking(m, 5, 1);
    CHECK(std::abs(r.accuracy_mean - majority) <= 0.05);
}

TEST_CASE("word list files") {
    CHECK_THROWS_AS(read_word_list("/nonexistent/words.txt"), IoError);
}
