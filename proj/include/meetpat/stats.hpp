#ifndef meetpat_stats_hpp
#define meetpat_stats_hpp

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "meetpat/corpus.hpp"
#include "meetpat/decision_detect.hpp"

namespace meetpat {

/*
 * a = with feature & accepted, b = with feature & rejected,
 * c = without & accepted,      d = without & rejected
 */
struct ContingencyTable2x2 {
    std::uint64_t a = 0, b = 0, c = 0, d = 0;

    std::uint64_t total() const { return a + b + c + d; }
    bool operator==(const ContingencyTable2x2&) const = default;
};

/// C(K,k) C(N-K,n-k) / C(N,n); 0 outside the support. Exact integer
/// arithmetic for N <= 100, log-gamma above.
double hypergeom_pmf(std::uint64_t N, std::uint64_t K, std::uint64_t n, std::uint64_t k);

enum class Tail { less, greater };

struct FisherResult {
    double p_two_sided = 1.0;
    double p_one_sided = 1.0;   // the smaller of the two tails
    double p_less = 1.0;        // P(A <= a)
    double p_greater = 1.0;     // P(A >= a)
    Tail tail = Tail::greater;  // which tail p_one_sided came from
    bool degenerate = false;    // a zero margin; every p is 1
};

/*
 * Fisher's exact test on the hypergeometric law of `a` given the margins.
 * Two-sided p sums every same-margin table whose probability is at most the
 * observed one, with 1e-7 relative slack.
 */
FisherResult fisher_exact(const ContingencyTable2x2& table);

enum class Sidedness { one_sided, two_sided };

const std::vector<std::string>& default_stopwords();

/// Lowercase, drop apostrophes, map other punctuation to spaces, split on
/// whitespace, drop stopwords. Duplicates are kept.
std::vector<std::string> tokenize(std::string_view text, const std::set<std::string>& stopwords);

struct SuggestionMatrix {
    std::vector<std::string> vocabulary;   // sorted
    Eigen::MatrixXd rows;                  // binary presence, one row per suggestion
    Eigen::VectorXi labels;                // +1 accepted, -1 rejected
    std::vector<std::string> warnings;

    std::size_t suggestions() const { return static_cast<std::size_t>(rows.rows()); }
};

/// One row per suggestion with text and at least one non-stopword token.
SuggestionMatrix tokenize_suggestions(const Corpus& corpus, const std::set<std::string>& stopwords);

/// One word per line; blank lines and surrounding whitespace ignored, lowercased.
std::set<std::string> read_word_list(const std::filesystem::path& path);

struct LexiconTest {
    ContingencyTable2x2 table;
    FisherResult fisher;
};

LexiconTest aggregate_lexicon_test(const SuggestionMatrix& matrix, const std::set<std::string>& lexicon);

struct WordScreenRow {
    std::string word;
    double p = 1.0;
    std::uint64_t accepted_with = 0, with = 0;
    std::uint64_t accepted_without = 0, without = 0;
    bool persuasive = false;

    double ratio_with() const { return with ? static_cast<double>(accepted_with) / static_cast<double>(with) : 0.0; }
    double ratio_without() const {
        return without ? static_cast<double>(accepted_without) / static_cast<double>(without) : 0.0;
    }
};

/// Per-word Fisher tests kept at p <= alpha, ascending by p then word.
std::vector<WordScreenRow> word_screen(const SuggestionMatrix& matrix, double alpha,
                                       Sidedness sidedness = Sidedness::one_sided);

struct WordCoefficient {
    std::string word;
    double mean = 0.0;
    double std = 0.0;
};

struct WordRanking {
    double accuracy_mean = 0.0;
    double accuracy_std = 0.0;
    std::vector<double> fold_accuracy;
    std::vector<std::string> vocabulary;   // columns used, in matrix order
    Eigen::MatrixXd fold_coefficients;     // folds x vocabulary
    std::vector<WordCoefficient> words;    // descending by mean coefficient
};

/*
 * Linear SVM on the presence vectors over stratified folds. With
 * `restrict_to`, only those vocabulary words are used as features.
 */
WordRanking svm_word_ranking(const SuggestionMatrix& matrix, std::size_t folds = 5, std::uint64_t seed = 0,
                             const std::optional<std::set<std::string>>& restrict_to = std::nullopt,
                             const FitOptions& options = {});

/// Screen at `alpha`, then rank over the surviving words only.
WordRanking screen_then_fit(const SuggestionMatrix& matrix, double alpha, std::size_t folds = 5,
                            std::uint64_t seed = 0, Sidedness sidedness = Sidedness::one_sided,
                            const FitOptions& options = {});

/// "0.90 (2069/2278)": the ratio truncated to two decimals, "1" when all were accepted.
std::string ratio_cell(std::uint64_t accepted, std::uint64_t total);

std::string screen_csv(std::span<const WordScreenRow> rows);
std::string word_ranking_csv(const WordRanking& ranking);

} // namespace meetpat

#endif
