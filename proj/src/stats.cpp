#include "meetpat/stats.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <sstream>

#include "meetpat/error.hpp"
#include "meetpat/generalization.hpp"
#include "meetpat/random.hpp"

namespace meetpat {

namespace {

constexpr std::uint64_t kExactLimit = 100;

uint128 binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) {
        return 0;
    }
    k = std::min(k, n - k);
    uint128 v = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        v = v * (n - k + i) / i;
    }
    return v;
}

double log_binomial(std::uint64_t n, std::uint64_t k) {
    return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
           std::lgamma(static_cast<double>(n - k) + 1.0);
}

// num / den rounded to nearest double (ties to even), for 0 <= num <= den
double ratio_to_double(uint128 num, uint128 den) {
    if (num == 0) {
        return 0.0;
    }
    if (num == den) {
        return 1.0;
    }
    // long division, one quotient bit per step; r < den < 2^127 keeps r << 1 in range
    uint128 r = num;
    std::uint64_t mantissa = 0;
    int bits = 0;
    int exponent = 0;
    while (bits < 54) {
        r <<= 1;
        --exponent;
        const bool bit = r >= den;
        if (bit) {
            r -= den;
        }
        if (bits > 0 || bit) {
            mantissa = (mantissa << 1) | (bit ? 1u : 0u);
            ++bits;
        }
    }
    // 54 bits collected: 53 kept plus one rounding bit, r != 0 is the sticky bit
    const bool round_bit = mantissa & 1u;
    mantissa >>= 1;
    ++exponent;
    if (round_bit && (r != 0 || (mantissa & 1u))) {
        ++mantissa;
    }
    return std::ldexp(static_cast<double>(mantissa), exponent);
}

struct Support {
    std::uint64_t lo, hi;
};

Support support(std::uint64_t N, std::uint64_t K, std::uint64_t n) {
    return {n + K > N ? n + K - N : 0, std::min(K, n)};
}

} // namespace

double hypergeom_pmf(std::uint64_t N, std::uint64_t K, std::uint64_t n, std::uint64_t k) {
    if (K > N || n > N) {
        return 0.0;
    }
    const auto s = support(N, K, n);
    if (k < s.lo || k > s.hi) {
        return 0.0;
    }
    if (N <= kExactLimit) {
        return ratio_to_double(binomial(K, k) * binomial(N - K, n - k), binomial(N, n));
    }
    return std::exp(log_binomial(K, k) + log_binomial(N - K, n - k) - log_binomial(N, n));
}

FisherResult fisher_exact(const ContingencyTable2x2& t) {
    FisherResult r;
    const std::uint64_t N = t.total();
    const std::uint64_t row = t.a + t.b;   // with feature
    const std::uint64_t col = t.a + t.c;   // accepted
    if (N == 0 || row == 0 || row == N || col == 0 || col == N) {
        r.degenerate = true;
        return r;
    }
    const auto s = support(N, col, row);
    const std::uint64_t a = t.a;

    if (N <= kExactLimit) {
        const uint128 den = binomial(N, row);
        auto count = [&](std::uint64_t k) { return binomial(col, k) * binomial(N - col, row - k); };
        const uint128 obs = count(a);
        uint128 less = 0, greater = 0, two = 0;
        for (std::uint64_t k = s.lo; k <= s.hi; ++k) {
            const uint128 ck = count(k);
            if (k <= a) {
                less += ck;
            }
            if (k >= a) {
                greater += ck;
            }
            // ck <= obs (1 + 1e-7), in integers
            if (ck * 10000000u <= obs * 10000001u) {
                two += ck;
            }
        }
        r.p_less = ratio_to_double(less, den);
        r.p_greater = ratio_to_double(greater, den);
        r.p_two_sided = ratio_to_double(two, den);
    } else {
        const double log_den = log_binomial(N, row);
        auto log_p = [&](std::uint64_t k) {
            return log_binomial(col, k) + log_binomial(N - col, row - k) - log_den;
        };
        const double obs = log_p(a);
        const double cutoff = obs + std::log1p(1e-7);
        double less = 0.0, greater = 0.0, two = 0.0;
        for (std::uint64_t k = s.lo; k <= s.hi; ++k) {
            const double lp = log_p(k);
            const double p = std::exp(lp);
            if (k <= a) {
                less += p;
            }
            if (k >= a) {
                greater += p;
            }
            if (lp <= cutoff) {
                two += p;
            }
        }
        r.p_less = std::min(1.0, less);
        r.p_greater = std::min(1.0, greater);
        r.p_two_sided = std::min(1.0, two);
    }
    if (r.p_greater <= r.p_less) {
        r.tail = Tail::greater;
        r.p_one_sided = r.p_greater;
    } else {
        r.tail = Tail::less;
        r.p_one_sided = r.p_less;
    }
    // the observed table always counts toward the two-sided sum, so this only
    // guards against rounding on the log-gamma path
    r.p_two_sided = std::max(r.p_two_sided, r.p_one_sided);
    return r;
}

std::vector<std::string> tokenize(std::string_view text, const std::set<std::string>& stopwords) {
    std::string cleaned;
    cleaned.reserve(text.size());
    for (char ch : text) {
        const auto u = static_cast<unsigned char>(ch);
        if (ch == '\'') {
            continue;
        }
        if (std::isalnum(u) || u >= 0x80) {
            cleaned.push_back(static_cast<char>(std::tolower(u)));
        } else {
            cleaned.push_back(' ');
        }
    }
    std::vector<std::string> out;
    std::istringstream in(cleaned);
    std::string word;
    while (in >> word) {
        if (!stopwords.contains(word)) {
            out.push_back(word);
        }
    }
    return out;
}

SuggestionMatrix tokenize_suggestions(const Corpus& corpus, const std::set<std::string>& stopwords) {
    SuggestionMatrix m;
    std::vector<std::set<std::string>> docs;
    std::vector<int> labels;
    std::set<std::string> vocab;
    for (const auto& meeting : corpus.meetings) {
        for (const auto& s : meeting.suggestions) {
            const auto& act = meeting.acts.at(s.act_index);
            if (!act.text) {
                m.warnings.push_back("meeting " + meeting.id + ": suggestion at act " +
                                     std::to_string(s.act_index) + " has no text, skipped");
                continue;
            }
            auto tokens = tokenize(*act.text, stopwords);
            if (tokens.empty()) {
                m.warnings.push_back("meeting " + meeting.id + ": suggestion at act " +
                                     std::to_string(s.act_index) + " has no content words, skipped");
                continue;
            }
            std::set<std::string> doc(tokens.begin(), tokens.end());
            vocab.insert(doc.begin(), doc.end());
            docs.push_back(std::move(doc));
            labels.push_back(s.accepted ? 1 : -1);
        }
    }
    m.vocabulary.assign(vocab.begin(), vocab.end());
    std::map<std::string, Eigen::Index> column;
    for (std::size_t j = 0; j < m.vocabulary.size(); ++j) {
        column[m.vocabulary[j]] = static_cast<Eigen::Index>(j);
    }
    m.rows = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(docs.size()),
                                   static_cast<Eigen::Index>(m.vocabulary.size()));
    m.labels.resize(static_cast<Eigen::Index>(docs.size()));
    for (std::size_t i = 0; i < docs.size(); ++i) {
        for (const auto& w : docs[i]) {
            m.rows(static_cast<Eigen::Index>(i), column[w]) = 1.0;
        }
        m.labels(static_cast<Eigen::Index>(i)) = labels[i];
    }
    return m;
}

std::set<std::string> read_word_list(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open word list " + path.string());
    }
    std::set<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        std::string w;
        for (char ch : line) {
            if (!std::isspace(static_cast<unsigned char>(ch))) {
                w.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
            }
        }
        if (!w.empty()) {
            words.insert(w);
        }
    }
    return words;
}

LexiconTest aggregate_lexicon_test(const SuggestionMatrix& matrix, const std::set<std::string>& lexicon) {
    if (matrix.suggestions() == 0) {
        throw ValidationError("aggregate_lexicon_test: empty suggestion matrix");
    }
    std::vector<Eigen::Index> cols;
    for (std::size_t j = 0; j < matrix.vocabulary.size(); ++j) {
        if (lexicon.contains(matrix.vocabulary[j])) {
            cols.push_back(static_cast<Eigen::Index>(j));
        }
    }
    LexiconTest out;
    for (Eigen::Index i = 0; i < matrix.rows.rows(); ++i) {
        const bool with = std::any_of(cols.begin(), cols.end(), [&](Eigen::Index j) { return matrix.rows(i, j) > 0.0; });
        const bool accepted = matrix.labels(i) == 1;
        if (with) {
            ++(accepted ? out.table.a : out.table.b);
        } else {
            ++(accepted ? out.table.c : out.table.d);
        }
    }
    out.fisher = fisher_exact(out.table);
    return out;
}

std::vector<WordScreenRow> word_screen(const SuggestionMatrix& matrix, double alpha, Sidedness sidedness) {
    if (matrix.suggestions() == 0) {
        throw ValidationError("word_screen: empty suggestion matrix");
    }
    std::uint64_t total_accepted = 0;
    for (Eigen::Index i = 0; i < matrix.labels.size(); ++i) {
        total_accepted += matrix.labels(i) == 1 ? 1 : 0;
    }
    const std::uint64_t n = matrix.suggestions();
    std::vector<WordScreenRow> out;
    for (std::size_t j = 0; j < matrix.vocabulary.size(); ++j) {
        WordScreenRow row;
        row.word = matrix.vocabulary[j];
        for (Eigen::Index i = 0; i < matrix.rows.rows(); ++i) {
            if (matrix.rows(i, static_cast<Eigen::Index>(j)) > 0.0) {
                ++row.with;
                row.accepted_with += matrix.labels(i) == 1 ? 1 : 0;
            }
        }
        row.without = n - row.with;
        row.accepted_without = total_accepted - row.accepted_with;
        const ContingencyTable2x2 t{row.accepted_with, row.with - row.accepted_with, row.accepted_without,
                                    row.without - row.accepted_without};
        const auto f = fisher_exact(t);
        row.p = sidedness == Sidedness::one_sided ? f.p_one_sided : f.p_two_sided;
        row.persuasive = row.ratio_with() > row.ratio_without();
        if (row.p <= alpha) {
            out.push_back(std::move(row));
        }
    }
    std::sort(out.begin(), out.end(), [](const WordScreenRow& x, const WordScreenRow& y) {
        return x.p != y.p ? x.p < y.p : x.word < y.word;
    });
    return out;
}

namespace {

double mean_of(std::span<const double> v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double std_of(std::span<const double> v) {
    if (v.size() < 2) {
        return 0.0;
    }
    const double mu = mean_of(v);
    double ss = 0.0;
    for (double x : v) {
        ss += (x - mu) * (x - mu);
    }
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

} // namespace

WordRanking svm_word_ranking(const SuggestionMatrix& matrix, std::size_t folds, std::uint64_t seed,
                             const std::optional<std::set<std::string>>& restrict_to,
                             const FitOptions& options) {
    std::vector<Eigen::Index> cols;
    WordRanking out;
    for (std::size_t j = 0; j < matrix.vocabulary.size(); ++j) {
        if (!restrict_to || restrict_to->contains(matrix.vocabulary[j])) {
            cols.push_back(static_cast<Eigen::Index>(j));
            out.vocabulary.push_back(matrix.vocabulary[j]);
        }
    }
    if (cols.empty()) {
        throw FitError("svm_word_ranking: no vocabulary words left to fit");
    }
    const Eigen::MatrixXd x = matrix.rows(Eigen::all, cols);
    const Eigen::VectorXi y = matrix.labels.unaryExpr([](int v) { return v == 1 ? 1 : 0; });
    const auto split = stratified_folds(y, folds, seed);

    out.fold_coefficients.resize(static_cast<Eigen::Index>(split.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t k = 0; k < split.size(); ++k) {
        std::vector<char> in_test(static_cast<std::size_t>(y.size()), 0);
        for (auto i : split[k]) {
            in_test[i] = 1;
        }
        std::vector<Eigen::Index> train, test;
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            (in_test[static_cast<std::size_t>(i)] ? test : train).push_back(i);
        }
        const Eigen::MatrixXd train_x = x(train, Eigen::all);
        const Eigen::VectorXi train_y = y(train);
        const auto model = fit(ModelKind::linear_svm, train_x, train_y, options, derive_seed(seed, 2000 + k));
        const Eigen::VectorXi pred = model.predict_all(x(test, Eigen::all));
        const Eigen::VectorXi truth = y(test);
        out.fold_accuracy.push_back(static_cast<double>((pred.array() == truth.array()).count()) /
                                    static_cast<double>(test.size()));
        out.fold_coefficients.row(static_cast<Eigen::Index>(k)) = model.coefficients().transpose();
    }
    out.accuracy_mean = mean_of(out.fold_accuracy);
    out.accuracy_std = std_of(out.fold_accuracy);
    for (std::size_t j = 0; j < cols.size(); ++j) {
        std::vector<double> c(split.size());
        for (std::size_t k = 0; k < split.size(); ++k) {
            c[k] = out.fold_coefficients(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j));
        }
        out.words.push_back({out.vocabulary[j], mean_of(c), std_of(c)});
    }
    std::stable_sort(out.words.begin(), out.words.end(),
                     [](const WordCoefficient& a, const WordCoefficient& b) { return a.mean > b.mean; });
    return out;
}

WordRanking screen_then_fit(const SuggestionMatrix& matrix, double alpha, std::size_t folds, std::uint64_t seed,
                            Sidedness sidedness, const FitOptions& options) {
    std::set<std::string> kept;
    for (const auto& row : word_screen(matrix, alpha, sidedness)) {
        kept.insert(row.word);
    }
    return svm_word_ranking(matrix, folds, seed, kept, options);
}

std::string ratio_cell(std::uint64_t accepted, std::uint64_t total) {
    const std::string counts = " (" + std::to_string(accepted) + "/" + std::to_string(total) + ")";
    if (total == 0) {
        return "-" + counts;
    }
    if (accepted == total) {
        return "1" + counts;
    }
    // truncated, not rounded: 2069/2278 = 0.908 prints as 0.90
    const std::uint64_t hundredths = accepted * 100 / total;
    char buf[8];
    std::snprintf(buf, sizeof(buf), "0.%02u", static_cast<unsigned>(hundredths));
    return buf + counts;
}

std::string screen_csv(std::span<const WordScreenRow> rows) {
    std::ostringstream out;
    out << "ranking,word,pvalue,accepted_ratio_with,accepted_ratio_without,direction\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        out << i + 1 << ',' << r.word << ',' << std::setprecision(6) << r.p << ','
            << ratio_cell(r.accepted_with, r.with) << ',' << ratio_cell(r.accepted_without, r.without) << ','
            << (r.persuasive ? "persuasive" : "non-persuasive") << '\n';
    }
    return out.str();
}

std::string word_ranking_csv(const WordRanking& ranking) {
    std::ostringstream out;
    out << std::setprecision(6) << "ranking,word,mean,std\n";
    for (std::size_t i = 0; i < ranking.words.size(); ++i) {
        out << i + 1 << ',' << ranking.words[i].word << ',' << ranking.words[i].mean << ','
            << ranking.words[i].std << '\n';
    }
    return out.str();
}

} // namespace meetpat
