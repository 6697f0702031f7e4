#ifndef meetpat_decision_detect_hpp
#define meetpat_decision_detect_hpp

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "meetpat/corpus.hpp"

namespace meetpat {

/// Act counts in kDecisionActs order plus a binary decision label.
struct TimeframeExample {
    std::array<int, 6> counts{};
    int label = 0;

    bool operator==(const TimeframeExample&) const = default;
};

/*
 * Consecutive non-overlapping windows of `window_size` decision acts (acts
 * with other labels are skipped). A trailing partial window is kept when it
 * holds at least half a window. A window is positive when any of its acts
 * falls inside a decision window.
 */
std::vector<TimeframeExample> make_windows(const Meeting& meeting, const Alphabet& alphabet,
                                           std::size_t window_size = 70);

std::vector<TimeframeExample> make_corpus_windows(const Corpus& corpus,
                                                  std::size_t window_size = 70);

struct Dataset {
    Eigen::MatrixXd features;   // one row per example
    Eigen::VectorXi labels;     // 0 / 1
};

Dataset to_dataset(std::span<const TimeframeExample> examples);

enum class ModelKind { linear_svm, logistic, gaussian_nb, kmeans, em_gmm };

inline constexpr std::array<ModelKind, 5> kAllModels = {
    ModelKind::linear_svm, ModelKind::logistic, ModelKind::gaussian_nb, ModelKind::kmeans,
    ModelKind::em_gmm};

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);
bool is_supervised(ModelKind kind);

struct FitOptions {
    double logistic_lambda = 1e-2;
    double svm_lambda = 1e-2;
    std::size_t svm_epochs = 2000;
    double tolerance = 1e-8;           // logistic gradient norm
    std::size_t max_iterations = 200000;
    std::size_t cluster_iterations = 200;
    double variance_floor = 1e-6;
    bool standardize = true;           // linear and clustering models
};

/*
 * A fitted classifier. `score` is the ranking quantity used for AUC:
 *   linear_svm  - margin w.z + b
 *   logistic    - P(y = 1 | x)
 *   gaussian_nb - P(y = 1) * prod_j p(x_j | y = 1)
 *   kmeans      - |z - c_neg|^2 - |z - c_pos|^2
 *   em_gmm      - posterior of the component labelled positive
 * `predict` is the hard decision: margin > 0, probability > 0.5, the
 * argmax class for naive Bayes, and the assigned cluster for the
 * unsupervised models.
 */
class Model {
public:
    ModelKind kind() const { return kind_; }
    double score(const Eigen::Ref<const Eigen::VectorXd>& x) const;
    int predict(const Eigen::Ref<const Eigen::VectorXd>& x) const;
    Eigen::VectorXd score_all(const Eigen::MatrixXd& xs) const;
    Eigen::VectorXi predict_all(const Eigen::MatrixXd& xs) const;

    /// Weights in standardized feature space (linear models only).
    const Eigen::VectorXd& coefficients() const { return weights_; }
    double bias() const { return bias_; }

    // Gaussian naive Bayes parameters, row 0 = negative class, row 1 = positive
    const Eigen::Vector2d& class_priors() const { return priors_; }
    const Eigen::MatrixXd& class_means() const { return means_; }
    const Eigen::MatrixXd& class_variances() const { return variances_; }

    /// Log of P(y = c) * prod_j p(x_j | y = c) for naive Bayes.
    double nb_log_joint(const Eigen::Ref<const Eigen::VectorXd>& x, int c) const;

private:
    friend Model fit(ModelKind, const Eigen::MatrixXd&, const Eigen::VectorXi&, const FitOptions&,
                     std::uint64_t);

    Eigen::VectorXd standardized(const Eigen::Ref<const Eigen::VectorXd>& x) const;
    int cluster_of(const Eigen::VectorXd& z) const;
    double component_log_density(const Eigen::VectorXd& z, int c) const;

    ModelKind kind_ = ModelKind::logistic;
    Eigen::VectorXd center_, scale_;
    Eigen::VectorXd weights_;
    double bias_ = 0.0;
    Eigen::Vector2d priors_ = Eigen::Vector2d::Zero();   // class priors or mixture weights
    Eigen::MatrixXd means_, variances_;                   // 2 x d
    int positive_cluster_ = 1;
};

/// Fits `kind`; supervised kinds throw FitError unless both labels are present.
Model fit(ModelKind kind, const Eigen::MatrixXd& features, const Eigen::VectorXi& labels,
          const FitOptions& options = {}, std::uint64_t seed = 0);

/// Mann-Whitney AUC with midranks for ties. Throws ValidationError when a
/// class is missing.
double auc(std::span<const double> scores, std::span<const int> labels);

template <typename ScoreDerived, typename LabelDerived>
double auc(const Eigen::DenseBase<ScoreDerived>& scores, const Eigen::DenseBase<LabelDerived>& labels) {
    const Eigen::VectorXd s = scores.derived().template cast<double>();
    const Eigen::VectorXi l = labels.derived().template cast<int>();
    return auc(std::span<const double>(s.data(), static_cast<std::size_t>(s.size())),
               std::span<const int>(l.data(), static_cast<std::size_t>(l.size())));
}

struct EvalMetrics {
    double auc = 0.0;          // mean over folds
    double auc_std = 0.0;      // sample standard deviation over folds
    double precision = 0.0;    // pooled over all held-out predictions
    double recall = 0.0;
    double f_measure = 0.0;
    std::vector<double> fold_auc;
};

/*
 * Label-stratified fold assignment. Each fold must leave both classes in
 * its training split and its test split; otherwise the split is redrawn
 * with a derived seed, up to `retries` times.
 */
std::vector<std::vector<std::size_t>> stratified_folds(const Eigen::VectorXi& labels,
                                                       std::size_t folds, std::uint64_t seed,
                                                       std::size_t retries = 10);

EvalMetrics cross_validate(const Eigen::MatrixXd& features, const Eigen::VectorXi& labels,
                           ModelKind kind, std::size_t folds = 15, std::uint64_t seed = 0,
                           const FitOptions& options = {});

struct FeatureRank {
    std::string name;
    double mean = 0.0;
    double std = 0.0;
};

/// Linear-SVM coefficients (standardized features) averaged over folds,
/// sorted by descending mean.
std::vector<FeatureRank> rank_features(const Eigen::MatrixXd& features, const Eigen::VectorXi& labels,
                                       std::span<const std::string> names, std::size_t folds = 15,
                                       std::uint64_t seed = 0, const FitOptions& options = {});

std::string metrics_csv(std::span<const std::pair<ModelKind, EvalMetrics>> rows);
std::string ranking_csv(std::span<const FeatureRank> rows);

} // namespace meetpat

#endif
