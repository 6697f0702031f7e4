#include "meetpat/decision_detect.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <numeric>
#include <sstream>

#include "meetpat/error.hpp"
#include "meetpat/random.hpp"

namespace meetpat {

std::vector<TimeframeExample> make_windows(const Meeting& meeting, const Alphabet& alphabet,
                                           std::size_t window_size) {
    if (window_size == 0) {
        throw ValidationError("window_size must be at least 1");
    }
    // alphabet label -> feature slot, or -1
    std::vector<int> slot(alphabet.size(), -1);
    for (std::size_t j = 0; j < kDecisionActs.size(); ++j) {
        if (auto label = alphabet.find(kDecisionActs[j])) {
            slot[*label] = static_cast<int>(j);
        }
    }
    std::vector<const DialogueAct*> relevant;
    for (const auto& act : meeting.acts) {
        if (slot[act.label] >= 0) {
            relevant.push_back(&act);
        }
    }
    auto in_decision = [&](double t) {
        return std::any_of(meeting.decision_windows.begin(), meeting.decision_windows.end(),
                           [t](const DecisionWindow& w) { return t >= w.start_s && t <= w.end_s; });
    };

    std::vector<TimeframeExample> out;
    for (std::size_t start = 0; start < relevant.size(); start += window_size) {
        const std::size_t stop = std::min(relevant.size(), start + window_size);
        if (2 * (stop - start) < window_size) {
            break;
        }
        TimeframeExample ex;
        for (std::size_t i = start; i < stop; ++i) {
            ++ex.counts[static_cast<std::size_t>(slot[relevant[i]->label])];
            if (in_decision(relevant[i]->time)) {
                ex.label = 1;
            }
        }
        out.push_back(ex);
    }
    return out;
}

std::vector<TimeframeExample> make_corpus_windows(const Corpus& corpus, std::size_t window_size) {
    std::vector<TimeframeExample> out;
    for (const auto& meeting : corpus.meetings) {
        auto windows = make_windows(meeting, corpus.alphabet, window_size);
        out.insert(out.end(), windows.begin(), windows.end());
    }
    return out;
}

Dataset to_dataset(std::span<const TimeframeExample> examples) {
    Dataset d;
    d.features.resize(static_cast<Eigen::Index>(examples.size()), 6);
    d.labels.resize(static_cast<Eigen::Index>(examples.size()));
    for (std::size_t i = 0; i < examples.size(); ++i) {
        for (std::size_t j = 0; j < 6; ++j) {
            d.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = examples[i].counts[j];
        }
        d.labels(static_cast<Eigen::Index>(i)) = examples[i].label;
    }
    return d;
}

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::linear_svm: return "linear-svm";
        case ModelKind::logistic: return "logistic";
        case ModelKind::gaussian_nb: return "gaussian-nb";
        case ModelKind::kmeans: return "kmeans";
        case ModelKind::em_gmm: return "em-gmm";
    }
    return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
    for (auto kind : kAllModels) {
        if (to_string(kind) == name) {
            return kind;
        }
    }
    throw ValidationError("unknown model kind: " + std::string(name));
}

bool is_supervised(ModelKind kind) {
    return kind != ModelKind::kmeans && kind != ModelKind::em_gmm;
}

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

double gaussian_log_density(double x, double mean, double var) {
    const double d = x - mean;
    return -0.5 * (kLog2Pi + std::log(var) + d * d / var);
}

double sigmoid(double t) {
    if (t >= 0) {
        return 1.0 / (1.0 + std::exp(-t));
    }
    const double e = std::exp(t);
    return e / (1.0 + e);
}

// signed labels: +1 / -1
Eigen::VectorXd signed_labels(const Eigen::VectorXi& y) {
    return y.unaryExpr([](int v) { return v == 1 ? 1.0 : -1.0; });
}

void fit_logistic(const Eigen::MatrixXd& z, const Eigen::VectorXi& y, const FitOptions& opt,
                  Eigen::VectorXd& w, double& b) {
    const auto n = static_cast<double>(z.rows());
    const Eigen::VectorXd s = signed_labels(y);
    w = Eigen::VectorXd::Zero(z.cols());
    b = 0.0;
    const double lipschitz = 0.25 * (z.squaredNorm() / n + 1.0) + opt.logistic_lambda;
    const double step = 1.0 / lipschitz;
    for (std::size_t it = 0; it < opt.max_iterations; ++it) {
        const Eigen::VectorXd margin = s.cwiseProduct((z * w).array().matrix() + Eigen::VectorXd::Constant(z.rows(), b));
        // d/dmargin of log(1 + exp(-margin)) = -sigmoid(-margin)
        const Eigen::VectorXd coef = -s.cwiseProduct(margin.unaryExpr([](double m) { return sigmoid(-m); }));
        const Eigen::VectorXd grad_w = z.transpose() * coef / n + opt.logistic_lambda * w;
        const double grad_b = coef.sum() / n;
        if (std::sqrt(grad_w.squaredNorm() + grad_b * grad_b) < opt.tolerance) {
            break;
        }
        w -= step * grad_w;
        b -= step * grad_b;
    }
}

/*
 * Full-batch Pegasos: step 1 / (lambda t), projection onto the ball of
 * radius 1 / sqrt(lambda), iterates averaged over the second half of the
 * epochs. The bias is carried as a constant feature and regularized with
 * the weights, which keeps the update symmetric under label flips.
 */
void fit_svm(const Eigen::MatrixXd& z, const Eigen::VectorXi& y, const FitOptions& opt,
             Eigen::VectorXd& w_out, double& b_out) {
    const auto n = static_cast<double>(z.rows());
    const Eigen::VectorXd s = signed_labels(y);
    const double lambda = opt.svm_lambda;
    const std::size_t epochs = std::max<std::size_t>(opt.svm_epochs, 2);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(z.cols());
    double b = 0.0;
    Eigen::VectorXd w_sum = Eigen::VectorXd::Zero(z.cols());
    double b_sum = 0.0;
    std::size_t averaged = 0;
    const double radius = 1.0 / std::sqrt(lambda);
    for (std::size_t t = 1; t <= epochs; ++t) {
        const double eta = 1.0 / (lambda * static_cast<double>(t));
        const Eigen::VectorXd margin = s.cwiseProduct((z * w).array().matrix() + Eigen::VectorXd::Constant(z.rows(), b));
        Eigen::VectorXd active = (margin.array() < 1.0).cast<double>().matrix().cwiseProduct(s);
        const Eigen::VectorXd sub_w = lambda * w - z.transpose() * active / n;
        const double sub_b = lambda * b - active.sum() / n;
        w -= eta * sub_w;
        b -= eta * sub_b;
        const double norm = std::sqrt(w.squaredNorm() + b * b);
        if (norm > radius) {
            w *= radius / norm;
            b *= radius / norm;
        }
        if (2 * t > epochs) {
            w_sum += w;
            b_sum += b;
            ++averaged;
        }
    }
    w_out = w_sum / static_cast<double>(averaged);
    b_out = b_sum / static_cast<double>(averaged);
}

// k-means++ seeding followed by Lloyd iterations; returns 2 x d centroids
Eigen::MatrixXd kmeans2(const Eigen::MatrixXd& z, std::size_t iterations, Rng& rng) {
    const Eigen::Index n = z.rows();
    Eigen::MatrixXd c(2, z.cols());
    const auto first = std::uniform_int_distribution<Eigen::Index>(0, n - 1)(rng);
    c.row(0) = z.row(first);
    Eigen::VectorXd d2 = (z.rowwise() - c.row(0)).rowwise().squaredNorm();
    if (d2.sum() > 0.0) {
        std::discrete_distribution<Eigen::Index> pick(d2.data(), d2.data() + n);
        c.row(1) = z.row(pick(rng));
    } else {
        c.row(1) = z.row((first + 1) % n);
    }
    std::vector<int> assign(static_cast<std::size_t>(n), -1);
    for (std::size_t it = 0; it < iterations; ++it) {
        bool changed = false;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double a = (z.row(i) - c.row(0)).squaredNorm();
            const double bb = (z.row(i) - c.row(1)).squaredNorm();
            const int k = bb < a ? 1 : 0;
            if (assign[static_cast<std::size_t>(i)] != k) {
                assign[static_cast<std::size_t>(i)] = k;
                changed = true;
            }
        }
        if (!changed) {
            break;
        }
        for (int k = 0; k < 2; ++k) {
            Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(z.cols());
            std::size_t count = 0;
            for (Eigen::Index i = 0; i < n; ++i) {
                if (assign[static_cast<std::size_t>(i)] == k) {
                    sum += z.row(i);
                    ++count;
                }
            }
            if (count > 0) {
                c.row(k) = sum / static_cast<double>(count);
            } else {
                // empty cluster: move it to the point farthest from the other centroid
                Eigen::Index far = 0;
                (z.rowwise() - c.row(1 - k)).rowwise().squaredNorm().maxCoeff(&far);
                c.row(k) = z.row(far);
            }
        }
    }
    return c;
}

// index of the cluster whose labelling as positive gives the higher training accuracy
int best_positive_cluster(const Eigen::VectorXi& clusters, const Eigen::VectorXi& y) {
    Eigen::Index agree = 0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        agree += (clusters(i) == 1) == (y(i) == 1) ? 1 : 0;
    }
    return 2 * agree >= y.size() ? 1 : 0;
}

} // namespace

Eigen::VectorXd Model::standardized(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    if (center_.size() == 0) {
        return x;
    }
    return (x - center_).cwiseQuotient(scale_);
}

double Model::nb_log_joint(const Eigen::Ref<const Eigen::VectorXd>& x, int c) const {
    double total = std::log(priors_(c));
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        total += gaussian_log_density(x(j), means_(c, j), variances_(c, j));
    }
    return total;
}

double Model::component_log_density(const Eigen::VectorXd& z, int c) const {
    double total = std::log(priors_(c));
    for (Eigen::Index j = 0; j < z.size(); ++j) {
        total += gaussian_log_density(z(j), means_(c, j), variances_(c, j));
    }
    return total;
}

int Model::cluster_of(const Eigen::VectorXd& z) const {
    if (kind_ == ModelKind::kmeans) {
        return (z.transpose() - means_.row(1)).squaredNorm() < (z.transpose() - means_.row(0)).squaredNorm() ? 1 : 0;
    }
    return component_log_density(z, 1) > component_log_density(z, 0) ? 1 : 0;
}

double Model::score(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    switch (kind_) {
        case ModelKind::linear_svm:
            return standardized(x).dot(weights_) + bias_;
        case ModelKind::logistic:
            return sigmoid(standardized(x).dot(weights_) + bias_);
        case ModelKind::gaussian_nb:
            return std::exp(nb_log_joint(x, 1));
        case ModelKind::kmeans: {
            const Eigen::VectorXd z = standardized(x);
            const int pos = positive_cluster_;
            return (z.transpose() - means_.row(1 - pos)).squaredNorm() -
                   (z.transpose() - means_.row(pos)).squaredNorm();
        }
        case ModelKind::em_gmm: {
            const Eigen::VectorXd z = standardized(x);
            const double lp = component_log_density(z, positive_cluster_);
            const double ln = component_log_density(z, 1 - positive_cluster_);
            return sigmoid(lp - ln);
        }
    }
    return 0.0;
}

int Model::predict(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    switch (kind_) {
        case ModelKind::linear_svm:
            return score(x) > 0.0 ? 1 : 0;
        case ModelKind::logistic:
            return score(x) > 0.5 ? 1 : 0;
        case ModelKind::gaussian_nb:
            return nb_log_joint(x, 1) > nb_log_joint(x, 0) ? 1 : 0;
        case ModelKind::kmeans:
        case ModelKind::em_gmm:
            return cluster_of(standardized(x)) == positive_cluster_ ? 1 : 0;
    }
    return 0;
}

Eigen::VectorXd Model::score_all(const Eigen::MatrixXd& xs) const {
    Eigen::VectorXd out(xs.rows());
    for (Eigen::Index i = 0; i < xs.rows(); ++i) {
        out(i) = score(xs.row(i).transpose());
    }
    return out;
}

Eigen::VectorXi Model::predict_all(const Eigen::MatrixXd& xs) const {
    Eigen::VectorXi out(xs.rows());
    for (Eigen::Index i = 0; i < xs.rows(); ++i) {
        out(i) = predict(xs.row(i).transpose());
    }
    return out;
}

Model fit(ModelKind kind, const Eigen::MatrixXd& x, const Eigen::VectorXi& y,
          const FitOptions& options, std::uint64_t seed) {
    if (x.rows() == 0 || x.rows() != y.size()) {
        throw FitError("fit: need a nonempty training set with one label per row");
    }
    const auto positives = (y.array() == 1).count();
    if (is_supervised(kind) && (positives == 0 || positives == y.size())) {
        throw FitError("fit: " + to_string(kind) + " needs both classes in the training set");
    }
    Model model;
    model.kind_ = kind;
    const Eigen::Index d = x.cols();

    if (kind == ModelKind::gaussian_nb) {
        model.means_.setZero(2, d);
        model.variances_.setZero(2, d);
        for (int c = 0; c < 2; ++c) {
            std::vector<Eigen::Index> rows;
            for (Eigen::Index i = 0; i < y.size(); ++i) {
                if ((y(i) == 1) == (c == 1)) {
                    rows.push_back(i);
                }
            }
            const auto nc = static_cast<double>(rows.size());
            model.priors_(c) = nc / static_cast<double>(y.size());
            for (auto i : rows) {
                model.means_.row(c) += x.row(i);
            }
            model.means_.row(c) /= nc;
            for (auto i : rows) {
                model.variances_.row(c) += (x.row(i) - model.means_.row(c)).array().square().matrix();
            }
            model.variances_.row(c) /= nc;
        }
        model.variances_ = model.variances_.cwiseMax(options.variance_floor);
        return model;
    }

    Eigen::MatrixXd z = x;
    if (options.standardize) {
        model.center_ = x.colwise().mean().transpose();
        model.scale_ = ((x.rowwise() - model.center_.transpose()).colwise().squaredNorm() /
                        static_cast<double>(x.rows()))
                           .cwiseSqrt()
                           .transpose();
        model.scale_ = model.scale_.unaryExpr([](double v) { return v > 0.0 ? v : 1.0; });
        z = (x.rowwise() - model.center_.transpose()).array().rowwise() / model.scale_.transpose().array();
    }

    switch (kind) {
        case ModelKind::logistic:
            fit_logistic(z, y, options, model.weights_, model.bias_);
            return model;
        case ModelKind::linear_svm:
            fit_svm(z, y, options, model.weights_, model.bias_);
            return model;
        case ModelKind::kmeans: {
            Rng rng(seed);
            model.means_ = kmeans2(z, options.cluster_iterations, rng);
            Eigen::VectorXi clusters(z.rows());
            for (Eigen::Index i = 0; i < z.rows(); ++i) {
                clusters(i) = model.cluster_of(z.row(i).transpose());
            }
            model.positive_cluster_ = best_positive_cluster(clusters, y);
            return model;
        }
        case ModelKind::em_gmm: {
            Rng rng(seed);
            const Eigen::MatrixXd centroids = kmeans2(z, options.cluster_iterations, rng);
            const Eigen::Index n = z.rows();
            // responsibilities for component 1, started from the hard k-means split
            Eigen::VectorXd r(n);
            for (Eigen::Index i = 0; i < n; ++i) {
                r(i) = (z.row(i) - centroids.row(1)).squaredNorm() < (z.row(i) - centroids.row(0)).squaredNorm() ? 1.0 : 0.0;
            }
            model.means_.setZero(2, d);
            model.variances_.setZero(2, d);
            double prev_ll = -std::numeric_limits<double>::infinity();
            for (std::size_t it = 0; it < options.cluster_iterations; ++it) {
                for (int c = 0; c < 2; ++c) {
                    const Eigen::VectorXd wgt = c == 1 ? r : (Eigen::VectorXd::Ones(n) - r);
                    const double total = std::max(wgt.sum(), 1e-12);
                    model.priors_(c) = std::clamp(total / static_cast<double>(n), 1e-12, 1.0);
                    model.means_.row(c) = (wgt.transpose() * z) / total;
                    const Eigen::MatrixXd centered = z.rowwise() - model.means_.row(c);
                    model.variances_.row(c) =
                        (wgt.transpose() * centered.array().square().matrix()) / total;
                }
                model.variances_ = model.variances_.cwiseMax(options.variance_floor);
                double ll = 0.0;
                for (Eigen::Index i = 0; i < n; ++i) {
                    const Eigen::VectorXd zi = z.row(i).transpose();
                    const double l0 = model.component_log_density(zi, 0);
                    const double l1 = model.component_log_density(zi, 1);
                    const double hi = std::max(l0, l1);
                    ll += hi + std::log(std::exp(l0 - hi) + std::exp(l1 - hi));
                    r(i) = sigmoid(l1 - l0);
                }
                if (std::abs(ll - prev_ll) < 1e-10 * (1.0 + std::abs(ll))) {
                    break;
                }
                prev_ll = ll;
            }
            Eigen::VectorXi clusters(n);
            for (Eigen::Index i = 0; i < n; ++i) {
                clusters(i) = model.cluster_of(z.row(i).transpose());
            }
            model.positive_cluster_ = best_positive_cluster(clusters, y);
            return model;
        }
        case ModelKind::gaussian_nb:
            break;
    }
    return model;
}

double auc(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) {
        throw ValidationError("auc: scores and labels differ in length");
    }
    const std::size_t n = scores.size();
    std::size_t n_pos = 0;
    for (int l : labels) {
        n_pos += l == 1 ? 1 : 0;
    }
    const std::size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0) {
        throw ValidationError("auc: undefined metric, both classes must be present");
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    // doubled midranks keep the rank sum integral
    std::uint64_t doubled_rank_sum = 0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) {
            ++j;
        }
        const std::uint64_t doubled_rank = (i + 1) + (j + 1);
        for (std::size_t k = i; k <= j; ++k) {
            if (labels[order[k]] == 1) {
                doubled_rank_sum += doubled_rank;
            }
        }
        i = j + 1;
    }
    // 2 * U = doubled rank sum - n_pos (n_pos + 1)
    const std::uint64_t doubled_u = doubled_rank_sum - n_pos * (n_pos + 1);
    return static_cast<double>(doubled_u) / (2.0 * static_cast<double>(n_pos * n_neg));
}

std::vector<std::vector<std::size_t>> stratified_folds(const Eigen::VectorXi& labels,
                                                       std::size_t folds, std::uint64_t seed,
                                                       std::size_t retries) {
    const auto n = static_cast<std::size_t>(labels.size());
    if (folds < 2 || n < folds) {
        throw ValidationError("cross validation needs 2 <= folds <= number of examples");
    }
    for (std::size_t attempt = 0; attempt <= retries; ++attempt) {
        Rng rng(attempt == 0 ? seed : derive_seed(seed, attempt));
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        // the class of the first shuffled example goes first, so renaming
        // the classes leaves the split unchanged
        const int first = labels(static_cast<Eigen::Index>(order.front()));
        std::stable_partition(order.begin(), order.end(), [&](std::size_t i) {
            return labels(static_cast<Eigen::Index>(i)) == first;
        });
        std::size_t pos_count = 0;
        for (std::size_t i = 0; i < n; ++i) {
            pos_count += labels(static_cast<Eigen::Index>(i)) == 1 ? 1 : 0;
        }
        const std::size_t neg_count = n - pos_count;
        std::vector<std::vector<std::size_t>> out(folds);
        for (std::size_t i = 0; i < n; ++i) {
            out[i % folds].push_back(order[i]);
        }
        bool ok = true;
        for (const auto& fold : out) {
            std::size_t fp = 0;
            for (auto i : fold) {
                fp += labels(static_cast<Eigen::Index>(i)) == 1 ? 1 : 0;
            }
            const std::size_t fn = fold.size() - fp;
            if (fp == 0 || fn == 0 || fp == pos_count || fn == neg_count) {
                ok = false;
                break;
            }
        }
        if (ok) {
            for (auto& fold : out) {
                std::sort(fold.begin(), fold.end());
            }
            return out;
        }
    }
    throw ValidationError("stratification failed: cannot place both classes in every fold");
}

namespace {

struct Split {
    Eigen::MatrixXd train_x, test_x;
    Eigen::VectorXi train_y, test_y;
};

Split split_fold(const Eigen::MatrixXd& x, const Eigen::VectorXi& y,
                 const std::vector<std::vector<std::size_t>>& folds, std::size_t k) {
    std::vector<char> in_test(static_cast<std::size_t>(y.size()), 0);
    for (auto i : folds[k]) {
        in_test[i] = 1;
    }
    Split s;
    const auto n_test = static_cast<Eigen::Index>(folds[k].size());
    const auto n_train = y.size() - n_test;
    s.train_x.resize(n_train, x.cols());
    s.test_x.resize(n_test, x.cols());
    s.train_y.resize(n_train);
    s.test_y.resize(n_test);
    Eigen::Index tr = 0, te = 0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        if (in_test[static_cast<std::size_t>(i)]) {
            s.test_x.row(te) = x.row(i);
            s.test_y(te++) = y(i);
        } else {
            s.train_x.row(tr) = x.row(i);
            s.train_y(tr++) = y(i);
        }
    }
    return s;
}

double sample_std(std::span<const double> values) {
    if (values.size() < 2) {
        return 0.0;
    }
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) {
        ss += (v - mean) * (v - mean);
    }
    return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

} // namespace

EvalMetrics cross_validate(const Eigen::MatrixXd& x, const Eigen::VectorXi& y, ModelKind kind,
                           std::size_t folds, std::uint64_t seed, const FitOptions& options) {
    const auto split = stratified_folds(y, folds, seed);
    EvalMetrics metrics;
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t k = 0; k < split.size(); ++k) {
        const auto s = split_fold(x, y, split, k);
        const auto model = fit(kind, s.train_x, s.train_y, options, derive_seed(seed, 1000 + k));
        const Eigen::VectorXd scores = model.score_all(s.test_x);
        metrics.fold_auc.push_back(auc(scores, s.test_y));
        const Eigen::VectorXi pred = model.predict_all(s.test_x);
        for (Eigen::Index i = 0; i < pred.size(); ++i) {
            tp += pred(i) == 1 && s.test_y(i) == 1 ? 1 : 0;
            fp += pred(i) == 1 && s.test_y(i) == 0 ? 1 : 0;
            fn += pred(i) == 0 && s.test_y(i) == 1 ? 1 : 0;
        }
    }
    metrics.auc = std::accumulate(metrics.fold_auc.begin(), metrics.fold_auc.end(), 0.0) /
                  static_cast<double>(metrics.fold_auc.size());
    metrics.auc_std = sample_std(metrics.fold_auc);
    metrics.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    metrics.recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    const double pr = metrics.precision + metrics.recall;
    metrics.f_measure = pr > 0.0 ? 2.0 * metrics.precision * metrics.recall / pr : 0.0;
    return metrics;
}

std::vector<FeatureRank> rank_features(const Eigen::MatrixXd& x, const Eigen::VectorXi& y,
                                       std::span<const std::string> names, std::size_t folds,
                                       std::uint64_t seed, const FitOptions& options) {
    if (names.size() != static_cast<std::size_t>(x.cols())) {
        throw ValidationError("rank_features: one name per feature column required");
    }
    const auto split = stratified_folds(y, folds, seed);
    std::vector<std::vector<double>> coefs(names.size());
    for (std::size_t k = 0; k < split.size(); ++k) {
        const auto s = split_fold(x, y, split, k);
        const auto model = fit(ModelKind::linear_svm, s.train_x, s.train_y, options, derive_seed(seed, 1000 + k));
        for (std::size_t j = 0; j < names.size(); ++j) {
            coefs[j].push_back(model.coefficients()(static_cast<Eigen::Index>(j)));
        }
    }
    std::vector<FeatureRank> out;
    for (std::size_t j = 0; j < names.size(); ++j) {
        const double mean = std::accumulate(coefs[j].begin(), coefs[j].end(), 0.0) /
                            static_cast<double>(coefs[j].size());
        out.push_back({names[j], mean, sample_std(coefs[j])});
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const FeatureRank& a, const FeatureRank& b) { return a.mean > b.mean; });
    return out;
}

std::string metrics_csv(std::span<const std::pair<ModelKind, EvalMetrics>> rows) {
    std::ostringstream out;
    out << std::setprecision(6) << "method,auc,auc_std,precision,recall,f_measure\n";
    for (const auto& [kind, m] : rows) {
        out << to_string(kind) << ',' << m.auc << ',' << m.auc_std << ',' << m.precision << ','
            << m.recall << ',' << m.f_measure << '\n';
    }
    return out.str();
}

std::string ranking_csv(std::span<const FeatureRank> rows) {
    std::ostringstream out;
    out << std::setprecision(6) << "ranking,dialogue_act,mean,std\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out << i + 1 << ',' << rows[i].name << ',' << rows[i].mean << ',' << rows[i].std << '\n';
    }
    return out.str();
}

} // namespace meetpat
