#include "myobench/classifiers.hpp"

#include "myobench/error.hpp"
#include "myobench/parallel.hpp"
#include "myobench/rng.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <queue>

namespace myobench {

ClassifierKind ClassifierKind::parse(std::string_view text) {
    const auto colon = text.find(':');
    const std::string_view head = text.substr(0, colon);
    int param = -1;
    if (colon != std::string_view::npos) {
        try {
            param = std::stoi(std::string(text.substr(colon + 1)));
        } catch (const std::exception&) {
            throw ConfigError("bad classifier parameter in '" + std::string(text) + "'");
        }
        if (param < 1) throw ConfigError("classifier parameter must be >= 1 in '" + std::string(text) + "'");
    }
    if (head == "lda" && colon == std::string_view::npos) return lda();
    if (head == "qda" && colon == std::string_view::npos) return qda();
    if (head == "knn") return knn(param > 0 ? param : 5);
    if (head == "rf") return rf(param > 0 ? param : 10);
    throw ConfigError("unknown classifier '" + std::string(text) + "' (expected lda|qda|knn[:k]|rf[:trees])");
}

std::string ClassifierKind::name() const {
    switch (family) {
        case Family::LDA: return "lda";
        case Family::QDA: return "qda";
        case Family::KNN: return "knn";
        case Family::RF: return "rf";
    }
    return "?";
}

std::string ClassifierKind::label() const {
    if (family == Family::KNN) return "knn:" + std::to_string(k);
    if (family == Family::RF) return "rf:" + std::to_string(trees);
    return name();
}

Standardizer Standardizer::fit(const RowMatrix& X) {
    Standardizer s;
    const auto n = static_cast<double>(X.rows());
    s.mean = X.colwise().mean().transpose();
    s.scale.resize(X.cols());
    for (long j = 0; j < X.cols(); ++j) {
        const double var = (X.col(j).array() - s.mean(j)).square().sum() / std::max(1.0, n - 1.0);
        const double sd = std::sqrt(var);
        s.scale(j) = sd > 0.0 ? sd : 1.0;
    }
    return s;
}

Eigen::VectorXd Standardizer::apply(std::span<const double> x) const {
    Eigen::VectorXd z(mean.size());
    for (long j = 0; j < mean.size(); ++j) z(j) = (x[static_cast<std::size_t>(j)] - mean(j)) / scale(j);
    return z;
}

RowMatrix Standardizer::apply(const RowMatrix& X) const {
    RowMatrix Z = X;
    for (long j = 0; j < X.cols(); ++j) Z.col(j) = (X.col(j).array() - mean(j)) / scale(j);
    return Z;
}

namespace {

struct Encoded {
    std::vector<int> classes;
    std::vector<int> index;  // per row, into classes
    std::vector<int> counts;
};

Encoded encode(std::span<const int> y) {
    Encoded e;
    e.classes.assign(y.begin(), y.end());
    std::sort(e.classes.begin(), e.classes.end());
    e.classes.erase(std::unique(e.classes.begin(), e.classes.end()), e.classes.end());
    e.counts.assign(e.classes.size(), 0);
    for (int label : y) {
        const auto c = static_cast<int>(std::lower_bound(e.classes.begin(), e.classes.end(), label) - e.classes.begin());
        e.index.push_back(c);
        ++e.counts[static_cast<std::size_t>(c)];
    }
    return e;
}

Eigen::MatrixXd class_means(const RowMatrix& Z, const Encoded& e) {
    Eigen::MatrixXd means = Eigen::MatrixXd::Zero(static_cast<long>(e.classes.size()), Z.cols());
    for (long i = 0; i < Z.rows(); ++i) means.row(e.index[static_cast<std::size_t>(i)]) += Z.row(i);
    for (std::size_t c = 0; c < e.classes.size(); ++c) means.row(static_cast<long>(c)) /= e.counts[c];
    return means;
}

void add_ridge(Eigen::MatrixXd& S, double gamma) {
    const auto d = static_cast<double>(S.rows());
    const double ridge = gamma * S.trace() / d;
    S.diagonal().array() += ridge;
}

Eigen::LLT<Eigen::MatrixXd> factor(const Eigen::MatrixXd& S, const std::string& what) {
    Eigen::LLT<Eigen::MatrixXd> llt(S);
    if (llt.info() != Eigen::Success) throw ModelError(what + " covariance is not positive definite");
    return llt;
}

LdaParams fit_lda(const RowMatrix& Z, const Encoded& e, double gamma) {
    LdaParams p;
    const auto n = static_cast<double>(Z.rows());
    const auto classes = static_cast<long>(e.classes.size());
    p.means = class_means(Z, e);
    Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(Z.cols(), Z.cols());
    for (long i = 0; i < Z.rows(); ++i) {
        const Eigen::VectorXd r = Z.row(i).transpose() - p.means.row(e.index[static_cast<std::size_t>(i)]).transpose();
        scatter.selfadjointView<Eigen::Lower>().rankUpdate(r);
    }
    p.covariance = scatter.selfadjointView<Eigen::Lower>();
    p.covariance /= std::max(1.0, n - static_cast<double>(classes));
    add_ridge(p.covariance, gamma);
    const auto llt = factor(p.covariance, "pooled");

    p.log_priors.resize(classes);
    for (long c = 0; c < classes; ++c) p.log_priors(c) = std::log(e.counts[static_cast<std::size_t>(c)] / n);
    p.weights = llt.solve(p.means.transpose()).transpose();
    p.bias.resize(classes);
    for (long c = 0; c < classes; ++c) p.bias(c) = -0.5 * p.weights.row(c).dot(p.means.row(c)) + p.log_priors(c);
    return p;
}

QdaParams fit_qda(const RowMatrix& Z, const Encoded& e, double gamma) {
    QdaParams p;
    const auto n = static_cast<double>(Z.rows());
    const auto classes = static_cast<long>(e.classes.size());
    p.means = class_means(Z, e);
    p.log_dets.resize(classes);
    p.log_priors.resize(classes);
    for (long c = 0; c < classes; ++c) {
        Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(Z.cols(), Z.cols());
        for (long i = 0; i < Z.rows(); ++i) {
            if (e.index[static_cast<std::size_t>(i)] != c) continue;
            const Eigen::VectorXd r = Z.row(i).transpose() - p.means.row(c).transpose();
            scatter.selfadjointView<Eigen::Lower>().rankUpdate(r);
        }
        Eigen::MatrixXd S = scatter.selfadjointView<Eigen::Lower>();
        S /= e.counts[static_cast<std::size_t>(c)] - 1.0;
        add_ridge(S, gamma);
        const auto llt = factor(S, "class " + std::to_string(e.classes[static_cast<std::size_t>(c)]));
        const Eigen::MatrixXd L = llt.matrixL();
        p.log_dets(c) = 2.0 * L.diagonal().array().log().sum();
        p.log_priors(c) = std::log(e.counts[static_cast<std::size_t>(c)] / n);
        p.cholesky.push_back(L);
    }
    return p;
}

// ---- random forest --------------------------------------------------------

class TreeGrower {
public:
    TreeGrower(const RowMatrix& Z, const std::vector<int>& y, int classes, std::uint64_t key)
        : Z_(Z), y_(y), classes_(classes), rng_(key) {
        features_.resize(static_cast<std::size_t>(Z.cols()));
        std::iota(features_.begin(), features_.end(), 0);
        mtry_ = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(Z.cols()))));
    }

    DecisionTree grow() {
        std::vector<int> sample(static_cast<std::size_t>(Z_.rows()));
        for (auto& s : sample) s = static_cast<int>(rng_.below(static_cast<std::uint64_t>(Z_.rows())));
        DecisionTree tree;
        build(tree, sample);
        return tree;
    }

private:
    struct Split {
        int feature = -1;
        double threshold = 0.0;
        double score = -1.0;  // sum_c nL_c^2 / nL + sum_c nR_c^2 / nR; larger is purer
    };

    std::vector<int> histogram(const std::vector<int>& rows) const {
        std::vector<int> h(static_cast<std::size_t>(classes_), 0);
        for (int r : rows) ++h[static_cast<std::size_t>(y_[static_cast<std::size_t>(r)])];
        return h;
    }

    void best_split_on(int feature, std::vector<int>& rows, Split& best) const {
        std::sort(rows.begin(), rows.end(), [&](int a, int b) {
            const double va = Z_(a, feature), vb = Z_(b, feature);
            return va < vb || (va == vb && a < b);
        });
        std::vector<double> left(static_cast<std::size_t>(classes_), 0.0);
        std::vector<double> right(static_cast<std::size_t>(classes_), 0.0);
        for (int r : rows) right[static_cast<std::size_t>(y_[static_cast<std::size_t>(r)])] += 1.0;
        double left_sq = 0.0, right_sq = 0.0;
        for (double v : right) right_sq += v * v;
        const auto n = static_cast<double>(rows.size());
        for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
            const auto c = static_cast<std::size_t>(y_[static_cast<std::size_t>(rows[i])]);
            left_sq += 2.0 * left[c] + 1.0;
            left[c] += 1.0;
            right_sq -= 2.0 * right[c] - 1.0;
            right[c] -= 1.0;
            const double v = Z_(rows[i], feature), next = Z_(rows[i + 1], feature);
            if (!(v < next)) continue;
            const double nl = static_cast<double>(i + 1);
            const double score = left_sq / nl + right_sq / (n - nl);
            if (score > best.score) {
                double mid = v + (next - v) / 2.0;
                if (!(mid < next)) mid = v;
                best = {feature, mid, score};
            }
        }
    }

    int build(DecisionTree& tree, std::vector<int>& rows) {
        const int id = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        auto h = histogram(rows);
        const bool pure = std::count_if(h.begin(), h.end(), [](int v) { return v > 0; }) <= 1;
        if (pure || rows.size() < 2) {
            tree.nodes[static_cast<std::size_t>(id)].histogram = std::move(h);
            return id;
        }

        // Draw candidate features without replacement; keep drawing past
        // mtry only while no candidate has produced a valid split.
        for (std::size_t i = 0; i < features_.size(); ++i) {
            const auto j = i + static_cast<std::size_t>(rng_.below(features_.size() - i));
            std::swap(features_[i], features_[j]);
        }
        Split best;
        std::vector<int> scratch = rows;
        for (std::size_t i = 0; i < features_.size(); ++i) {
            if (static_cast<int>(i) >= mtry_ && best.feature >= 0) break;
            best_split_on(features_[i], scratch, best);
        }
        if (best.feature < 0) {
            tree.nodes[static_cast<std::size_t>(id)].histogram = std::move(h);
            return id;
        }

        std::vector<int> left, right;
        for (int r : rows) (Z_(r, best.feature) <= best.threshold ? left : right).push_back(r);
        rows.clear();
        rows.shrink_to_fit();
        const int l = build(tree, left);
        const int r = build(tree, right);
        auto& node = tree.nodes[static_cast<std::size_t>(id)];
        node.feature = best.feature;
        node.threshold = best.threshold;
        node.left = l;
        node.right = r;
        return id;
    }

    const RowMatrix& Z_;
    const std::vector<int>& y_;
    int classes_;
    CounterRng rng_;
    std::vector<int> features_;
    int mtry_ = 1;
};

int argmax_lowest(const std::vector<int>& votes) {
    return static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
}

RfParams fit_rf(const RowMatrix& Z, const Encoded& e, int trees, std::uint64_t seed, int jobs) {
    RfParams p;
    p.trees.resize(static_cast<std::size_t>(trees));
    parallel_for(p.trees.size(), jobs, [&](std::size_t t) {
        TreeGrower grower(Z, e.index, static_cast<int>(e.classes.size()),
                          derive_seed(seed, {0x7265, static_cast<std::int64_t>(t)}));
        p.trees[t] = grower.grow();
    });
    return p;
}

int knn_predict(const KnnParams& p, const Eigen::VectorXd& z, std::size_t classes) {
    // Max-heap of the k best (distance, row) pairs; ties on distance go to the lower row.
    using Entry = std::pair<double, long>;
    std::priority_queue<Entry> heap;
    const auto k = static_cast<std::size_t>(std::min<long>(p.k, p.train.rows()));
    for (long i = 0; i < p.train.rows(); ++i) {
        const double d = (p.train.row(i).transpose() - z).squaredNorm();
        if (heap.size() < k) {
            heap.emplace(d, i);
        } else if (Entry(d, i) < heap.top()) {
            heap.pop();
            heap.emplace(d, i);
        }
    }
    std::vector<int> votes(classes, 0);
    while (!heap.empty()) {
        ++votes[static_cast<std::size_t>(p.train_classes[static_cast<std::size_t>(heap.top().second)])];
        heap.pop();
    }
    return argmax_lowest(votes);
}

int argmax_scores(const Eigen::VectorXd& s) {
    long best = 0;
    for (long c = 1; c < s.size(); ++c)
        if (s(c) > s(best)) best = c;
    return static_cast<int>(best);
}

}  // namespace

int DecisionTree::predict(std::span<const double> x) const {
    int id = 0;
    while (nodes[static_cast<std::size_t>(id)].feature >= 0) {
        const auto& n = nodes[static_cast<std::size_t>(id)];
        id = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    const auto& h = nodes[static_cast<std::size_t>(id)].histogram;
    return argmax_lowest(h);
}

TrainedModel fit(const ClassifierKind& kind, const RowMatrix& X, std::span<const int> y, std::uint64_t seed,
                 const FitOptions& options) {
    if (static_cast<std::size_t>(X.rows()) != y.size())
        throw ModelError("feature rows (" + std::to_string(X.rows()) + ") and labels (" + std::to_string(y.size()) +
                         ") differ");
    if (X.cols() < 1) throw ModelError("feature matrix has no columns");
    if (!X.allFinite()) throw ModelError("non-finite feature value in training data");
    const Encoded e = encode(y);
    if (e.classes.size() < 2) throw ModelError("single-class input: need at least 2 distinct classes");
    if (kind.family == ClassifierKind::Family::QDA) {
        for (std::size_t c = 0; c < e.classes.size(); ++c)
            if (e.counts[c] < 2)
                throw ModelError("class " + std::to_string(e.classes[c]) + " has fewer than 2 rows (QDA)");
    }

    TrainedModel m;
    m.kind = kind;
    m.classes = e.classes;
    m.seed = seed;
    m.ridge_gamma = options.ridge_gamma;
    m.standardizer = Standardizer::fit(X);
    const RowMatrix Z = m.standardizer.apply(X);

    switch (kind.family) {
        case ClassifierKind::Family::LDA: m.params = fit_lda(Z, e, options.ridge_gamma); break;
        case ClassifierKind::Family::QDA: m.params = fit_qda(Z, e, options.ridge_gamma); break;
        case ClassifierKind::Family::KNN: {
            if (kind.k < 1) throw ModelError("knn requires k >= 1");
            m.params = KnnParams{kind.k, Z, e.index};
            break;
        }
        case ClassifierKind::Family::RF:
            if (kind.trees < 1) throw ModelError("random forest requires at least one tree");
            m.params = fit_rf(Z, e, kind.trees, seed, options.jobs);
            break;
    }
    return m;
}

Eigen::VectorXd discriminants(const TrainedModel& m, std::span<const double> x) {
    if (static_cast<int>(x.size()) != m.dimension())
        throw ModelError("dimension mismatch: model expects " + std::to_string(m.dimension()) + ", got " +
                         std::to_string(x.size()));
    const Eigen::VectorXd z = m.standardizer.apply(x);
    if (const auto* p = std::get_if<LdaParams>(&m.params)) return p->weights * z + p->bias;
    if (const auto* p = std::get_if<QdaParams>(&m.params)) {
        Eigen::VectorXd s(p->means.rows());
        for (long c = 0; c < p->means.rows(); ++c) {
            const Eigen::VectorXd r = z - p->means.row(c).transpose();
            const Eigen::VectorXd w = p->cholesky[static_cast<std::size_t>(c)].triangularView<Eigen::Lower>().solve(r);
            s(c) = -0.5 * p->log_dets(c) - 0.5 * w.squaredNorm() + p->log_priors(c);
        }
        return s;
    }
    throw ModelError("discriminant scores are defined for LDA and QDA only");
}

int predict(const TrainedModel& m, std::span<const double> x) {
    if (static_cast<int>(x.size()) != m.dimension())
        throw ModelError("dimension mismatch: model expects " + std::to_string(m.dimension()) + ", got " +
                         std::to_string(x.size()));
    int c = 0;
    if (std::holds_alternative<LdaParams>(m.params) || std::holds_alternative<QdaParams>(m.params)) {
        c = argmax_scores(discriminants(m, x));
    } else if (const auto* p = std::get_if<KnnParams>(&m.params)) {
        c = knn_predict(*p, m.standardizer.apply(x), m.classes.size());
    } else {
        const auto& rf = std::get<RfParams>(m.params);
        const Eigen::VectorXd z = m.standardizer.apply(x);
        const std::span<const double> zs(z.data(), static_cast<std::size_t>(z.size()));
        std::vector<int> votes(m.classes.size(), 0);
        for (const auto& t : rf.trees) ++votes[static_cast<std::size_t>(t.predict(zs))];
        c = argmax_lowest(votes);
    }
    return m.classes[static_cast<std::size_t>(c)];
}

std::vector<int> predict_batch(const TrainedModel& m, const RowMatrix& X) {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(X.rows()));
    if (X.rows() > 0 && X.cols() != m.dimension())
        throw ModelError("dimension mismatch: model expects " + std::to_string(m.dimension()) + ", got " +
                         std::to_string(X.cols()));
    for (long i = 0; i < X.rows(); ++i)
        out.push_back(predict(m, std::span<const double>(X.data() + i * X.cols(), static_cast<std::size_t>(X.cols()))));
    return out;
}

}  // namespace myobench
