#include "myobench/classifiers.hpp"
#include "myobench/error.hpp"
#include "myobench/model_io.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace myobench;
using testsupport::row_of;

namespace {

const std::vector<ClassifierKind> kAllKinds{ClassifierKind::lda(), ClassifierKind::qda(), ClassifierKind::knn(),
                                            ClassifierKind::rf()};

// Smallest x in [lo, hi] where the prediction switches from `left` away.
double boundary_1d(const TrainedModel& m, int left, double lo, double hi) {
    REQUIRE(predict(m, std::vector<double>{lo}) == left);
    REQUIRE(predict(m, std::vector<double>{hi}) != left);
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (predict(m, std::vector<double>{mid}) == left ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

RowMatrix affine(const RowMatrix& X, const Eigen::MatrixXd& A, const Eigen::RowVectorXd& b) {
    RowMatrix out = X * A;
    out.rowwise() += b;
    return out;
}

}  // namespace

TEST_CASE("1-D Gaussian classes split at zero") {
    CounterRng rng(10);
    const int n = 10000;
    RowMatrix X(2 * n, 1);
    std::vector<int> y;
    for (int i = 0; i < n; ++i) {
        X(i, 0) = -1.0 + rng.normal();
        X(n + i, 0) = 1.0 + rng.normal();
    }
    y.assign(n, 1);
    y.insert(y.end(), n, 2);
    for (const auto& kind : {ClassifierKind::lda(), ClassifierKind::qda()}) {
        const auto m = fit(kind, X, y, 0);
        CHECK(std::abs(boundary_1d(m, 1, -1.0, 1.0)) <= 0.1);
    }
}

TEST_CASE("KNN equals the exhaustive oracle on 50 small instances") {
    CounterRng rng(50);
    for (int inst = 0; inst < 50; ++inst) {
        const int rows = 10 + static_cast<int>(rng.below(191));
        const int dims = 1 + static_cast<int>(rng.below(5));
        const int classes = 2 + static_cast<int>(rng.below(4));
        const int k = 1 + static_cast<int>(rng.below(9));
        const RowMatrix X = testsupport::random_matrix(rng, rows, dims);
        std::vector<int> y(static_cast<std::size_t>(rows));
        for (int i = 0; i < rows; ++i) y[static_cast<std::size_t>(i)] = (i < classes) ? i : static_cast<int>(rng.below(classes));
        const auto m = fit(ClassifierKind::knn(k), X, y, 0);
        const RowMatrix Q = testsupport::random_matrix(rng, 20, dims);
        for (long q = 0; q < Q.rows(); ++q) CHECK(predict(m, row_of(Q, q)) == testsupport::knn_oracle(X, y, row_of(Q, q), k));
    }
}

TEST_CASE("LDA and QDA discriminants match dense evaluation") {
    CounterRng rng(31);
    for (int inst = 0; inst < 30; ++inst) {
        const int dims = 1 + static_cast<int>(rng.below(5));
        const int classes = 2 + static_cast<int>(rng.below(3));
        RowMatrix X;
        std::vector<int> y;
        testsupport::blobs(rng, classes, 15 + static_cast<int>(rng.below(30)), dims, 2.0, X, y);
        // random scale per column so standardization matters
        for (long j = 0; j < X.cols(); ++j) X.col(j) *= rng.uniform(0.1, 20.0);
        for (bool quad : {false, true}) {
            for (double gamma : {0.0, 1e-6, 0.05}) {
                FitOptions o;
                o.ridge_gamma = gamma;
                const auto m = fit(quad ? ClassifierKind::qda() : ClassifierKind::lda(), X, y, 0, o);
                for (int q = 0; q < 5; ++q) {
                    const auto x = row_of(testsupport::random_matrix(rng, 1, dims), 0);
                    const auto got = discriminants(m, x);
                    const auto want = testsupport::dense_discriminants(X, y, x, quad, gamma);
                    REQUIRE(static_cast<std::size_t>(got.size()) == want.size());
                    for (std::size_t c = 0; c < want.size(); ++c)
                        CHECK(std::abs(got(static_cast<long>(c)) - want[c]) <= 1e-9 * std::max(1.0, std::abs(want[c])));
                }
            }
        }
    }
}

TEST_CASE("affine equivariance at zero ridge") {
    CounterRng rng(77);
    FitOptions o;
    o.ridge_gamma = 0.0;
    for (int inst = 0; inst < 20; ++inst) {
        const int dims = 2 + static_cast<int>(rng.below(4));
        RowMatrix X;
        std::vector<int> y;
        testsupport::blobs(rng, 3, 40, dims, 1.5, X, y);
        Eigen::MatrixXd A = Eigen::MatrixXd::Random(dims, dims);
        A += 2.0 * Eigen::MatrixXd::Identity(dims, dims);
        Eigen::RowVectorXd b = 10.0 * Eigen::RowVectorXd::Random(dims);
        const RowMatrix Q = testsupport::random_matrix(rng, 40, dims) * 2.0;
        const RowMatrix Xa = affine(X, A, b), Qa = affine(Q, A, b);
        for (const auto& kind : {ClassifierKind::lda(), ClassifierKind::qda()}) {
            const auto m = fit(kind, X, y, 0, o);
            const auto ma = fit(kind, Xa, y, 0, o);
            CHECK(predict_batch(m, Q) == predict_batch(ma, Qa));
            for (long q = 0; q < Q.rows(); ++q) {
                const auto g = discriminants(m, row_of(Q, q));
                const auto ga = discriminants(ma, row_of(Qa, q));
                // invariant up to a class-independent offset
                for (long c = 1; c < g.size(); ++c)
                    CHECK(std::abs((g(c) - g(0)) - (ga(c) - ga(0))) <= 1e-8 * std::max(1.0, std::abs(g(c) - g(0))));
            }
        }
    }
}

TEST_CASE("KNN is invariant to positive feature scaling") {
    CounterRng rng(12);
    RowMatrix X;
    std::vector<int> y;
    testsupport::blobs(rng, 4, 30, 3, 1.0, X, y);
    const RowMatrix Q = testsupport::random_matrix(rng, 50, 3);
    const auto base = predict_batch(fit(ClassifierKind::knn(), X, y, 0), Q);
    for (double c : {1e-3, 0.5, 7.0, 1e4}) {
        const RowMatrix Xs = X * c, Qs = Q * c;
        CHECK(predict_batch(fit(ClassifierKind::knn(), Xs, y, 0), Qs) == base);
    }
}

TEST_CASE("KNN majority and exact-mean examples") {
    RowMatrix X(9, 1);
    X << -0.1, 0.1, 0.2, 0.05, -0.05, 100, 101, 102, 103;
    const std::vector<int> y{1, 1, 1, 2, 2, 2, 2, 2, 2};
    CHECK(predict(fit(ClassifierKind::knn(5), X, y, 0), std::vector<double>{0.0}) == 1);

    CounterRng rng(3);
    RowMatrix B;
    std::vector<int> by;
    testsupport::blobs(rng, 3, 50, 2, 12.0, B, by);
    for (const auto& kind : kAllKinds) {
        const auto m = fit(kind, B, by, 1);
        for (int c = 1; c <= 3; ++c) {
            std::vector<double> mu(2, 0.0);
            int n = 0;
            for (long i = 0; i < B.rows(); ++i)
                if (by[static_cast<std::size_t>(i)] == c) {
                    mu[0] += B(i, 0);
                    mu[1] += B(i, 1);
                    ++n;
                }
            mu[0] /= n;
            mu[1] /= n;
            CHECK(predict(m, mu) == c);
        }
    }
}

TEST_CASE("random forest determinism") {
    CounterRng rng(42);
    RowMatrix X;
    std::vector<int> y;
    testsupport::blobs(rng, 4, 60, 5, 0.8, X, y);
    const auto a = fit(ClassifierKind::rf(), X, y, 42);
    const auto b = fit(ClassifierKind::rf(), X, y, 42);
    const auto& ta = std::get<RfParams>(a.params).trees;
    const auto& tb = std::get<RfParams>(b.params).trees;
    REQUIRE(ta.size() == 10);
    CHECK(ta == tb);
    for (int jobs : {2, 3, 8}) {
        FitOptions o;
        o.jobs = jobs;
        CHECK(std::get<RfParams>(fit(ClassifierKind::rf(), X, y, 42, o).params).trees == ta);
    }
    const auto c = fit(ClassifierKind::rf(), X, y, 43);
    CHECK_FALSE(std::get<RfParams>(c.params).trees == ta);
    const RowMatrix Q = testsupport::random_matrix(rng, 100, 5);
    CHECK(predict_batch(a, Q) == predict_batch(b, Q));
}

TEST_CASE("6 sigma blobs are separated by every classifier") {
    CounterRng rng(6);
    RowMatrix Xtr, Xte;
    std::vector<int> ytr, yte;
    testsupport::blobs(rng, 5, 100, 3, 6.0, Xtr, ytr);
    testsupport::blobs(rng, 5, 100, 3, 6.0, Xte, yte);
    for (const auto& kind : kAllKinds) {
        const auto pred = predict_batch(fit(kind, Xtr, ytr, 5), Xte);
        int ok = 0;
        for (std::size_t i = 0; i < pred.size(); ++i) ok += pred[i] == yte[i];
        INFO(kind.name());
        CHECK(static_cast<double>(ok) / static_cast<double>(pred.size()) >= 0.99);
    }
}

TEST_CASE("predict_batch contract") {
    CounterRng rng(8);
    RowMatrix X;
    std::vector<int> y;
    testsupport::blobs(rng, 7, 600, 4, 1.0, X, y);
    REQUIRE(X.rows() == 4200);
    for (const auto& kind : {ClassifierKind::lda(), ClassifierKind::rf()}) {
        const auto m = fit(kind, X, y, 2);
        CHECK(predict_batch(m, RowMatrix(0, 4)).empty());
        CHECK(predict_batch(m, RowMatrix(0, 0)).empty());
        const auto all = predict_batch(m, X);
        CHECK(all.size() == 4200);
        for (long i = 0; i < X.rows(); i += 97) CHECK(all[static_cast<std::size_t>(i)] == predict(m, row_of(X, i)));
        for (int label : all) CHECK((label >= 1 && label <= 7));
    }
}

TEST_CASE("fit and predict errors") {
    CounterRng rng(1);
    RowMatrix X = testsupport::random_matrix(rng, 20, 3);
    const std::vector<int> one(20, 4);
    for (const auto& kind : kAllKinds) CHECK_THROWS_AS(fit(kind, X, one, 0), ModelError);

    std::vector<int> y(20);
    for (int i = 0; i < 20; ++i) y[static_cast<std::size_t>(i)] = 1 + i % 2;
    const auto m = fit(ClassifierKind::lda(), X, y, 0);
    CHECK_THROWS_AS(predict(m, std::vector<double>{1.0, 2.0}), ModelError);
    CHECK_THROWS_AS(predict_batch(m, RowMatrix::Zero(3, 5)), ModelError);

    RowMatrix bad = X;
    bad(3, 1) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(fit(ClassifierKind::lda(), bad, y, 0), ModelError);

    // QDA needs more rows than one per class
    RowMatrix tiny(2, 1);
    tiny << 0.0, 1.0;
    CHECK_THROWS_AS(fit(ClassifierKind::qda(), tiny, std::vector<int>{1, 2}, 0), ModelError);
}

TEST_CASE("classifier kind parsing") {
    CHECK(ClassifierKind::parse("lda") == ClassifierKind::lda());
    CHECK(ClassifierKind::parse("knn:3") == ClassifierKind::knn(3));
    CHECK(ClassifierKind::parse("rf:25") == ClassifierKind::rf(25));
    CHECK(ClassifierKind::parse("knn") == ClassifierKind::knn(5));
    CHECK_THROWS_AS(ClassifierKind::parse("svm"), ConfigError);
    CHECK_THROWS_AS(ClassifierKind::parse("knn:0"), ConfigError);
}

TEST_CASE("model serialization preserves predictions") {
    CounterRng rng(19);
    RowMatrix X;
    std::vector<int> y;
    testsupport::blobs(rng, 4, 40, 4, 1.2, X, y);
    const RowMatrix Q = testsupport::random_matrix(rng, 200, 4);
    testsupport::TempDir dir("model");
    for (const auto& kind : kAllKinds) {
        const auto m = fit(kind, X, y, 99);
        const auto back = model_from_json(model_to_json(m));
        CHECK(predict_batch(back, Q) == predict_batch(m, Q));
        save_model(m, dir / "m.json");
        const auto loaded = load_model(dir / "m.json");
        CHECK(predict_batch(loaded, Q) == predict_batch(m, Q));
        CHECK(loaded.kind == m.kind);
        CHECK(loaded.classes == m.classes);
        if (kind.family == ClassifierKind::Family::LDA || kind.family == ClassifierKind::Family::QDA)
            for (long q = 0; q < 5; ++q) CHECK(discriminants(loaded, row_of(Q, q)) == discriminants(m, row_of(Q, q)));
    }
    auto j = model_to_json(fit(ClassifierKind::lda(), X, y, 0));
    j["version"] = kModelFormatVersion + 1;
    CHECK_THROWS_AS(model_from_json(j), ModelError);
}
