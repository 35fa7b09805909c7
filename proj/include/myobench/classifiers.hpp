#pragma once

#include "myobench/dataset.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace myobench {

struct ClassifierKind {
    enum class Family { LDA, QDA, KNN, RF };

    Family family = Family::LDA;
    int k = 5;       // KNN neighbours
    int trees = 10;  // RF size

    static ClassifierKind lda() { return {Family::LDA}; }
    static ClassifierKind qda() { return {Family::QDA}; }
    static ClassifierKind knn(int k = 5) { return {Family::KNN, k}; }
    static ClassifierKind rf(int trees = 10) { return {Family::RF, 5, trees}; }

    /// "lda", "qda", "knn", "knn:7", "rf", "rf:25".
    static ClassifierKind parse(std::string_view text);
    /// Short name without parameters: lda, qda, knn, rf.
    std::string name() const;
    /// Name with parameters, e.g. knn:5.
    std::string label() const;

    bool operator==(const ClassifierKind&) const = default;
};

struct FitOptions {
    /// Ridge added to every covariance estimate as gamma * tr(S)/d * I.
    double ridge_gamma = 1e-6;
    /// Worker threads for RF tree growth. Results do not depend on it.
    int jobs = 1;
};

/// Per-feature z-scoring fitted on training rows only. Zero-variance
/// features keep divisor 1.
struct Standardizer {
    Eigen::VectorXd mean;
    Eigen::VectorXd scale;

    static Standardizer fit(const RowMatrix& X);
    Eigen::VectorXd apply(std::span<const double> x) const;
    RowMatrix apply(const RowMatrix& X) const;
};

struct LdaParams {
    Eigen::MatrixXd means;       // classes x d, standardized space
    Eigen::MatrixXd covariance;  // pooled within-class, ridge included
    Eigen::MatrixXd weights;     // classes x d: covariance^-1 * mean_c
    Eigen::VectorXd bias;        // -1/2 mean_c' covariance^-1 mean_c + log prior_c
    Eigen::VectorXd log_priors;
};

struct QdaParams {
    Eigen::MatrixXd means;                  // classes x d
    std::vector<Eigen::MatrixXd> cholesky;  // lower factor of each class covariance (ridge included)
    Eigen::VectorXd log_dets;
    Eigen::VectorXd log_priors;
};

struct KnnParams {
    int k = 5;
    RowMatrix train;                 // standardized
    std::vector<int> train_classes;  // index into TrainedModel::classes
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    std::vector<int> histogram;  // leaf class counts, index into classes

    bool operator==(const TreeNode&) const = default;
};

struct DecisionTree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root

    int predict(std::span<const double> x) const;  // class index
    bool operator==(const DecisionTree&) const = default;
};

struct RfParams {
    std::vector<DecisionTree> trees;
};

struct TrainedModel {
    ClassifierKind kind;
    std::vector<int> classes;  // ascending
    Standardizer standardizer;
    std::uint64_t seed = 0;
    double ridge_gamma = 1e-6;
    std::variant<LdaParams, QdaParams, KnnParams, RfParams> params;

    int dimension() const { return static_cast<int>(standardizer.mean.size()); }
};

/// Fits one classifier. Throws ModelError on single-class input, too few
/// rows per class (QDA), non-finite features, or a covariance that is not
/// positive definite after regularization.
TrainedModel fit(const ClassifierKind& kind, const RowMatrix& X, std::span<const int> y, std::uint64_t seed,
                 const FitOptions& options = {});

/// Throws ModelError on dimension mismatch.
int predict(const TrainedModel& m, std::span<const double> x);

std::vector<int> predict_batch(const TrainedModel& m, const RowMatrix& X);

/// LDA/QDA discriminant scores per class (same order as m.classes).
Eigen::VectorXd discriminants(const TrainedModel& m, std::span<const double> x);

}  // namespace myobench
