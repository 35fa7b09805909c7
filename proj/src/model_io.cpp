#include "myobench/model_io.hpp"

#include "myobench/error.hpp"

#include <fstream>

namespace myobench {

using nlohmann::json;

namespace {

json vec(const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd to_vec(const json& j) {
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<long>(v.size()));
}

template <typename M>
json mat(const M& m) {
    json rows = json::array();
    for (long i = 0; i < m.rows(); ++i) {
        std::vector<double> r(static_cast<std::size_t>(m.cols()));
        for (long j = 0; j < m.cols(); ++j) r[static_cast<std::size_t>(j)] = m(i, j);
        rows.push_back(r);
    }
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", rows}};
}

template <typename M>
M to_mat(const json& j) {
    M m(j.at("rows").get<long>(), j.at("cols").get<long>());
    const auto& data = j.at("data");
    for (long i = 0; i < m.rows(); ++i)
        for (long k = 0; k < m.cols(); ++k) m(i, k) = data.at(static_cast<std::size_t>(i)).at(static_cast<std::size_t>(k)).get<double>();
    return m;
}

}  // namespace

json model_to_json(const TrainedModel& m) {
    json j;
    j["format"] = "myobench-model";
    j["version"] = kModelFormatVersion;
    j["kind"] = m.kind.label();
    j["classes"] = m.classes;
    j["seed"] = m.seed;
    j["ridge_gamma"] = m.ridge_gamma;
    j["standardizer"] = {{"mean", vec(m.standardizer.mean)}, {"scale", vec(m.standardizer.scale)}};
    json p;
    if (const auto* lda = std::get_if<LdaParams>(&m.params)) {
        p = {{"means", mat(lda->means)},
             {"covariance", mat(lda->covariance)},
             {"weights", mat(lda->weights)},
             {"bias", vec(lda->bias)},
             {"log_priors", vec(lda->log_priors)}};
    } else if (const auto* qda = std::get_if<QdaParams>(&m.params)) {
        json chol = json::array();
        for (const auto& L : qda->cholesky) chol.push_back(mat(L));
        p = {{"means", mat(qda->means)},
             {"cholesky", chol},
             {"log_dets", vec(qda->log_dets)},
             {"log_priors", vec(qda->log_priors)}};
    } else if (const auto* knn = std::get_if<KnnParams>(&m.params)) {
        p = {{"k", knn->k}, {"train", mat(knn->train)}, {"train_classes", knn->train_classes}};
    } else {
        json trees = json::array();
        for (const auto& t : std::get<RfParams>(m.params).trees) {
            json nodes = json::array();
            for (const auto& n : t.nodes) {
                if (n.feature < 0)
                    nodes.push_back({{"histogram", n.histogram}});
                else
                    nodes.push_back({{"feature", n.feature}, {"threshold", n.threshold}, {"left", n.left}, {"right", n.right}});
            }
            trees.push_back(nodes);
        }
        p = {{"trees", trees}};
    }
    j["params"] = std::move(p);
    return j;
}

TrainedModel model_from_json(const json& j) {
    try {
        if (j.at("format").get<std::string>() != "myobench-model") throw ModelError("not a myobench model file");
        if (j.at("version").get<int>() != kModelFormatVersion)
            throw ModelError("unsupported model format version " + std::to_string(j.at("version").get<int>()));
        TrainedModel m;
        m.kind = ClassifierKind::parse(j.at("kind").get<std::string>());
        m.classes = j.at("classes").get<std::vector<int>>();
        m.seed = j.at("seed").get<std::uint64_t>();
        m.ridge_gamma = j.at("ridge_gamma").get<double>();
        m.standardizer.mean = to_vec(j.at("standardizer").at("mean"));
        m.standardizer.scale = to_vec(j.at("standardizer").at("scale"));
        const json& p = j.at("params");
        switch (m.kind.family) {
            case ClassifierKind::Family::LDA: {
                LdaParams lda;
                lda.means = to_mat<Eigen::MatrixXd>(p.at("means"));
                lda.covariance = to_mat<Eigen::MatrixXd>(p.at("covariance"));
                lda.weights = to_mat<Eigen::MatrixXd>(p.at("weights"));
                lda.bias = to_vec(p.at("bias"));
                lda.log_priors = to_vec(p.at("log_priors"));
                m.params = std::move(lda);
                break;
            }
            case ClassifierKind::Family::QDA: {
                QdaParams qda;
                qda.means = to_mat<Eigen::MatrixXd>(p.at("means"));
                for (const auto& L : p.at("cholesky")) qda.cholesky.push_back(to_mat<Eigen::MatrixXd>(L));
                qda.log_dets = to_vec(p.at("log_dets"));
                qda.log_priors = to_vec(p.at("log_priors"));
                m.params = std::move(qda);
                break;
            }
            case ClassifierKind::Family::KNN: {
                KnnParams knn;
                knn.k = p.at("k").get<int>();
                knn.train = to_mat<RowMatrix>(p.at("train"));
                knn.train_classes = p.at("train_classes").get<std::vector<int>>();
                m.params = std::move(knn);
                break;
            }
            case ClassifierKind::Family::RF: {
                RfParams rf;
                for (const auto& jt : p.at("trees")) {
                    DecisionTree t;
                    for (const auto& jn : jt) {
                        TreeNode n;
                        if (jn.contains("histogram")) {
                            n.histogram = jn.at("histogram").get<std::vector<int>>();
                        } else {
                            n.feature = jn.at("feature").get<int>();
                            n.threshold = jn.at("threshold").get<double>();
                            n.left = jn.at("left").get<int>();
                            n.right = jn.at("right").get<int>();
                        }
                        t.nodes.push_back(std::move(n));
                    }
                    rf.trees.push_back(std::move(t));
                }
                m.params = std::move(rf);
                break;
            }
        }
        return m;
    } catch (const json::exception& e) {
        throw ModelError(std::string("malformed model: ") + e.what());
    }
}

void save_model(const TrainedModel& m, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ModelError("cannot write model " + path.string());
    out << model_to_json(m).dump() << '\n';
}

TrainedModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ModelError("cannot open model " + path.string());
    try {
        return model_from_json(json::parse(in));
    } catch (const json::parse_error& e) {
        throw ModelError(std::string("malformed model: ") + e.what());
    }
}

}  // namespace myobench
