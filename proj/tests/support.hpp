#pragma once
// Shared helpers for the unit tests and the acceptance binary. Independent
// oracles live here, written without Eigen decompositions so they never
// share code paths with the library.

#include "myobench/classifiers.hpp"
#include "myobench/dataset.hpp"
#include "myobench/rng.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

namespace testsupport {

namespace fs = std::filesystem;

// Unique scratch directory removed on scope exit.
class TempDir {
public:
    explicit TempDir(const std::string& tag = "t") {
        static int counter = 0;
        path_ = fs::temp_directory_path() /
                ("myobench_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& s) const { return path_ / s; }

private:
    fs::path path_;
};

inline std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

// Every regular file under dir, relative path -> bytes.
inline std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = read_file(e.path());
    return out;
}

inline std::vector<std::vector<double>> read_csv(const fs::path& p) {
    std::ifstream in(p);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline std::vector<double> normals(myobench::CounterRng& rng, std::size_t n, double sigma = 1.0) {
    std::vector<double> v(n);
    for (auto& x : v) x = sigma * rng.normal();
    return v;
}

inline myobench::RowMatrix random_matrix(myobench::CounterRng& rng, long rows, long cols) {
    myobench::RowMatrix m(rows, cols);
    for (long i = 0; i < rows; ++i)
        for (long j = 0; j < cols; ++j) m(i, j) = rng.normal();
    return m;
}

// Gaussian blobs: class c centered at separation * e_(c mod d) * (c / d + 1).
inline void blobs(myobench::CounterRng& rng, int classes, int per_class, int dims, double separation,
                  myobench::RowMatrix& X, std::vector<int>& y) {
    X.resize(classes * per_class, dims);
    y.clear();
    for (int c = 0; c < classes; ++c)
        for (int i = 0; i < per_class; ++i) {
            const long r = c * per_class + i;
            for (int j = 0; j < dims; ++j) X(r, j) = rng.normal();
            X(r, c % dims) += separation * (c / dims + 1);
            y.push_back(c + 1);
        }
}

// ---------------------------------------------------------------------------
// Dense oracle using plain Gauss-Jordan elimination with partial pivoting.

using Dense = std::vector<std::vector<double>>;

struct InverseDet {
    Dense inverse;
    double log_abs_det = 0.0;
};

inline InverseDet gauss_jordan(Dense a) {
    const std::size_t n = a.size();
    Dense inv(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
    double log_det = 0.0;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        std::swap(a[piv], a[col]);
        std::swap(inv[piv], inv[col]);
        const double p = a[col][col];
        log_det += std::log(std::abs(p));
        for (std::size_t j = 0; j < n; ++j) {
            a[col][j] /= p;
            inv[col][j] /= p;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a[r][col];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) {
                a[r][j] -= f * a[col][j];
                inv[r][j] -= f * inv[col][j];
            }
        }
    }
    return {inv, log_det};
}

struct DenseStandardized {
    std::vector<std::vector<double>> rows;
    std::vector<double> mean, scale;
};

// Sample-variance z-scoring, zero-variance columns keep divisor 1.
inline DenseStandardized dense_standardize(const myobench::RowMatrix& X) {
    const long n = X.rows(), d = X.cols();
    DenseStandardized s;
    s.mean.assign(d, 0.0);
    s.scale.assign(d, 1.0);
    for (long j = 0; j < d; ++j) {
        double m = 0.0;
        for (long i = 0; i < n; ++i) m += X(i, j);
        m /= n;
        double v = 0.0;
        for (long i = 0; i < n; ++i) v += (X(i, j) - m) * (X(i, j) - m);
        v /= std::max<long>(1, n - 1);
        s.mean[j] = m;
        s.scale[j] = v > 0.0 ? std::sqrt(v) : 1.0;
    }
    for (long i = 0; i < n; ++i) {
        std::vector<double> r(d);
        for (long j = 0; j < d; ++j) r[j] = (X(i, j) - s.mean[j]) / s.scale[j];
        s.rows.push_back(r);
    }
    return s;
}

inline std::vector<double> dense_apply(const DenseStandardized& s, const std::vector<double>& x) {
    std::vector<double> z(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) z[j] = (x[j] - s.mean[j]) / s.scale[j];
    return z;
}

// Gaussian discriminants g_c(x) evaluated with explicit inverses and
// determinants. Shared covariance for LDA, per-class for QDA; each gets the
// ridge gamma * tr(S)/d * I. Unbiased normalisation: n_c - 1 per class,
// n - k for the pooled estimate.
inline std::vector<double> dense_discriminants(const myobench::RowMatrix& X, const std::vector<int>& y,
                                               const std::vector<double>& x_raw, bool quadratic, double gamma) {
    const auto s = dense_standardize(X);
    const std::size_t d = static_cast<std::size_t>(X.cols());
    std::vector<int> classes = y;
    std::sort(classes.begin(), classes.end());
    classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
    const std::size_t k = classes.size();

    std::vector<std::vector<double>> mu(k, std::vector<double>(d, 0.0));
    std::vector<double> count(k, 0.0);
    for (std::size_t i = 0; i < y.size(); ++i) {
        const auto c = static_cast<std::size_t>(std::lower_bound(classes.begin(), classes.end(), y[i]) - classes.begin());
        count[c] += 1;
        for (std::size_t j = 0; j < d; ++j) mu[c][j] += s.rows[i][j];
    }
    for (std::size_t c = 0; c < k; ++c)
        for (auto& v : mu[c]) v /= count[c];

    std::vector<Dense> cov(k, Dense(d, std::vector<double>(d, 0.0)));
    for (std::size_t i = 0; i < y.size(); ++i) {
        const auto c = static_cast<std::size_t>(std::lower_bound(classes.begin(), classes.end(), y[i]) - classes.begin());
        for (std::size_t a = 0; a < d; ++a)
            for (std::size_t b = 0; b < d; ++b) cov[c][a][b] += (s.rows[i][a] - mu[c][a]) * (s.rows[i][b] - mu[c][b]);
    }
    const double n = static_cast<double>(y.size());
    auto ridge = [&](Dense m) {
        double tr = 0.0;
        for (std::size_t a = 0; a < d; ++a) tr += m[a][a];
        const double add = gamma * tr / static_cast<double>(d);
        for (std::size_t a = 0; a < d; ++a) m[a][a] += add;
        return m;
    };
    std::vector<InverseDet> solved;
    if (quadratic) {
        for (std::size_t c = 0; c < k; ++c) {
            Dense m = cov[c];
            for (auto& r : m)
                for (auto& v : r) v /= count[c] - 1.0;
            solved.push_back(gauss_jordan(ridge(m)));
        }
    } else {
        Dense pooled(d, std::vector<double>(d, 0.0));
        for (std::size_t c = 0; c < k; ++c)
            for (std::size_t a = 0; a < d; ++a)
                for (std::size_t b = 0; b < d; ++b) pooled[a][b] += cov[c][a][b] / (n - static_cast<double>(k));
        solved.push_back(gauss_jordan(ridge(pooled)));
    }

    const auto z = dense_apply(s, x_raw);
    std::vector<double> g(k);
    for (std::size_t c = 0; c < k; ++c) {
        const auto& inv = solved[quadratic ? c : 0].inverse;
        const double prior = std::log(count[c] / n);
        if (quadratic) {
            std::vector<double> diff(d);
            for (std::size_t j = 0; j < d; ++j) diff[j] = z[j] - mu[c][j];
            double q = 0.0;
            for (std::size_t a = 0; a < d; ++a)
                for (std::size_t b = 0; b < d; ++b) q += diff[a] * inv[a][b] * diff[b];
            g[c] = -0.5 * solved[c].log_abs_det - 0.5 * q + prior;
        } else {
            double lin = 0.0, quad = 0.0;
            for (std::size_t a = 0; a < d; ++a)
                for (std::size_t b = 0; b < d; ++b) {
                    lin += z[a] * inv[a][b] * mu[c][b];
                    quad += mu[c][a] * inv[a][b] * mu[c][b];
                }
            g[c] = lin - 0.5 * quad + prior;
        }
    }
    return g;
}

// Exhaustive KNN: sort every training row by (distance, row index), take
// k, majority vote with ties to the lowest label.
inline int knn_oracle(const myobench::RowMatrix& X, const std::vector<int>& y, const std::vector<double>& x_raw,
                      int k) {
    const auto s = dense_standardize(X);
    const auto z = dense_apply(s, x_raw);
    std::vector<std::pair<double, std::size_t>> dist;
    for (std::size_t i = 0; i < s.rows.size(); ++i) {
        double d2 = 0.0;
        for (std::size_t j = 0; j < z.size(); ++j) d2 += (s.rows[i][j] - z[j]) * (s.rows[i][j] - z[j]);
        dist.emplace_back(d2, i);
    }
    std::sort(dist.begin(), dist.end());
    std::map<int, int> votes;
    for (int i = 0; i < std::min<int>(k, static_cast<int>(dist.size())); ++i) ++votes[y[dist[i].second]];
    int best = 0, best_votes = -1;
    for (const auto& [label, v] : votes)
        if (v > best_votes) {
            best = label;
            best_votes = v;
        }
    return best;
}

inline std::vector<double> row_of(const myobench::RowMatrix& X, long i) {
    return std::vector<double>(X.row(i).data(), X.row(i).data() + X.cols());
}

// ---------------------------------------------------------------------------
// Sinusoid fitting for the zero-phase filter check: least squares on
// [sin, cos] over the interior samples gives amplitude and phase.

struct SineFit {
    double amplitude = 0.0;
    double phase = 0.0;  // radians relative to a pure sine
};

inline SineFit fit_sine(const std::vector<double>& x, double freq_hz, double fs, std::size_t from,
                        std::size_t to) {
    double ss = 0, cc = 0, sc = 0, xs = 0, xc = 0;
    for (std::size_t i = from; i < to; ++i) {
        const double t = static_cast<double>(i) / fs;
        const double s = std::sin(2 * M_PI * freq_hz * t), c = std::cos(2 * M_PI * freq_hz * t);
        ss += s * s;
        cc += c * c;
        sc += s * c;
        xs += x[i] * s;
        xc += x[i] * c;
    }
    const double det = ss * cc - sc * sc;
    const double a = (xs * cc - xc * sc) / det;
    const double b = (xc * ss - xs * sc) / det;
    return {std::hypot(a, b), std::atan2(b, a)};
}

// Cross-correlation lag of the peak, searched over [-max_lag, max_lag].
inline int xcorr_peak_lag(const std::vector<double>& a, const std::vector<double>& b, int max_lag,
                          std::size_t from, std::size_t to) {
    int best = 0;
    double best_v = -1e300;
    for (int lag = -max_lag; lag <= max_lag; ++lag) {
        double v = 0.0;
        for (std::size_t i = from; i < to; ++i) v += a[i] * b[static_cast<std::size_t>(static_cast<long>(i) + lag)];
        if (v > best_v) {
            best_v = v;
            best = lag;
        }
    }
    return best;
}

// Small hand-built dataset: 1 EMG and 1 ACC stream per trial.
inline myobench::TrialRecord make_trial(myobench::CounterRng& rng, myobench::TrialKey key, int emg_ch = 2,
                                        long emg_n = 2000, double emg_fs = 1000.0, int acc_ch = 3,
                                        long acc_n = 200, double acc_fs = 100.0) {
    myobench::TrialRecord t;
    t.key = key;
    myobench::SignalStream e;
    e.modality = myobench::Modality::EMG;
    e.sample_rate_hz = emg_fs;
    e.samples = random_matrix(rng, emg_ch, emg_n);
    myobench::SignalStream a;
    a.modality = myobench::Modality::ACC;
    a.sample_rate_hz = acc_fs;
    a.samples = random_matrix(rng, acc_ch, acc_n);
    t.streams = {e, a};
    return t;
}

}  // namespace testsupport
