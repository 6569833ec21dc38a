#include "biomark/model_eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "biomark/common.hpp"
#include "biomark/correlation.hpp"
#include "biomark/dist.hpp"
#include "biomark/regression.hpp"

namespace biomark {

double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size()) throw DataError("auc: length mismatch");
    std::size_t n_pos = 0, n_neg = 0;
    for (int l : labels) (l != 0 ? n_pos : n_neg)++;
    if (n_pos == 0 || n_neg == 0) throw DataError("auc: both classes required");

    // Rank-sum formulation; average ranks handle ties as half-wins.
    const auto ranks = rank_with_ties(scores);
    double rank_pos = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i)
        if (labels[i] != 0) rank_pos += ranks[i];
    return (rank_pos - 0.5 * double(n_pos) * double(n_pos + 1)) /
           (double(n_pos) * double(n_neg));
}

namespace {

struct Standardizer {
    std::vector<double> mean, sd, median;

    // Statistics from training rows only; missing cells excluded.
    static Standardizer fit(const Matrix& X, const std::vector<std::size_t>& rows) {
        Standardizer s;
        const std::size_t p = X.cols();
        s.mean.assign(p, 0.0);
        s.sd.assign(p, 1.0);
        s.median.assign(p, 0.0);
        for (std::size_t j = 0; j < p; ++j) {
            std::vector<double> obs;
            obs.reserve(rows.size());
            for (std::size_t i : rows)
                if (!is_missing(X(i, j))) obs.push_back(X(i, j));
            if (obs.empty()) throw DataError("cross_validate: all-missing column in train split");
            double m = std::accumulate(obs.begin(), obs.end(), 0.0) / double(obs.size());
            double v = 0.0;
            for (double o : obs) v += (o - m) * (o - m);
            v = obs.size() > 1 ? v / double(obs.size() - 1) : 0.0;
            std::sort(obs.begin(), obs.end());
            const std::size_t h = obs.size() / 2;
            s.mean[j] = m;
            s.sd[j] = v > 0.0 ? std::sqrt(v) : 1.0;
            s.median[j] = obs.size() % 2 ? obs[h] : 0.5 * (obs[h - 1] + obs[h]);
        }
        return s;
    }

    Matrix apply(const Matrix& X, const std::vector<std::size_t>& rows) const {
        Matrix out(rows.size(), X.cols());
        for (std::size_t r = 0; r < rows.size(); ++r)
            for (std::size_t j = 0; j < X.cols(); ++j) {
                double v = X(rows[r], j);
                if (is_missing(v)) v = median[j];
                out(r, j) = (v - mean[j]) / sd[j];
            }
        return out;
    }
};

std::vector<double> gather(const std::vector<double>& y, const std::vector<std::size_t>& rows) {
    std::vector<double> out(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) out[i] = y[rows[i]];
    return out;
}

double r2_score(const std::vector<double>& y, const std::vector<double>& yhat) {
    const double mean = std::accumulate(y.begin(), y.end(), 0.0) / double(y.size());
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        ss_res += (y[i] - yhat[i]) * (y[i] - yhat[i]);
        ss_tot += (y[i] - mean) * (y[i] - mean);
    }
    if (ss_tot <= 0.0) throw DataError("r2: constant outcome in scoring split");
    return 1.0 - ss_res / ss_tot;
}

struct RidgeModel {
    Standardizer std_stats;
    double y_mean = 0.0;
    std::vector<double> beta;

    static RidgeModel fit(const Matrix& X, const std::vector<double>& y,
                          const std::vector<std::size_t>& rows, double penalty) {
        RidgeModel m;
        m.std_stats = Standardizer::fit(X, rows);
        const Matrix Z = m.std_stats.apply(X, rows);
        const auto yt = gather(y, rows);
        m.y_mean = std::accumulate(yt.begin(), yt.end(), 0.0) / double(yt.size());
        std::vector<double> yc(yt.size());
        for (std::size_t i = 0; i < yt.size(); ++i) yc[i] = yt[i] - m.y_mean;
        m.beta = ridge_fit(Z, yc, penalty, 0);
        return m;
    }

    std::vector<double> predict(const Matrix& X, const std::vector<std::size_t>& rows) const {
        const Matrix Z = std_stats.apply(X, rows);
        auto out = Z.multiply(beta);
        for (double& v : out) v += y_mean;
        return out;
    }
};

double select_ridge_penalty(const Matrix& X, const std::vector<double>& y,
                            const std::vector<std::size_t>& train_rows,
                            const std::vector<double>& grid) {
    if (grid.size() == 1) return grid[0];
    // Deterministic inner 3-fold split by position.
    const int inner_k = 3;
    double best_penalty = grid[0], best_score = -1e300;
    for (double penalty : grid) {
        double score = 0.0;
        int used = 0;
        for (int f = 0; f < inner_k; ++f) {
            std::vector<std::size_t> tr, va;
            for (std::size_t i = 0; i < train_rows.size(); ++i)
                (int(i % inner_k) == f ? va : tr).push_back(train_rows[i]);
            if (tr.size() < X.cols() + 2 || va.size() < 3) continue;
            const auto model = RidgeModel::fit(X, y, tr, penalty);
            const auto pred = model.predict(X, va);
            try {
                score += r2_score(gather(y, va), pred);
                ++used;
            } catch (const DataError&) {
            }
        }
        if (used > 0 && score / used > best_score) {
            best_score = score / used;
            best_penalty = penalty;
        }
    }
    return best_penalty;
}

std::vector<int> binarize_labels(const std::vector<double>& y) {
    std::set<double> distinct(y.begin(), y.end());
    if (distinct.size() != 2) throw DataError("cross_validate: classification target not binary");
    const double hi = *distinct.rbegin();
    std::vector<int> out(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) out[i] = y[i] == hi ? 1 : 0;
    return out;
}

}  // namespace

ModelEval cross_validate(const Matrix& X, const std::vector<double>& y,
                         const std::vector<int>& fold_of_row, int k, const ModelSpec& model) {
    const std::size_t n = X.rows();
    if (y.size() != n || fold_of_row.size() != n)
        throw DataError("cross_validate: length mismatch");
    if (k < 2) throw DataError("cross_validate: needs k >= 2");

    std::vector<std::vector<std::size_t>> fold_rows(k);
    for (std::size_t i = 0; i < n; ++i) {
        const int f = fold_of_row[i];
        if (f < 0 || f >= k) throw DataError("cross_validate: fold index out of range");
        fold_rows[f].push_back(i);
    }
    for (int f = 0; f < k; ++f)
        if (fold_rows[f].empty()) throw DataError("cross_validate: empty fold");

    std::vector<std::size_t> all_rows(n);
    std::iota(all_rows.begin(), all_rows.end(), 0);

    ModelEval eval;
    if (std::holds_alternative<RidgeSpec>(model)) {
        const auto& spec = std::get<RidgeSpec>(model);
        eval.metric_kind = MetricKind::r2;
        for (int f = 0; f < k; ++f) {
            std::vector<std::size_t> train;
            for (int g = 0; g < k; ++g)
                if (g != f) train.insert(train.end(), fold_rows[g].begin(), fold_rows[g].end());
            const double penalty = select_ridge_penalty(X, y, train, spec.penalty_grid);
            const auto m = RidgeModel::fit(X, y, train, penalty);
            const auto pred = m.predict(X, fold_rows[f]);
            eval.fold_metrics.push_back(r2_score(gather(y, fold_rows[f]), pred));
        }
        const double penalty = select_ridge_penalty(X, y, all_rows, spec.penalty_grid);
        const auto full = RidgeModel::fit(X, y, all_rows, penalty);
        eval.train_metric = r2_score(y, full.predict(X, all_rows));
    } else {
        const auto& spec = std::get<LogisticSpec>(model);
        eval.metric_kind = MetricKind::auc;
        const auto labels = binarize_labels(y);

        auto fit_score = [&](const std::vector<std::size_t>& train,
                             const std::vector<std::size_t>& score_rows) {
            for (const auto* rows : {&train, &score_rows}) {
                bool has0 = false, has1 = false;
                for (std::size_t i : *rows) (labels[i] ? has1 : has0) = true;
                if (!has0 || !has1)
                    throw DataError("cross_validate: fold missing a class; re-stratify folds");
            }
            Standardizer st = Standardizer::fit(X, train);
            Matrix Ztr = Matrix(train.size(), X.cols() + 1, 1.0);
            {
                const Matrix z = st.apply(X, train);
                for (std::size_t i = 0; i < train.size(); ++i)
                    for (std::size_t j = 0; j < X.cols(); ++j) Ztr(i, j + 1) = z(i, j);
            }
            std::vector<double> ytr(train.size());
            for (std::size_t i = 0; i < train.size(); ++i) ytr[i] = labels[train[i]];
            const auto fit = logistic_fit(Ztr, ytr, spec.penalty, spec.max_iter, spec.tol);

            Matrix Zs(score_rows.size(), X.cols() + 1, 1.0);
            {
                const Matrix z = st.apply(X, score_rows);
                for (std::size_t i = 0; i < score_rows.size(); ++i)
                    for (std::size_t j = 0; j < X.cols(); ++j) Zs(i, j + 1) = z(i, j);
            }
            const auto scores = logistic_predict(Zs, fit.beta);
            std::vector<int> ls(score_rows.size());
            for (std::size_t i = 0; i < score_rows.size(); ++i) ls[i] = labels[score_rows[i]];
            return auc(scores, ls);
        };

        for (int f = 0; f < k; ++f) {
            std::vector<std::size_t> train;
            for (int g = 0; g < k; ++g)
                if (g != f) train.insert(train.end(), fold_rows[g].begin(), fold_rows[g].end());
            eval.fold_metrics.push_back(fit_score(train, fold_rows[f]));
        }
        eval.train_metric = fit_score(all_rows, all_rows);
    }
    eval.cv_metric = std::accumulate(eval.fold_metrics.begin(), eval.fold_metrics.end(), 0.0) /
                     double(eval.fold_metrics.size());
    return eval;
}

double min_detectable_rho(std::size_t n, double alpha, double power) {
    if (n < 10) throw DataError("min_detectable_rho: needs n >= 10");
    const double z = normal_quantile(1.0 - alpha / 2.0) + normal_quantile(power);
    for (int i = 1; i <= 999; ++i) {
        const double rho = double(i) / 1000.0;
        const double required = std::pow(z / std::atanh(rho), 2.0) + 3.0;
        if (required <= double(n)) return rho;
    }
    return 0.999;
}

}  // namespace biomark
