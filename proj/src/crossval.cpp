#include "regsel/crossval.hpp"

#include "regsel/error.hpp"
#include "regsel/least_squares.hpp"
#include "regsel/parallel.hpp"
#include "regsel/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

namespace regsel {

std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k, StreamRng& rng) {
    if (k > n) throw ArgumentError("sample larger than population");
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) {
        const auto j = i + static_cast<std::size_t>(rng.below(n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    return idx;
}

std::size_t training_size(std::size_t n, double fraction) {
    return static_cast<std::size_t>(std::nearbyint(fraction * static_cast<double>(n)));
}

std::vector<std::size_t> training_rows(std::size_t n, std::size_t train_size, std::uint64_t seed, std::size_t replication) {
    StreamRng rng(seed, replication);
    return sample_without_replacement(n, train_size, rng);
}

namespace {

struct PreparedModel {
    std::string label;
    std::vector<Eigen::Index> columns;
    std::vector<bool> factor_column;
};

struct ReplicationOutcome {
    std::vector<double> mspe;
    std::size_t rank_deficient = 0;
    std::size_t unseen = 0;
};

}  // namespace

CVResult mc_cross_validate(const DesignMatrix& data, const CVConfig& config, const CVOptions& options) {
    if (config.replications < 1) throw ArgumentError("cross-validation needs at least one replication");
    if (!(config.train_fraction > 0.0 && config.train_fraction < 1.0)) {
        throw ArgumentError("train fraction must lie in (0, 1)");
    }
    if (config.models.empty()) throw ArgumentError("cross-validation needs at least one candidate model");

    const auto n = static_cast<std::size_t>(data.rows());
    const std::size_t n_train = training_size(n, config.train_fraction);
    if (n_train >= n) throw ArgumentError("train fraction leaves no held-out rows");

    std::vector<PreparedModel> models;
    for (const auto& cand : config.models) {
        const DesignMatrix sub = data.select_terms_by_name(cand.terms);
        const auto full = least_squares_rss(sub.x(), sub.y(), options.fit.alias_tolerance);
        if (static_cast<Eigen::Index>(n_train) < full.rank + 1) {
            throw ArgumentError("training size " + std::to_string(n_train) + " is below rank + 1 for model '" +
                                cand.label + "'");
        }
        PreparedModel pm;
        pm.label = cand.label;
        pm.columns.push_back(0);
        pm.factor_column.push_back(false);
        for (const auto& name : cand.terms) {
            const auto& g = data.terms()[*data.term_index(name)];
            for (auto c : g.columns) {
                pm.columns.push_back(static_cast<Eigen::Index>(c));
                pm.factor_column.push_back(g.kind == TermKind::factor);
            }
        }
        std::vector<std::size_t> order(pm.columns.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](auto a, auto b) { return pm.columns[a] < pm.columns[b]; });
        PreparedModel sorted{pm.label, {}, {}};
        for (auto o : order) {
            sorted.columns.push_back(pm.columns[o]);
            sorted.factor_column.push_back(pm.factor_column[o]);
        }
        models.push_back(std::move(sorted));
    }

    const auto& x = data.x();
    const auto& y = data.y();
    std::vector<ReplicationOutcome> outcomes(config.replications);

    parallel_for(config.replications, options.workers, [&](std::size_t rep) {
        const auto train = training_rows(n, n_train, config.seed, rep);
        std::vector<std::size_t> test;
        test.reserve(n - n_train);
        for (std::size_t i = 0, t = 0; i < n; ++i) {
            if (t < train.size() && train[t] == i) {
                ++t;
            } else {
                test.push_back(i);
            }
        }
        ReplicationOutcome& out = outcomes[rep];
        out.mspe.resize(models.size());
        Eigen::VectorXd ytr(static_cast<Eigen::Index>(train.size()));
        for (std::size_t i = 0; i < train.size(); ++i) ytr(static_cast<Eigen::Index>(i)) = y(static_cast<Eigen::Index>(train[i]));

        for (std::size_t m = 0; m < models.size(); ++m) {
            const auto& pm = models[m];
            const auto p = static_cast<Eigen::Index>(pm.columns.size());
            Eigen::MatrixXd xtr(static_cast<Eigen::Index>(train.size()), p);
            for (Eigen::Index j = 0; j < p; ++j) {
                for (std::size_t i = 0; i < train.size(); ++i) {
                    xtr(static_cast<Eigen::Index>(i), j) = x(static_cast<Eigen::Index>(train[i]), pm.columns[static_cast<std::size_t>(j)]);
                }
            }
            const PivotedQr qr(xtr, options.fit.alias_tolerance);
            if (qr.rank() < p) ++out.rank_deficient;
            const Eigen::VectorXd beta = qr.solve(ytr);

            double sse = 0.0;
            for (auto i : test) {
                const auto row = static_cast<Eigen::Index>(i);
                double pred = 0.0;
                bool unseen = false;
                for (Eigen::Index j = 0; j < p; ++j) {
                    const double v = x(row, pm.columns[static_cast<std::size_t>(j)]);
                    pred += v * beta(j);
                    if (v != 0.0 && qr.aliased()[static_cast<std::size_t>(j)] && pm.factor_column[static_cast<std::size_t>(j)]) {
                        unseen = true;
                    }
                }
                if (unseen) ++out.unseen;
                const double r = y(row) - pred;
                sse += r * r;
            }
            out.mspe[m] = sse / static_cast<double>(test.size());
        }
    });

    CVResult result;
    result.train_size = n_train;
    result.test_size = n - n_train;
    for (std::size_t m = 0; m < models.size(); ++m) {
        CVModelResult r;
        r.label = models[m].label;
        r.mspe.reserve(config.replications);
        for (const auto& o : outcomes) r.mspe.push_back(o.mspe[m]);
        r.rmspe.reserve(r.mspe.size());
        for (double v : r.mspe) r.rmspe.push_back(std::sqrt(v));
        r.mspe_summary = five_number_summary(r.mspe);
        r.rmspe_summary = five_number_summary(r.rmspe);
        result.models.push_back(std::move(r));
    }
    for (const auto& o : outcomes) {
        result.rank_deficient_fits += o.rank_deficient;
        result.unseen_level_rows += o.unseen;
    }
    return result;
}

BoxplotData boxplot_data(const std::vector<double>& values) {
    BoxplotData b;
    b.summary = five_number_summary(values);
    b.lower_fence = b.summary.q1 - 1.5 * b.summary.iqr;
    b.upper_fence = b.summary.q3 + 1.5 * b.summary.iqr;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] < b.lower_fence || values[i] > b.upper_fence) b.outliers.emplace_back(i, values[i]);
    }
    return b;
}

namespace {

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string boxplot_file(const std::vector<double>& values) {
    const auto b = boxplot_data(values);
    std::ostringstream os;
    os << "key\tvalue\treplication\n";
    os << "min\t" << g17(b.summary.min) << "\t\n";
    os << "q1\t" << g17(b.summary.q1) << "\t\n";
    os << "median\t" << g17(b.summary.median) << "\t\n";
    os << "mean\t" << g17(b.summary.mean) << "\t\n";
    os << "q3\t" << g17(b.summary.q3) << "\t\n";
    os << "max\t" << g17(b.summary.max) << "\t\n";
    os << "iqr\t" << g17(b.summary.iqr) << "\t\n";
    os << "lower_fence\t" << g17(b.lower_fence) << "\t\n";
    os << "upper_fence\t" << g17(b.upper_fence) << "\t\n";
    for (const auto& [i, v] : b.outliers) os << "outlier\t" << g17(v) << "\t" << (i + 1) << "\n";
    return os.str();
}

}  // namespace

std::map<std::string, std::string> emit_mspe_boxplot_data(const CVResult& result) {
    if (result.models.empty()) throw ArgumentError("empty cross-validation result");
    std::map<std::string, std::string> files;
    for (const auto& m : result.models) {
        files["boxplot_mspe_" + m.label + ".tsv"] = boxplot_file(m.mspe);
        files["boxplot_rmspe_" + m.label + ".tsv"] = boxplot_file(m.rmspe);
    }
    return files;
}

std::string mspe_dump(const CVResult& result) {
    std::ostringstream os;
    os << "replication";
    for (const auto& m : result.models) os << "\tMSPE_" << m.label;
    os << "\n";
    const std::size_t reps = result.models.empty() ? 0 : result.models.front().mspe.size();
    for (std::size_t r = 0; r < reps; ++r) {
        os << (r + 1);
        for (const auto& m : result.models) os << "\t" << g17(m.mspe[r]);
        os << "\n";
    }
    return os.str();
}

std::string mspe_summary_table(const CVResult& result, bool root) {
    std::ostringstream os;
    os << "statistic";
    for (const auto& m : result.models) os << (root ? "\tMSPE_sqr_" : "\tMSPE_") << m.label;
    os << "\n";
    auto row = [&](const char* name, auto get) {
        os << name;
        for (const auto& m : result.models) os << "\t" << g17(get(root ? m.rmspe_summary : m.mspe_summary));
        os << "\n";
    };
    row("Min.", [](const FiveNumberSummary& s) { return s.min; });
    row("1st Qu.", [](const FiveNumberSummary& s) { return s.q1; });
    row("Median", [](const FiveNumberSummary& s) { return s.median; });
    row("Mean", [](const FiveNumberSummary& s) { return s.mean; });
    row("3rd Qu.", [](const FiveNumberSummary& s) { return s.q3; });
    row("Max.", [](const FiveNumberSummary& s) { return s.max; });
    row("IQR", [](const FiveNumberSummary& s) { return s.iqr; });
    return os.str();
}

}  // namespace regsel
