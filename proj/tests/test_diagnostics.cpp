#include <doctest.h>

#include "oracles.hpp"
#include "test_support.hpp"

#include "regsel/diagnostics.hpp"
#include "regsel/error.hpp"

#include <cmath>
#include <random>

using namespace regsel;

namespace {

double max_abs_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

// Centered, unit-norm, mutually orthogonal columns.
Eigen::MatrixXd orthonormal_centered(std::mt19937_64& gen, Eigen::Index n, Eigen::Index k) {
    Eigen::MatrixXd m(n, k + 1);
    m.col(0).setOnes();
    m.rightCols(k) = oracle::random_matrix(gen, n, k);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
    const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, k + 1);
    return q.rightCols(k);
}

}  // namespace

TEST_CASE("press_residuals") {
    SUBCASE("hand model") {
        const auto p = press_residuals(fit_checked(hand_design()));
        CHECK(std::fabs(p(0) + 1.0) < 1e-13);
        CHECK(std::fabs(p(1) - 0.5) < 1e-13);
        CHECK(std::fabs(p(2) + 1.0) < 1e-13);
        // explicit leave-one-out refits agree
        const auto d = hand_design();
        CHECK(max_abs_diff(p, oracle::loo_prediction_errors(d.x(), d.y())) < 1e-12);
    }
    SUBCASE("zero residual model") {
        Eigen::MatrixXd x(4, 1);
        x << 0, 1, 2, 3;
        const auto m = fit_checked(DesignMatrix::from_numeric(x, Eigen::Vector4d(1, 3, 5, 7)));
        CHECK(press_residuals(m).cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("random designs match literal delete-one refits") {
        std::mt19937_64 gen(60);
        for (int trial = 0; trial < 10; ++trial) {
            const auto d = oracle::random_design(gen, 60, 6);
            const auto m = fit_checked(d);
            const auto p = press_residuals(m);
            CHECK(max_abs_diff(p, oracle::loo_prediction_errors(d.x(), d.y())) < 1e-8);
            CHECK(max_abs_diff(p.array() * (1.0 - m.leverage().array()), m.residuals()) < 1e-12);
        }
    }
    SUBCASE("unit leverage") {
        Eigen::MatrixXd x(3, 2);
        x << 0, 1, 1, 0, 2, 0;
        const auto m = fit_ols(DesignMatrix::from_numeric(x, Eigen::Vector3d(1, 2, 2.5)));
        CHECK_THROWS_WITH_AS(press_residuals(m), doctest::Contains("row 1"), NumericalError);
    }
}

TEST_CASE("cooks_distance") {
    SUBCASE("hand model") {
        const auto d = cooks_distance(fit_checked(hand_design()));
        CHECK(std::fabs(d(0) - 2.5) < 1e-12);
        CHECK(std::fabs(d(1) - 0.25) < 1e-12);
        CHECK(std::fabs(d(2) - 2.5) < 1e-12);
    }
    SUBCASE("refit oracle and response scaling") {
        std::mt19937_64 gen(40);
        for (int trial = 0; trial < 10; ++trial) {
            const auto d = oracle::random_design(gen, 40, 4);
            const auto m = fit_checked(d);
            const auto cd = cooks_distance(m);
            CHECK(max_abs_diff(cd, oracle::cooks_by_refit(d.x(), d.y())) < 1e-8);
            const auto scaled = fit_checked(d.with_response(-3.7 * d.y(), "y"));
            CHECK(max_abs_diff(cooks_distance(scaled), cd) < 1e-10);
        }
    }
    SUBCASE("n <= rank") {
        Eigen::MatrixXd x(2, 1);
        x << 0, 1;
        CHECK_THROWS_AS(cooks_distance(fit_ols(DesignMatrix::from_numeric(x, Eigen::Vector2d(0, 1)))), NumericalError);
    }
}

TEST_CASE("studentized residuals") {
    std::mt19937_64 gen(30);
    SUBCASE("internal: sum r_i^2 sigma^2 (1 - h_i) recovers RSS") {
        const auto d = oracle::random_design(gen, 30, 4);
        const auto m = fit_checked(d);
        const auto r = studentized(m, StudentizedKind::internal);
        const double s2 = m.rss() / (30 - 4);
        const double recovered = (r.array().square() * s2 * (1.0 - m.leverage().array())).sum();
        CHECK(std::fabs(recovered - m.rss()) < 1e-10 * m.rss());
    }
    SUBCASE("external = internal * sqrt((n-r-1)/(n-r-r_i^2))") {
        for (int trial = 0; trial < 5; ++trial) {
            const auto d = oracle::random_design(gen, 35, 5);
            const auto m = fit_checked(d);
            const auto ri = studentized(m, StudentizedKind::internal);
            const auto te = studentized(m, StudentizedKind::external);
            const double n = 35;
            const double r = 5;
            for (Eigen::Index i = 0; i < ri.size(); ++i) {
                const double expected = ri(i) * std::sqrt((n - r - 1) / (n - r - ri(i) * ri(i)));
                CHECK(std::fabs(te(i) - expected) < 1e-10 * (1 + std::fabs(expected)));
            }
        }
    }
    SUBCASE("zero residual row") {
        Eigen::MatrixXd x(5, 1);
        x << -2, -1, 0, 1, 2;
        // symmetric deviations leave the middle point exactly on the line
        const auto m = fit_checked(DesignMatrix::from_numeric(x, (Eigen::VectorXd(5) << 1, -1, 0, -1, 1).finished()));
        CHECK(studentized(m, StudentizedKind::internal)(2) == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(studentized(m, StudentizedKind::external)(2) == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(dffits(m)(2) == doctest::Approx(0.0).epsilon(1e-12));
    }
}

TEST_CASE("dffits") {
    SUBCASE("refit oracle") {
        std::mt19937_64 gen(50);
        for (int trial = 0; trial < 10; ++trial) {
            const auto d = oracle::random_design(gen, 50, 5);
            const auto m = fit_checked(d);
            CHECK(max_abs_diff(dffits(m), oracle::dffits_by_refit(d.x(), d.y())) < 1e-8);
        }
    }
    SUBCASE("no leave-one-out degrees of freedom") {
        CHECK_THROWS_AS(dffits(fit_ols(hand_design())), NumericalError);
    }
}

TEST_CASE("vif") {
    std::mt19937_64 gen(9);
    SUBCASE("orthogonal centered columns") {
        const Eigen::MatrixXd q = orthonormal_centered(gen, 50, 4);
        const auto r = vif(DesignMatrix::from_numeric(q, oracle::random_vector(gen, 50)));
        REQUIRE(r.values.size() == 4);
        for (const auto& v : r.values) CHECK(std::fabs(v.value - 1.0) < 1e-10);
    }
    SUBCASE("exact correlation 0.9") {
        const Eigen::MatrixXd q = orthonormal_centered(gen, 60, 2);
        Eigen::MatrixXd x(60, 2);
        x.col(0) = q.col(0);
        x.col(1) = 0.9 * q.col(0) + std::sqrt(1 - 0.81) * q.col(1);
        const auto r = vif(DesignMatrix::from_numeric(x, oracle::random_vector(gen, 60)));
        for (const auto& v : r.values) CHECK(std::fabs(v.value - 1.0 / (1.0 - 0.81)) < 1e-6);
    }
    SUBCASE("exact collinearity is flagged infinite") {
        Eigen::MatrixXd x = oracle::random_matrix(gen, 30, 3);
        x.col(1) = 2.0 * x.col(0);
        const auto r = vif(DesignMatrix::from_numeric(x, oracle::random_vector(gen, 30)));
        CHECK(r.values[1].infinite);
        CHECK(std::isinf(r.values[1].value));
        CHECK(r.values[0].infinite);
        CHECK_FALSE(r.values[2].infinite);
    }
    SUBCASE("auxiliary regression oracle and affine invariance") {
        for (int trial = 0; trial < 10; ++trial) {
            Eigen::MatrixXd x = oracle::random_matrix(gen, 80, 6);
            x.col(3) += 0.8 * x.col(0) - 0.5 * x.col(2);
            x.col(5) += 1.3 * x.col(4);
            const auto r = vif(DesignMatrix::from_numeric(x, oracle::random_vector(gen, 80)));
            const auto expected = oracle::vif_by_regression(x);
            Eigen::MatrixXd rescaled = x;
            for (Eigen::Index j = 0; j < 6; ++j) rescaled.col(j) = (j + 2.5) * x.col(j).array() - 7.0 * j;
            const auto r2 = vif(DesignMatrix::from_numeric(rescaled, oracle::random_vector(gen, 80)));
            for (std::size_t j = 0; j < 6; ++j) {
                CHECK(std::fabs(r.values[j].value - expected[j]) <= 1e-10 * expected[j]);
                CHECK(std::fabs(r2.values[j].value - r.values[j].value) <= 1e-9 * r.values[j].value);
            }
        }
    }
    SUBCASE("numeric_only skips factor indicators") {
        Eigen::MatrixXd x(6, 3);
        x << 1, 1, 0.3, 1, 2, 0.1, 1, 3, 0.9, 1, 4, 0.4, 1, 5, 0.2, 1, 6, 0.7;
        x.col(0).setOnes();
        std::vector<DesignColumn> cols{{"(Intercept)", "", "", std::nullopt}, {"fb", "f", "b", 0}, {"z", "z", "", 1}};
        Eigen::MatrixXd xf = x;
        xf.col(1) << 0, 1, 0, 1, 1, 0;
        std::vector<TermGroup> terms{{"f", TermKind::factor, {1}, {"a", "b"}}, {"z", TermKind::numeric, {2}, {}}};
        DesignMatrix d(xf, Eigen::VectorXd::LinSpaced(6, 0, 1), cols, terms, "y", {});
        CHECK(vif(d, true).values.size() == 1);
        CHECK(vif(d, false).values.size() == 2);
    }
}

TEST_CASE("vif_prune") {
    std::mt19937_64 gen(77);
    SUBCASE("nothing to prune") {
        const Eigen::MatrixXd x = orthonormal_centered(gen, 40, 3);
        const auto d = DesignMatrix::from_numeric(x, oracle::random_vector(gen, 40));
        const auto r = vif_prune(d, 10.0);
        CHECK(r.report.trail.empty());
        CHECK(r.design.cols() == d.cols());
    }
    SUBCASE("one near-duplicate pair loses exactly one member") {
        Eigen::MatrixXd x = oracle::random_matrix(gen, 100, 5);
        x.col(3) = x.col(1) + 0.05 * oracle::random_vector(gen, 100);
        const auto d = DesignMatrix::from_numeric(x, oracle::random_vector(gen, 100));
        const auto r = vif_prune(d, 10.0);
        REQUIRE(r.report.trail.size() == 1);
        const auto removed = r.report.trail[0].name;
        CHECK((removed == "x2" || removed == "x4"));
        CHECK(r.report.trail[0].vif > 10.0);
        CHECK(r.design.terms().size() == 4);
        for (const auto& v : r.report.values) CHECK(v.value <= 10.0);
        // survivor re-checked with the regression oracle
        Eigen::MatrixXd kept(100, 4);
        for (Eigen::Index j = 0; j < 4; ++j) kept.col(j) = r.design.x().col(j + 1);
        for (double v : oracle::vif_by_regression(kept)) CHECK(v < 10.0);
    }
    SUBCASE("exact duplicate removed first, ties go to the earliest column") {
        Eigen::MatrixXd x = oracle::random_matrix(gen, 50, 3);
        x.col(2) = x.col(0);
        const auto r = vif_prune(DesignMatrix::from_numeric(x, oracle::random_vector(gen, 50)), 10.0);
        REQUIRE(r.report.trail.size() == 1);
        CHECK(r.report.trail[0].name == "x1");
        CHECK(std::isinf(r.report.trail[0].vif));
    }
    SUBCASE("factor terms pass through and loop terminates within #numeric iterations") {
        Eigen::MatrixXd base = oracle::random_matrix(gen, 120, 6);
        for (Eigen::Index j = 1; j < 6; ++j) base.col(j) = base.col(0) + 0.02 * base.col(j);
        Eigen::MatrixXd x(120, 8);
        x.col(0).setOnes();
        x.middleCols(1, 6) = base;
        for (Eigen::Index i = 0; i < 120; ++i) x(i, 7) = (i % 3 == 0) ? 1.0 : 0.0;
        std::vector<DesignColumn> cols{{"(Intercept)", "", "", std::nullopt}};
        std::vector<TermGroup> terms;
        for (std::size_t j = 0; j < 6; ++j) {
            cols.push_back({"v" + std::to_string(j), "v" + std::to_string(j), "", j});
            terms.push_back({"v" + std::to_string(j), TermKind::numeric, {j + 1}, {}});
        }
        cols.push_back({"g1", "g", "1", 6});
        terms.push_back({"g", TermKind::factor, {7}, {"0", "1"}});
        DesignMatrix d(x, oracle::random_vector(gen, 120), cols, terms, "y", {});
        const auto r = vif_prune(d, 10.0);
        CHECK(r.report.trail.size() <= 6);
        CHECK(r.design.term_index("g"));
        for (const auto& v : r.report.values) CHECK(v.value <= 10.0);
        for (const auto& t : r.report.trail) CHECK(t.vif > 10.0);
        CHECK(r.initial.values.size() == 6);
    }
    SUBCASE("a lone constant column cannot be pruned away") {
        Eigen::MatrixXd x = Eigen::MatrixXd::Constant(10, 1, 4.0);
        CHECK_THROWS_AS(vif_prune(DesignMatrix::from_numeric(x, oracle::random_vector(gen, 10)), 10.0), NumericalError);
    }
    SUBCASE("bad threshold") {
        const auto d = oracle::random_design(gen, 20, 3);
        CHECK_THROWS_AS(vif_prune(d, 1.0), ArgumentError);
    }
}

TEST_CASE("influence_flags") {
    SUBCASE("hand model, top_m = 1 flags the tied pair") {
        const auto r = influence_flags(fit_checked(hand_design()), 1);
        CHECK(r.top_influence == std::vector<bool>{true, false, true});
        CHECK(std::fabs(r.mean_leverage - 2.0 / 3.0) < 1e-14);
    }
    SUBCASE("top_m = n flags everything") {
        std::mt19937_64 gen(1);
        const auto m = fit_checked(oracle::random_design(gen, 20, 3));
        const auto r = influence_flags(m, 20);
        for (bool b : r.top_influence) CHECK(b);
        CHECK_THROWS_AS(influence_flags(m, 21), ArgumentError);
        CHECK_THROWS_AS(influence_flags(m, 0), ArgumentError);
    }
    SUBCASE("balanced design has no high-leverage rows") {
        Eigen::MatrixXd x(8, 1);
        x << -1, 1, -1, 1, -1, 1, -1, 1;
        const auto m = fit_checked(DesignMatrix::from_numeric(x, (Eigen::VectorXd(8) << 1, 2, 0, 3, 1, 2, 2, 4).finished()));
        const auto r = influence_flags(m, 2);
        for (bool b : r.high_leverage) CHECK_FALSE(b);
    }
    SUBCASE("flag counts match definitions and plot data is complete") {
        std::mt19937_64 gen(12);
        const auto m = fit_checked(oracle::random_design(gen, 80, 5));
        const auto r = influence_flags(m, 15);
        const double cut = oracle::quantile(std::vector<double>(r.cooks_d.data(), r.cooks_d.data() + 80), 65.0 / 80.0);
        CHECK(std::fabs(cut - r.cook_threshold) < 1e-14);
        std::size_t high = 0;
        std::size_t top = 0;
        for (Eigen::Index i = 0; i < 80; ++i) {
            const auto k = static_cast<std::size_t>(i);
            CHECK(r.high_leverage[k] == (r.leverage(i) > 2 * r.mean_leverage));
            CHECK(r.top_influence[k] == (r.cooks_d(i) >= cut - 1e-10 * std::fabs(cut)));
            high += r.high_leverage[k];
            top += r.top_influence[k];
        }
        CHECK(top >= 15);
        const auto text = influence_plot_data(r, m.design().row_ids());
        CHECK(text.rfind("# two_mean_leverage=", 0) == 0);
        CHECK(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')) == 83);
    }
}

TEST_CASE("added_variable_data") {
    SUBCASE("single predictor partials out the intercept only") {
        const auto m = fit_checked(hand_design());
        const auto av = added_variable_data(m, "x1");
        const Eigen::Vector3d xc(-1, 0, 1);
        const Eigen::Vector3d yc(-2.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0);
        CHECK((av.x_partial - xc).cwiseAbs().maxCoeff() < 1e-14);
        CHECK((av.y_partial - yc).cwiseAbs().maxCoeff() < 1e-14);
        CHECK(std::fabs(av.slope - m.coefficients()(1)) < 1e-14);
    }
    SUBCASE("Frisch-Waugh on random designs") {
        std::mt19937_64 gen(66);
        for (int trial = 0; trial < 10; ++trial) {
            const auto m = fit_checked(oracle::random_design(gen, 50, 6));
            for (std::size_t t = 0; t < m.design().terms().size(); ++t) {
                const auto av = added_variable_data(m, m.design().terms()[t].name);
                CHECK(std::fabs(av.slope - m.coefficients()(static_cast<Eigen::Index>(t + 1))) < 1e-10);
            }
        }
    }
    SUBCASE("multi-column factor and unknown term") {
        Eigen::MatrixXd x(12, 6);
        x.setZero();
        x.col(0).setOnes();
        for (Eigen::Index i = 0; i < 12; ++i) {
            const auto level = i % 6;
            if (level > 0) x(i, level) = 1.0;
        }
        std::vector<DesignColumn> cols{{"(Intercept)", "", "", std::nullopt}};
        TermGroup g{"h_cohort", TermKind::factor, {}, {"1", "2", "3", "4", "5", "6"}};
        for (std::size_t k = 1; k <= 5; ++k) {
            cols.push_back({"h_cohort" + std::to_string(k + 1), "h_cohort", std::to_string(k + 1), 0});
            g.columns.push_back(k);
        }
        DesignMatrix d(x, Eigen::VectorXd::LinSpaced(12, 1, 2), cols, {g}, "y", {});
        const auto m = fit_checked(d);
        CHECK_THROWS_AS(added_variable_data(m, "h_cohort"), ArgumentError);
        CHECK_THROWS_AS(added_variable_data(m, "nope"), ArgumentError);
    }
}
