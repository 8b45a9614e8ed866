#include <doctest.h>

#include "oracles.hpp"
#include "test_support.hpp"

#include "regsel/diagnostics.hpp"
#include "regsel/error.hpp"
#include "regsel/selection.hpp"

#include <cmath>
#include <random>

using namespace regsel;

namespace {

// y depends on x1 and x3 only; the rest is noise.
DesignMatrix sparse_signal(std::mt19937_64& gen, Eigen::Index n, Eigen::Index p) {
    const Eigen::MatrixXd x = oracle::random_matrix(gen, n, p);
    Eigen::VectorXd y = 2.0 * x.col(0) - 1.5 * x.col(2) + oracle::random_vector(gen, n);
    y.array() += 5.0;
    return DesignMatrix::from_numeric(x, y);
}

std::vector<bool> mask_of(const DesignMatrix& d, const std::vector<std::string>& names) {
    std::vector<bool> m(d.terms().size(), false);
    for (const auto& n : names) m[*d.term_index(n)] = true;
    return m;
}

}  // namespace

TEST_CASE("direction parsing") {
    CHECK(parse_direction("forward") == Direction::forward);
    CHECK(parse_direction("backward") == Direction::backward);
    CHECK(parse_direction("both") == Direction::both);
    CHECK(parse_direction("stepwise") == Direction::both);
    CHECK_THROWS_AS(parse_direction("sideways"), ArgumentError);
    CHECK(mode_label(Direction::both) == "Stepwise");
}

TEST_CASE("step_select") {
    std::mt19937_64 gen(2024);

    SUBCASE("each accepted move is the best legal move and the end is a local optimum") {
        for (int trial = 0; trial < 6; ++trial) {
            const auto d = sparse_signal(gen, 60, 7);
            for (auto mode : {Direction::forward, Direction::backward, Direction::both}) {
                const auto trace = step_select(d, Scope{}, mode);
                auto mask = mask_of(d, trace.start_terms);
                const auto legal = [&](std::size_t t, bool adding) {
                    if (adding) return mode != Direction::backward;
                    (void)t;
                    return mode != Direction::forward;
                };
                for (const auto& mv : trace.moves) {
                    const double current = oracle::aic_of_terms(d, mask);
                    CHECK(std::fabs(current - mv.aic_before) < 1e-9);
                    double best = std::numeric_limits<double>::infinity();
                    for (std::size_t t = 0; t < mask.size(); ++t) {
                        const bool adding = !mask[t];
                        if (!legal(t, adding)) continue;
                        auto m = mask;
                        m[t] = adding;
                        best = std::min(best, oracle::aic_of_terms(d, m));
                    }
                    CHECK(std::fabs(best - mv.aic_after) < 1e-9);
                    const std::size_t t = *d.term_index(mv.term);
                    mask[t] = mv.kind == MoveKind::add;
                    CHECK(std::fabs(oracle::aic_of_terms(d, mask) - mv.aic_after) < 1e-9);
                }
                const double final_aic = oracle::aic_of_terms(d, mask);
                CHECK(std::fabs(final_aic - trace.final_aic) < 1e-9);
                for (std::size_t t = 0; t < mask.size(); ++t) {
                    const bool adding = !mask[t];
                    if (!legal(t, adding)) continue;
                    auto m = mask;
                    m[t] = adding;
                    CHECK(oracle::aic_of_terms(d, m) >= final_aic - 1e-9);
                }
                CHECK(trace.final_aic >= oracle::best_subset_aic(d) - 1e-9);
                CHECK(mask == mask_of(d, trace.final_terms));
            }
        }
    }

    SUBCASE("moves stay within scope and replay reproduces the final model") {
        const auto d = sparse_signal(gen, 80, 8);
        Scope scope;
        scope.lower = {"x2"};
        scope.upper = {"x1", "x2", "x3", "x4", "x5"};
        for (auto mode : {Direction::forward, Direction::backward, Direction::both}) {
            const auto trace = step_select(d, scope, mode);
            for (const auto& mv : trace.moves) {
                CHECK(mv.term != "x2");
                CHECK(mv.term != "x6");
                CHECK(mv.term != "x7");
                CHECK(mv.term != "x8");
            }
            CHECK(replay_moves(d, trace.start_terms, trace.moves) == trace.final_terms);
            CHECK(std::find(trace.final_terms.begin(), trace.final_terms.end(), "x2") != trace.final_terms.end());
            const auto again = step_select(d, scope, mode);
            CHECK(trace_to_text(again) == trace_to_text(trace));
        }
    }

    SUBCASE("parallel candidate evaluation gives the same trace") {
        const auto d = sparse_signal(gen, 100, 12);
        SelectionOptions one;
        SelectionOptions many;
        many.workers = 4;
        for (auto mode : {Direction::forward, Direction::backward, Direction::both}) {
            CHECK(trace_to_text(step_select(d, Scope{}, mode, std::nullopt, one)) ==
                  trace_to_text(step_select(d, Scope{}, mode, std::nullopt, many)));
        }
    }

    SUBCASE("single candidate forward search") {
        Eigen::MatrixXd x(20, 1);
        for (Eigen::Index i = 0; i < 20; ++i) x(i, 0) = static_cast<double>(i);
        Eigen::VectorXd y = 3.0 * x.col(0) + oracle::random_vector(gen, 20);
        const auto d = DesignMatrix::from_numeric(x, y);
        const auto trace = step_select(d, Scope{}, Direction::forward);
        REQUIRE(trace.moves.size() == 1);
        CHECK(trace.moves[0].term == "x1");
        CHECK(trace.final_terms == std::vector<std::string>{"x1"});
    }

    SUBCASE("backward removes a pure noise term") {
        const Eigen::MatrixXd x = oracle::random_matrix(gen, 200, 2);
        Eigen::VectorXd noise = oracle::random_vector(gen, 200);
        // noise term exactly orthogonal to the response and the other predictor
        Eigen::MatrixXd basis(200, 3);
        basis << Eigen::VectorXd::Ones(200), x.col(0), 4.0 * x.col(0) + oracle::random_vector(gen, 200);
        Eigen::MatrixXd full(200, 2);
        full.col(0) = x.col(0);
        const Eigen::VectorXd y = basis.col(2);
        Eigen::MatrixXd span(200, 3);
        span << Eigen::VectorXd::Ones(200), x.col(0), y;
        noise -= span * span.colPivHouseholderQr().solve(noise);
        full.col(1) = noise;
        const auto d = DesignMatrix::from_numeric(full, y);
        const auto trace = step_select(d, Scope{}, Direction::backward);
        CHECK(trace.final_terms == std::vector<std::string>{"x1"});
    }

    SUBCASE("bad scopes") {
        const auto d = sparse_signal(gen, 30, 3);
        Scope s;
        s.lower = {"x1"};
        s.upper = {"x2"};
        CHECK_THROWS_AS(step_select(d, s, Direction::both), ArgumentError);
        Scope u;
        u.upper = {"nope"};
        CHECK_THROWS_AS(step_select(d, u, Direction::both), ArgumentError);
        Scope k;
        k.penalty = 0.0;
        CHECK_THROWS_AS(step_select(d, k, Direction::both), ArgumentError);
    }

    SUBCASE("trace text layout") {
        const auto d = sparse_signal(gen, 50, 4);
        const auto text = trace_to_text(step_select(d, Scope{}, Direction::forward));
        CHECK(text.rfind("step\tmove\tterm\taic_before\taic_after\n", 0) == 0);
    }
}

TEST_CASE("compare_models") {
    std::mt19937_64 gen(5);
    const auto d = sparse_signal(gen, 70, 5);
    const auto m1 = fit_checked(d);
    const auto m2 = fit_checked(d.select_terms_by_name({"x1", "x3"}));

    SUBCASE("entries recomputed from the definitions") {
        const auto table = compare_models({m1, m2}, {"full", "small"});
        REQUIRE(table.columns.size() == 2);
        for (std::size_t k = 0; k < 2; ++k) {
            const auto& m = k == 0 ? m1 : m2;
            const auto& c = table.columns[k];
            const auto press = oracle::loo_prediction_errors(m.design().x(), m.design().y());
            CHECK(std::fabs(c.press_ss - press.squaredNorm()) < 1e-9 * c.press_ss);
            const auto df = oracle::dffits_by_refit(m.design().x(), m.design().y());
            CHECK(std::fabs(c.dffits_ss - df.squaredNorm()) < 1e-8 * c.dffits_ss);
            const double n = 70;
            const double r = static_cast<double>(m.rank());
            const double aic = n * std::log(2 * M_PI) + n * std::log(m.rss() / n) + n + 2 * (r + 1);
            CHECK(std::fabs(c.aic_full - aic) < 1e-9);
            CHECK(c.rank == m.rank());
        }
        CHECK(table.to_text().find("small") != std::string::npos);
    }
    SUBCASE("identical models compare identically") {
        const auto table = compare_models({m2, m2});
        CHECK(table.columns[0].press_ss == table.columns[1].press_ss);
        CHECK(table.columns[0].aic_full == table.columns[1].aic_full);
        CHECK(table.columns[0].adj_r_squared == table.columns[1].adj_r_squared);
        CHECK(table.columns[0].dffits_ss == table.columns[1].dffits_ss);
    }
    SUBCASE("different row sets are rejected") {
        const auto m3 = fit_checked(d.without_rows({0}));
        CHECK_THROWS_AS(compare_models({m1, m3}), ArgumentError);
    }
}

TEST_CASE("refit_excluding_rows") {
    std::mt19937_64 gen(8);
    SelectionPlan plan;

    SUBCASE("empty exclusion reproduces the original selection") {
        const auto d = sparse_signal(gen, 60, 5);
        const auto r = refit_excluding_rows(plan, d, {});
        REQUIRE(r.before.size() == 3);
        for (std::size_t k = 0; k < 3; ++k) {
            CHECK(r.before[k].final_terms == r.after[k].final_terms);
            CHECK(r.before_table.columns[k].press_ss == r.after_table.columns[k].press_ss);
        }
    }
    SUBCASE("removing a planted outlier lowers the DFFITS sum of squares") {
        auto d = sparse_signal(gen, 80, 4);
        Eigen::VectorXd y = d.y();
        y(17) += 25.0;
        d = d.with_response(y, "y");
        const auto r = refit_excluding_rows(plan, d, {17});
        for (std::size_t k = 0; k < 3; ++k) {
            CHECK(r.after_table.columns[k].dffits_ss < r.before_table.columns[k].dffits_ss);
        }
        CHECK(r.to_text().rfind("# excluded_rows=18\n", 0) == 0);
    }
    SUBCASE("too few rows left") {
        const auto d = sparse_signal(gen, 8, 5);
        CHECK_THROWS_AS(refit_excluding_rows(plan, d, {0, 1, 2}), ArgumentError);
        CHECK_THROWS_AS(refit_excluding_rows(plan, d, {99}), ArgumentError);
    }
}
