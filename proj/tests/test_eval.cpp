#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ngc/eval.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace ngc;

namespace {

std::vector<std::string> names_for(std::size_t p) {
    std::vector<std::string> names;
    for (std::size_t j = 0; j < p; ++j) names.push_back("x" + std::to_string(j + 1));
    return names;
}

/// Builds a synthetic sweep whose survival-lambda scores are known exactly.
/// survival(i,j) is the largest lambda at which edge (i,j) is present (0 =
/// never); tiebreak(i,j) is the edge statistic at the smallest lambda and
/// must be positive wherever survival >= the smallest grid value.
SweepResult sweep_from_scores(const Vector& lambdas, const Matrix& survival,
                              const Matrix& tiebreak, const std::vector<std::uint8_t>& truth,
                              bool include_diagonal) {
    const std::size_t p = survival.rows;
    SweepResult sweep;
    sweep.lambdas = lambdas;
    sweep.include_diagonal = include_diagonal;
    for (double lambda : lambdas) {
        GrangerGraph g = make_empty_graph(names_for(p));
        for (std::size_t i = 0; i < p; ++i)
            for (std::size_t j = 0; j < p; ++j)
                if (survival(i, j) >= lambda) {
                    g.edge_stats(i, j) = tiebreak(i, j);
                    g.adjacency[i * p + j] = 1;
                    g.selected_lag[i * p + j] = 1;
                }
        sweep.per_lambda.push_back(std::move(g));
    }
    GrangerGraph truth_graph = make_empty_graph(names_for(p));
    for (std::size_t i = 0; i < p * p; ++i) {
        truth_graph.adjacency[i] = truth[i];
        truth_graph.edge_stats.data[i] = truth[i] ? 1.0 : 0.0;
        truth_graph.selected_lag[i] = truth[i] ? 1 : 0;
    }
    sweep.ground_truth = std::move(truth_graph);
    return sweep;
}

}  // namespace

TEST_CASE("lambda grid validation", "[eval]") {
    CHECK_THROWS_AS(log_lambda_grid(0.0), std::invalid_argument);
    const Vector grid = log_lambda_grid(10.0, 20, 100.0);
    REQUIRE(grid.size() == 20);
    CHECK(grid.front() == Catch::Approx(10.0));
    CHECK(grid.back() == Catch::Approx(0.1));
    for (std::size_t i = 1; i < grid.size(); ++i) CHECK(grid[i] < grid[i - 1]);

    SweepResult bad;
    bad.lambdas = {1.0, 2.0};  // increasing
    bad.ground_truth = make_empty_graph(names_for(2));
    CHECK_THROWS_AS(score_sweep(bad), std::invalid_argument);
}

TEST_CASE("perfect ranking scores auroc 1", "[eval]") {
    const std::size_t p = 3;
    Matrix survival(p, p), tiebreak(p, p, 1.0);
    std::vector<std::uint8_t> truth(p * p, 0);
    // positives: (0,1), (1,2) survive from the top; negatives never appear
    survival(0, 1) = 4.0;
    survival(1, 2) = 3.0;
    truth[0 * p + 1] = 1;
    truth[1 * p + 2] = 1;
    const SweepResult sweep = sweep_from_scores({4.0, 3.0, 2.0, 1.0}, survival, tiebreak, truth, false);
    const CurveSummary c = score_sweep(sweep);
    CHECK(c.auroc == 1.0);
    CHECK(c.aupr == 1.0);
    CHECK(c.roc_points.front() == std::make_pair(0.0, 0.0));
    CHECK(c.roc_points.back() == std::make_pair(1.0, 1.0));
}

TEST_CASE("all-equal scores sit on the chance line", "[eval]") {
    const std::size_t p = 3;
    Matrix survival(p, p, 5.0), tiebreak(p, p, 1.0);
    std::vector<std::uint8_t> truth(p * p, 0);
    truth[0 * p + 1] = 1;
    truth[2 * p + 0] = 1;
    const SweepResult sweep = sweep_from_scores({5.0, 1.0}, survival, tiebreak, truth, false);
    const CurveSummary c = score_sweep(sweep);
    CHECK(c.auroc == Catch::Approx(0.5).margin(1e-15));
}

TEST_CASE("worked 2x2 example scores auroc 0.75", "[eval]") {
    // positives score {0.9, 0.4}, negatives {0.6, 0.1}: 3 of 4 pairs ordered
    const std::size_t p = 2;
    Matrix survival(p, p), tiebreak(p, p);
    survival(0, 0) = 0.9;
    survival(1, 1) = 0.4;
    survival(0, 1) = 0.6;
    survival(1, 0) = 0.1;
    for (std::size_t i = 0; i < p * p; ++i) tiebreak.data[i] = survival.data[i];
    std::vector<std::uint8_t> truth{1, 0, 0, 1};
    const SweepResult sweep =
        sweep_from_scores({0.9, 0.6, 0.4, 0.1}, survival, tiebreak, truth, /*diagonal*/ true);
    const CurveSummary c = score_sweep(sweep);
    CHECK(c.auroc == 0.75);
}

TEST_CASE("auroc equals the pairwise statistic with ties at half", "[eval]") {
    Rng rng(31337);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t p = 3 + rng.uniform_int(3);
        const Vector lambdas{5.0, 4.0, 3.0, 2.0, 1.0};
        Matrix survival(p, p), tiebreak(p, p);
        std::vector<std::uint8_t> truth(p * p, 0);
        std::size_t positives = 0, negatives = 0;
        for (std::size_t i = 0; i < p; ++i)
            for (std::size_t j = 0; j < p; ++j) {
                if (i == j) continue;
                const std::size_t level = rng.uniform_int(6);  // 0 = never survives
                survival(i, j) = level == 0 ? 0.0 : lambdas[level - 1];
                tiebreak(i, j) = survival(i, j) > 0.0 ? 1.0 + rng.uniform_int(3) : 0.0;
                truth[i * p + j] = rng.uniform() < 0.4;
                (truth[i * p + j] ? positives : negatives) += 1;
            }
        if (positives == 0 || negatives == 0) continue;
        const SweepResult sweep = sweep_from_scores(lambdas, survival, tiebreak, truth, false);
        const CurveSummary c = score_sweep(sweep);

        std::vector<std::pair<double, double>> pos, neg;
        for (std::size_t i = 0; i < p; ++i)
            for (std::size_t j = 0; j < p; ++j) {
                if (i == j) continue;
                (truth[i * p + j] ? pos : neg).emplace_back(survival(i, j), tiebreak(i, j));
            }
        CHECK(std::abs(c.auroc - oracle::auroc_pairwise(pos, neg)) <= 1e-12);

        for (std::size_t k = 1; k < c.roc_points.size(); ++k)
            CHECK(c.roc_points[k].first >= c.roc_points[k - 1].first);
        for (std::size_t k = 1; k < c.pr_points.size(); ++k)
            CHECK(c.pr_points[k].first >= c.pr_points[k - 1].first);
    }
}

TEST_CASE("monotone relabeling of the grid leaves areas unchanged", "[eval]") {
    const std::size_t p = 4;
    Rng rng(99);
    Matrix survival(p, p), tiebreak(p, p);
    std::vector<std::uint8_t> truth(p * p, 0);
    const Vector lambdas{4.0, 3.0, 2.0, 1.0};
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j) {
            if (i == j) continue;
            const std::size_t level = rng.uniform_int(5);
            survival(i, j) = level == 0 ? 0.0 : lambdas[level - 1];
            tiebreak(i, j) = survival(i, j) > 0.0 ? 1.0 : 0.0;
            truth[i * p + j] = rng.uniform() < 0.5;
        }
    truth[0 * p + 1] = 1;
    truth[1 * p + 0] = 0;
    const SweepResult a = sweep_from_scores(lambdas, survival, tiebreak, truth, false);

    Vector scaled_lams = lambdas;
    Matrix scaled_survival = survival;
    for (auto& v : scaled_lams) v *= 10.0;
    for (auto& v : scaled_survival.data) v *= 10.0;
    const SweepResult b = sweep_from_scores(scaled_lams, scaled_survival, tiebreak, truth, false);

    CHECK(score_sweep(a).auroc == score_sweep(b).auroc);
    CHECK(score_sweep(a).aupr == score_sweep(b).aupr);
}

TEST_CASE("extra never-selected negatives cannot lower auroc", "[eval]") {
    const std::size_t p = 4;
    Rng rng(17);
    Matrix survival(p, p), tiebreak(p, p);
    std::vector<std::uint8_t> truth(p * p, 0);
    const Vector lambdas{3.0, 2.0, 1.0};
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j) {
            if (i == j) continue;  // diagonal left empty: never selected
            const std::size_t level = rng.uniform_int(4);
            survival(i, j) = level == 0 ? 0.0 : lambdas[level - 1];
            tiebreak(i, j) = survival(i, j) > 0.0 ? 1.0 : 0.0;
            truth[i * p + j] = rng.uniform() < 0.5;
        }
    truth[0 * p + 1] = 1;
    truth[1 * p + 0] = 0;
    for (std::size_t i = 0; i < p; ++i) truth[i * p + i] = 0;

    SweepResult without = sweep_from_scores(lambdas, survival, tiebreak, truth, false);
    SweepResult with = sweep_from_scores(lambdas, survival, tiebreak, truth, true);
    CHECK(score_sweep(with).auroc >= score_sweep(without).auroc - 1e-12);
}

TEST_CASE("degenerate ground truth is rejected", "[eval]") {
    const std::size_t p = 2;
    Matrix survival(p, p), tiebreak(p, p);
    std::vector<std::uint8_t> all_true{1, 1, 1, 1};
    SweepResult sweep = sweep_from_scores({2.0, 1.0}, survival, tiebreak, all_true, false);
    CHECK_THROWS_AS(score_sweep(sweep), std::invalid_argument);
    sweep.ground_truth = GrangerGraph{};
    CHECK_THROWS_AS(score_sweep(sweep), std::invalid_argument);
}

TEST_CASE("lambda_sweep at a huge lambda returns empty graphs", "[eval]") {
    const TimeSeriesPanel panel = testutil::random_panel(3, {40}, 12);
    FitPlan plan;
    plan.family = ModelFamily::Cmlp;
    plan.lag = 1;
    plan.hidden = 2;
    plan.penalty = PenaltyFamily::Group;
    plan.optimizer.max_iters = 150;
    plan.optimizer.seed = 4;
    const double lmax = panel_lambda_max(plan, panel);
    const SweepResult sweep = lambda_sweep(panel, plan, {lmax * 1.01});
    REQUIRE(sweep.per_lambda.size() == 1);
    CHECK(sweep.per_lambda[0].edge_count() == 0);
}

TEST_CASE("sweeps are deterministic and warm starts reduce iterations", "[eval]") {
    // mildly autocorrelated data so the first fit's solution transfers
    TimeSeriesPanel panel;
    panel.names = {"x1", "x2", "x3"};
    {
        Rng rng(21);
        Matrix rep(80, 3);
        Vector prev(3, 0.0);
        for (std::size_t t = 0; t < 80; ++t)
            for (std::size_t j = 0; j < 3; ++j) {
                const double next = 0.6 * prev[j] + 0.25 * prev[(j + 1) % 3] + 0.3 * rng.normal();
                rep(t, j) = next;
                prev[j] = next;
            }
        panel.replicates.push_back(std::move(rep));
    }
    FitPlan plan;
    plan.family = ModelFamily::Cmlp;
    plan.lag = 2;
    plan.hidden = 3;
    plan.penalty = PenaltyFamily::Hier;
    plan.optimizer.max_iters = 30000;
    plan.optimizer.tolerance = 1e-5;
    plan.optimizer.seed = 77;
    const double lmax = panel_lambda_max(plan, panel);

    const Vector grid{lmax * 0.5, lmax * 0.05};
    const SweepResult a = lambda_sweep(panel, plan, grid);
    const SweepResult b = lambda_sweep(panel, plan, grid);
    for (std::size_t li = 0; li < grid.size(); ++li) {
        CHECK(a.per_lambda[li].edge_stats.data == b.per_lambda[li].edge_stats.data);
        CHECK(a.iterations[li] == b.iterations[li]);
    }

    const SweepResult cold = lambda_sweep(panel, plan, {lmax * 0.05});
    std::size_t warm_iters = 0, cold_iters = 0;
    for (std::size_t s = 0; s < 3; ++s) {
        warm_iters += a.iterations[1][s];
        cold_iters += cold.iterations[0][s];
    }
    CHECK(warm_iters < cold_iters);
}
