#include "doctest.h"

#include <algorithm>
#include <numeric>
#include <random>

#include "are/metrics.hpp"
#include "support/naive_oracle.hpp"

using namespace are;

namespace {

std::vector<double> one_to(std::size_t n) {
    std::vector<double> v(n);
    std::iota(v.begin(), v.end(), 1.0);
    return v;
}

}  // namespace

TEST_CASE("PML and TVAR on 1..1000 at 100 years") {
    auto v = one_to(1000);
    std::shuffle(v.begin(), v.end(), std::mt19937_64(3));
    CHECK(quantile_rank(1000, 100.0) == 990);
    CHECK(pml(v, 100.0) == 990.0);
    CHECK(tvar(v, 100.0) == doctest::Approx(995.0).epsilon(1e-12));
}

TEST_CASE("constant losses give constant metrics") {
    const std::vector<double> v(500, 7.25);
    for (const double rp : {2.0, 10.0, 250.0, 500.0}) {
        CHECK(pml(v, rp) == 7.25);
        CHECK(tvar(v, rp) == 7.25);
    }
}

TEST_CASE("EP curve on 1..1000") {
    const YearLossTable ylt{"L", one_to(1000)};
    const std::vector<double> rps{2.0, 10.0, 100.0};
    const auto curve = ep_curve(ylt, rps);
    REQUIRE(curve.points.size() == 3);
    CHECK(curve.points[0].loss == 500.0);
    CHECK(curve.points[1].loss == 900.0);
    CHECK(curve.points[2].loss == 990.0);
    CHECK(curve.points[0].exceedance_probability == doctest::Approx(0.5));
    CHECK(curve.points[1].exceedance_probability == doctest::Approx(0.1));
    CHECK(curve.points[2].exceedance_probability == doctest::Approx(0.01));
}

TEST_CASE("EP curve sorts and deduplicates return periods") {
    const auto v = one_to(100);
    const std::vector<double> rps{100.0, 2.0, 10.0, 2.0};
    const auto curve = ep_curve(v, rps);
    REQUIRE(curve.points.size() == 3);
    CHECK(curve.points.front().loss == 50.0);
    CHECK(curve.points.back().loss == 99.0);
}

TEST_CASE("portfolio rollup") {
    const std::vector<YearLossTable> two{{"A", {1, 2}}, {"B", {3, 4}}};
    const auto sum = portfolio_rollup(two);
    CHECK(sum.losses == std::vector<double>{4, 6});
    CHECK(sum.layer_id == "portfolio");

    const std::vector<YearLossTable> one{{"A", {1, 2}}};
    CHECK(portfolio_rollup(one) == one[0]);

    const std::vector<YearLossTable> mismatch{{"A", {1, 2}}, {"B", {3}}};
    CHECK_THROWS_AS(portfolio_rollup(mismatch), MetricsError);
    CHECK_THROWS_AS(portfolio_rollup(std::span<const YearLossTable>{}), MetricsError);
}

TEST_CASE("return periods outside (1, N] are rejected") {
    const auto v = one_to(10);
    CHECK_THROWS_AS(pml(v, 1.0), MetricsError);
    CHECK_THROWS_AS(pml(v, 0.5), MetricsError);
    CHECK_THROWS_AS(tvar(v, 11.0), MetricsError);
    CHECK_THROWS_AS(pml(std::span<const double>{}, 2.0), MetricsError);
    CHECK(pml(v, 10.0) == 9.0);
}

TEST_CASE("selection matches a full sort on random YLTs") {
    std::mt19937_64 rng(8);
    const std::vector<double> rps{2, 5, 10, 25, 50, 100, 250};
    for (int round = 0; round < 300; ++round) {
        const auto n = std::uniform_int_distribution<std::size_t>(250, 3000)(rng);
        std::vector<double> v(n);
        for (auto& x : v) {
            x = std::bernoulli_distribution(0.3)(rng) ? 0.0 : std::lognormal_distribution<double>(0.0, 2.0)(rng);
        }
        const auto tm = tail_metrics(v, rps);
        REQUIRE(tm.size() == rps.size());
        for (std::size_t i = 0; i < rps.size(); ++i) {
            const auto k = oracle::integer_rank(n, static_cast<std::size_t>(rps[i]));
            CHECK(quantile_rank(n, rps[i]) == k);
            CHECK(tm[i].pml == oracle::sorted_quantile(v, k));
            CHECK(tm[i].tvar == doctest::Approx(oracle::sorted_tail_mean(v, k)).epsilon(1e-12));
            CHECK(tm[i].tvar >= tm[i].pml);
            if (i > 0) {
                CHECK(tm[i].pml >= tm[i - 1].pml);
                CHECK(tm[i].tvar >= tm[i - 1].tvar);
            }
            CHECK(pml(v, rps[i]) == tm[i].pml);
            CHECK(tvar(v, rps[i]) == tm[i].tvar);
        }
    }
}

TEST_CASE("non-integral return periods snap near integers") {
    // 1 - 1/(1000/999) = 0.001 exactly in reals; floating error must not bump k.
    CHECK(quantile_rank(1000, 1000.0 / 999.0) == 1);
    CHECK(quantile_rank(1000, 1.5) == 334);
}
