#include "fairsynth/sem.hpp"

#include <cmath>

#include "doctest.h"
#include "oracles.hpp"

using namespace fairsynth;

namespace {

SemSpec chain_sem(double slope, double sigma) {
    // A -> Y, both continuous: Y = slope * A + noise(sigma)
    CausalDag dag({{"A", ColumnKind::Continuous}, {"Y", ColumnKind::Continuous}},
                  {{"A", "Y"}});
    std::map<std::string, Mechanism> mechanisms;
    mechanisms["A"] = {Mechanism::Type::Linear, {}, 0.0, 1.0};
    mechanisms["Y"] = {Mechanism::Type::Linear, {{"A", slope}}, 0.0, sigma};
    return SemSpec(std::move(dag), std::move(mechanisms));
}

}  // namespace

TEST_CASE("sem validation") {
    CausalDag dag({{"A", ColumnKind::Continuous}, {"Y", ColumnKind::Binary}}, {{"A", "Y"}});
    std::map<std::string, Mechanism> ok;
    ok["A"] = {Mechanism::Type::Linear, {}, 0.0, 1.0};
    ok["Y"] = {Mechanism::Type::Logistic, {{"A", 1.0}}, 0.0, 1.0};
    CHECK_NOTHROW(SemSpec(dag, ok));

    auto bad_sigma = ok;
    bad_sigma["A"].sigma = 0.0;
    CHECK_THROWS_AS(SemSpec(dag, bad_sigma), ValidationError);

    auto wrong_parents = ok;
    wrong_parents["Y"].weights = {{"missing", 1.0}};
    CHECK_THROWS_AS(SemSpec(dag, wrong_parents), ValidationError);

    auto wrong_type = ok;
    wrong_type["Y"].type = Mechanism::Type::Linear;
    CHECK_THROWS_AS(SemSpec(dag, wrong_type), ValidationError);
}

TEST_CASE("sampling: standard-normal root mean") {
    CausalDag dag({{"X", ColumnKind::Continuous}}, {});
    std::map<std::string, Mechanism> mechanisms;
    mechanisms["X"] = {Mechanism::Type::Linear, {}, 0.0, 1.0};
    const SemSpec sem(std::move(dag), std::move(mechanisms));
    const Table t = sem_sample(sem, 100000, 11);
    CHECK(std::abs(column_mean(t, 0)) < 0.02);
    CHECK(column_stddev(t, 0) == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("sampling: regression slope recovers the mechanism weight") {
    const SemSpec sem = chain_sem(2.0, 0.1);
    const Table t = sem_sample(sem, 50000, 5);
    const double slope =
        testing::regression_slope(t.column("A"), t.column("Y"));
    CHECK(slope == doctest::Approx(2.0).epsilon(0.025));
}

TEST_CASE("sampling: logistic root with zero intercept is balanced") {
    CausalDag dag({{"B", ColumnKind::Binary}}, {});
    std::map<std::string, Mechanism> mechanisms;
    mechanisms["B"] = {Mechanism::Type::Logistic, {}, 0.0, 1.0};
    const SemSpec sem(std::move(dag), std::move(mechanisms));
    const Table t = sem_sample(sem, 100000, 3);
    CHECK(column_mean(t, 0) == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("sampling is deterministic under seed") {
    const SemSpec sem = chain_sem(1.5, 0.7);
    CHECK(sem_sample(sem, 500, 42) == sem_sample(sem, 500, 42));
    CHECK_FALSE(sem_sample(sem, 500, 42) == sem_sample(sem, 500, 43));
}

TEST_CASE("bias injection flips positives of the disadvantaged group only") {
    CausalDag dag({{"A", ColumnKind::Binary}, {"Y", ColumnKind::Binary}}, {});
    std::map<std::string, Mechanism> mechanisms;
    mechanisms["A"] = {Mechanism::Type::Logistic, {}, 0.0, 1.0};
    mechanisms["Y"] = {Mechanism::Type::Logistic, {}, 0.7, 1.0};
    const SemSpec sem(std::move(dag), std::move(mechanisms));
    const Table t = sem_sample(sem, 40000, 17);

    SUBCASE("beta = 0 leaves the table unchanged") {
        CHECK(inject_direct_bias(t, "A", "Y", 0.0, 0.0, 1) == t);
    }
    SUBCASE("beta = 1 clears all disadvantaged positives") {
        const Table biased = inject_direct_bias(t, "A", "Y", 0.0, 1.0, 1);
        for (std::size_t r = 0; r < biased.rows(); ++r) {
            if (biased.at(r, 0) == 0.0) CHECK(biased.at(r, 1) == 0.0);
        }
    }
    SUBCASE("beta = 0.5 flips a binomial share; advantaged rows untouched") {
        const Table biased = inject_direct_bias(t, "A", "Y", 0.0, 0.5, 1);
        long flipped = 0, disadvantaged_pos = 0;
        for (std::size_t r = 0; r < t.rows(); ++r) {
            if (t.at(r, 0) == 0.0 && t.at(r, 1) == 1.0) {
                ++disadvantaged_pos;
                if (biased.at(r, 1) == 0.0) ++flipped;
            } else {
                CHECK(biased.at(r, 1) == t.at(r, 1));
            }
            CHECK(biased.at(r, 0) == t.at(r, 0));
        }
        // 3-sigma binomial band around beta * count
        const double expect = 0.5 * disadvantaged_pos;
        const double band = 3.0 * std::sqrt(disadvantaged_pos * 0.25);
        CHECK(std::abs(flipped - expect) < band);
    }
    SUBCASE("non-binary target rejected") {
        Table cont({{"A", ColumnKind::Binary}, {"Y", ColumnKind::Continuous}},
                   {0, 0.5, 1, 0.7});
        CHECK_THROWS_AS(inject_direct_bias(cont, "A", "Y", 0.0, 0.5, 1), ValidationError);
    }
}

TEST_CASE("interventional sampling: empty removal equals plain sampling") {
    const SemSpec sem = chain_sem(2.0, 0.5);
    CHECK(interventional_sample(sem, {}, {}, 300, 9) == sem_sample(sem, 300, 9));
}

TEST_CASE("interventional sampling: fixed surrogate gives the closed-form marginal") {
    // Y = 2A + e(0.1); replacing A's influence with 0 leaves Y = e(0.1).
    const SemSpec sem = chain_sem(2.0, 0.1);
    EdgeRemovalSet removal;
    removal.add("A", "Y", "test");
    const SurrogatePolicy policy = SurrogatePolicy::fixed_for(removal, 0.0);
    const Table t = interventional_sample(sem, removal, policy, 50000, 23);
    CHECK(std::abs(column_mean(t, t.column_index("Y"))) < 0.005);
    CHECK(column_stddev(t, t.column_index("Y")) == doctest::Approx(0.1).epsilon(0.03));
    // The sampled A itself is left untouched.
    CHECK(column_stddev(t, t.column_index("A")) == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("interventional sampling: marginal surrogate breaks the correlation") {
    const SemSpec sem = chain_sem(2.0, 0.5);
    EdgeRemovalSet removal;
    removal.add("A", "Y", "test");
    const SurrogatePolicy policy = SurrogatePolicy::marginal_for(removal);
    const Table t = interventional_sample(sem, removal, policy, 100000, 31);
    CHECK(std::abs(column_correlation(t, t.column_index("A"), t.column_index("Y"))) < 0.02);
    // Y keeps its marginal spread: Var(2A' + e) = 4 + 0.25
    CHECK(column_stddev(t, t.column_index("Y")) ==
          doctest::Approx(std::sqrt(4.25)).epsilon(0.03));
}

TEST_CASE("interventional sampling validates inputs") {
    const SemSpec sem = chain_sem(1.0, 1.0);
    EdgeRemovalSet bogus;
    bogus.add("Y", "A", "test");
    CHECK_THROWS_AS(interventional_sample(sem, bogus, SurrogatePolicy{}, 10, 1),
                    ValidationError);
    EdgeRemovalSet removal;
    removal.add("A", "Y", "test");
    CHECK_THROWS_WITH_AS(interventional_sample(sem, removal, SurrogatePolicy{}, 10, 1),
                         doctest::Contains("misses entry"), ValidationError);
}

TEST_CASE("markov boundary matches a conditional-independence oracle on samples") {
    // 6-node linear-Gaussian SEM; check boundary(Y) via partial correlations.
    CausalDag dag({{"A", ColumnKind::Continuous},
                   {"B", ColumnKind::Continuous},
                   {"Y", ColumnKind::Continuous},
                   {"C", ColumnKind::Continuous},
                   {"S", ColumnKind::Continuous},
                   {"D", ColumnKind::Continuous}},
                  {{"A", "B"}, {"B", "Y"}, {"Y", "C"}, {"S", "C"}, {"C", "D"}});
    std::map<std::string, Mechanism> mechanisms;
    mechanisms["A"] = {Mechanism::Type::Linear, {}, 0.0, 1.0};
    mechanisms["B"] = {Mechanism::Type::Linear, {{"A", 1.2}}, 0.0, 0.8};
    mechanisms["Y"] = {Mechanism::Type::Linear, {{"B", 0.9}}, 0.0, 0.7};
    mechanisms["C"] = {Mechanism::Type::Linear, {{"Y", 1.1}, {"S", 0.8}}, 0.0, 0.6};
    mechanisms["S"] = {Mechanism::Type::Linear, {}, 0.0, 1.0};
    mechanisms["D"] = {Mechanism::Type::Linear, {{"C", 1.0}}, 0.0, 0.9};
    const SemSpec sem(dag, mechanisms);

    const auto boundary = markov_boundary(dag, "Y");
    CHECK(boundary == std::set<std::string>{"B", "C", "S"});

    const Table t = sem_sample(sem, 50000, 77);
    // Outside the boundary: independent of Y given the boundary.
    for (const auto& other : {"A", "D"}) {
        CHECK(std::abs(testing::partial_correlation(t, "Y", other, boundary)) < 0.02);
    }
    // Minimality: every boundary member stays dependent when the rest condition.
    for (const auto& member : boundary) {
        auto rest = boundary;
        rest.erase(member);
        CHECK(std::abs(testing::partial_correlation(t, "Y", member, rest)) > 0.05);
    }
}

TEST_CASE("sem json round trip") {
    const SemSpec sem = chain_sem(2.0, 0.3);
    const SemSpec back = SemSpec::from_json(sem.to_json());
    CHECK(back.dag == sem.dag);
    CHECK(back.mechanisms.at("Y").weights.at("A") == 2.0);
    CHECK(sem_sample(back, 100, 4) == sem_sample(sem, 100, 4));
}
