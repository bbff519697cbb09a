#include "mome/core.hpp"
#include "mome/domains.hpp"
#include "mome/errors.hpp"
#include "mome/random.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

using namespace mome;

namespace {

auto multi_problem() -> ProblemDefinition
{
    RastriginConfig cfg;
    cfg.variant = RastriginVariant::Multi;
    return make_rastrigin_problem(cfg);
}

auto random_batch(const ProblemDefinition& p, std::size_t n, std::uint64_t seed) -> std::vector<Genotype>
{
    RandomStream rng(seed);
    std::vector<Genotype> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(random_genotype(p, rng));
    return out;
}

} // namespace

TEST_CASE("evaluate_batch at the first optimum")
{
    const auto problem = multi_problem();
    IdCounter ids;
    const std::vector<Genotype> batch{Genotype(std::vector<double>(100, 0.0))};
    const auto out = evaluate_batch(problem, batch, ids);
    REQUIRE(out.size() == 1);
    CHECK(out[0].fitness[0] == doctest::Approx(1000.0));
    CHECK(out[0].descriptor == DescriptorVector{0.0, 0.0});
    CHECK(out[0].id == 0);
}

TEST_CASE("evaluate_batch edge cases")
{
    const auto problem = multi_problem();
    IdCounter ids(7);

    SUBCASE("empty batch")
    {
        CHECK(evaluate_batch(problem, {}, ids).empty());
        CHECK(ids.peek() == 7);
    }
    SUBCASE("identical genotypes get distinct ids")
    {
        const auto g = random_batch(problem, 1, 3).front();
        const std::vector<Genotype> batch{g, g};
        const auto out = evaluate_batch(problem, batch, ids);
        CHECK(out[0].fitness == out[1].fitness);
        CHECK(out[0].descriptor == out[1].descriptor);
        CHECK(out[0].id == 7);
        CHECK(out[1].id == 8);
    }
    SUBCASE("dimension mismatch names the index")
    {
        auto batch = random_batch(problem, 4, 1);
        batch[2] = Genotype(std::vector<double>(99, 0.0));
        try {
            (void)evaluate_batch(problem, batch, ids);
            FAIL("expected InvalidArgument");
        } catch (const InvalidArgument& e) {
            CHECK(std::string(e.what()).find("genotype 2") != std::string::npos);
        }
    }
    SUBCASE("non-finite objective is rejected")
    {
        auto p = problem;
        p.evaluate = [](const Genotype&) {
            return Evaluation{FitnessVector{std::numeric_limits<double>::quiet_NaN(), 0.0}, DescriptorVector{0.0, 0.0}};
        };
        const auto batch = random_batch(p, 1, 1);
        CHECK_THROWS_AS((void)evaluate_batch(p, batch, ids), InvalidArgument);
    }
}

TEST_CASE("evaluate_batch is deterministic, order preserving and thread independent")
{
    const auto problem = multi_problem();
    const auto batch = random_batch(problem, 101, 42);

    IdCounter ids1;
    const auto serial = evaluate_batch(problem, batch, ids1);
    for (const unsigned threads : {2U, 3U, 8U}) {
        IdCounter ids2;
        const auto parallel = evaluate_batch(problem, batch, ids2, EvaluationOptions{threads});
        REQUIRE(parallel.size() == serial.size());
        for (std::size_t i = 0; i < serial.size(); ++i) {
            CHECK(parallel[i].id == serial[i].id);
            CHECK(parallel[i].fitness == serial[i].fitness);
            CHECK(parallel[i].descriptor == serial[i].descriptor);
        }
    }

    // Permuted batch, un-permuted results.
    std::vector<std::size_t> perm(batch.size());
    std::iota(perm.begin(), perm.end(), 0);
    RandomStream rng(5);
    std::shuffle(perm.begin(), perm.end(), rng.engine());
    std::vector<Genotype> shuffled;
    for (const auto i : perm) shuffled.push_back(batch[i]);
    IdCounter ids3;
    const auto out = evaluate_batch(problem, shuffled, ids3);
    for (std::size_t k = 0; k < perm.size(); ++k) {
        CHECK(out[k].fitness == serial[perm[k]].fitness);
        CHECK(out[k].descriptor == serial[perm[k]].descriptor);
    }
}

TEST_CASE("random genotypes respect the box")
{
    const auto problem = multi_problem();
    RandomStream rng(9);
    for (int i = 0; i < 50; ++i) {
        const auto g = random_genotype(problem, rng);
        REQUIRE(g.size() == problem.search_dim);
        for (std::size_t k = 0; k < g.size(); ++k) CHECK(problem.genotype_bounds[k].contains(g[k]));
    }
}

TEST_CASE("random streams")
{
    SUBCASE("named streams differ and are reproducible")
    {
        auto a = RandomStream::named(1, "init");
        auto b = RandomStream::named(1, "selection");
        auto a2 = RandomStream::named(1, "init");
        const auto x = a.engine()();
        CHECK(x != b.engine()());
        CHECK(x == a2.engine()());
    }
    SUBCASE("substreams do not depend on draws from the parent")
    {
        RandomStream s(11);
        const auto before = s.substream(3);
        (void)s.uniform();
        (void)s.uniform();
        const auto after = s.substream(3);
        auto x = before;
        auto y = after;
        CHECK(x.engine()() == y.engine()());
        std::set<std::uint64_t> firsts;
        for (std::uint64_t i = 0; i < 100; ++i) firsts.insert(s.substream(i).engine()());
        CHECK(firsts.size() == 100);
    }
    SUBCASE("uniform lies in [0, 1)")
    {
        RandomStream s(2);
        for (int i = 0; i < 10000; ++i) {
            const auto u = s.uniform();
            REQUIRE(u >= 0.0);
            REQUIRE(u < 1.0);
        }
    }
}
