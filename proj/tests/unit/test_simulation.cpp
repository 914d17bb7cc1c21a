#include <algorithm>
#include <filesystem>
#include <set>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "stimloss/errors.hpp"
#include "stimloss/simulation.hpp"

using namespace stimloss;
using doctest::Approx;

namespace {

const std::filesystem::path kTable1 = std::filesystem::path(STIMLOSS_SOURCE_DIR) / "datasets/table1.json";

ApplicationProfile toy_profile(std::size_t m) { return {"Toy", 10, 0.5, m}; }

const RepeatResult& find(const std::vector<RepeatResult>& rs, const std::string& strategy) {
    return *std::find_if(rs.begin(), rs.end(), [&](const auto& r) { return r.strategy == strategy; });
}

// Bundled dataset at reduced size, shared by the slower cases.
struct SmallRun {
    Dataset dataset = load_dataset_config(kTable1);
    SimulationPlan plan;
    std::vector<ChannelPopulation> pops;
    SmallRun() {
        plan.seed = 42;
        plan.population_size = 20000;
        plan.n_repeats = 100;
        pops = synthesize_all(dataset, plan);
    }
};

const SmallRun& small_run() {
    static const SmallRun run;
    return run;
}

}  // namespace

TEST_CASE("plan validation") {
    SimulationPlan p;
    CHECK_NOTHROW(validate(p));
    p.strategies.clear();
    CHECK_THROWS_AS(validate(p), ValidationError);
    p = {};
    p.strategies.push_back(StrategySpec::fixed());
    CHECK_THROWS_AS(validate(p), ValidationError);
    p = {};
    p.n_repeats = 0;
    CHECK_THROWS_AS(validate(p), ValidationError);
    p = {};
    p.yield = 0.0;
    CHECK_THROWS_AS(validate(p), ValidationError);
    p.yield = 1.01;
    CHECK_THROWS_AS(validate(p), ValidationError);
}

TEST_CASE("five-channel pipeline matches the hand enumeration") {
    // Hand-computed per-channel values with V_fixed = 4.0 V and rails {1, 2, 3, 4}.
    //   fixed   loss uW: 300, 150, 200, 110, 0     eff: .25, .625, .75, .45, 1
    //   global  same as fixed (the 4.0 V channel is in the subset)
    //   stepped rails: 1, 3, 3, 2, 4   loss uW: 0, 50, 0, 10, 0   eff: 1, 5/6, 1, .9, 1
    const auto pop = oracle::toy_population();
    SimulationPlan plan;
    plan.strategies = {StrategySpec::fixed(), StrategySpec::global(), StrategySpec::stepped(4),
                       StrategySpec::ideal()};
    plan.n_repeats = 1;
    plan.yield = 1.0;
    const std::vector<ApplicationProfile> profiles{toy_profile(5)};
    const std::vector<ChannelPopulation> pops{pop};
    const YieldRun run = run_at_yield(pops, profiles, plan, 1.0);
    const auto& app = run.application("Toy");
    CHECK(app.v_fixed == 4.0);
    CHECK(app.achieved_yield == 1.0);

    const auto& rs = app.repeats;
    REQUIRE(rs.size() == 4);
    CHECK(find(rs, "fixed").mean_p_loss == Approx(152e-6).epsilon(1e-12));
    CHECK(find(rs, "fixed").mean_efficiency == Approx(0.615).epsilon(1e-12));
    CHECK(find(rs, "global").mean_p_loss == Approx(152e-6).epsilon(1e-12));
    CHECK(find(rs, "global").supply_used == 4.0);
    CHECK(find(rs, "stepped:4").mean_p_loss == Approx(12e-6).epsilon(1e-12));
    CHECK(find(rs, "stepped:4").mean_efficiency == Approx((3.9 + 5.0 / 6.0) / 5.0).epsilon(1e-12));
    CHECK(find(rs, "ideal").mean_p_loss == 0.0);
    CHECK(find(rs, "ideal").mean_efficiency == 1.0);
    // sum P_load = 1.44e-3 W; fixed losses sum 7.6e-4 W.
    CHECK(find(rs, "fixed").energy_weighted_efficiency == Approx(1.44e-3 / 2.2e-3).epsilon(1e-12));

    const auto& fixed = app.summary("fixed");
    CHECK(fixed.n_repeats == 1);
    CHECK(fixed.iqr_p_loss == 0.0);
    CHECK(fixed.median_p_loss == Approx(152e-6).epsilon(1e-12));

    REQUIRE(run.normalized.size() == 3);
    CHECK(run.normalized[0].strategy == "fixed");
    CHECK(run.normalized[0].loss_ratio == 1.0);
    CHECK(run.normalized[0].efficiency_ratio == 1.0);
    CHECK(run.normalized[2].loss_ratio == Approx(12.0 / 152.0).epsilon(1e-12));
}

TEST_CASE("yield filter and insufficient channels") {
    const auto pop = oracle::toy_population();
    SimulationPlan plan;
    plan.n_repeats = 3;
    // V_fixed 2.5 V leaves three channels (1.0, 2.5, 1.8 V).
    const auto ok = run_subject(pop, toy_profile(3), plan, 2.5);
    for (const auto& r : ok) CHECK(r.supply_used <= 2.5);
    try {
        run_subject(pop, toy_profile(4), plan, 2.5);
        FAIL("expected InsufficientChannels");
    } catch (const InsufficientChannels& e) {
        CHECK(e.subject_id() == "toy");
        CHECK(e.available() == 3);
        CHECK(e.required() == 4);
    }
    SimulationPlan bad = plan;
    bad.strategies = {StrategySpec::stepped_explicit({1.0, 2.0})};
    CHECK_THROWS_AS(run_subject(pop, toy_profile(2), bad, 2.5), ValidationError);
}

TEST_CASE("degenerate subject has no global loss") {
    ChannelPopulation pop{"flat", "Toy", std::vector<ChannelEntry>(50, make_entry(100, 30))};
    SimulationPlan plan;
    plan.n_repeats = 20;
    const auto rs = run_subject(pop, toy_profile(10), plan, 3.0);
    for (const auto& r : rs)
        if (r.strategy == "global") CHECK(r.mean_p_loss == 0.0);
}

TEST_CASE("every strategy sees the same subset and repeats differ") {
    oracle::Gen g(9);
    ChannelPopulation pop{"rand", "Toy", {}};
    for (int k = 0; k < 500; ++k) pop.entries.push_back(g.entry());
    SimulationPlan plan;
    plan.n_repeats = 50;
    plan.seed = 7;
    const auto rs = run_subject(pop, toy_profile(20), plan, 1e9);
    const std::size_t ns = plan.strategies.size();
    std::set<std::uint64_t> hashes;
    for (std::size_t r = 0; r < plan.n_repeats; ++r) {
        for (std::size_t s = 0; s < ns; ++s) {
            REQUIRE(rs[r * ns + s].repeat_index == r);
            REQUIRE(rs[r * ns + s].subset_hash == rs[r * ns].subset_hash);
        }
        hashes.insert(rs[r * ns].subset_hash);
    }
    CHECK(hashes.size() == plan.n_repeats);
}

TEST_CASE("results do not depend on the worker count") {
    oracle::Gen g(10);
    ChannelPopulation pop{"rand", "Toy", {}};
    for (int k = 0; k < 2000; ++k) pop.entries.push_back(g.entry());
    SimulationPlan one;
    one.n_repeats = 200;
    one.seed = 3;
    SimulationPlan four = one;
    four.workers = 4;
    const auto a = run_subject(pop, toy_profile(40), one, 1e9);
    const auto b = run_subject(pop, toy_profile(40), four, 1e9);
    REQUIRE(a.size() == b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        REQUIRE(a[k].mean_p_loss == b[k].mean_p_loss);
        REQUIRE(a[k].mean_efficiency == b[k].mean_efficiency);
        REQUIRE(a[k].subset_hash == b[k].subset_hash);
    }

    const auto& base = small_run();
    SimulationPlan p4 = base.plan;
    p4.workers = 4;
    const auto pops4 = synthesize_all(base.dataset, p4);
    for (std::size_t i = 0; i < pops4.size(); ++i)
        REQUIRE(pops4[i].entries[123].v_load == base.pops[i].entries[123].v_load);
}

TEST_CASE("aggregate and normalize") {
    std::vector<RepeatResult> rs;
    for (int k = 1; k <= 5; ++k) {
        RepeatResult r;
        r.strategy = "fixed";
        r.mean_p_loss = k * 1e-6;
        r.mean_efficiency = 0.1 * k;
        rs.push_back(r);
    }
    const auto s = aggregate(rs, Grouping::Application, "A");
    REQUIRE(s.size() == 1);
    CHECK(s[0].median_p_loss == Approx(3e-6));
    CHECK(s[0].iqr_p_loss == Approx(2e-6));
    CHECK(s[0].n_repeats == 5);
    CHECK_THROWS_AS(aggregate(std::vector<RepeatResult>{}, Grouping::Subject, "x"), InvalidArgument);

    LossSummary global = s[0];
    global.strategy = "global";
    CHECK_THROWS_AS(normalize_to_fixed(std::vector<LossSummary>{global}), ValidationError);
}

TEST_CASE("total system loss") {
    LossSummary s;
    s.median_p_loss = 27.5e-6;
    s.iqr_p_loss = 1e-6;
    const auto t = total_system_loss(s, {"V1", 1000, 0.2, 200});
    CHECK(t.median_w == Approx(5.5e-3));
    CHECK(t.iqr_w == Approx(200e-6));
    s.median_p_loss = 7.03e-6;
    CHECK(total_system_loss(s, {"Retina", 625, 0.2, 125}).median_w == Approx(8.7875e-4));
    s.median_p_loss = 0.0;
    CHECK(total_system_loss(s, {"PNS", 16, 0.2, 4}).median_w == 0.0);
}

TEST_CASE("strategy ordering on the bundled dataset") {
    const auto& base = small_run();
    const auto run = run_at_yield(base.pops, base.dataset.applications, base.plan, 0.75, false);
    REQUIRE(run.applications.size() == 4);
    for (const auto& app : run.applications) {
        CAPTURE(app.profile.application);
        const auto loss = [&](const char* s) { return app.summary(s).median_p_loss; };
        CHECK(loss("ideal") <= loss("stepped:8"));
        CHECK(loss("stepped:8") <= loss("stepped:4"));
        CHECK(loss("stepped:4") <= loss("stepped:2"));
        CHECK(loss("stepped:2") <= loss("fixed"));
        CHECK(loss("global") <= loss("fixed"));
        CHECK(app.summary("ideal").median_efficiency == 1.0);
        CHECK(app.summary("ideal").iqr_p_loss == 0.0);
    }
    const auto& retina = run.application("Retina");
    CHECK(retina.excluded_subjects.size() == 1);
    CHECK(retina.summary("global").median_p_loss < retina.summary("fixed").median_p_loss);

    SimulationPlan strict = base.plan;
    strict.strict = true;
    CHECK_THROWS_AS(run_at_yield(base.pops, base.dataset.applications, strict, 0.75), InsufficientChannels);

    SimulationPlan no_fixed = base.plan;
    no_fixed.strategies = {StrategySpec::global(), StrategySpec::ideal()};
    const auto nf = run_at_yield(base.pops, base.dataset.applications, no_fixed, 0.75, false);
    CHECK(nf.normalized.empty());
    CHECK_FALSE(nf.warnings.empty());
}

TEST_CASE("yield sweep") {
    const auto& base = small_run();
    const std::vector<double> yields{0.75, 0.85, 1.0};
    const auto sweep = yield_sweep(base.pops, base.dataset.applications, base.plan, yields);
    const auto at75 = run_at_yield(base.pops, base.dataset.applications, base.plan, 0.75);
    REQUIRE(sweep.size() == 3);
    for (std::size_t a = 0; a < at75.applications.size(); ++a) {
        const auto& x = sweep[0].applications[a];
        const auto& y = at75.applications[a];
        CHECK(x.v_fixed == y.v_fixed);
        CHECK(x.summaries[0].median_p_loss == y.summaries[0].median_p_loss);
        CHECK(x.repeats.empty());
        CHECK(sweep[1].applications[a].v_fixed >= x.v_fixed);
        CHECK(sweep[2].applications[a].v_fixed >= sweep[1].applications[a].v_fixed);
        CHECK(sweep[2].applications[a].achieved_yield == 1.0);
        CHECK(sweep[2].applications[a].summary("fixed").median_efficiency <=
              x.summary("fixed").median_efficiency);
    }
    CHECK_THROWS_AS(yield_sweep(base.pops, base.dataset.applications, base.plan, std::vector<double>{}),
                    ValidationError);
}
