#include <doctest.h>

#include <sstream>

#include "peakprob/errors.hpp"
#include "peakprob/model_io.hpp"
#include "support/test_support.hpp"

using namespace peakprob;

TEST_CASE("matrix round-trip with dimension header") {
    const Eigen::MatrixXd m = ppt::random_spd(5, 1);
    std::stringstream buf;
    write_matrix(buf, "cov", m);
    const Eigen::MatrixXd back = read_matrix(buf, "cov");
    CHECK(back == m);

    std::stringstream bad("matrix other 2 2\n1 0\n0 1\n");
    CHECK_THROWS_AS(read_matrix(bad, "cov"), DataError);
}

TEST_CASE("marginal round-trip preserves cdf and quantile exactly") {
    const auto sample = ppt::sample_gpd(600, 0.2, 2.0, 42);
    const auto m = fit_marginal(sample, {0.15, 30});
    std::stringstream buf;
    write_marginal(buf, m);
    const auto back = read_marginal(buf);

    CHECK(back.sample_size() == m.sample_size());
    CHECK(back.upper().xi == m.upper().xi);
    CHECK(back.lower().beta == m.lower().beta);
    RngStream rng(3);
    for (int i = 0; i < 200; ++i) {
        const double x = 20.0 * rng.uniform() - 2.0;
        CHECK(back.cdf(x) == m.cdf(x));
        const double p = rng.uniform();
        CHECK(back.quantile(p) == m.quantile(p));
    }
}

TEST_CASE("dependence model round-trip with layout") {
    const Eigen::MatrixXd z = ppt::sample_mvn(ppt::random_spd(6, 2), 200, 7);
    GlassoOptions opt;
    opt.lambda = 0.05;
    auto model = glasso_fit(empirical_covariance(z), opt);
    BlockLayout layout;
    layout.zones["A"] = {0, 3};
    layout.zones["B"] = {3, 3};
    model.layout = layout;

    std::stringstream buf;
    write_dependence(buf, model);
    const auto back = read_dependence(buf);
    CHECK(back.precision == model.precision);
    CHECK(back.covariance == model.covariance);
    CHECK(back.lambda == model.lambda);
    REQUIRE(back.layout.has_value());
    CHECK(back.layout->zones.at("A").len == 3);
    CHECK(back.layout->zones.at("B").start == 3);
}

TEST_CASE("engine round-trip reproduces simulations bit-exactly") {
    RngStream rng(11);
    Eigen::MatrixXd dev(120, 5);
    for (int i = 0; i < 120; ++i) {
        for (int j = 0; j < 5; ++j) dev(i, j) = 25.0 * rng.normal() + 3.0 * j;
    }
    DayMatrix m;
    m.values = dev;
    m.first_hour = 19;
    for (int i = 0; i < 120; ++i) m.days.push_back(make_date(2022, 6, 1) + std::chrono::days{i});
    EngineConfig config;
    const auto engine = fit_unconditional(m, config, make_date(2023, 6, 1), "Z", "17");

    std::stringstream buf;
    write_engine(buf, engine);
    const auto back = read_engine(buf);
    CHECK(back.cutoff == engine.cutoff);
    CHECK(back.first_hour == engine.first_hour);
    CHECK(back.zone_id == "Z");
    CHECK(back.vintage_label == "17");

    Eigen::VectorXd fc = Eigen::VectorXd::Constant(5, 800.0);
    const auto a = simulate_unconditional(engine, engine.cutoff, fc, 300, 5);
    const auto b = simulate_unconditional(back, back.cutoff, fc, 300, 5);
    CHECK(a.paths == b.paths);

    std::stringstream garbage("not an engine\n");
    CHECK_THROWS_AS(read_engine(garbage), DataError);
}

TEST_CASE("conditional engine round-trip") {
    RngStream rng(13);
    const int n = 150;
    Eigen::MatrixXd z1(n, 24), z2(n, 24), dev(n, 24);
    for (int i = 0; i < n; ++i) {
        for (int h = 0; h < 24; ++h) {
            z1(i, h) = ppt::daily_shape(h) + 80.0 * rng.normal();
            z2(i, h) = 0.6 * z1(i, h) + 30.0 * rng.normal();
            dev(i, h) = 20.0 * rng.normal();
        }
    }
    auto mk = [&](const Eigen::MatrixXd& v) {
        DayMatrix m;
        m.values = v;
        m.first_hour = 0;
        for (int i = 0; i < n; ++i) m.days.push_back(make_date(2022, 6, 1) + std::chrono::days{i});
        return m;
    };
    const auto engine = fit_conditional(mk(z1), mk(z2), mk(dev), EngineConfig{},
                                        make_date(2023, 6, 1), "P", "C", "23");
    std::stringstream buf;
    write_engine(buf, engine);
    const auto back = read_engine(buf);
    REQUIRE(back.is_conditional());
    CHECK(back.cond->zone1_id == "P");
    CHECK(back.cond->joint.covariance == engine.cond->joint.covariance);

    Eigen::VectorXd fc(24);
    for (int h = 0; h < 24; ++h) fc[h] = ppt::daily_shape(h);
    const auto a = simulate_conditional(engine, engine.cutoff, fc, 100, 9);
    const auto b = simulate_conditional(back, back.cutoff, fc, 100, 9);
    CHECK(a.paths == b.paths);
}

TEST_CASE("batch CSV and binary dumps") {
    ScenarioBatch batch;
    batch.zone_id = "Z";
    batch.day = make_date(2023, 7, 27);
    batch.first_hour = 12;
    batch.seed = 77;
    batch.paths.resize(2, 3);
    batch.paths << 1.5, 2.5, 3.5, 4.25, 5.25, 6.25;

    std::ostringstream csv;
    write_batch_csv(csv, batch);
    CHECK(csv.str() ==
          "scenario_id,hour,mw\n0,12,1.5\n0,13,2.5\n0,14,3.5\n1,12,4.25\n1,13,5.25\n1,14,"
          "6.25\n");

    std::stringstream bin(std::ios::in | std::ios::out | std::ios::binary);
    write_batch_binary(bin, batch);
    const auto back = read_batch_binary(bin);
    CHECK(back.paths == batch.paths);
    CHECK(back.day == batch.day);
    CHECK(back.first_hour == 12);
    CHECK(back.zone_id == "Z");
}
