#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "instrecon/losses.hpp"
#include "support/toy.hpp"

using namespace instrecon;

namespace {

SampleSet instance_gt(std::vector<std::uint8_t> h, std::vector<std::uint8_t> o)
{
    SampleSet s;
    s.points.assign(h.size(), Vec3::Zero());
    s.occ_union.resize(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) s.occ_union[i] = std::max(h[i], o[i]);
    s.occ_human = std::move(h);
    s.occ_object = std::move(o);
    s.source = SampleSource::SyntheticInstance;
    return s;
}

SampleSet union_gt(std::vector<std::uint8_t> u)
{
    SampleSet s;
    s.points.assign(u.size(), Vec3::Zero());
    s.occ_union = std::move(u);
    s.source = SampleSource::RealUnion;
    return s;
}

}  // namespace

TEST_CASE("instance loss hand values")
{
    const std::vector<Occupancy> pred{{0.5, 0.5}};
    const LossTerm t = loss_instance(pred, instance_gt({1}, {0}));
    CHECK(t.value == 0.5);
    CHECK(t.grad[0].human == -1.0);
    CHECK(t.grad[0].object == 1.0);
    const std::vector<Occupancy> perfect{{1, 0}, {0, 1}};
    CHECK(loss_instance(perfect, instance_gt({1, 0}, {0, 1})).value == 0.0);
}

TEST_CASE("object-only samples supervise only the object channel")
{
    SampleSet s = instance_gt({1}, {0});
    s.occ_human.clear();
    s.source = SampleSource::SyntheticObjectOnly;
    const std::vector<Occupancy> pred{{0.2, 0.5}};
    const LossTerm t = loss_instance(pred, s);
    CHECK(t.value == 0.25);
    CHECK(t.grad[0].human == 0.0);
    CHECK(t.grad[0].object == 1.0);
}

TEST_CASE("union loss hand values and tie split")
{
    const LossTerm a = loss_union(std::vector<Occupancy>{{0.9, 0.2}}, union_gt({1}));
    CHECK(a.value == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(a.grad[0].human == doctest::Approx(-0.2).epsilon(1e-12));
    CHECK(a.grad[0].object == 0.0);
    const LossTerm b = loss_union(std::vector<Occupancy>{{0.3, 0.3}}, union_gt({0}));
    CHECK(b.value == doctest::Approx(0.09).epsilon(1e-12));
    CHECK(b.grad[0].human == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(b.grad[0].object == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(loss_union(std::vector<Occupancy>{{0.1, 1.0}}, union_gt({1})).value == 0.0);
}

TEST_CASE("intersection loss hand values")
{
    double dh = 0, d_o = 0;
    CHECK(intersection_term(0.7, 0.8, 1.0, &dh, &d_o) == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(d_o == 0.0);
    CHECK(dh == 1.0);
    CHECK(intersection_term(0.7, 0.8, 0.0, &dh, &d_o) == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(dh == 0.0);
    CHECK(d_o == 1.0);
    for (double g : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        CHECK(intersection_term(0.4, 0.9, g, &dh, &d_o) == 0.0);
        CHECK(dh == 0.0);
        CHECK(d_o == 0.0);
        CHECK(intersection_term(0.5, 0.9, g, &dh, &d_o) == 0.0);
        CHECK(intersection_term(0.9, 0.5, g, &dh, &d_o) == 0.0);
    }
    const LossTerm t = loss_intersection(std::vector<Occupancy>{{0.7, 0.8}, {0.1, 0.9}}, {1.0, 1, 1, 1});
    CHECK(t.value == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(t.grad[0].human == 0.5);
}

TEST_CASE("intersection loss vanishes exactly when nothing co-occupies")
{
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0, 1);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<Occupancy> pred(50);
        bool any = false;
        for (auto& p : pred) {
            p = {u(rng), u(rng)};
            if (trial % 2 == 0 && p.human > 0.5) p.object = 0.5 * u(rng);
            any = any || (p.human > 0.5 && p.object > 0.5);
        }
        const double g = 0.25 * (trial % 5);
        CHECK((loss_intersection(pred, {g, 1, 1, 1}).value > 0.0) == any);
    }
}

TEST_CASE("every loss is non-negative and matches central differences in s")
{
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(0, 1);
    const double h = 1e-5;
    const double exclude = 1e-3;
    for (double gamma : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        double worst = 0.0;
        int checked = 0;
        while (checked < 1000) {
            const double sh = u(rng), so = u(rng);
            const bool near_hinge = std::abs(sh - 0.5) < exclude + h || std::abs(so - 0.5) < exclude + h;
            const bool near_tie = std::abs(sh - so) < exclude + 2 * h;
            if (near_hinge || near_tie) continue;
            const std::uint8_t gh = u(rng) < 0.5, go = u(rng) < 0.5;
            auto all = [&](double a, double b) {
                const std::vector<Occupancy> p{{a, b}};
                return loss_instance(p, instance_gt({gh}, {go})).value + loss_union(p, union_gt({std::max(gh, go)})).value +
                       loss_intersection(p, {gamma, 1, 1, 1}).value;
            };
            const std::vector<Occupancy> p{{sh, so}};
            const LossTerm li = loss_instance(p, instance_gt({gh}, {go}));
            const LossTerm lu = loss_union(p, union_gt({std::max(gh, go)}));
            const LossTerm lin = loss_intersection(p, {gamma, 1, 1, 1});
            CHECK(li.value >= 0.0);
            CHECK(lu.value >= 0.0);
            CHECK(lin.value >= 0.0);
            const double ah = li.grad[0].human + lu.grad[0].human + lin.grad[0].human;
            const double ao = li.grad[0].object + lu.grad[0].object + lin.grad[0].object;
            const double fh = (all(sh + h, so) - all(sh - h, so)) / (2 * h);
            const double fo = (all(sh, so + h) - all(sh, so - h)) / (2 * h);
            worst = std::max({worst, std::abs(ah - fh) / std::max({std::abs(ah), std::abs(fh), 1e-6}),
                              std::abs(ao - fo) / std::max({std::abs(ao), std::abs(fo), 1e-6})});
            ++checked;
        }
        INFO("gamma " << gamma);
        CHECK(worst <= 1e-4);
    }
}

TEST_CASE("intersection loss is monotone in gamma when the object leads")
{
    for (double sh = 0.55; sh < 1.0; sh += 0.05)
        for (double so = sh + 0.02; so <= 1.0; so += 0.05) {
            double prev = INFINITY;
            for (int k = 0; k <= 20; ++k) {
                const double v = intersection_term(sh, so, k / 20.0, nullptr, nullptr);
                CHECK(v <= prev);
                prev = v;
            }
        }
}

TEST_CASE("routing by sample source")
{
    const std::vector<Occupancy> pred{{0.7, 0.8}, {0.2, 0.3}};
    const LossConfig cfg{1.0, 1, 1, 1};
    const LossReport syn = loss_total(pred, instance_gt({1, 0}, {0, 0}), cfg);
    CHECK(syn.l_u == 0.0);
    CHECK(syn.l_in == 0.0);
    CHECK(syn.l_i > 0.0);
    const LossReport real = loss_total(pred, union_gt({1, 0}), cfg);
    CHECK(real.l_i == 0.0);
    CHECK(real.l_u > 0.0);
    CHECK(real.l_in > 0.0);
    CHECK(real.fed_u == std::vector<SampleSource>{SampleSource::RealUnion});
    CHECK(real.fed_i.empty());

    const std::vector<Occupancy> perfect{{1.0, 0.0}, {0.0, 0.0}};
    CHECK(loss_total(perfect, union_gt({1, 0}), cfg).l_total == 0.0);
    CHECK(loss_total(perfect, instance_gt({1, 0}, {0, 0}), cfg).l_total == 0.0);

    const LossConfig weighted{0.5, 2.0, 3.0, 5.0};
    const LossReport w = loss_total(pred, union_gt({1, 0}), weighted);
    CHECK(w.l_total == doctest::Approx(3.0 * w.l_u + 5.0 * w.l_in).epsilon(1e-15));
}

TEST_CASE("loss config validation")
{
    CHECK_THROWS_AS((LossConfig{1.5, 1, 1, 1}.validate()), Error);
    CHECK_THROWS_AS((LossConfig{0.5, -1, 1, 1}.validate()), Error);
    LossConfig{0.0, 0, 0, 0}.validate();
}

TEST_CASE("pairwise sum is accurate and order-fixed")
{
    std::vector<double> v;
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0, 1);
    long double exact = 0;
    for (int i = 0; i < 100001; ++i) {
        v.push_back(u(rng) * (i % 2 ? 1e-8 : 1.0));
        exact += v.back();
    }
    CHECK(std::abs(pairwise_sum(v) - static_cast<double>(exact)) < 1e-9);
    CHECK(pairwise_sum(std::vector<double>{}) == 0.0);
    CHECK(pairwise_sum(v) == pairwise_sum(v));
}

TEST_CASE("loss log lines")
{
    const auto dir = toy::scratch("loss_log");
    {
        LossLog log(dir / "loss.jsonl");
        LossReport r;
        r.l_i = 1.0;
        r.l_total = 1.0;
        log.write(0, r, 1.0);
        log.write(1, r, std::nan(""));
    }
    std::ifstream in(dir / "loss.jsonl");
    std::string line;
    std::getline(in, line);
    auto j = nlohmann::json::parse(line);
    CHECK(j.at("step") == 0);
    CHECK(j.at("l_i") == 1.0);
    CHECK(j.at("gamma_rig") == 1.0);
    std::getline(in, line);
    j = nlohmann::json::parse(line);
    CHECK(j.at("gamma_rig").is_null());
}
