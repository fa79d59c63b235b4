#include <doctest.h>

#include <algorithm>

#include "basalt/brahms_node.hpp"
#include "basalt/error.hpp"
#include "test_util.hpp"

using namespace basalt;
using basalt::test::ip;

namespace {

BrahmsParams brahms_params(int v, int k = 0) {
    BrahmsParams p;
    p.view_size = v;
    p.replacement_count = k == 0 ? std::max(1, v / 2) : k;
    return p;
}

NodeId uniform_argmin(const Seed& seed, const std::vector<NodeId>& ids) {
    const auto fn = RankingFunction::uniform();
    const auto ps = fn.prepare(seed);
    NodeId best = ids.front();
    for (NodeId p : ids) {
        if (fn.precedes(ps, p, best)) best = p;
    }
    return best;
}

} // namespace

TEST_SUITE("brahms") {

TEST_CASE("view sections follow alpha, beta, gamma") {
    const BrahmsParams p = brahms_params(100);
    CHECK(p.push_slots() == 45);
    CHECK(p.pull_slots() == 45);
    CHECK(p.sampler_slots() == 10);
    CHECK(p.effective_push_limit() == 45);
    BrahmsParams q = p;
    q.push_limit = 7;
    CHECK(q.effective_push_limit() == 7);
    q.alpha = 0.5;
    CHECK_THROWS_AS(q.validate(), ConfigError);
}

TEST_CASE("sampler keeps the uniform-rank minimum, independent of order") {
    auto ids = test::random_ids(50, 200);
    Rng rng(201);
    for (int t = 0; t < 50; ++t) {
        const Seed seed = random_seed(rng);
        const NodeId want = uniform_argmin(seed, ids);
        MinWiseSampler one(seed);
        for (NodeId p : ids) one.offer(p);
        CHECK(*one.element() == want);
        std::shuffle(ids.begin(), ids.end(), rng);
        MinWiseSampler batch(seed);
        batch.offer(std::span<const NodeId>(ids.data(), 20));
        batch.offer(std::span<const NodeId>(ids.data() + 20, ids.size() - 20));
        CHECK(*batch.element() == want);
    }
    MinWiseSampler empty(Seed{{1, 1, 1, 1}});
    CHECK_FALSE(empty.element().has_value());
    empty.offer(std::span<const NodeId>{});
    CHECK_FALSE(empty.element().has_value());
}

TEST_CASE("after the whole population is offered every sampler holds its global argmin") {
    const auto population = test::random_ids(50, 210);
    BrahmsNode node(NodeId(ip(9, 9, 9, 9)), brahms_params(20), std::vector<NodeId>{population[0]}, 21);
    node.round(std::span<const NodeId>(population.data(), 10), std::span<const NodeId>(population.data() + 10, 40), false);
    for (const auto& s : node.samplers()) CHECK(*s.element() == uniform_argmin(s.seed(), population));
}

TEST_CASE("an empty round only refreshes the sampler section") {
    const auto boot = test::random_ids(200, 220);
    BrahmsNode node(NodeId(ip(9, 9, 9, 9)), brahms_params(20), boot, 22);
    const auto before = node.view();
    const BrahmsRound r = node.round({}, {}, false);
    CHECK(r.view_updated);
    const auto& after = node.view();
    const auto fixed = static_cast<std::ptrdiff_t>(node.params().push_slots() + node.params().pull_slots());
    CHECK(std::equal(before.begin(), before.begin() + fixed, after.begin()));
    std::vector<NodeId> sampled;
    for (const auto& s : node.samplers()) sampled.push_back(*s.element());
    for (auto it = after.begin() + fixed; it != after.end(); ++it) {
        CHECK(std::find(sampled.begin(), sampled.end(), *it) != sampled.end());
    }
}

TEST_CASE("too many pushes freeze the view") {
    const auto boot = test::random_ids(100, 230);
    const auto flood = test::random_ids(10, 231);
    BrahmsParams p = brahms_params(10);
    BrahmsNode node(NodeId(ip(9, 9, 9, 9)), p, boot, 23);
    REQUIRE(p.effective_push_limit() == 5);
    const auto before = node.view();
    const BrahmsRound r = node.round(flood, boot, false);
    CHECK_FALSE(r.view_updated);
    CHECK(node.view() == before);
    const BrahmsRound ok = node.round(std::span<const NodeId>(flood.data(), 5), boot, false);
    CHECK(ok.view_updated);
}

TEST_CASE("pull replies carry exactly v ids") {
    const auto boot = test::random_ids(300, 240);
    BrahmsNode node(NodeId(ip(9, 9, 9, 9)), brahms_params(40), boot, 24);
    const NodeId requester(ip(3, 3, 3, 3));
    const PushMessage reply = node.on_pull(requester);
    CHECK(reply.peers.size() == 40);
    CHECK(reply.to == requester);
    CHECK(reply.reply);
}

TEST_CASE("pushes count their sender, replies their first v ids") {
    const auto boot = test::random_ids(30, 250);
    BrahmsParams p = brahms_params(10);
    p.push_limit = 100;
    BrahmsNode node(NodeId(ip(9, 9, 9, 9)), p, boot, 25);
    const NodeId pusher(ip(7, 7, 7, 7));
    const NodeId extra(ip(8, 8, 8, 8));
    const auto reply_ids = test::random_ids(10, 251);
    std::vector<NodeId> long_reply = reply_ids;
    long_reply.push_back(extra);
    node.on_push(PushMessage{pusher, node.id(), {}, false});
    node.on_push(PushMessage{reply_ids[0], node.id(), long_reply, true});
    node.on_tick(1);
    const auto& view = node.view();
    for (int i = 0; i < p.push_slots(); ++i) CHECK(view[static_cast<std::size_t>(i)] == pusher);
    for (int i = p.push_slots(); i < p.push_slots() + p.pull_slots(); ++i) {
        const NodeId x = view[static_cast<std::size_t>(i)];
        CHECK(std::find(reply_ids.begin(), reply_ids.end(), x) != reply_ids.end());
    }
    for (const auto& s : node.samplers()) CHECK(*s.element() != extra);
}

TEST_CASE("sampling emits and resets k samplers in turn") {
    const auto boot = test::random_ids(100, 260);
    BrahmsNode node(NodeId(ip(9, 9, 9, 9)), brahms_params(10, 5), boot, 26);
    std::size_t samples = 0;
    for (Tick t = 1; t <= 40; ++t) {
        const std::size_t c = node.cursor();
        std::vector<NodeId> expected;
        for (std::size_t j = 0; j < 5; ++j) expected.push_back(*node.samplers()[(c + j) % 10].element());
        const TickOutput out = node.on_tick(t);
        if (t % 5 == 0) {
            CHECK(out.samples == expected);
            CHECK(node.cursor() == (c + 5) % 10);
        } else {
            CHECK(out.samples.empty());
        }
        samples += out.samples.size();
        CHECK(out.messages.size() == 2);
    }
    CHECK(samples == 40);
}

TEST_CASE("identical seeds give identical nodes") {
    const auto boot = test::random_ids(100, 270);
    BrahmsNode a(NodeId(ip(9, 9, 9, 9)), brahms_params(20), boot, 27);
    BrahmsNode b(NodeId(ip(9, 9, 9, 9)), brahms_params(20), boot, 27);
    for (Tick t = 1; t <= 30; ++t) {
        const auto x = a.on_tick(t);
        const auto y = b.on_tick(t);
        CHECK(x.samples == y.samples);
        CHECK(a.view() == b.view());
    }
    CHECK_THROWS_AS(BrahmsNode(NodeId(ip(9, 9, 9, 9)), brahms_params(20), std::vector<NodeId>{NodeId(ip(9, 9, 9, 9))}, 1),
                    ConfigError);
}

} // TEST_SUITE
