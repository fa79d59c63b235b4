#include <doctest.h>

#include <algorithm>
#include <map>
#include <memory>
#include <unordered_map>

#include "basalt/basalt_node.hpp"
#include "basalt/error.hpp"
#include "test_util.hpp"

using namespace basalt;
using basalt::test::ip;

namespace {

ProtocolParams params(int v, int k, double rho = 1.0, Mode mode = Mode::Full) {
    ProtocolParams p;
    p.view_size = v;
    p.replacement_count = k;
    p.sampling_rate = rho;
    p.mode = mode;
    return p;
}

NodeId slot_argmin(const RankingFunction& fn, const Seed& seed, const std::vector<NodeId>& ids) {
    const auto ps = fn.prepare(seed);
    NodeId best = ids.front();
    for (NodeId p : ids) {
        if (fn.precedes(ps, p, best)) best = p;
    }
    return best;
}

std::vector<std::uint64_t> all_hits(const BasaltNode& n) {
    std::vector<std::uint64_t> h;
    for (std::size_t i = 0; i < n.size(); ++i) h.push_back(n.hits(i));
    return h;
}

/// A handful of correct Basalt nodes plus optional Byzantine pushers, with
/// pull replies and pushes delivered within the tick they were sent.
struct MiniNet {
    std::vector<BasaltNode> nodes;
    std::vector<NodeId> byzantine;
    std::vector<std::vector<NodeId>> boots;
    std::unordered_map<std::uint32_t, std::size_t> index;
    Rng rng{5};

    MiniNet(int correct, int byz, ProtocolParams p, const RankingFunction& fn, std::uint64_t seed) {
        const auto ids = test::random_ids(static_cast<std::size_t>(correct + byz), seed);
        std::vector<NodeId> all;
        for (int i = 0; i < correct; ++i) all.push_back(ids[static_cast<std::size_t>(i)]);
        for (int i = correct; i < correct + byz; ++i) {
            byzantine.emplace_back(ids[static_cast<std::size_t>(i)].addr, Role::Byzantine);
            all.push_back(byzantine.back());
        }
        for (int i = 0; i < correct; ++i) {
            std::vector<NodeId> boot;
            for (int j = 0; j < 5; ++j) boot.push_back(all[(static_cast<std::size_t>(i) * 7 + static_cast<std::size_t>(j) * 3 + 1) % all.size()]);
            boots.push_back(boot);
            nodes.emplace_back(all[static_cast<std::size_t>(i)], p, fn, boot, seed * 1000 + static_cast<std::uint64_t>(i));
            index[all[static_cast<std::size_t>(i)].addr] = static_cast<std::size_t>(i);
        }
    }

    /// Returns the samples of every node, in node order.
    std::vector<std::vector<NodeId>> tick(Tick now) {
        std::vector<std::vector<NodeId>> samples(nodes.size());
        std::vector<Message> inbox;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            TickOutput out = nodes[i].on_tick(now);
            samples[i] = std::move(out.samples);
            for (auto& m : out.messages) inbox.push_back(std::move(m));
        }
        for (NodeId b : byzantine) {
            const NodeId target = nodes[rng() % nodes.size()].id();
            inbox.emplace_back(PushMessage{b, target, {byzantine[rng() % byzantine.size()]}, false});
        }
        for (const Message& m : inbox) {
            if (const auto* pr = std::get_if<PullRequest>(&m)) {
                const auto from = index.find(pr->from.addr);
                const auto to = index.find(pr->to.addr);
                if (to != index.end()) {
                    nodes[from->second].on_push(nodes[to->second].on_pull(pr->from));
                } else {
                    nodes[from->second].on_push(PushMessage{pr->to, pr->from, {pr->to}, true});
                }
            } else {
                const auto& push = std::get<PushMessage>(m);
                const auto to = index.find(push.to.addr);
                if (to != index.end()) nodes[to->second].on_push(push);
            }
        }
        return samples;
    }
};

/// Records, per slot, the identifiers presented since its last reset.
class ProvenanceObserver : public SlotObserver {
public:
    explicit ProvenanceObserver(std::size_t v) : presented_(v) {}
    void on_presented(std::span<const NodeId> candidates) override {
        for (auto& s : presented_) s.insert(s.end(), candidates.begin(), candidates.end());
    }
    void on_reset(std::size_t slot) override { presented_[slot].clear(); }
    const std::vector<NodeId>& presented(std::size_t slot) const { return presented_[slot]; }

private:
    std::vector<std::vector<NodeId>> presented_;
};

} // namespace

TEST_SUITE("basalt-node") {

TEST_CASE("single bootstrap peer fills every slot") {
    for (const auto& fn : {RankingFunction::uniform(), RankingFunction::hierarchical()}) {
        const NodeId p(ip(1, 2, 3, 4));
        BasaltNode node(NodeId(ip(5, 5, 5, 5)), params(7, 3), fn, std::vector<NodeId>{p}, 1);
        for (std::size_t i = 0; i < node.size(); ++i) {
            CHECK(node.peer(i) == p);
            CHECK(node.hits(i) == 1);
            CHECK(node.slot(i).peer == p);
        }
    }
}

TEST_CASE("two bootstrap peers: each slot keeps the better one") {
    for (const auto& fn : {RankingFunction::uniform(), RankingFunction::grouped_by_prefix(16),
                           RankingFunction::hierarchical()}) {
        const NodeId p(ip(1, 2, 3, 4));
        const NodeId q(ip(1, 2, 9, 9));
        BasaltNode node(NodeId(ip(5, 5, 5, 5)), params(40, 20), fn, std::vector<NodeId>{p, q}, 2);
        int picked_p = 0;
        for (std::size_t i = 0; i < node.size(); ++i) {
            const NodeId want = better(fn, node.slot(i).seed, p, q) ? p : q;
            CHECK(node.peer(i) == want);
            picked_p += node.peer(i) == p ? 1 : 0;
        }
        CHECK(picked_p > 0);
        CHECK(picked_p < 40);
    }
}

TEST_CASE("own identifier is never adopted") {
    const NodeId self(ip(5, 5, 5, 5));
    const NodeId p(ip(6, 6, 6, 6));
    BasaltNode node(self, params(16, 8), RankingFunction::uniform(), std::vector<NodeId>{self, p, self}, 3);
    for (std::size_t i = 0; i < node.size(); ++i) CHECK(node.peer(i) == p);
    CHECK_THROWS_AS(BasaltNode(self, params(4, 2), RankingFunction::uniform(), std::vector<NodeId>{self}, 3),
                    ConfigError);
    CHECK_THROWS_AS(BasaltNode(self, params(4, 2), RankingFunction::uniform(), std::vector<NodeId>{}, 3), ConfigError);
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(params(4, 5).validate(), ConfigError);
    CHECK_THROWS_AS(params(4, 0).validate(), ConfigError);
    CHECK_THROWS_AS(params(4, 3, 2.0).validate(), ConfigError);  // k/rho = 1.5 ticks
    CHECK_THROWS_AS(params(4, 2, 0.0).validate(), ConfigError);
    ProtocolParams p = params(10, 4, 1.0);
    p.exchange_interval = 3;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    CHECK(params(100, 50, 0.5).sampling_period() == 100);
}

TEST_CASE("each occurrence of the current peer counts as a hit") {
    const NodeId p(ip(1, 2, 3, 4));
    for (const auto& fn : {RankingFunction::uniform(), RankingFunction::hierarchical()}) {
        BasaltNode full(NodeId(ip(9, 9, 9, 9)), params(5, 1), fn, std::vector<NodeId>{p}, 4);
        full.update_sample(std::vector<NodeId>{p, p});
        for (std::size_t i = 0; i < full.size(); ++i) CHECK(full.hits(i) == 3);

        BasaltNode simple(NodeId(ip(9, 9, 9, 9)), params(5, 1, 1.0, Mode::Simple), fn, std::vector<NodeId>{p}, 4);
        simple.update_sample(std::vector<NodeId>{p, p});
        for (std::size_t i = 0; i < simple.size(); ++i) CHECK(simple.hits(i) == 1);
    }
}

TEST_CASE("a candidate worse for every slot leaves the state unchanged") {
    for (const auto& fn : {RankingFunction::uniform(), RankingFunction::hierarchical()}) {
        const auto boot = test::random_ids(20, 50);
        BasaltNode node(NodeId(ip(9, 9, 9, 9)), params(4, 2), fn, boot, 5);
        const auto view = node.view();
        const auto hits = all_hits(node);
        const auto pool = test::random_ids(200, 51);
        int tried = 0;
        for (NodeId c : pool) {
            bool worse = true;
            for (std::size_t i = 0; i < node.size(); ++i) worse = worse && better(fn, node.slot(i).seed, node.peer(i), c);
            if (!worse) continue;
            ++tried;
            node.update_sample(std::vector<NodeId>{c});
            CHECK(node.view() == view);
            CHECK(all_hits(node) == hits);
        }
        CHECK(tried > 0);
    }
}

TEST_CASE("presenting the whole population yields the per-slot global argmin") {
    for (const auto& fn : {RankingFunction::uniform(), RankingFunction::grouped_by_prefix(8),
                           RankingFunction::hierarchical()}) {
        auto population = test::random_ids(50, 60);
        BasaltNode node(NodeId(ip(9, 9, 9, 9)), params(30, 10), fn, std::vector<NodeId>{population[0]}, 6);
        Rng rng(61);
        std::shuffle(population.begin(), population.end(), rng);
        for (std::size_t at = 0; at < population.size(); at += 7) {
            const auto end = std::min(population.size(), at + 7);
            node.update_sample(std::vector<NodeId>(population.begin() + static_cast<std::ptrdiff_t>(at),
                                                   population.begin() + static_cast<std::ptrdiff_t>(end)));
        }
        for (std::size_t i = 0; i < node.size(); ++i) CHECK(node.peer(i) == slot_argmin(fn, node.slot(i).seed, population));
    }
}

TEST_CASE("selectPeer returns the unique least-hit slot") {
    // Search for a state with three distinct peers, then raise slots 0 and 2 to five hits.
    const auto boot = test::random_ids(30, 70);
    for (std::uint64_t seed = 1;; ++seed) {
        REQUIRE(seed < 1000);
        BasaltNode node(NodeId(ip(9, 9, 9, 9)), params(3, 1), RankingFunction::uniform(), boot, seed);
        if (node.peer(0) == node.peer(1) || node.peer(1) == node.peer(2) || node.peer(0) == node.peer(2)) continue;
        const NodeId a = node.peer(0);
        const NodeId c = node.peer(2);
        node.update_sample(std::vector<NodeId>{a, a, a, a, c, c, c, c});
        REQUIRE(all_hits(node) == std::vector<std::uint64_t>{5, 1, 5});
        CHECK(node.select_peer() == node.peer(1));
        CHECK(all_hits(node) == std::vector<std::uint64_t>{5, 2, 5});
        break;
    }
}

TEST_CASE("selectPeer with equal hits chooses uniformly") {
    const auto boot = test::random_ids(40, 80);
    constexpr int kDraws = 10000;
    std::vector<double> chosen(4, 0.0);
    for (int t = 0; t < kDraws; ++t) {
        BasaltNode node(NodeId(ip(9, 9, 9, 9)), params(4, 2), RankingFunction::uniform(), boot,
                        static_cast<std::uint64_t>(t) + 1);
        REQUIRE(all_hits(node) == std::vector<std::uint64_t>(4, 1));
        node.select_peer();
        for (std::size_t i = 0; i < 4; ++i) {
            if (node.hits(i) == 2) chosen[i] += 1;
        }
    }
    CHECK(test::chi2(chosen, std::vector<double>(4, kDraws / 4.0)) < test::chi2_critical_01(3));
}

TEST_CASE("repeated selectPeer rotates over the slots") {
    const auto boot = test::random_ids(20, 90);
    BasaltNode node(NodeId(ip(9, 9, 9, 9)), params(3, 1), RankingFunction::uniform(), boot, 9);
    for (int round = 0; round < 10; ++round) {
        std::vector<int> picked(3, 0);
        for (int j = 0; j < 3; ++j) {
            const auto before = all_hits(node);
            node.select_peer();
            for (std::size_t i = 0; i < 3; ++i) picked[i] += node.hits(i) != before[i] ? 1 : 0;
        }
        CHECK(picked == std::vector<int>{1, 1, 1});
        const auto h = all_hits(node);
        CHECK(h[0] == h[1]);
        CHECK(h[1] == h[2]);
    }
}

TEST_CASE("simple mode selects uniformly without touching counters") {
    // Slots are told apart by peer, so the bootstrap gives each slot a distinct peer first.
    const auto boot = test::random_ids(60, 100);
    std::uint64_t seed = 1;
    for (;; ++seed) {
        BasaltNode probe(NodeId(ip(9, 9, 9, 9)), params(4, 2, 1.0, Mode::Simple), RankingFunction::uniform(), boot, seed);
        auto v = probe.view();
        std::sort(v.begin(), v.end());
        if (std::unique(v.begin(), v.end()) == v.end()) break;
    }
    BasaltNode node(NodeId(ip(9, 9, 9, 9)), params(4, 2, 1.0, Mode::Simple), RankingFunction::uniform(), boot, seed);
    constexpr int kDraws = 10000;
    std::vector<double> chosen(4, 0.0);
    for (int t = 0; t < kDraws; ++t) {
        const NodeId p = node.select_peer();
        for (std::size_t i = 0; i < 4; ++i) {
            if (node.peer(i) == p) chosen[i] += 1;
        }
    }
    CHECK(all_hits(node) == std::vector<std::uint64_t>(4, 1));
    CHECK(test::chi2(chosen, std::vector<double>(4, kDraws / 4.0)) < test::chi2_critical_01(3));
}

TEST_CASE("sampling schedule: v=4, k=2, rho=1") {
    const auto boot = test::random_ids(30, 110);
    BasaltNode node(NodeId(ip(9, 9, 9, 9)), params(4, 2, 1.0), RankingFunction::uniform(), boot, 11);
    std::vector<std::size_t> cursor_before;
    for (Tick t = 1; t <= 6; ++t) {
        const auto view = node.view();
        const std::size_t c = node.cursor();
        TickOutput out = node.on_tick(t);
        REQUIRE(out.messages.size() == 2);
        CHECK(std::holds_alternative<PullRequest>(out.messages[0]));
        CHECK(std::get<PushMessage>(out.messages[1]).peers == view);
        if (t % 2 == 1) {
            CHECK(out.samples.empty());
            continue;
        }
        cursor_before.push_back(c);
        REQUIRE(out.samples.size() == 2);
        CHECK(out.samples[0] == view[c]);
        CHECK(out.samples[1] == view[c + 1]);
    }
    CHECK(cursor_before == std::vector<std::size_t>{0, 2, 0});
}

TEST_CASE("sample count equals rho times the run length") {
    const auto boot = test::random_ids(30, 120);
    for (auto [k, rho] : {std::pair{5, 0.5}, std::pair{10, 1.0}, std::pair{10, 2.0}}) {
        BasaltNode node(NodeId(ip(9, 9, 9, 9)), params(10, k, rho), RankingFunction::uniform(), boot, 12);
        std::size_t samples = 0;
        for (Tick t = 1; t <= 200; ++t) samples += node.on_tick(t).samples.size();
        CHECK(samples == static_cast<std::size_t>(rho * 200));
    }
}

TEST_CASE("reset keeps the peer and draws a new seed") {
    const auto boot = test::random_ids(30, 130);
    BasaltNode node(NodeId(ip(9, 9, 9, 9)), params(6, 3), RankingFunction::uniform(), boot, 13);
    node.update_sample(std::vector<NodeId>{node.peer(2)});
    const ViewSlot before = node.slot(2);
    node.reset_slot(2);
    const ViewSlot after = node.slot(2);
    CHECK(after.peer == before.peer);
    CHECK(after.hits == before.hits);
    CHECK_FALSE(after.seed == before.seed);
}

TEST_CASE("pull replies carry the view and leave it unchanged") {
    const auto boot = test::random_ids(30, 140);
    const BasaltNode node(NodeId(ip(9, 9, 9, 9)), params(8, 4), RankingFunction::uniform(), boot, 14);
    const auto view = node.view();
    const NodeId requester(ip(3, 3, 3, 3));
    const PushMessage reply = node.on_pull(requester);
    CHECK(reply.peers.size() == 8);
    CHECK(reply.peers == view);
    CHECK(reply.to == requester);
    CHECK(reply.from == node.id());
    CHECK(reply.reply);
    CHECK(node.view() == view);
}

TEST_CASE("push handling") {
    const auto fn = RankingFunction::uniform();
    const NodeId q(ip(1, 1, 1, 1));
    const auto pool = test::random_ids(200, 150);
    BasaltNode node(NodeId(ip(9, 9, 9, 9)), params(1, 1), fn, std::vector<NodeId>{q}, 15);
    const Seed seed = node.slot(0).seed;
    std::vector<NodeId> stronger;
    for (NodeId c : pool) {
        if (better(fn, seed, c, q)) stronger.push_back(c);
    }
    REQUIRE(stronger.size() >= 2);

    SUBCASE("empty payload: only the sender is considered") {
        node.on_push(PushMessage{stronger[0], node.id(), {}, false});
        CHECK(node.peer(0) == stronger[0]);
    }
    SUBCASE("payload beyond v entries is ignored") {
        node.on_push(PushMessage{q, node.id(), {q, q, stronger[0]}, false});
        CHECK(node.peer(0) == q);
        node.on_push(PushMessage{q, node.id(), {stronger[0], q, q}, false});
        CHECK(node.peer(0) == stronger[0]);
    }
}

TEST_CASE("simple mode: re-presented Byzantine ids change nothing") {
    std::vector<NodeId> byz;
    for (NodeId p : test::random_ids(20, 160)) byz.emplace_back(p.addr, Role::Byzantine);
    BasaltNode node(NodeId(ip(9, 9, 9, 9)), params(20, 10, 1.0, Mode::Simple), RankingFunction::hierarchical(),
                    test::random_ids(10, 161), 16);
    node.on_push(PushMessage{byz[0], node.id(), byz, false});
    const auto view = node.view();
    const auto hits = all_hits(node);
    for (int r = 0; r < 5; ++r) node.on_push(PushMessage{byz[static_cast<std::size_t>(r)], node.id(), byz, false});
    CHECK(node.view() == view);
    CHECK(all_hits(node) == hits);
}

TEST_CASE("flooded bootstrap: Byzantine occupancy matches b_max / (b_max + c)") {
    // 1000 Byzantine ids against 125 correct ids: each slot is Byzantine with probability 1000/1125.
    std::vector<NodeId> boot = test::random_ids(1125, 170);
    for (std::size_t i = 125; i < boot.size(); ++i) boot[i].role = Role::Byzantine;
    constexpr int kNodes = 100;
    constexpr int kView = 100;
    double byz = 0;
    for (int n = 0; n < kNodes; ++n) {
        BasaltNode node(NodeId(ip(9, 9, 9, 9)), params(kView, 50), RankingFunction::uniform(), boot,
                        static_cast<std::uint64_t>(n) + 1);
        for (NodeId p : node.view()) byz += p.byzantine() ? 1 : 0;
    }
    const double expected = 1000.0 / 1125.0;
    const double se = std::sqrt(expected * (1 - expected) / (kNodes * kView));
    CHECK(std::abs(byz / (kNodes * kView) - expected) < 4 * se);
}

TEST_CASE("greedy monotonicity between resets") {
    for (const auto& fn : {RankingFunction::uniform(), RankingFunction::hierarchical()}) {
        MiniNet net(40, 10, params(8, 2, 0.5), fn, 17);
        std::vector<std::vector<ViewSlot>> last(net.nodes.size());
        for (std::size_t i = 0; i < net.nodes.size(); ++i) {
            for (std::size_t s = 0; s < 8; ++s) last[i].push_back(net.nodes[i].slot(s));
        }
        int compared = 0;
        for (Tick t = 1; t <= 60; ++t) {
            net.tick(t);
            for (std::size_t i = 0; i < net.nodes.size(); ++i) {
                for (std::size_t s = 0; s < 8; ++s) {
                    const ViewSlot now = net.nodes[i].slot(s);
                    if (now.seed == last[i][s].seed) {
                        ++compared;
                        const bool same = *now.peer == *last[i][s].peer;
                        CHECK((same || better(fn, now.seed, *now.peer, *last[i][s].peer)));
                    }
                    last[i][s] = now;
                }
            }
        }
        CHECK(compared > 0);
    }
}

TEST_CASE("slot contents do not depend on presentation order") {
    for (const auto& fn : {RankingFunction::uniform(), RankingFunction::hierarchical()}) {
        auto ids = test::random_ids(50, 180);
        for (std::size_t i = 40; i < 50; ++i) ids[i].role = Role::Byzantine;
        Rng rng(181);
        // Messages with repetitions, replayed in several orders.
        std::vector<std::vector<NodeId>> messages;
        for (int m = 0; m < 30; ++m) {
            std::vector<NodeId> msg;
            for (int j = 0; j < 6; ++j) msg.push_back(ids[rng() % ids.size()]);
            messages.push_back(msg);
        }
        std::vector<NodeId> reference;
        for (int order = 0; order < 8; ++order) {
            BasaltNode node(NodeId(ip(9, 9, 9, 9)), params(12, 6), fn, std::vector<NodeId>{ids[0]}, 18);
            auto replay = messages;
            std::shuffle(replay.begin(), replay.end(), rng);
            for (auto& msg : replay) {
                std::shuffle(msg.begin(), msg.end(), rng);
                node.update_sample(msg);
            }
            if (order == 0) {
                reference = node.view();
            } else {
                CHECK(node.view() == reference);
            }
        }
    }
}

TEST_CASE("every sample is the argmin of what its slot saw since the last reset") {
    for (const auto& fn : {RankingFunction::uniform(), RankingFunction::hierarchical()}) {
        MiniNet net(30, 8, params(6, 3, 1.0), fn, 19);
        std::vector<std::unique_ptr<ProvenanceObserver>> observers;
        for (auto& node : net.nodes) {
            observers.push_back(std::make_unique<ProvenanceObserver>(node.size()));
            observers.back()->on_presented(net.boots[observers.size() - 1]);
            node.set_observer(observers.back().get());
        }
        std::size_t checked = 0;
        for (Tick t = 1; t <= 60; ++t) {
            std::vector<std::vector<ViewSlot>> slots(net.nodes.size());
            std::vector<std::size_t> cursor(net.nodes.size());
            std::vector<std::vector<std::vector<NodeId>>> seen(net.nodes.size());
            for (std::size_t i = 0; i < net.nodes.size(); ++i) {
                cursor[i] = net.nodes[i].cursor();
                for (std::size_t s = 0; s < 6; ++s) {
                    slots[i].push_back(net.nodes[i].slot(s));
                    seen[i].push_back(observers[i]->presented(s));
                }
            }
            const auto samples = net.tick(t);
            for (std::size_t i = 0; i < net.nodes.size(); ++i) {
                for (std::size_t j = 0; j < samples[i].size(); ++j) {
                    const std::size_t s = (cursor[i] + j) % 6;
                    std::vector<NodeId> presented;
                    for (NodeId p : seen[i][s]) {
                        if (p != net.nodes[i].id()) presented.push_back(p);
                    }
                    CHECK(samples[i][j] == slot_argmin(fn, slots[i][s].seed, presented));
                    ++checked;
                }
            }
        }
        CHECK(checked > 1000);
    }
}

TEST_CASE("hit counters are neutral under honest gossip") {
    // Slots are reset round-robin, so hits are averaged over whole reset cycles
    // (v/k sampling periods = 20 ticks) to compare slots at equal age.
    MiniNet net(50, 0, params(10, 5, 0.5), RankingFunction::uniform(), 20);
    std::vector<double> mean(10, 0.0);
    for (Tick t = 1; t <= 800; ++t) {
        net.tick(t);
        if (t <= 400) continue;
        for (const auto& node : net.nodes) {
            for (std::size_t s = 0; s < 10; ++s) mean[s] += static_cast<double>(node.hits(s));
        }
    }
    double m = 0;
    for (double x : mean) m += x / 10;
    double var = 0;
    for (double x : mean) var += (x - m) * (x - m) / 9;
    const double cv = std::sqrt(var) / m;
    MESSAGE("coefficient of variation of time-averaged hits across slots: " << cv);
    CHECK(cv < 0.1);
}

TEST_CASE("selectPeer on an empty view is impossible by construction") {
    const NodeId p(ip(1, 1, 1, 1));
    BasaltNode node(NodeId(ip(9, 9, 9, 9)), params(2, 1), RankingFunction::uniform(), std::vector<NodeId>{p}, 21);
    for (int i = 0; i < 10; ++i) CHECK(node.select_peer() == p);
}

} // TEST_SUITE
