#include <algorithm>
#include <map>
#include <set>

#include "codecast/decoder.hpp"
#include "doctest.h"
#include "testkit/oracles.hpp"

using namespace codecast;

namespace {

HashKey key_of(uint8_t tag) {
    HashKey k{};
    for (int i = 0; i < 16; i++) k[i] = static_cast<uint8_t>(tag + i);
    return k;
}

Bytes tx_bytes(uint8_t fill, size_t n = 32) { return Bytes(n, fill); }

// Builds a codeword straight from its true source payloads.
Codeword make_cw(const HashKey& key, const std::vector<Bytes>& sources, uint32_t id_bytes,
                 uint64_t seqno) {
    Codeword cw;
    cw.seqno = seqno;
    cw.payload.assign(sources.front().size(), 0);
    for (const Bytes& s : sources) {
        cw.ids.push_back(short_id(key, s, id_bytes));
        xor_into(cw.payload, s);
    }
    return cw;
}

DecoderConfig base_cfg() {
    DecoderConfig cfg;
    cfg.id_bytes = 4;
    cfg.payload_size = 32;
    cfg.peel_window = 1000;
    cfg.timeout = 1.0;
    cfg.pending_cap = 500;
    return cfg;
}

std::multiset<Bytes> as_multiset(const std::vector<BytesPtr>& v) {
    std::multiset<Bytes> out;
    for (const auto& p : v) out.insert(*p);
    return out;
}

}  // namespace

TEST_CASE("config validation") {
    auto cfg = base_cfg();
    CHECK_NOTHROW(DecoderState{cfg});
    auto bad = cfg;
    bad.id_bytes = 0;
    CHECK_THROWS(DecoderState{bad});
    bad = cfg;
    bad.id_bytes = 9;
    CHECK_THROWS(DecoderState{bad});
    bad = cfg;
    bad.payload_size = 0;
    CHECK_THROWS(DecoderState{bad});
    bad = cfg;
    bad.peel_window = 0;
    CHECK_THROWS(DecoderState{bad});
    bad = cfg;
    bad.timeout = 0.0;
    CHECK_THROWS(DecoderState{bad});
    bad = cfg;
    bad.pending_cap = 0;
    CHECK_THROWS(DecoderState{bad});

    DecoderState dec(cfg);
    Codeword cw = make_cw(key_of(1), {tx_bytes(1)}, 4, 0);
    CHECK_THROWS(dec.ingest(5, cw, 0.0));  // unregistered link
}

TEST_CASE("degree-1 decode and peeling cascade") {
    auto key = key_of(1);
    DecoderState dec(base_cfg());
    uint32_t link = dec.add_link(key);
    Bytes t1 = tx_bytes(0x11), t2 = tx_bytes(0x22), t3 = tx_bytes(0x33);

    // Arrivals in "wrong" order: the high-degree codewords park as pending.
    CHECK(dec.ingest(link, make_cw(key, {t1, t2, t3}, 4, 0), 0.0).empty());
    CHECK(dec.ingest(link, {make_cw(key, {t2, t3}, 4, 1)}, 0.1).empty());
    CHECK(dec.pending_count(link) == 2);

    auto out = dec.ingest(link, make_cw(key, {t3}, 4, 2), 0.2);
    REQUIRE(out.size() == 3);
    CHECK(*out[0] == t3);
    CHECK(*out[1] == t2);
    CHECK(*out[2] == t1);
    CHECK(dec.pending_count(link) == 0);
    CHECK(dec.decoded_log().size() == 3);
    CHECK(dec.id_index_size(link) == 3);
}

TEST_CASE("cross-link peeling uses every link's key") {
    DecoderState dec(base_cfg());
    uint32_t la = dec.add_link(key_of(1));
    uint32_t lb = dec.add_link(key_of(7));
    Bytes t1 = tx_bytes(0x11), t2 = tx_bytes(0x22);

    CHECK(dec.ingest(lb, make_cw(key_of(7), {t1, t2}, 4, 0), 0.0).empty());
    // t1 arrives on the *other* link; its decode must peel link b's pending.
    auto out = dec.ingest(la, make_cw(key_of(1), {t1}, 4, 1), 0.1);
    REQUIRE(out.size() == 2);
    CHECK(*out[0] == t1);
    CHECK(*out[1] == t2);
    // Decoded transactions are indexed under both keys.
    CHECK(dec.id_index_size(la) == 2);
    CHECK(dec.id_index_size(lb) == 2);
}

TEST_CASE("malformed and duplicate-id codewords are counted and dropped") {
    auto key = key_of(1);
    DecoderState dec(base_cfg());
    uint32_t link = dec.add_link(key);
    Bytes t1 = tx_bytes(0x11);

    Codeword no_ids;
    no_ids.payload = tx_bytes(0x01);
    CHECK(dec.ingest(link, no_ids, 0.0).empty());
    CHECK(dec.malformed == 1);

    Codeword wrong_size = make_cw(key, {t1}, 4, 0);
    wrong_size.payload.pop_back();
    CHECK(dec.ingest(link, wrong_size, 0.0).empty());
    CHECK(dec.malformed == 2);

    Codeword dup = make_cw(key, {t1}, 4, 0);
    dup.ids.push_back(dup.ids[0]);
    CHECK(dec.ingest(link, dup, 0.0).empty());
    CHECK(dec.duplicate_id_drops == 1);
    CHECK(dec.pending_count(link) == 0);
}

TEST_CASE("repeated codeword is recognized as fully covered") {
    auto key = key_of(1);
    DecoderState dec(base_cfg());
    uint32_t link = dec.add_link(key);
    Bytes t1 = tx_bytes(0x11);
    CHECK(dec.ingest(link, make_cw(key, {t1}, 4, 0), 0.0).size() == 1);
    CHECK(dec.ingest(link, make_cw(key, {t1}, 4, 1), 0.1).empty());
    CHECK(dec.fully_covered == 1);
    CHECK(dec.decoded_log().size() == 1);
}

TEST_CASE("degree-1 validation rejects stolen headers and corrupt payloads") {
    auto key = key_of(1);
    DecoderState dec(base_cfg());
    uint32_t link = dec.add_link(key);
    Bytes target = tx_bytes(0x42);

    // Attacker claims `target`'s ID over garbage bytes.
    Codeword forged;
    forged.seqno = 0;
    forged.ids = {short_id(key, target, 4)};
    forged.payload = tx_bytes(0x99);
    CHECK(dec.ingest(link, forged, 0.0).empty());
    CHECK(dec.corrupted == 1);
    CHECK(dec.decoded_log().empty());

    // The honest copy still decodes afterwards: the forgery left no trace.
    auto out = dec.ingest(link, make_cw(key, {target}, 4, 1), 0.1);
    REQUIRE(out.size() == 1);
    CHECK(*out[0] == target);
}

TEST_CASE("short-ID collision is caught by the degree-1 check") {
    auto key = key_of(3);
    Rng rng(2024);
    // Two distinct payloads with the same 2-byte short ID.
    auto [a, b] = testkit::find_id_collision(key, 2, 32, rng);
    REQUIRE(a != b);
    REQUIRE(short_id(key, a, 2) == short_id(key, b, 2));
    Bytes c = tx_bytes(0x77);
    REQUIRE(short_id(key, c, 2) != short_id(key, a, 2));

    auto cfg = base_cfg();
    cfg.id_bytes = 2;
    DecoderState dec(cfg);
    uint32_t link = dec.add_link(key);

    // `a` decodes first and claims the shared ID in the index.
    CHECK(dec.ingest(link, make_cw(key, {a}, 2, 0), 0.0).size() == 1);
    // A codeword whose true sources are {b, c} now mis-peels: the index
    // substitutes `a` for `b`, leaving payload a^b^c under c's ID.  The
    // keyed re-hash of that payload cannot match, so it must be dropped
    // rather than emitted as a bogus transaction.
    auto out = dec.ingest(link, make_cw(key, {b, c}, 2, 1), 0.1);
    CHECK(out.empty());
    CHECK(dec.corrupted == 1);
    for (const auto& tx : dec.decoded_log()) CHECK(*tx == a);
}

TEST_CASE("timeouts report once and pendings stay decodable") {
    auto key = key_of(1);
    DecoderState dec(base_cfg());  // timeout = 1.0
    uint32_t link = dec.add_link(key);
    Bytes t1 = tx_bytes(0x11), t2 = tx_bytes(0x22);

    CHECK(dec.ingest(link, make_cw(key, {t1, t2}, 4, 77), 0.0).empty());
    CHECK(dec.scan_timeouts(0.5).empty());
    auto events = dec.scan_timeouts(1.0);
    REQUIRE(events.size() == 1);
    CHECK(events[0].link == link);
    CHECK(events[0].seqno == 77);
    CHECK(events[0].reported_at == doctest::Approx(1.0));
    // Never re-reported...
    CHECK(dec.scan_timeouts(5.0).empty());
    // ...and still in the graph: a late degree-1 finishes the decode.
    auto out = dec.ingest(link, make_cw(key, {t1}, 4, 78), 6.0);
    REQUIRE(out.size() == 2);
    CHECK(*out[1] == t2);
}

TEST_CASE("pending decoded before its deadline emits no loss event") {
    auto key = key_of(1);
    DecoderState dec(base_cfg());
    uint32_t link = dec.add_link(key);
    Bytes t1 = tx_bytes(0x11), t2 = tx_bytes(0x22);
    CHECK(dec.ingest(link, make_cw(key, {t1, t2}, 4, 0), 0.0).empty());
    CHECK(dec.ingest(link, make_cw(key, {t1}, 4, 1), 0.2).size() == 2);
    CHECK(dec.scan_timeouts(10.0).empty());
}

TEST_CASE("peel window bounds the per-link ID index") {
    auto key = key_of(1);
    auto cfg = base_cfg();
    cfg.peel_window = 4;
    DecoderState dec(cfg);
    uint32_t link = dec.add_link(key);
    for (uint8_t i = 0; i < 6; i++) {
        dec.ingest(link, make_cw(key, {tx_bytes(i)}, 4, i), 0.0);
        CHECK(dec.id_index_size(link) <= 4);
    }
    CHECK(dec.id_index_size(link) == 4);
    // The oldest entry fell out of the window, so its repeat is no longer
    // recognized (re-decoded instead of absorbed) — bounded memory is the
    // deliberate trade.
    auto out = dec.ingest(link, make_cw(key, {tx_bytes(0)}, 4, 10), 0.0);
    CHECK(out.size() == 1);
}

TEST_CASE("pending cap evicts the oldest codeword on the link") {
    auto key = key_of(1);
    auto cfg = base_cfg();
    cfg.pending_cap = 2;
    DecoderState dec(cfg);
    uint32_t link = dec.add_link(key);
    // Three pendings with disjoint unknowns; seqnos 0,1,2.
    dec.ingest(link, make_cw(key, {tx_bytes(1), tx_bytes(2)}, 4, 0), 0.0);
    dec.ingest(link, make_cw(key, {tx_bytes(3), tx_bytes(4)}, 4, 1), 0.0);
    dec.ingest(link, make_cw(key, {tx_bytes(5), tx_bytes(6)}, 4, 2), 0.0);
    CHECK(dec.pending_count(link) == 2);
    // Only the survivors ever produce loss events.
    auto events = dec.scan_timeouts(100.0);
    REQUIRE(events.size() == 2);
    CHECK(events[0].seqno == 1);
    CHECK(events[1].seqno == 2);
    // The evicted codeword's sources are gone for good; its survivors decode.
    auto out = dec.ingest(link, make_cw(key, {tx_bytes(3)}, 4, 3), 0.0);
    CHECK(out.size() == 2);  // tx 3 then tx 4
}

TEST_CASE("two reductions to the same unknown emit it once") {
    auto key = key_of(1);
    DecoderState dec(base_cfg());
    uint32_t link = dec.add_link(key);
    Bytes t = tx_bytes(0x10), a = tx_bytes(0x20);
    // Identical pendings t^a; decoding `a` reduces both to t.
    dec.ingest(link, make_cw(key, {t, a}, 4, 0), 0.0);
    dec.ingest(link, make_cw(key, {t, a}, 4, 1), 0.0);
    auto out = dec.ingest(link, make_cw(key, {a}, 4, 2), 0.1);
    REQUIRE(out.size() == 2);
    CHECK(*out[0] == a);
    CHECK(*out[1] == t);
    CHECK(dec.fully_covered == 1);  // the second copy, absorbed not re-emitted
    CHECK(dec.decoded_log().size() == 2);
}

TEST_CASE("adversarial traffic never changes the honest decode sequence") {
    auto key = key_of(1);
    Rng rng(55);
    std::vector<Bytes> txs;
    for (uint8_t i = 0; i < 10; i++) txs.push_back(rng.random_bytes(32));

    // Honest schedule: one degree-2 parked per tx pair, then degree-1s.
    std::vector<Codeword> honest;
    uint64_t seq = 0;
    for (int i = 0; i + 1 < 10; i += 2) honest.push_back(make_cw(key, {txs[i], txs[i + 1]}, 4, seq++));
    for (int i = 0; i < 10; i += 2) honest.push_back(make_cw(key, {txs[i]}, 4, seq++));

    DecoderState clean(base_cfg());
    uint32_t cl = clean.add_link(key);
    DecoderState dirty(base_cfg());
    uint32_t dl = dirty.add_link(key);

    std::vector<BytesPtr> clean_out, dirty_out;
    Rng junk_rng(99);
    for (const auto& cw : honest) {
        // Interleave garbage before every honest codeword.
        Codeword forged;
        forged.ids = {short_id(key, txs[0], 4)};
        forged.payload = junk_rng.random_bytes(32);
        Codeword dup = cw;
        dup.ids.push_back(dup.ids[0]);
        Codeword bogus;
        bogus.ids = {junk_rng.next_u64() & 0xffffffffULL, junk_rng.next_u64() & 0xffffffffULL};
        bogus.payload = junk_rng.random_bytes(32);
        Codeword short_payload = cw;
        short_payload.payload.pop_back();
        for (const Codeword& g : {forged, dup, bogus, short_payload}) {
            auto extra = dirty.ingest(dl, g, 0.0);
            for (auto& p : extra) dirty_out.push_back(p);
        }
        auto a = clean.ingest(cl, cw, 0.0);
        auto b = dirty.ingest(dl, cw, 0.0);
        clean_out.insert(clean_out.end(), a.begin(), a.end());
        dirty_out.insert(dirty_out.end(), b.begin(), b.end());
    }
    REQUIRE(clean_out.size() == dirty_out.size());
    for (size_t i = 0; i < clean_out.size(); i++) CHECK(*clean_out[i] == *dirty_out[i]);
    CHECK(as_multiset(clean.decoded_log()) == as_multiset(dirty.decoded_log()));
    CHECK(clean_out.size() == 10);
}

TEST_CASE("decoder matches the GF(2) peeling oracle on random systems") {
    auto key = key_of(9);
    auto cfg = base_cfg();
    cfg.id_bytes = 8;  // collision-free so the oracle comparison is exact
    cfg.peel_window = 100000;
    cfg.pending_cap = 100000;
    for (uint64_t seed = 1; seed <= 5; seed++) {
        Rng rng(seed);
        const uint32_t n = 30;
        std::vector<Bytes> txs;
        std::set<uint64_t> ids;
        for (uint32_t i = 0; i < n; i++) {
            txs.push_back(rng.random_bytes(32));
            ids.insert(short_id(key, txs.back(), 8));
        }
        REQUIRE(ids.size() == n);

        DecoderState dec(cfg);
        uint32_t link = dec.add_link(key);
        std::vector<testkit::Gf2Equation> eqs;
        std::vector<BytesPtr> decoded;
        for (int e = 0; e < 60; e++) {
            size_t degree = 1 + rng.uniform_index(4);
            std::set<uint32_t> vars;
            while (vars.size() < degree) vars.insert(static_cast<uint32_t>(rng.uniform_index(n)));
            testkit::Gf2Equation eq;
            std::vector<Bytes> sources;
            for (uint32_t v : vars) {
                eq.vars.push_back(v);
                sources.push_back(txs[v]);
            }
            eq.rhs.assign(32, 0);
            for (const Bytes& s : sources) xor_into(eq.rhs, s);
            eqs.push_back(eq);
            auto out = dec.ingest(link, make_cw(key, sources, 8, e), 0.0);
            decoded.insert(decoded.end(), out.begin(), out.end());
        }
        auto solved = testkit::gf2_peel_solve(eqs);
        std::set<Bytes> oracle_set, decoder_set;
        for (auto& [v, val] : solved) {
            CHECK(val == txs[v]);
            oracle_set.insert(val);
        }
        for (auto& p : decoded) decoder_set.insert(*p);
        CHECK(decoder_set == oracle_set);
        CHECK(decoded.size() == solved.size());  // no duplicate emissions either
    }
}

TEST_CASE("streaming link recovers nearly all transactions") {
    auto key = key_of(2);
    auto cfg = base_cfg();
    cfg.payload_size = 64;
    cfg.peel_window = 10000;
    DecoderState dec(cfg);
    uint32_t link = dec.add_link(key);

    const uint32_t k = 50;
    auto dist = DegreeDistribution::robust_soliton(k, 0.03, 0.5, k);
    CodingWindow window(k);
    Rng rng(4242);
    const int total = 300;
    std::set<Bytes> sent, got;
    uint64_t seq = 0;
    for (int i = 0; i < total; i++) {
        Bytes tx = rng.random_bytes(64);
        sent.insert(tx);
        window.insert(Transaction{std::make_shared<Bytes>(tx), 0.0});
        for (int c = 0; c < 2; c++) {
            auto cw = encode(window, dist, rng, key, 4, seq++);
            for (auto& p : dec.ingest(link, cw, 0.0)) got.insert(*p);
        }
    }
    for (const Bytes& g : got) CHECK(sent.count(g) == 1);
    CHECK(got.size() >= static_cast<size_t>(total * 95) / 100);
}

TEST_CASE("intern hook deduplicates payload storage") {
    auto key = key_of(1);
    DecoderState dec(base_cfg());
    uint32_t link = dec.add_link(key);
    std::map<Bytes, BytesPtr> pool;
    size_t hits = 0;
    dec.intern = [&](Bytes&& b) {
        auto it = pool.find(b);
        if (it != pool.end()) {
            hits++;
            return it->second;
        }
        auto p = std::make_shared<const Bytes>(std::move(b));
        pool.emplace(*p, p);
        return p;
    };
    Bytes t1 = tx_bytes(0x11), t2 = tx_bytes(0x22);
    dec.ingest(link, make_cw(key, {t1}, 4, 0), 0.0);
    dec.ingest(link, make_cw(key, {t2}, 4, 1), 0.0);
    CHECK(pool.size() == 2);
    CHECK(hits == 0);
}
