#include <map>
#include <set>

#include "codecast/node.hpp"
#include "doctest.h"
#include "testkit/oracles.hpp"

using namespace codecast;

namespace {

NodeConfig small_cfg() {
    NodeConfig cfg;
    cfg.k = 8;
    cfg.payload_size = 64;
    cfg.timeout = 0.5;
    cfg.rate.initial_rate = 100.0;
    return cfg;
}

Transaction make_tx(uint64_t seed, size_t n = 64) {
    Rng rng(seed);
    return Transaction{std::make_shared<Bytes>(rng.random_bytes(n)), 0.0};
}

// Wires two nodes together: key exchange plus synchronous delivery of
// everything either side sends.  Returns (peer index at a, peer index at b).
std::pair<uint32_t, uint32_t> connect(Node& a, Node& b) {
    uint32_t pa = a.add_peer(b.id());
    uint32_t pb = b.add_peer(a.id());
    a.set_outbound_key(pa, b.inbound_key(pb));
    b.set_outbound_key(pb, a.inbound_key(pa));
    return {pa, pb};
}

Codeword degree2_codeword(const HashKey& key, const Bytes& x, const Bytes& y, uint64_t seqno) {
    Codeword cw;
    cw.seqno = seqno;
    cw.ids = {short_id(key, x, 4), short_id(key, y, 4)};
    cw.payload = x;
    xor_into(cw.payload, y);
    return cw;
}

}  // namespace

TEST_CASE("loss report wire format") {
    std::vector<uint64_t> seqnos{7, 0xdeadbeefcafef00dULL, 42};
    Bytes wire = encode_loss_report(seqnos);
    CHECK(wire.size() == 26);  // 2-byte count + 3 * 8-byte seqnos
    CHECK(wire[0] == 0);
    CHECK(wire[1] == 3);
    CHECK(parse_loss_report(wire) == seqnos);

    CHECK_THROWS(encode_loss_report({}));
    CHECK_THROWS(parse_loss_report(Bytes{1}));  // truncated count
    Bytes bad = wire;
    bad.pop_back();
    CHECK_THROWS(parse_loss_report(bad));  // length mismatch
    Bytes zero{0, 0};
    CHECK_THROWS(parse_loss_report(zero));  // zero count
}

TEST_CASE("send slots skip cleanly when there is nothing to send") {
    Node a(0, small_cfg(), 1);
    Node b(1, small_cfg(), 2);
    auto [pa, pb] = connect(a, b);
    int sends = 0;
    a.send = [&](uint32_t, Bytes&&, MsgKind) { sends++; };

    // Empty window: slot skipped, controller not charged, pacing still set.
    double next = a.on_send_slot(pa, 1.0);
    CHECK(sends == 0);
    CHECK(a.rate(pa) == doctest::Approx(100.0));
    CHECK(next == doctest::Approx(1.01));

    // Full window: the slot transmits and the controller is charged.
    a.on_local_transaction(make_tx(10), 1.0);
    next = a.on_send_slot(pa, next);
    CHECK(sends == 1);
    CHECK(a.rate(pa) == doctest::Approx(99.8));
    CHECK(a.session_stats(pa).codewords_sent == 1);
}

TEST_CASE("no transmission before the outbound key exchange") {
    Node a(0, small_cfg(), 1);
    Node b(1, small_cfg(), 2);
    uint32_t pa = a.add_peer(b.id());
    uint32_t pb = b.add_peer(a.id());
    int sends = 0;
    a.send = [&](uint32_t, Bytes&&, MsgKind) { sends++; };
    a.on_local_transaction(make_tx(10), 0.0);
    a.on_send_slot(pa, 0.0);
    CHECK(sends == 0);

    // The key arrives as a kKeyExchange message; sending starts.
    const HashKey& key = b.inbound_key(pb);
    a.on_receive(pa, Bytes(key.begin(), key.end()), MsgKind::kKeyExchange, 0.1);
    a.on_send_slot(pa, 0.2);
    CHECK(sends == 1);

    // Malformed key exchange is dropped and counted.
    a.on_receive(pa, Bytes(5, 0), MsgKind::kKeyExchange, 0.3);
    CHECK(a.parse_failures == 1);
}

TEST_CASE("two nodes: stream, decode, and account every byte") {
    Node a(0, small_cfg(), 1);
    Node b(1, small_cfg(), 2);
    auto [pa, pb] = connect(a, b);

    uint64_t a_sent_bytes = 0;
    a.send = [&](uint32_t peer, Bytes&& wire, MsgKind kind) {
        a_sent_bytes += wire.size();
        b.on_receive(pb, wire, kind, 0.0);
        (void)peer;
    };
    std::set<Digest> seen;
    b.on_decoded = [&](const Digest& d, const BytesPtr&, double) { seen.insert(d); };

    std::set<Bytes> originals;
    for (int i = 0; i < 8; i++) {
        Transaction tx = make_tx(100 + i);
        originals.insert(*tx.data);
        a.on_local_transaction(tx, 0.0);
    }
    double t = 0.0;
    for (int i = 0; i < 100; i++) t = a.on_send_slot(pa, t);

    CHECK(b.txs_decoded == 8);
    CHECK(seen.size() == 8);
    CHECK(b.decoded_bytes == 8 * 64);
    for (const auto& tx : b.decoder().decoded_log()) CHECK(originals.count(*tx) == 1);

    // Byte conservation: everything a sent landed in b's counters.
    CHECK(a.session_stats(pa).codewords_sent == 100);
    CHECK(b.session_stats(pb).codewords_received == 100);
    CHECK(b.bytes_down == a_sent_bytes);
    CHECK(b.session_stats(pb).bytes_down == a_sent_bytes);
    CHECK(b.parse_failures == 0);
}

TEST_CASE("decoded transactions enter the window and relay onward") {
    Node a(0, small_cfg(), 1);
    Node b(1, small_cfg(), 2);
    Node c(2, small_cfg(), 3);
    auto [pa, pb_a] = connect(a, b);
    uint32_t pb_c = b.add_peer(c.id());
    uint32_t pc = c.add_peer(b.id());
    b.set_outbound_key(pb_c, c.inbound_key(pc));
    c.set_outbound_key(pc, b.inbound_key(pb_c));

    a.send = [&](uint32_t, Bytes&& wire, MsgKind kind) { b.on_receive(pb_a, wire, kind, 0.0); };
    b.send = [&](uint32_t peer, Bytes&& wire, MsgKind kind) {
        if (peer == pb_c) c.on_receive(pc, wire, kind, 0.0);
    };

    std::set<Bytes> originals;
    for (int i = 0; i < 4; i++) {
        Transaction tx = make_tx(200 + i);
        originals.insert(*tx.data);
        a.on_local_transaction(tx, 0.0);
    }
    double t = 0.0;
    for (int i = 0; i < 80; i++) t = a.on_send_slot(pa, t);
    REQUIRE(b.txs_decoded == 4);

    double t2 = 0.0;
    for (int i = 0; i < 80; i++) t2 = b.on_send_slot(pb_c, t2);
    CHECK(c.txs_decoded == 4);
    for (const auto& tx : c.decoder().decoded_log()) CHECK(originals.count(*tx) == 1);
}

TEST_CASE("timeouts emit one batched report and the sender speeds up") {
    auto cfg = small_cfg();
    Node a(0, cfg, 1);
    Node b(1, cfg, 2);
    auto [pa, pb] = connect(a, b);

    std::vector<std::pair<MsgKind, Bytes>> b_out;
    b.send = [&](uint32_t, Bytes&& wire, MsgKind kind) { b_out.emplace_back(kind, std::move(wire)); };

    // Two unsatisfiable codewords (their sources never arrive).
    Bytes x = *make_tx(900).data, y = *make_tx(901).data, z = *make_tx(902).data;
    const HashKey& key = b.inbound_key(pb);
    b.on_receive(pb, serialize_codeword(degree2_codeword(key, x, y, 11), 4), MsgKind::kCodeword,
                 0.0);
    b.on_receive(pb, serialize_codeword(degree2_codeword(key, x, z, 12), 4), MsgKind::kCodeword,
                 0.0);

    b.on_timeout_tick(0.25);  // before the 0.5s deadline
    CHECK(b_out.empty());
    b.on_timeout_tick(0.6);
    REQUIRE(b_out.size() == 1);  // both events batched into one report
    CHECK(b_out[0].first == MsgKind::kLossReport);
    CHECK(parse_loss_report(b_out[0].second) == std::vector<uint64_t>{11, 12});
    CHECK(b.session_stats(pb).loss_events_emitted == 2);
    b.on_timeout_tick(2.0);  // never re-reported
    CHECK(b_out.size() == 1);

    double before = a.rate(pa);
    a.on_receive(pa, b_out[0].second, MsgKind::kLossReport, 0.7);
    CHECK(a.rate(pa) == doctest::Approx(before * 1.1 * 1.1));
    CHECK(a.session_stats(pa).reports_received == 2);
}

TEST_CASE("codewords under the wrong key never decode") {
    Node a(0, small_cfg(), 1);
    Node b(1, small_cfg(), 2);
    auto [pa, pb] = connect(a, b);
    (void)pa;

    HashKey wrong{};
    wrong[0] = 0xff;
    Bytes x = *make_tx(950).data;
    Codeword cw;
    cw.seqno = 0;
    cw.ids = {short_id(wrong, x, 4)};
    cw.payload = x;
    b.on_receive(pb, serialize_codeword(cw, 4), MsgKind::kCodeword, 0.0);
    CHECK(b.txs_decoded == 0);
    CHECK(b.decoder().corrupted == 1);

    // Truncated wire is dropped before reaching the decoder.
    b.on_receive(pb, Bytes(10, 0), MsgKind::kCodeword, 0.0);
    CHECK(b.parse_failures == 1);
    CHECK(b.session_stats(pb).codewords_received == 1);
}

TEST_CASE("a censoring node sees marked transactions but never forwards them") {
    auto cfg = small_cfg();
    cfg.censor = true;
    Node n(0, cfg, 1);
    Node peer(1, small_cfg(), 2);
    auto [pn, pp] = connect(n, peer);
    (void)pn;
    Transaction marked = make_tx(300);
    Transaction normal = make_tx(301);
    Transaction marked2 = make_tx(302);  // arrives only over the wire
    Digest marked_digest = sha256(*marked.data);
    Digest marked2_digest = sha256(*marked2.data);
    n.is_censor_target = [&](const Digest& d) {
        return d == marked_digest || d == marked2_digest;
    };

    n.on_local_transaction(marked, 0.0);
    CHECK(n.window().size() == 0);  // suppressed at the source
    n.on_local_transaction(normal, 0.0);
    CHECK(n.window().size() == 1);

    // Decoding a marked transaction still counts as seeing it...
    Codeword cw;
    cw.ids = {short_id(n.inbound_key(pn), *marked2.data, 4)};
    cw.payload = *marked2.data;
    int announced = 0;
    n.on_decoded = [&](const Digest&, const BytesPtr&, double) { announced++; };
    n.on_receive(pn, serialize_codeword(cw, 4), MsgKind::kCodeword, 0.1);
    CHECK(n.txs_decoded == 1);
    CHECK(announced == 1);
    // ...but it stays out of the coding window, so it is never re-encoded.
    CHECK(n.window().size() == 1);
    (void)pp;
}

TEST_CASE("a silent node decodes but never transmits") {
    auto cfg = small_cfg();
    cfg.silent = true;
    Node n(0, cfg, 1);
    Node peer(1, small_cfg(), 2);
    auto [pn, pp] = connect(n, peer);
    (void)pp;
    int sends = 0;
    n.send = [&](uint32_t, Bytes&&, MsgKind) { sends++; };

    // Decoding works.
    Bytes x = *make_tx(400).data;
    Codeword cw;
    cw.ids = {short_id(n.inbound_key(pn), x, 4)};
    cw.payload = x;
    n.on_receive(pn, serialize_codeword(cw, 4), MsgKind::kCodeword, 0.0);
    CHECK(n.txs_decoded == 1);

    // Send slots transmit nothing even with a populated window.
    n.on_send_slot(pn, 0.1);
    CHECK(sends == 0);

    // Expired pendings emit no loss reports either.
    Bytes y = *make_tx(401).data, z = *make_tx(402).data;
    n.on_receive(pn, serialize_codeword(degree2_codeword(n.inbound_key(pn), y, z, 5), 4),
                 MsgKind::kCodeword, 0.2);
    n.on_timeout_tick(10.0);
    CHECK(sends == 0);
    CHECK(n.session_stats(pn).loss_events_emitted == 0);
}

TEST_CASE("local transaction validation") {
    Node n(0, small_cfg(), 1);
    CHECK_THROWS(n.on_local_transaction(Transaction{nullptr, 0.0}, 0.0));
    CHECK_THROWS(n.on_local_transaction(make_tx(1, 63), 0.0));  // wrong payload size
    CHECK_NOTHROW(n.on_local_transaction(make_tx(1, 64), 0.0));
}
