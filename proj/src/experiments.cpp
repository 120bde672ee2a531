#include "codecast/experiments.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "codecast/codec.hpp"
#include "codecast/decoder.hpp"
#include "codecast/rate_control.hpp"
#include "codecast/sim/event_queue.hpp"

namespace codecast {

namespace {

HashKey draw_key(Rng& rng) {
    Bytes b = rng.random_bytes(16);
    HashKey k;
    std::copy(b.begin(), b.end(), k.begin());
    return k;
}

// Decoder tuned for offline measurement: no timeouts, no pending eviction,
// index large enough to cover the whole stream.
DecoderConfig offline_decoder_config(uint32_t id_bytes, uint32_t tx_size, uint32_t peel_window) {
    DecoderConfig dc;
    dc.id_bytes = id_bytes;
    dc.payload_size = tx_size;
    dc.peel_window = peel_window;
    dc.timeout = 1e18;
    dc.pending_cap = 1u << 30;
    dc.keep_decoded_log = false;
    return dc;
}

}  // namespace

LtOverheadResult lt_overhead(uint32_t k, double c, double delta, uint32_t n_txs,
                             uint32_t tx_size, uint64_t seed) {
    if (k == 0 || n_txs < k) throw std::invalid_argument("lt_overhead: need at least k transactions");
    DegreeDistribution dist = DegreeDistribution::robust_soliton(k, c, delta, k);
    LtOverheadResult res;

    {  // Block coding: fresh window and decoder per k-transaction generation.
        Rng rng(derive_seed(seed, 31));
        HashKey key = draw_key(rng);
        uint32_t blocks = n_txs / k;
        uint64_t sent = 0;
        for (uint32_t b = 0; b < blocks; ++b) {
            CodingWindow win(k);
            for (uint32_t i = 0; i < k; ++i)
                win.insert({std::make_shared<Bytes>(rng.random_bytes(tx_size)), 0.0});
            DecoderState dec(offline_decoder_config(4, tx_size, 2 * k));
            uint32_t link = dec.add_link(key);
            uint64_t seqno = 0;
            uint32_t got = 0;
            while (got < k) {
                Codeword cw = encode(win, dist, rng, key, 4, seqno++);
                ++sent;
                got += static_cast<uint32_t>(dec.ingest(link, cw, 0.0).size());
            }
        }
        res.block = double(sent) / double(uint64_t(blocks) * k);
    }

    {  // Windowed coding over one long stream, gated on window eviction.
        Rng rng(derive_seed(seed, 32));
        HashKey key = draw_key(rng);
        std::vector<BytesPtr> txs;
        txs.reserve(n_txs);
        std::unordered_map<Digest, uint32_t, DigestHash> index;
        for (uint32_t i = 0; i < n_txs; ++i) {
            txs.push_back(std::make_shared<Bytes>(rng.random_bytes(tx_size)));
            index.emplace(sha256(*txs.back()), i);
        }
        CodingWindow win(k);
        DecoderState dec(offline_decoder_config(4, tx_size, n_txs));
        uint32_t link = dec.add_link(key);
        std::vector<char> done(n_txs, 0);
        uint64_t sent = 0, seqno = 0;
        auto pump_until = [&](uint32_t target) {
            while (!done[target]) {
                Codeword cw = encode(win, dist, rng, key, 4, seqno++);
                ++sent;
                for (const BytesPtr& tx : dec.ingest(link, cw, 0.0)) done[index.at(sha256(*tx))] = 1;
            }
        };
        for (uint32_t i = 0; i < n_txs; ++i) {
            if (i >= k) pump_until(i - k);  // the oldest entry is about to slide out
            win.insert({txs[i], 0.0});
        }
        for (uint32_t i = n_txs > k ? n_txs - k : 0; i < n_txs; ++i) pump_until(i);
        res.windowed = double(sent) / double(n_txs);
    }
    return res;
}

namespace {

// One run of the two-sender demo from a given initial rate pair.
ControllerDemoRun demo_run(const ControllerDemoConfig& c, double init_a, double init_b) {
    ControllerDemoRun run;
    run.init_a = init_a;
    run.init_b = init_b;

    sim::EventQueue q;
    Rng rng(derive_seed(c.seed, 41));
    HashKey key_a = draw_key(rng), key_b = draw_key(rng);
    DegreeDistribution dist = DegreeDistribution::robust_soliton(c.k, 0.03, 0.5, c.k);
    CodingWindow win_a(c.k), win_b(c.k);

    DecoderConfig dc;
    dc.id_bytes = c.id_bytes;
    dc.payload_size = c.tx_size;
    dc.peel_window = 1u << 20;
    dc.timeout = c.timeout;
    dc.pending_cap = 10 * c.k;
    dc.keep_decoded_log = false;
    DecoderState dec(dc);
    uint32_t link_a = dec.add_link(key_a), link_b = dec.add_link(key_b);

    RateControllerConfig rc;
    rc.gamma = c.gamma;
    rc.alpha = c.alpha;
    rc.r_min = 1.0;
    rc.r_max = 1e6;
    rc.initial_rate = init_a;
    RateController ctl_a(rc);
    rc.initial_rate = init_b;
    RateController ctl_b(rc);

    // Transaction arrivals: unique flows into one window, a shared flow into
    // both.  Generated up front for determinism.
    auto schedule_flow = [&](double rate, int target) {
        double t = 0.0;
        while (true) {
            t += rng.exponential(rate);
            if (t >= c.duration) break;
            auto tx = std::make_shared<Bytes>(rng.random_bytes(c.tx_size));
            q.at(t, [&, target, tx, t] {
                if (target != 1) win_a.insert({tx, t});
                if (target != 0) win_b.insert({tx, t});
            });
        }
    };
    schedule_flow(c.rate_a_unique, 0);
    schedule_flow(c.rate_b_unique, 1);
    schedule_flow(c.rate_shared, 2);

    uint64_t seq_a = 0, seq_b = 0;
    uint64_t recv_a = 0, recv_b = 0;  // codewords ingested at the peer
    uint64_t loss_a = 0, loss_b = 0;  // loss events per inbound link

    std::function<void(int)> slot_fn;
    slot_fn = [&](int which) {
        CodingWindow& win = which == 0 ? win_a : win_b;
        RateController& ctl = which == 0 ? ctl_a : ctl_b;
        double now = q.now();
        if (!win.empty()) {
            Codeword cw = encode(win, dist, rng, which == 0 ? key_a : key_b, c.id_bytes,
                                 which == 0 ? seq_a++ : seq_b++);
            q.at(now + c.link_delay, [&, which, cw = std::move(cw)] {
                (which == 0 ? recv_a : recv_b)++;
                dec.ingest(which == 0 ? link_a : link_b, cw, q.now());
            });
            ctl.on_codeword_sent();
        }
        q.at(ctl.next_send_time(now), [&, which] { slot_fn(which); });
    };
    q.at(0.0, [&] { slot_fn(0); });
    q.at(0.0, [&] { slot_fn(1); });

    std::function<void()> tick_fn;
    tick_fn = [&] {
        for (const LossEvent& ev : dec.scan_timeouts(q.now())) {
            (ev.link == link_a ? loss_a : loss_b)++;
            // The report travels back to the sender before it acts on it.
            q.at(q.now() + c.link_delay, [&, link = ev.link] {
                (link == link_a ? ctl_a : ctl_b).on_loss_event();
            });
        }
        if (q.now() < c.duration) q.after(c.timeout / 2.0, tick_fn);
    };
    q.after(c.timeout / 2.0, tick_fn);

    uint64_t pa = 0, pb = 0, pla = 0, plb = 0;  // previous sample cumulative counters
    std::function<void()> sample_fn;
    sample_fn = [&] {
        double la = recv_a > pa ? double(loss_a - pla) / double(recv_a - pa) : 0.0;
        double lb = recv_b > pb ? double(loss_b - plb) / double(recv_b - pb) : 0.0;
        run.samples.push_back({q.now(), ctl_a.rate(), ctl_b.rate(), la, lb});
        pa = recv_a;
        pb = recv_b;
        pla = loss_a;
        plb = loss_b;
        if (q.now() < c.duration) q.after(c.sample_interval, sample_fn);
    };
    q.after(c.sample_interval, sample_fn);

    // Cumulative counters at the start of the steady-state window.
    double steady_start = c.duration * (1.0 - c.steady_window);
    uint64_t sa = 0, sb = 0, sla = 0, slb = 0;
    q.at(steady_start, [&] {
        sa = recv_a;
        sb = recv_b;
        sla = loss_a;
        slb = loss_b;
    });

    q.run_until(c.duration);

    double rate_sum_a = 0.0, rate_sum_b = 0.0;
    size_t n = 0;
    for (const auto& s : run.samples) {
        if (s[0] < steady_start) continue;
        rate_sum_a += s[1];
        rate_sum_b += s[2];
        ++n;
    }
    run.steady_rate_a = n ? rate_sum_a / double(n) : 0.0;
    run.steady_rate_b = n ? rate_sum_b / double(n) : 0.0;
    run.steady_loss_a = recv_a > sa ? double(loss_a - sla) / double(recv_a - sa) : 0.0;
    run.steady_loss_b = recv_b > sb ? double(loss_b - slb) / double(recv_b - sb) : 0.0;
    return run;
}

}  // namespace

ControllerDemoResult controller_demo(const ControllerDemoConfig& cfg) {
    ControllerDemoResult res;
    for (auto [ia, ib] : cfg.inits) res.runs.push_back(demo_run(cfg, ia, ib));
    return res;
}

BenchResult run_bench(uint32_t n_txs, uint32_t k, uint32_t tx_size, uint64_t seed) {
    if (k == 0 || n_txs < k) throw std::invalid_argument("bench: need at least k transactions");
    using clock = std::chrono::steady_clock;
    BenchResult res;
    res.txs = n_txs;

    Rng rng(derive_seed(seed, 51));
    HashKey key = draw_key(rng);
    DegreeDistribution dist = DegreeDistribution::robust_soliton(k, 0.03, 0.5, k);
    std::vector<BytesPtr> txs;
    txs.reserve(n_txs);
    std::unordered_map<Digest, uint32_t, DigestHash> index;
    for (uint32_t i = 0; i < n_txs; ++i) {
        txs.push_back(std::make_shared<Bytes>(rng.random_bytes(tx_size)));
        index.emplace(sha256(*txs.back()), i);
    }

    // Pass 1: sliding-window encode, gated so the stream is decodable with
    // bounded lag.  Only the encode() calls are timed.
    std::vector<Codeword> stream;
    stream.reserve(size_t(n_txs) * 2);
    CodingWindow win(k);
    DecoderState gate(offline_decoder_config(4, tx_size, 10 * k));
    uint32_t gate_link = gate.add_link(key);
    std::vector<char> done(n_txs, 0);
    uint64_t seqno = 0;
    int64_t encode_ns = 0;
    auto pump_until = [&](uint32_t target) {
        while (!done[target]) {
            auto t0 = clock::now();
            Codeword cw = encode(win, dist, rng, key, 4, seqno++);
            encode_ns += std::chrono::duration_cast<std::chrono::nanoseconds>(clock::now() - t0).count();
            for (const BytesPtr& tx : gate.ingest(gate_link, cw, 0.0)) done[index.at(sha256(*tx))] = 1;
            stream.push_back(std::move(cw));
        }
    };
    for (uint32_t i = 0; i < n_txs; ++i) {
        if (i >= k) pump_until(i - k);
        win.insert({txs[i], 0.0});
    }
    for (uint32_t i = n_txs > k ? n_txs - k : 0; i < n_txs; ++i) pump_until(i);

    res.codewords = stream.size();
    res.encode_seconds = double(encode_ns) * 1e-9;
    res.encode_codewords_per_s = res.encode_seconds > 0 ? double(res.codewords) / res.encode_seconds : 0.0;
    res.codewords_per_tx = double(res.codewords) / double(n_txs);

    // Pass 2: decode the recorded stream from scratch, timed end to end.
    DecoderState dec(offline_decoder_config(4, tx_size, 10 * k));
    uint32_t link = dec.add_link(key);
    std::vector<BytesPtr> decoded;
    decoded.reserve(n_txs);
    auto d0 = clock::now();
    for (const Codeword& cw : stream)
        for (BytesPtr& tx : dec.ingest(link, cw, 0.0)) decoded.push_back(std::move(tx));
    res.decode_seconds =
        std::chrono::duration_cast<std::chrono::nanoseconds>(clock::now() - d0).count() * 1e-9;
    res.decode_txs_per_s = res.decode_seconds > 0 ? double(decoded.size()) / res.decode_seconds : 0.0;
    res.decode_megabits_per_s = res.decode_txs_per_s * double(tx_size) * 8.0 / 1e6;

    std::unordered_set<Digest, DigestHash> want;
    for (const BytesPtr& tx : txs) want.insert(sha256(*tx));
    std::unordered_set<Digest, DigestHash> got;
    for (const BytesPtr& tx : decoded) got.insert(sha256(*tx));
    res.correct = decoded.size() == n_txs && got == want;
    return res;
}

}  // namespace codecast
