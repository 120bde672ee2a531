#include "codecast/codec.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace codecast {

DegreeDistribution::DegreeDistribution(std::vector<double> pmf) : pmf_(std::move(pmf)) {
    if (pmf_.empty()) throw std::runtime_error("degree distribution: empty pmf");
    cdf_.resize(pmf_.size());
    double acc = 0.0;
    for (size_t i = 0; i < pmf_.size(); i++) {
        if (pmf_[i] < 0.0) throw std::runtime_error("degree distribution: negative mass");
        acc += pmf_[i];
        cdf_[i] = acc;
    }
    if (std::abs(acc - 1.0) > 1e-9)
        throw std::runtime_error("degree distribution: pmf does not sum to 1");
    cdf_.back() = 1.0;
}

DegreeDistribution DegreeDistribution::robust_soliton(uint32_t k, double c, double delta,
                                                      uint32_t max_degree) {
    if (k == 0) throw std::runtime_error("robust_soliton: k must be positive");
    if (delta <= 0.0 || delta >= 1.0)
        throw std::runtime_error("robust_soliton: delta must be in (0, 1)");
    if (c <= 0.0) throw std::runtime_error("robust_soliton: c must be positive");
    if (max_degree == 0) throw std::runtime_error("robust_soliton: max_degree must be positive");

    if (k == 1) return DegreeDistribution(std::vector<double>{1.0});

    // Ideal soliton rho plus the spike term tau, normalized by beta.
    double S = c * std::log(k / delta) * std::sqrt(static_cast<double>(k));
    uint32_t spike = static_cast<uint32_t>(std::ceil(k / S));
    std::vector<double> w(k);
    for (uint32_t i = 1; i <= k; i++) {
        double rho = (i == 1) ? 1.0 / k : 1.0 / (static_cast<double>(i) * (i - 1));
        double tau = 0.0;
        if (static_cast<double>(i) < k / S)
            tau = S / (static_cast<double>(i) * k);
        else if (i == spike)
            tau = S * std::log(S / delta) / k;
        w[i - 1] = rho + tau;
    }
    double beta = 0.0;
    for (double v : w) beta += v;
    for (double& v : w) v /= beta;

    // Truncate to degrees 1..min(k, max_degree) and renormalize.
    uint32_t d = std::min(k, max_degree);
    w.resize(d);
    double mass = 0.0;
    for (double v : w) mass += v;
    for (double& v : w) v /= mass;
    return DegreeDistribution(std::move(w));
}

uint32_t DegreeDistribution::sample(Rng& rng) const {
    double u = rng.uniform();
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.end()) --it;
    return static_cast<uint32_t>(it - cdf_.begin()) + 1;
}

CodingWindow::CodingWindow(uint32_t k) : k_(k) {
    if (k == 0) throw std::runtime_error("coding window: k must be positive");
}

bool CodingWindow::insert(const Transaction& tx) {
    if (!tx.data) throw std::runtime_error("coding window: null transaction payload");
    return insert(tx, sha256(*tx.data));
}

bool CodingWindow::insert(const Transaction& tx, const Digest& digest) {
    if (!tx.data) throw std::runtime_error("coding window: null transaction payload");
    if (!seen_.insert(digest).second) return false;
    if (entries_.size() == k_) entries_.pop_front();
    entries_.push_back(tx);
    return true;
}

Codeword encode(const CodingWindow& window, const DegreeDistribution& dist, Rng& rng,
                const HashKey& link_key, uint32_t id_bytes, uint64_t seqno) {
    if (window.empty()) throw std::runtime_error("encode: empty coding window");
    if (id_bytes == 0 || id_bytes > 8)
        throw std::runtime_error("encode: id_bytes must be in 1..8");

    const auto& entries = window.entries();
    uint32_t n = static_cast<uint32_t>(entries.size());
    uint32_t degree = std::min(dist.sample(rng), n);

    // Partial Fisher-Yates over the index range: the first `degree` slots
    // end up holding a uniform distinct sample.
    std::vector<uint32_t> idx(n);
    for (uint32_t i = 0; i < n; i++) idx[i] = i;
    for (uint32_t i = 0; i < degree; i++) {
        uint32_t j = i + static_cast<uint32_t>(rng.uniform_index(n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(degree);
    std::sort(idx.begin(), idx.end());  // IDs listed oldest-first

    Codeword cw;
    cw.seqno = seqno;
    cw.ids.reserve(degree);
    cw.payload = *entries[idx[0]].data;
    cw.ids.push_back(short_id(link_key, *entries[idx[0]].data, id_bytes));
    for (uint32_t i = 1; i < degree; i++) {
        const Bytes& p = *entries[idx[i]].data;
        xor_into(cw.payload, p);
        cw.ids.push_back(short_id(link_key, p, id_bytes));
    }
    return cw;
}

Bytes serialize_codeword(const Codeword& cw, uint32_t id_bytes) {
    if (cw.ids.empty()) throw std::runtime_error("serialize_codeword: degree 0");
    if (cw.ids.size() > 0xffff) throw std::runtime_error("serialize_codeword: degree too large");
    Bytes out;
    out.reserve(codeword_wire_size(static_cast<uint32_t>(cw.ids.size()), id_bytes,
                                   static_cast<uint32_t>(cw.payload.size())));
    put_u64_be(out, cw.seqno);
    put_u16_be(out, static_cast<uint16_t>(cw.ids.size()));
    for (uint64_t id : cw.ids)
        for (int shift = 8 * static_cast<int>(id_bytes) - 8; shift >= 0; shift -= 8)
            out.push_back(static_cast<uint8_t>(id >> shift));
    out.insert(out.end(), cw.payload.begin(), cw.payload.end());
    return out;
}

Codeword deserialize_codeword(const Bytes& wire, uint32_t id_bytes, uint32_t payload_size) {
    if (wire.size() < 10) throw std::runtime_error("deserialize_codeword: truncated header");
    Codeword cw;
    cw.seqno = get_u64_be(wire.data());
    uint32_t degree = get_u16_be(wire.data() + 8);
    if (degree == 0) throw std::runtime_error("deserialize_codeword: degree 0");
    if (wire.size() != codeword_wire_size(degree, id_bytes, payload_size))
        throw std::runtime_error("deserialize_codeword: length mismatch");
    const uint8_t* p = wire.data() + 10;
    cw.ids.reserve(degree);
    for (uint32_t i = 0; i < degree; i++) {
        uint64_t id = 0;
        for (uint32_t b = 0; b < id_bytes; b++) id = (id << 8) | p[b];
        cw.ids.push_back(id);
        p += id_bytes;
    }
    cw.payload.assign(p, p + payload_size);
    return cw;
}

}  // namespace codecast
