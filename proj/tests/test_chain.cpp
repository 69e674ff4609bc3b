#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "seedmap/chain.hpp"

using namespace seedmap;

namespace {
SeedHit hit(std::uint32_t qb, std::uint32_t qe, std::uint64_t rp, bool rev = false) {
    SeedHit h;
    h.q_begin = qb;
    h.q_end = qe;
    h.ref_pos = rp;
    h.is_reverse = rev;
    h.interval_size = 1;
    return h;
}
}  // namespace

TEST_CASE("two hits on one diagonal 100 bases apart form one chain") {
    ChainSet out;
    chain_seeds({hit(0, 20, 1000), hit(100, 120, 1100)}, ChainParams{}, out);
    REQUIRE(out.chains.size() == 1);
    CHECK(out.chains[0].end - out.chains[0].begin == 2);
}

TEST_CASE("opposite strands never share a chain") {
    ChainSet out;
    chain_seeds({hit(0, 20, 1000), hit(100, 120, 1100, true)}, ChainParams{}, out);
    CHECK(out.chains.size() == 2);
}

TEST_CASE("hits beyond max_chain_gap start a new chain") {
    ChainParams params;
    params.max_chain_gap = 50;
    ChainSet out;
    chain_seeds({hit(0, 20, 1000), hit(30, 50, 1100)}, params, out);
    CHECK(out.chains.size() == 2);
}

TEST_CASE("excessive diagonal drift splits chains") {
    ChainParams params;
    params.band_width = 10;
    ChainSet out;
    // dr = 500, dq = 100 -> drift 400 > 10
    chain_seeds({hit(0, 20, 1000), hit(100, 120, 1500)}, params, out);
    CHECK(out.chains.size() == 2);
}

TEST_CASE("chain weight is query coverage net of overlaps") {
    ChainSet out;
    // spans [0,30) and [20,50): union 50, not 60
    chain_seeds({hit(0, 30, 1000), hit(20, 50, 1020)}, ChainParams{}, out);
    REQUIRE(out.chains.size() == 1);
    CHECK(out.chains[0].weight == 50);
}

TEST_CASE("chains come out sorted by descending weight") {
    ChainSet out;
    chain_seeds({hit(0, 10, 100), hit(0, 40, 5000)}, ChainParams{}, out);
    REQUIRE(out.chains.size() == 2);
    CHECK(out.chains[0].weight == 40);
    CHECK(out.chains[1].weight == 10);
}

TEST_CASE("every consecutive pair inside a produced chain satisfies compatibility") {
    std::mt19937 rng(99);
    ChainParams params;
    for (int iter = 0; iter < 1000; ++iter) {
        std::uniform_int_distribution<int> count(0, 30);
        std::uniform_int_distribution<std::uint32_t> q(0, 120);
        std::uniform_int_distribution<std::uint64_t> rp(0, 30000);
        std::vector<SeedHit> hits;
        const int n = count(rng);
        for (int i = 0; i < n; ++i) {
            const std::uint32_t qb = q(rng);
            hits.push_back(hit(qb, qb + 15 + (q(rng) % 20), rp(rng), (rng() & 1) != 0));
        }
        ChainSet out;
        chain_seeds(hits, params, out);

        std::size_t total = 0;
        for (const Chain& ch : out.chains) {
            total += ch.end - ch.begin;
            for (std::uint32_t i = ch.begin + 1; i < ch.end; ++i) {
                const SeedHit& prev = out.seeds[i - 1];
                const SeedHit& cur = out.seeds[i];
                REQUIRE(prev.is_reverse == cur.is_reverse);
                REQUIRE(cur.ref_pos > prev.ref_pos);
                REQUIRE(cur.q_begin > prev.q_begin);
                REQUIRE(cur.ref_pos - prev.ref_pos <= params.max_chain_gap);
                REQUIRE(cur.q_begin - prev.q_begin <= params.max_chain_gap);
                const std::uint64_t dr = cur.ref_pos - prev.ref_pos;
                const std::uint64_t dq = cur.q_begin - prev.q_begin;
                REQUIRE((dr > dq ? dr - dq : dq - dr) <= params.band_width);
            }
        }
        REQUIRE(total == hits.size());
    }
}

TEST_CASE("chaining is deterministic under input permutation") {
    std::mt19937 rng(123);
    std::vector<SeedHit> hits;
    for (int i = 0; i < 20; ++i)
        hits.push_back(hit(std::uint32_t(i * 7 % 90), std::uint32_t(i * 7 % 90 + 20),
                           std::uint64_t(i * 131 % 4000), i % 3 == 0));
    ChainSet a, b;
    chain_seeds(hits, ChainParams{}, a);
    std::shuffle(hits.begin(), hits.end(), rng);
    chain_seeds(hits, ChainParams{}, b);
    REQUIRE(a.chains.size() == b.chains.size());
    for (std::size_t i = 0; i < a.chains.size(); ++i) {
        CHECK(a.chains[i].weight == b.chains[i].weight);
        CHECK(a.chains[i].end - a.chains[i].begin == b.chains[i].end - b.chains[i].begin);
    }
}

TEST_CASE("seed flush at the read start emits only a right job") {
    ChainSet chains;
    chain_seeds({hit(0, 20, 1000)}, ChainParams{}, chains);
    std::vector<ExtensionJobDesc> jobs;
    select_extension_jobs(chains, 100, 50000, ChainParams{}, jobs);
    REQUIRE(jobs.size() == 1);
    CHECK_FALSE(jobs[0].has_left);
    CHECK(jobs[0].has_right);
}

TEST_CASE("seed covering the whole read emits no extension segments") {
    ChainSet chains;
    chain_seeds({hit(0, 100, 1000)}, ChainParams{}, chains);
    std::vector<ExtensionJobDesc> jobs;
    select_extension_jobs(chains, 100, 50000, ChainParams{}, jobs);
    REQUIRE(jobs.size() == 1);
    CHECK_FALSE(jobs[0].has_left);
    CHECK_FALSE(jobs[0].has_right);
}

TEST_CASE("light chains are dropped by drop_ratio") {
    ChainSet chains;
    // weight 100 chain vs weight 40 chain
    chain_seeds({hit(0, 100, 1000), hit(10, 50, 30000)}, ChainParams{}, chains);
    REQUIRE(chains.chains.size() == 2);
    REQUIRE(chains.chains[0].weight == 100);
    REQUIRE(chains.chains[1].weight == 40);
    std::vector<ExtensionJobDesc> jobs;
    ChainParams params;
    params.drop_ratio = 0.5;
    select_extension_jobs(chains, 120, 50000, params, jobs);
    REQUIRE(jobs.size() == 1);
    CHECK(jobs[0].seed.q_end == 100);
}

TEST_CASE("reference windows stay inside the reference on fuzzed inputs") {
    std::mt19937 rng(321);
    const std::uint64_t n_ref = 5000;
    for (int iter = 0; iter < 500; ++iter) {
        std::uniform_int_distribution<int> count(1, 20);
        std::uniform_int_distribution<std::uint32_t> q(0, 100);
        std::uniform_int_distribution<std::uint64_t> rp(0, n_ref - 40);
        std::vector<SeedHit> hits;
        const int n = count(rng);
        const std::uint32_t read_len = 120;
        for (int i = 0; i < n; ++i) {
            const std::uint32_t qb = q(rng);
            const std::uint32_t qe = std::min(read_len, qb + 20);
            if (qe <= qb) continue;
            hits.push_back(hit(qb, qe, rp(rng), (rng() & 1) != 0));
        }
        ChainSet chains;
        chain_seeds(hits, ChainParams{}, chains);
        std::vector<ExtensionJobDesc> jobs;
        select_extension_jobs(chains, read_len, n_ref, ChainParams{}, jobs);
        for (const ExtensionJobDesc& jd : jobs) {
            REQUIRE(jd.oriented_begin < jd.oriented_end);
            REQUIRE(jd.oriented_end <= read_len);
            if (jd.has_left) {
                REQUIRE(jd.left_ref_begin <= jd.seed.ref_pos);
                REQUIRE(jd.oriented_begin > 0);  // non-empty query segment
            }
            if (jd.has_right) {
                REQUIRE(jd.right_ref_begin >= jd.seed.ref_pos);
                REQUIRE(jd.right_ref_begin <= jd.right_ref_end);
                REQUIRE(jd.right_ref_end <= n_ref);
                REQUIRE(jd.oriented_end < read_len);  // non-empty query segment
            }
        }
    }
}
