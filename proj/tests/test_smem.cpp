#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <set>

#include "oracles.hpp"
#include "seedmap/refseq.hpp"
#include "seedmap/smem.hpp"

using namespace seedmap;

namespace {

struct Fixture {
    ConcatSequence cat;
    FMIndex idx;
    oracle::SuffixIndex suffixes;

    explicit Fixture(std::vector<BaseCode> ref_bases)
        : cat(make_cat(std::move(ref_bases))),
          idx(FMIndex::build(cat)),
          suffixes(cat.bases) {}

    static ConcatSequence make_cat(std::vector<BaseCode> ref_bases) {
        ReferenceSequence ref;
        ref.bases = std::move(ref_bases);
        ref.boundaries.push_back({"r", 0});
        return build_concat(ref);
    }
};

std::set<oracle::SmemTuple> as_tuples(const std::vector<Smem>& smems) {
    std::set<oracle::SmemTuple> out;
    for (const Smem& m : smems) out.insert({m.q_begin, m.q_end, m.interval.s});
    return out;
}

}  // namespace

TEST_CASE("backward extension matches the brute-force interval on random triples") {
    std::mt19937 rng(101);
    int checked = 0;
    while (checked < 1000) {
        std::uniform_int_distribution<std::size_t> len(4, 250);
        Fixture f(oracle::random_ref(rng, len(rng)));
        const auto& text = f.cat.bases;

        for (int q = 0; q < 25 && checked < 1000; ++q) {
            std::uniform_int_distribution<std::size_t> pick(0, text.size() - 1);
            const std::size_t b = pick(rng);
            std::uniform_int_distribution<std::size_t> plen(
                1, std::min<std::size_t>(text.size() - b, 8));
            const std::size_t m = plen(rng);
            const std::vector<BaseCode> x(text.begin() + std::ptrdiff_t(b),
                                          text.begin() + std::ptrdiff_t(b + m));

            BiInterval iv = base_interval(f.idx, x[m - 1]);
            for (std::size_t i = m - 1; i-- > 0;) iv = backward_ext(f.idx, iv, x[i]);

            std::uniform_int_distribution<int> base(0, 3);
            const BaseCode c = BaseCode(base(rng));
            std::vector<BaseCode> bx{c};
            bx.insert(bx.end(), x.begin(), x.end());

            const BiInterval ext = backward_ext(f.idx, iv, c);
            const auto [k, s] = f.suffixes.range(bx);
            REQUIRE(ext.s == s);
            if (s > 0) REQUIRE(ext.k == k);
            const auto [lk, ls] = f.suffixes.range(reverse_complement(bx));
            REQUIRE(ls == s);
            if (s > 0) REQUIRE(ext.l == lk);
            ++checked;
        }
    }
}

TEST_CASE("extending by a base that never precedes the pattern gives a dead interval") {
    // Text AAAA...: nothing ever precedes with C.
    Fixture f(encode_string("AAAAAAAA"));
    BiInterval iv = base_interval(f.idx, kBaseA);
    CHECK(backward_ext(f.idx, iv, kBaseC).s == 0);
}

TEST_CASE("forward extension equals interval of appended base") {
    std::mt19937 rng(202);
    for (int iter = 0; iter < 40; ++iter) {
        std::uniform_int_distribution<std::size_t> len(4, 200);
        Fixture f(oracle::random_ref(rng, len(rng)));
        const auto& text = f.cat.bases;
        std::uniform_int_distribution<std::size_t> pick(0, text.size() - 2);
        const std::size_t b = pick(rng);
        std::uniform_int_distribution<std::size_t> plen(
            1, std::min<std::size_t>(text.size() - b - 1, 6));
        const std::size_t m = plen(rng);
        std::vector<BaseCode> x(text.begin() + std::ptrdiff_t(b),
                                text.begin() + std::ptrdiff_t(b + m));

        BiInterval iv = base_interval(f.idx, x[m - 1]);
        for (std::size_t i = m - 1; i-- > 0;) iv = backward_ext(f.idx, iv, x[i]);

        std::uniform_int_distribution<int> base(0, 3);
        const BaseCode c = BaseCode(base(rng));
        std::vector<BaseCode> xb = x;
        xb.push_back(c);
        const BiInterval ext = forward_ext(f.idx, iv, c);
        const auto [k, s] = f.suffixes.range(xb);
        REQUIRE(ext.s == s);
        if (s > 0) {
            REQUIRE(ext.k == k);
            // the l side holds the reverse complement's interval
            const auto [lk, ls] = f.suffixes.range(reverse_complement(xb));
            REQUIRE(ext.l == lk);
            REQUIRE(ls == s);
        }
    }
}

TEST_CASE("forward_ext on the single-base interval reproduces two-base intervals") {
    Fixture f(encode_string("ATACGAC"));
    const BiInterval a = base_interval(f.idx, kBaseA);
    const BiInterval ac = forward_ext(f.idx, a, kBaseC);
    const auto [k, s] = f.suffixes.range(encode_string("AC"));
    CHECK(ac.k == k);
    CHECK(ac.s == s);
}

TEST_CASE("smem_at finds the whole read when it matches uniquely") {
    std::mt19937 rng(303);
    const auto ref = oracle::random_ref(rng, 2000);
    Fixture f(ref);
    const std::vector<BaseCode> read(ref.begin() + 100, ref.begin() + 200);

    SmemParams params;
    params.min_seed_len = 19;
    for (std::size_t i0 : {std::size_t(0), std::size_t(50), std::size_t(99)}) {
        const auto smems = smem_at(f.idx, read, i0, params);
        REQUIRE(smems.size() == 1);
        CHECK(smems[0].q_begin == 0);
        CHECK(smems[0].q_end == read.size());
        CHECK(smems[0].interval.s >= 1);
    }
}

TEST_CASE("reads shorter than min_seed_len yield nothing") {
    Fixture f(encode_string("ACGTACGTACGTACGTACGTACGT"));
    SmemParams params;
    params.min_seed_len = 19;
    const std::vector<BaseCode> read = encode_string("ACGTACGT");
    CHECK(all_smems(f.idx, read, params).empty());
}

TEST_CASE("all-ambiguous read yields nothing") {
    Fixture f(encode_string("ACGTACGTACGT"));
    const std::vector<BaseCode> read(30, kBaseAmbiguous);
    CHECK(all_smems(f.idx, read, SmemParams{}).empty());
}

TEST_CASE("two unique matches split by an N are both found") {
    std::mt19937 rng(404);
    const auto ref = oracle::random_ref(rng, 4000);
    Fixture f(ref);
    std::vector<BaseCode> read(ref.begin() + 500, ref.begin() + 530);
    read.push_back(kBaseAmbiguous);
    read.insert(read.end(), ref.begin() + 2500, ref.begin() + 2530);

    SmemParams params;
    params.min_seed_len = 19;
    const auto smems = all_smems(f.idx, read, params);
    const auto expected = oracle::smem_oracle(f.suffixes, read, params.min_seed_len);
    REQUIRE(as_tuples(smems) == std::set<oracle::SmemTuple>(expected.begin(), expected.end()));
    REQUIRE(smems.size() >= 2);
}

TEST_CASE("all_smems equals the brute-force enumeration on random instances") {
    std::mt19937 rng(505);
    std::uniform_int_distribution<std::size_t> ref_len(50, 3000);
    std::uniform_int_distribution<std::size_t> read_len(20, 151);
    std::uniform_real_distribution<double> noise(0.0, 0.10);

    for (int iter = 0; iter < 300; ++iter) {
        auto ref = oracle::random_ref(rng, ref_len(rng));
        if (iter % 5 == 0) ref[ref.size() / 3] = kBaseAmbiguous;
        Fixture f(std::move(ref));

        const std::size_t rl = std::min(read_len(rng), f.cat.n_ref);
        auto read = oracle::sample_read(rng, std::vector<BaseCode>(f.cat.bases.begin(),
                                                                   f.cat.bases.begin() +
                                                                       std::ptrdiff_t(f.cat.n_ref)),
                                        rl, noise(rng), true, std::uint64_t(iter))
                        .bases;
        if (iter % 7 == 0) read[read.size() / 2] = kBaseAmbiguous;

        SmemParams params;
        params.min_seed_len = 1 + std::uint32_t(iter % 25);
        const auto got = as_tuples(all_smems(f.idx, read, params));
        const auto expected = oracle::smem_oracle(f.suffixes, read, params.min_seed_len);
        REQUIRE(got == std::set<oracle::SmemTuple>(expected.begin(), expected.end()));
    }
}

TEST_CASE("no returned SMEM is contained in another") {
    std::mt19937 rng(606);
    for (int iter = 0; iter < 50; ++iter) {
        Fixture f(oracle::random_ref(rng, 1000));
        const auto read = oracle::sample_read(
            rng,
            std::vector<BaseCode>(f.cat.bases.begin(),
                                  f.cat.bases.begin() + std::ptrdiff_t(f.cat.n_ref)),
            100, 0.05, true, std::uint64_t(iter)).bases;
        SmemParams params;
        params.min_seed_len = 1;
        const auto smems = all_smems(f.idx, read, params);
        for (const Smem& a : smems)
            for (const Smem& b : smems)
                if (&a != &b)
                    REQUIRE_FALSE((a.q_begin <= b.q_begin && b.q_end <= a.q_end &&
                                   (a.q_begin != b.q_begin || a.q_end != b.q_end)));
    }
}

TEST_CASE("prefetch hints never change output") {
    std::mt19937 rng(707);
    for (int iter = 0; iter < 30; ++iter) {
        Fixture f(oracle::random_ref(rng, 800));
        const auto read = oracle::sample_read(
            rng,
            std::vector<BaseCode>(f.cat.bases.begin(),
                                  f.cat.bases.begin() + std::ptrdiff_t(f.cat.n_ref)),
            80, 0.03, true, std::uint64_t(iter)).bases;
        SmemParams on, off;
        on.prefetch = true;
        off.prefetch = false;
        on.min_seed_len = off.min_seed_len = 10;
        const auto a = all_smems(f.idx, read, on);
        const auto b = all_smems(f.idx, read, off);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            REQUIRE(a[i].q_begin == b[i].q_begin);
            REQUIRE(a[i].q_end == b[i].q_end);
            REQUIRE(a[i].interval == b[i].interval);
        }
    }
}

TEST_CASE("smem output is pure across repeated calls") {
    std::mt19937 rng(808);
    Fixture f(oracle::random_ref(rng, 1500));
    const auto read = oracle::sample_read(
        rng,
        std::vector<BaseCode>(f.cat.bases.begin(),
                              f.cat.bases.begin() + std::ptrdiff_t(f.cat.n_ref)),
        120, 0.02, false, 0).bases;
    const auto first = as_tuples(all_smems(f.idx, read, SmemParams{}));
    for (int i = 0; i < 5; ++i) CHECK(as_tuples(all_smems(f.idx, read, SmemParams{})) == first);
}
