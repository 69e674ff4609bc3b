#include <chrono>
#include <cstdint>
#include <deque>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "seedmap/bsw_batch.hpp"
#include "seedmap/pipeline.hpp"

namespace {

using namespace seedmap;

constexpr std::uint64_t kDefaultMemCap = 8ull << 30;  // bytes

std::uint64_t mem_cap() {
    if (const char* env = std::getenv("SEEDMAP_MEM_CAP")) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end && *end == '\0' && v > 0) return v;
        throw ParseError("SEEDMAP_MEM_CAP must be a positive byte count");
    }
    return kDefaultMemCap;
}

int cmd_index(const std::string& fasta_path, const std::string& out_path) {
    std::ifstream in(fasta_path);
    if (!in) throw IoError("cannot open FASTA file: " + fasta_path);
    const ReferenceSequence ref = parse_fasta(in);
    const ConcatSequence cat = build_concat(ref);

    const std::uint64_t estimate = estimate_index_bytes(cat.bases.size());
    if (estimate > mem_cap())
        throw IoError("index would need " + std::to_string(estimate) +
                      " bytes, above the memory cap of " + std::to_string(mem_cap()));

    const FMIndex idx = FMIndex::build(cat);
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw IoError("cannot open output file: " + out_path);
    idx.serialize(out);
    out.close();
    if (!out) throw IoError("write failed: " + out_path);

    // Record names and offsets travel in a text sidecar; the binary index
    // format has no name table.
    std::ofstream meta(out_path + ".meta");
    if (!meta) throw IoError("cannot open output file: " + out_path + ".meta");
    for (const RecordBoundary& b : ref.boundaries) meta << b.name << '\t' << b.offset << '\n';
    meta.close();
    if (!meta) throw IoError("write failed: " + out_path + ".meta");

    std::cout << "n_ref\t" << idx.n_ref << "\nn\t" << idx.n << "\nbuckets\t"
              << idx.occ_buckets.size() << "\n";
    return 0;
}

struct LoadedIndex {
    FMIndex idx;
    std::vector<BaseCode> ref_bases;  // forward reference, reconstructed
    std::vector<RecordBoundary> boundaries;
};

LoadedIndex load_index(const std::string& index_path) {
    LoadedIndex li;
    std::ifstream in(index_path, std::ios::binary);
    if (!in) throw IoError("cannot open index file: " + index_path);
    li.idx = FMIndex::deserialize(in);

    const std::vector<BaseCode> concat = li.idx.inverse_bwt();
    if (concat.size() < li.idx.n_ref) throw ParseError("index: reconstruction shorter than n_ref");
    li.ref_bases.assign(concat.begin(), concat.begin() + std::ptrdiff_t(li.idx.n_ref));

    std::ifstream meta(index_path + ".meta");
    if (meta) {
        std::string line;
        while (std::getline(meta, line)) {
            if (line.empty()) continue;
            const auto tab = line.find('\t');
            if (tab == std::string::npos)
                throw ParseError("index meta: malformed line: " + line);
            li.boundaries.push_back({line.substr(0, tab),
                                     std::strtoull(line.c_str() + tab + 1, nullptr, 10)});
        }
    }
    if (li.boundaries.empty()) li.boundaries.push_back({"ref", 0});
    return li;
}

struct MemConfig {
    MapperParams params;
    unsigned threads = 1;
    std::size_t batch_size = 512;
    std::size_t chunk_reads = 1'000'000;
};

void add_mapper_flags(CLI::App* cmd, MemConfig& cfg, std::string& prefetch) {
    cmd->add_option("-t,--threads", cfg.threads, "worker threads")->default_val(1)
        ->check(CLI::Range(1u, 1024u));
    cmd->add_option("-k,--min-seed-len", cfg.params.smem.min_seed_len, "minimum seed length")
        ->default_val(19)->check(CLI::Range(1u, 512u));
    cmd->add_option("--max-occ", cfg.params.smem.max_occ, "max seed occurrences used")
        ->default_val(500)->check(CLI::PositiveNumber);
    cmd->add_option("--min-intv", cfg.params.smem.min_intv, "minimum live interval size")
        ->default_val(1)->check(CLI::PositiveNumber);
    cmd->add_option("-A,--match", cfg.params.bsw.match, "match score")->default_val(1)
        ->check(CLI::PositiveNumber);
    cmd->add_option("-B,--mismatch", cfg.params.bsw.mismatch, "mismatch penalty")
        ->default_val(4)->check(CLI::NonNegativeNumber);
    cmd->add_option("-O,--gap-open", cfg.params.bsw.gap_open, "gap open penalty")
        ->default_val(6)->check(CLI::NonNegativeNumber);
    cmd->add_option("-E,--gap-extend", cfg.params.bsw.gap_extend, "gap extend penalty")
        ->default_val(1)->check(CLI::NonNegativeNumber);
    cmd->add_option("-w,--band-width", cfg.params.bsw.band_width, "alignment band width")
        ->default_val(100)->check(CLI::PositiveNumber);
    cmd->add_option("-z,--zdrop", cfg.params.bsw.zdrop, "z-drop abort threshold")
        ->default_val(100)->check(CLI::PositiveNumber);
    cmd->add_option("--prefetch", prefetch, "occurrence-table prefetch hints")
        ->default_val("on")->check(CLI::IsMember({"on", "off"}));
    cmd->add_option("--batch-size", cfg.batch_size, "reads per batch")->default_val(512)
        ->check(CLI::PositiveNumber);
    cmd->add_option("--lane-width", cfg.params.lane_width, "batched-extension lane width")
        ->default_val(16)->check(CLI::IsMember({1, 8, 16, 32, 64}));
    cmd->add_option("--chunk-reads", cfg.chunk_reads, "reads per scheduling chunk")
        ->default_val(1'000'000)->check(CLI::PositiveNumber);
}

void finish_config(MemConfig& cfg, const std::string& prefetch) {
    cfg.params.smem.prefetch = prefetch == "on";
    cfg.params.chain.band_width = std::uint64_t(cfg.params.bsw.band_width);
}

int cmd_mem(const std::string& index_path, const std::string& fastq_path, const MemConfig& cfg) {
    const LoadedIndex li = load_index(index_path);
    std::ifstream fq(fastq_path);
    if (!fq) throw IoError("cannot open FASTQ file: " + fastq_path);

    FastqBatchReader reader(fq, cfg.batch_size);
    std::vector<ReadRecord> chunk, batch;
    std::string out;
    for (;;) {
        chunk.clear();
        while (chunk.size() < cfg.chunk_reads && reader.next_batch(batch))
            for (ReadRecord& r : batch) chunk.push_back(std::move(r));
        if (chunk.empty()) break;
        out.clear();
        process_chunk(li.idx, li.ref_bases, li.boundaries, cfg.params, chunk, cfg.batch_size,
                      cfg.threads, out);
        std::cout.write(out.data(), std::streamsize(out.size()));
    }
    std::cout.flush();
    if (!std::cout) throw IoError("stdout write failed");
    return 0;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Times each pipeline stage in isolation on the inputs the previous stage
// produced, then runs the collected extension jobs through both kernels.
int cmd_bench(const std::string& index_path, const std::string& fastq_path,
              const MemConfig& cfg) {
    const LoadedIndex li = load_index(index_path);
    std::ifstream fq(fastq_path);
    if (!fq) throw IoError("cannot open FASTQ file: " + fastq_path);
    FastqBatchReader reader(fq, cfg.batch_size);
    std::vector<ReadRecord> reads, batch;
    while (reader.next_batch(batch))
        for (ReadRecord& r : batch) reads.push_back(std::move(r));

    // SMEM
    SmemScratch smem_scratch;
    std::vector<std::vector<Smem>> smems(reads.size());
    auto t0 = std::chrono::steady_clock::now();
    for (std::size_t r = 0; r < reads.size(); ++r)
        all_smems_into(li.idx, reads[r].bases, cfg.params.smem, smem_scratch, smems[r]);
    const double smem_s = seconds_since(t0);
    std::size_t n_smems = 0;
    for (const auto& v : smems) n_smems += v.size();

    // SAL
    std::vector<std::vector<SeedHit>> hits(reads.size());
    t0 = std::chrono::steady_clock::now();
    for (std::size_t r = 0; r < reads.size(); ++r)
        for (const Smem& m : smems[r])
            interval_to_hits(li.idx, m, cfg.params.smem.max_occ, hits[r]);
    const double sal_s = seconds_since(t0);
    std::size_t n_hits = 0;
    for (const auto& v : hits) n_hits += v.size();

    // CHAIN
    ChainSet chains;
    std::vector<std::vector<ExtensionJobDesc>> descs(reads.size());
    t0 = std::chrono::steady_clock::now();
    for (std::size_t r = 0; r < reads.size(); ++r) {
        chain_seeds(hits[r], cfg.params.chain, chains);
        select_extension_jobs(chains, std::uint32_t(reads[r].bases.size()), li.idx.n_ref,
                              cfg.params.chain, descs[r]);
    }
    const double chain_s = seconds_since(t0);

    // Extension jobs: left and right segments for every selected seed, each
    // seeded with the seed's own match score.
    std::deque<std::vector<BaseCode>> seq_store;  // stable element addresses
    std::vector<BswJob> jobs;
    auto store = [&](std::vector<BaseCode>&& s) -> std::span<const BaseCode> {
        return seq_store.emplace_back(std::move(s));
    };
    const std::int32_t a = cfg.params.bsw.match;
    for (std::size_t r = 0; r < reads.size(); ++r) {
        const std::vector<BaseCode> rc = reverse_complement(reads[r].bases);
        for (const ExtensionJobDesc& jd : descs[r]) {
            const std::vector<BaseCode>& oriented = jd.seed.is_reverse ? rc : reads[r].bases;
            const std::int32_t h0 = a * std::int32_t(jd.seed.q_end - jd.seed.q_begin);
            if (jd.has_left) {
                std::vector<BaseCode> q(oriented.begin(),
                                        oriented.begin() + jd.oriented_begin);
                std::reverse(q.begin(), q.end());
                std::vector<BaseCode> t(li.ref_bases.begin() + std::ptrdiff_t(jd.left_ref_begin),
                                        li.ref_bases.begin() + std::ptrdiff_t(jd.seed.ref_pos));
                std::reverse(t.begin(), t.end());
                jobs.push_back({store(std::move(q)), store(std::move(t)), h0,
                                std::uint32_t(jobs.size())});
            }
            if (jd.has_right) {
                std::vector<BaseCode> q(oriented.begin() + jd.oriented_end, oriented.end());
                std::vector<BaseCode> t(li.ref_bases.begin() + std::ptrdiff_t(jd.right_ref_begin),
                                        li.ref_bases.begin() + std::ptrdiff_t(jd.right_ref_end));
                jobs.push_back({store(std::move(q)), store(std::move(t)), h0,
                                std::uint32_t(jobs.size())});
            }
        }
    }

    // BSW scalar
    BswScalarScratch scalar_scratch;
    BswStats scalar_stats;
    std::vector<BswResult> scalar_res(jobs.size());
    t0 = std::chrono::steady_clock::now();
    for (std::size_t j = 0; j < jobs.size(); ++j)
        scalar_res[j] = bsw_scalar(jobs[j], cfg.params.bsw, scalar_scratch, &scalar_stats);
    const double scalar_s = seconds_since(t0);

    // BSW batched
    BswBatchScratch batch_scratch;
    BswStats batch_stats;
    std::vector<BswResult> batch_res;
    t0 = std::chrono::steady_clock::now();
    bsw_batch(jobs, cfg.params.bsw, cfg.params.lane_width, batch_scratch, batch_res,
              &batch_stats);
    const double batch_s = seconds_since(t0);

    std::size_t mismatches = 0;
    for (std::size_t j = 0; j < jobs.size(); ++j)
        if (!(scalar_res[j] == batch_res[j])) ++mismatches;
    if (mismatches > 0)
        throw InvariantError("bench: batched kernel disagrees with scalar on " +
                             std::to_string(mismatches) + " jobs");

    const double total = smem_s + sal_s + chain_s + batch_s;
    auto row = [&](const char* stage, double secs, double percent, std::size_t n_jobs,
                   std::uint64_t cells, double useful_ratio, double cps, double speedup) {
        std::cout << stage << ',' << secs * 1e3 << ',' << percent << ',' << n_jobs << ','
                  << cells << ',' << useful_ratio << ',' << cps << ',' << speedup << '\n';
    };
    std::cout << "stage,wall_ms,percent,jobs,cells,useful_ratio,cells_per_sec,speedup_vs_scalar\n";
    row("smem", smem_s, 100.0 * smem_s / total, reads.size(), 0, 0, 0, 0);
    row("sal", sal_s, 100.0 * sal_s / total, n_smems, 0, 0, 0, 0);
    row("chain", chain_s, 100.0 * chain_s / total, n_hits, 0, 0, 0, 0);
    row("bsw_scalar", scalar_s, 0.0, jobs.size(), scalar_stats.cells, 1.0,
        scalar_s > 0 ? double(scalar_stats.cells) / scalar_s : 0, 1.0);
    row("bsw_batch", batch_s, 100.0 * batch_s / total, jobs.size(), batch_stats.cells,
        batch_stats.cells ? double(batch_stats.useful_cells) / double(batch_stats.cells) : 0,
        batch_s > 0 ? double(batch_stats.cells) / batch_s : 0,
        batch_s > 0 ? scalar_s / batch_s : 0);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    std::ios::sync_with_stdio(false);
    CLI::App app{"seedmap: FM-index seed-and-extend short-read mapper"};
    app.require_subcommand(1);

    std::string fasta_path, out_path;
    auto* index_cmd = app.add_subcommand("index", "build an index from a FASTA reference");
    index_cmd->add_option("fasta", fasta_path, "reference FASTA file")->required();
    index_cmd->add_option("out", out_path, "output index path")->required();

    MemConfig mem_cfg, bench_cfg;
    std::string mem_prefetch = "on", bench_prefetch = "on";
    std::string index_path, fastq_path, bench_index, bench_fastq;
    auto* mem_cmd = app.add_subcommand("mem", "map reads against an index");
    mem_cmd->add_option("index", index_path, "index file")->required();
    mem_cmd->add_option("fastq", fastq_path, "reads in FASTQ format")->required();
    add_mapper_flags(mem_cmd, mem_cfg, mem_prefetch);

    auto* bench_cmd = app.add_subcommand("bench", "time each pipeline stage in isolation");
    bench_cmd->add_option("index", bench_index, "index file")->required();
    bench_cmd->add_option("fastq", bench_fastq, "reads in FASTQ format")->required();
    add_mapper_flags(bench_cmd, bench_cfg, bench_prefetch);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (index_cmd->parsed()) return cmd_index(fasta_path, out_path);
        if (mem_cmd->parsed()) {
            finish_config(mem_cfg, mem_prefetch);
            return cmd_mem(index_path, fastq_path, mem_cfg);
        }
        finish_config(bench_cfg, bench_prefetch);
        return cmd_bench(bench_index, bench_fastq, bench_cfg);
    } catch (const seedmap::InvariantError& e) {
        std::cerr << "seedmap: internal error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "seedmap: " << e.what() << "\n";
        return 2;
    }
}
