#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pcps/matrix.hpp"
#include "pcps/sketch.hpp"
#include "pcps/solvers.hpp"

namespace pcps {

enum class PartitionScheme { contiguous, round_robin, seeded_random };

PartitionScheme partition_scheme_from_name(const std::string& name);

struct ServerShard {
    int server_id = 0;
    Matrix rows;
    std::vector<Index> original_rows;  // position of rows.row(i) in the full matrix
};

// One accounting entry per protocol phase and direction. Vector payloads are
// counted as vector_count vectors of vector_dim doubles at 64 bits each;
// scalar payloads (the sketch specification broadcast) carry bits directly.
struct LedgerEntry {
    std::string phase;
    std::string direction;  // "broadcast" or "gather"
    std::uint64_t vector_count = 0;
    std::uint64_t vector_dim = 0;
    std::uint64_t bits = 0;
};

struct CommLedger {
    std::vector<LedgerEntry> entries;
    std::uint64_t total_bits() const;
    std::string to_json() const;
};

struct ProtocolResult {
    KMeansResult kmeans;
    CommLedger ledger;
    Index sketch_dim = 0;      // columns of the oblivious row sketch
    Index basis_columns = 0;   // columns of the shared projection basis
};

std::vector<ServerShard> partition(const Matrix& a, int s, PartitionScheme scheme,
                                   std::uint64_t seed);

// Simulated coordinator protocol: broadcast a shared oblivious column sketch,
// gather per-server row compressions of it, centrally extract a basis,
// broadcast it back, gather the projected rows, and cluster them centrally.
// Labels come back in original row order and the reported cost is measured
// on the full input.
ProtocolResult run_protocol(const std::vector<ServerShard>& shards, int k, double eps,
                            double delta, std::uint64_t seed,
                            const CalibConstants& cc = CalibConstants::defaults());

// The same computation written as straight-line single-machine code. With one
// server holding all rows, run_protocol must reproduce this bit for bit.
ProtocolResult centralized_pipeline(const Matrix& a, int k, double eps, double delta,
                                    std::uint64_t seed,
                                    const CalibConstants& cc = CalibConstants::defaults());

// Sum of per-shard products in ascending shard order. Both the protocol and
// the centralized path aggregate through this helper so their floating-point
// grouping is identical.
Matrix aggregate_products(const std::vector<Matrix>& partials);

}  // namespace pcps
