#include "pcps/distsim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "pcps/linalg.hpp"
#include "pcps/rng.hpp"

namespace pcps {

namespace {

// Wire size of the phase-1 sketch specification: family tag u8, column count
// u64, sketch width u64, seed u64, sparsity u32.
constexpr std::uint64_t kSpecBytes = 1 + 8 + 8 + 8 + 4;

struct PipelineSeeds {
    std::uint64_t oblivious;
    std::uint64_t server(int i) const { return derive_seed(base, 100 + i); }
    std::uint64_t clustering() const { return derive_seed(base, 999); }
    std::uint64_t base;
};

PipelineSeeds make_seeds(std::uint64_t seed) {
    return PipelineSeeds{derive_seed(seed, 1), seed};
}

int inner_rows(int k_prime, double delta, const CalibConstants& cc) {
    return dense_jl_dim(k_prime, cc.nonoblivious_eps, delta, cc);
}

}  // namespace

PartitionScheme partition_scheme_from_name(const std::string& name) {
    if (name == "contiguous") return PartitionScheme::contiguous;
    if (name == "round-robin") return PartitionScheme::round_robin;
    if (name == "seeded-random") return PartitionScheme::seeded_random;
    throw std::invalid_argument("unknown partition scheme: " + name);
}

std::uint64_t CommLedger::total_bits() const {
    std::uint64_t total = 0;
    for (const LedgerEntry& e : entries) total += e.bits;
    return total;
}

std::string CommLedger::to_json() const {
    std::ostringstream os;
    os << "{\"entries\":[";
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const LedgerEntry& e = entries[i];
        if (i) os << ",";
        os << "{\"phase\":\"" << e.phase << "\",\"direction\":\"" << e.direction
           << "\",\"vector_count\":" << e.vector_count << ",\"vector_dim\":" << e.vector_dim
           << ",\"bits\":" << e.bits << "}";
    }
    os << "],\"total_bits\":" << total_bits() << "}";
    return os.str();
}

std::vector<ServerShard> partition(const Matrix& a, int s, PartitionScheme scheme,
                                   std::uint64_t seed) {
    require(s >= 1, "partition: need at least one server");
    require(a.rows() >= s, "partition: more servers than rows");
    const Index n = a.rows();
    std::vector<std::vector<Index>> owned(s);
    switch (scheme) {
        case PartitionScheme::contiguous: {
            const Index base = n / s;
            const Index extra = n % s;
            Index at = 0;
            for (int i = 0; i < s; ++i) {
                Index len = base + (i < extra ? 1 : 0);
                for (Index j = 0; j < len; ++j) owned[i].push_back(at++);
            }
            break;
        }
        case PartitionScheme::round_robin: {
            for (Index r = 0; r < n; ++r) owned[r % s].push_back(r);
            break;
        }
        case PartitionScheme::seeded_random: {
            std::vector<Index> perm(n);
            std::iota(perm.begin(), perm.end(), Index{0});
            Rng rng(seed);
            for (Index i = n - 1; i > 0; --i) {
                Index j = static_cast<Index>(rng.below(static_cast<std::uint64_t>(i + 1)));
                std::swap(perm[i], perm[j]);
            }
            const Index base = n / s;
            const Index extra = n % s;
            Index at = 0;
            for (int i = 0; i < s; ++i) {
                Index len = base + (i < extra ? 1 : 0);
                for (Index j = 0; j < len; ++j) owned[i].push_back(perm[at++]);
            }
            break;
        }
    }
    std::vector<ServerShard> shards(s);
    for (int i = 0; i < s; ++i) {
        require(!owned[i].empty(), "partition: server received no rows");
        shards[i].server_id = i;
        shards[i].original_rows = owned[i];
        shards[i].rows.resize(static_cast<Index>(owned[i].size()), a.cols());
        for (std::size_t j = 0; j < owned[i].size(); ++j)
            shards[i].rows.row(static_cast<Index>(j)) = a.row(owned[i][j]);
    }
    return shards;
}

Matrix aggregate_products(const std::vector<Matrix>& partials) {
    require(!partials.empty(), "aggregate_products: nothing to sum");
    Matrix sum = partials[0];
    for (std::size_t i = 1; i < partials.size(); ++i) {
        require(partials[i].rows() == sum.rows() && partials[i].cols() == sum.cols(),
                "aggregate_products: shape mismatch");
        sum += partials[i];
    }
    return sum;
}

ProtocolResult run_protocol(const std::vector<ServerShard>& shards, int k, double eps,
                            double delta, std::uint64_t seed, const CalibConstants& cc) {
    require(!shards.empty(), "run_protocol: no servers");
    require(k >= 1 && eps > 0.0 && eps < 1.0, "run_protocol: bad rank or accuracy");
    require(delta > 0.0 && delta < 1.0, "run_protocol: bad delta");
    const int s = static_cast<int>(shards.size());
    const Index d = shards[0].rows.cols();
    Index n = 0;
    for (const ServerShard& sh : shards) {
        require(sh.rows.cols() == d, "run_protocol: shards disagree on width");
        require(sh.rows.rows() == static_cast<Index>(sh.original_rows.size()),
                "run_protocol: shard row bookkeeping is inconsistent");
        n += sh.rows.rows();
    }

    const PipelineSeeds seeds = make_seeds(seed);
    const int k_prime = static_cast<int>(std::ceil(k / eps)) + k - 1;

    ProtocolResult out;

    // Phase 1: broadcast the shared oblivious sketch spec; servers compress
    // their columns with it locally.
    const int d1 = osnap_dim(k, eps, delta, cc);
    const int nnz = osnap_sparsity(k, delta, cc, d1);
    out.ledger.entries.push_back({"sketch-spec", "broadcast", 0, 0,
                                  kSpecBytes * 8 * static_cast<std::uint64_t>(s)});
    Matrix r_obl = jl_matrix(d, d1, SketchFamily::osnap, seeds.oblivious, nnz);
    std::vector<Matrix> y(s);
    for (int i = 0; i < s; ++i) y[i] = shards[i].rows * r_obl.transpose();  // n_i x d1
    out.sketch_dim = d1;

    // Phase 2: per-server row compression of Y_i, summed centrally in server
    // order; the best rank-k' row basis of the sum is broadcast back.
    const int d2 = inner_rows(k_prime, delta, cc);
    std::vector<Matrix> partial(s);
    for (int i = 0; i < s; ++i) {
        Matrix r_i = jl_matrix(shards[i].rows.rows(), d2, SketchFamily::dense_jl,
                               seeds.server(i));
        partial[i] = r_i * y[i];  // d2 x d1
    }
    out.ledger.entries.push_back({"row-compression", "gather",
                                  static_cast<std::uint64_t>(s) * d2,
                                  static_cast<std::uint64_t>(d1),
                                  static_cast<std::uint64_t>(s) * d2 * d1 * 64});
    Matrix w = aggregate_products(partial);
    SvdFactors fw = svd(w);
    const Index kk = std::min<Index>(k_prime, fw.rank());
    require(kk >= 1, "run_protocol: aggregated sketch has no numerical rank");
    Matrix z2 = fw.v.leftCols(kk);  // d1 x kk
    out.basis_columns = kk;
    out.ledger.entries.push_back({"basis", "broadcast",
                                  static_cast<std::uint64_t>(s) * kk,
                                  static_cast<std::uint64_t>(d1),
                                  static_cast<std::uint64_t>(s) * kk * d1 * 64});

    // Phase 3: gather the projected rows into their original positions and
    // cluster centrally.
    Matrix x(n, kk);
    for (int i = 0; i < s; ++i) {
        Matrix xi = y[i] * z2;  // n_i x kk
        for (Index j = 0; j < xi.rows(); ++j) x.row(shards[i].original_rows[j]) = xi.row(j);
    }
    out.ledger.entries.push_back({"projected-rows", "gather", static_cast<std::uint64_t>(n),
                                  static_cast<std::uint64_t>(kk),
                                  static_cast<std::uint64_t>(n) * kk * 64});

    KMeansResult km = lloyd_kmeans(x, k, seeds.clustering());

    // Cost accounting happens on the full matrix, reassembled in row order.
    Matrix full(n, d);
    for (const ServerShard& sh : shards)
        for (Index j = 0; j < sh.rows.rows(); ++j) full.row(sh.original_rows[j]) = sh.rows.row(j);
    out.kmeans = km;
    out.kmeans.cost_on_input = evaluate_clustering_cost(full, km.labels);
    return out;
}

ProtocolResult centralized_pipeline(const Matrix& a, int k, double eps, double delta,
                                    std::uint64_t seed, const CalibConstants& cc) {
    require(k >= 1 && eps > 0.0 && eps < 1.0, "centralized_pipeline: bad rank or accuracy");
    require(delta > 0.0 && delta < 1.0, "centralized_pipeline: bad delta");
    const Index n = a.rows();
    const Index d = a.cols();
    const PipelineSeeds seeds = make_seeds(seed);
    const int k_prime = static_cast<int>(std::ceil(k / eps)) + k - 1;

    ProtocolResult out;
    const int d1 = osnap_dim(k, eps, delta, cc);
    const int nnz = osnap_sparsity(k, delta, cc, d1);
    out.ledger.entries.push_back({"sketch-spec", "broadcast", 0, 0, kSpecBytes * 8});
    Matrix y = a * jl_matrix(d, d1, SketchFamily::osnap, seeds.oblivious, nnz).transpose();
    out.sketch_dim = d1;

    const int d2 = inner_rows(k_prime, delta, cc);
    Matrix w = aggregate_products(
        {jl_matrix(n, d2, SketchFamily::dense_jl, seeds.server(0)) * y});
    out.ledger.entries.push_back({"row-compression", "gather", static_cast<std::uint64_t>(d2),
                                  static_cast<std::uint64_t>(d1),
                                  static_cast<std::uint64_t>(d2) * d1 * 64});
    SvdFactors fw = svd(w);
    const Index kk = std::min<Index>(k_prime, fw.rank());
    require(kk >= 1, "centralized_pipeline: sketch has no numerical rank");
    Matrix z2 = fw.v.leftCols(kk);
    out.basis_columns = kk;
    out.ledger.entries.push_back({"basis", "broadcast", static_cast<std::uint64_t>(kk),
                                  static_cast<std::uint64_t>(d1),
                                  static_cast<std::uint64_t>(kk) * d1 * 64});

    Matrix x = y * z2;
    out.ledger.entries.push_back({"projected-rows", "gather", static_cast<std::uint64_t>(n),
                                  static_cast<std::uint64_t>(kk),
                                  static_cast<std::uint64_t>(n) * kk * 64});
    KMeansResult km = lloyd_kmeans(x, k, seeds.clustering());
    out.kmeans = km;
    out.kmeans.cost_on_input = evaluate_clustering_cost(a, km.labels);
    return out;
}

}  // namespace pcps
