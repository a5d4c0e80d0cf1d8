#include <unistd.h>

#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pcps/bss.hpp"
#include "pcps/distsim.hpp"
#include "pcps/linalg.hpp"
#include "pcps/matrix_io.hpp"
#include "pcps/projections.hpp"
#include "pcps/rng.hpp"
#include "pcps/sketch.hpp"
#include "pcps/solvers.hpp"
#include "pcps/stream.hpp"
#include "pcps/testdata.hpp"
#include "pcps/verify.hpp"

namespace {

using namespace pcps;

std::string self_directory(const char* argv0) {
    std::error_code ec;
    auto exe = std::filesystem::read_symlink("/proc/self/exe", ec);
    if (!ec) return exe.parent_path().string();
    std::filesystem::path p(argv0 ? argv0 : ".");
    auto dir = p.parent_path();
    return dir.empty() ? std::string(".") : dir.string();
}

std::uint64_t default_seed() {
    if (const char* env = std::getenv("PCPS_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw CLI::ValidationError("PCPS_SEED", "not a valid 64-bit seed");
        }
    }
    return 0;
}

// Update files carry no magic; treat printable content as the text format.
std::vector<TurnstileUpdate> read_updates_any(const std::string& path) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw std::runtime_error("cannot open " + path);
    std::string head(256, '\0');
    probe.read(head.data(), static_cast<std::streamsize>(head.size()));
    head.resize(static_cast<std::size_t>(probe.gcount()));
    bool texty = !head.empty();
    for (unsigned char c : head) {
        if (c == '\t' || c == '\n' || c == '\r') continue;
        if (c < 0x20 || c > 0x7e) {
            texty = false;
            break;
        }
    }
    std::ifstream in(path, std::ios::binary);
    return texty ? read_updates_text(in) : read_updates_binary(in);
}

void write_column_map(const std::string& path, const ColumnMap& map) {
    std::ostringstream os;
    for (std::size_t i = 0; i < map.indices.size(); ++i) {
        char buf[64];
        auto res = std::to_chars(buf, buf + sizeof(buf), map.weights[i]);
        os << map.indices[i] << ',' << std::string(buf, res.ptr) << '\n';
    }
    write_text_atomic(path, os.str());
}

struct VerifyArgs {
    std::string input, sketch, check = "pcp";
    int samples = 200;
    int k = 1;
    double epsilon = 0.5;
    std::uint64_t seed = 0;
    bool include_clusterings = false;
    bool kv = false;
    bool quiet = false;
    double c_known = -1.0;  // negative = absent
};

int run_verify(const VerifyArgs& va) {
    Matrix a = read_matrix(va.input);
    Matrix at = read_matrix(va.sketch);
    std::optional<double> c;
    if (va.c_known >= 0.0) c = va.c_known;
    CheckReport rep;
    if (va.check == "pcp") {
        rep = check_pcp(a, at, va.k, va.epsilon, va.samples, va.seed, va.include_clusterings, c);
    } else if (va.check == "pcp1") {
        rep = check_pcp_one_sided(a, at, va.k, va.epsilon, va.samples, va.seed,
                                  va.include_clusterings, c);
    } else if (va.check == "lemma6") {
        rep = check_error_conditions(a, at, va.k, va.epsilon);
    } else if (va.check == "spectral-pcp") {
        rep = check_spectral_pcp(a, at, va.k, va.epsilon, va.samples, va.seed, c);
    } else if (va.check == "B") {
        rep = check_B_construction(a, at, va.k);
    } else {
        throw CLI::ValidationError("--check", "unknown check: " + va.check);
    }
    if (va.quiet) {
        std::cout << (rep.passed ? "pass" : "fail") << "\n";
    } else {
        std::cout << (va.kv ? rep.to_kv() : rep.to_json() + "\n");
    }
    return rep.passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"projection-cost preserving sketches for k-means and low-rank approximation"};
    app.require_subcommand(1);

    const std::string exe_dir = self_directory(argc > 0 ? argv[0] : nullptr);
    std::string constants_path = exe_dir + "/pcps_constants.cfg";
    app.add_option("--constants", constants_path, "calibration constants file");

    std::uint64_t seed = 0;
    try {
        seed = default_seed();
    } catch (const CLI::Error& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }

    // --- sketch ---
    auto* c_sk = app.add_subcommand("sketch", "compress a matrix with a chosen family");
    std::string sk_input, sk_family = "svd", sk_output, sk_columns_out;
    int sk_k = 1, sk_m = 0;
    double sk_eps = 0.5, sk_delta = 0.1;
    std::uint64_t sk_seed = seed;
    bool sk_binary = false;
    c_sk->add_option("--input", sk_input)->required();
    c_sk->add_option("--family", sk_family);
    c_sk->add_option("--k", sk_k)->required();
    c_sk->add_option("--epsilon", sk_eps);
    c_sk->add_option("--delta", sk_delta);
    c_sk->add_option("--seed", sk_seed);
    c_sk->add_option("--m", sk_m, "explicit svd rank (svd family only)");
    c_sk->add_option("--output", sk_output)->required();
    c_sk->add_option("--columns-out", sk_columns_out);
    c_sk->add_flag("--binary", sk_binary, "write the binary matrix format");

    // --- kmeans ---
    auto* c_km = app.add_subcommand("kmeans", "cluster rows, optionally through a sketch");
    std::string km_input, km_family, km_solver = "lloyd", km_labels_out;
    int km_k = 1;
    double km_eps = 0.5, km_delta = 0.1;
    std::uint64_t km_seed = seed;
    c_km->add_option("--input", km_input)->required();
    c_km->add_option("--k", km_k)->required();
    c_km->add_option("--sketch-family", km_family);
    c_km->add_option("--epsilon", km_eps);
    c_km->add_option("--delta", km_delta);
    c_km->add_option("--solver", km_solver)->check(CLI::IsMember({"lloyd", "brute"}));
    c_km->add_option("--seed", km_seed);
    c_km->add_option("--labels-out", km_labels_out);

    // --- lra ---
    auto* c_lra = app.add_subcommand("lra", "rank-k left basis through a sketch");
    std::string lra_input, lra_family = "non-oblivious", lra_basis_out;
    int lra_k = 1;
    double lra_eps = 0.5, lra_delta = 0.1;
    std::uint64_t lra_seed = seed;
    c_lra->add_option("--input", lra_input)->required();
    c_lra->add_option("--k", lra_k)->required();
    c_lra->add_option("--sketch-family", lra_family);
    c_lra->add_option("--epsilon", lra_eps);
    c_lra->add_option("--delta", lra_delta);
    c_lra->add_option("--seed", lra_seed);
    c_lra->add_option("--basis-out", lra_basis_out);

    // --- verify ---
    auto* c_ver = app.add_subcommand("verify", "empirical cost-preservation checks");
    VerifyArgs va;
    va.seed = seed;
    c_ver->add_option("--input", va.input)->required();
    c_ver->add_option("--sketch", va.sketch, "sketch matrix (basis Z for --check B)")->required();
    c_ver->add_option("--check", va.check)
        ->check(CLI::IsMember({"pcp", "pcp1", "lemma6", "spectral-pcp", "B"}));
    c_ver->add_option("--samples", va.samples);
    c_ver->add_option("--k", va.k);
    c_ver->add_option("--epsilon", va.epsilon);
    c_ver->add_option("--seed", va.seed);
    c_ver->add_flag("--include-clusterings", va.include_clusterings);
    c_ver->add_option("--c-known", va.c_known, "assert this offset instead of searching");
    c_ver->add_flag("--kv", va.kv, "line-oriented key=value report");
    c_ver->add_flag("--quiet", va.quiet, "print only pass/fail");

    // --- stream ---
    auto* c_st = app.add_subcommand("stream", "turnstile updates to an approximate row basis");
    std::string st_updates, st_input, st_basis_out;
    Index st_n = 0, st_d = 0;
    int st_k = 1;
    double st_eps = 0.5, st_delta = 0.1;
    std::uint64_t st_seed = seed;
    c_st->add_option("--updates", st_updates)->required();
    c_st->add_option("--n", st_n)->required();
    c_st->add_option("--d", st_d)->required();
    c_st->add_option("--k", st_k)->required();
    c_st->add_option("--epsilon", st_eps);
    c_st->add_option("--delta", st_delta);
    c_st->add_option("--seed", st_seed);
    c_st->add_option("--input", st_input, "dense matrix for residual evaluation");
    c_st->add_option("--basis-out", st_basis_out);

    // --- distsim ---
    auto* c_ds = app.add_subcommand("distsim", "coordinator protocol simulation");
    std::string ds_input, ds_scheme = "contiguous", ds_labels_out;
    int ds_servers = 1, ds_k = 1;
    double ds_eps = 0.5, ds_delta = 0.1;
    std::uint64_t ds_seed = seed;
    c_ds->add_option("--input", ds_input)->required();
    c_ds->add_option("--servers", ds_servers)->required();
    c_ds->add_option("--scheme", ds_scheme)
        ->check(CLI::IsMember({"contiguous", "round-robin", "seeded-random"}));
    c_ds->add_option("--k", ds_k)->required();
    c_ds->add_option("--epsilon", ds_eps);
    c_ds->add_option("--delta", ds_delta);
    c_ds->add_option("--seed", ds_seed);
    c_ds->add_option("--labels-out", ds_labels_out);

    // --- gen ---
    auto* c_gen = app.add_subcommand("gen", "synthetic instances");
    c_gen->require_subcommand(1);
    auto* c_cloud = c_gen->add_subcommand("cloud", "separated gaussian clusters");
    Index cl_n = 100, cl_d = 10;
    int cl_k = 3;
    double cl_sep = 5.0;
    std::uint64_t cl_seed = seed;
    std::string cl_output, cl_labels_out;
    bool cl_binary = false;
    c_cloud->add_option("--n", cl_n)->required();
    c_cloud->add_option("--d", cl_d)->required();
    c_cloud->add_option("--k", cl_k)->required();
    c_cloud->add_option("--separation", cl_sep);
    c_cloud->add_option("--seed", cl_seed);
    c_cloud->add_option("--output", cl_output)->required();
    c_cloud->add_option("--labels-out", cl_labels_out);
    c_cloud->add_flag("--binary", cl_binary);

    auto* c_lb = c_gen->add_subcommand("lowerbound", "block-diagonal hard instance");
    int lb_k = 4;
    double lb_eps = 0.5;
    Index lb_nprime = 2048;
    std::uint64_t lb_seed = seed;
    std::string lb_output;
    bool lb_binary = false;
    c_lb->add_option("--k", lb_k)->required();
    c_lb->add_option("--epsilon", lb_eps)->required();
    c_lb->add_option("--n-prime", lb_nprime)->required();
    c_lb->add_option("--seed", lb_seed);
    c_lb->add_option("--output", lb_output)->required();
    c_lb->add_flag("--binary", lb_binary);

    // --- calibrate ---
    auto* c_cal = app.add_subcommand("calibrate", "re-derive the constant multipliers");
    std::string cal_output;
    bool cal_quick = false;
    c_cal->add_option("--output", cal_output, "defaults to the file next to the binary");
    c_cal->add_flag("--quick", cal_quick, "smaller batteries, coarser search");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n" << app.help() << "\n";
        return 2;
    }

    CalibConstants cc = CalibConstants::load_or_default(constants_path);

    try {
        if (c_sk->parsed()) {
            Matrix a = read_matrix(sk_input);
            SketchResult res;
            if (sk_m > 0) {
                if (family_from_name(sk_family) != SketchFamily::svd)
                    throw std::invalid_argument("--m applies to the svd family only");
                res = svd_sketch_m(a, sk_k, sk_m);
            } else {
                SketchConfig cfg;
                cfg.k = sk_k;
                cfg.epsilon = sk_eps;
                cfg.delta = sk_delta;
                cfg.family = family_from_name(sk_family);
                cfg.seed = sk_seed;
                cfg.constants = cc;
                res = build_sketch(a, cfg);
            }
            if (sk_binary) write_binary(sk_output, res.a_tilde);
            else write_csv(sk_output, res.a_tilde);
            if (!sk_columns_out.empty()) {
                if (!res.column_map)
                    throw std::invalid_argument("--columns-out: family has no column map");
                write_column_map(sk_columns_out, *res.column_map);
            }
            std::ostringstream os;
            os << "{\"rows\":" << res.a_tilde.rows() << ",\"cols\":" << res.a_tilde.cols();
            if (res.c_known) os << ",\"c_known\":" << *res.c_known;
            os << "}";
            std::cout << os.str() << "\n";
            return 0;
        }
        if (c_km->parsed()) {
            Matrix a = read_matrix(km_input);
            KMeansResult res;
            if (km_family.empty()) {
                res = km_solver == "brute" ? brute_force_kmeans(a, km_k)
                                           : lloyd_kmeans(a, km_k, km_seed);
            } else {
                SketchConfig cfg;
                cfg.k = km_k;
                cfg.epsilon = km_eps;
                cfg.delta = km_delta;
                cfg.family = family_from_name(km_family);
                cfg.seed = km_seed;
                cfg.constants = cc;
                SolverOptions opts;
                opts.seed = derive_seed(km_seed, 500);
                res = solve_kmeans_via_sketch(a, cfg, opts, km_solver == "brute");
            }
            if (!km_labels_out.empty()) write_labels(km_labels_out, res.labels);
            std::cout << "{\"cost\":" << res.cost_on_input << ",\"iterations\":" << res.iterations
                      << ",\"converged\":" << (res.converged ? "true" : "false") << "}\n";
            return 0;
        }
        if (c_lra->parsed()) {
            Matrix a = read_matrix(lra_input);
            SketchConfig cfg;
            cfg.k = lra_k;
            cfg.epsilon = lra_eps;
            cfg.delta = lra_delta;
            cfg.family = family_from_name(lra_family);
            cfg.seed = lra_seed;
            cfg.constants = cc;
            LraResult res = solve_lra_via_sketch(a, cfg);
            if (!lra_basis_out.empty()) write_csv(lra_basis_out, res.basis);
            std::cout << "{\"cost\":" << res.cost << ",\"basis_columns\":" << res.basis.cols()
                      << "}\n";
            return 0;
        }
        if (c_ver->parsed()) return run_verify(va);
        if (c_st->parsed()) {
            auto updates = read_updates_any(st_updates);
            StreamState state =
                stream_init(st_n, st_d, st_k, st_eps, st_delta, st_seed,
                            SketchFamily::sparse_embedding, cc);
            for (const auto& u : updates) stream_update(state, u);
            StreamBasis basis = stream_finalize(state);
            if (!st_basis_out.empty()) write_csv(st_basis_out, basis.z);
            std::ostringstream os;
            os << "{\"sketch_rows\":" << state.sketch_rows()
               << ",\"updates\":" << state.update_count()
               << ",\"basis_columns\":" << basis.z.cols();
            if (!st_input.empty()) {
                Matrix a = read_matrix(st_input);
                os << ",\"residual\":" << stream_residual_cost(a, basis.z);
            }
            os << "}";
            std::cout << os.str() << "\n";
            return 0;
        }
        if (c_ds->parsed()) {
            Matrix a = read_matrix(ds_input);
            auto shards = partition(a, ds_servers, partition_scheme_from_name(ds_scheme),
                                    derive_seed(ds_seed, 7));
            ProtocolResult res = run_protocol(shards, ds_k, ds_eps, ds_delta, ds_seed, cc);
            if (!ds_labels_out.empty()) write_labels(ds_labels_out, res.kmeans.labels);
            std::cout << "{\"cost\":" << res.kmeans.cost_on_input
                      << ",\"sketch_dim\":" << res.sketch_dim
                      << ",\"basis_columns\":" << res.basis_columns
                      << ",\"ledger\":" << res.ledger.to_json() << "}\n";
            return 0;
        }
        if (c_cloud->parsed()) {
            LabeledMatrix lm = gaussian_cloud_clusters(cl_n, cl_d, cl_k, cl_sep, cl_seed);
            if (cl_binary) write_binary(cl_output, lm.points);
            else write_csv(cl_output, lm.points);
            if (!cl_labels_out.empty()) write_labels(cl_labels_out, lm.labels);
            std::cout << "{\"rows\":" << lm.points.rows() << ",\"cols\":" << lm.points.cols()
                      << "}\n";
            return 0;
        }
        if (c_lb->parsed()) {
            Matrix a = lower_bound_instance(lb_k, lb_eps, lb_nprime, lb_seed);
            if (lb_binary) write_binary(lb_output, a);
            else write_csv(lb_output, a);
            std::cout << "{\"rows\":" << a.rows() << ",\"cols\":" << a.cols() << "}\n";
            return 0;
        }
        if (c_cal->parsed()) {
            extern int run_calibration(const std::string& path, bool quick);
            std::string out = cal_output.empty() ? constants_path : cal_output;
            return run_calibration(out, cal_quick);
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    std::cerr << app.help() << "\n";
    return 2;
}
