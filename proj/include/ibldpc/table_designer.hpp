#pragma once

// Discrete density evolution that builds the lookup-table decoder.
//
// Decoding iteration l uses three groups of tables:
//   * check-node tables designed on the variable-to-check message statistics
//     q_l (q_0 is the quantized channel),
//   * variable-node tables designed on the check-to-variable statistics r_l;
//     they produce the variable-to-check messages of iteration l+1,
//   * decision tables that map the full variable-node combination to a bit.
//
// Every message alphabet has 2^bit_width symbols. Node operations are chains
// of two-input tables; alignment maps fold the node context (number of
// informative inputs, punctured or not) into one shared output alphabet.

#include "ibldpc/channel_model.hpp"
#include "ibldpc/ib_core.hpp"
#include "ibldpc/ldpc_code.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace ibldpc {

/// out(a, b) -> cluster, with the LLR meaning of each output cluster.
struct TwoInputTable {
    std::uint32_t size_a = 0;
    std::uint32_t size_b = 0;
    std::vector<std::uint8_t> out;  // row-major in a
    std::vector<double> meanings;   // LLR in nats per output cluster

    std::uint8_t operator()(std::size_t a, std::size_t b) const { return out[a * size_b + b]; }
    std::size_t output_size() const noexcept { return meanings.size(); }
    bool operator==(const TwoInputTable&) const = default;
};

/// Per-context relabeling [context][t] -> z.
struct AlignmentMap {
    std::vector<std::vector<std::uint8_t>> map;
    std::vector<double> meanings;  // LLR of each aligned index

    bool operator==(const AlignmentMap&) const = default;
};

/// Variable-node tree. For a transmitted node with informative check inputs
/// r_1..r_e (e >= 1):
///   z = puncture_alignment[0][channel_stage(ch, r_1)]
///   z = stages[k-1](z, r_{k+1})           for k = 1..e-1
///   message = degree_alignment[e][z]
/// A punctured node starts from puncture_alignment[1][punctured_relabel[r_1]].
/// With e = 0 the message is degree_alignment[0][ch].
struct VnTables {
    TwoInputTable channel_stage;
    std::vector<std::uint8_t> punctured_relabel;
    AlignmentMap puncture_alignment;  // contexts: 0 transmitted, 1 punctured
    std::vector<TwoInputTable> stages;
    AlignmentMap degree_alignment;    // contexts: informative inputs e = 0..max_var_degree-1
    // decision[e][state]: hard bit after all e informative inputs. decision[0]
    // is indexed by the channel symbol, decision[1] by the aligned first stage.
    std::vector<std::vector<std::uint8_t>> decision;

    bool operator==(const VnTables&) const = default;
};

/// Check-node tree. With informative inputs m_1..m_k toward one edge:
///   acc = m_1;  acc = stages[s-1](acc, m_{s+1}) for s = 1..k-1
///   message = degree_alignment[k-1][acc]
struct CnTables {
    std::vector<TwoInputTable> stages;
    AlignmentMap degree_alignment;  // contexts: inputs k = 1..max_check_degree-1

    bool operator==(const CnTables&) const = default;
};

struct IterationTables {
    CnTables cn;
    VnTables vn;
    double mi_v2c = 0.0;  // I(X; variable-to-check message) entering the check nodes
    double mi_c2v = 0.0;  // I(X; check-to-variable message)
    double mi_app = 0.0;  // average I(X; decision state) over variables
    bool frozen = false;  // copied from the previous iteration after saturation

    bool tables_equal(const IterationTables& other) const { return cn == other.cn && vn == other.vn; }
};

struct RateTables {
    double code_rate = 0.0;
    std::size_t num_irc_transmitted = 0;
    double design_ebn0_db = 0.0;
    double puncture_rate = 0.0;
    int max_var_degree = 0;
    int max_check_degree = 0;
    ChannelQuantizer quantizer;
    std::vector<IterationTables> iterations;
    bool converged = false;         // final mi_app reached the convergence target
    std::size_t lossy_stages = 0;   // stages keeping less than 99.5% of their input information
};

struct DecoderTables {
    int bit_width = 4;
    int max_iters = 0;
    std::uint64_t seed = 0;
    std::string family_name;
    std::vector<RateTables> rates;

    std::size_t alphabet() const noexcept { return std::size_t{1} << bit_width; }
    /// Throws ConfigError when no rate point lies within 1e-9 of `code_rate`.
    const RateTables& rate(double code_rate) const;
};

struct DesignConfig {
    static constexpr double kAuto = std::numeric_limits<double>::quiet_NaN();

    int bit_width = 4;
    int max_iters = 100;
    std::vector<double> design_ebn0_db;  // per rate point; empty or NaN selects the threshold search
    std::uint64_t seed = 0;
    bool condition_on_puncturing = true;
    double convergence_target = 0.999;   // bits of I(X; decision state)
    double saturation = 1.0 - 1e-9;      // tables freeze once mi_app exceeds this
    double search_low_db = -2.0;
    double search_high_db = 8.0;
    double search_resolution_db = 0.1;
    std::size_t grid_points = kDefaultGridPoints;
};

/// The graph density evolution runs on. For a protograph family this is the
/// base graph of the rate point: every base edge stands for Z lifted edges
/// with identical statistics, and edge order matches the lifted code.
struct DesignGeometry {
    SparseMatrix base;
    std::vector<std::uint8_t> punctured;  // per column of base
    double code_rate = 0.0;
    std::size_t num_irc_transmitted = 0;
    double puncture_rate = 0.0;
    int max_var_degree = 0;  // tree depth; at least the largest degree in base
    int max_check_degree = 0;
};

/// Geometry of a family rate point, with the tree depth taken from the
/// lowest-rate (mother) protograph.
DesignGeometry family_geometry(const PbrlFamily& family, const RatePoint& rate);

/// Geometry of an unpunctured code, tracked edge by edge.
DesignGeometry plain_geometry(const SparseMatrix& h, double code_rate);

/// p(x, (a, b)) = p(x, a) p(x, b) / p(x), normalized; pair index a * |B| + b.
BinaryJoint vn_combine(const BinaryJoint& a, const BinaryJoint& b);

/// p(x, (a, b)) = sum over b1 ^ b2 == x of p(b1, a) p(b2, b), normalized.
BinaryJoint cn_combine(const BinaryJoint& a, const BinaryJoint& b);

enum class PairSymmetry {
    none,
    variable,  // p(x, (a', b')) == p(1-x, (a, b)) with ' the index reflection
    check,     // p(x, (a', b)) == p(1-x, (a, b))
};

struct CompressedStage {
    TwoInputTable table;
    BinaryJoint output;               // p(x, t_out)
    double information_ratio = 1.0;  // I(X;T_out) / I(X;pair)
};

/// Compresses a pair joint onto `num_clusters` symbols with the exact
/// LLR-ordered quantizer. With a pair symmetry and symmetric inputs the
/// table is exactly symmetric.
CompressedStage compress_stage(const BinaryJoint& pair_joint, std::size_t size_a, std::size_t size_b,
                               std::size_t num_clusters, PairSymmetry symmetry = PairSymmetry::none);

/// Distribution of a table's output when its inputs follow `pair_joint`.
BinaryJoint push_through(const TwoInputTable& table, const BinaryJoint& pair_joint);

/// Distribution of a relabeled alphabet.
BinaryJoint relabel(const BinaryJoint& joint, const std::vector<std::uint8_t>& map, std::size_t out_size);

/// Density evolution and table synthesis at one Eb/N0. The distribution of
/// every informative message is tracked per base edge through the designed
/// tables; each table is fitted to the pooled input statistics of all nodes
/// that use it. Never throws on poor convergence; inspect `converged` and the
/// per-iteration trace.
RateTables design_at(const DesignGeometry& geometry, double ebn0_db, const DesignConfig& config);

/// Designs one rate point. A NaN Eb/N0 selects the smallest Eb/N0 (to the
/// search resolution) where design_at converges. Throws DesignError when the
/// design diverges or no Eb/N0 in the search range converges.
RateTables design_rate(const DesignGeometry& geometry, double ebn0_db, const DesignConfig& config);

/// Designs every requested rate point of a family.
DecoderTables design_tables(const PbrlFamily& family, const std::vector<RatePoint>& rates,
                            const DesignConfig& config);

/// Per-iteration information trace as CSV.
std::string design_report_csv(const DecoderTables& tables);

/// Binary artifact I/O (little-endian, checksummed).
void save_tables(const DecoderTables& tables, const std::string& path);
DecoderTables load_tables(const std::string& path);
std::string serialize_tables(const DecoderTables& tables);
DecoderTables deserialize_tables(std::string_view bytes);

/// FNV-1a 64-bit hash used for the artifact checksum.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace ibldpc
