#pragma once

// Protograph-based raptor-like (PBRL) LDPC codes: protographs, circulant
// lifting, rate points, puncture masks, degree distributions, and the
// per-iteration effective-degree analysis for punctured decoding.

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace ibldpc {

/// Binary sparse parity-check matrix with row and column adjacency.
class SparseMatrix {
public:
    SparseMatrix() = default;
    SparseMatrix(std::size_t rows, std::size_t cols);

    /// Builds from (row, col) positions; duplicates are rejected.
    static SparseMatrix from_entries(std::size_t rows, std::size_t cols,
                                     const std::vector<std::pair<std::size_t, std::size_t>>& entries);
    static SparseMatrix from_dense(const std::vector<std::vector<int>>& dense);

    std::size_t rows() const noexcept { return row_cols_.size(); }
    std::size_t cols() const noexcept { return col_rows_.size(); }
    std::size_t nnz() const noexcept { return nnz_; }

    const std::vector<std::uint32_t>& row(std::size_t r) const { return row_cols_[r]; }
    const std::vector<std::uint32_t>& col(std::size_t c) const { return col_rows_[c]; }
    bool get(std::size_t r, std::size_t c) const;

    std::vector<std::vector<int>> to_dense() const;

    /// Leading `rows` x `cols` submatrix.
    SparseMatrix leading_block(std::size_t rows, std::size_t cols) const;

    bool operator==(const SparseMatrix& other) const = default;

private:
    std::vector<std::vector<std::uint32_t>> row_cols_;
    std::vector<std::vector<std::uint32_t>> col_rows_;
    std::size_t nnz_ = 0;
};

/// Edge-indexed view of a parity-check matrix. Edges are numbered row by row.
struct TannerGraph {
    explicit TannerGraph(const SparseMatrix& h);

    std::size_t num_checks = 0;
    std::size_t num_vars = 0;
    std::vector<std::uint32_t> edge_var;     // variable of each edge
    std::vector<std::uint32_t> edge_check;   // check of each edge
    std::vector<std::uint32_t> check_start;  // CSR: edges of check c are [check_start[c], check_start[c+1])
    std::vector<std::uint32_t> var_start;    // CSR over var_edges
    std::vector<std::uint32_t> var_edges;    // edge ids grouped by variable, ascending check order

    std::size_t num_edges() const noexcept { return edge_var.size(); }
    std::size_t check_degree(std::size_t c) const { return check_start[c + 1] - check_start[c]; }
    std::size_t var_degree(std::size_t v) const { return var_start[v + 1] - var_start[v]; }
};

/// H * bits^T == 0 over GF(2).
bool syndrome_check(const SparseMatrix& h, const std::vector<std::uint8_t>& bits);

/// Length of the shortest cycle in the Tanner graph, 0 if acyclic.
std::size_t girth(const SparseMatrix& h);

struct Protograph {
    std::vector<std::vector<int>> base;  // edge multiplicity per (proto-check, proto-variable)

    std::size_t rows() const noexcept { return base.size(); }
    std::size_t cols() const noexcept { return base.empty() ? 0 : base.front().size(); }
    void validate() const;
};

/// A PBRL family: highest-rate code plus incremental-redundancy rows. The
/// mother protograph has the HRC rows on top and one IRC row per additional
/// check; IRC row j owns the degree-one variable in column hrc.cols() + j.
struct PbrlFamily {
    std::string name;
    Protograph hrc;
    std::vector<std::vector<int>> irc_rows;  // each over the HRC columns only
    std::vector<std::size_t> punctured_hrc_vns;
    std::size_t info_columns = 0;            // leading systematic proto-columns
    std::size_t k_info = 0;
    std::size_t lifting = 1;                 // Z
    // shifts[r][c]: one shift per edge of mother-protograph entry (r, c).
    std::vector<std::vector<std::vector<int>>> shifts;
    std::vector<std::size_t> rate_irc_counts;  // shipped rate points, by transmitted IRC rows

    std::size_t mother_rows() const noexcept { return hrc.rows() + irc_rows.size(); }
    std::size_t mother_cols() const noexcept { return hrc.cols() + irc_rows.size(); }
    Protograph mother() const;
    void validate() const;
};

struct RatePoint {
    std::size_t num_irc_transmitted = 0;
    double code_rate = 0.0;
};

/// Rate point with R = K / (transmitted columns * Z).
RatePoint make_rate_point(const PbrlFamily& family, std::size_t num_irc_transmitted);

/// Rate points of the shipped family configuration, lowest rate first.
std::vector<RatePoint> family_rate_points(const PbrlFamily& family);

/// Finds the rate point whose code rate is within 1e-9 of `code_rate`.
RatePoint find_rate_point(const PbrlFamily& family, double code_rate);

/// Parses "1/2", "0.5" style rate strings.
double parse_rate(std::string_view text);

struct PunctureMask {
    std::vector<std::uint8_t> punctured;  // per variable of the mother code
    double puncture_rate = 0.0;           // punctured fraction among variables of degree > 1

    /// Mask restricted to the first `cols` variables (the lifted code of a rate point).
    std::vector<std::uint8_t> prefix(std::size_t cols) const;
};

/// Z-fold circulant lift of the HRC plus the first num_irc_transmitted IRC
/// rows and their degree-one columns. Check r*Z+i connects to variable
/// c*Z + (i + shift) mod Z.
SparseMatrix lift(const PbrlFamily& family, const RatePoint& rate);

/// Lift of the full mother code (every IRC row present).
SparseMatrix lift_mother(const PbrlFamily& family);

/// Lift of an arbitrary protograph with explicit shifts.
SparseMatrix lift_protograph(const Protograph& proto, const std::vector<std::vector<std::vector<int>>>& shifts,
                             std::size_t lifting);

/// Puncture pattern over the mother code: lifted punctured HRC columns plus
/// every untransmitted IRC degree-one column.
PunctureMask build_mask(const PbrlFamily& family, const RatePoint& rate);

/// Greedy girth-maximizing circulant shift selection.
std::vector<std::vector<std::vector<int>>> greedy_girth_shifts(const Protograph& proto, std::size_t lifting,
                                                               std::uint64_t seed);

struct DegreeDistributions {
    std::map<int, double> lambda;  // variable degree -> edge fraction
    std::map<int, double> rho;     // check degree -> edge fraction
};

DegreeDistributions degree_distributions(const SparseMatrix& h);

/// Boolean information-propagation analysis for a punctured graph.
///
/// A variable-to-check edge is informative at iteration i when its variable
/// is transmitted or received at least one informative check message at
/// iteration i-1 from another edge. A check-to-variable edge is informative
/// when every other edge into the check is informative at iteration i.
struct ScheduleIteration {
    std::vector<std::uint8_t> v2c_active;          // per edge
    std::vector<std::uint8_t> c2v_active;          // per edge
    std::vector<std::uint16_t> v2c_inputs;         // informative check inputs feeding each v2c edge
    std::vector<int> vn_effective_degree;          // per variable: largest effective degree of its messages
    std::vector<int> cn_effective_degree;          // per check: informative incoming messages
    std::map<int, double> lambda_eff;              // effective degree -> fraction of informative v2c edges
    std::map<int, double> rho_eff;                 // check degree -> fraction of informative c2v edges
    std::vector<std::size_t> v2c_by_inputs;        // count of informative v2c edges by check-input count
    std::vector<std::size_t> c2v_by_check_degree;  // count of informative c2v edges by check degree
    std::vector<std::size_t> app_by_inputs;        // count of variables by informative check inputs (all edges)
    std::vector<std::size_t> app_by_inputs_punctured;
};

struct EffectiveDegreeSchedule {
    std::vector<ScheduleIteration> iterations;
    int max_var_degree = 0;
    int max_check_degree = 0;
};

/// Effective degree of a v2c message: informative check inputs plus one for a
/// transmitted channel value.
EffectiveDegreeSchedule effective_degree_schedule(const SparseMatrix& h, const std::vector<std::uint8_t>& punctured,
                                                  int max_iters);

/// MacKay alist text format.
SparseMatrix parse_alist(std::string_view text);
std::string write_alist(const SparseMatrix& h);

/// JSON family description (base matrix, IRC rows, punctured columns, Z, shifts).
PbrlFamily parse_family_json(std::string_view text);
std::string write_family_json(const PbrlFamily& family);
PbrlFamily load_family(const std::string& path);

/// The shipped stand-in family: K = 1032, Z = 129, one punctured HRC column,
/// rate points 1/3, 1/2 and 2/3. Shifts are generated by greedy_girth_shifts.
PbrlFamily stand_in_family();

}  // namespace ibldpc
