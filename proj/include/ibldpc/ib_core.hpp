#pragma once

// Information-bottleneck machinery for a binary relevant variable X.
//
// All information quantities are reported in bits; LLRs are natural-log
// values log p(x=0|.)/p(x=1|.). Every mapping produced here is deterministic:
// each observation symbol goes to exactly one cluster.

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace ibldpc {

/// Discrete joint distribution p(x, y) with x in {0,1} and |Y| >= 1 symbols.
class BinaryJoint {
public:
    static constexpr double kTolerance = 1e-12;

    BinaryJoint() = default;

    /// All-zero joint of the given alphabet size; fill it with `at()` and
    /// call `normalize()` or `validate()` before use.
    explicit BinaryJoint(std::size_t alphabet_size);

    /// Builds a joint from the two rows p(0,y) and p(1,y) and validates it.
    static BinaryJoint from_rows(std::span<const double> row0, std::span<const double> row1);

    /// Like from_rows, but rescales the cells to unit mass first.
    static BinaryJoint normalized(std::span<const double> row0, std::span<const double> row1);

    /// Uniform in x, uniform in y: carries no information.
    static BinaryJoint uniform(std::size_t alphabet_size);

    std::size_t size() const noexcept { return cells_.size(); }
    double operator()(int x, std::size_t y) const { return cells_[y][static_cast<std::size_t>(x)]; }
    double& at(int x, std::size_t y) { return cells_[y][static_cast<std::size_t>(x)]; }

    double total() const;
    double px(int x) const;
    double py(std::size_t y) const { return cells_[y][0] + cells_[y][1]; }

    /// p(x=0 | y); 0.5 when y carries no mass.
    double posterior0(std::size_t y) const;

    /// log p(0,y)/p(1,y) in nats; 0 for zero-mass symbols, +-inf for pure ones.
    double llr(std::size_t y) const;

    /// Rescales to unit mass; throws ValidationError on negative or all-zero cells.
    void normalize();

    /// Throws ValidationError naming the offending entry or sum.
    void validate() const;

    /// True when p(0,y) == p(1,|Y|-1-y) for all y within `tol`.
    bool is_mirror_symmetric(double tol = 1e-12) const;

    /// Forces exact mirror symmetry by copying the lower half of the alphabet
    /// onto the reflected upper half. The caller guarantees approximate symmetry.
    void make_mirror_symmetric();

    /// Relabels y -> perm[y].
    BinaryJoint permuted(std::span<const std::size_t> perm) const;

private:
    std::vector<std::array<double, 2>> cells_;
};

/// Mutual information I(X;Y) in bits, with 0 log 0 := 0.
double mutual_information(const BinaryJoint& joint);

/// Deterministic clustering t = assignment[y] with its induced statistics.
struct ClusterMapping {
    std::vector<std::uint32_t> assignment;  // |Y| entries in [0, |T|)
    BinaryJoint clustered;                  // p(x, t)
    std::vector<double> meanings;           // p(x=0 | t); 0.5 for empty clusters
    double information = 0.0;               // I(X;T) in bits
    bool degenerate = false;                // some cluster has no members or no mass

    std::size_t num_clusters() const noexcept { return meanings.size(); }
    double llr(std::size_t t) const { return clustered.llr(t); }
};

/// Applies an assignment and computes p(x,t), meanings and I(X;T).
ClusterMapping apply_assignment(const BinaryJoint& joint, std::vector<std::uint32_t> assignment,
                                std::size_t num_clusters);

struct IbOptions {
    int restarts = 10;
    int max_sweeps = 500;
    std::uint64_t seed = 0;
};

/// Sequential (hard) information-bottleneck clustering with seeded random
/// restarts. Every accepted move is checked to never decrease I(X;T); if
/// `trace` is given it receives I(X;T) after the initialization and after
/// every accepted move of the winning restart.
ClusterMapping ib_cluster(const BinaryJoint& joint, std::size_t num_clusters, const IbOptions& options = {},
                          std::vector<double>* trace = nullptr);

/// Optimal contiguous partition of an LLR-sorted alphabet by dynamic
/// programming over boundary placements. Throws PreconditionError naming the
/// first LLR inversion when the input is not sorted.
ClusterMapping scalar_quantizer_dp(const BinaryJoint& joint, std::size_t num_clusters);

/// Sorts the alphabet by LLR and runs the boundary DP. For binary X the
/// optimum deterministic quantizer is contiguous in LLR, so this is the exact
/// IB solution. Cluster indices ascend with LLR.
///
/// With a `reflection` (an involution y -> y' with p(x,y') = p(1-x,y)) and an
/// even cluster count, the result is exactly mirror symmetric:
/// assignment[reflection[y]] == |T|-1-assignment[y].
ClusterMapping cluster_by_llr(const BinaryJoint& joint, std::size_t num_clusters,
                              std::span<const std::size_t> reflection = {});

/// Same as cluster_by_llr, with an explicit ordering key per symbol (for
/// alphabets whose LLR order is known exactly, such as a channel grid).
ClusterMapping cluster_by_keys(const BinaryJoint& joint, std::span<const double> keys, std::size_t num_clusters,
                               std::span<const std::size_t> reflection = {});

/// Reflection y -> |Y|-1-y.
std::vector<std::size_t> mirror_reflection(std::size_t alphabet_size);

struct AlignmentContext {
    int context_id = 0;
    double weight = 0.0;  // probability of the context
    BinaryJoint joint;    // p(x, t | context)
};

struct AlignmentResult {
    std::vector<std::vector<std::uint32_t>> assignment;  // [context][t] -> z
    BinaryJoint aligned;                                 // p(x, z) of the weighted mixture
    std::vector<double> meanings;                        // p(x=0 | z)
    double information = 0.0;                            // I(X;Z)
    double information_joint = 0.0;                      // I(X;T,context)
};

/// Message alignment: cluster the pair (t, context) into |Z| indices so that
/// equal outgoing indices carry equal beliefs irrespective of the context.
/// Contexts with zero weight still receive an assignment based on their
/// conditional LLRs. Mirror-symmetric contexts yield symmetric assignments.
AlignmentResult align_messages(std::span<const AlignmentContext> contexts, std::size_t num_clusters);

}  // namespace ibldpc
