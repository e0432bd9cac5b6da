#include "ibldpc/ib_core.hpp"

#include "ibldpc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

namespace ibldpc {

namespace {

double neumaier_sum(std::span<const double> values)
{
    double sum = 0.0;
    double carry = 0.0;
    for (double v : values) {
        double t = sum + v;
        if (std::abs(sum) >= std::abs(v)) {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    return sum + carry;
}

// Contribution of one cluster with masses (m0, m1) to I(X;T), in bits.
inline double cluster_information(double m0, double m1, double px0, double px1)
{
    const double m = m0 + m1;
    if (m <= 0.0) {
        return 0.0;
    }
    double out = 0.0;
    if (m0 > 0.0) {
        out += m0 * std::log2(m0 / (px0 * m));
    }
    if (m1 > 0.0) {
        out += m1 * std::log2(m1 / (px1 * m));
    }
    return out;
}

std::uint64_t splitmix64(std::uint64_t& state)
{
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Optimal partition of the sequence `order` into `k` contiguous segments.
// Returns the segment index of every position in `order`.
std::vector<std::uint32_t> contiguous_partition(const BinaryJoint& joint, std::span<const std::size_t> order,
                                                std::size_t k, double px0, double px1)
{
    const std::size_t n = order.size();
    std::vector<double> p0(n + 1, 0.0);
    std::vector<double> p1(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        p0[i + 1] = p0[i] + joint(0, order[i]);
        p1[i + 1] = p1[i] + joint(1, order[i]);
    }
    auto direct = [&](std::size_t i, std::size_t j) {
        return cluster_information(std::max(0.0, p0[j] - p0[i]), std::max(0.0, p1[j] - p1[i]), px0, px1);
    };
    // The DP revisits every (i, j) segment once per cluster count, so small
    // alphabets tabulate the segment values up front.
    std::vector<double> table;
    const bool tabulate = k > 2 && n <= 2048;
    if (tabulate) {
        table.assign((n + 1) * (n + 1), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j <= n; ++j) {
                table[i * (n + 1) + j] = direct(i, j);
            }
        }
    }
    auto segment = [&](std::size_t i, std::size_t j) { return tabulate ? table[i * (n + 1) + j] : direct(i, j); };

    const double neg_inf = -std::numeric_limits<double>::infinity();
    // best[c][j]: best value splitting the first j elements into c+1 segments.
    std::vector<std::vector<double>> best(k, std::vector<double>(n + 1, neg_inf));
    std::vector<std::vector<std::uint32_t>> split(k, std::vector<std::uint32_t>(n + 1, 0));
    for (std::size_t j = 1; j <= n - (k - 1); ++j) {
        best[0][j] = segment(0, j);
    }
    for (std::size_t c = 1; c < k; ++c) {
        const std::size_t j_max = n - (k - 1 - c);
        for (std::size_t j = c + 1; j <= j_max; ++j) {
            double top = neg_inf;
            std::uint32_t arg = 0;
            for (std::size_t i = c; i < j; ++i) {
                const double v = best[c - 1][i] + segment(i, j);
                if (v > top) {
                    top = v;
                    arg = static_cast<std::uint32_t>(i);
                }
            }
            best[c][j] = top;
            split[c][j] = arg;
        }
    }

    std::vector<std::uint32_t> segment_of(n, 0);
    std::size_t end = n;
    for (std::size_t c = k; c-- > 0;) {
        const std::size_t begin = c == 0 ? 0 : split[c][end];
        for (std::size_t i = begin; i < end; ++i) {
            segment_of[i] = static_cast<std::uint32_t>(c);
        }
        end = begin;
    }
    return segment_of;
}

// Shared core of cluster_by_llr and align_messages: `keys` orders the
// alphabet, the joint supplies the masses.
ClusterMapping cluster_sorted(const BinaryJoint& joint, std::span<const double> keys, std::size_t k,
                              std::span<const std::size_t> reflection)
{
    const std::size_t n = joint.size();
    if (k == 0 || k > n) {
        std::ostringstream msg;
        msg << "cluster count " << k << " outside [1, " << n << "]";
        throw ParameterError(msg.str());
    }
    const double px0 = joint.px(0);
    const double px1 = joint.px(1);
    auto before = [&](std::size_t a, std::size_t b) {
        if (keys[a] != keys[b]) {
            return keys[a] < keys[b];
        }
        return a < b;
    };

    bool symmetric = !reflection.empty() && k % 2 == 0;
    if (symmetric) {
        if (reflection.size() != n) {
            throw ParameterError("reflection size does not match alphabet");
        }
        for (std::size_t y = 0; y < n; ++y) {
            const std::size_t r = reflection[y];
            if (r >= n || reflection[r] != y) {
                throw ParameterError("reflection is not an involution");
            }
            if (r == y) {
                symmetric = false;  // a self-mirrored symbol cannot be split
                break;
            }
        }
    }

    std::vector<std::uint32_t> assignment(n, 0);
    if (symmetric) {
        std::vector<std::size_t> lower;
        lower.reserve(n / 2);
        for (std::size_t y = 0; y < n; ++y) {
            if (before(y, reflection[y])) {
                lower.push_back(y);
            }
        }
        std::sort(lower.begin(), lower.end(), before);
        if (lower.size() * 2 != n || lower.size() < k / 2) {
            symmetric = false;
        } else {
            const auto seg = contiguous_partition(joint, lower, k / 2, px0, px1);
            for (std::size_t i = 0; i < lower.size(); ++i) {
                assignment[lower[i]] = seg[i];
                assignment[reflection[lower[i]]] = static_cast<std::uint32_t>(k - 1 - seg[i]);
            }
        }
    }
    if (!symmetric) {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), before);
        const auto seg = contiguous_partition(joint, order, k, px0, px1);
        for (std::size_t i = 0; i < n; ++i) {
            assignment[order[i]] = seg[i];
        }
    }
    return apply_assignment(joint, std::move(assignment), k);
}

std::vector<double> llr_keys(const BinaryJoint& joint)
{
    std::vector<double> keys(joint.size());
    for (std::size_t y = 0; y < joint.size(); ++y) {
        keys[y] = joint.llr(y);
    }
    return keys;
}

}  // namespace

BinaryJoint::BinaryJoint(std::size_t alphabet_size) : cells_(alphabet_size, {0.0, 0.0})
{
    if (alphabet_size == 0) {
        throw ParameterError("binary joint needs at least one observation symbol");
    }
}

BinaryJoint BinaryJoint::from_rows(std::span<const double> row0, std::span<const double> row1)
{
    if (row0.size() != row1.size()) {
        throw ParameterError("joint rows differ in length");
    }
    BinaryJoint j(row0.size());
    for (std::size_t y = 0; y < row0.size(); ++y) {
        j.cells_[y] = {row0[y], row1[y]};
    }
    j.validate();
    return j;
}

BinaryJoint BinaryJoint::normalized(std::span<const double> row0, std::span<const double> row1)
{
    if (row0.size() != row1.size()) {
        throw ParameterError("joint rows differ in length");
    }
    BinaryJoint j(row0.size());
    for (std::size_t y = 0; y < row0.size(); ++y) {
        j.cells_[y] = {row0[y], row1[y]};
    }
    j.normalize();
    return j;
}

BinaryJoint BinaryJoint::uniform(std::size_t alphabet_size)
{
    BinaryJoint j(alphabet_size);
    const double v = 0.5 / static_cast<double>(alphabet_size);
    for (auto& c : j.cells_) {
        c = {v, v};
    }
    return j;
}

double BinaryJoint::total() const
{
    std::vector<double> flat;
    flat.reserve(2 * cells_.size());
    for (const auto& c : cells_) {
        flat.push_back(c[0]);
        flat.push_back(c[1]);
    }
    return neumaier_sum(flat);
}

double BinaryJoint::px(int x) const
{
    std::vector<double> col;
    col.reserve(cells_.size());
    for (const auto& c : cells_) {
        col.push_back(c[static_cast<std::size_t>(x)]);
    }
    return neumaier_sum(col);
}

double BinaryJoint::posterior0(std::size_t y) const
{
    const double m = py(y);
    return m > 0.0 ? cells_[y][0] / m : 0.5;
}

double BinaryJoint::llr(std::size_t y) const
{
    const double a = cells_[y][0];
    const double b = cells_[y][1];
    if (a <= 0.0 && b <= 0.0) {
        return 0.0;
    }
    // log(a) - log(b) is exactly antisymmetric under swapping a and b.
    return std::log(a) - std::log(b);
}

void BinaryJoint::normalize()
{
    for (std::size_t y = 0; y < cells_.size(); ++y) {
        for (int x = 0; x < 2; ++x) {
            const double v = cells_[y][static_cast<std::size_t>(x)];
            if (!(v >= 0.0) || !std::isfinite(v)) {
                std::ostringstream msg;
                msg << "joint cell p(" << x << "," << y << ") = " << v << " is not a finite nonnegative value";
                throw ValidationError(msg.str());
            }
        }
    }
    const double s = total();
    if (!(s > 0.0)) {
        throw ValidationError("joint has no probability mass");
    }
    for (auto& c : cells_) {
        c[0] /= s;
        c[1] /= s;
    }
}

void BinaryJoint::validate() const
{
    if (cells_.empty()) {
        throw ValidationError("joint has an empty observation alphabet");
    }
    for (std::size_t y = 0; y < cells_.size(); ++y) {
        for (int x = 0; x < 2; ++x) {
            const double v = cells_[y][static_cast<std::size_t>(x)];
            if (!(v >= 0.0) || !std::isfinite(v)) {
                std::ostringstream msg;
                msg << "joint cell p(" << x << "," << y << ") = " << v << " is not a finite nonnegative value";
                throw ValidationError(msg.str());
            }
        }
    }
    const double s = total();
    if (std::abs(s - 1.0) > kTolerance) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "joint is not normalized: total mass " << s;
        throw ValidationError(msg.str());
    }
}

bool BinaryJoint::is_mirror_symmetric(double tol) const
{
    const std::size_t n = cells_.size();
    for (std::size_t y = 0; y < n; ++y) {
        if (std::abs(cells_[y][0] - cells_[n - 1 - y][1]) > tol) {
            return false;
        }
    }
    return true;
}

void BinaryJoint::make_mirror_symmetric()
{
    const std::size_t n = cells_.size();
    for (std::size_t y = 0; y < n / 2; ++y) {
        cells_[n - 1 - y] = {cells_[y][1], cells_[y][0]};
    }
    if (n % 2 == 1) {
        auto& mid = cells_[n / 2];
        const double m = 0.5 * (mid[0] + mid[1]);
        mid = {m, m};
    }
}

BinaryJoint BinaryJoint::permuted(std::span<const std::size_t> perm) const
{
    if (perm.size() != cells_.size()) {
        throw ParameterError("permutation size does not match alphabet");
    }
    BinaryJoint out(cells_.size());
    for (std::size_t y = 0; y < cells_.size(); ++y) {
        out.cells_[perm[y]] = cells_[y];
    }
    return out;
}

double mutual_information(const BinaryJoint& joint)
{
    joint.validate();
    const double px0 = joint.px(0);
    const double px1 = joint.px(1);
    std::vector<double> terms;
    terms.reserve(joint.size());
    for (std::size_t y = 0; y < joint.size(); ++y) {
        terms.push_back(cluster_information(joint(0, y), joint(1, y), px0, px1));
    }
    return std::clamp(neumaier_sum(terms), 0.0, 1.0);
}

ClusterMapping apply_assignment(const BinaryJoint& joint, std::vector<std::uint32_t> assignment,
                                std::size_t num_clusters)
{
    if (assignment.size() != joint.size()) {
        throw ParameterError("assignment size does not match alphabet");
    }
    if (num_clusters == 0) {
        throw ParameterError("cluster count must be positive");
    }
    ClusterMapping out;
    out.clustered = BinaryJoint(num_clusters);
    std::vector<std::size_t> members(num_clusters, 0);
    for (std::size_t y = 0; y < joint.size(); ++y) {
        const auto t = assignment[y];
        if (t >= num_clusters) {
            throw ParameterError("assignment refers to a cluster beyond the requested count");
        }
        out.clustered.at(0, t) += joint(0, y);
        out.clustered.at(1, t) += joint(1, y);
        ++members[t];
    }
    out.meanings.resize(num_clusters);
    for (std::size_t t = 0; t < num_clusters; ++t) {
        out.meanings[t] = out.clustered.posterior0(t);
        if (members[t] == 0 || out.clustered.py(t) <= 0.0) {
            out.degenerate = true;
        }
    }
    out.assignment = std::move(assignment);
    out.information = mutual_information(out.clustered);
    return out;
}

ClusterMapping ib_cluster(const BinaryJoint& joint, std::size_t num_clusters, const IbOptions& options,
                          std::vector<double>* trace)
{
    joint.validate();
    const std::size_t n = joint.size();
    const std::size_t k = num_clusters;
    if (k == 0 || k > n) {
        std::ostringstream msg;
        msg << "cluster count " << k << " outside [1, " << n << "]";
        throw ParameterError(msg.str());
    }
    const double px0 = joint.px(0);
    const double px1 = joint.px(1);

    // Initialization for restart 0: equal-mass contiguous runs in LLR order.
    const auto keys = llr_keys(joint);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return keys[a] != keys[b] ? keys[a] < keys[b] : a < b;
    });

    std::uint64_t seed_state = options.seed;
    const int restarts = std::max(1, options.restarts);

    ClusterMapping best;
    bool have_best = false;
    std::vector<double> best_trace;

    for (int r = 0; r < restarts; ++r) {
        std::vector<std::uint32_t> assign(n, 0);
        if (r == 0) {
            for (std::size_t i = 0; i < n; ++i) {
                assign[order[i]] = static_cast<std::uint32_t>((i * k) / n);
            }
        } else {
            std::mt19937_64 rng(splitmix64(seed_state));
            std::vector<std::size_t> perm(n);
            std::iota(perm.begin(), perm.end(), std::size_t{0});
            std::shuffle(perm.begin(), perm.end(), rng);
            std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(k - 1));
            for (std::size_t i = 0; i < n; ++i) {
                assign[perm[i]] = i < k ? static_cast<std::uint32_t>(i) : pick(rng);
            }
        }

        std::vector<double> m0(k, 0.0), m1(k, 0.0);
        std::vector<std::size_t> count(k, 0);
        for (std::size_t y = 0; y < n; ++y) {
            m0[assign[y]] += joint(0, y);
            m1[assign[y]] += joint(1, y);
            ++count[assign[y]];
        }
        auto objective = [&] {
            double s = 0.0;
            for (std::size_t t = 0; t < k; ++t) {
                s += cluster_information(m0[t], m1[t], px0, px1);
            }
            return s;
        };
        double current = objective();
        std::vector<double> local_trace{current};

        auto sweep_until_stable = [&] {
            for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
                bool moved = false;
                for (std::size_t y = 0; y < n; ++y) {
                    const std::uint32_t from = assign[y];
                    if (count[from] <= 1) {
                        continue;
                    }
                    const double a0 = joint(0, y);
                    const double a1 = joint(1, y);
                    const double removed = cluster_information(m0[from] - a0, m1[from] - a1, px0, px1);
                    const double stay_gain = cluster_information(m0[from], m1[from], px0, px1) - removed;
                    double best_gain = -std::numeric_limits<double>::infinity();
                    std::uint32_t target = from;
                    for (std::uint32_t t = 0; t < k; ++t) {
                        if (t == from) {
                            continue;
                        }
                        const double gain = cluster_information(m0[t] + a0, m1[t] + a1, px0, px1) -
                                            cluster_information(m0[t], m1[t], px0, px1);
                        if (gain > best_gain) {  // lowest index wins ties
                            best_gain = gain;
                            target = t;
                        }
                    }
                    // Staying put wins over a move that is not strictly better.
                    if (target == from || !(best_gain > stay_gain + 1e-15)) {
                        continue;
                    }
                    m0[from] -= a0;
                    m1[from] -= a1;
                    --count[from];
                    m0[target] += a0;
                    m1[target] += a1;
                    ++count[target];
                    assign[y] = target;
                    const double next = objective();
                    if (next < current - 1e-12) {
                        throw std::logic_error("sequential IB step decreased I(X;T)");
                    }
                    current = next;
                    local_trace.push_back(current);
                    moved = true;
                }
                if (!moved) {
                    break;
                }
            }
        };
        sweep_until_stable();

        // Re-split empty-mass clusters from the highest-entropy cluster.
        for (std::size_t attempt = 0; attempt < k; ++attempt) {
            std::size_t empty = k;
            for (std::size_t t = 0; t < k; ++t) {
                if (m0[t] + m1[t] <= 0.0) {
                    empty = t;
                    break;
                }
            }
            if (empty == k) {
                break;
            }
            std::size_t donor = k;
            double top_entropy = -1.0;
            for (std::size_t t = 0; t < k; ++t) {
                std::size_t positive = 0;
                for (std::size_t y = 0; y < n; ++y) {
                    positive += (assign[y] == t && joint.py(y) > 0.0) ? 1 : 0;
                }
                if (positive < 2) {
                    continue;
                }
                const double m = m0[t] + m1[t];
                const double q = m0[t] / m;
                const double h = (q > 0.0 ? -q * std::log2(q) : 0.0) + (q < 1.0 ? -(1 - q) * std::log2(1 - q) : 0.0);
                if (h > top_entropy) {
                    top_entropy = h;
                    donor = t;
                }
            }
            if (donor == k) {
                break;
            }
            std::vector<std::size_t> members;
            for (std::size_t y : order) {
                if (assign[y] == donor && joint.py(y) > 0.0) {
                    members.push_back(y);
                }
            }
            for (std::size_t i = members.size() / 2; i < members.size(); ++i) {
                const std::size_t y = members[i];
                m0[donor] -= joint(0, y);
                m1[donor] -= joint(1, y);
                --count[donor];
                m0[empty] += joint(0, y);
                m1[empty] += joint(1, y);
                ++count[empty];
                assign[y] = static_cast<std::uint32_t>(empty);
            }
            // Zero-mass members left behind keep the donor non-empty by count.
            current = objective();
            local_trace.push_back(current);
            sweep_until_stable();
        }

        ClusterMapping candidate = apply_assignment(joint, assign, k);
        if (!have_best || candidate.information > best.information + 1e-15) {
            best = std::move(candidate);
            best_trace = std::move(local_trace);
            have_best = true;
        }
    }

    // Renumber clusters by ascending meaning LLR.
    std::vector<std::size_t> rank(k);
    std::iota(rank.begin(), rank.end(), std::size_t{0});
    std::stable_sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) {
        return best.clustered.llr(a) < best.clustered.llr(b);
    });
    std::vector<std::uint32_t> relabel(k);
    for (std::size_t i = 0; i < k; ++i) {
        relabel[rank[i]] = static_cast<std::uint32_t>(i);
    }
    for (auto& t : best.assignment) {
        t = relabel[t];
    }
    ClusterMapping out = apply_assignment(joint, std::move(best.assignment), k);
    if (trace != nullptr) {
        *trace = std::move(best_trace);
    }
    return out;
}

ClusterMapping scalar_quantizer_dp(const BinaryJoint& joint, std::size_t num_clusters)
{
    joint.validate();
    const std::size_t n = joint.size();
    if (num_clusters == 0 || num_clusters > n) {
        std::ostringstream msg;
        msg << "cluster count " << num_clusters << " outside [1, " << n << "]";
        throw ParameterError(msg.str());
    }
    double previous = -std::numeric_limits<double>::infinity();
    std::size_t previous_index = 0;
    for (std::size_t y = 0; y < n; ++y) {
        if (joint.py(y) <= 0.0) {
            continue;
        }
        const double l = joint.llr(y);
        if (l < previous) {
            std::ostringstream msg;
            msg << "observation alphabet not sorted by LLR: symbol " << y << " (LLR " << l
                << ") follows symbol " << previous_index << " (LLR " << previous << ")";
            throw PreconditionError(msg.str());
        }
        previous = l;
        previous_index = y;
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto seg = contiguous_partition(joint, order, num_clusters, joint.px(0), joint.px(1));
    return apply_assignment(joint, seg, num_clusters);
}

ClusterMapping cluster_by_llr(const BinaryJoint& joint, std::size_t num_clusters,
                              std::span<const std::size_t> reflection)
{
    joint.validate();
    const auto keys = llr_keys(joint);
    return cluster_sorted(joint, keys, num_clusters, reflection);
}

ClusterMapping cluster_by_keys(const BinaryJoint& joint, std::span<const double> keys, std::size_t num_clusters,
                               std::span<const std::size_t> reflection)
{
    joint.validate();
    if (keys.size() != joint.size()) {
        throw ParameterError("key count does not match alphabet");
    }
    return cluster_sorted(joint, keys, num_clusters, reflection);
}

std::vector<std::size_t> mirror_reflection(std::size_t alphabet_size)
{
    std::vector<std::size_t> r(alphabet_size);
    for (std::size_t y = 0; y < alphabet_size; ++y) {
        r[y] = alphabet_size - 1 - y;
    }
    return r;
}

AlignmentResult align_messages(std::span<const AlignmentContext> contexts, std::size_t num_clusters)
{
    if (contexts.empty()) {
        throw ParameterError("message alignment needs at least one context");
    }
    const std::size_t t_size = contexts.front().joint.size();
    double weight_sum = 0.0;
    bool symmetric = true;
    for (const auto& c : contexts) {
        if (c.joint.size() != t_size) {
            std::ostringstream msg;
            msg << "context " << c.context_id << " has |T| = " << c.joint.size() << ", expected " << t_size;
            throw ParameterError(msg.str());
        }
        if (!(c.weight >= 0.0)) {
            throw ParameterError("context weights must be nonnegative");
        }
        c.joint.validate();
        weight_sum += c.weight;
        symmetric = symmetric && c.joint.is_mirror_symmetric();
    }
    if (std::abs(weight_sum - 1.0) > BinaryJoint::kTolerance) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "context weights sum to " << weight_sum;
        throw ParameterError(msg.str());
    }

    const std::size_t n = contexts.size() * t_size;
    BinaryJoint combined(n);
    std::vector<double> keys(n);
    std::vector<std::size_t> reflection;
    if (symmetric) {
        reflection.resize(n);
    }
    for (std::size_t c = 0; c < contexts.size(); ++c) {
        const auto& ctx = contexts[c];
        for (std::size_t t = 0; t < t_size; ++t) {
            const std::size_t i = c * t_size + t;
            combined.at(0, i) = ctx.weight * ctx.joint(0, t);
            combined.at(1, i) = ctx.weight * ctx.joint(1, t);
            keys[i] = ctx.joint.llr(t);
            if (symmetric) {
                reflection[i] = c * t_size + (t_size - 1 - t);
            }
        }
    }
    const ClusterMapping mapping = cluster_sorted(combined, keys, num_clusters, reflection);

    AlignmentResult out;
    out.assignment.assign(contexts.size(), std::vector<std::uint32_t>(t_size, 0));
    for (std::size_t c = 0; c < contexts.size(); ++c) {
        for (std::size_t t = 0; t < t_size; ++t) {
            out.assignment[c][t] = mapping.assignment[c * t_size + t];
        }
    }
    out.aligned = mapping.clustered;
    out.meanings = mapping.meanings;
    out.information = mapping.information;
    out.information_joint = mutual_information(combined);
    return out;
}

}  // namespace ibldpc
