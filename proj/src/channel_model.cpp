#include "ibldpc/channel_model.hpp"

#include "ibldpc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace ibldpc {

namespace {

// P(a <= Z < b) for a standard normal Z, accurate in both tails.
double normal_interval(double a, double b)
{
    constexpr double inv_sqrt2 = 0.70710678118654752440;
    if (a >= 0.0) {
        return 0.5 * (std::erfc(a * inv_sqrt2) - std::erfc(b * inv_sqrt2));
    }
    if (b <= 0.0) {
        return 0.5 * (std::erfc(-b * inv_sqrt2) - std::erfc(-a * inv_sqrt2));
    }
    return 1.0 - 0.5 * std::erfc(-a * inv_sqrt2) - 0.5 * std::erfc(b * inv_sqrt2);
}

}  // namespace

ChannelSpec::ChannelSpec(double ebn0_db, double code_rate) : ebn0_db_(ebn0_db), code_rate_(code_rate)
{
    if (!(code_rate > 0.0 && code_rate <= 1.0)) {
        throw ParameterError("code rate must lie in (0, 1]");
    }
    if (!std::isfinite(ebn0_db)) {
        throw ParameterError("Eb/N0 must be finite");
    }
    sigma_ = std::sqrt(1.0 / (2.0 * code_rate * std::pow(10.0, ebn0_db / 10.0)));
}

ChannelSpec ChannelSpec::from_sigma(double noise_sigma, double code_rate)
{
    if (!(noise_sigma > 0.0)) {
        throw ParameterError("noise sigma must be positive");
    }
    const double ebn0_lin = 1.0 / (2.0 * code_rate * noise_sigma * noise_sigma);
    return ChannelSpec(10.0 * std::log10(ebn0_lin), code_rate);
}

DiscretizedChannel discretize_channel_grid(const ChannelSpec& spec, std::size_t grid_points, double clip_sigma)
{
    if (grid_points < 8) {
        throw ParameterError("channel grid needs at least 8 points");
    }
    if (grid_points % 2 != 0) {
        throw ParameterError("channel grid must have an even number of points");
    }
    if (!(clip_sigma > 0.0)) {
        throw ParameterError("clip width must be positive");
    }
    const double sigma = spec.noise_sigma();
    const double span = 1.0 + clip_sigma * sigma;
    const auto g = static_cast<double>(grid_points);

    DiscretizedChannel out;
    out.cell_edges.resize(grid_points + 1);
    for (std::size_t i = 0; i <= grid_points; ++i) {
        // Exactly antisymmetric: edge[g - i] == -edge[i], edge[g/2] == 0.
        out.cell_edges[i] = span * (2.0 * static_cast<double>(i) - g) / g;
    }

    // Likelihood of each cell given x = 0 (mean +1); outer cells take the tails.
    std::vector<double> like0(grid_points);
    const double inf = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid_points; ++i) {
        const double lo = i == 0 ? -inf : (out.cell_edges[i] - 1.0) / sigma;
        const double hi = i + 1 == grid_points ? inf : (out.cell_edges[i + 1] - 1.0) / sigma;
        like0[i] = normal_interval(lo, hi);
    }
    std::vector<double> row0(grid_points), row1(grid_points);
    for (std::size_t i = 0; i < grid_points; ++i) {
        row0[i] = 0.5 * like0[i];
        row1[i] = 0.5 * like0[grid_points - 1 - i];
    }
    out.joint = BinaryJoint::normalized(row0, row1);
    return out;
}

BinaryJoint discretize_channel(const ChannelSpec& spec, std::size_t grid_points, double clip_sigma)
{
    return discretize_channel_grid(spec, grid_points, clip_sigma).joint;
}

void ChannelQuantizer::validate() const
{
    const std::size_t k = cardinality();
    if (index_meanings.size() != k || joint.size() != k) {
        throw ValidationError("quantizer arrays disagree on the cardinality");
    }
    for (std::size_t i = 1; i < boundaries.size(); ++i) {
        if (!(boundaries[i] > boundaries[i - 1])) {
            throw ValidationError("quantizer boundaries are not strictly increasing");
        }
    }
    for (std::size_t i = 0; i < boundaries.size(); ++i) {
        if (std::abs(boundaries[i] + boundaries[boundaries.size() - 1 - i]) > 1e-9) {
            throw ValidationError("quantizer boundaries are not symmetric about zero");
        }
    }
    for (std::size_t i = 1; i < k; ++i) {
        if (!(index_meanings[i] > index_meanings[i - 1])) {
            throw ValidationError("quantizer meanings are not strictly increasing");
        }
    }
}

ChannelQuantizer design_quantizer(const ChannelSpec& spec, std::size_t cardinality, std::size_t grid_points,
                                  double clip_sigma)
{
    if (cardinality < 2 || (cardinality & (cardinality - 1)) != 0) {
        throw ParameterError("quantizer cardinality must be a power of two >= 2");
    }
    if (cardinality > grid_points) {
        std::ostringstream msg;
        msg << "quantizer cardinality " << cardinality << " exceeds the " << grid_points << "-point grid";
        throw ParameterError(msg.str());
    }
    const DiscretizedChannel grid = discretize_channel_grid(spec, grid_points, clip_sigma);

    // Cell centers order the grid exactly by LLR (LLR(y) = 2y / sigma^2).
    std::vector<double> centers(grid_points);
    for (std::size_t i = 0; i < grid_points; ++i) {
        centers[i] = 0.5 * (grid.cell_edges[i] + grid.cell_edges[i + 1]);
    }
    const auto reflection = mirror_reflection(grid_points);
    const ClusterMapping mapping = cluster_by_keys(grid.joint, centers, cardinality, reflection);

    ChannelQuantizer q;
    for (std::size_t i = 1; i < grid_points; ++i) {
        if (mapping.assignment[i] != mapping.assignment[i - 1]) {
            q.boundaries.push_back(grid.cell_edges[i]);
        }
    }
    if (q.boundaries.size() != cardinality - 1) {
        throw DesignError("channel quantizer design produced non-contiguous cells");
    }
    q.joint = mapping.clustered;
    q.joint.make_mirror_symmetric();
    q.index_meanings.resize(cardinality);
    for (std::size_t t = 0; t < cardinality; ++t) {
        q.index_meanings[t] = q.joint.llr(t);
    }
    q.design_ebn0_db = spec.ebn0_db();
    q.code_rate = spec.code_rate();
    q.information = mutual_information(q.joint);
    q.fine_information = mutual_information(grid.joint);
    q.validate();
    return q;
}

std::size_t quantize_sample(const ChannelQuantizer& q, double y)
{
    if (std::isnan(y)) {
        throw ValidationError("cannot quantize a NaN channel sample");
    }
    return static_cast<std::size_t>(std::upper_bound(q.boundaries.begin(), q.boundaries.end(), y) -
                                    q.boundaries.begin());
}

}  // namespace ibldpc
