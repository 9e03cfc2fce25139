#include "lss/baseline_ci.hpp"

#include "lss/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace lss {

Matrix delay_embed(const Vector& values, int ed, int tau)
{
    if (ed < 1) throw ValidationError("embedding dimension must be >= 1");
    if (tau < 1) throw ValidationError("delay must be >= 1");
    const Eigen::Index span = static_cast<Eigen::Index>(ed - 1) * tau;
    if (values.size() < span + 1)
        throw ValidationError("series of length " + std::to_string(values.size()) + " is too short for ED=" +
                              std::to_string(ed) + ", tau=" + std::to_string(tau));
    const Eigen::Index count = values.size() - span;
    Matrix points(count, ed);
    for (int d = 0; d < ed; ++d) points.col(d) = values.segment(static_cast<Eigen::Index>(d) * tau, count);
    return points;
}

std::vector<double> pair_distances(const Matrix& points, const CorrelationOptions& opts,
                                   const std::vector<Eigen::Index>& indices)
{
    const Eigen::Index n = points.rows();
    if (!indices.empty() && static_cast<Eigen::Index>(indices.size()) != n)
        throw ValidationError("index list does not match the point count");
    const auto time_of = [&](Eigen::Index i) { return indices.empty() ? i : indices[static_cast<std::size_t>(i)]; };

    const Matrix cols = points.transpose();  // one point per column
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(std::max<Eigen::Index>(n - 1, 0)) / 2);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index ti = time_of(i);
        for (Eigen::Index j = i + 1; j < n; ++j) {
            if (std::abs(time_of(j) - ti) <= opts.theiler_window) continue;
            out.push_back((cols.col(i) - cols.col(j)).norm());
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

double correlation_integral(const Matrix& points, double r, const CorrelationOptions& opts,
                            const std::vector<Eigen::Index>& indices)
{
    if (!(r > 0.0)) throw ValidationError("correlation radius must be > 0");
    if (points.rows() < 2) throw ValidationError("correlation integral needs at least 2 points");
    const std::vector<double> d = pair_distances(points, opts, indices);
    if (d.empty()) throw ValidationError("Theiler window excludes every pair");
    const auto below = std::lower_bound(d.begin(), d.end(), r) - d.begin();
    return static_cast<double>(below) / static_cast<double>(d.size());
}

double correlation_dimension_at(const Vector& values, int ed, const CiOptions& opts)
{
    if (opts.n_radii < 2) throw ValidationError("need at least 2 radii");
    if (!(opts.low_percentile >= 0.0 && opts.low_percentile < opts.high_percentile && opts.high_percentile <= 1.0))
        throw ValidationError("bad percentile range for the scaling region");

    Matrix points = delay_embed(values, ed, opts.tau);
    std::vector<Eigen::Index> indices(static_cast<std::size_t>(points.rows()));
    std::iota(indices.begin(), indices.end(), Eigen::Index{0});
    if (opts.max_points >= 2 && indices.size() > opts.max_points) {
        std::vector<Eigen::Index> chosen;
        std::mt19937_64 rng(mix_seed(opts.seed, static_cast<std::uint64_t>(ed)));
        std::sample(indices.begin(), indices.end(), std::back_inserter(chosen), opts.max_points, rng);
        Matrix sub(static_cast<Eigen::Index>(chosen.size()), points.cols());
        for (std::size_t i = 0; i < chosen.size(); ++i) sub.row(static_cast<Eigen::Index>(i)) = points.row(chosen[i]);
        points = std::move(sub);
        indices = std::move(chosen);
    }

    const std::vector<double> d = pair_distances(points, {opts.theiler_window}, indices);
    if (d.size() < 2) throw ValidationError("too few admissible pairs for a correlation dimension");
    const auto percentile = [&](double q) {
        return d[static_cast<std::size_t>(std::floor(q * static_cast<double>(d.size() - 1)))];
    };
    double r_lo = percentile(opts.low_percentile);
    const double r_hi = percentile(opts.high_percentile);
    if (!(r_lo > 0.0)) {
        const auto first_positive = std::upper_bound(d.begin(), d.end(), 0.0);
        r_lo = first_positive == d.end() ? 0.0 : *first_positive;
    }
    if (!(r_lo > 0.0) || !(r_hi > r_lo))
        throw ValidationError("degenerate scaling region: pairwise distances do not spread");

    const double log_lo = std::log(r_lo);
    const double step = (std::log(r_hi) - log_lo) / (opts.n_radii - 1);
    std::vector<double> xs;
    std::vector<double> ys;
    for (int k = 0; k < opts.n_radii; ++k) {
        const double log_r = log_lo + step * k;
        // the top radius is the median distance itself; include pairs equal to it
        const double r = k + 1 == opts.n_radii ? std::nextafter(r_hi, INFINITY) : std::exp(log_r);
        const auto below = std::lower_bound(d.begin(), d.end(), r) - d.begin();
        if (below == 0) continue;
        xs.push_back(log_r);
        ys.push_back(std::log(static_cast<double>(below) / static_cast<double>(d.size())));
    }
    if (xs.size() < 2) throw ValidationError("degenerate scaling region: too few populated radii");

    const auto nx = static_cast<double>(xs.size());
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / nx;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / nx;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    return std::max(0.0, sxy / sxx);
}

CiCurve correlation_dimension(const Vector& values, int ed_max, const CiOptions& opts)
{
    if (ed_max < 3) throw ValidationError("ed_max must be >= 3");
    if (values.size() == 0 || !values.allFinite()) throw ValidationError("series must be finite and non-empty");
    if (values.maxCoeff() == values.minCoeff())
        throw ValidationError("degenerate scaling region: constant series");

    CiCurve curve;
    for (int ed = 1; ed <= ed_max; ++ed) {
        curve.ed_values.push_back(ed);
        curve.cd_values.push_back(correlation_dimension_at(values, ed, opts));
    }
    const auto tail = curve.cd_values.end() - 3;
    const auto [lo, hi] = std::minmax_element(tail, curve.cd_values.end());
    const double mean = std::accumulate(tail, curve.cd_values.end(), 0.0) / 3.0;
    curve.saturation = (*hi - *lo) < opts.saturation_range && mean < ed_max / 2.0;
    if (curve.saturation) curve.cd_saturated = mean;
    return curve;
}

Label ci_label(const CiCurve& curve)
{
    return curve.saturation ? Label::NonStochastic : Label::Stochastic;
}

}  // namespace lss
