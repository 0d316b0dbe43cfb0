#include "bhfl/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "bhfl/error.hpp"
#include "bhfl/simd.hpp"

namespace bhfl {
namespace {

std::size_t check_inputs(VectorList vectors, const char* rule) {
    if (vectors.empty()) throw Error(ErrorKind::TooFewVectors, std::string(rule) + " needs at least one vector");
    const std::size_t d = vectors.front().size();
    for (const auto& v : vectors)
        require(v.size() == d, ErrorKind::DimensionMismatch, std::string(rule) + ": vectors differ in dimension");
    return d;
}

double median_of_sorted(const std::vector<double>& sorted) {
    const std::size_t m = sorted.size();
    if (m % 2 == 1) return sorted[m / 2];
    return 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
}

// Pairwise squared distances, row-major m x m.
std::vector<double> distance_matrix(VectorList vectors) {
    const std::size_t m = vectors.size();
    std::vector<double> dist(m * m, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j) {
            const double d2 = simd::squared_distance(vectors[i], vectors[j]);
            dist[i * m + j] = d2;
            dist[j * m + i] = d2;
        }
    return dist;
}

// Krum restricted to `pool`; returns the position within pool of the winner.
std::size_t krum_in_pool(const std::vector<double>& dist, std::size_t m, const std::vector<std::size_t>& pool,
                         std::size_t neighbours) {
    // Small pools score against a single neighbour, where mutually nearest
    // points tie exactly; the summed distance to the whole pool separates them
    // without depending on input order. Index order is the last resort.
    std::size_t best = 0;
    double best_score = std::numeric_limits<double>::infinity();
    double best_total = std::numeric_limits<double>::infinity();
    std::vector<double> row;
    for (std::size_t p = 0; p < pool.size(); ++p) {
        row.clear();
        for (std::size_t q = 0; q < pool.size(); ++q)
            if (q != p) row.push_back(dist[pool[p] * m + pool[q]]);
        const double total = std::accumulate(row.begin(), row.end(), 0.0);
        const std::size_t k = std::min(neighbours, row.size());
        std::partial_sort(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(k), row.end());
        const double score = std::accumulate(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(k), 0.0);
        const bool better = score < best_score ||
                            (score == best_score && (total < best_total || (total == best_total && pool[p] < pool[best])));
        if (better) {
            best_score = score;
            best_total = total;
            best = p;
        }
    }
    return best;
}

}  // namespace

std::string to_string(AggregatorKind kind) {
    switch (kind) {
        case AggregatorKind::Mean: return "mean";
        case AggregatorKind::CoordTrimmedMean: return "coord_trimmed_mean";
        case AggregatorKind::NormTrimmedMean: return "norm_trimmed_mean";
        case AggregatorKind::CoordMedian: return "coord_median";
        case AggregatorKind::GeoMedian: return "geometric_median";
        case AggregatorKind::Krum: return "krum";
        case AggregatorKind::Bulyan: return "bulyan";
        case AggregatorKind::MKrum: return "mkrum";
    }
    return "unknown";
}

std::size_t trim_count(double beta, std::size_t m) {
    // The epsilon absorbs representation error such as 0.3 * 10 > 3.
    const double raw = beta * static_cast<double>(m);
    return static_cast<std::size_t>(std::ceil(raw - 1e-9));
}

void AggregatorSpec::validate(std::size_t m) const {
    const auto fail = [](const std::string& what) { throw Error(ErrorKind::TooFewVectors, what); };
    if (m == 0) fail("aggregation over zero devices");
    switch (kind) {
        case AggregatorKind::CoordTrimmedMean:
            if (!(beta >= 0.0 && beta < 0.5)) fail("beta must lie in [0, 0.5)");
            if (m < 2 * trim_count(beta, m) + 1) fail("coordinate trimming leaves no values");
            break;
        case AggregatorKind::NormTrimmedMean:
            if (!(beta >= 0.0 && beta < 1.0)) fail("beta must lie in [0, 1)");
            if (m < trim_count(beta, m) + 1) fail("norm trimming leaves no vectors");
            break;
        case AggregatorKind::Krum:
        case AggregatorKind::MKrum:
            if (m < f + 3) fail("krum needs m >= f + 3");
            if (!(momentum >= 0.0 && momentum < 1.0)) fail("momentum must lie in [0, 1)");
            break;
        case AggregatorKind::Bulyan:
            if (m < 4 * f + 3) fail("bulyan needs m >= 4f + 3");
            break;
        case AggregatorKind::GeoMedian:
            if (!(tol > 0.0) || max_iter == 0) fail("geometric median needs tol > 0 and max_iter >= 1");
            break;
        case AggregatorKind::Mean:
        case AggregatorKind::CoordMedian:
            break;
    }
}

ParamVector mean(VectorList vectors) {
    const std::size_t d = check_inputs(vectors, "mean");
    ParamVector acc(d, 0.0);
    for (const auto& v : vectors) simd::axpy(1.0, v, acc);
    simd::scale(1.0 / static_cast<double>(vectors.size()), acc);
    return acc;
}

ParamVector coord_trimmed_mean(VectorList vectors, double beta) {
    const std::size_t d = check_inputs(vectors, "coord_trimmed_mean");
    const std::size_t m = vectors.size();
    const std::size_t k = trim_count(beta, m);
    if (m < 2 * k + 1)
        throw Error(ErrorKind::TooFewVectors, "coordinate trimming of " + std::to_string(k) + " per side leaves no values of " +
                                                  std::to_string(m));
    if (k == 0) return mean(vectors);
    ParamVector out(d, 0.0);
    std::vector<double> column(m);
    for (std::size_t c = 0; c < d; ++c) {
        for (std::size_t i = 0; i < m; ++i) column[i] = vectors[i][c];
        std::sort(column.begin(), column.end());
        double acc = 0.0;
        for (std::size_t i = k; i < m - k; ++i) acc += column[i];
        out[c] = acc / static_cast<double>(m - 2 * k);
    }
    return out;
}

ParamVector norm_trimmed_mean(VectorList vectors, double beta) {
    const std::size_t d = check_inputs(vectors, "norm_trimmed_mean");
    const std::size_t m = vectors.size();
    const std::size_t k = trim_count(beta, m);
    if (m < k + 1) throw Error(ErrorKind::TooFewVectors, "norm trimming leaves no vectors");
    if (k == 0) return mean(vectors);
    std::vector<double> norms(m);
    for (std::size_t i = 0; i < m; ++i) norms[i] = simd::squared_norm(vectors[i]);
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return norms[a] < norms[b]; });
    // Summing kept vectors in device order makes the result independent of
    // how ties in norm were ordered.
    std::sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m - k));
    ParamVector acc(d, 0.0);
    for (std::size_t i = 0; i < m - k; ++i) simd::axpy(1.0, vectors[order[i]], acc);
    simd::scale(1.0 / static_cast<double>(m - k), acc);
    return acc;
}

ParamVector coord_median(VectorList vectors) {
    const std::size_t d = check_inputs(vectors, "coord_median");
    const std::size_t m = vectors.size();
    ParamVector out(d, 0.0);
    std::vector<double> column(m);
    for (std::size_t c = 0; c < d; ++c) {
        for (std::size_t i = 0; i < m; ++i) column[i] = vectors[i][c];
        std::sort(column.begin(), column.end());
        out[c] = median_of_sorted(column);
    }
    return out;
}

double geometric_objective(VectorList vectors, ConstVec y) {
    double total = 0.0;
    for (const auto& v : vectors) total += std::sqrt(simd::squared_distance(v, y));
    return total;
}

ParamVector geometric_median(VectorList vectors, double tol, std::size_t max_iter) {
    const std::size_t d = check_inputs(vectors, "geometric_median");
    const std::size_t m = vectors.size();
    if (m == 1) return vectors.front();
    ParamVector y = mean(vectors);
    ParamVector weighted(d);
    ParamVector residual(d);
    std::vector<double> dist(m);
    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        double scale = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            dist[i] = std::sqrt(simd::squared_distance(vectors[i], y));
            scale = std::max(scale, dist[i]);
        }
        const double coincide = 1e-12 * std::max(scale, 1.0);
        std::fill(weighted.begin(), weighted.end(), 0.0);
        std::fill(residual.begin(), residual.end(), 0.0);
        double weight_sum = 0.0;
        std::size_t coincident = 0;
        for (std::size_t i = 0; i < m; ++i) {
            if (dist[i] <= coincide) {
                ++coincident;
                continue;
            }
            const double w = 1.0 / dist[i];
            weight_sum += w;
            simd::axpy(w, vectors[i], weighted);
            for (std::size_t c = 0; c < d; ++c) residual[c] += (vectors[i][c] - y[c]) * w;
        }
        if (weight_sum == 0.0) return y;  // every input coincides with y
        simd::scale(1.0 / weight_sum, weighted);
        ParamVector next = weighted;
        if (coincident > 0) {
            // Vardi-Zhang: y is optimal when the pull of the other points does
            // not exceed the mass sitting on y; otherwise blend away from it.
            const double pull = std::sqrt(simd::squared_norm(residual));
            const double mass = static_cast<double>(coincident);
            if (pull <= mass) return y;
            const double keep = mass / pull;
            for (std::size_t c = 0; c < d; ++c) next[c] = (1.0 - keep) * weighted[c] + keep * y[c];
        }
        const double step = std::sqrt(simd::squared_distance(next, y));
        y = std::move(next);
        if (step < tol) break;
    }
    return y;
}

std::vector<double> krum_scores(VectorList vectors, std::size_t f) {
    check_inputs(vectors, "krum");
    const std::size_t m = vectors.size();
    if (m < f + 3) throw Error(ErrorKind::TooFewVectors, "krum needs m >= f + 3");
    const auto dist = distance_matrix(vectors);
    const std::size_t neighbours = m - f - 2;
    std::vector<double> scores(m);
    std::vector<double> row;
    for (std::size_t i = 0; i < m; ++i) {
        row.clear();
        for (std::size_t j = 0; j < m; ++j)
            if (j != i) row.push_back(dist[i * m + j]);
        std::partial_sort(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(neighbours), row.end());
        scores[i] = std::accumulate(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(neighbours), 0.0);
    }
    return scores;
}

std::size_t krum_index(VectorList vectors, std::size_t f) {
    const auto scores = krum_scores(vectors, f);
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i)
        if (scores[i] < scores[best]) best = i;
    return best;
}

ParamVector krum(VectorList vectors, std::size_t f) { return vectors[krum_index(vectors, f)]; }

ParamVector bulyan(VectorList vectors, std::size_t f) {
    const std::size_t d = check_inputs(vectors, "bulyan");
    const std::size_t m = vectors.size();
    if (m < 4 * f + 3) throw Error(ErrorKind::TooFewVectors, "bulyan needs m >= 4f + 3");
    const std::size_t selected_count = m - 2 * f;
    const std::size_t kept = m - 4 * f;

    const auto dist = distance_matrix(vectors);
    std::vector<std::size_t> pool(m);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    std::vector<std::size_t> selected;
    selected.reserve(selected_count);
    while (selected.size() < selected_count) {
        // Late in the selection the pool can be smaller than f + 3; score
        // against at least one neighbour so the rule stays defined.
        const std::size_t neighbours = pool.size() > f + 2 ? pool.size() - f - 2 : 1;
        const std::size_t pos = krum_in_pool(dist, m, pool, neighbours);
        selected.push_back(pool[pos]);
        pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pos));
    }

    ParamVector out(d, 0.0);
    std::vector<double> column(selected_count);
    std::vector<std::size_t> order(selected_count);
    for (std::size_t c = 0; c < d; ++c) {
        for (std::size_t i = 0; i < selected_count; ++i) column[i] = vectors[selected[i]][c];
        std::vector<double> sorted = column;
        std::sort(sorted.begin(), sorted.end());
        const double med = median_of_sorted(sorted);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return std::fabs(column[a] - med) < std::fabs(column[b] - med);
        });
        double acc = 0.0;
        for (std::size_t i = 0; i < kept; ++i) acc += column[order[i]];
        out[c] = acc / static_cast<double>(kept);
    }
    return out;
}

ParamVector aggregate(const AggregatorSpec& spec, VectorList vectors) {
    switch (spec.kind) {
        case AggregatorKind::Mean: return mean(vectors);
        case AggregatorKind::CoordTrimmedMean: return coord_trimmed_mean(vectors, spec.beta);
        case AggregatorKind::NormTrimmedMean: return norm_trimmed_mean(vectors, spec.beta);
        case AggregatorKind::CoordMedian: return coord_median(vectors);
        case AggregatorKind::GeoMedian: return geometric_median(vectors, spec.tol, spec.max_iter);
        case AggregatorKind::Krum:
        case AggregatorKind::MKrum: return krum(vectors, spec.f);
        case AggregatorKind::Bulyan: return bulyan(vectors, spec.f);
    }
    return mean(vectors);
}

}  // namespace bhfl
