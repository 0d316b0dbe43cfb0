#pragma once

// Server-side aggregation rules. Every rule takes the m uploaded vectors of
// one round (all of equal dimension) and returns a single vector.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "bhfl/types.hpp"

namespace bhfl {

enum class AggregatorKind {
    Mean,
    CoordTrimmedMean,
    NormTrimmedMean,
    CoordMedian,
    GeoMedian,
    Krum,
    Bulyan,
    MKrum,
};

struct AggregatorSpec {
    AggregatorKind kind = AggregatorKind::Mean;
    double beta = 0.0;        // trimmed means
    std::size_t f = 0;        // Krum family
    double tol = 1e-8;        // Weiszfeld
    std::size_t max_iter = 1000;
    double momentum = 0.9;    // MKrum, applied by the engine on the devices

    /// Throws TooFewVectors if the rule is undefined for m inputs.
    void validate(std::size_t m) const;
};

std::string to_string(AggregatorKind kind);

using VectorList = std::span<const ParamVector>;

/// Number of entries trimmed for fraction beta of m: ceil(beta * m).
std::size_t trim_count(double beta, std::size_t m);

ParamVector mean(VectorList vectors);

/// Per coordinate: drop the ceil(beta m) smallest and largest values and
/// average the rest.
ParamVector coord_trimmed_mean(VectorList vectors, double beta);

/// Keep the m - ceil(beta m) vectors of smallest Euclidean norm (ties by
/// index) and average them.
ParamVector norm_trimmed_mean(VectorList vectors, double beta);

ParamVector coord_median(VectorList vectors);

/// Weiszfeld iteration for argmin_y sum_i ||y - g_i||, started at the mean.
/// An iterate landing on an input point takes the Vardi-Zhang step.
ParamVector geometric_median(VectorList vectors, double tol = 1e-8, std::size_t max_iter = 1000);

/// Sum of Euclidean distances from y to every vector.
double geometric_objective(VectorList vectors, ConstVec y);

/// Krum scores: sum of squared distances to the m - f - 2 nearest others.
std::vector<double> krum_scores(VectorList vectors, std::size_t f);
/// Index of the minimum Krum score, lowest index on ties.
std::size_t krum_index(VectorList vectors, std::size_t f);
ParamVector krum(VectorList vectors, std::size_t f);

/// Selects m - 2f vectors by repeated Krum, then averages per coordinate the
/// m - 4f selected values closest to the coordinate median.
ParamVector bulyan(VectorList vectors, std::size_t f);

/// Dispatch on spec.kind. MKrum aggregates like Krum; its momentum lives
/// on the devices.
ParamVector aggregate(const AggregatorSpec& spec, VectorList vectors);

}  // namespace bhfl
