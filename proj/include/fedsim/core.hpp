#pragma once
// Shared value types and primitive operations: flat double vectors for
// model parameters and client updates, round bookkeeping, and the
// distance/update helpers everything else is built on.

#include <cstdint>
#include <string>
#include <vector>

#include "fedsim/kernels.hpp"
#include "fedsim/rng.hpp"

namespace fedsim {

// Both are flat, fixed-dimension, finite double vectors; an update is the
// parameter delta theta_local - theta_global.
using ModelParams = std::vector<double>;
using UpdateVector = std::vector<double>;

struct RoundContext {
    std::int64_t round = 0;   // 0-based round index
    double global_lr = 1.0;   // eta applied server-side
    double client_lr = 0.1;   // alpha used inside local training
};

// Throws std::invalid_argument naming `what` if v contains NaN/Inf.
void check_finite(const std::vector<double>& v, const std::string& what);

// Throws std::invalid_argument naming `what` on dimension mismatch.
void check_same_dim(const std::vector<double>& a, const std::vector<double>& b,
                    const std::string& what);

// Throws unless every update is non-empty, finite, and of equal dimension.
void check_update_set(const std::vector<UpdateVector>& updates, const std::string& what);

// Euclidean distance; dimensions must match.
double l2_distance(const UpdateVector& a, const UpdateVector& b);

double l2_norm(const std::vector<double>& v);

// theta + eta * update; dimensions must match and the result must be finite.
ModelParams apply_global_update(const ModelParams& theta, const UpdateVector& update,
                                double eta);

// Coordinate-wise mean of an update set (the building block fedavg wraps).
UpdateVector mean_update(const std::vector<UpdateVector>& updates);

// Mean over coordinates of the per-coordinate population variance across
// the set; the variance diagnostic recorded every round.
double mean_coordinate_variance(const std::vector<UpdateVector>& updates);

} // namespace fedsim
