#include "fedsim/core.hpp"

#include <cmath>
#include <stdexcept>

namespace fedsim {

void check_finite(const std::vector<double>& v, const std::string& what) {
    for (double x : v)
        if (!std::isfinite(x))
            throw std::invalid_argument(what + ": contains a non-finite value");
}

void check_same_dim(const std::vector<double>& a, const std::vector<double>& b,
                    const std::string& what) {
    if (a.size() != b.size())
        throw std::invalid_argument(what + ": dimension mismatch (" +
                                    std::to_string(a.size()) + " vs " +
                                    std::to_string(b.size()) + ")");
}

void check_update_set(const std::vector<UpdateVector>& updates, const std::string& what) {
    if (updates.empty())
        throw std::invalid_argument(what + ": empty update set");
    const std::size_t d = updates.front().size();
    if (d == 0)
        throw std::invalid_argument(what + ": zero-dimensional update");
    for (const auto& u : updates) {
        if (u.size() != d)
            throw std::invalid_argument(what + ": updates have mixed dimensions");
        check_finite(u, what);
    }
}

double l2_distance(const UpdateVector& a, const UpdateVector& b) {
    check_same_dim(a, b, "l2_distance");
    return std::sqrt(kernels::active().sumsq_diff(a.data(), b.data(), a.size()));
}

double l2_norm(const std::vector<double>& v) {
    return std::sqrt(kernels::active().dot(v.data(), v.data(), v.size()));
}

ModelParams apply_global_update(const ModelParams& theta, const UpdateVector& update,
                                double eta) {
    check_same_dim(theta, update, "apply_global_update");
    ModelParams out = theta;
    kernels::active().axpy(eta, update.data(), out.data(), out.size());
    check_finite(out, "apply_global_update: result");
    return out;
}

UpdateVector mean_update(const std::vector<UpdateVector>& updates) {
    check_update_set(updates, "mean_update");
    const std::size_t d = updates.front().size();
    UpdateVector mean(d, 0.0);
    for (const auto& u : updates) kernels::active().add(u.data(), mean.data(), d);
    kernels::active().scale(mean.data(), d, 1.0 / static_cast<double>(updates.size()));
    return mean;
}

double mean_coordinate_variance(const std::vector<UpdateVector>& updates) {
    check_update_set(updates, "mean_coordinate_variance");
    const std::size_t d = updates.front().size();
    const UpdateVector mean = mean_update(updates);
    std::vector<double> acc(d, 0.0);
    for (const auto& u : updates)
        kernels::active().acc_sq_diff(u.data(), mean.data(), acc.data(), d);
    const double total = kernels::active().sum(acc.data(), d);
    return total / (static_cast<double>(updates.size()) * static_cast<double>(d));
}

} // namespace fedsim
