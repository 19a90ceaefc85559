#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "mtxls/errors.hpp"

namespace mtxls {

namespace detail {

// Neumaier-compensated sum of products; keeps pairwise similarities honest
// at dimension 1024 where the rejection test and the 1e-9 identities live.
inline double compensated_dot(const std::vector<double>& a,
                              const std::vector<double>& b) {
    double sum = 0.0;
    double comp = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double term = a[i] * b[i];
        const double t = sum + term;
        if (std::abs(sum) >= std::abs(term)) {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
    }
    return sum + comp;
}

}  // namespace detail

// A unit-norm vector. Normalization happens once, at construction; every
// consumer may assume ||values|| == 1 within 1e-6 and all entries finite.
class Embedding {
public:
    Embedding() = default;

    explicit Embedding(std::vector<double> raw) : values_(std::move(raw)) {
        if (values_.empty()) {
            throw InvalidInputError("embedding: empty vector");
        }
        double norm_sq = 0.0;
        for (double v : values_) {
            if (!std::isfinite(v)) {
                throw InvalidInputError("embedding: non-finite entry");
            }
            norm_sq += v * v;
        }
        const double norm = std::sqrt(norm_sq);
        if (!(norm > 0.0) || !std::isfinite(norm)) {
            throw InvalidInputError("embedding: zero vector cannot be normalized");
        }
        for (double& v : values_) {
            v /= norm;
        }
    }

    const std::vector<double>& values() const { return values_; }
    std::size_t dimension() const { return values_.size(); }
    bool empty() const { return values_.empty(); }

    bool operator==(const Embedding& other) const {
        return values_ == other.values_;
    }

private:
    std::vector<double> values_;
};

// phi(a, b) = (1 + a.b) / 2, clamped to [0, 1]. Bounded similarity between
// two unit embeddings; the clamp matters because the rejection sampler uses
// phi-derived scores directly as acceptance probabilities.
inline double phi(const Embedding& a, const Embedding& b) {
    if (a.dimension() != b.dimension()) {
        throw InvalidInputError(
            "phi: dimension mismatch (" + std::to_string(a.dimension()) +
            " vs " + std::to_string(b.dimension()) + ")");
    }
    const double dot = detail::compensated_dot(a.values(), b.values());
    return std::clamp(0.5 * (1.0 + dot), 0.0, 1.0);
}

}  // namespace mtxls
