#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "ensamp/rng.hpp"

namespace ensamp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Raised when a Cholesky factorization meets a nonpositive pivot.
class FactorizationError : public std::runtime_error {
public:
    FactorizationError(std::size_t pivot, double value);
    std::size_t pivot() const noexcept { return pivot_; }
    double value() const noexcept { return value_; }

private:
    std::size_t pivot_;
    double value_;
};

bool all_finite(const Matrix& m);
inline bool all_finite(const Vector& v) { return v.allFinite(); }

// Square, symmetric (1e-12 relative), finite matrix. Positive definiteness is
// established by factorizing; see cholesky().
class SpdMatrix {
public:
    explicit SpdMatrix(Matrix m);

    static SpdMatrix identity(std::size_t dim) { return SpdMatrix(Matrix::Identity(dim, dim)); }
    static SpdMatrix scaled_identity(std::size_t dim, double scale) {
        return SpdMatrix(Matrix::Identity(dim, dim) * scale);
    }

    std::size_t dim() const noexcept { return static_cast<std::size_t>(m_.rows()); }
    const Matrix& matrix() const noexcept { return m_; }
    double operator()(std::size_t i, std::size_t j) const { return m_(i, j); }

private:
    friend SpdMatrix precision_rank_one_update(const SpdMatrix&, const Vector&, double);
    struct Trusted {};
    SpdMatrix(Matrix m, Trusted) : m_(std::move(m)) {}

    Matrix m_;
};

// Lower-triangular L with L * L^T == m. Throws FactorizationError naming the
// first pivot that is not strictly positive.
Matrix cholesky(const SpdMatrix& m);

// mean + L z, z standard normal.
Vector sample_gaussian(const Vector& mean, const SpdMatrix& cov, SeededRng& rng);

// Holds the factor so repeated draws avoid refactorizing.
class GaussianSampler {
public:
    GaussianSampler(Vector mean, const SpdMatrix& cov);
    Vector operator()(SeededRng& rng) const;
    std::size_t dim() const noexcept { return static_cast<std::size_t>(mean_.size()); }

private:
    Vector mean_;
    Matrix factor_;
};

// (cov^-1 + a a^T / noise_var)^-1 by Sherman-Morrison, then symmetrized.
SpdMatrix precision_rank_one_update(const SpdMatrix& cov, const Vector& a, double noise_var);

}  // namespace ensamp
