#include "ensamp/gaussian.hpp"

#include <cmath>
#include <sstream>

namespace ensamp {

namespace {

std::string pivot_message(std::size_t pivot, double value) {
    std::ostringstream os;
    os << "cholesky: matrix is not positive definite (pivot " << pivot << " = " << value << ")";
    return os.str();
}

}  // namespace

FactorizationError::FactorizationError(std::size_t pivot, double value)
    : std::runtime_error(pivot_message(pivot, value)), pivot_(pivot), value_(value) {}

bool all_finite(const Matrix& m) { return m.allFinite(); }

SpdMatrix::SpdMatrix(Matrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols() || m_.rows() == 0) {
        throw std::invalid_argument("SpdMatrix: matrix must be square and nonempty");
    }
    if (!m_.allFinite()) {
        throw std::invalid_argument("SpdMatrix: non-finite entry");
    }
    const double scale = std::max(m_.cwiseAbs().maxCoeff(), 1e-300);
    for (Eigen::Index i = 0; i < m_.rows(); ++i) {
        for (Eigen::Index j = 0; j < i; ++j) {
            if (std::abs(m_(i, j) - m_(j, i)) > 1e-12 * scale) {
                throw std::invalid_argument("SpdMatrix: matrix is not symmetric");
            }
        }
    }
}

Matrix cholesky(const SpdMatrix& spd) {
    const Matrix& m = spd.matrix();
    const Eigen::Index n = m.rows();
    Matrix l = Matrix::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        double d = m(j, j);
        for (Eigen::Index k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (!(d > 0.0)) throw FactorizationError(static_cast<std::size_t>(j), d);
        const double ljj = std::sqrt(d);
        l(j, j) = ljj;
        for (Eigen::Index i = j + 1; i < n; ++i) {
            double s = m(i, j);
            for (Eigen::Index k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / ljj;
        }
    }
    return l;
}

Vector sample_gaussian(const Vector& mean, const SpdMatrix& cov, SeededRng& rng) {
    return GaussianSampler(mean, cov)(rng);
}

GaussianSampler::GaussianSampler(Vector mean, const SpdMatrix& cov) : mean_(std::move(mean)) {
    if (static_cast<std::size_t>(mean_.size()) != cov.dim()) {
        throw std::invalid_argument("sample_gaussian: mean and covariance dimensions differ");
    }
    factor_ = cholesky(cov);
}

Vector GaussianSampler::operator()(SeededRng& rng) const {
    Vector z(mean_.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
    return mean_ + factor_.triangularView<Eigen::Lower>() * z;
}

SpdMatrix precision_rank_one_update(const SpdMatrix& cov, const Vector& a, double noise_var) {
    if (!(noise_var > 0.0)) throw std::invalid_argument("precision_rank_one_update: noise_var must be positive");
    if (static_cast<std::size_t>(a.size()) != cov.dim()) {
        throw std::invalid_argument("precision_rank_one_update: dimension mismatch");
    }
    const Vector u = cov.matrix() * a;
    const double s = noise_var + a.dot(u);
    Matrix next = cov.matrix() - (u * u.transpose()) / s;
    next = 0.5 * (next + next.transpose()).eval();
    return SpdMatrix(std::move(next), SpdMatrix::Trusted{});
}

}  // namespace ensamp
